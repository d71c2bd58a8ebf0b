// Acceptance suite: one PASS/FAIL line per criterion.
// usage: acceptance <path to shelab CLI> <configs dir>

#include "shelab/bounds/bounds.hpp"
#include "shelab/coeff/constants.hpp"
#include "shelab/error.hpp"
#include "shelab/estimators/estimators.hpp"
#include "shelab/harness/config.hpp"
#include "shelab/harness/experiments.hpp"
#include "shelab/harness/results.hpp"
#include "shelab/kernel/heat_kernel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>

namespace fs = std::filesystem;
using namespace shelab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path g_cli;
fs::path g_configs;

harness::ExperimentConfig config(const std::string& name) { return harness::load_config(g_configs / name); }

// Exact variance of u_M at the centre cell of the frozen-boundary lattice
// under additive unit noise: (dt/dx) sum_n |A^n e_c|^2 over interior cells.
double lattice_variance(double R, double dx, double dt, double T) {
    const long half = std::lround(R / dx);
    const long cells = 2 * half + 1;
    const long steps = std::lround(T / dt);
    const double lambda = dt / (2 * dx * dx);
    std::vector<double> v(cells, 0.0), w(cells, 0.0);
    v[half] = 1.0;
    double total = 0.0;
    for (long n = 0; n < steps; ++n) {
        double sq = 0.0;
        for (long j = 1; j + 1 < cells; ++j) sq += v[j] * v[j];
        total += sq;
        for (long j = 1; j + 1 < cells; ++j) w[j] = v[j] + lambda * (v[j + 1] - 2 * v[j] + v[j - 1]);
        w[0] = w[cells - 1] = 0.0;
        v.swap(w);
    }
    return total * dt / dx;
}

Outcome kernel_identity() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double r : {0.1, 1.0, 10.0}) {
        const double closed = 0.5 / std::sqrt(std::numbers::pi * r);
        worst = std::max(worst, std::fabs(kernel::kernel_l2_norm_sq_quadrature(r) - closed));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < 1e-8 && secs < 1.0, fmt("max |quadrature - closed form| = %.3g, %.3f s", worst, secs)};
}

Outcome additive_variance() {
    const auto cfg = config("additive_noise.json");
    const auto problem = harness::make_problem(cfg);
    const solver::Solver solver(problem);
    const auto probes = harness::make_probes(cfg);
    const auto e = estimators::sample_ensemble(solver, coeff::TruncationLevel::unbounded(), cfg.seed,
                                               cfg.replications, probes, threads());
    const auto& s = e.table.samples[probes.find(0.25, 0.0)];
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= s.size();
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= s.size() - 1;
    const double t = 0.25;
    const double oracle = std::sqrt(t / std::numbers::pi);
    const double rel = std::fabs(var - oracle) / oracle;

    // Discretization error without sampling noise, at dx and dx/2 (dt scaled by 1/4).
    const auto& g = cfg.grid;
    const double coarse = std::fabs(lattice_variance(g.R, g.dx, g.dt, t) - oracle);
    const double fine = std::fabs(lattice_variance(g.R, g.dx / 2, g.dt / 4, t) - oracle);
    return {rel < 0.10 && fine < coarse,
            fmt("sample variance %.5f vs %.5f (rel err %.3f, n=%zu); lattice error %.3g -> %.3g when dx halves", var,
                oracle, rel, s.size(), coarse, fine)};
}

Outcome mean_preservation() {
    const auto cfg = config("mean.json");
    const solver::Solver solver(harness::make_problem(cfg));
    const auto probes = harness::make_probes(cfg);
    const auto e = estimators::sample_ensemble(solver, coeff::TruncationLevel(cfg.levels.at(0)), cfg.seed,
                                               cfg.replications, probes, threads());
    const auto& s = e.table.samples[probes.find(0.25, 0.0)];
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= s.size();
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    var /= s.size() - 1;
    const double se = std::sqrt(var / s.size());
    const double z = std::fabs(mean - 1.0) / se;
    return {z <= 3.0 && e.aborted.empty(), fmt("mean %.5f, standard error %.5f, |z| = %.2f", mean, se, z)};
}

Outcome moment_domination() {
    const auto cfg = config("moments.json");
    const auto rs = harness::run_moment_verification(cfg, {threads()});
    std::size_t checked = 0, bad = 0;
    double min_margin = INFINITY;
    for (const auto& r : rs.records) {
        const bool in_scope = (*r.k == 2 || *r.k == 4) && (*r.N == 1 || *r.N == 2) &&
                              (std::fabs(*r.t - 0.1) < 1e-12 || std::fabs(*r.t - 0.25) < 1e-12);
        if (!in_scope) continue;
        ++checked;
        const double margin = *r.bound_log - std::log(*r.ci_hi);
        min_margin = std::min(min_margin, margin);
        if (r.verdict != "dominates" || !(margin > 0)) ++bad;
    }
    // 2 orders x 2 levels x 2 times x probe positions
    const bool complete = checked >= 8 && checked == rs.records.size();
    return {complete && bad == 0 && harness::failures(rs).empty(),
            fmt("%zu probes, %zu violations, min log-margin %.2f", checked, bad, min_margin)};
}

Outcome spot_values() {
    auto exact = [](double got, double want) { return std::fabs(got - want) <= 1e-12 * std::fabs(want); };
    bounds::ProblemConstants u;
    u.L_sigma = 1;
    bounds::ProblemConstants b;
    b.sigma_sup = 1;
    const auto tail = bounds::tail_bound_unbounded_sigma(16, 0.01, u);
    const bool ok = exact(*bounds::moment_bound_unbounded_sigma(2, 0, u).bound.value, 16) &&
                    exact(*bounds::moment_bound_bounded_sigma(2, 0, b).bound.value, 32) &&
                    exact(tail.bound, std::exp(-10.0)) && exact(tail.validity.threshold, 10.24) &&
                    tail.validity.holds && exact(bounds::beta_for_moments(2, 1), 512) &&
                    exact(bounds::beta_for_convergence(1, 1, 1), 4096);
    return {ok, "16, 32, e^-10 (threshold 10.24), 512, 4096"};
}

Outcome tail_domination() {
    const auto cfg = config("tails.json");
    const auto rs = harness::run_tail_verification(cfg, {threads()});
    std::size_t valid = 0, bad = 0, na = 0;
    for (const auto& r : rs.records) {
        if (r.verdict == "not-applicable") {
            ++na;
            continue;
        }
        ++valid;
        if (r.verdict != "dominates" || !(std::log(*r.ci_hi) <= *r.bound_log)) ++bad;
    }
    return {valid > 0 && bad == 0,
            fmt("%zu valid rows, %zu violations, %zu not-applicable rows kept", valid, bad, na)};
}

Outcome coupled_identity() {
    const auto cfg = config("uniqueness.json");
    const auto rs = harness::run_uniqueness_coupling(cfg, {threads()});
    std::size_t identical_pairs = 0, parse_ok = 0, parse_total = 0;
    for (const auto& r : rs.records) {
        if (r.experiment == "uniqueness/parse-twice") {
            ++parse_total;
            parse_ok += r.verdict == "identical";
        }
        if (r.experiment == "uniqueness/level-pair" && r.verdict == "identical") ++identical_pairs;
    }
    const auto f = harness::failures(rs);
    return {f.empty() && parse_ok == parse_total && identical_pairs > 0,
            fmt("%zu/%zu parse-twice identical, %zu inactive-clamp pairs bit-identical, %zu failures", parse_ok,
                parse_total, identical_pairs, f.size())};
}

Outcome convergence_decay() {
    auto cfg = config("convergence.json");
    bool ok = true;
    std::ostringstream detail;
    for (std::uint64_t seed : {cfg.seed, cfg.seed + 1, cfg.seed + 2}) {
        cfg.seed = seed;
        const auto rs = harness::run_truncation_convergence(cfg, {threads()});
        for (const auto& fit : rs.fits) {
            const bool good = fit.active_levels >= 3 && fit.nonincreasing && fit.slope && *fit.slope < 0;
            ok = ok && good;
            detail << fmt("seed %llu k=%g: %zu active, slope %.3g%s; ", static_cast<unsigned long long>(seed), fit.k,
                          fit.active_levels, fit.slope ? *fit.slope : NAN, fit.nonincreasing ? "" : " NOT monotone");
        }
    }
    return {ok, detail.str()};
}

Outcome lipschitz() {
    using namespace coeff;
    // Adjacent quotients give 4 - step on [-2, 2]; step 1e-3 would sit on the tolerance edge.
    const double sq = local_lipschitz_constant(Coefficient::from_source("x^2"), 2.0, 1e-4);
    const auto osc = Coefficient::from_builtin(builtin::Oscillator{}, "oscillator");
    auto f = [](double x) { return std::sin(1000.0 * std::pow(1.0 + std::fabs(x), 0.25)); };
    double oracle = 0.0;
    for (long i = -200000; i < 200000; ++i) {
        const double x = i * 1e-5, y = (i + 1) * 1e-5;
        oracle = std::max(oracle, std::fabs(f(y) - f(x)) / (y - x));
    }
    const double lo = local_lipschitz_constant(osc, 1.0, 1e-4);
    const double lg = linear_growth_constant(Coefficient::from_source("x"), {-100, 100}, 1e-3);
    const bool ok = std::fabs(sq - 4.0) <= 1e-3 && std::fabs(lo - oracle) <= 0.02 * oracle &&
                    std::fabs(lg - 0.9901) <= 1e-6;
    return {ok, fmt("Lip_2(x^2) = %.6f, oscillator %.3f vs oracle %.3f, L(x) = %.7f", sq, lo, oracle, lg)};
}

Outcome checker() {
    auto verdict = [](const std::string& name) { return harness::run_assumption_check(config(name)); };
    const auto lin = verdict("check_linear.json");
    const auto quad = verdict("check_quadratic.json");
    const auto osc = verdict("check_oscillator.json");
    const auto osc2 = verdict("check_oscillator.json");
    const bool per_clause = osc.details.contains("diffusion_clause") && osc.details.contains("ratio_clause") &&
                            osc.details["diffusion_clause"].contains("verdict") &&
                            osc.details["ratio_clause"].contains("verdict");
    const bool ok = lin.details["verdict"] == "pass" && quad.details["verdict"] == "fail" && per_clause &&
                    osc == osc2 && harness::run_assumption_check(config("check_linear.json")) == lin;
    return {ok, "(x,x) " + lin.details["verdict"].get<std::string>() + ", (x^2,x) " +
                    quad.details["verdict"].get<std::string>() + ", oscillator clauses: diffusion " +
                    osc.details["diffusion_clause"]["verdict"].get<std::string>() + ", ratio " +
                    osc.details["ratio_clause"]["verdict"].get<std::string>()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome pipeline_determinism() {
    const fs::path base = fs::temp_directory_path() / "shelab_acceptance";
    fs::remove_all(base);
    const std::string cfg = (g_configs / "moments.json").string();
    std::vector<std::string> csv;
    for (int t : {1, 4}) {
        const fs::path out = base / ("threads" + std::to_string(t));
        const std::string cmd = "\"" + g_cli.string() + "\" verify-moments \"" + cfg + "\" --threads " +
                                std::to_string(t) + " --out \"" + out.string() + "\" > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
        csv.push_back(slurp(out / "verify-moments.csv"));
    }
    fs::remove_all(base);
    const bool ok = !csv[0].empty() && csv[0] == csv[1];
    return {ok, fmt("--threads 1 vs 4: %zu bytes each, %s", csv[0].size(), ok ? "identical" : "DIFFERENT")};
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: acceptance <shelab CLI> <configs dir>\n";
        return 2;
    }
    g_cli = argv[1];
    g_configs = argv[2];

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"kernel L2 identity", kernel_identity},
        {"additive-noise variance", additive_variance},
        {"mean preservation", mean_preservation},
        {"moment-bound domination", moment_domination},
        {"bound spot values", spot_values},
        {"tail domination", tail_domination},
        {"coupled-truncation identity", coupled_identity},
        {"convergence decay", convergence_decay},
        {"Lipschitz estimators", lipschitz},
        {"assumption checker", checker},
        {"full-pipeline determinism", pipeline_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
