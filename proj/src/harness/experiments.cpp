#include "shelab/harness/experiments.hpp"

#include "shelab/bounds/bounds.hpp"
#include "shelab/coeff/constants.hpp"
#include "shelab/error.hpp"
#include "shelab/estimators/estimators.hpp"
#include "shelab/parallel.hpp"
#include "shelab/simd/kernels.hpp"
#include "shelab/solver/trajectory_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace shelab::harness {

using nlohmann::json;

namespace {

ResultSet start(const std::string& experiment, const ExperimentConfig& config) {
    ResultSet r;
    r.experiment = experiment;
    r.provenance.config_hash = config_hash(config);
    r.provenance.seed = config.seed;
    r.provenance.replications = config.replications;
    r.provenance.config = to_json(config);
    r.details = json::object();
    r.details["failures"] = json::array();
    return r;
}

Record record(const ResultSet& r, const std::string& experiment) {
    Record rec;
    rec.experiment = experiment;
    rec.seed = r.provenance.seed;
    rec.config_hash = r.provenance.config_hash;
    return rec;
}

void fail(ResultSet& r, const std::string& message) { r.details["failures"].push_back(message); }

void check_abort_budget(ResultSet& r, std::size_t aborted, std::size_t total, double level) {
    r.aborted += aborted;
    if (static_cast<double>(aborted) > kAbortBudget * static_cast<double>(total)) {
        throw ExperimentFailure(std::to_string(aborted) + " of " + std::to_string(total) +
                                " replications aborted at N=" + format_number(level) + " (budget 1%)");
    }
}

json constants_json(const bounds::ProblemConstants& k) {
    return json{{"L_b", k.L_b},
                {"L_sigma", k.L_sigma},
                {"L_sigma_effective", k.effective_L_sigma()},
                {"u0_norm", k.u0_norm},
                {"sigma_sup", k.sigma_sup ? json(*k.sigma_sup) : json(nullptr)},
                {"c", k.c},
                {"inflate_sigma", k.inflate_sigma}};
}

bounds::ProblemConstants prepare_constants(ResultSet& r, const ExperimentConfig& config, const solver::Problem& p) {
    ResolvedConstants rc = resolve_constants(config, p);
    for (auto& n : rc.notes) r.notes.push_back(std::move(n));
    r.details["constants"] = constants_json(rc.constants);
    return rc.constants;
}

} // namespace

std::vector<std::string> failures(const ResultSet& results) {
    if (!results.details.is_object() || !results.details.contains("failures")) return {};
    return results.details["failures"].get<std::vector<std::string>>();
}

ResultSet run_moment_verification(const ExperimentConfig& config, const RunOptions& options) {
    ResultSet r = start("verify-moments", config);
    const solver::Problem problem = make_problem(config);
    const bounds::ProblemConstants constants = prepare_constants(r, config, problem);
    const auto probes = make_probes(config);

    // Reject orders outside the bound's range before simulating.
    for (double k : config.orders) {
        const auto b = bounds::moment_bound(k, 0.0, constants);
        if (!b.validity.holds) throw ConfigError("orders: k=" + format_number(k) + " violates " + b.validity.clause);
    }
    if (config.replications < estimators::kMinReplicationsForInterval) {
        r.notes.push_back("fewer than 30 replications: estimates compared without a confidence interval");
    }

    const solver::Solver solver(problem);
    double min_margin = std::numeric_limits<double>::infinity();
    for (double N : config.levels) {
        const coeff::TruncationLevel level(N);
        const auto ens = estimators::sample_ensemble(solver, level, config.seed, config.replications, probes,
                                                     options.threads);
        check_abort_budget(r, ens.aborted.size(), config.replications, N);
        for (double k : config.orders) {
            for (std::size_t p = 0; p < probes.size(); ++p) {
                const auto& probe = probes[p];
                const auto est = estimators::lk_norm_at(ens.table, k, p);
                const auto bound = bounds::moment_bound(k, probe.t, constants);
                const double upper = est.has_interval ? est.hi : est.mean;
                const auto rep = bounds::compare(bound.bound.log, bound.validity, upper);
                Record rec = record(r, r.experiment);
                rec.N = N;
                rec.k = k;
                rec.t = probe.t;
                rec.x = probe.x;
                rec.estimate = est.mean;
                rec.ci_lo = est.lo;
                rec.ci_hi = est.hi;
                rec.bound_log = bound.bound.log;
                rec.verdict = bounds::to_string(rep.verdict);
                r.records.push_back(std::move(rec));
                if (rep.verdict == bounds::Outcome::Dominates) min_margin = std::min(min_margin, rep.log_margin());
                if (rep.verdict == bounds::Outcome::Violated) {
                    fail(r, "moment bound violated at N=" + format_number(N) + ", k=" + format_number(k) +
                                ", t=" + format_number(probe.t) + ", x=" + format_number(probe.x));
                }
            }
        }
    }
    r.details["min_log_margin"] = std::isfinite(min_margin) ? json(min_margin) : json(nullptr);
    return r;
}

ResultSet run_tail_verification(const ExperimentConfig& config, const RunOptions& options) {
    ResultSet r = start("verify-tails", config);
    const solver::Problem problem = make_problem(config);
    const bounds::ProblemConstants constants = prepare_constants(r, config, problem);
    const auto probes = make_probes(config);

    auto bound_at = [&](double N, double t) -> std::optional<bounds::TailBound> {
        if (!(t > 0.0) && !constants.sigma_sup) return std::nullopt;
        if (!(N > 0.0) && !constants.sigma_sup) return std::nullopt;
        return bounds::tail_bound(N, t, constants);
    };
    bool any_valid = false;
    for (double N : config.levels) {
        for (const auto& probe : probes.probes()) {
            const auto b = bound_at(N, probe.t);
            any_valid = any_valid || (b && b->validity.holds);
        }
    }
    if (!any_valid) throw ConfigError("levels: no (N, t) pair satisfies the tail bound's validity range");

    const solver::Solver solver(problem);
    for (double N : config.levels) {
        // P{|u_{N+1}| >= e^N}
        const coeff::TruncationLevel level(N + 1.0);
        const double threshold = std::exp(N);
        const auto ens = estimators::sample_ensemble(solver, level, config.seed, config.replications, probes,
                                                     options.threads);
        check_abort_budget(r, ens.aborted.size(), config.replications, N);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const auto& probe = probes[p];
            const auto tail = estimators::tail_probability_at(ens.table, threshold, p);
            Record rec = record(r, r.experiment);
            rec.N = N;
            rec.t = probe.t;
            rec.x = probe.x;
            rec.estimate = tail.probability;
            rec.ci_lo = tail.interval.lo;
            rec.ci_hi = tail.interval.hi;
            const auto b = bound_at(N, probe.t);
            if (!b) {
                rec.verdict = bounds::to_string(bounds::Outcome::NotApplicable);
            } else {
                const auto rep = bounds::compare(b->log_bound, b->validity, tail.interval.hi);
                rec.bound_log = b->log_bound;
                rec.verdict = bounds::to_string(rep.verdict);
                if (rep.verdict == bounds::Outcome::Violated) {
                    fail(r, "tail bound violated at N=" + format_number(N) + ", t=" + format_number(probe.t) +
                                ", x=" + format_number(probe.x));
                }
            }
            r.records.push_back(std::move(rec));
        }
    }
    r.details["branch"] = constants.sigma_sup ? "bounded-sigma" : "unbounded-sigma";
    return r;
}

ResultSet run_truncation_convergence(const ExperimentConfig& config, const RunOptions& options) {
    ResultSet r = start("convergence", config);
    const solver::Problem problem = make_problem(config);
    const bounds::ProblemConstants constants = prepare_constants(r, config, problem);
    const auto probes = make_probes(config);

    std::vector<double> levels = config.levels;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    const solver::Solver solver(problem);
    json path_sup = json::array();
    for (double N : levels) {
        const auto pairs = estimators::sample_pair_ensemble(solver, coeff::TruncationLevel(N), config.seed,
                                                            config.replications, probes, options.threads);
        check_abort_budget(r, pairs.aborted.size(), config.replications, N);
        double worst = 0.0;
        for (double d : pairs.path_sup_difference) worst = std::max(worst, d);
        path_sup.push_back({{"N", N}, {"max_path_sup_difference", worst}});
        for (double k : config.orders) {
            const double value = estimators::coupled_sup_difference(pairs, k, config.grid.T);
            r.convergence.push_back({N, k, value});
            Record rec = record(r, r.experiment);
            rec.N = N;
            rec.k = k;
            rec.estimate = value;
            rec.verdict = value > 0.0 ? "active" : "inactive";
            r.records.push_back(std::move(rec));
        }
    }
    r.details["path_sup_difference"] = path_sup;

    for (double k : config.orders) {
        DecayFit fit;
        fit.k = k;
        std::vector<double> xs;
        std::vector<double> ys;
        double previous = std::numeric_limits<double>::infinity();
        for (const auto& row : r.convergence) {
            if (row.k != k) continue;
            if (row.value > previous) fit.nonincreasing = false;
            previous = row.value;
            if (row.value > 0.0) {
                xs.push_back(std::pow(row.N, 1.5));
                ys.push_back(std::log(row.value));
                fit.plateau.reset();
            } else if (!fit.plateau) {
                fit.plateau = row.N;
            }
        }
        fit.active_levels = xs.size();
        if (xs.size() >= 2) {
            const auto line = coeff::fit_line(xs, ys);
            fit.slope = line.slope;
            fit.intercept = line.intercept;
        } else {
            r.notes.push_back("k=" + format_number(k) + ": fewer than two active levels, slope undefined");
        }
        r.fits.push_back(fit);
    }

    const auto th =
        bounds::convergence_thresholds(config.grid.T, constants, problem.drift, problem.diffusion, levels, 1e-3);
    r.details["thresholds"] = {{"c_T", th.c_T},
                               {"N_T", th.N_T},
                               {"N0", th.N0 ? json(*th.N0) : json(nullptr)},
                               {"note", th.note}};
    return r;
}

namespace {

// First (m, j) where two equally shaped trajectories differ bitwise.
std::optional<std::pair<std::size_t, std::size_t>> first_difference(const solver::FieldTrajectory& a,
                                                                    const solver::FieldTrajectory& b) {
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(va[i]) != std::bit_cast<std::uint64_t>(vb[i])) {
            return std::pair{i / a.cells(), i % a.cells()};
        }
    }
    return std::nullopt;
}

std::string at(std::pair<std::size_t, std::size_t> mj) {
    return "(m=" + std::to_string(mj.first) + ", j=" + std::to_string(mj.second) + ")";
}

} // namespace

ResultSet run_uniqueness_coupling(const ExperimentConfig& config, const RunOptions& options) {
    ResultSet r = start("uniqueness", config);
    const solver::Solver first(make_problem(config));
    const solver::Solver second(make_problem(config));  // coefficients parsed afresh

    struct Outcome {
        bool aborted = false;
        std::optional<std::pair<std::size_t, std::size_t>> parse_mismatch;
        bool clamp_inactive = false;
        std::optional<std::pair<std::size_t, std::size_t>> level_mismatch;
        double level_difference = 0.0;
    };

    for (double N : config.levels) {
        const coeff::TruncationLevel level(N);
        std::vector<Outcome> out(config.replications);
        parallel_for(config.replications, options.threads, [&](std::size_t rep) {
            Outcome& o = out[rep];
            try {
                const auto spec = first.noise_spec(config.seed, rep);
                const auto a = first.solve_truncated(level, spec);
                const auto b = second.solve_truncated(level, spec);
                o.parse_mismatch = first_difference(a, b);
                const auto [lower, upper] = first.solve_pair_coupled(level, spec);
                const auto& k = simd::active_kernels();
                o.clamp_inactive = k.max_abs(lower.values().data(), lower.values().size()) <= level.bound();
                o.level_difference = k.max_abs_diff(lower.values().data(), upper.values().data(), lower.values().size());
                if (o.clamp_inactive) o.level_mismatch = first_difference(lower, upper);
            } catch (const NonFiniteError&) {
                o.aborted = true;
            }
        });
        std::size_t aborted = 0;
        for (std::size_t rep = 0; rep < out.size(); ++rep) {
            const Outcome& o = out[rep];
            if (o.aborted) {
                ++aborted;
                continue;
            }
            const std::string where = "N=" + format_number(N) + ", replication " + std::to_string(rep);
            Record parse = record(r, "uniqueness/parse-twice");
            parse.N = N;
            parse.estimate = 0.0;
            parse.verdict = "identical";
            if (o.parse_mismatch) {
                parse.verdict = "mismatch";
                fail(r, "independently parsed coefficients differ at " + where + " " + at(*o.parse_mismatch));
            }
            r.records.push_back(std::move(parse));

            Record lv = record(r, "uniqueness/level-pair");
            lv.N = N;
            lv.estimate = o.level_difference;
            if (o.clamp_inactive) {
                lv.verdict = o.level_mismatch ? "mismatch" : "identical";
                if (o.level_mismatch) {
                    fail(r, "levels N and N+1 differ with inactive clamps at " + where + " " + at(*o.level_mismatch));
                }
            } else {
                lv.verdict = "differs-active-clamp";
            }
            r.records.push_back(std::move(lv));
        }
        check_abort_budget(r, aborted, config.replications, N);
    }
    return r;
}

ResultSet run_simulation(const ExperimentConfig& config, const std::optional<std::filesystem::path>& dump_dir) {
    ResultSet r = start("simulate", config);
    const solver::Solver solver(make_problem(config));
    const auto probes = make_probes(config);
    for (const auto& w : config.grid.warnings()) r.notes.push_back(w);
    json files = json::array();
    for (double N : config.levels) {
        const auto traj = solver.solve_truncated(coeff::TruncationLevel(N), solver.noise_spec(config.seed, 0));
        for (const auto& probe : probes.probes()) {
            Record rec = record(r, r.experiment);
            rec.N = N;
            rec.t = probe.t;
            rec.x = probe.x;
            rec.estimate = traj.at(probe.m, probe.j);
            rec.verdict = "sample";
            r.records.push_back(std::move(rec));
        }
        if (dump_dir) {
            std::error_code ec;
            std::filesystem::create_directories(*dump_dir, ec);
            if (ec) throw IoError("cannot create " + dump_dir->string() + ": " + ec.message());
            const auto name = "trajectory_N" + format_number(N) + ".bin";
            solver::write_trajectory(*dump_dir / name, traj);
            files.push_back(name);
        }
    }
    r.details["trajectories"] = files;
    return r;
}

ResultSet run_assumption_check(const ExperimentConfig& config) {
    ResultSet r = start("check-assumptions", config);
    const solver::Problem problem = make_problem(config);
    coeff::AssumptionOptions opts;
    opts.step = config.check.step;
    opts.tolerance = config.check.tolerance;
    const auto v = coeff::check_assumption(problem.drift, problem.diffusion, config.check.levels, opts);

    auto clause_json = [](const coeff::ClauseReport& c) {
        return json{{"name", c.name},
                    {"ratios", c.ratios},
                    {"slope", c.slope},
                    {"slope_stderr", c.slope_stderr},
                    {"verdict", coeff::to_string(c.verdict)},
                    {"note", c.note}};
    };
    r.details["regime"] = coeff::to_string(v.regime);
    r.details["verdict"] = coeff::to_string(v.verdict);
    r.details["levels"] = v.levels;
    r.details["drift_constants"] = v.drift_constants;
    r.details["diffusion_constants"] = v.diffusion_constants;
    r.details["diffusion_clause"] = clause_json(v.diffusion_clause);
    r.details["ratio_clause"] = clause_json(v.ratio_clause);
    r.details["drift_growth_diverges"] = v.drift_growth_diverges;
    r.details["diffusion_growth_diverges"] = v.diffusion_growth_diverges;
    for (const auto& w : v.warnings) r.notes.push_back(w);

    auto clause_rows = [&](const coeff::ClauseReport& c) {
        for (std::size_t i = 0; i < c.ratios.size() && i < v.levels.size(); ++i) {
            Record rec = record(r, "check-assumptions/" + c.name);
            rec.N = v.levels[i];
            rec.estimate = c.ratios[i];
            rec.verdict = coeff::to_string(c.verdict);
            r.records.push_back(std::move(rec));
        }
    };
    auto level_rows = [&](const char* name, const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size() && i < v.levels.size(); ++i) {
            Record rec = record(r, std::string("check-assumptions/") + name);
            rec.N = v.levels[i];
            rec.estimate = values[i];
            rec.verdict = coeff::to_string(v.verdict);
            r.records.push_back(std::move(rec));
        }
    };
    level_rows("L_N_b", v.drift_constants);
    level_rows("L_N_sigma", v.diffusion_constants);
    clause_rows(v.diffusion_clause);
    clause_rows(v.ratio_clause);
    return r;
}

} // namespace shelab::harness
