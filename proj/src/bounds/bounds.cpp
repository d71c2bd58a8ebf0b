#include "shelab/bounds/bounds.hpp"

#include "shelab/coeff/constants.hpp"
#include "shelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace shelab::bounds {

namespace {

constexpr double kMaxLog = 709.0;

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Validity holds_if(bool ok, double threshold, std::string clause) {
    Validity v;
    v.holds = ok;
    v.threshold = threshold;
    if (!ok) v.clause = std::move(clause);
    return v;
}

LogValue make(double log_value, double direct) {
    LogValue r;
    r.log = log_value;
    if (log_value < kMaxLog) r.value = direct;
    return r;
}

} // namespace

LogValue LogValue::from_log(double log_value) {
    LogValue r;
    r.log = log_value;
    if (log_value < kMaxLog) r.value = std::exp(log_value);
    return r;
}

void ProblemConstants::validate() const {
    if (!nonneg(L_b)) throw DomainError("L_b must be finite and >= 0");
    if (!nonneg(L_sigma)) throw DomainError("L_sigma must be finite and >= 0");
    if (!nonneg(u0_norm)) throw DomainError("||u0|| must be finite and >= 0");
    if (sigma_sup && !nonneg(*sigma_sup)) throw DomainError("||sigma|| must be finite and >= 0");
    if (!nonneg(L_N_b)) throw DomainError("L_{N,b} must be finite and >= 0");
    if (!nonneg(L_N_sigma)) throw DomainError("L_{N,sigma} must be finite and >= 0");
    if (!(std::isfinite(c) && c > 1.0)) throw DomainError("c must be finite and > 1");
}

double ProblemConstants::effective_L_sigma() const {
    if (!inflate_sigma) return L_sigma;
    double l = std::sqrt(std::sqrt(L_b) / 2.0);
    // Round up until the guarantee holds in floating point too.
    while (l > 0.0 && std::sqrt(L_b) / (l * l) > 2.0) l = std::nextafter(l, INFINITY);
    l = std::max(L_sigma, l);
    return l > 0.0 ? l : 1.0;
}

MomentBound moment_bound_unbounded_sigma(double k, double t, const ProblemConstants& constants) {
    constants.validate();
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("moment bound needs finite t >= 0");
    if (!std::isfinite(k)) throw DomainError("moment order must be finite");
    const double L = constants.effective_L_sigma();
    MomentBound r;
    if (!(L > 0.0)) {
        r.validity = holds_if(false, 2.0, "L_sigma > 0");
    } else {
        const double kmin = std::max(2.0, std::sqrt(constants.L_b) / (L * L));
        r.validity = holds_if(k >= kmin, kmin, "k >= max(2, sqrt(L_b)/L_sigma^2) = " + fmt(kmin));
    }
    const double base = 4.0 * (constants.u0_norm + 1.0);
    const double expo = 128.0 * std::pow(L, 4) * k * k * k * t;
    const double log_value = k * std::log(base) + expo;
    r.bound = make(log_value, std::pow(base, k) * std::exp(expo));
    return r;
}

MomentBound moment_bound_bounded_sigma(double k, double t, const ProblemConstants& constants) {
    constants.validate();
    if (!constants.sigma_sup) throw DomainError("bounded-sigma moment bound needs ||sigma||");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("moment bound needs finite t >= 0");
    if (!std::isfinite(k)) throw DomainError("moment order must be finite");
    MomentBound r;
    r.validity = holds_if(k >= 2.0, 2.0, "k >= 2");
    const double inner = constants.u0_norm + *constants.sigma_sup * std::pow(t, 0.25) + 1.0;
    const double log_value =
        k * std::log(4.0) + 2.0 * constants.L_b * k * t + k * std::log(inner) + 0.5 * k * std::log(k);
    const double direct =
        std::pow(4.0, k) * std::exp(2.0 * constants.L_b * k * t) * std::pow(inner, k) * std::pow(k, 0.5 * k);
    r.bound = make(log_value, direct);
    return r;
}

MomentBound moment_bound(double k, double t, const ProblemConstants& constants) {
    return constants.sigma_sup ? moment_bound_bounded_sigma(k, t, constants)
                               : moment_bound_unbounded_sigma(k, t, constants);
}

TailBound tail_bound_unbounded_sigma(double N, double t, const ProblemConstants& constants) {
    constants.validate();
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("tail bound needs finite t > 0");
    if (!(N > 0.0) || !std::isfinite(N)) throw DomainError("tail bound needs finite N > 0");
    const double L = constants.effective_L_sigma();
    TailBound r;
    const double threshold = std::max(4.0 * std::log(4.0 * (constants.u0_norm + 1.0)),
                                      256.0 * t * std::max(4.0 * std::pow(L, 4), constants.L_b));
    if (!(L > 0.0)) {
        r.validity = holds_if(false, threshold, "L_sigma > 0");
        r.log_bound = -std::numeric_limits<double>::infinity();
    } else {
        r.validity = holds_if(N >= threshold, threshold,
                              "N >= max(4 log(4(||u0||+1)), 256 t max(4 L_sigma^4, L_b)) = " + fmt(threshold));
        r.log_bound = -std::pow(N, 1.5) / (64.0 * L * L * std::sqrt(t));
    }
    r.bound = std::exp(r.log_bound);
    return r;
}

TailBound tail_bound_bounded_sigma(double N, double t, const ProblemConstants& constants) {
    constants.validate();
    if (!constants.sigma_sup) throw DomainError("bounded-sigma tail bound needs ||sigma||");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("tail bound needs finite t >= 0");
    if (!std::isfinite(N)) throw DomainError("tail bound needs finite N");
    const double inner = constants.u0_norm + *constants.sigma_sup * std::pow(t, 0.25) + 1.0;
    const double threshold = 0.5 * std::log(32.0) + 2.0 * constants.L_b * t + 0.5 + std::log(inner);
    TailBound r;
    r.validity = holds_if(N >= threshold, threshold,
                          "N >= log(32)/2 + 2 L_b t + 1/2 + log(||u0|| + ||sigma|| t^(1/4) + 1) = " +
                              fmt(threshold));
    r.log_bound = -std::exp(2.0 * N - 4.0 * constants.L_b * t) / (32.0 * std::numbers::e * inner * inner);
    r.bound = std::exp(r.log_bound);
    return r;
}

TailBound tail_bound(double N, double t, const ProblemConstants& constants) {
    return constants.sigma_sup ? tail_bound_bounded_sigma(N, t, constants)
                               : tail_bound_unbounded_sigma(N, t, constants);
}

double beta_for_moments(double k, double L_sigma) {
    if (!(k >= 2.0) || !std::isfinite(k)) throw DomainError("beta_for_moments needs k >= 2");
    if (!(L_sigma > 0.0) || !std::isfinite(L_sigma)) throw DomainError("beta_for_moments needs L_sigma > 0");
    return 128.0 * k * k * std::pow(L_sigma, 4);
}

double a0(double L_sigma) {
    if (!nonneg(L_sigma)) throw DomainError("A_0 needs L_sigma >= 0");
    return std::max(std::sqrt(8.0) * std::pow(L_sigma, 4), 4.0);
}

double beta_for_convergence(double k, double L_N_sigma, double L_sigma) {
    if (!(k >= 1.0) || !std::isfinite(k)) throw DomainError("beta_for_convergence needs k >= 1");
    if (!(L_N_sigma > 0.0) || !std::isfinite(L_N_sigma)) {
        throw DomainError("beta_for_convergence needs L_{N,sigma} > 0");
    }
    const double a = a0(L_sigma);
    return 16.0 * std::pow(a, 4) * k * k * std::pow(L_N_sigma, 4);
}

Thresholds convergence_thresholds(double T, const ProblemConstants& constants, const std::vector<double>& levels,
                                  const std::vector<double>& diffusion_constants) {
    constants.validate();
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("thresholds need finite T > 0");
    if (levels.size() != diffusion_constants.size()) {
        throw DomainError("levels and L_{N,sigma} values differ in length");
    }
    const double L = constants.effective_L_sigma();
    Thresholds r;
    r.c_T = std::max(4.0 * std::log(4.0 * (constants.u0_norm + 1.0)),
                     256.0 * T * std::max(4.0 * std::pow(L, 4), constants.L_b));
    r.N_T = std::pow(4096.0, 2.0 / 3.0) * std::pow(a0(L), 8.0 / 3.0) * constants.c * constants.c *
            std::pow(L, 4.0 / 3.0) * T;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] > 1.0 && diffusion_constants[i] >= 1.0 && (!r.N0 || levels[i] < *r.N0)) r.N0 = levels[i];
    }
    if (!r.N0) r.note = "N0 undefined on the sampled levels";
    return r;
}

Thresholds convergence_thresholds(double T, const ProblemConstants& constants, const coeff::Coefficient& drift,
                                  const coeff::Coefficient& diffusion, const std::vector<double>& levels,
                                  double step) {
    std::vector<double> diff;
    diff.reserve(levels.size());
    for (double n : levels) {
        // Levels at or below 1 can never be N0.
        diff.push_back(n > 1.0 ? coeff::level_constants(drift, diffusion, coeff::TruncationLevel(n), step).diffusion
                               : 0.0);
    }
    return convergence_thresholds(T, constants, levels, diff);
}

SupTransferResult sup_transfer_check(const std::vector<std::pair<double, double>>& f,
                                     const std::function<double(double)>& g, double beta,
                                     const std::vector<double>& T_grid) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("beta must be finite and >= 0");
    if (T_grid.empty()) throw DomainError("empty T grid");
    for (const auto& [t, v] : f) {
        if (!(t > 0.0) || !(v > 0.0)) throw DomainError("f must be sampled at t > 0 with positive values");
    }
    std::vector<double> gv;
    gv.reserve(T_grid.size());
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
        if (!(T_grid[i] > 0.0) || (i > 0 && !(T_grid[i] > T_grid[i - 1]))) {
            throw DomainError("T grid must be positive and strictly increasing");
        }
        gv.push_back(g(T_grid[i]));
        if (!(gv.back() > 0.0)) throw DomainError("g must be positive on the grid");
        if (i > 0 && gv[i] < gv[i - 1]) throw DomainError("g decreases at T=" + fmt(T_grid[i]));
    }

    SupTransferResult r;
    r.hypothesis_holds = true;
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
        const double T = T_grid[i];
        double lhs = 0.0;
        for (const auto& [t, v] : f) {
            if (t <= T) lhs = std::max(lhs, std::exp(-beta * t) * v);
        }
        if (lhs > std::exp(-beta * T) * gv[i]) {
            r.hypothesis_holds = false;
            r.failing_T = T;
            return r;
        }
    }
    r.conclusion_verified = true;
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
        double sup = 0.0;
        for (const auto& [t, v] : f) {
            if (t <= T_grid[i]) sup = std::max(sup, v);
        }
        if (sup > gv[i]) {
            r.conclusion_verified = false;
            r.conclusion_failing_T = T_grid[i];
            break;
        }
    }
    return r;
}

const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::Dominates:
        return "dominates";
    case Outcome::Violated:
        return "violated";
    case Outcome::NotApplicable:
        return "not-applicable";
    }
    return "?";
}

Outcome outcome_from_string(const std::string& s) {
    if (s == "dominates") return Outcome::Dominates;
    if (s == "violated") return Outcome::Violated;
    if (s == "not-applicable") return Outcome::NotApplicable;
    throw Error("unknown verdict '" + s + "'");
}

BoundReport compare(double bound_log, const Validity& validity, double estimate) {
    if (!(estimate >= 0.0)) throw DomainError("estimate must be >= 0");
    BoundReport r;
    r.bound_log = bound_log;
    r.validity = validity;
    r.estimate_log = std::log(estimate);
    if (!validity.holds) {
        r.verdict = Outcome::NotApplicable;
    } else {
        r.verdict = r.estimate_log <= bound_log ? Outcome::Dominates : Outcome::Violated;
    }
    return r;
}

} // namespace shelab::bounds
