#pragma once

#include "shelab/coeff/coefficient.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace shelab::bounds {

// A positive quantity held by its logarithm. `value` is set when exp(log)
// is a finite double.
struct LogValue {
    double log = 0.0;
    std::optional<double> value;

    static LogValue from_log(double log_value);
};

struct ProblemConstants {
    double L_b = 0.0;
    double L_sigma = 0.0;
    double u0_norm = 0.0;
    std::optional<double> sigma_sup;  // present iff sigma is bounded
    double L_N_b = 0.0;
    double L_N_sigma = 0.0;
    double c = 2.0;
    // Enlarge L_sigma so that sqrt(L_b) / L_sigma^2 <= 2. A zero L_sigma
    // becomes 1.
    bool inflate_sigma = false;

    // Throws DomainError naming the first violated invariant.
    void validate() const;
    // L_sigma after the optional inflation.
    double effective_L_sigma() const;
};

struct Validity {
    bool holds = true;
    double threshold = 0.0;  // smallest admissible k or N, when one applies
    std::string clause;      // the violated clause when !holds
};

struct MomentBound {
    LogValue bound;
    Validity validity;
};

// 4^k (||u0|| + 1)^k exp(128 L_sigma^4 k^3 t), for k >= max(2, sqrt(L_b) / L_sigma^2).
MomentBound moment_bound_unbounded_sigma(double k, double t, const ProblemConstants& constants);

// 4^k e^{2 L_b k t} (||u0|| + ||sigma|| t^{1/4} + 1)^k k^{k/2}, for k >= 2.
MomentBound moment_bound_bounded_sigma(double k, double t, const ProblemConstants& constants);

// Picks the branch matching the regime: bounded when sigma_sup is present.
MomentBound moment_bound(double k, double t, const ProblemConstants& constants);

struct TailBound {
    double bound = 0.0;
    double log_bound = 0.0;
    Validity validity;
};

// P{|u_{N+1}(t,x)| >= e^N} <= exp(-N^{3/2} / (64 L_sigma^2 sqrt t)).
TailBound tail_bound_unbounded_sigma(double N, double t, const ProblemConstants& constants);

// P{|u_{N+1}(t,x)| >= e^N} <= exp(-e^{2N - 4 L_b t} / (32 e (||u0|| + ||sigma|| t^{1/4} + 1)^2)).
TailBound tail_bound_bounded_sigma(double N, double t, const ProblemConstants& constants);

TailBound tail_bound(double N, double t, const ProblemConstants& constants);

double beta_for_moments(double k, double L_sigma);

// A_0 = max(sqrt(8) L_sigma^4, 4).
double a0(double L_sigma);
// 16 A_0^4 k^2 L_{N,sigma}^4.
double beta_for_convergence(double k, double L_N_sigma, double L_sigma);

struct Thresholds {
    double c_T = 0.0;
    double N_T = 0.0;
    std::optional<double> N0;  // empty when no sampled level qualifies
    std::string note;
};

// c_T and N_T from the constants; N0 is the smallest level N > 1 among
// `levels` whose paired entry of `diffusion_constants` is >= 1.
Thresholds convergence_thresholds(double T, const ProblemConstants& constants,
                                  const std::vector<double>& levels = {},
                                  const std::vector<double>& diffusion_constants = {});

// Same, with L_{N,sigma} estimated on [-N, N] by the coeff module.
Thresholds convergence_thresholds(double T, const ProblemConstants& constants, const coeff::Coefficient& drift,
                                  const coeff::Coefficient& diffusion, const std::vector<double>& levels,
                                  double step = 1e-3);

struct SupTransferResult {
    bool hypothesis_holds = false;
    bool conclusion_verified = false;
    std::optional<double> failing_T;  // first grid T where the hypothesis fails
    std::optional<double> conclusion_failing_T;
};

// f is sampled as (t, f(t)) pairs. At each grid T checks
//   max_{t_i <= T} e^{-beta t_i} f(t_i) <= e^{-beta T} g(T)
// and, when that holds at every T, that max_{t_i <= T} f(t_i) <= g(T).
// Throws DomainError when g decreases on the grid or the inputs are malformed.
SupTransferResult sup_transfer_check(const std::vector<std::pair<double, double>>& f,
                                     const std::function<double(double)>& g, double beta,
                                     const std::vector<double>& T_grid);

enum class Outcome { Dominates, Violated, NotApplicable };
const char* to_string(Outcome o);
Outcome outcome_from_string(const std::string& s);

struct BoundReport {
    double bound_log = 0.0;
    Validity validity;
    double estimate_log = 0.0;  // log of the estimate compared against the bound
    Outcome verdict = Outcome::NotApplicable;

    double log_margin() const { return bound_log - estimate_log; }
};

BoundReport compare(double bound_log, const Validity& validity, double estimate);

} // namespace shelab::bounds
