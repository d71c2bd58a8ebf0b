#pragma once

#include "shelab/coeff/coefficient.hpp"

#include <string>
#include <vector>

namespace shelab::coeff {

struct Interval {
    double lo;
    double hi;
};

// Time values over which the constants are maximised. Time-independent
// coefficients are evaluated once regardless of the grid.
std::vector<double> default_time_grid();

// Estimators sample on the lattice {i * step}. Lattices with step h/m are
// supersets of the one with step h, and the lattice on [-n', n'] contains the
// one on [-n, n], so both estimators are monotone under refinement and under
// domain growth. Both are lower bounds for the true suprema.

// max |psi(t,x)| / (1 + |x|) over lattice points in `domain` and all t.
double linear_growth_constant(const Coefficient& psi, Interval domain, double step,
                              const std::vector<double>& times = default_time_grid());

// max over adjacent lattice points of |psi(t,x) - psi(t,y)| / |x - y| on [-n, n].
double local_lipschitz_constant(const Coefficient& psi, double n, double step,
                                const std::vector<double>& times = default_time_grid());

// max |psi(t,x)| over lattice points in `domain`.
double sup_norm(const Coefficient& psi, Interval domain, double step,
                const std::vector<double>& times = default_time_grid());

struct LevelConstants {
    double drift = 0.0;      // L_{N,b}
    double diffusion = 0.0;  // L_{N,sigma}
    std::vector<std::string> warnings;
};

LevelConstants level_constants(const Coefficient& b, const Coefficient& sigma,
                               const TruncationLevel& level, double step,
                               const std::vector<double>& times = default_time_grid());

// Checks the declared metadata against fresh estimates. Returns one message
// per declared constant that an estimate exceeds by more than `tolerance`.
std::vector<std::string> audit_metadata(const Coefficient& psi, Interval domain, double step,
                                        double tolerance = 1e-9,
                                        const std::vector<double>& times = default_time_grid());

enum class Regime { SigmaUnbounded, SigmaBounded };
enum class Verdict { Pass, Fail, Indeterminate };

const char* to_string(Regime r);
const char* to_string(Verdict v);

// Ordinary least squares y = a + slope * x.
struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_stderr = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct ClauseReport {
    std::string name;
    std::vector<double> ratios;  // one per sampled level
    double slope = 0.0;          // d log(ratio) / d log N
    double slope_stderr = 0.0;
    Verdict verdict = Verdict::Indeterminate;
    std::string note;
};

struct AssumptionVerdict {
    Regime regime = Regime::SigmaUnbounded;
    std::vector<double> levels;
    std::vector<double> drift_constants;      // L_{N,b}
    std::vector<double> diffusion_constants;  // L_{N,sigma}
    ClauseReport diffusion_clause;            // L_{N,sigma} / reference(N)
    ClauseReport ratio_clause;                // L_{N,b} / L_{N,sigma}^4
    bool drift_growth_diverges = false;
    bool diffusion_growth_diverges = false;
    Verdict verdict = Verdict::Indeterminate;
    std::vector<std::string> warnings;
};

struct AssumptionOptions {
    double step = 1e-3;
    double tolerance = 1e-3;
    std::vector<double> times = default_time_grid();
};

AssumptionVerdict check_assumption(const Coefficient& b, const Coefficient& sigma,
                                   const std::vector<double>& levels,
                                   const AssumptionOptions& options = {});

} // namespace shelab::coeff
