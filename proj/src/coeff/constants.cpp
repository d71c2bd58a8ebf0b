#include "shelab/coeff/constants.hpp"

#include "shelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace shelab::coeff {

namespace {

constexpr std::int64_t kChunk = 4096;

void require_step(double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("resolution must be positive");
}

std::vector<double> effective_times(const Coefficient& psi, const std::vector<double>& times) {
    if (times.empty()) throw DomainError("time grid must not be empty");
    if (!psi.depends_on_time()) return {times.front()};
    return times;
}

[[noreturn]] void non_finite(const Coefficient& psi, double t, double x) {
    std::ostringstream os;
    os << "'" << psi.description() << "' is not finite at (t=" << t << ", x=" << x << ")";
    throw EvaluationError(os.str());
}

// Calls visit(x_span, values_span) for consecutive chunks of the lattice
// {i * step} inside [lo, hi], for each time. Chunks overlap by one point so
// adjacent differences never straddle a boundary unseen.
template <class Visit>
void sweep(const Coefficient& psi, Interval domain, double step, const std::vector<double>& times,
           Visit&& visit) {
    require_step(step);
    if (!(domain.lo <= domain.hi) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi)) {
        throw DomainError("domain must be a finite interval");
    }
    const auto i_lo = static_cast<std::int64_t>(std::ceil(domain.lo / step - 1e-9));
    const auto i_hi = static_cast<std::int64_t>(std::floor(domain.hi / step + 1e-9));
    if (i_hi < i_lo) throw DomainError("domain contains no lattice point at this resolution");

    std::vector<double> xs;
    std::vector<double> vs;
    for (double t : effective_times(psi, times)) {
        for (std::int64_t start = i_lo; start <= i_hi; start += kChunk - 1) {
            const std::int64_t stop = std::min(i_hi, start + kChunk - 1);
            const auto n = static_cast<std::size_t>(stop - start + 1);
            xs.resize(n);
            vs.resize(n);
            for (std::size_t k = 0; k < n; ++k) xs[k] = static_cast<double>(start + static_cast<std::int64_t>(k)) * step;
            psi.evaluate_row(t, xs, vs);
            for (std::size_t k = 0; k < n; ++k) {
                if (!std::isfinite(vs[k])) non_finite(psi, t, xs[k]);
            }
            visit(std::span<const double>(xs), std::span<const double>(vs));
            if (stop == i_hi) break;
        }
    }
}

} // namespace

std::vector<double> default_time_grid() { return {0.01, 0.1, 0.5, 1.0}; }

double linear_growth_constant(const Coefficient& psi, Interval domain, double step,
                              const std::vector<double>& times) {
    double best = 0.0;
    sweep(psi, domain, step, times, [&](std::span<const double> xs, std::span<const double> vs) {
        for (std::size_t k = 0; k < xs.size(); ++k) {
            best = std::max(best, std::fabs(vs[k]) / (1.0 + std::fabs(xs[k])));
        }
    });
    return best;
}

double local_lipschitz_constant(const Coefficient& psi, double n, double step,
                                const std::vector<double>& times) {
    if (!(n > 0.0)) throw DomainError("local Lipschitz radius must be positive");
    double best = 0.0;
    sweep(psi, {-n, n}, step, times, [&](std::span<const double> xs, std::span<const double> vs) {
        for (std::size_t k = 1; k < xs.size(); ++k) {
            best = std::max(best, std::fabs(vs[k] - vs[k - 1]) / (xs[k] - xs[k - 1]));
        }
    });
    return best;
}

double sup_norm(const Coefficient& psi, Interval domain, double step,
                const std::vector<double>& times) {
    double best = 0.0;
    sweep(psi, domain, step, times, [&](std::span<const double>, std::span<const double> vs) {
        for (double v : vs) best = std::max(best, std::fabs(v));
    });
    return best;
}

LevelConstants level_constants(const Coefficient& b, const Coefficient& sigma,
                               const TruncationLevel& level, double step,
                               const std::vector<double>& times) {
    if (level.is_unbounded() || !(level.n() > 0.0)) {
        throw DomainError("level constants need a finite level N > 0");
    }
    LevelConstants out;
    out.drift = local_lipschitz_constant(b, level.bound(), step, times);
    out.diffusion = local_lipschitz_constant(sigma, level.bound(), step, times);
    if (out.drift == 0.0) {
        out.warnings.push_back("Lip estimate of b is zero on [-e^N, e^N]; the theory requires a positive constant");
    }
    if (out.diffusion == 0.0) {
        out.warnings.push_back("Lip estimate of sigma is zero on [-e^N, e^N]; the theory requires a positive constant");
    }
    return out;
}

std::vector<std::string> audit_metadata(const Coefficient& psi, Interval domain, double step,
                                        double tolerance, const std::vector<double>& times) {
    std::vector<std::string> issues;
    const Metadata& meta = psi.metadata();
    if (meta.linear_growth) {
        const double est = linear_growth_constant(psi, domain, step, times);
        if (est > *meta.linear_growth + tolerance) {
            issues.push_back("linear growth estimate " + std::to_string(est) + " exceeds declared " +
                             std::to_string(*meta.linear_growth));
        }
    }
    if (meta.sup_norm) {
        const double est = sup_norm(psi, domain, step, times);
        if (est > *meta.sup_norm + tolerance) {
            issues.push_back("sup-norm estimate " + std::to_string(est) + " exceeds declared " +
                             std::to_string(*meta.sup_norm));
        }
    }
    for (const auto& [n, lip] : meta.lip) {
        const double est = local_lipschitz_constant(psi, n, step, times);
        if (est > lip + tolerance) {
            issues.push_back("Lip_" + std::to_string(n) + " estimate " + std::to_string(est) +
                             " exceeds declared " + std::to_string(lip));
        }
    }
    return issues;
}

const char* to_string(Regime r) {
    return r == Regime::SigmaBounded ? "sigma-bounded" : "sigma-unbounded";
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("line fit needs at least two paired points");
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DomainError("line fit needs distinct abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_stderr = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

namespace {

// A slope within two standard errors of the threshold is inconclusive.
Verdict classify(double slope, double stderr_, double threshold, bool strict) {
    if (std::fabs(slope - threshold) <= 2.0 * stderr_) return Verdict::Indeterminate;
    const bool below = strict ? slope < threshold : slope <= threshold;
    return below ? Verdict::Pass : Verdict::Fail;
}

bool numerically_constant(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo <= 1e-6 * std::max(1.0, std::fabs(*hi));
}

void fill_slope(ClauseReport& clause, const std::vector<double>& levels) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        lx.push_back(std::log(levels[i]));
        ly.push_back(std::log(clause.ratios[i]));
    }
    const LinearFit fit = fit_line(lx, ly);
    clause.slope = fit.slope;
    clause.slope_stderr = fit.slope_stderr;
}

} // namespace

AssumptionVerdict check_assumption(const Coefficient& b, const Coefficient& sigma,
                                   const std::vector<double>& levels,
                                   const AssumptionOptions& options) {
    if (levels.size() < 4) throw DomainError("assumption check needs at least 4 levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0) || !std::isfinite(levels[i])) {
            throw DomainError("assumption check levels must be finite and positive");
        }
        if (i > 0 && !(levels[i] > levels[i - 1])) {
            throw DomainError("assumption check levels must be strictly increasing");
        }
    }

    AssumptionVerdict out;
    out.levels = levels;
    out.diffusion_clause.name = "L_{N,sigma} / reference(N) -> 0";
    out.ratio_clause.name = "L_{N,b} / L_{N,sigma}^4 = O(1)";

    const double d_small = std::exp(levels.front());
    const double d_large = std::exp(levels.back());
    const double coarse = std::max(options.step, d_large / 20000.0);

    try {
        for (double n : levels) {
            LevelConstants lc = level_constants(b, sigma, TruncationLevel(n), options.step, options.times);
            out.drift_constants.push_back(lc.drift);
            out.diffusion_constants.push_back(lc.diffusion);
            for (auto& w : lc.warnings) {
                if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) {
                    out.warnings.push_back(std::move(w));
                }
            }
        }

        auto diverges = [&](const Coefficient& psi) {
            const double small = linear_growth_constant(psi, {-d_small, d_small}, coarse, options.times);
            const double large = linear_growth_constant(psi, {-d_large, d_large}, coarse, options.times);
            return large > 2.0 * small + 1e-12;
        };
        out.drift_growth_diverges = diverges(b);
        out.diffusion_growth_diverges = diverges(sigma);

        bool bounded = sigma.metadata().sup_norm.has_value();
        if (!bounded) {
            const double small = sup_norm(sigma, {-d_small, d_small}, coarse, options.times);
            const double large = sup_norm(sigma, {-d_large, d_large}, coarse, options.times);
            bounded = large <= 1.01 * small + 1e-12;
        }
        out.regime = bounded ? Regime::SigmaBounded : Regime::SigmaUnbounded;
    } catch (const EvaluationError& e) {
        out.verdict = Verdict::Fail;
        out.warnings.push_back(std::string("non-finite constant: ") + e.what());
        return out;
    }

    const bool sigma_zero = std::all_of(out.diffusion_constants.begin(), out.diffusion_constants.end(),
                                        [](double v) { return v == 0.0; });
    const bool sigma_some_zero = std::any_of(out.diffusion_constants.begin(), out.diffusion_constants.end(),
                                             [](double v) { return v == 0.0; });

    // Clause 1: L_{N,sigma} = o(N^{3/8}) or o(e^{N/2}).
    ClauseReport& c1 = out.diffusion_clause;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const double ref = out.regime == Regime::SigmaBounded ? std::exp(levels[i] / 2.0)
                                                              : std::pow(levels[i], 0.375);
        c1.ratios.push_back(out.diffusion_constants[i] / ref);
    }
    const bool globally_lipschitz =
        numerically_constant(out.diffusion_constants) && numerically_constant(out.drift_constants);
    if (sigma_zero) {
        c1.verdict = Verdict::Pass;
        c1.note = "L_{N,sigma} is zero on every sampled level";
    } else if (sigma_some_zero) {
        c1.verdict = Verdict::Indeterminate;
        c1.note = "L_{N,sigma} vanishes on some sampled levels";
    } else {
        fill_slope(c1, levels);
        c1.verdict = classify(c1.slope, c1.slope_stderr, -options.tolerance, true);
        if (c1.verdict == Verdict::Indeterminate && globally_lipschitz) {
            c1.verdict = Verdict::Pass;
            c1.note = "constant ratio with globally Lipschitz coefficients on the sampled range";
        }
    }

    // Clause 2: L_{N,b} / L_{N,sigma}^4 = O(1).
    ClauseReport& c2 = out.ratio_clause;
    if (sigma_some_zero) {
        c2.ratios.assign(levels.size(), std::nan(""));
        c2.verdict = Verdict::Indeterminate;
        c2.note = "ratio undefined: L_{N,sigma} is zero";
    } else {
        for (std::size_t i = 0; i < levels.size(); ++i) {
            c2.ratios.push_back(out.drift_constants[i] / std::pow(out.diffusion_constants[i], 4));
        }
        const bool drift_zero = std::all_of(out.drift_constants.begin(), out.drift_constants.end(),
                                            [](double v) { return v == 0.0; });
        if (drift_zero) {
            c2.verdict = Verdict::Pass;
            c2.note = "L_{N,b} is zero on every sampled level";
        } else if (std::any_of(c2.ratios.begin(), c2.ratios.end(), [](double v) { return v == 0.0; })) {
            c2.verdict = Verdict::Indeterminate;
            c2.note = "L_{N,b} vanishes on some sampled levels";
        } else {
            fill_slope(c2, levels);
            c2.verdict = classify(c2.slope, c2.slope_stderr, options.tolerance, false);
        }
    }

    if (out.drift_growth_diverges || out.diffusion_growth_diverges) {
        out.verdict = Verdict::Fail;
        if (out.drift_growth_diverges) out.warnings.push_back("linear-growth estimate of b diverges with domain size");
        if (out.diffusion_growth_diverges) out.warnings.push_back("linear-growth estimate of sigma diverges with domain size");
    } else if (c1.verdict == Verdict::Fail || c2.verdict == Verdict::Fail) {
        out.verdict = Verdict::Fail;
    } else if (c1.verdict == Verdict::Pass && c2.verdict == Verdict::Pass) {
        out.verdict = Verdict::Pass;
    } else {
        out.verdict = Verdict::Indeterminate;
    }
    return out;
}

} // namespace shelab::coeff
