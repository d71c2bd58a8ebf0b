#pragma once

#include "shelab/coeff/expr.hpp"

#include <memory>
#include <string>
#include <variant>

namespace shelab::kernel {

// p_r(z) = (2 pi r)^{-1/2} exp(-z^2 / (2r)).
double heat_kernel(double r, double z);

// ||p_r||_{L^2}^2 = p_{2r}(0) = (1/2) (pi r)^{-1/2}.
double kernel_l2_norm_sq(double r);

// Trapezoid rule for the integral of p_r(z)^2 over [-12 sqrt(r), 12 sqrt(r)]
// with step sqrt(r)/200. Independent cross-check of kernel_l2_norm_sq.
double kernel_l2_norm_sq_quadrature(double r);

// Standard normal distribution function.
double normal_cdf(double x);

namespace initial {

struct Constant {
    double value = 0.0;
};
// Indicator of [lo, hi]; either end may be infinite.
struct Indicator {
    double lo = 0.0;
    double hi = 0.0;
};
struct Expression {
    std::string source;
    std::shared_ptr<const coeff::Expr> expr;
    double bound = 0.0;  // declared sup norm
};

} // namespace initial

// Non-random, bounded, measurable initial datum u_0.
class InitialCondition {
public:
    static InitialCondition constant(double c);
    static InitialCondition indicator(double lo, double hi);
    static InitialCondition expression(const std::string& source, double declared_bound);

    double operator()(double x) const;
    double bound() const noexcept { return bound_; }
    const auto& kind() const noexcept { return kind_; }
    std::string describe() const;

private:
    std::variant<initial::Constant, initial::Indicator, initial::Expression> kind_;
    double bound_ = 0.0;
};

// (p_t * u_0)(x). Closed form for constant and indicator data, adaptive
// Gauss-Kronrod quadrature over x +- 12 sqrt(t) otherwise.
double initial_convolution(const InitialCondition& u0, double t, double x);

} // namespace shelab::kernel
