#include "shelab/kernel/heat_kernel.hpp"

#include "shelab/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

namespace shelab::kernel {

namespace {

void require_positive_time(double r, const char* what) {
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw DomainError(std::string(what) + " requires a positive finite time, got " + std::to_string(r));
    }
}

constexpr double kQuadratureTolerance = 1e-9;
// Gauss-Kronrod error estimates are pessimistic at kinks and jumps of u0.
constexpr double kQuadratureAccept = 1e-7;

} // namespace

double heat_kernel(double r, double z) {
    require_positive_time(r, "heat_kernel");
    return std::exp(-z * z / (2.0 * r)) / std::sqrt(2.0 * std::numbers::pi * r);
}

double kernel_l2_norm_sq(double r) {
    require_positive_time(r, "kernel_l2_norm_sq");
    return 0.5 / std::sqrt(std::numbers::pi * r);
}

double kernel_l2_norm_sq_quadrature(double r) {
    require_positive_time(r, "kernel_l2_norm_sq_quadrature");
    const double s = std::sqrt(r);
    const double h = s / 200.0;
    const int n = 12 * 200;
    double sum = 0.0;
    for (int i = -n; i <= n; ++i) {
        const double p = heat_kernel(r, i * h);
        const double w = (i == -n || i == n) ? 0.5 : 1.0;
        sum += w * p * p;
    }
    return sum * h;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

InitialCondition InitialCondition::constant(double c) {
    if (!std::isfinite(c)) throw DomainError("constant initial condition must be finite");
    InitialCondition u;
    u.kind_ = initial::Constant{c};
    u.bound_ = std::fabs(c);
    return u;
}

InitialCondition InitialCondition::indicator(double lo, double hi) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo <= hi)) {
        throw DomainError("indicator initial condition needs lo <= hi");
    }
    InitialCondition u;
    u.kind_ = initial::Indicator{lo, hi};
    u.bound_ = 1.0;
    return u;
}

InitialCondition InitialCondition::expression(const std::string& source, double declared_bound) {
    if (!(declared_bound >= 0.0) || !std::isfinite(declared_bound)) {
        throw DomainError("expression initial condition needs a finite declared bound");
    }
    auto expr = coeff::parse(source);
    if (expr->depends_on_time()) throw DomainError("initial condition may not depend on t");
    InitialCondition u;
    u.kind_ = initial::Expression{source, std::move(expr), declared_bound};
    u.bound_ = declared_bound;
    return u;
}

double InitialCondition::operator()(double x) const {
    if (const auto* c = std::get_if<initial::Constant>(&kind_)) return c->value;
    if (const auto* ind = std::get_if<initial::Indicator>(&kind_)) {
        return (x >= ind->lo && x <= ind->hi) ? 1.0 : 0.0;
    }
    return std::get<initial::Expression>(kind_).expr->evaluate(0.0, x);
}

std::string InitialCondition::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (const auto* c = std::get_if<initial::Constant>(&kind_)) {
        os << "constant(" << c->value << ")";
    } else if (const auto* ind = std::get_if<initial::Indicator>(&kind_)) {
        os << "indicator[" << ind->lo << ", " << ind->hi << "]";
    } else {
        const auto& e = std::get<initial::Expression>(kind_);
        os << "expression(" << e.source << "; bound " << e.bound << ")";
    }
    return os.str();
}

double initial_convolution(const InitialCondition& u0, double t, double x) {
    require_positive_time(t, "initial_convolution");
    if (const auto* c = std::get_if<initial::Constant>(&u0.kind())) return c->value;
    const double s = std::sqrt(t);
    if (const auto* ind = std::get_if<initial::Indicator>(&u0.kind())) {
        // P(lo <= x + sqrt(t) Z <= hi), written with the smaller tail to keep precision.
        const double a = (ind->lo - x) / s;
        const double b = (ind->hi - x) / s;
        if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
        return normal_cdf(b) - normal_cdf(a);
    }

    const auto& e = std::get<initial::Expression>(u0.kind());
    auto integrand = [&](double y) { return heat_kernel(t, y - x) * e.expr->evaluate(0.0, y); };
    // Panels keep a jump in u0 from dominating the global error estimate.
    constexpr int kPanels = 48;
    const double a = x - 12.0 * s;
    const double h = 24.0 * s / kPanels;
    double value = 0.0;
    double error = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        double panel_error = 0.0;
        value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, a + i * h, a + (i + 1) * h, 30, kQuadratureTolerance, &panel_error);
        error += panel_error;
    }
    if (!std::isfinite(value) || error > kQuadratureAccept * std::max(1.0, std::fabs(value))) {
        throw EvaluationError("initial convolution quadrature did not converge (error estimate " +
                              std::to_string(error) + ")");
    }
    return value;
}

} // namespace shelab::kernel
