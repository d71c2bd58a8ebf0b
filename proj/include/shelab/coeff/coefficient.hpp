#pragma once

#include "shelab/coeff/expr.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace shelab::coeff {

// Truncation level N: coefficient arguments are clamped to [-e^N, e^N].
class TruncationLevel {
public:
    explicit TruncationLevel(double n);

    // Level with no clamp at all (N = +inf).
    static TruncationLevel unbounded() noexcept;

    double n() const noexcept { return n_; }
    double bound() const noexcept { return bound_; }
    bool is_unbounded() const noexcept { return std::isinf(n_); }

    double clamp(double x) const noexcept {
        return x < -bound_ ? -bound_ : (x > bound_ ? bound_ : x);
    }

    TruncationLevel next() const { return is_unbounded() ? *this : TruncationLevel(n_ + 1.0); }

private:
    TruncationLevel() = default;
    double n_ = std::numeric_limits<double>::infinity();
    double bound_ = std::numeric_limits<double>::infinity();
};

namespace builtin {

struct Constant {
    double value = 0.0;
};
struct Linear {
    double slope = 1.0;
};
struct Affine {
    double intercept = 0.0;
    double slope = 1.0;
};
// p(clamp(x, -clip, clip)) with coefficients in ascending order.
struct ClippedPolynomial {
    std::vector<double> coefficients;
    double clip = 1.0;
};
// amplitude * sin(frequency * (1 + |x|)^(1/4)).
struct Oscillator {
    double amplitude = 1.0;
    double frequency = 1000.0;
};

} // namespace builtin

using Builtin = std::variant<builtin::Constant, builtin::Linear, builtin::Affine,
                             builtin::ClippedPolynomial, builtin::Oscillator>;

// Optional constants declared by the user or known for a builtin.
struct Metadata {
    std::optional<double> linear_growth;         // L_psi
    std::optional<double> sup_norm;              // ||psi||_inf, when bounded
    std::vector<std::pair<double, double>> lip;  // (n, Lip_n) table
};

// A space-time coefficient psi(t, x), where x is the solution value.
class Coefficient {
public:
    static Coefficient from_source(const std::string& source);
    static Coefficient from_builtin(Builtin b, std::string name);

    double operator()(double t, double x) const;
    void evaluate_row(double t, std::span<const double> x, std::span<double> out) const;

    bool depends_on_time() const noexcept { return time_dependent_; }
    const std::string& description() const noexcept { return description_; }
    const Metadata& metadata() const noexcept { return meta_; }
    Metadata& metadata() noexcept { return meta_; }

    // The parsed tree, when built from source.
    const Expr* expression() const noexcept { return expr_.get(); }

private:
    Coefficient() = default;

    std::variant<std::monostate, Builtin> builtin_;
    ExprPtr expr_;
    std::shared_ptr<const Program> program_;
    bool time_dependent_ = false;
    std::string description_;
    Metadata meta_;
};

// psi(t, clamp(x, -e^N, e^N)).
double truncate(const Coefficient& psi, const TruncationLevel& level, double t, double x);

} // namespace shelab::coeff
