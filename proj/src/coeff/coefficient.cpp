#include "shelab/coeff/coefficient.hpp"

#include "shelab/error.hpp"

#include <algorithm>

namespace shelab::coeff {

TruncationLevel::TruncationLevel(double n) : n_(n), bound_(std::exp(n)) {
    if (!(n >= 0.0) || std::isinf(n)) {
        throw DomainError("truncation level must be a finite non-negative number, got " +
                          std::to_string(n));
    }
}

TruncationLevel TruncationLevel::unbounded() noexcept { return TruncationLevel(); }

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double eval_builtin(const Builtin& b, double x) {
    return std::visit(
        overloaded{
            [](const builtin::Constant& c) { return c.value; },
            [x](const builtin::Linear& l) { return l.slope * x; },
            [x](const builtin::Affine& a) { return a.intercept + a.slope * x; },
            [x](const builtin::ClippedPolynomial& p) {
                const double y = std::clamp(x, -p.clip, p.clip);
                double acc = 0.0;
                for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) {
                    acc = acc * y + *it;
                }
                return acc;
            },
            [x](const builtin::Oscillator& o) {
                return o.amplitude * std::sin(o.frequency * std::pow(1.0 + std::fabs(x), 0.25));
            },
        },
        b);
}

Metadata builtin_metadata(const Builtin& b) {
    Metadata m;
    std::visit(overloaded{
                   [&](const builtin::Constant& c) {
                       m.linear_growth = std::fabs(c.value);
                       m.sup_norm = std::fabs(c.value);
                   },
                   [&](const builtin::Linear& l) { m.linear_growth = std::fabs(l.slope); },
                   [&](const builtin::Affine& a) {
                       m.linear_growth = std::max(std::fabs(a.intercept), std::fabs(a.slope));
                   },
                   [&](const builtin::ClippedPolynomial&) {},
                   [&](const builtin::Oscillator& o) {
                       m.linear_growth = std::fabs(o.amplitude);
                       m.sup_norm = std::fabs(o.amplitude);
                   },
               },
               b);
    return m;
}

} // namespace

Coefficient Coefficient::from_source(const std::string& source) {
    Coefficient c;
    c.expr_ = parse(source);
    c.program_ = std::make_shared<const Program>(*c.expr_);
    c.time_dependent_ = c.expr_->depends_on_time();
    c.description_ = source;
    return c;
}

Coefficient Coefficient::from_builtin(Builtin b, std::string name) {
    Coefficient c;
    c.meta_ = builtin_metadata(b);
    c.builtin_ = std::move(b);
    c.description_ = std::move(name);
    return c;
}

double Coefficient::operator()(double t, double x) const {
    if (expr_) return expr_->evaluate(t, x);
    return eval_builtin(std::get<Builtin>(builtin_), x);
}

void Coefficient::evaluate_row(double t, std::span<const double> x, std::span<double> out) const {
    if (program_) {
        program_->evaluate_row(t, x, out);
        return;
    }
    const Builtin& b = std::get<Builtin>(builtin_);
    const std::size_t n = x.size();
    if (const auto* lin = std::get_if<builtin::Linear>(&b)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = lin->slope * x[i];
    } else if (const auto* aff = std::get_if<builtin::Affine>(&b)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = aff->intercept + aff->slope * x[i];
    } else if (const auto* con = std::get_if<builtin::Constant>(&b)) {
        std::fill_n(out.begin(), n, con->value);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = eval_builtin(b, x[i]);
    }
}

double truncate(const Coefficient& psi, const TruncationLevel& level, double t, double x) {
    if (!(t > 0.0)) throw DomainError("truncate requires t > 0");
    const double y = level.clamp(x);
    const double v = psi(t, y);
    if (!std::isfinite(v)) {
        throw EvaluationError("'" + psi.description() + "' is not finite at (t=" + std::to_string(t) +
                              ", x=" + std::to_string(y) + ")");
    }
    return v;
}

} // namespace shelab::coeff
