#include "shelab/coeff/expr.hpp"

#include "shelab/error.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace shelab::coeff {

namespace {

struct FuncInfo {
    std::string_view name;
    Func func;
    std::size_t min_arity;
    std::size_t max_arity;
};

constexpr std::size_t kVariadic = static_cast<std::size_t>(-1);

constexpr std::array<FuncInfo, 8> kFunctions{{
    {"sin", Func::Sin, 1, 1},
    {"cos", Func::Cos, 1, 1},
    {"exp", Func::Exp, 1, 1},
    {"log", Func::Log, 1, 1},
    {"abs", Func::Abs, 1, 1},
    {"sqrt", Func::Sqrt, 1, 1},
    {"min", Func::Min, 2, kVariadic},
    {"max", Func::Max, 2, kVariadic},
}};

std::string_view func_name(Func f) {
    for (const auto& info : kFunctions) {
        if (info.func == f) return info.name;
    }
    return "?";
}

double apply_unary(Func f, double v) {
    switch (f) {
    case Func::Sin: return std::sin(v);
    case Func::Cos: return std::cos(v);
    case Func::Exp: return std::exp(v);
    case Func::Log: return std::log(v);
    case Func::Abs: return std::fabs(v);
    case Func::Sqrt: return std::sqrt(v);
    case Func::Min:
    case Func::Max: break;
    }
    return v;
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
    }
    return 0.0;
}

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    ExprPtr parse_all() {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) {
            throw ParseError("syntax error: unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
        }
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size()) {
                throw ParseError(std::string("syntax error: expected '") + c + "' but input ended", pos_);
            }
            throw ParseError(std::string("syntax error: expected '") + c + "'", pos_);
        }
    }

    ExprPtr parse_expr() {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = Expr::binary(BinaryOp::Add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = Expr::binary(BinaryOp::Sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_term() {
        auto lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                lhs = Expr::binary(BinaryOp::Mul, lhs, parse_factor());
            } else if (accept('/')) {
                lhs = Expr::binary(BinaryOp::Div, lhs, parse_factor());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr parse_factor() {
        if (accept('-')) return Expr::negate(parse_factor());
        return parse_power();
    }

    ExprPtr parse_power() {
        auto base = parse_atom();
        if (accept('^')) return Expr::binary(BinaryOp::Pow, base, parse_factor());
        return base;
    }

    ExprPtr parse_atom() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("syntax error: unexpected end of input", pos_);
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        if (c == '(') {
            ++pos_;
            auto inner = parse_expr();
            expect(')');
            return inner;
        }
        throw ParseError("syntax error: unexpected '" + std::string(1, c) + "'", pos_);
    }

    ExprPtr parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError("syntax error: malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) throw ParseError("syntax error: malformed exponent", start);
        }
        double v = 0.0;
        const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
        if (res.ec != std::errc{} || !std::isfinite(v)) {
            throw ParseError("syntax error: number out of range", start);
        }
        return Expr::number(v);
    }

    ExprPtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);
        if (name == "x") return Expr::var_x();
        if (name == "t") return Expr::var_t();

        const auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                                     [&](const FuncInfo& f) { return f.name == name; });
        if (it == kFunctions.end()) {
            throw ParseError("unknown identifier '" + std::string(name) + "'", start);
        }
        expect('(');
        std::vector<ExprPtr> args;
        args.push_back(parse_expr());
        while (accept(',')) args.push_back(parse_expr());
        expect(')');
        if (args.size() < it->min_arity || args.size() > it->max_arity) {
            throw ParseError("arity mismatch: '" + std::string(name) + "' called with " +
                                 std::to_string(args.size()) + " argument(s)",
                             start);
        }
        return Expr::call(it->func, std::move(args));
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    if (v < 0) return "(" + s + ")";
    return s;
}

} // namespace

ExprPtr Expr::number(double v) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Number;
    e->value_ = v;
    return e;
}

ExprPtr Expr::var_x() {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::VarX;
    return e;
}

ExprPtr Expr::var_t() {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::VarT;
    return e;
}

ExprPtr Expr::negate(ExprPtr operand) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Negate;
    e->children_.push_back(std::move(operand));
    return e;
}

ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Binary;
    e->op_ = op;
    e->children_.push_back(std::move(lhs));
    e->children_.push_back(std::move(rhs));
    return e;
}

ExprPtr Expr::call(Func f, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->kind_ = Kind::Call;
    e->func_ = f;
    e->children_ = std::move(args);
    return e;
}

double Expr::evaluate(double t, double x) const {
    switch (kind_) {
    case Kind::Number: return value_;
    case Kind::VarX: return x;
    case Kind::VarT: return t;
    case Kind::Negate: return -children_[0]->evaluate(t, x);
    case Kind::Binary:
        return apply_binary(op_, children_[0]->evaluate(t, x), children_[1]->evaluate(t, x));
    case Kind::Call: {
        if (func_ == Func::Min || func_ == Func::Max) {
            double acc = children_[0]->evaluate(t, x);
            for (std::size_t i = 1; i < children_.size(); ++i) {
                const double v = children_[i]->evaluate(t, x);
                acc = func_ == Func::Min ? std::fmin(acc, v) : std::fmax(acc, v);
            }
            return acc;
        }
        return apply_unary(func_, children_[0]->evaluate(t, x));
    }
    }
    return 0.0;
}

bool Expr::depends_on_time() const {
    if (kind_ == Kind::VarT) return true;
    return std::any_of(children_.begin(), children_.end(),
                       [](const ExprPtr& c) { return c->depends_on_time(); });
}

ExprPtr parse(std::string_view source) { return Parser(source).parse_all(); }

std::string to_string(const Expr& e) {
    switch (e.kind()) {
    case Expr::Kind::Number: return format_number(e.value());
    case Expr::Kind::VarX: return "x";
    case Expr::Kind::VarT: return "t";
    case Expr::Kind::Negate: return "(-" + to_string(*e.children()[0]) + ")";
    case Expr::Kind::Binary: {
        static constexpr std::array<char, 5> symbols{'+', '-', '*', '/', '^'};
        return "(" + to_string(*e.children()[0]) + " " +
               symbols[static_cast<std::size_t>(e.op())] + " " + to_string(*e.children()[1]) + ")";
    }
    case Expr::Kind::Call: {
        std::string s(func_name(e.func()));
        s += "(";
        for (std::size_t i = 0; i < e.children().size(); ++i) {
            if (i > 0) s += ", ";
            s += to_string(*e.children()[i]);
        }
        return s + ")";
    }
    }
    return {};
}

Program::Program(const Expr& root) { emit(root, 1); }

void Program::emit(const Expr& e, std::size_t depth) {
    depth_ = std::max(depth_, depth);
    switch (e.kind()) {
    case Expr::Kind::Number: code_.push_back({Op::Const, Func::Sin, 0, e.value()}); return;
    case Expr::Kind::VarX: code_.push_back({Op::X}); return;
    case Expr::Kind::VarT: code_.push_back({Op::T}); return;
    case Expr::Kind::Negate:
        emit(*e.children()[0], depth);
        code_.push_back({Op::Neg});
        return;
    case Expr::Kind::Binary: {
        emit(*e.children()[0], depth);
        emit(*e.children()[1], depth + 1);
        static constexpr std::array<Op, 5> ops{Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Pow};
        code_.push_back({ops[static_cast<std::size_t>(e.op())]});
        return;
    }
    case Expr::Kind::Call: {
        const auto& args = e.children();
        for (std::size_t i = 0; i < args.size(); ++i) emit(*args[i], depth + i);
        const auto arity = static_cast<std::uint32_t>(args.size());
        if (e.func() == Func::Min) {
            code_.push_back({Op::MinN, e.func(), arity});
        } else if (e.func() == Func::Max) {
            code_.push_back({Op::MaxN, e.func(), arity});
        } else {
            code_.push_back({Op::Call, e.func(), 1});
        }
        return;
    }
    }
}

void Program::evaluate_row(double t, std::span<const double> x, std::span<double> out) const {
    const std::size_t n = x.size();
    thread_local std::vector<double> scratch;
    if (scratch.size() < depth_ * n) scratch.resize(depth_ * n);
    double* stack = scratch.data();
    std::size_t top = 0; // number of rows on the stack

    auto row = [&](std::size_t i) { return stack + i * n; };

    for (const Instr& ins : code_) {
        switch (ins.op) {
        case Op::Const: std::fill_n(row(top++), n, ins.value); break;
        case Op::T: std::fill_n(row(top++), n, t); break;
        case Op::X: std::copy(x.begin(), x.end(), row(top++)); break;
        case Op::Neg: {
            double* a = row(top - 1);
            for (std::size_t i = 0; i < n; ++i) a[i] = -a[i];
            break;
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow: {
            double* a = row(top - 2);
            const double* b = row(top - 1);
            switch (ins.op) {
            case Op::Add: for (std::size_t i = 0; i < n; ++i) a[i] += b[i]; break;
            case Op::Sub: for (std::size_t i = 0; i < n; ++i) a[i] -= b[i]; break;
            case Op::Mul: for (std::size_t i = 0; i < n; ++i) a[i] *= b[i]; break;
            case Op::Div: for (std::size_t i = 0; i < n; ++i) a[i] /= b[i]; break;
            default: for (std::size_t i = 0; i < n; ++i) a[i] = std::pow(a[i], b[i]); break;
            }
            --top;
            break;
        }
        case Op::Call: {
            double* a = row(top - 1);
            for (std::size_t i = 0; i < n; ++i) a[i] = apply_unary(ins.func, a[i]);
            break;
        }
        case Op::MinN:
        case Op::MaxN: {
            double* a = row(top - ins.arity);
            for (std::uint32_t k = 1; k < ins.arity; ++k) {
                const double* b = row(top - ins.arity + k);
                if (ins.op == Op::MinN) {
                    for (std::size_t i = 0; i < n; ++i) a[i] = std::fmin(a[i], b[i]);
                } else {
                    for (std::size_t i = 0; i < n; ++i) a[i] = std::fmax(a[i], b[i]);
                }
            }
            top -= ins.arity - 1;
            break;
        }
        }
    }
    std::copy_n(row(0), n, out.begin());
}

} // namespace shelab::coeff
