#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace shelab::coeff {

enum class Func : std::uint8_t { Sin, Cos, Exp, Log, Abs, Sqrt, Min, Max };

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

// Immutable expression tree over the variables x and t.
class Expr {
public:
    enum class Kind : std::uint8_t { Number, VarX, VarT, Negate, Binary, Call };

    static std::shared_ptr<const Expr> number(double v);
    static std::shared_ptr<const Expr> var_x();
    static std::shared_ptr<const Expr> var_t();
    static std::shared_ptr<const Expr> negate(std::shared_ptr<const Expr> operand);
    static std::shared_ptr<const Expr> binary(BinaryOp op, std::shared_ptr<const Expr> lhs,
                                              std::shared_ptr<const Expr> rhs);
    static std::shared_ptr<const Expr> call(Func f, std::vector<std::shared_ptr<const Expr>> args);

    Kind kind() const noexcept { return kind_; }
    double value() const noexcept { return value_; }
    BinaryOp op() const noexcept { return op_; }
    Func func() const noexcept { return func_; }
    const std::vector<std::shared_ptr<const Expr>>& children() const noexcept { return children_; }

    double evaluate(double t, double x) const;
    bool depends_on_time() const;

private:
    Kind kind_ = Kind::Number;
    double value_ = 0.0;
    BinaryOp op_ = BinaryOp::Add;
    Func func_ = Func::Sin;
    std::vector<std::shared_ptr<const Expr>> children_;
};

using ExprPtr = std::shared_ptr<const Expr>;

// Parses the coefficient grammar:
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := number | "x" | "t" | ident "(" expr ("," expr)* ")" | "(" expr ")"
// Throws ParseError carrying the byte offset of the offending token.
ExprPtr parse(std::string_view source);

// Fully parenthesised rendering that parses back to an equivalent tree.
std::string to_string(const Expr& e);

// Flat postfix program for evaluating an expression over a whole row of
// states at once. Each instruction sweeps the row, so the dispatch cost is
// paid once per row rather than once per cell.
class Program {
public:
    explicit Program(const Expr& root);

    void evaluate_row(double t, std::span<const double> x, std::span<double> out) const;
    std::size_t stack_depth() const noexcept { return depth_; }

private:
    enum class Op : std::uint8_t { Const, X, T, Neg, Add, Sub, Mul, Div, Pow, Call, MinN, MaxN };
    struct Instr {
        Op op;
        Func func = Func::Sin;
        std::uint32_t arity = 0;
        double value = 0.0;
    };

    void emit(const Expr& e, std::size_t depth);

    std::vector<Instr> code_;
    std::size_t depth_ = 0;
};

} // namespace shelab::coeff
