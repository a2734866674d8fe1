#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lensrig/jet.hpp"

namespace lensrig {

enum class NodeKind : std::uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Func };

enum class Func : std::uint8_t { Sin, Cos, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Atan };

std::string_view func_name(Func f);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind = NodeKind::Const;
    double value = 0.0;  // Const
    int var = 0;         // Var: 0 or 1
    int exponent = 0;    // Pow
    Func func = Func::Sin;
    NodePtr lhs{};  // operand of unary nodes, left operand of binary nodes
    NodePtr rhs{};
};

// Immutable expression tree over two variables.
class Expr {
public:
    Expr();  // the constant 0
    explicit Expr(NodePtr root);

    static Expr constant(double c);
    static Expr variable(int index);

    const Node& root() const { return *root_; }
    const NodePtr& node() const { return root_; }

    bool is_constant() const { return root_->kind == NodeKind::Const; }
    bool is_constant(double c) const { return is_constant() && root_->value == c; }

    double eval(double x, double y) const;
    Jet2 eval_jet2(double x, double y) const;

    // Fully parenthesized infix form; re-parses to a structurally identical tree.
    std::string to_string() const;
    std::string to_string(std::array<std::string_view, 2> names) const;

    std::size_t node_count() const;

private:
    NodePtr root_;
};

bool structurally_equal(const Expr& a, const Expr& b);

// Parses `text` with the given variable names (index 0 and 1). Throws ParseError.
Expr parse_expression(std::string_view text, std::span<const std::string_view> variables);
Expr parse_expression(std::string_view text);  // variables x, y

// Smart constructors with trivial constant folding (0 and 1 absorption).
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int n);
Expr apply(Func f, const Expr& a);

// Symbolic partial derivative with respect to variable `index`.
Expr derivative(const Expr& e, int index);

// Replaces variable 0 by `x` and variable 1 by `y`.
Expr substitute(const Expr& e, const Expr& x, const Expr& y);

// Flattened evaluation program for one or more expressions, with common
// subexpressions merged. Immutable after construction; evaluation is pure.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(std::span<const Expr> outputs);
    explicit CompiledExpr(const Expr& output);

    std::size_t output_count() const { return outputs_.size(); }
    std::size_t instruction_count() const { return code_.size(); }

    // Evaluates all outputs at (x, y) as scalars of type T (double, Jet1, Jet2).
    template <class T>
    void eval(double x, double y, std::span<T> out) const;

    double value(double x, double y) const;
    Jet1 jet1(double x, double y) const;
    Jet2 jet2(double x, double y) const;

private:
    struct Instr {
        NodeKind kind;
        Func func;
        int exponent;
        std::int32_t a;
        std::int32_t b;
        double value;
        const Node* source;  // for error messages
    };
    std::vector<Instr> code_;
    std::vector<std::int32_t> outputs_;
    std::vector<NodePtr> keep_alive_;
};

}  // namespace lensrig
