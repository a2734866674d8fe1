#include "lensrig/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <map>
#include <numbers>
#include <tuple>
#include <unordered_map>

#include "lensrig/errors.hpp"

namespace lensrig {

std::string_view func_name(Func f) {
    switch (f) {
        case Func::Sin: return "sin";
        case Func::Cos: return "cos";
        case Func::Exp: return "exp";
        case Func::Log: return "log";
        case Func::Sqrt: return "sqrt";
        case Func::Sinh: return "sinh";
        case Func::Cosh: return "cosh";
        case Func::Tanh: return "tanh";
        case Func::Atan: return "atan";
    }
    return "?";
}

namespace {

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr const_node(double c) {
    Node n;
    n.kind = NodeKind::Const;
    n.value = c;
    return make_node(n);
}

NodePtr unary(NodeKind k, NodePtr a) {
    Node n;
    n.kind = k;
    n.lhs = std::move(a);
    return make_node(n);
}

NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
    Node n;
    n.kind = k;
    n.lhs = std::move(a);
    n.rhs = std::move(b);
    return make_node(n);
}

NodePtr pow_node(NodePtr a, int e) {
    Node n;
    n.kind = NodeKind::Pow;
    n.exponent = e;
    n.lhs = std::move(a);
    return make_node(n);
}

NodePtr func_node(Func f, NodePtr a) {
    Node n;
    n.kind = NodeKind::Func;
    n.func = f;
    n.lhs = std::move(a);
    return make_node(n);
}

// f(a), f'(a), f''(a) for the built-in functions.
struct FuncJet {
    double f0, f1, f2;
};

FuncJet func_jet(Func f, double a) {
    switch (f) {
        case Func::Sin: {
            const double s = std::sin(a), c = std::cos(a);
            return {s, c, -s};
        }
        case Func::Cos: {
            const double s = std::sin(a), c = std::cos(a);
            return {c, -s, -c};
        }
        case Func::Exp: {
            const double e = std::exp(a);
            return {e, e, e};
        }
        case Func::Log: return {std::log(a), 1.0 / a, -1.0 / (a * a)};
        case Func::Sqrt: {
            const double r = std::sqrt(a);
            return {r, 0.5 / r, -0.25 / (r * a)};
        }
        case Func::Sinh: {
            const double s = std::sinh(a), c = std::cosh(a);
            return {s, c, s};
        }
        case Func::Cosh: {
            const double s = std::sinh(a), c = std::cosh(a);
            return {c, s, c};
        }
        case Func::Tanh: {
            const double t = std::tanh(a);
            const double sech2 = 1.0 - t * t;
            return {t, sech2, -2.0 * t * sech2};
        }
        case Func::Atan: {
            const double q = 1.0 / (1.0 + a * a);
            return {std::atan(a), q, -2.0 * a * q * q};
        }
    }
    return {0, 0, 0};
}

double func_value(Func f, double a) {
    switch (f) {
        case Func::Sin: return std::sin(a);
        case Func::Cos: return std::cos(a);
        case Func::Exp: return std::exp(a);
        case Func::Log: return std::log(a);
        case Func::Sqrt: return std::sqrt(a);
        case Func::Sinh: return std::sinh(a);
        case Func::Cosh: return std::cosh(a);
        case Func::Tanh: return std::tanh(a);
        case Func::Atan: return std::atan(a);
    }
    return 0.0;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void serialize(const Node& n, std::string& out, const std::array<std::string_view, 2>& names) {
    switch (n.kind) {
        case NodeKind::Const:
            if (n.value < 0 || std::signbit(n.value)) {
                out += "(";
                out += format_number(n.value);
                out += ")";
            } else {
                out += format_number(n.value);
            }
            return;
        case NodeKind::Var: out += names[n.var]; return;
        case NodeKind::Neg:
            out += "(-";
            serialize(*n.lhs, out, names);
            out += ")";
            return;
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div: {
            static constexpr char ops[] = {'+', '-', '*', '/'};
            out += "(";
            serialize(*n.lhs, out, names);
            out += ops[static_cast<int>(n.kind) - static_cast<int>(NodeKind::Add)];
            serialize(*n.rhs, out, names);
            out += ")";
            return;
        }
        case NodeKind::Pow:
            out += "(";
            serialize(*n.lhs, out, names);
            out += "^";
            out += std::to_string(n.exponent);
            out += ")";
            return;
        case NodeKind::Func:
            out += func_name(n.func);
            out += "(";
            serialize(*n.lhs, out, names);
            out += ")";
            return;
    }
}

bool equal_nodes(const Node& a, const Node& b) {
    if (&a == &b) return true;
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Const:
            return std::memcmp(&a.value, &b.value, sizeof(double)) == 0 || a.value == b.value;
        case NodeKind::Var: return a.var == b.var;
        case NodeKind::Neg: return equal_nodes(*a.lhs, *b.lhs);
        case NodeKind::Pow: return a.exponent == b.exponent && equal_nodes(*a.lhs, *b.lhs);
        case NodeKind::Func: return a.func == b.func && equal_nodes(*a.lhs, *b.lhs);
        default: return equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
    }
}

// ---- parser ------------------------------------------------------------------

class Parser {
public:
    Parser(std::string_view text, std::span<const std::string_view> vars)
        : text_(text), vars_(vars) {}

    Expr parse() {
        skip_ws();
        if (pos_ >= text_.size()) fail("empty expression");
        Expr e = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) {
            if (text_[pos_] == ')') fail("unbalanced parenthesis: unexpected ')'");
            fail(std::string("unexpected character '") + text_[pos_] + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_ + 1); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, at + 1);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                        text_[pos_] == '\n' || text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expr parse_sum() {
        Expr e = parse_product();
        for (;;) {
            if (accept('+')) {
                e = Expr(binary(NodeKind::Add, e.node(), parse_product().node()));
            } else if (accept('-')) {
                e = Expr(binary(NodeKind::Sub, e.node(), parse_product().node()));
            } else {
                return e;
            }
        }
    }

    Expr parse_product() {
        Expr e = parse_unary();
        for (;;) {
            if (accept('*')) {
                e = Expr(binary(NodeKind::Mul, e.node(), parse_unary().node()));
            } else if (accept('/')) {
                e = Expr(binary(NodeKind::Div, e.node(), parse_unary().node()));
            } else {
                return e;
            }
        }
    }

    Expr parse_unary() {
        if (accept('-')) {
            Expr a = parse_unary();
            if (a.is_constant()) return Expr::constant(-a.root().value);
            return Expr(unary(NodeKind::Neg, a.node()));
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expr parse_power() {
        Expr e = parse_primary();
        while (accept('^')) e = Expr(pow_node(e.node(), parse_exponent()));
        return e;
    }

    int parse_exponent() {
        skip_ws();
        bool paren = accept('(');
        skip_ws();
        bool negative = false;
        if (accept('-')) {
            negative = true;
        } else {
            accept('+');
        }
        skip_ws();
        const std::size_t start = pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            fail("exponent must be an integer literal");
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() &&
            (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
            fail_at("non-integer exponent", start);
        long long value = 0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || value > std::numeric_limits<int>::max())
            fail_at("exponent out of range", start);
        if (paren && !accept(')')) fail("unbalanced parenthesis: expected ')'");
        return negative ? -static_cast<int>(value) : static_cast<int>(value);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                        text_[pos_] == '.'))
            ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
                pos_ = p;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            fail_at("malformed number", start);
        return Expr::constant(value);
    }

    Expr parse_primary() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (!accept(')')) {
                skip_ws();
                fail("unbalanced parenthesis: expected ')'");
            }
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                            text_[pos_] == '_'))
                ++pos_;
            const std::string_view id = text_.substr(start, pos_ - start);
            for (std::size_t i = 0; i < vars_.size(); ++i)
                if (id == vars_[i]) return Expr::variable(static_cast<int>(i));
            if (id == "pi") return Expr::constant(std::numbers::pi);
            static constexpr Func funcs[] = {Func::Sin,  Func::Cos,  Func::Exp,
                                             Func::Log,  Func::Sqrt, Func::Sinh,
                                             Func::Cosh, Func::Tanh, Func::Atan};
            for (Func f : funcs) {
                if (id == func_name(f)) {
                    if (!accept('(')) fail("expected '(' after function name");
                    Expr arg = parse_sum();
                    if (!accept(')')) {
                        skip_ws();
                        fail("unbalanced parenthesis: expected ')'");
                    }
                    return Expr(func_node(f, arg.node()));
                }
            }
            fail_at("unknown identifier '" + std::string(id) + "'", start);
        }
        if (c == ')') fail("unbalanced parenthesis: unexpected ')'");
        fail(std::string("unexpected character '") + c + "'");
    }

    std::string_view text_;
    std::span<const std::string_view> vars_;
    std::size_t pos_ = 0;
};

// ---- tape evaluation --------------------------------------------------------

template <class T>
T eval_func(Func f, const T& a) {
    const double av = value_of(a);
    const FuncJet fj = func_jet(f, av);
    return apply_chain(a, fj.f0, fj.f1, fj.f2);
}

template <>
double eval_func<double>(Func f, const double& a) {
    return func_value(f, a);
}

template <class T>
T int_pow(const T& a, int n) {
    const double av = value_of(a);
    if (n == 0) return make_constant<T>(1.0);
    const double f0 = std::pow(av, n);
    const double f1 = n * std::pow(av, n - 1);
    const double f2 = n == 1 ? 0.0 : double(n) * double(n - 1) * std::pow(av, n - 2);
    return apply_chain(a, f0, f1, f2);
}

template <>
double int_pow<double>(const double& a, int n) {
    return std::pow(a, n);
}

constexpr bool needs_derivatives(double) { return false; }
constexpr bool needs_derivatives(const Jet1&) { return true; }
constexpr bool needs_derivatives(const Jet2&) { return true; }

}  // namespace

// ---- Expr -----------------------------------------------------------------------

Expr::Expr() : root_(const_node(0.0)) {}
Expr::Expr(NodePtr root) : root_(std::move(root)) {}

Expr Expr::constant(double c) { return Expr(const_node(c)); }

Expr Expr::variable(int index) {
    Node n;
    n.kind = NodeKind::Var;
    n.var = index;
    return Expr(make_node(n));
}

double Expr::eval(double x, double y) const { return CompiledExpr(*this).value(x, y); }

Jet2 Expr::eval_jet2(double x, double y) const { return CompiledExpr(*this).jet2(x, y); }

std::string Expr::to_string() const { return to_string({"x", "y"}); }

std::string Expr::to_string(std::array<std::string_view, 2> names) const {
    std::string out;
    serialize(*root_, out, names);
    return out;
}

std::size_t Expr::node_count() const {
    std::size_t count = 0;
    std::vector<const Node*> stack{root_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        ++count;
        if (n->lhs) stack.push_back(n->lhs.get());
        if (n->rhs) stack.push_back(n->rhs.get());
    }
    return count;
}

bool structurally_equal(const Expr& a, const Expr& b) { return equal_nodes(a.root(), b.root()); }

Expr parse_expression(std::string_view text, std::span<const std::string_view> variables) {
    return Parser(text, variables).parse();
}

Expr parse_expression(std::string_view text) {
    static constexpr std::string_view xy[] = {"x", "y"};
    return parse_expression(text, xy);
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_constant(0.0)) return b;
    if (b.is_constant(0.0)) return a;
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.root().value + b.root().value);
    return Expr(binary(NodeKind::Add, a.node(), b.node()));
}

Expr operator-(const Expr& a, const Expr& b) {
    if (b.is_constant(0.0)) return a;
    if (a.is_constant(0.0)) return -b;
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.root().value - b.root().value);
    return Expr(binary(NodeKind::Sub, a.node(), b.node()));
}

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant() && b.is_constant()) return Expr::constant(a.root().value * b.root().value);
    return Expr(binary(NodeKind::Mul, a.node(), b.node()));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
    return Expr(binary(NodeKind::Div, a.node(), b.node()));
}

Expr operator-(const Expr& a) {
    if (a.is_constant()) return Expr::constant(-a.root().value);
    if (a.root().kind == NodeKind::Neg) return Expr(a.root().lhs);
    return Expr(unary(NodeKind::Neg, a.node()));
}

Expr pow(const Expr& a, int n) {
    if (n == 0) return Expr::constant(1.0);
    if (n == 1) return a;
    if (a.is_constant() && !a.is_constant(0.0)) return Expr::constant(std::pow(a.root().value, n));
    return Expr(pow_node(a.node(), n));
}

Expr apply(Func f, const Expr& a) { return Expr(func_node(f, a.node())); }

namespace {

Expr derive(const NodePtr& n, int index, std::unordered_map<const Node*, Expr>& memo) {
    if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
    const Expr e(n);
    Expr d;
    switch (n->kind) {
        case NodeKind::Const: d = Expr::constant(0.0); break;
        case NodeKind::Var: d = Expr::constant(n->var == index ? 1.0 : 0.0); break;
        case NodeKind::Neg: d = -derive(n->lhs, index, memo); break;
        case NodeKind::Add: d = derive(n->lhs, index, memo) + derive(n->rhs, index, memo); break;
        case NodeKind::Sub: d = derive(n->lhs, index, memo) - derive(n->rhs, index, memo); break;
        case NodeKind::Mul: {
            const Expr a(n->lhs), b(n->rhs);
            d = derive(n->lhs, index, memo) * b + a * derive(n->rhs, index, memo);
            break;
        }
        case NodeKind::Div: {
            const Expr a(n->lhs), b(n->rhs);
            d = derive(n->lhs, index, memo) / b - a * derive(n->rhs, index, memo) / pow(b, 2);
            break;
        }
        case NodeKind::Pow: {
            const Expr a(n->lhs);
            d = Expr::constant(n->exponent) * pow(a, n->exponent - 1) * derive(n->lhs, index, memo);
            break;
        }
        case NodeKind::Func: {
            const Expr a(n->lhs);
            const Expr da = derive(n->lhs, index, memo);
            if (da.is_constant(0.0)) {
                d = Expr::constant(0.0);
                break;
            }
            switch (n->func) {
                case Func::Sin: d = apply(Func::Cos, a) * da; break;
                case Func::Cos: d = -(apply(Func::Sin, a) * da); break;
                case Func::Exp: d = e * da; break;
                case Func::Log: d = da / a; break;
                case Func::Sqrt: d = da / (Expr::constant(2.0) * e); break;
                case Func::Sinh: d = apply(Func::Cosh, a) * da; break;
                case Func::Cosh: d = apply(Func::Sinh, a) * da; break;
                case Func::Tanh: d = (Expr::constant(1.0) - pow(e, 2)) * da; break;
                case Func::Atan: d = da / (Expr::constant(1.0) + pow(a, 2)); break;
            }
            break;
        }
    }
    memo.emplace(n.get(), d);
    return d;
}

Expr subst(const NodePtr& n, const Expr& x, const Expr& y,
           std::unordered_map<const Node*, Expr>& memo) {
    if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
    Expr r;
    switch (n->kind) {
        case NodeKind::Const: r = Expr(n); break;
        case NodeKind::Var: r = n->var == 0 ? x : y; break;
        case NodeKind::Neg: r = -subst(n->lhs, x, y, memo); break;
        case NodeKind::Add: r = subst(n->lhs, x, y, memo) + subst(n->rhs, x, y, memo); break;
        case NodeKind::Sub: r = subst(n->lhs, x, y, memo) - subst(n->rhs, x, y, memo); break;
        case NodeKind::Mul: r = subst(n->lhs, x, y, memo) * subst(n->rhs, x, y, memo); break;
        case NodeKind::Div: r = subst(n->lhs, x, y, memo) / subst(n->rhs, x, y, memo); break;
        case NodeKind::Pow: r = pow(subst(n->lhs, x, y, memo), n->exponent); break;
        case NodeKind::Func: r = apply(n->func, subst(n->lhs, x, y, memo)); break;
    }
    memo.emplace(n.get(), r);
    return r;
}

}  // namespace

Expr derivative(const Expr& e, int index) {
    std::unordered_map<const Node*, Expr> memo;
    return derive(e.node(), index, memo);
}

Expr substitute(const Expr& e, const Expr& x, const Expr& y) {
    std::unordered_map<const Node*, Expr> memo;
    return subst(e.node(), x, y, memo);
}

// ---- CompiledExpr -------------------------------------------------------------------

namespace {

using InstrKey = std::tuple<int, int, int, std::uint64_t, int, std::int32_t, std::int32_t>;

}  // namespace

CompiledExpr::CompiledExpr(const Expr& output) : CompiledExpr(std::span<const Expr>(&output, 1)) {}

CompiledExpr::CompiledExpr(std::span<const Expr> outputs) {
    std::unordered_map<const Node*, std::int32_t> by_pointer;
    std::map<InstrKey, std::int32_t> by_structure;

    auto emit = [&](auto&& self, const Node* n) -> std::int32_t {
        if (auto it = by_pointer.find(n); it != by_pointer.end()) return it->second;
        Instr ins{n->kind, n->func, n->exponent, -1, -1, n->value, n};
        if (n->lhs) ins.a = self(self, n->lhs.get());
        if (n->rhs) ins.b = self(self, n->rhs.get());
        std::uint64_t bits = 0;
        std::memcpy(&bits, &ins.value, sizeof bits);
        const InstrKey key{static_cast<int>(ins.kind), static_cast<int>(ins.func), ins.exponent,
                           n->kind == NodeKind::Const ? bits : 0, n->var, ins.a, ins.b};
        std::int32_t id;
        if (auto it = by_structure.find(key); it != by_structure.end()) {
            id = it->second;
        } else {
            if (n->kind == NodeKind::Var) ins.exponent = n->var;
            id = static_cast<std::int32_t>(code_.size());
            code_.push_back(ins);
            by_structure.emplace(key, id);
        }
        by_pointer.emplace(n, id);
        return id;
    };

    for (const Expr& e : outputs) {
        keep_alive_.push_back(e.node());
        outputs_.push_back(emit(emit, e.node().get()));
    }
}

template <class T>
void CompiledExpr::eval(double x, double y, std::span<T> out) const {
    thread_local std::vector<T> regs;
    regs.resize(code_.size());
    for (std::size_t i = 0; i < code_.size(); ++i) {
        const Instr& ins = code_[i];
        T& r = regs[i];
        switch (ins.kind) {
            case NodeKind::Const: r = make_constant<T>(ins.value); break;
            case NodeKind::Var:
                r = make_variable<T>(ins.exponent == 0 ? x : y, ins.exponent);
                break;
            case NodeKind::Neg: r = -regs[ins.a]; break;
            case NodeKind::Add: r = regs[ins.a] + regs[ins.b]; break;
            case NodeKind::Sub: r = regs[ins.a] - regs[ins.b]; break;
            case NodeKind::Mul: r = regs[ins.a] * regs[ins.b]; break;
            case NodeKind::Div:
                if (value_of(regs[ins.b]) == 0.0)
                    throw DomainError("division by zero in " + Expr(NodePtr(keep_alive_.front(),
                                                                             ins.source))
                                                                   .to_string());
                r = regs[ins.a] / regs[ins.b];
                break;
            case NodeKind::Pow:
                if (ins.exponent < 0 && value_of(regs[ins.a]) == 0.0)
                    throw DomainError("negative power of zero in " +
                                      Expr(NodePtr(keep_alive_.front(), ins.source)).to_string());
                r = int_pow(regs[ins.a], ins.exponent);
                break;
            case NodeKind::Func: {
                const double a = value_of(regs[ins.a]);
                const bool bad = (ins.func == Func::Log && a <= 0.0) ||
                                 (ins.func == Func::Sqrt &&
                                  (a < 0.0 || (a == 0.0 && needs_derivatives(regs[ins.a]))));
                if (bad)
                    throw DomainError(std::string(func_name(ins.func)) +
                                      " argument out of domain in " +
                                      Expr(NodePtr(keep_alive_.front(), ins.source)).to_string());
                r = eval_func(ins.func, regs[ins.a]);
                break;
            }
        }
    }
    for (std::size_t k = 0; k < outputs_.size(); ++k) out[k] = regs[outputs_[k]];
}

template void CompiledExpr::eval<double>(double, double, std::span<double>) const;
template void CompiledExpr::eval<Jet1>(double, double, std::span<Jet1>) const;
template void CompiledExpr::eval<Jet2>(double, double, std::span<Jet2>) const;

namespace {

template <class T>
T first_output(const CompiledExpr& c, double x, double y) {
    std::array<T, 4> small{};
    if (c.output_count() <= small.size()) {
        c.eval<T>(x, y, std::span<T>(small.data(), c.output_count()));
        return small[0];
    }
    std::vector<T> out(c.output_count());
    c.eval<T>(x, y, out);
    return out[0];
}

}  // namespace

double CompiledExpr::value(double x, double y) const { return first_output<double>(*this, x, y); }
Jet1 CompiledExpr::jet1(double x, double y) const { return first_output<Jet1>(*this, x, y); }
Jet2 CompiledExpr::jet2(double x, double y) const { return first_output<Jet2>(*this, x, y); }

}  // namespace lensrig
