#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "lensrig/errors.hpp"
#include "lensrig/expr.hpp"

using namespace lensrig;

namespace {

// Random expression text from a small grammar; kept inside the real domain of every function.
std::string random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 9);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    switch (pick(rng)) {
    case 0: return "x";
    case 1: return "y";
    case 2: return std::to_string(coef(rng));
    case 3: return "(" + random_expr(rng, depth - 1) + " + " + random_expr(rng, depth - 1) + ")";
    case 4: return "(" + random_expr(rng, depth - 1) + " - " + random_expr(rng, depth - 1) + ")";
    case 5: return "(" + random_expr(rng, depth - 1) + " * " + random_expr(rng, depth - 1) + ")";
    case 6: return "sin(" + random_expr(rng, depth - 1) + ")";
    case 7: return "exp(0.3*" + random_expr(rng, depth - 1) + ")";
    case 8: return "(" + random_expr(rng, depth - 1) + ")^" + std::to_string(pick(rng) % 3 + 1);
    default: return "1/(2 + cos(" + random_expr(rng, depth - 1) + "))";
    }
}

}  // namespace

TEST_CASE("parse respects precedence") {
    const Expr e = parse_expression("x^2 + y^2");
    CHECK(e.root().kind == NodeKind::Add);
    CHECK(e.root().lhs->kind == NodeKind::Pow);
    CHECK(e.root().lhs->exponent == 2);
    CHECK(e.root().rhs->kind == NodeKind::Pow);

    const Expr neg = parse_expression("-x^2");
    CHECK(neg.root().kind == NodeKind::Neg);
    CHECK(neg.root().lhs->kind == NodeKind::Pow);

    CHECK(parse_expression("1 - 2 - 3").eval(0, 0) == doctest::Approx(-4.0));
    CHECK(parse_expression("8 / 4 / 2").eval(0, 0) == doctest::Approx(1.0));
    CHECK(parse_expression("2 * x^-2").eval(2, 0) == doctest::Approx(0.5));
    CHECK(parse_expression("x^(-1)").eval(4, 0) == doctest::Approx(0.25));
    CHECK(parse_expression("  pi ").eval(0, 0) == doctest::Approx(M_PI));

    const Expr p = parse_expression("4/(1 - x^2 - y^2)^2");
    CHECK(p.root().kind == NodeKind::Div);
    CHECK(p.root().rhs->kind == NodeKind::Pow);
    CHECK(p.eval(0.5, 0.0) == doctest::Approx(64.0 / 9.0));
}

TEST_CASE("parse errors are located") {
    try {
        parse_expression("sin(x");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 6);
    }
    CHECK_THROWS_AS(parse_expression("x + z"), ParseError);
    CHECK_THROWS_AS(parse_expression("x^2.5"), ParseError);
    CHECK_THROWS_AS(parse_expression("x^y"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x + y"), ParseError);
    CHECK_THROWS_AS(parse_expression("x + y)"), ParseError);
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expression("x +* y"), ParseError);
}

TEST_CASE("fuzzed input never escapes as anything but ParseError") {
    std::mt19937_64 rng(7);
    const std::string alphabet = "xy0123456789.+-*/^() sincoexplgqrtha";
    std::uniform_int_distribution<int> len(0, 24), ch(0, static_cast<int>(alphabet.size()) - 1);
    int parsed = 0;
    for (int i = 0; i < 5000; ++i) {
        std::string s;
        const int n = len(rng);
        for (int k = 0; k < n; ++k) s += alphabet[ch(rng)];
        try {
            parse_expression(s);
            ++parsed;
        } catch (const ParseError& e) {
            CHECK(e.offset() >= 1);
            CHECK(e.offset() <= s.size() + 1);
        }
    }
    CHECK(parsed > 0);
}

TEST_CASE("serialization round-trips structurally") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const Expr e = parse_expression(random_expr(rng, 4));
        const Expr again = parse_expression(e.to_string());
        CHECK(structurally_equal(e, again));
        CHECK(again.to_string() == e.to_string());
    }
    for (const char* text : {"-x^2", "x^-3", "-(x - -2)", "1e-300*x", "-pi"}) {
        const Expr e = parse_expression(text);
        CHECK(structurally_equal(e, parse_expression(e.to_string())));
    }
}

TEST_CASE("jet2 of a quadratic") {
    const Jet2 j = parse_expression("x^2 + y^2").eval_jet2(1, 2);
    CHECK(j.v == 5.0);
    CHECK(j.d[0] == 2.0);
    CHECK(j.d[1] == 4.0);
    CHECK(j.h[0] == 2.0);
    CHECK(j.h[1] == 0.0);
    CHECK(j.h[2] == 2.0);
}

TEST_CASE("jet2 of exp(x*y) at the origin") {
    const Jet2 j = parse_expression("exp(x*y)").eval_jet2(0, 0);
    CHECK(j.v == 1.0);
    CHECK(j.d[0] == 0.0);
    CHECK(j.d[1] == 0.0);
    CHECK(j.h[0] == 0.0);
    CHECK(j.h[1] == 1.0);
    CHECK(j.h[2] == 0.0);
}

TEST_CASE("jet2 agrees with central differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    const double h = 1e-5;
    for (int i = 0; i < 50; ++i) {
        const Expr e = parse_expression(random_expr(rng, 3));
        const double x = coord(rng), y = coord(rng);
        const Jet2 j = e.eval_jet2(x, y);
        auto grad = [&](double px, double py, int k) {
            const double ex = k == 0 ? h : 0.0, ey = k == 1 ? h : 0.0;
            return (e.eval(px + ex, py + ey) - e.eval(px - ex, py - ey)) / (2 * h);
        };
        for (int k = 0; k < 2; ++k) {
            const double fd = grad(x, y, k);
            CHECK(std::abs(fd - j.d[k]) <= std::max(1e-6, 1e-6 * std::abs(j.d[k])));
        }
        // Hessian from central differences of the exact gradient.
        const double hxx = (e.eval_jet2(x + h, y).d[0] - e.eval_jet2(x - h, y).d[0]) / (2 * h);
        const double hxy = (e.eval_jet2(x, y + h).d[0] - e.eval_jet2(x, y - h).d[0]) / (2 * h);
        const double hyy = (e.eval_jet2(x, y + h).d[1] - e.eval_jet2(x, y - h).d[1]) / (2 * h);
        CHECK(std::abs(hxx - j.h[0]) <= std::max(1e-6, 1e-6 * std::abs(j.h[0])));
        CHECK(std::abs(hxy - j.h[1]) <= std::max(1e-6, 1e-6 * std::abs(j.h[1])));
        CHECK(std::abs(hyy - j.h[2]) <= std::max(1e-6, 1e-6 * std::abs(j.h[2])));
    }
}

TEST_CASE("product rule holds exactly") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Expr a = parse_expression(random_expr(rng, 3));
        const Expr b = parse_expression(random_expr(rng, 3));
        const double x = coord(rng), y = coord(rng);
        const Jet2 ja = a.eval_jet2(x, y), jb = b.eval_jet2(x, y);
        const Jet2 jp = ja * jb;
        CHECK(jp.v == ja.v * jb.v);
        for (int k = 0; k < 2; ++k) CHECK(jp.d[k] == ja.d[k] * jb.v + ja.v * jb.d[k]);
        const Jet2 je = (a * b).eval_jet2(x, y);
        const double scale = 1.0 + std::abs(jp.v) + std::abs(jp.h[0]) + std::abs(jp.h[1]) +
                             std::abs(jp.h[2]) + std::abs(jp.d[0]) + std::abs(jp.d[1]);
        CHECK(std::abs(je.v - jp.v) <= 1e-14 * scale);
        for (int k = 0; k < 3; ++k) CHECK(std::abs(je.h[k] - jp.h[k]) <= 1e-13 * scale);
    }
}

TEST_CASE("domain errors name the subexpression") {
    try {
        parse_expression("1 + log(x - 1)").eval(0.5, 0.0);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("log") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_expression("1/(x - y)").eval(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(parse_expression("sqrt(x)").eval(-1.0, 0.0), DomainError);
    CHECK_THROWS_AS(parse_expression("x^-1").eval(0.0, 0.0), DomainError);
}

TEST_CASE("symbolic derivative matches jets") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const Expr e = parse_expression(random_expr(rng, 3));
        const double x = coord(rng), y = coord(rng);
        const Jet2 j = e.eval_jet2(x, y);
        for (int k = 0; k < 2; ++k) {
            const double d = derivative(e, k).eval(x, y);
            CHECK(d == doctest::Approx(j.d[k]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("substitution composes") {
    const Expr e = parse_expression("x*y + sin(x)");
    const Expr s = substitute(e, parse_expression("x + y"), parse_expression("2*y"));
    CHECK(s.eval(0.3, 0.4) == doctest::Approx((0.7) * 0.8 + std::sin(0.7)));
}

TEST_CASE("compiled tape shares subexpressions and matches trees") {
    const Expr a = parse_expression("exp(-(x^2 + y^2)) * (x^2 + y^2)");
    const Expr b = parse_expression("1 + (x^2 + y^2)");
    const Expr outs[2] = {a, b};
    const CompiledExpr tape(outs);
    Jet2 out[2];
    tape.eval<Jet2>(0.3, -0.2, out);
    const Jet2 ja = a.eval_jet2(0.3, -0.2), jb = b.eval_jet2(0.3, -0.2);
    CHECK(out[0].v == doctest::Approx(ja.v));
    CHECK(out[0].h[1] == doctest::Approx(ja.h[1]));
    CHECK(out[1].d[0] == doctest::Approx(jb.d[0]));
    CHECK(tape.instruction_count() < a.node_count() + b.node_count());
}
