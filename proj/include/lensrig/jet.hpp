#pragma once

#include <array>
#include <cmath>

namespace lensrig {

// First-order jet in two variables: value and gradient.
struct Jet1 {
    double v = 0.0;
    std::array<double, 2> d{0.0, 0.0};

    static Jet1 constant(double c) { return {c, {0.0, 0.0}}; }
    static Jet1 variable(double x, int index) {
        Jet1 j{x, {0.0, 0.0}};
        j.d[index] = 1.0;
        return j;
    }
};

// Second-order jet: value, gradient and Hessian. The Hessian keeps a single
// triangle (xx, xy, yy) so it is symmetric by construction.
struct Jet2 {
    double v = 0.0;
    std::array<double, 2> d{0.0, 0.0};
    std::array<double, 3> h{0.0, 0.0, 0.0};

    static Jet2 constant(double c) { return {c, {0.0, 0.0}, {0.0, 0.0, 0.0}}; }
    static Jet2 variable(double x, int index) {
        Jet2 j{x, {0.0, 0.0}, {0.0, 0.0, 0.0}};
        j.d[index] = 1.0;
        return j;
    }
    double hess(int i, int k) const { return h[i + k]; }
};

// ---- Jet1 arithmetic -------------------------------------------------------

inline Jet1 operator-(const Jet1& a) { return {-a.v, {-a.d[0], -a.d[1]}}; }
inline Jet1 operator+(const Jet1& a, const Jet1& b) {
    return {a.v + b.v, {a.d[0] + b.d[0], a.d[1] + b.d[1]}};
}
inline Jet1 operator-(const Jet1& a, const Jet1& b) {
    return {a.v - b.v, {a.d[0] - b.d[0], a.d[1] - b.d[1]}};
}
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
    return {a.v * b.v, {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1]}};
}
inline Jet1 operator*(double s, const Jet1& a) { return {s * a.v, {s * a.d[0], s * a.d[1]}}; }
inline Jet1 operator*(const Jet1& a, double s) { return s * a; }
inline Jet1 operator+(const Jet1& a, double s) { return {a.v + s, a.d}; }
inline Jet1 operator+(double s, const Jet1& a) { return {a.v + s, a.d}; }
inline Jet1 operator-(const Jet1& a, double s) { return {a.v - s, a.d}; }
inline Jet1 operator-(double s, const Jet1& a) { return {s - a.v, {-a.d[0], -a.d[1]}}; }

// Chain rule for a scalar function with value f0 and derivative f1 at a.v.
inline Jet1 chain(const Jet1& a, double f0, double f1) {
    return {f0, {f1 * a.d[0], f1 * a.d[1]}};
}
inline Jet1 operator/(const Jet1& a, const Jet1& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv);
}
inline Jet1 operator/(const Jet1& a, double s) { return (1.0 / s) * a; }
inline Jet1 operator/(double s, const Jet1& b) {
    const double inv = 1.0 / b.v;
    return s * chain(b, inv, -inv * inv);
}

// ---- Jet2 arithmetic -------------------------------------------------------

inline Jet2 operator-(const Jet2& a) {
    return {-a.v, {-a.d[0], -a.d[1]}, {-a.h[0], -a.h[1], -a.h[2]}};
}
inline Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.v + b.v,
            {a.d[0] + b.d[0], a.d[1] + b.d[1]},
            {a.h[0] + b.h[0], a.h[1] + b.h[1], a.h[2] + b.h[2]}};
}
inline Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.v - b.v,
            {a.d[0] - b.d[0], a.d[1] - b.d[1]},
            {a.h[0] - b.h[0], a.h[1] - b.h[1], a.h[2] - b.h[2]}};
}
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1]},
            {a.h[0] * b.v + 2.0 * a.d[0] * b.d[0] + a.v * b.h[0],
             a.h[1] * b.v + a.d[0] * b.d[1] + a.d[1] * b.d[0] + a.v * b.h[1],
             a.h[2] * b.v + 2.0 * a.d[1] * b.d[1] + a.v * b.h[2]}};
}
inline Jet2 operator*(double s, const Jet2& a) {
    return {s * a.v, {s * a.d[0], s * a.d[1]}, {s * a.h[0], s * a.h[1], s * a.h[2]}};
}
inline Jet2 operator*(const Jet2& a, double s) { return s * a; }
inline Jet2 operator+(const Jet2& a, double s) { return {a.v + s, a.d, a.h}; }
inline Jet2 operator+(double s, const Jet2& a) { return {a.v + s, a.d, a.h}; }
inline Jet2 operator-(const Jet2& a, double s) { return {a.v - s, a.d, a.h}; }
inline Jet2 operator-(double s, const Jet2& a) { return s + (-a); }

// Chain rule with f0 = f(a), f1 = f'(a), f2 = f''(a).
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
    return {f0,
            {f1 * a.d[0], f1 * a.d[1]},
            {f2 * a.d[0] * a.d[0] + f1 * a.h[0],
             f2 * a.d[0] * a.d[1] + f1 * a.h[1],
             f2 * a.d[1] * a.d[1] + f1 * a.h[2]}};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}
inline Jet2 operator/(const Jet2& a, double s) { return (1.0 / s) * a; }
inline Jet2 operator/(double s, const Jet2& b) {
    const double inv = 1.0 / b.v;
    return s * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

// ---- scalar promotion helpers used by templated evaluators -----------------

inline double value_of(double x) { return x; }
inline double value_of(const Jet1& x) { return x.v; }
inline double value_of(const Jet2& x) { return x.v; }

inline double apply_chain(double, double f0, double, double) { return f0; }
inline Jet1 apply_chain(const Jet1& a, double f0, double f1, double) { return chain(a, f0, f1); }
inline Jet2 apply_chain(const Jet2& a, double f0, double f1, double f2) {
    return chain(a, f0, f1, f2);
}

template <class T>
T make_constant(double c);
template <>
inline double make_constant<double>(double c) { return c; }
template <>
inline Jet1 make_constant<Jet1>(double c) { return Jet1::constant(c); }
template <>
inline Jet2 make_constant<Jet2>(double c) { return Jet2::constant(c); }

template <class T>
T make_variable(double x, int index);
template <>
inline double make_variable<double>(double x, int) { return x; }
template <>
inline Jet1 make_variable<Jet1>(double x, int index) { return Jet1::variable(x, index); }
template <>
inline Jet2 make_variable<Jet2>(double x, int index) { return Jet2::variable(x, index); }

}  // namespace lensrig
