#pragma once

#include <array>
#include <cmath>

namespace lensrig {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    double operator[](int i) const { return i == 0 ? x : y; }
    double& operator[](int i) { return i == 0 ? x : y; }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Symmetric 2x2 matrix (metric components g11, g12, g22).
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double operator()(int i, int j) const {
        return i == 0 ? (j == 0 ? xx : xy) : (j == 0 ? xy : yy);
    }
    double det() const { return xx * yy - xy * xy; }
    Sym2 inverse() const {
        const double d = det();
        return {yy / d, -xy / d, xx / d};
    }
    Vec2 operator*(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    double inner(Vec2 a, Vec2 b) const { return dot(a, (*this) * b); }
    double norm_sq(Vec2 a) const { return inner(a, a); }
};

// General 2x2 matrix, row-major; columns are often tangent vectors.
struct Mat2 {
    double a = 0.0, b = 0.0;  // row 0
    double c = 0.0, d = 0.0;  // row 1

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 from_columns(Vec2 c0, Vec2 c1) { return {c0.x, c1.x, c0.y, c1.y}; }

    Vec2 col(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }
    double det() const { return a * d - b * c; }
    Mat2 inverse() const {
        const double k = 1.0 / det();
        return {d * k, -b * k, -c * k, a * k};
    }
    Mat2 transpose() const { return {a, c, b, d}; }
    Vec2 operator*(Vec2 v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 operator*(const Mat2& m) const {
        return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
    }
};

// Pulls a metric back through a Jacobian: J^T g J.
inline Sym2 pullback(const Sym2& g, const Mat2& jac) {
    const Vec2 c0 = jac.col(0), c1 = jac.col(1);
    return {g.inner(c0, c0), g.inner(c0, c1), g.inner(c1, c1)};
}

}  // namespace lensrig
