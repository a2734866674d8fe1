#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lensrig/errors.hpp"

namespace lensrig {

template <int N>
using OdeVec = std::array<double, N>;

struct OdeOptions {
    double rel = 1e-10;
    double abs = 1e-12;
    double h_max = 0.1;
    double h0 = 0.01;
};

// One accepted Dormand-Prince step with its continuous extension.
template <int N>
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    OdeVec<N> y0{}, y1{};
    std::array<OdeVec<N>, 5> r{};

    double t1() const { return t0 + h; }

    OdeVec<N> at(double t) const {
        const double th = (t - t0) / h, th1 = 1.0 - th;
        OdeVec<N> y;
        for (int i = 0; i < N; ++i)
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        return y;
    }
};

namespace dopri {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                        d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                        d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace dopri

// Autonomous right-hand side y' = f(y).
template <int N>
using OdeRhs = std::function<void(const OdeVec<N>&, OdeVec<N>&)>;

// Stages of one step from y with first stage k1 = f(y) supplied.
// Fills y1 (5th order), k[0..6] and, when requested, the embedded error estimate.
template <int N, class Rhs>
void dopri_stages(const Rhs& f, const OdeVec<N>& y, double h, const OdeVec<N>& k1,
                  OdeVec<N>& y1, std::array<OdeVec<N>, 7>& k, OdeVec<N>* err) {
    using namespace dopri;
    k[0] = k1;
    OdeVec<N> tmp;
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k[0][i];
    f(tmp, k[1]);
    for (int i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
    f(tmp, k[2]);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
    f(tmp, k[3]);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
    f(tmp, k[4]);
    for (int i = 0; i < N; ++i)
        tmp[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] +
                             a65 * k[4][i]);
    f(tmp, k[5]);
    for (int i = 0; i < N; ++i)
        y1[i] = y[i] + h * (b1 * k[0][i] + b3 * k[2][i] + b4 * k[3][i] + b5 * k[4][i] +
                            b6 * k[5][i]);
    f(y1, k[6]);
    if (err) {
        for (int i = 0; i < N; ++i)
            (*err)[i] = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] +
                             e6 * k[5][i] + e7 * k[6][i]);
    }
}

// Single fixed step of size h from y; same accuracy as an accepted adaptive step.
template <int N, class Rhs>
OdeVec<N> dopri_step(const Rhs& f, const OdeVec<N>& y, double h) {
    if (h == 0.0) return y;
    OdeVec<N> k1, y1;
    std::array<OdeVec<N>, 7> k;
    f(y, k1);
    dopri_stages<N>(f, y, h, k1, y1, k, nullptr);
    return y1;
}

// Adaptive integration of y' = f(y) from (t0, y0) to t_end (> t0). on_step(const DenseStep&)
// is called after every accepted step; returning false stops the integration.
template <int N, class Rhs, class OnStep>
void dopri_integrate(const Rhs& f, double t0, const OdeVec<N>& y0, double t_end,
                     const OdeOptions& opt, OnStep&& on_step) {
    using namespace dopri;
    if (!(t_end > t0)) return;
    double t = t0;
    OdeVec<N> y = y0, k1, y1, err;
    std::array<OdeVec<N>, 7> k;
    f(y, k1);
    double h = std::min({opt.h0, opt.h_max, t_end - t0});
    bool rejected = false;
    DenseStep<N> step;
    while (t < t_end) {
        bool last = false;
        if (t + h >= t_end || t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }
        dopri_stages<N>(f, y, h, k1, y1, k, &err);
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
            const double sc = opt.abs + opt.rel * std::max(std::abs(y[i]), std::abs(y1[i]));
            const double q = err[i] / sc;
            sum += q * q;
        }
        const double e = std::sqrt(sum / N);
        if (!std::isfinite(e)) {
            h *= 0.25;
            rejected = true;
        } else if (e <= 1.0) {
            step.t0 = t;
            step.h = h;
            step.y0 = y;
            step.y1 = y1;
            for (int i = 0; i < N; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k[0][i] - ydiff;
                step.r[0][i] = y[i];
                step.r[1][i] = ydiff;
                step.r[2][i] = bspl;
                step.r[3][i] = ydiff - h * k[6][i] - bspl;
                step.r[4][i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] +
                                    d6 * k[5][i] + d7 * k[6][i]);
            }
            t = last ? t_end : t + h;
            y = y1;
            k1 = k[6];
            if (!on_step(static_cast<const DenseStep<N>&>(step))) return;
            double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
            if (rejected) factor = std::min(factor, 1.0);
            h = std::min(h * factor, opt.h_max);
            rejected = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(e, -0.2));
            rejected = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError("step size collapsed at t = " + std::to_string(t));
    }
}

}  // namespace lensrig
