#include "lensrig/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "lensrig/errors.hpp"

namespace lensrig {

namespace {

GeodesicState to_state(const OdeVec<4>& y) { return {{y[0], y[1]}, {y[2], y[3]}}; }
OdeVec<4> to_vec(const GeodesicState& s) { return {s.x.x, s.x.y, s.v.x, s.v.y}; }

template <int N>
GeodesicState head(const OdeVec<N>& y) {
    return {{y[0], y[1]}, {y[2], y[3]}};
}

// F(gamma(t)) and its t-derivative at a state.
struct FSample {
    double f;
    double df;
};

FSample f_sample(const Domain& d, const GeodesicState& s) {
    const Jet1 j = d.F_jet1(s.x);
    return {j.v, j.d[0] * s.v.x + j.d[1] * s.v.y};
}

double d2_of(const MetricField& m, const Domain& d, const GeodesicState& s) {
    const Jet2 f = d.F_jet2(s.x);
    const Vec2 acc = -christoffel(m, s.x).contract(s.v, s.v);
    const Vec2 v = s.v;
    return f.h[0] * v.x * v.x + 2.0 * f.h[1] * v.x * v.y + f.h[2] * v.y * v.y + f.d[0] * acc.x +
           f.d[1] * acc.y;
}

// One-step state from a mesh point of an accepted step.
template <int N, class Rhs>
OdeVec<N> restep(const Rhs& f, const DenseStep<N>& step, double t) {
    if (t == step.t0) return step.y0;
    if (t == step.t1()) return step.y1;
    return dopri_step<N>(f, step.y0, t - step.t0);
}

}  // namespace

// ---- Trajectory ------------------------------------------------------------------------

Trajectory::Trajectory(MetricField m, std::vector<DenseStep<4>> steps)
    : metric_(std::move(m)), steps_(std::move(steps)) {
    if (steps_.empty()) throw IntegrationError("empty trajectory");
}

std::vector<double> Trajectory::mesh() const {
    std::vector<double> out;
    out.reserve(steps_.size() + 1);
    out.push_back(steps_.front().t0);
    for (const auto& s : steps_) out.push_back(s.t1());
    return out;
}

const DenseStep<4>& Trajectory::step_at(double t) const {
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double v, const DenseStep<4>& s) { return v < s.t0; });
    if (it == steps_.begin()) return steps_.front();
    return *(it - 1);
}

GeodesicState Trajectory::state(double t) const {
    t = std::clamp(t, 0.0, t_end());
    const auto rhs = geodesic_rhs(metric_);
    return to_state(restep<4>(rhs, step_at(t), t));
}

GeodesicState Trajectory::dense(double t) const {
    t = std::clamp(t, 0.0, t_end());
    return to_state(step_at(t).at(t));
}

double Trajectory::max_speed_drift() const {
    auto drift = [&](const OdeVec<4>& y) {
        const GeodesicState s = to_state(y);
        return std::abs(std::sqrt(metric_.at(s.x).norm_sq(s.v)) - 1.0);
    };
    double out = drift(steps_.front().y0);
    for (const auto& s : steps_) out = std::max(out, drift(s.y1));
    return out;
}

// ---- integration ---------------------------------------------------------------------------

OdeRhs<4> geodesic_rhs(const MetricField& m) {
    return [m](const OdeVec<4>& y, OdeVec<4>& dy) {
        const Vec2 v{y[2], y[3]};
        const Vec2 a = christoffel(m.jet1({y[0], y[1]})).contract(v, v);
        dy = {v.x, v.y, -a.x, -a.y};
    };
}

Trajectory integrate_geodesic(const MetricField& m, const GeodesicState& s0, double t_end,
                              const IntegratorOptions& tol) {
    if (!(t_end > 0.0)) throw IntegrationError("integration time must be positive");
    std::vector<DenseStep<4>> steps;
    const auto rhs = geodesic_rhs(m);
    dopri_integrate<4>(rhs, 0.0, to_vec(s0), t_end, tol.ode(), [&](const DenseStep<4>& s) {
        steps.push_back(s);
        return true;
    });
    return Trajectory(m, std::move(steps));
}

GeodesicState geodesic_endpoint(const MetricField& m, const GeodesicState& s0, double t,
                                const IntegratorOptions& tol) {
    if (t == 0.0) return s0;
    if (t < 0.0) return reversed(geodesic_endpoint(m, reversed(s0), -t, tol));
    OdeVec<4> end = to_vec(s0);
    dopri_integrate<4>(geodesic_rhs(m), 0.0, end, t, tol.ode(), [&](const DenseStep<4>& s) {
        end = s.y1;
        return true;
    });
    return to_state(end);
}

GeodesicState unit_state(const MetricField& m, Vec2 x, Vec2 v) {
    const double n = std::sqrt(m.at(x).norm_sq(v));
    if (!(n > 0.0)) throw GeometryError("zero direction vector");
    return {x, v / n};
}

// ---- contact classification --------------------------------------------------------------------

Contact classify_contact(const MetricField& m, const Domain& d, const GeodesicState& s) {
    Contact c;
    c.d1 = f_sample(d, s).df;
    c.d2 = d2_of(m, d, s);
    if (std::abs(c.d1) > kCrossingThreshold) {
        c.order = 1;
        c.direction = c.d1 > 0.0 ? 1 : -1;
        return c;
    }
    if (std::abs(c.d2) > kCrossingThreshold) {
        c.order = 2;
        c.direction = 0;
        return c;
    }
    // third derivative by central differences of d2 along the flow
    const double h = 1e-4;
    const GeodesicState fwd = geodesic_endpoint(m, s, h);
    const GeodesicState bwd = geodesic_endpoint(m, s, -h);
    const double d3 = (d2_of(m, d, fwd) - d2_of(m, d, bwd)) / (2.0 * h);
    if (std::abs(d3) > 1e-6) {
        c.order = 3;
        c.direction = d3 > 0.0 ? 1 : -1;
    } else {
        c.order = 4;
        c.direction = 0;
    }
    return c;
}

// ---- crossing scan ---------------------------------------------------------------------------

ScanResult scan_crossings(const MetricField& m, const Domain& d, const GeodesicState& s0,
                          double t_end, const IntegratorOptions& tol,
                          const std::function<bool(const Crossing&)>& on_crossing,
                          const Box* bounds) {
    ScanResult result;
    result.state = s0;
    const Box& box = bounds ? *bounds : d.extended_box();

    // Side of the boundary just after t = 0 (true = outside).
    const FSample f0 = f_sample(d, s0);
    bool outside = f0.f > 0.0;
    if (std::abs(f0.f) <= kOnBoundaryTol) {
        const Contact c = classify_contact(m, d, s0);
        if (c.direction != 0)
            outside = c.direction > 0;
        else if (c.order == 2)
            outside = c.d2 > 0.0;
        if (!on_crossing({0.0, s0, c})) {
            result.stopped = true;
            return result;
        }
    }
    if (!box.contains(s0.x)) {
        result.left_box = true;
        return result;
    }

    const auto rhs = geodesic_rhs(m);
    double t_prev = 0.0;
    FSample f_prev = f0;

    auto report_root = [&](const DenseStep<4>& step, double a, double b, bool outside_at_a) {
        // bisection on the continuous extension
        for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
            const double mid = 0.5 * (a + b);
            const bool out_mid = d.F(head<4>(step.at(mid)).x) > 0.0;
            (out_mid == outside_at_a ? a : b) = mid;
        }
        double t = 0.5 * (a + b);
        GeodesicState s = head<4>(restep<4>(rhs, step, t));
        // Newton polish on the exact one-step flow
        for (int it = 0; it < 8; ++it) {
            const FSample fs = f_sample(d, s);
            if (std::abs(fs.f) <= 1e-14 || std::abs(fs.df) < kCrossingThreshold) break;
            const double dt = -fs.f / fs.df;
            t += dt;
            s = head<4>(restep<4>(rhs, step, t));
            if (std::abs(dt) < 1e-16 * std::max(1.0, t)) break;
        }
        return Crossing{t, s, classify_contact(m, d, s)};
    };

    auto on_step = [&](const DenseStep<4>& step) {
        constexpr int kSub = 4;
        for (int i = 1; i <= kSub; ++i) {
            const double t = i == kSub ? step.t1() : step.t0 + step.h * i / kSub;
            const GeodesicState s = head<4>(i == kSub ? step.y1 : step.at(t));
            const FSample fs = f_sample(d, s);
            const bool out_now = fs.f > 0.0;
            std::vector<Crossing> found;
            if (out_now != outside) {
                found.push_back(report_root(step, t_prev, t, outside));
            } else if ((!outside && f_prev.df > 0.0 && fs.df < 0.0) ||
                       (outside && f_prev.df < 0.0 && fs.df > 0.0)) {
                // F has an interior extremum here; look for a hidden pair of crossings.
                double a = t_prev, b = t;
                const bool rising_at_a = f_prev.df > 0.0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (a + b);
                    const bool rising = f_sample(d, head<4>(step.at(mid))).df > 0.0;
                    (rising == rising_at_a ? a : b) = mid;
                }
                const double tm = 0.5 * (a + b);
                const bool out_m = d.F(head<4>(restep<4>(rhs, step, tm)).x) > 0.0;
                if (out_m != outside) {
                    found.push_back(report_root(step, t_prev, tm, outside));
                    found.push_back(report_root(step, tm, t, out_m));
                }
            }
            for (const Crossing& c : found) {
                if (!on_crossing(c)) {
                    result.stopped = true;
                    result.t_reached = c.t;
                    result.state = c.state;
                    return false;
                }
            }
            outside = out_now;
            t_prev = t;
            f_prev = fs;
            result.t_reached = t;
            result.state = s;
            if (!box.contains(s.x)) {
                result.left_box = true;
                return false;
            }
        }
        return true;
    };
    dopri_integrate<4>(rhs, 0.0, to_vec(s0), t_end, tol.ode(), on_step);
    return result;
}

ExitEvent make_exit_event(const MetricField&, const Domain& d, const Crossing& c) {
    const BoundaryLocation loc = d.locate(c.state.x);
    ExitEvent e;
    e.t_exit = c.t;
    e.state_at_exit = c.state;
    e.component = loc.component;
    e.s_exit = loc.s;
    e.contact_order = c.contact.order;
    e.transversality = std::abs(c.contact.d1);
    return e;
}

ExitEvent trace_to_exit(const MetricField& m, const Domain& d, const GeodesicState& s0,
                        const IntegratorOptions& tol) {
    std::optional<Crossing> exit;
    const ScanResult r = scan_crossings(m, d, s0, tol.t_max, tol, [&](const Crossing& c) {
        if (c.contact.direction > 0) {
            exit = c;
            return false;
        }
        if (c.contact.direction == 0) {
            // A tangential start at a concave point continues into M.
            if (c.t == 0.0 && c.contact.order == 2 && c.contact.d2 < 0.0) return true;
            throw GrazingError("geodesic meets the boundary tangentially", c.t, c.contact.order);
        }
        return true;
    });
    if (exit) return make_exit_event(m, d, *exit);
    if (r.left_box) throw IntegrationError("geodesic left the extended domain without an exit");
    throw TrappedError(tol.t_max);
}

ExitEvent repolish_exit(const MetricField& m, const Domain& d, const ExitEvent& e) {
    ExitEvent out = e;
    for (int it = 0; it < 4; ++it) {
        const FSample fs = f_sample(d, out.state_at_exit);
        if (std::abs(fs.f) <= 1e-14 || std::abs(fs.df) < kCrossingThreshold) break;
        const double dt = -fs.f / fs.df;
        out.state_at_exit = geodesic_endpoint(m, out.state_at_exit, dt);
        out.t_exit += dt;
    }
    const BoundaryLocation loc = d.locate(out.state_at_exit.x);
    out.component = loc.component;
    out.s_exit = loc.s;
    out.transversality = std::abs(f_sample(d, out.state_at_exit).df);
    return out;
}

// ---- Jacobi fields --------------------------------------------------------------------------

namespace {

OdeRhs<6> jacobi_rhs(const MetricField& m) {
    return [m](const OdeVec<6>& y, OdeVec<6>& dy) {
        const MetricJet2 j = m.jet2({y[0], y[1]});
        const Vec2 v{y[2], y[3]};
        const Vec2 a = christoffel(MetricJet1{j.g, j.dg}).contract(v, v);
        const double K = gauss_curvature(j);
        dy = {v.x, v.y, -a.x, -a.y, y[5], -K * y[4]};
    };
}

OdeVec<6> jacobi_start(const GeodesicState& s) { return {s.x.x, s.x.y, s.v.x, s.v.y, 0.0, 1.0}; }

}  // namespace

std::vector<double> jacobi_zeros(const MetricField& m, const GeodesicState& s0, double t_end,
                                 const IntegratorOptions& tol) {
    std::vector<double> zeros;
    if (!(t_end > 0.0)) return zeros;
    const auto rhs = jacobi_rhs(m);
    double t_prev = 0.0;
    bool positive = true;  // J'(0) = 1
    dopri_integrate<6>(rhs, 0.0, jacobi_start(s0), t_end, tol.ode(), [&](const DenseStep<6>& step) {
        constexpr int kSub = 4;
        for (int i = 1; i <= kSub; ++i) {
            const double t = i == kSub ? step.t1() : step.t0 + step.h * i / kSub;
            const double j = i == kSub ? step.y1[4] : step.at(t)[4];
            const bool pos = j > 0.0;
            if (pos != positive) {
                double a = t_prev, b = t;
                for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, a); ++it) {
                    const double mid = 0.5 * (a + b);
                    ((step.at(mid)[4] > 0.0) == positive ? a : b) = mid;
                }
                double tz = 0.5 * (a + b);
                for (int it = 0; it < 6; ++it) {
                    const OdeVec<6> y = restep<6>(rhs, step, tz);
                    if (y[5] == 0.0) break;
                    const double dt = -y[4] / y[5];
                    tz += dt;
                    if (std::abs(dt) < 1e-16 * std::max(1.0, tz)) break;
                }
                zeros.push_back(tz);
            }
            positive = pos;
            t_prev = t;
        }
        return true;
    });
    return zeros;
}

std::optional<double> first_conjugate_time(const MetricField& m, const Trajectory& traj,
                                           double t_end, const IntegratorOptions& tol) {
    const auto z = jacobi_zeros(m, traj.state(0.0), t_end, tol);
    if (z.empty()) return std::nullopt;
    return z.front();
}

std::vector<JacobiSample> jacobi_field(const MetricField& m, const GeodesicState& s0,
                                       const std::vector<double>& times,
                                       const IntegratorOptions& tol) {
    std::vector<JacobiSample> out;
    std::size_t next = 0;
    auto emit = [&](double t, const OdeVec<6>& y) {
        out.push_back({t, head<6>(y), y[4], y[5]});
    };
    while (next < times.size() && times[next] <= 0.0) emit(times[next++], jacobi_start(s0));
    if (next == times.size()) return out;
    const auto rhs = jacobi_rhs(m);
    dopri_integrate<6>(rhs, 0.0, jacobi_start(s0), times.back(), tol.ode(),
                       [&](const DenseStep<6>& step) {
                           while (next < times.size() && times[next] <= step.t1()) {
                               emit(times[next], restep<6>(rhs, step, times[next]));
                               ++next;
                           }
                           return true;
                       });
    return out;
}

OdeRhs<8> variational_rhs(const MetricField& m) {
    return [m](const OdeVec<8>& y, OdeVec<8>& dy) {
        const ChristoffelJet cj = christoffel_jet(m.jet2({y[0], y[1]}));
        const Vec2 v{y[2], y[3]}, dx{y[4], y[5]}, dv{y[6], y[7]};
        const Vec2 a = cj.value.contract(v, v);
        const Vec2 da = dx.x * cj.d[0].contract(v, v) + dx.y * cj.d[1].contract(v, v) +
                        2.0 * cj.value.contract(v, dv);
        dy = {v.x, v.y, -a.x, -a.y, dv.x, dv.y, -da.x, -da.y};
    };
}

OdeVec<8> pack_variational(const VariationalState& s) {
    return {s.state.x.x, s.state.x.y, s.state.v.x, s.state.v.y,
            s.dx.x,      s.dx.y,      s.dv.x,      s.dv.y};
}

VariationalState unpack_variational(const OdeVec<8>& y) {
    return {{{y[0], y[1]}, {y[2], y[3]}}, {y[4], y[5]}, {y[6], y[7]}};
}

VariationalState integrate_variational(const MetricField& m, const VariationalState& s0, double t,
                                       const IntegratorOptions& tol) {
    if (t == 0.0) return s0;
    if (t < 0.0) {
        // Reverse time: (x, -v) with variation (dx, -dv).
        const VariationalState r{reversed(s0.state), s0.dx, -s0.dv};
        const VariationalState e = integrate_variational(m, r, -t, tol);
        return {reversed(e.state), e.dx, -e.dv};
    }
    OdeVec<8> y = pack_variational(s0);
    dopri_integrate<8>(variational_rhs(m), 0.0, y, t, tol.ode(), [&](const DenseStep<8>& s) {
        y = s.y1;
        return true;
    });
    return unpack_variational(y);
}

std::vector<VariationalState> variational_samples(const MetricField& m, const VariationalState& s0,
                                                  const std::vector<double>& times,
                                                  const IntegratorOptions& tol) {
    std::vector<VariationalState> out;
    out.reserve(times.size());
    std::size_t next = 0;
    while (next < times.size() && times[next] <= 0.0) {
        out.push_back(s0);
        ++next;
    }
    if (next == times.size()) return out;
    const auto rhs = variational_rhs(m);
    dopri_integrate<8>(rhs, 0.0, pack_variational(s0), times.back(), tol.ode(), [&](const DenseStep<8>& step) {
        while (next < times.size() && times[next] <= step.t1()) {
            out.push_back(unpack_variational(restep<8>(rhs, step, times[next])));
            ++next;
        }
        return true;
    });
    return out;
}

}  // namespace lensrig
