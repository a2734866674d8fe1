#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lensrig/geometry.hpp"
#include "lensrig/ode.hpp"

namespace lensrig {

struct GeodesicState {
    Vec2 x;
    Vec2 v;
};

inline GeodesicState reversed(const GeodesicState& s) { return {s.x, -s.v}; }

struct IntegratorOptions {
    double rel = 1e-10;
    double abs = 1e-12;
    double t_max = 100.0;

    OdeOptions ode() const {
        OdeOptions o;
        o.rel = rel;
        o.abs = abs;
        return o;
    }
};

// Dense solution of the geodesic equation over [0, t_end].
class Trajectory {
public:
    Trajectory(MetricField m, std::vector<DenseStep<4>> steps);

    double t_end() const { return steps_.empty() ? 0.0 : steps_.back().t1(); }
    const std::vector<DenseStep<4>>& steps() const { return steps_; }
    std::vector<double> mesh() const;

    // State at t by one exact integrator step from the preceding mesh point.
    GeodesicState state(double t) const;
    // State at t from the continuous extension (cheaper, slightly less accurate).
    GeodesicState dense(double t) const;

    // max | |v|_g - 1 | over the mesh.
    double max_speed_drift() const;

private:
    const DenseStep<4>& step_at(double t) const;

    MetricField metric_;
    std::vector<DenseStep<4>> steps_;
};

// Geodesic right-hand side y = (x, y, vx, vy).
OdeRhs<4> geodesic_rhs(const MetricField& m);

Trajectory integrate_geodesic(const MetricField& m, const GeodesicState& s0, double t_end,
                              const IntegratorOptions& tol = {});

// Endpoint only; avoids storing the step list.
GeodesicState geodesic_endpoint(const MetricField& m, const GeodesicState& s0, double t,
                                const IntegratorOptions& tol = {});

// Normalizes v to g-unit length at x.
GeodesicState unit_state(const MetricField& m, Vec2 x, Vec2 v);

// Contact of a geodesic with {F = 0}.
struct Contact {
    int order = 1;       // 1, 2, 3 or 4 (4 means "at least 4")
    int direction = 0;   // +1 outward, -1 inward, 0 tangential touch (even order)
    double d1 = 0.0;     // d/dt F(gamma)
    double d2 = 0.0;     // d^2/dt^2 F(gamma)
};

Contact classify_contact(const MetricField& m, const Domain& d, const GeodesicState& s);

inline constexpr double kCrossingThreshold = 1e-8;
inline constexpr double kOnBoundaryTol = 1e-10;

struct Crossing {
    double t = 0.0;
    GeodesicState state;
    Contact contact;
};

struct ScanResult {
    double t_reached = 0.0;
    GeodesicState state;
    bool stopped = false;   // callback asked to stop
    bool left_box = false;  // geodesic left the extended box
};

// Follows the geodesic from s0 up to t_end, reporting every meeting with the boundary
// in time order. A start on the boundary is reported at t = 0. Stops when the callback
// returns false or the path leaves `bounds` (default: the domain's extended box).
ScanResult scan_crossings(const MetricField& m, const Domain& d, const GeodesicState& s0,
                          double t_end, const IntegratorOptions& tol,
                          const std::function<bool(const Crossing&)>& on_crossing,
                          const Box* bounds = nullptr);

struct ExitEvent {
    double t_exit = 0.0;
    GeodesicState state_at_exit;
    int component = 0;
    double s_exit = 0.0;
    int contact_order = 1;
    double transversality = 0.0;
};

ExitEvent make_exit_event(const MetricField& m, const Domain& d, const Crossing& c);

// First outward crossing of the boundary. Throws TrappedError, GrazingError.
ExitEvent trace_to_exit(const MetricField& m, const Domain& d, const GeodesicState& s0,
                        const IntegratorOptions& tol = {});

// Newton correction of an exit event in place along its own geodesic.
ExitEvent repolish_exit(const MetricField& m, const Domain& d, const ExitEvent& e);

// Scalar Jacobi field J'' + K J = 0, J(0) = 0, J'(0) = 1 along the geodesic from s0.
// Returns all zeros in (0, t_end].
std::vector<double> jacobi_zeros(const MetricField& m, const GeodesicState& s0, double t_end,
                                 const IntegratorOptions& tol = {});
std::optional<double> first_conjugate_time(const MetricField& m, const Trajectory& traj,
                                           double t_end, const IntegratorOptions& tol = {});

struct JacobiSample {
    double t = 0.0;
    GeodesicState state;
    double J = 0.0;
    double dJ = 0.0;
};

// Scalar Jacobi field sampled at the given increasing times.
std::vector<JacobiSample> jacobi_field(const MetricField& m, const GeodesicState& s0,
                                       const std::vector<double>& times,
                                       const IntegratorOptions& tol = {});

// Geodesic together with a coordinate variation (dx, dv) obeying the linearized flow.
struct VariationalState {
    GeodesicState state;
    Vec2 dx;
    Vec2 dv;
};

// Right-hand side of the 8-dimensional system (x, v, dx, dv).
OdeRhs<8> variational_rhs(const MetricField& m);
OdeVec<8> pack_variational(const VariationalState& s);
VariationalState unpack_variational(const OdeVec<8>& y);

VariationalState integrate_variational(const MetricField& m, const VariationalState& s0,
                                       double t, const IntegratorOptions& tol = {});

// Variational states at increasing non-negative times from a single integration.
std::vector<VariationalState> variational_samples(const MetricField& m, const VariationalState& s0,
                                                  const std::vector<double>& times,
                                                  const IntegratorOptions& tol = {});

}  // namespace lensrig
