#pragma once

#include <vector>

#include "lensrig/geodesic.hpp"

namespace lensrig {

// Boundary normal coordinates: point exp(t nu(s)) on a component.
struct CollarCoords {
    int component = 0;
    double s = 0.0;
    double t = 0.0;
};

struct CollarOptions {
    int frames = 1024;   // cached boundary samples per component
    double step = 0.01;  // bound on the fixed integrator step along normals
};

// Point of exp_nu with its (s, t) Jacobian columns.
struct CollarJet {
    Vec2 point;
    Vec2 d_s;
    Vec2 d_t;

    Mat2 jacobian() const { return Mat2::from_columns(d_s, d_t); }
};

// Two-sided collar |t| <= epsilon around the boundary. Immutable after construction.
//
// Normal geodesics are integrated with a fixed number of steps that depends only on
// epsilon, so exp_nu is a smooth function of (s, t) and Newton inversion reaches
// rounding-level residuals.
class CollarChart {
public:
    CollarChart(MetricField m, Domain d, double epsilon, const CollarOptions& opt = {});

    double epsilon() const { return epsilon_; }
    const MetricField& metric() const { return metric_; }
    const Domain& domain() const { return domain_; }
    int steps() const { return steps_; }

    // |t| <= 2 epsilon is accepted; t < 0 runs outward.
    Vec2 exp_nu(int component, double s, double t) const;
    CollarJet exp_nu_jet(int component, double s, double t) const;

    // Throws OutOfCollarError when the preimage has |t| > epsilon and NoConvergenceError
    // when Newton fails.
    CollarCoords invert(Vec2 p) const;
    // Same, but also returns preimages with epsilon < |t| <= 2 epsilon.
    CollarCoords invert_extended(Vec2 p) const;
    bool contains(Vec2 p) const;

    // Components (g_ss, g_st, g_tt) of the pulled-back metric.
    Sym2 pulled_back_metric(int component, double s, double t) const;

private:
    struct Seed {
        Vec2 point;
        int component;
        double s;
        double t;
    };

    VariationalState start(int component, double s) const;
    const Seed& nearest_seed(Vec2 p) const;
    CollarCoords newton(Vec2 p) const;

    MetricField metric_;
    Domain domain_;
    double epsilon_;
    int steps_;
    std::vector<Seed> seeds_;
    // Uniform bucket grid over the seeds.
    double cell_ = 1.0, x0_ = 0.0, y0_ = 0.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

struct EpsilonChoice {
    double epsilon = 0.0;
    int halvings = 0;
    double min_det = 0.0;         // at the accepted value
    double min_separation = 0.0;  // between non-adjacent normals
    double eta = 0.0;             // separation threshold used
};

// Largest eps0 * 2^-k (k <= 20) whose normal geodesics of length 2 eps are
// non-intersecting with nonsingular Jacobian through SPD metric values.
// Throws DegenerateError after 20 halvings.
EpsilonChoice choose_epsilon(const MetricField& m, const Domain& d, double eps0,
                             const CollarOptions& opt = {});

struct CollarGridRow {
    int component = 0;
    double s = 0.0;
    double t = 0.0;
    Sym2 g;  // (g_ss, g_st, g_tt)
    double det = 0.0;  // of the (s, t) Jacobian
};

// s_i = L i / n_s, t_j = -depth + 2 depth j / (n_t - 1); depth defaults to epsilon.
std::vector<CollarGridRow> collar_metric_grid(const CollarChart& c, int n_s = 512, int n_t = 33,
                                              double depth = 0.0);

struct GaugeReport {
    double max_gtt = 0.0;   // max |g_tt - 1|
    double max_gst = 0.0;   // max |g_st|
    double min_det = 0.0;
    double min_image_separation = 0.0;  // between distinct grid images
    double min_spacing = 0.0;           // between neighbouring grid images
    bool injective = false;
};

GaugeReport gauge_report(const std::vector<CollarGridRow>& grid, const CollarChart& c, int n_s,
                         int n_t);

Vec2 phi0(const CollarChart& c1, const CollarChart& c2, Vec2 p);
// Jacobian of phi0 by the chain rule through both charts.
Mat2 phi0_jacobian(const CollarChart& c1, const CollarChart& c2, Vec2 p);
Vec2 phi0_pushforward(const CollarChart& c1, const CollarChart& c2, Vec2 p, Vec2 w);
// Central differences of phi0.
Vec2 phi0_pushforward_fd(const CollarChart& c1, const CollarChart& c2, Vec2 p, Vec2 w,
                         double h = 1e-6);

struct CollarComparison {
    double depth = 0.0;
    double max_dgss = 0.0;
    CollarCoords argmax;
    double max_gauge = 0.0;      // over both charts
    double max_iso_defect = 0.0;  // |Dphi0^T g2 Dphi0 - g1| on sampled points
    bool pass = false;
};

inline constexpr double kCollarPassTol = 1e-6;

CollarComparison compare_collar_metrics(const CollarChart& c1, const CollarChart& c2,
                                        int n_s = 512, int n_t = 33);

}  // namespace lensrig
