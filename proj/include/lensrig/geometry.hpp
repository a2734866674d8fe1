#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lensrig/expr.hpp"
#include "lensrig/vec.hpp"

namespace lensrig {

struct Box {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;

    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    // Scales the half-extents about the centre by `factor`.
    Box inflated(double factor) const;
};

// Metric value and first derivatives; dg[k] = d/dx^k of the components.
struct MetricJet1 {
    Sym2 g;
    std::array<Sym2, 2> dg;
};

// Adds second derivatives ddg = {xx, xy, yy}.
struct MetricJet2 {
    Sym2 g;
    std::array<Sym2, 2> dg;
    std::array<Sym2, 3> ddg;
};

struct PullbackInfo {
    std::string base_hash;
    std::array<Expr, 2> map;      // chi
    std::array<Expr, 2> inverse;  // chi^{-1}
};

// Closed-form Riemannian metric g11, g12, g22 over (x, y).
class MetricField {
public:
    static MetricField direct(Expr g11, Expr g12, Expr g22);
    // Metric (chi^{-1})^* base, i.e. the metric making chi an isometry from base.
    static MetricField pullback(const MetricField& base, std::array<Expr, 2> map,
                                std::array<Expr, 2> inverse);

    const Expr& component(int index) const { return components_[index]; }
    const PullbackInfo* pullback_info() const { return pullback_ ? &*pullback_ : nullptr; }

    Sym2 at(Vec2 p) const;
    MetricJet1 jet1(Vec2 p) const;
    MetricJet2 jet2(Vec2 p) const;

    // Stable content hash of the component expressions.
    const std::string& hash() const { return hash_; }

    // Throws GeometryError unless g11 > 0 and det g > 0 on an n x n grid over `box`.
    void validate_spd(const Box& box, int n = 64) const;
    // Throws GeometryError unless chi(chi^{-1}(p)) = p to `tol` on `samples` points.
    void validate_pullback(const Box& box, int samples = 256, double tol = 1e-10) const;

private:
    std::array<Expr, 3> components_;
    std::shared_ptr<const CompiledExpr> tape_;
    std::optional<PullbackInfo> pullback_;
    std::string hash_;
};

// Christoffel symbols gamma[k][i][j] = Gamma^k_ij.
struct Christoffel {
    double gamma[2][2][2];

    // Returns Gamma^k_ij v^i w^j.
    Vec2 contract(Vec2 v, Vec2 w) const;
};

// Christoffel symbols with their spatial derivatives d[m] = d/dx^m Gamma.
struct ChristoffelJet {
    Christoffel value;
    std::array<Christoffel, 2> d;
};

Christoffel christoffel(const MetricField& m, Vec2 p);
Christoffel christoffel(const MetricJet1& j);
ChristoffelJet christoffel_jet(const MetricJet2& j);
double gauss_curvature(const MetricField& m, Vec2 p);
double gauss_curvature(const MetricJet2& j);

struct CurveSpec {
    Expr cx;  // in the curve parameter u (variable 0)
    Expr cy;
    double period = 0.0;
};

// Euclidean arclength of one closed boundary curve, tabulated on uniform u.
class BoundaryCurve {
public:
    static constexpr int kTableSize = 4096;

    BoundaryCurve(CurveSpec spec);

    const CurveSpec& spec() const { return spec_; }
    double length() const { return length_; }
    double period() const { return spec_.period; }

    Vec2 point(double u) const;
    // c(u), c'(u), c''(u).
    std::array<Vec2, 3> derivatives(double u) const;

    double s_of_u(double u) const;
    double u_of_s(double s) const;
    double wrap_s(double s) const;

    // Table samples (u_k, s_k, c(u_k)), k < kTableSize.
    const std::vector<double>& table_u() const { return u_; }
    const std::vector<double>& table_s() const { return s_; }
    const std::vector<Vec2>& table_points() const { return pts_; }

    // Parameter u of the curve point closest to p.
    double project(Vec2 p) const;

private:
    double segment_length(double u0, double u1) const;

    CurveSpec spec_;
    std::shared_ptr<const CompiledExpr> tape_;
    std::vector<double> u_, s_;
    std::vector<Vec2> pts_;
    double length_ = 0.0;
};

struct BoundaryLocation {
    int component = 0;
    double s = 0.0;
    double u = 0.0;
    double distance = 0.0;
};

// M = {F < 0} with its boundary curves.
class Domain {
public:
    Domain(Expr inside, std::vector<CurveSpec> curves);

    const Expr& inside_expr() const { return inside_; }
    double F(Vec2 p) const { return tape_->value(p.x, p.y); }
    Jet1 F_jet1(Vec2 p) const { return tape_->jet1(p.x, p.y); }
    Jet2 F_jet2(Vec2 p) const { return tape_->jet2(p.x, p.y); }
    bool contains(Vec2 p) const { return F(p) < 0.0; }

    int component_count() const { return static_cast<int>(curves_.size()); }
    const BoundaryCurve& component(int i) const { return curves_[i]; }
    double length(int i) const { return curves_[i].length(); }

    Vec2 point(int component, double s) const;
    BoundaryLocation locate(Vec2 p) const;

    // Circular arclength distance on one component.
    double arclength_distance(int component, double s1, double s2) const;

    const Box& bounding_box() const { return bbox_; }
    const Box& extended_box() const { return extended_; }
    const std::string& hash() const { return hash_; }

private:
    void validate() const;

    Expr inside_;
    std::shared_ptr<const CompiledExpr> tape_;
    std::vector<BoundaryCurve> curves_;
    Box bbox_, extended_;
    std::string hash_;
};

struct BoundaryFrame {
    Vec2 point;
    Vec2 nu;   // g-unit inward normal
    Vec2 tau;  // g-unit tangent, direction of increasing s
    int component = 0;
    double s = 0.0;
};

// Frame plus its arclength derivatives, for variational integration.
struct BoundaryFrameJet {
    BoundaryFrame frame;
    Vec2 dpoint_ds;
    Vec2 dnu_ds;
};

BoundaryFrame boundary_frame(const Domain& d, const MetricField& m, int component, double s);
BoundaryFrameJet boundary_frame_jet(const Domain& d, const MetricField& m, int component,
                                    double s);

// g-unit vector g-orthogonal to w, positively oriented (det[w, n] > 0).
Vec2 g_normal(const Sym2& g, Vec2 w);

using PresetParams = std::map<std::string, double>;

struct Preset {
    std::string name;
    Domain domain;
    MetricField metric;
};

struct PresetInfo {
    std::string name;
    std::string description;
    PresetParams defaults;
};

std::vector<PresetInfo> preset_catalog();
Preset make_preset(std::string_view name, const PresetParams& params = {});
Domain make_domain_preset(std::string_view name, const PresetParams& params = {});
// Metric presets: euclidean, poincare, sphere, conformal_bump, or any pair name.
MetricField make_metric_preset(std::string_view name, const PresetParams& params = {});

// chi(p) = R(a (1 - |p|^2)) p and its inverse.
std::array<Expr, 2> twist_map(double a);
MetricField twist_pullback(const MetricField& base, double a);

std::string fnv1a_hex(std::string_view text);

}  // namespace lensrig
