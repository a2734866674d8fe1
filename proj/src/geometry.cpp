#include "lensrig/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <unordered_map>

#include "lensrig/errors.hpp"

namespace lensrig {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Expr parse_xy(const std::string& text) { return parse_expression(text); }

Expr parse_u(const std::string& text) {
    static constexpr std::string_view u[] = {"u", "_unused"};
    return parse_expression(text, u);
}

// 6-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGLNodes[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
constexpr double kGLWeights[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                  0.4679139345726910, 0.3607615730481386, 0.1713244923791704};

template <class T>
struct SymT {
    T xx, xy, yy;
};

template <class T>
void christoffel_core(const SymT<T>& g, const SymT<T> dg[2], T out[2][2][2]) {
    const T det = g.xx * g.yy - g.xy * g.xy;
    const T inv[2][2] = {{g.yy / det, -(g.xy / det)}, {-(g.xy / det), g.xx / det}};
    auto comp = [&](const SymT<T>& s, int i, int j) -> const T& {
        return i == 0 ? (j == 0 ? s.xx : s.xy) : (j == 0 ? s.xy : s.yy);
    };
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            // first-kind symbols [ij, l]
            T first[2];
            for (int l = 0; l < 2; ++l)
                first[l] = 0.5 * (comp(dg[i], j, l) + comp(dg[j], i, l) - comp(dg[l], i, j));
            for (int k = 0; k < 2; ++k) {
                out[k][i][j] = inv[k][0] * first[0] + inv[k][1] * first[1];
                out[k][j][i] = out[k][i][j];
            }
        }
    }
}

}  // namespace

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Box Box::inflated(double factor) const {
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double hx = 0.5 * (xmax - xmin) * factor, hy = 0.5 * (ymax - ymin) * factor;
    return {cx - hx, cx + hx, cy - hy, cy + hy};
}

// ---- MetricField ---------------------------------------------------------------

MetricField MetricField::direct(Expr g11, Expr g12, Expr g22) {
    MetricField m;
    m.components_ = {std::move(g11), std::move(g12), std::move(g22)};
    m.tape_ = std::make_shared<const CompiledExpr>(std::span<const Expr>(m.components_));
    m.hash_ = fnv1a_hex(m.components_[0].to_string() + ";" + m.components_[1].to_string() + ";" +
                        m.components_[2].to_string());
    return m;
}

MetricField MetricField::pullback(const MetricField& base, std::array<Expr, 2> map,
                                  std::array<Expr, 2> inverse) {
    // jac[k][i] = d inverse_k / dx^i
    Expr jac[2][2];
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i) jac[k][i] = derivative(inverse[k], i);
    Expr b[2][2];
    b[0][0] = substitute(base.component(0), inverse[0], inverse[1]);
    b[0][1] = b[1][0] = substitute(base.component(1), inverse[0], inverse[1]);
    b[1][1] = substitute(base.component(2), inverse[0], inverse[1]);

    auto entry = [&](int i, int j) {
        Expr sum = Expr::constant(0.0);
        for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) sum = sum + jac[k][i] * b[k][l] * jac[l][j];
        return sum;
    };
    MetricField m = direct(entry(0, 0), entry(0, 1), entry(1, 1));
    m.pullback_ = PullbackInfo{base.hash(), std::move(map), std::move(inverse)};
    return m;
}

Sym2 MetricField::at(Vec2 p) const {
    double out[3];
    tape_->eval<double>(p.x, p.y, out);
    return {out[0], out[1], out[2]};
}

MetricJet1 MetricField::jet1(Vec2 p) const {
    Jet1 out[3];
    tape_->eval<Jet1>(p.x, p.y, out);
    MetricJet1 j;
    j.g = {out[0].v, out[1].v, out[2].v};
    for (int k = 0; k < 2; ++k) j.dg[k] = {out[0].d[k], out[1].d[k], out[2].d[k]};
    return j;
}

MetricJet2 MetricField::jet2(Vec2 p) const {
    Jet2 out[3];
    tape_->eval<Jet2>(p.x, p.y, out);
    MetricJet2 j;
    j.g = {out[0].v, out[1].v, out[2].v};
    for (int k = 0; k < 2; ++k) j.dg[k] = {out[0].d[k], out[1].d[k], out[2].d[k]};
    for (int k = 0; k < 3; ++k) j.ddg[k] = {out[0].h[k], out[1].h[k], out[2].h[k]};
    return j;
}

void MetricField::validate_spd(const Box& box, int n) const {
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const Vec2 p{box.xmin + (box.xmax - box.xmin) * i / (n - 1),
                         box.ymin + (box.ymax - box.ymin) * k / (n - 1)};
            Sym2 g;
            try {
                g = at(p);
            } catch (const DomainError& e) {
                throw GeometryError("metric undefined at (" + num(p.x) + ", " + num(p.y) +
                                    "): " + e.what());
            }
            if (!(g.xx > 0.0) || !(g.det() > 0.0) || !std::isfinite(g.det()))
                throw GeometryError("metric not positive definite at (" + num(p.x) + ", " +
                                    num(p.y) + ")");
        }
    }
}

void MetricField::validate_pullback(const Box& box, int samples, double tol) const {
    if (!pullback_) return;
    const CompiledExpr map(std::span<const Expr>(pullback_->map));
    const CompiledExpr inv(std::span<const Expr>(pullback_->inverse));
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> ux(box.xmin, box.xmax), uy(box.ymin, box.ymax);
    for (int i = 0; i < samples; ++i) {
        const Vec2 p{ux(rng), uy(rng)};
        double q[2], r[2];
        inv.eval<double>(p.x, p.y, q);
        map.eval<double>(q[0], q[1], r);
        if (std::hypot(r[0] - p.x, r[1] - p.y) > tol)
            throw GeometryError("pullback map is not inverse to its stated inverse at (" +
                                num(p.x) + ", " + num(p.y) + ")");
    }
}

// ---- Christoffel symbols and curvature -------------------------------------------------

Vec2 Christoffel::contract(Vec2 v, Vec2 w) const {
    Vec2 r;
    for (int k = 0; k < 2; ++k) {
        double s = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s += gamma[k][i][j] * v[i] * w[j];
        r[k] = s;
    }
    return r;
}

Christoffel christoffel(const MetricJet1& j) {
    if (!(j.g.det() > 0.0)) throw GeometryError("singular metric in Christoffel evaluation");
    const SymT<double> g{j.g.xx, j.g.xy, j.g.yy};
    const SymT<double> dg[2] = {{j.dg[0].xx, j.dg[0].xy, j.dg[0].yy},
                                {j.dg[1].xx, j.dg[1].xy, j.dg[1].yy}};
    Christoffel c;
    christoffel_core(g, dg, c.gamma);
    return c;
}

Christoffel christoffel(const MetricField& m, Vec2 p) { return christoffel(m.jet1(p)); }

ChristoffelJet christoffel_jet(const MetricJet2& j) {
    if (!(j.g.det() > 0.0)) throw GeometryError("singular metric in Christoffel evaluation");
    // Lift components to first-order jets in (x, y).
    auto lift = [](double v, double dx, double dy) { return Jet1{v, {dx, dy}}; };
    const SymT<Jet1> g{lift(j.g.xx, j.dg[0].xx, j.dg[1].xx), lift(j.g.xy, j.dg[0].xy, j.dg[1].xy),
                       lift(j.g.yy, j.dg[0].yy, j.dg[1].yy)};
    // d/dx^k of dg[m] uses ddg indices xx=0, xy=1, yy=2.
    const Sym2& hxx = j.ddg[0];
    const Sym2& hxy = j.ddg[1];
    const Sym2& hyy = j.ddg[2];
    const SymT<Jet1> dg[2] = {
        {lift(j.dg[0].xx, hxx.xx, hxy.xx), lift(j.dg[0].xy, hxx.xy, hxy.xy),
         lift(j.dg[0].yy, hxx.yy, hxy.yy)},
        {lift(j.dg[1].xx, hxy.xx, hyy.xx), lift(j.dg[1].xy, hxy.xy, hyy.xy),
         lift(j.dg[1].yy, hxy.yy, hyy.yy)}};
    Jet1 out[2][2][2];
    christoffel_core(g, dg, out);
    ChristoffelJet cj;
    for (int k = 0; k < 2; ++k)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                cj.value.gamma[k][a][b] = out[k][a][b].v;
                cj.d[0].gamma[k][a][b] = out[k][a][b].d[0];
                cj.d[1].gamma[k][a][b] = out[k][a][b].d[1];
            }
    return cj;
}

double gauss_curvature(const MetricJet2& j) {
    const double E = j.g.xx, F = j.g.xy, G = j.g.yy;
    const double det = E * G - F * F;
    if (!(det > 0.0)) throw GeometryError("singular metric in curvature evaluation");
    const double Eu = j.dg[0].xx, Ev = j.dg[1].xx;
    const double Fu = j.dg[0].xy, Fv = j.dg[1].xy;
    const double Gu = j.dg[0].yy, Gv = j.dg[1].yy;
    const double Evv = j.ddg[2].xx, Fuv = j.ddg[1].xy, Guu = j.ddg[0].yy;

    auto det3 = [](const double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double a[3][3] = {{-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
                            {Fv - 0.5 * Gu, E, F},
                            {0.5 * Gv, F, G}};
    const double b[3][3] = {{0.0, 0.5 * Ev, 0.5 * Gu}, {0.5 * Ev, E, F}, {0.5 * Gu, F, G}};
    return (det3(a) - det3(b)) / (det * det);
}

double gauss_curvature(const MetricField& m, Vec2 p) { return gauss_curvature(m.jet2(p)); }

// ---- BoundaryCurve -------------------------------------------------------------------

BoundaryCurve::BoundaryCurve(CurveSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.period > 0.0)) throw GeometryError("boundary curve period must be positive");
    const Expr outs[2] = {spec_.cx, spec_.cy};
    tape_ = std::make_shared<const CompiledExpr>(std::span<const Expr>(outs));
    u_.resize(kTableSize + 1);
    s_.resize(kTableSize + 1);
    pts_.resize(kTableSize);
    const double du = spec_.period / kTableSize;
    s_[0] = 0.0;
    for (int k = 0; k <= kTableSize; ++k) u_[k] = k * du;
    for (int k = 0; k < kTableSize; ++k) {
        pts_[k] = point(u_[k]);
        const double seg = segment_length(u_[k], u_[k + 1]);
        if (!(seg > 0.0)) throw GeometryError("boundary arclength table is not strictly increasing");
        s_[k + 1] = s_[k] + seg;
    }
    length_ = s_[kTableSize];
}

Vec2 BoundaryCurve::point(double u) const {
    double out[2];
    tape_->eval<double>(u, 0.0, out);
    return {out[0], out[1]};
}

std::array<Vec2, 3> BoundaryCurve::derivatives(double u) const {
    Jet2 out[2];
    tape_->eval<Jet2>(u, 0.0, out);
    return {Vec2{out[0].v, out[1].v}, Vec2{out[0].d[0], out[1].d[0]},
            Vec2{out[0].h[0], out[1].h[0]}};
}

double BoundaryCurve::segment_length(double u0, double u1) const {
    const double mid = 0.5 * (u0 + u1), half = 0.5 * (u1 - u0);
    double sum = 0.0;
    for (int i = 0; i < 6; ++i) {
        Jet1 out[2];
        tape_->eval<Jet1>(mid + half * kGLNodes[i], 0.0, out);
        sum += kGLWeights[i] * std::hypot(out[0].d[0], out[1].d[0]);
    }
    return sum * half;
}

double BoundaryCurve::s_of_u(double u) const {
    const double P = spec_.period;
    double w = std::fmod(u, P);
    if (w < 0.0) w += P;
    const double du = P / kTableSize;
    int k = std::clamp(static_cast<int>(w / du), 0, kTableSize - 1);
    return s_[k] + segment_length(u_[k], w);
}

double BoundaryCurve::wrap_s(double s) const {
    double w = std::fmod(s, length_);
    if (w < 0.0) w += length_;
    if (w >= length_) w = 0.0;
    return w;
}

double BoundaryCurve::u_of_s(double s) const {
    const double w = wrap_s(s);
    auto it = std::upper_bound(s_.begin(), s_.end(), w);
    int k = std::clamp(static_cast<int>(it - s_.begin()) - 1, 0, kTableSize - 1);
    double u = u_[k];
    double target = w - s_[k];
    for (int iter = 0; iter < 30; ++iter) {
        const double f = segment_length(u_[k], u) - target;
        Jet1 out[2];
        tape_->eval<Jet1>(u, 0.0, out);
        const double speed = std::hypot(out[0].d[0], out[1].d[0]);
        const double step = f / speed;
        u -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(u))) break;
    }
    return u;
}

double BoundaryCurve::project(Vec2 p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kTableSize; ++k) {
        const Vec2 d = pts_[k] - p;
        const double dd = dot(d, d);
        if (dd < best_d) {
            best_d = dd;
            best = k;
        }
    }
    double u = u_[best];
    const double du = spec_.period / kTableSize;
    for (int iter = 0; iter < 30; ++iter) {
        const auto [c, c1, c2] = derivatives(u);
        const Vec2 r = c - p;
        const double f = dot(r, c1);
        const double fp = dot(c1, c1) + dot(r, c2);
        if (!(fp > 0.0)) break;
        const double step = std::clamp(f / fp, -du, du);
        u -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(u))) break;
    }
    return u;
}

// ---- Domain --------------------------------------------------------------------------

Domain::Domain(Expr inside, std::vector<CurveSpec> curves) : inside_(std::move(inside)) {
    if (curves.empty()) throw GeometryError("domain needs at least one boundary component");
    tape_ = std::make_shared<const CompiledExpr>(inside_);
    std::string key = inside_.to_string();
    for (auto& c : curves) {
        key += ";" + c.cx.to_string({"u", "_"}) + "," + c.cy.to_string({"u", "_"}) + "," +
               num(c.period);
        curves_.emplace_back(std::move(c));
    }
    hash_ = fnv1a_hex(key);
    bbox_ = {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& c : curves_) {
        for (const Vec2& p : c.table_points()) {
            bbox_.xmin = std::min(bbox_.xmin, p.x);
            bbox_.xmax = std::max(bbox_.xmax, p.x);
            bbox_.ymin = std::min(bbox_.ymin, p.y);
            bbox_.ymax = std::max(bbox_.ymax, p.y);
        }
    }
    extended_ = bbox_.inflated(1.25);
    validate();
}

void Domain::validate() const {
    for (int ci = 0; ci < component_count(); ++ci) {
        const BoundaryCurve& c = curves_[ci];
        for (int k = 0; k < 512; ++k) {
            const Vec2 p = c.point(c.period() * k / 512.0);
            const Jet1 f = F_jet1(p);
            if (std::abs(f.v) > 1e-9)
                throw GeometryError("boundary component " + std::to_string(ci) +
                                    " does not lie on F = 0 (|F| = " + num(std::abs(f.v)) + ")");
            if (std::hypot(f.d[0], f.d[1]) < 1e-12)
                throw GeometryError("boundary is not a regular level set of F");
        }
    }

    // Simplicity: samples far apart in arclength must not come close in the plane.
    struct Sample {
        int comp;
        int index;
        Vec2 p;
    };
    std::vector<Sample> samples;
    double hmax = 0.0;
    for (int ci = 0; ci < component_count(); ++ci) {
        const auto& pts = curves_[ci].table_points();
        for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
            samples.push_back({ci, k, pts[k]});
            hmax = std::max(hmax, norm(pts[(k + 1) % pts.size()] - pts[k]));
        }
    }
    const double cell = std::max(hmax, 1e-12);
    std::unordered_map<long long, std::vector<int>> grid;
    auto key = [&](long long ix, long long iy) { return ix * 73856093LL ^ iy * 19349663LL; };
    for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
        const auto ix = static_cast<long long>(std::floor(samples[i].p.x / cell));
        const auto iy = static_cast<long long>(std::floor(samples[i].p.y / cell));
        grid[key(ix, iy)].push_back(i);
    }
    const int n = BoundaryCurve::kTableSize;
    for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
        const auto ix = static_cast<long long>(std::floor(samples[i].p.x / cell));
        const auto iy = static_cast<long long>(std::floor(samples[i].p.y / cell));
        for (long long dx = -1; dx <= 1; ++dx) {
            for (long long dy = -1; dy <= 1; ++dy) {
                auto it = grid.find(key(ix + dx, iy + dy));
                if (it == grid.end()) continue;
                for (int j : it->second) {
                    if (j <= i) continue;
                    const Sample& a = samples[i];
                    const Sample& b = samples[j];
                    if (a.comp == b.comp) {
                        const int sep = std::abs(a.index - b.index);
                        if (std::min(sep, n - sep) <= 8) continue;
                    }
                    if (norm(a.p - b.p) < 0.5 * hmax)
                        throw GeometryError("boundary curves self-intersect or touch");
                }
            }
        }
    }
}

Vec2 Domain::point(int component, double s) const {
    const BoundaryCurve& c = curves_.at(component);
    return c.point(c.u_of_s(s));
}

BoundaryLocation Domain::locate(Vec2 p) const {
    BoundaryLocation best;
    best.distance = std::numeric_limits<double>::infinity();
    for (int ci = 0; ci < component_count(); ++ci) {
        const double u = curves_[ci].project(p);
        const double d = norm(curves_[ci].point(u) - p);
        if (d < best.distance) best = {ci, curves_[ci].s_of_u(u), u, d};
    }
    return best;
}

double Domain::arclength_distance(int component, double s1, double s2) const {
    const double L = length(component);
    double d = std::fmod(std::abs(s1 - s2), L);
    return std::min(d, L - d);
}

// ---- frames -------------------------------------------------------------------------

Vec2 g_normal(const Sym2& g, Vec2 w) {
    const Vec2 omega{-w.y, w.x};
    const Vec2 n = g.inverse() * omega;
    return n / std::sqrt(dot(omega, n));
}

BoundaryFrameJet boundary_frame_jet(const Domain& d, const MetricField& m, int component,
                                    double s) {
    const BoundaryCurve& curve = d.component(component);
    const double u = curve.u_of_s(s);
    const auto [c, c1, c2] = curve.derivatives(u);
    const double speed = norm(c1);
    if (speed < 1e-12) throw GeometryError("degenerate boundary tangent");
    const double du_ds = 1.0 / speed;
    const Vec2 dp_ds = c1 * du_ds;

    const MetricJet1 mj = m.jet1(c);
    // Everything below is a first-order jet in s (only d[0] is used).
    auto along = [&](double v, const Sym2& dx, const Sym2& dy, int which) {
        auto pick = [which](const Sym2& s) { return which == 0 ? s.xx : which == 1 ? s.xy : s.yy; };
        return Jet1{v, {pick(dx) * dp_ds.x + pick(dy) * dp_ds.y, 0.0}};
    };
    const Jet1 gxx = along(mj.g.xx, mj.dg[0], mj.dg[1], 0);
    const Jet1 gxy = along(mj.g.xy, mj.dg[0], mj.dg[1], 1);
    const Jet1 gyy = along(mj.g.yy, mj.dg[0], mj.dg[1], 2);
    const Jet1 tx{c1.x, {c2.x * du_ds, 0.0}};
    const Jet1 ty{c1.y, {c2.y * du_ds, 0.0}};

    // w = g^{-1} omega with omega = (-ty, tx)
    const Jet1 det = gxx * gyy - gxy * gxy;
    const Jet1 ox = -ty, oy = tx;
    const Jet1 wx = (gyy * ox - gxy * oy) / det;
    const Jet1 wy = (gxx * oy - gxy * ox) / det;
    const Jet1 n2 = ox * wx + oy * wy;
    const double n = std::sqrt(n2.v);
    const Jet1 norm_j = chain(n2, n, 0.5 / n);

    const Jet1 f = d.F_jet1(c);
    const double sigma = (f.d[0] * wx.v + f.d[1] * wy.v) < 0.0 ? 1.0 : -1.0;
    const Jet1 nux = sigma * (wx / norm_j);
    const Jet1 nuy = sigma * (wy / norm_j);

    const double tnorm = std::sqrt(mj.g.norm_sq(c1));
    BoundaryFrameJet out;
    out.frame.point = c;
    out.frame.nu = {nux.v, nuy.v};
    out.frame.tau = c1 / tnorm;
    out.frame.component = component;
    out.frame.s = curve.wrap_s(s);
    out.dpoint_ds = dp_ds;
    out.dnu_ds = {nux.d[0], nuy.d[0]};
    return out;
}

BoundaryFrame boundary_frame(const Domain& d, const MetricField& m, int component, double s) {
    return boundary_frame_jet(d, m, component, s).frame;
}

// ---- presets ---------------------------------------------------------------------------

namespace {

double param(const PresetParams& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void check_keys(std::string_view preset, const PresetParams& p,
                std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok)
            throw GeometryError("preset '" + std::string(preset) + "' has no parameter '" + k + "'");
    }
}

Domain disk_domain(double R) {
    return Domain(parse_xy("x^2 + y^2 - " + num(R * R)),
                  {CurveSpec{parse_u(num(R) + "*cos(u)"), parse_u(num(R) + "*sin(u)"),
                             2.0 * std::numbers::pi}});
}

MetricField conformal(const std::string& factor) {
    Expr f = parse_xy(factor);
    return MetricField::direct(f, Expr::constant(0.0), f);
}

MetricField euclidean() {
    return MetricField::direct(Expr::constant(1.0), Expr::constant(0.0), Expr::constant(1.0));
}

}  // namespace

std::vector<PresetInfo> preset_catalog() {
    return {
        {"euclidean_disk", "unit disk with the flat metric", {}},
        {"poincare_disk", "disk of radius R with the hyperbolic metric 4/(1-r^2)^2 (R < 1)",
         {{"R", 0.5}}},
        {"sphere_cap", "disk of radius R with the round metric 4/(1+r^2)^2", {{"R", 0.5}}},
        {"conformal_bump", "unit disk with metric (1 + a exp(-r^2/w^2)) delta",
         {{"a", 0.2}, {"w", 0.5}}},
        {"cassini_peanut", "Cassini oval (a > c), flat metric, nonconvex waist",
         {{"a", 1.05}, {"c", 1.0}}},
        {"euclidean_annulus", "annulus r_in < r < 1 with the flat metric", {{"r_in", 0.4}}},
    };
}

Domain make_domain_preset(std::string_view name, const PresetParams& params) {
    if (name == "euclidean_disk") {
        check_keys(name, params, {});
        return disk_domain(1.0);
    }
    if (name == "poincare_disk") {
        check_keys(name, params, {"R"});
        const double R = param(params, "R", 0.5);
        if (!(R > 0.0 && R < 1.0)) throw GeometryError("poincare_disk requires 0 < R < 1");
        return disk_domain(R);
    }
    if (name == "sphere_cap") {
        check_keys(name, params, {"R"});
        const double R = param(params, "R", 0.5);
        if (!(R > 0.0)) throw GeometryError("sphere_cap requires R > 0");
        return disk_domain(R);
    }
    if (name == "conformal_bump") {
        check_keys(name, params, {"a", "w"});
        return disk_domain(1.0);
    }
    if (name == "cassini_peanut") {
        check_keys(name, params, {"a", "c"});
        const double a = param(params, "a", 1.05), c = param(params, "c", 1.0);
        if (!(c > 0.0) || !(a > c)) throw GeometryError("cassini_peanut requires a > c > 0");
        const double c2 = c * c, c4 = c2 * c2, k = a * a * a * a - c4;
        const std::string r = "sqrt(" + num(c2) + "*cos(2*u) + sqrt(" + num(c4) +
                              "*cos(2*u)^2 + " + num(k) + "))";
        return Domain(parse_xy("(x^2 + y^2)^2 - " + num(2.0 * c2) + "*(x^2 - y^2) - " + num(k)),
                      {CurveSpec{parse_u(r + "*cos(u)"), parse_u(r + "*sin(u)"),
                                 2.0 * std::numbers::pi}});
    }
    if (name == "euclidean_annulus") {
        check_keys(name, params, {"r_in"});
        const double r = param(params, "r_in", 0.4);
        if (!(r > 0.0 && r < 1.0)) throw GeometryError("euclidean_annulus requires 0 < r_in < 1");
        return Domain(parse_xy("(x^2 + y^2 - 1)*(x^2 + y^2 - " + num(r * r) + ")"),
                      {CurveSpec{parse_u("cos(u)"), parse_u("sin(u)"), 2.0 * std::numbers::pi},
                       CurveSpec{parse_u(num(r) + "*cos(u)"), parse_u(num(r) + "*sin(u)"),
                                 2.0 * std::numbers::pi}});
    }
    throw GeometryError("unknown preset '" + std::string(name) + "'");
}

MetricField make_metric_preset(std::string_view name, const PresetParams& params) {
    if (name == "euclidean" || name == "euclidean_disk" || name == "cassini_peanut" ||
        name == "euclidean_annulus") {
        return euclidean();
    }
    if (name == "poincare" || name == "poincare_disk") return conformal("4/(1 - x^2 - y^2)^2");
    if (name == "sphere" || name == "sphere_cap") return conformal("4/(1 + x^2 + y^2)^2");
    if (name == "conformal_bump") {
        check_keys(name, params, {"a", "w"});
        const double a = param(params, "a", 0.2), w = param(params, "w", 0.5);
        if (!(w > 0.0) || !(a > -1.0)) throw GeometryError("conformal_bump requires w > 0, a > -1");
        return conformal("1 + " + num(a) + "*exp(-(x^2 + y^2)/" + num(w * w) + ")");
    }
    throw GeometryError("unknown metric preset '" + std::string(name) + "'");
}

Preset make_preset(std::string_view name, const PresetParams& params) {
    Domain d = make_domain_preset(name, params);
    MetricField m = make_metric_preset(name, params);
    m.validate_spd(d.extended_box());
    return {std::string(name), std::move(d), std::move(m)};
}

std::array<Expr, 2> twist_map(double a) {
    const std::string angle = "(" + num(a) + "*(1 - x^2 - y^2))";
    return {parse_xy("cos" + angle + "*x - sin" + angle + "*y"),
            parse_xy("sin" + angle + "*x + cos" + angle + "*y")};
}

MetricField twist_pullback(const MetricField& base, double a) {
    return MetricField::pullback(base, twist_map(a), twist_map(-a));
}

}  // namespace lensrig
