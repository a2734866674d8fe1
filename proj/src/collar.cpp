#include "lensrig/collar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "lensrig/errors.hpp"

namespace lensrig {

namespace {

// Fixed-step march of the variational system; h may be negative.
VariationalState march(const OdeRhs<8>& rhs, const VariationalState& s0, double t, int n) {
    OdeVec<8> y = pack_variational(s0);
    const double h = t / n;
    for (int k = 0; k < n; ++k) y = dopri_step<8>(rhs, y, h);
    return unpack_variational(y);
}

bool spd_finite(const Sym2& g) {
    return std::isfinite(g.xx) && std::isfinite(g.xy) && std::isfinite(g.yy) && g.xx > 0.0 &&
           g.det() > 0.0;
}

// Samples of one normal geodesic at t_j = depth (j - half) / half, j = 0..2 half, each
// interval split into q fixed steps.
std::vector<VariationalState> normal_samples(const OdeRhs<8>& rhs, const VariationalState& s0,
                                             double depth, int half, int q) {
    std::vector<VariationalState> out(2 * half + 1);
    out[half] = s0;
    const double h = depth / (half * q);
    for (int dir : {1, -1}) {
        OdeVec<8> y = pack_variational(s0);
        for (int j = 1; j <= half; ++j) {
            for (int k = 0; k < q; ++k) y = dopri_step<8>(rhs, y, dir * h);
            out[half + dir * j] = unpack_variational(y);
        }
    }
    return out;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double l2 = dot(ab, ab);
    double u = l2 > 0.0 ? dot(p - a, ab) / l2 : 0.0;
    u = std::clamp(u, 0.0, 1.0);
    return norm(p - (a + u * ab));
}

double segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
    const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return 0.0;
    return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

std::int64_t cell_key(std::int64_t i, std::int64_t j) { return (i << 32) ^ (j & 0xffffffff); }

struct NormalFan {
    // points[comp][i][j]
    std::vector<std::vector<std::vector<VariationalState>>> normals;
    bool ok = true;
    double min_det = std::numeric_limits<double>::infinity();
};

NormalFan build_fan(const MetricField& m, const Domain& d, int frames, double depth, double step) {
    const int half = 16;
    const int q = std::max(1, static_cast<int>(std::ceil(depth / half / step)));
    const auto rhs = variational_rhs(m);
    NormalFan fan;
    fan.normals.resize(d.component_count());
    for (int c = 0; c < d.component_count() && fan.ok; ++c) {
        auto& row = fan.normals[c];
        row.reserve(frames);
        for (int i = 0; i < frames; ++i) {
            const double s = d.length(c) * i / frames;
            const BoundaryFrameJet fj = boundary_frame_jet(d, m, c, s);
            const VariationalState s0{{fj.frame.point, fj.frame.nu}, fj.dpoint_ds, fj.dnu_ds};
            std::vector<VariationalState> samples;
            try {
                samples = normal_samples(rhs, s0, depth, half, q);
            } catch (const Error&) {
                fan.ok = false;
                break;
            }
            const double det0 = cross(s0.dx, s0.state.v);
            for (const auto& vs : samples) {
                Sym2 g;
                try {
                    g = m.at(vs.state.x);
                } catch (const Error&) {
                    fan.ok = false;
                    break;
                }
                const double det = cross(vs.dx, vs.state.v);
                if (!spd_finite(g) || !std::isfinite(det)) {
                    fan.ok = false;
                    break;
                }
                fan.min_det = std::min(fan.min_det, det0 > 0 ? det : -det);
            }
            if (!fan.ok) break;
            row.push_back(std::move(samples));
        }
    }
    return fan;
}

// Minimum distance between segments of non-adjacent normals; stops early below eta.
double fan_separation(const NormalFan& fan, double eta) {
    struct Seg {
        Vec2 a, b;
        int comp, i;
    };
    std::vector<Seg> segs;
    double longest = 0.0;
    for (int c = 0; c < static_cast<int>(fan.normals.size()); ++c) {
        for (int i = 0; i < static_cast<int>(fan.normals[c].size()); ++i) {
            const auto& n = fan.normals[c][i];
            for (std::size_t j = 0; j + 1 < n.size(); ++j) {
                segs.push_back({n[j].state.x, n[j + 1].state.x, c, i});
                longest = std::max(longest, norm(n[j + 1].state.x - n[j].state.x));
            }
        }
    }
    const double cell = std::max(longest, eta) + eta;
    std::unordered_map<std::int64_t, std::vector<int>> grid;
    for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
        const Seg& sg = segs[k];
        const auto i0 = static_cast<std::int64_t>(std::floor((std::min(sg.a.x, sg.b.x) - eta) / cell));
        const auto i1 = static_cast<std::int64_t>(std::floor((std::max(sg.a.x, sg.b.x) + eta) / cell));
        const auto j0 = static_cast<std::int64_t>(std::floor((std::min(sg.a.y, sg.b.y) - eta) / cell));
        const auto j1 = static_cast<std::int64_t>(std::floor((std::max(sg.a.y, sg.b.y) + eta) / cell));
        for (auto i = i0; i <= i1; ++i)
            for (auto j = j0; j <= j1; ++j) grid[cell_key(i, j)].push_back(k);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [key, ids] : grid) {
        for (std::size_t p = 0; p < ids.size(); ++p) {
            const Seg& s1 = segs[ids[p]];
            const int n1 = static_cast<int>(fan.normals[s1.comp].size());
            for (std::size_t q = p + 1; q < ids.size(); ++q) {
                const Seg& s2 = segs[ids[q]];
                if (s1.comp == s2.comp) {
                    const int gap = std::abs(s1.i - s2.i);
                    if (std::min(gap, n1 - gap) <= 1) continue;
                }
                best = std::min(best, segment_distance(s1.a, s1.b, s2.a, s2.b));
                if (best < eta) return best;
            }
        }
    }
    return best;
}

double fan_min_spacing(const NormalFan& fan) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : fan.normals) {
        const int n = static_cast<int>(row.size());
        for (int i = 0; i < n; ++i) {
            const auto& a = row[i];
            const auto& b = row[(i + 1) % n];
            for (std::size_t j = 0; j < a.size(); ++j)
                best = std::min(best, norm(b[j].state.x - a[j].state.x));
        }
    }
    return best;
}

}  // namespace

CollarChart::CollarChart(MetricField m, Domain d, double epsilon, const CollarOptions& opt)
    : metric_(std::move(m)), domain_(std::move(d)), epsilon_(epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw DomainError("collar epsilon must be positive");
    if (opt.frames < 8) throw DomainError("collar needs at least 8 boundary frames");
    steps_ = std::max(8, static_cast<int>(std::ceil(epsilon / opt.step)));

    const auto rhs = variational_rhs(metric_);
    const int half = steps_;
    for (int c = 0; c < domain_.component_count(); ++c) {
        for (int i = 0; i < opt.frames; ++i) {
            const double s = domain_.length(c) * i / opt.frames;
            const auto samples = normal_samples(rhs, start(c, s), epsilon_, half, 1);
            for (int j = 0; j <= 2 * half; ++j)
                seeds_.push_back({samples[j].state.x, c, s, epsilon_ * (j - half) / half});
        }
    }

    double xmin = seeds_[0].point.x, xmax = xmin, ymin = seeds_[0].point.y, ymax = ymin;
    for (const auto& sd : seeds_) {
        xmin = std::min(xmin, sd.point.x);
        xmax = std::max(xmax, sd.point.x);
        ymin = std::min(ymin, sd.point.y);
        ymax = std::max(ymax, sd.point.y);
    }
    const double area = std::max((xmax - xmin) * (ymax - ymin), 1e-12);
    cell_ = std::sqrt(16.0 * area / static_cast<double>(seeds_.size()));
    x0_ = xmin;
    y0_ = ymin;
    nx_ = static_cast<int>((xmax - xmin) / cell_) + 1;
    ny_ = static_cast<int>((ymax - ymin) / cell_) + 1;
    buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (int k = 0; k < static_cast<int>(seeds_.size()); ++k) {
        const int i = std::min(nx_ - 1, static_cast<int>((seeds_[k].point.x - x0_) / cell_));
        const int j = std::min(ny_ - 1, static_cast<int>((seeds_[k].point.y - y0_) / cell_));
        buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(k);
    }
}

VariationalState CollarChart::start(int component, double s) const {
    const BoundaryFrameJet fj = boundary_frame_jet(domain_, metric_, component, s);
    return {{fj.frame.point, fj.frame.nu}, fj.dpoint_ds, fj.dnu_ds};
}

Vec2 CollarChart::exp_nu(int component, double s, double t) const {
    return exp_nu_jet(component, s, t).point;
}

CollarJet CollarChart::exp_nu_jet(int component, double s, double t) const {
    if (component < 0 || component >= domain_.component_count())
        throw DomainError("collar component out of range");
    if (!(std::abs(t) <= 3.0 * epsilon_)) throw OutOfCollarError("collar depth out of range");
    s = domain_.component(component).wrap_s(s);
    const VariationalState e = march(variational_rhs(metric_), start(component, s), t, steps_);
    return {e.state.x, e.dx, e.state.v};
}

Sym2 CollarChart::pulled_back_metric(int component, double s, double t) const {
    const CollarJet j = exp_nu_jet(component, s, t);
    return pullback(metric_.at(j.point), j.jacobian());
}

const CollarChart::Seed& CollarChart::nearest_seed(Vec2 p) const {
    const Seed* best = nullptr;
    double bd = std::numeric_limits<double>::infinity();
    const double fx = (p.x - x0_) / cell_, fy = (p.y - y0_) / cell_;
    if (fx < 0 || fy < 0 || fx >= nx_ || fy >= ny_) {
        for (const auto& sd : seeds_) {
            const double dd = norm(sd.point - p);
            if (dd < bd) {
                bd = dd;
                best = &sd;
            }
        }
        return *best;
    }
    const int ci = static_cast<int>(fx), cj = static_cast<int>(fy);
    const int rmax = std::max(nx_, ny_);
    for (int r = 0; r <= rmax; ++r) {
        for (int j = cj - r; j <= cj + r; ++j) {
            if (j < 0 || j >= ny_) continue;
            for (int i = ci - r; i <= ci + r; ++i) {
                if (i < 0 || i >= nx_) continue;
                if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
                for (int k : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
                    const double dd = norm(seeds_[k].point - p);
                    if (dd < bd) {
                        bd = dd;
                        best = &seeds_[k];
                    }
                }
            }
        }
        if (best && bd <= r * cell_) break;
    }
    return *best;
}

CollarCoords CollarChart::newton(Vec2 p) const {
    const Seed& seed = nearest_seed(p);
    CollarCoords x{seed.component, seed.s, seed.t};
    const double L = domain_.length(x.component);
    CollarCoords best = x;
    double best_r = std::numeric_limits<double>::infinity();
    double prev = best_r;
    for (int it = 0; it < 50; ++it) {
        const CollarJet j = exp_nu_jet(x.component, x.s, x.t);
        const Vec2 r = j.point - p;
        const double rn = norm(r);
        if (!std::isfinite(rn)) break;
        if (rn < best_r) {
            best = x;
            best_r = rn;
        }
        // Converged: keep polishing only while the residual still halves.
        if (rn == 0.0 || (best_r <= 1e-12 && !(rn < 0.5 * prev))) break;
        prev = rn;
        const Mat2 J = j.jacobian();
        if (!(std::abs(J.det()) > 1e-14)) break;
        Vec2 delta = J.inverse() * r;
        const double lim = 0.5 * epsilon_;
        const double scale = std::max({1.0, std::abs(delta.y) / lim, std::abs(delta.x) / (0.125 * L)});
        delta = (1.0 / scale) * delta;
        x.s = domain_.component(x.component).wrap_s(x.s - delta.x);
        x.t -= delta.y;
        if (std::abs(x.t) > 2.5 * epsilon_) break;
    }
    if (!(best_r <= 1e-12))
        throw NoConvergenceError("collar inversion did not converge (residual " +
                                 std::to_string(best_r) + ")");
    return best;
}

CollarCoords CollarChart::invert_extended(Vec2 p) const {
    const CollarCoords c = newton(p);
    if (std::abs(c.t) > 2.0 * epsilon_) throw OutOfCollarError("point outside the collar");
    return c;
}

CollarCoords CollarChart::invert(Vec2 p) const {
    const CollarCoords c = newton(p);
    if (std::abs(c.t) > epsilon_ * (1.0 + 1e-12))
        throw OutOfCollarError("point at depth " + std::to_string(c.t) + " outside the collar");
    return c;
}

bool CollarChart::contains(Vec2 p) const {
    try {
        invert(p);
        return true;
    } catch (const NoConvergenceError&) {
        return false;
    } catch (const OutOfCollarError&) {
        return false;
    }
}

EpsilonChoice choose_epsilon(const MetricField& m, const Domain& d, double eps0,
                             const CollarOptions& opt) {
    if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw DomainError("eps0 must be positive");
    for (int k = 0; k <= 20; ++k) {
        const double eps = eps0 * std::ldexp(1.0, -k);
        // Test the doubled depth so that eps stays below half the injectivity gap.
        const NormalFan fan = build_fan(m, d, opt.frames, 2.0 * eps, opt.step);
        if (!fan.ok || !(fan.min_det >= 1e-6)) continue;
        const double eta = 0.25 * fan_min_spacing(fan);
        if (!(eta > 0.0)) continue;
        const double sep = fan_separation(fan, eta);
        if (sep < eta) continue;
        return {eps, k, fan.min_det, sep, eta};
    }
    throw DegenerateError("no admissible collar width after 20 halvings of eps0");
}

std::vector<CollarGridRow> collar_metric_grid(const CollarChart& c, int n_s, int n_t,
                                              double depth) {
    if (n_s < 1 || n_t < 3 || n_t % 2 == 0) throw DomainError("collar grid needs odd n_t >= 3");
    if (depth <= 0.0) depth = c.epsilon();
    const int half = (n_t - 1) / 2;
    const double step = depth / c.steps();
    const int q = std::max(1, static_cast<int>(std::ceil(depth / half / step - 1e-9)));
    const auto rhs = variational_rhs(c.metric());
    const Domain& d = c.domain();
    std::vector<CollarGridRow> rows;
    rows.reserve(static_cast<std::size_t>(d.component_count()) * n_s * n_t);
    for (int comp = 0; comp < d.component_count(); ++comp) {
        for (int i = 0; i < n_s; ++i) {
            const double s = d.length(comp) * i / n_s;
            const BoundaryFrameJet fj = boundary_frame_jet(d, c.metric(), comp, s);
            const VariationalState s0{{fj.frame.point, fj.frame.nu}, fj.dpoint_ds, fj.dnu_ds};
            const auto samples = normal_samples(rhs, s0, depth, half, q);
            for (int j = 0; j < n_t; ++j) {
                const auto& vs = samples[j];
                const Mat2 J = Mat2::from_columns(vs.dx, vs.state.v);
                rows.push_back({comp, s, depth * (j - half) / half,
                                pullback(c.metric().at(vs.state.x), J), J.det()});
            }
        }
    }
    return rows;
}

GaugeReport gauge_report(const std::vector<CollarGridRow>& grid, const CollarChart& c, int n_s,
                         int n_t) {
    GaugeReport r;
    r.min_det = std::numeric_limits<double>::infinity();
    std::vector<Vec2> pts;
    pts.reserve(grid.size());
    for (const auto& row : grid) {
        r.max_gtt = std::max(r.max_gtt, std::abs(row.g.yy - 1.0));
        r.max_gst = std::max(r.max_gst, std::abs(row.g.xy));
        r.min_det = std::min(r.min_det, std::abs(row.det));
        pts.push_back(c.exp_nu(row.component, row.s, row.t));
    }
    // Neighbour spacing along s and t within each component block.
    r.min_spacing = std::numeric_limits<double>::infinity();
    const std::size_t block = static_cast<std::size_t>(n_s) * n_t;
    for (std::size_t b = 0; b + block <= pts.size(); b += block) {
        for (int i = 0; i < n_s; ++i) {
            for (int j = 0; j < n_t; ++j) {
                const Vec2 p = pts[b + static_cast<std::size_t>(i) * n_t + j];
                if (j + 1 < n_t)
                    r.min_spacing =
                        std::min(r.min_spacing, norm(pts[b + static_cast<std::size_t>(i) * n_t + j + 1] - p));
                const int i2 = (i + 1) % n_s;
                r.min_spacing =
                    std::min(r.min_spacing, norm(pts[b + static_cast<std::size_t>(i2) * n_t + j] - p));
            }
        }
    }
    const double cell = r.min_spacing;
    std::unordered_map<std::int64_t, std::vector<int>> hash;
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        hash[cell_key(static_cast<std::int64_t>(std::floor(pts[k].x / cell)),
                      static_cast<std::int64_t>(std::floor(pts[k].y / cell)))]
            .push_back(k);
    }
    r.min_image_separation = std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(pts.size()); ++k) {
        const auto ci = static_cast<std::int64_t>(std::floor(pts[k].x / cell));
        const auto cj = static_cast<std::int64_t>(std::floor(pts[k].y / cell));
        for (std::int64_t i = ci - 1; i <= ci + 1; ++i) {
            for (std::int64_t j = cj - 1; j <= cj + 1; ++j) {
                const auto it = hash.find(cell_key(i, j));
                if (it == hash.end()) continue;
                for (int l : it->second)
                    if (l > k)
                        r.min_image_separation =
                            std::min(r.min_image_separation, norm(pts[l] - pts[k]));
            }
        }
    }
    r.injective = r.min_image_separation >= 0.25 * r.min_spacing;
    return r;
}

Vec2 phi0(const CollarChart& c1, const CollarChart& c2, Vec2 p) {
    const CollarCoords x = c1.invert(p);
    return c2.exp_nu(x.component, x.s, x.t);
}

Mat2 phi0_jacobian(const CollarChart& c1, const CollarChart& c2, Vec2 p) {
    const CollarCoords x = c1.invert(p);
    const Mat2 j1 = c1.exp_nu_jet(x.component, x.s, x.t).jacobian();
    const Mat2 j2 = c2.exp_nu_jet(x.component, x.s, x.t).jacobian();
    return j2 * j1.inverse();
}

Vec2 phi0_pushforward(const CollarChart& c1, const CollarChart& c2, Vec2 p, Vec2 w) {
    return phi0_jacobian(c1, c2, p) * w;
}

Vec2 phi0_pushforward_fd(const CollarChart& c1, const CollarChart& c2, Vec2 p, Vec2 w,
                         double h) {
    auto f = [&](Vec2 q) {
        const CollarCoords x = c1.invert_extended(q);
        return c2.exp_nu(x.component, x.s, x.t);
    };
    return (0.5 / h) * (f(p + h * w) - f(p - h * w));
}

CollarComparison compare_collar_metrics(const CollarChart& c1, const CollarChart& c2, int n_s,
                                        int n_t) {
    if (c1.domain().hash() != c2.domain().hash())
        throw GeometryError("collar charts are built on different domains");
    CollarComparison r;
    r.depth = std::min(c1.epsilon(), c2.epsilon());
    const auto g1 = collar_metric_grid(c1, n_s, n_t, r.depth);
    const auto g2 = collar_metric_grid(c2, n_s, n_t, r.depth);
    for (std::size_t k = 0; k < g1.size(); ++k) {
        const double dg = std::abs(g1[k].g.xx - g2[k].g.xx);
        if (dg > r.max_dgss || k == 0) {
            r.max_dgss = std::max(r.max_dgss, dg);
            r.argmax = {g1[k].component, g1[k].s, g1[k].t};
        }
        for (const auto* row : {&g1[k], &g2[k]})
            r.max_gauge = std::max({r.max_gauge, std::abs(row->g.yy - 1.0), std::abs(row->g.xy)});
    }
    // Isometry defect of phi0 on a coarse subset of the grid, interior depths only.
    const int ds = std::max(1, n_s / 16), dt = std::max(1, (n_t - 1) / 8);
    for (std::size_t k = 0; k < g1.size(); ++k) {
        const int i = static_cast<int>((k / n_t) % n_s), j = static_cast<int>(k % n_t);
        if (i % ds != 0 || j % dt != 0 || j == 0 || j == n_t - 1) continue;
        const Vec2 p = c1.exp_nu(g1[k].component, g1[k].s, g1[k].t);
        try {
            const Vec2 q = phi0(c1, c2, p);
            const Mat2 D = Mat2::from_columns(phi0_pushforward_fd(c1, c2, p, {1.0, 0.0}),
                                              phi0_pushforward_fd(c1, c2, p, {0.0, 1.0}));
            const Sym2 a = pullback(c2.metric().at(q), D), b = c1.metric().at(p);
            r.max_iso_defect = std::max(
                {r.max_iso_defect, std::abs(a.xx - b.xx), std::abs(a.xy - b.xy), std::abs(a.yy - b.yy)});
        } catch (const Error&) {
            r.max_iso_defect = std::numeric_limits<double>::infinity();
        }
    }
    r.pass = r.max_dgss <= kCollarPassTol;
    return r;
}

}  // namespace lensrig
