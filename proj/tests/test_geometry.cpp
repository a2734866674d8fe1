#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lensrig/errors.hpp"
#include "lensrig/geometry.hpp"

using namespace lensrig;

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 random_in_disk(std::mt19937_64& rng, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    for (;;) {
        Vec2 p{u(rng), u(rng)};
        if (norm(p) < r) return p;
    }
}

}  // namespace

TEST_CASE("christoffel symbols") {
    const MetricField flat = make_metric_preset("euclidean");
    const Christoffel c = christoffel(flat, {0.3, 0.1});
    for (auto& a : c.gamma)
        for (auto& b : a)
            for (double v : b) CHECK(v == 0.0);

    const MetricField hyp = make_metric_preset("poincare");
    const Christoffel h = christoffel(hyp, {0.5, 0.0});
    CHECK(h.gamma[0][0][0] == doctest::Approx(4.0 / 3.0).epsilon(1e-14));

    // conformal g = e^{2 lambda} delta: Gamma^x_xx = l_x, Gamma^x_yy = -l_x, Gamma^x_xy = l_y
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const Vec2 p = random_in_disk(rng, 0.9);
        const Christoffel g = christoffel(hyp, p);
        const double r2 = dot(p, p);
        const double lx = 2 * p.x / (1 - r2), ly = 2 * p.y / (1 - r2);
        CHECK(g.gamma[0][0][0] == doctest::Approx(lx).epsilon(1e-12));
        CHECK(g.gamma[0][1][1] == doctest::Approx(-lx).epsilon(1e-12));
        CHECK(g.gamma[0][0][1] == doctest::Approx(ly).epsilon(1e-12));
        CHECK(g.gamma[1][0][1] == doctest::Approx(lx).epsilon(1e-12));
        for (int k = 0; k < 2; ++k) CHECK(g.gamma[k][0][1] == g.gamma[k][1][0]);
    }
}

TEST_CASE("christoffel matches finite differences of the metric") {
    const MetricField m = twist_pullback(make_metric_preset("conformal_bump"), 0.2);
    std::mt19937_64 rng(2);
    const double h = 1e-5;
    for (int i = 0; i < 20; ++i) {
        const Vec2 p = random_in_disk(rng, 1.0);
        Sym2 dg[2];
        for (int k = 0; k < 2; ++k) {
            const Vec2 e = k == 0 ? Vec2{h, 0} : Vec2{0, h};
            const Sym2 a = m.at(p + e), b = m.at(p - e);
            dg[k] = {(a.xx - b.xx) / (2 * h), (a.xy - b.xy) / (2 * h), (a.yy - b.yy) / (2 * h)};
        }
        const Christoffel fd = christoffel(MetricJet1{m.at(p), {dg[0], dg[1]}});
        const Christoffel ex = christoffel(m, p);
        for (int k = 0; k < 2; ++k)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    CHECK(std::abs(fd.gamma[k][a][b] - ex.gamma[k][a][b]) < 1e-7);
    }
}

TEST_CASE("christoffel jet derivatives match finite differences") {
    const MetricField m = twist_pullback(make_metric_preset("poincare"), 0.2);
    const Vec2 p{0.3, -0.2};
    const ChristoffelJet cj = christoffel_jet(m.jet2(p));
    const double h = 1e-6;
    for (int k = 0; k < 2; ++k) {
        const Vec2 e = k == 0 ? Vec2{h, 0} : Vec2{0, h};
        const Christoffel a = christoffel(m, p + e), b = christoffel(m, p - e);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int l = 0; l < 2; ++l) {
                    const double fd = (a.gamma[i][j][l] - b.gamma[i][j][l]) / (2 * h);
                    CHECK(cj.d[k].gamma[i][j][l] == doctest::Approx(fd).epsilon(1e-6).scale(1));
                }
    }
}

TEST_CASE("gauss curvature of constant-curvature presets") {
    std::mt19937_64 rng(4);
    const MetricField flat = make_metric_preset("euclidean");
    const MetricField sphere = make_metric_preset("sphere");
    const MetricField hyp = make_metric_preset("poincare");
    for (int i = 0; i < 100; ++i) {
        const Vec2 p = random_in_disk(rng, 0.9);
        CHECK(gauss_curvature(flat, p) == 0.0);
        CHECK(std::abs(gauss_curvature(sphere, p) - 1.0) <= 1e-8);
        CHECK(std::abs(gauss_curvature(hyp, p) + 1.0) <= 1e-8);
    }
    // Curvature is an isometry invariant: K of the pullback at chi(p) equals K at p.
    const MetricField base = make_metric_preset("conformal_bump");
    const MetricField twisted = twist_pullback(base, 0.2);
    const auto chi = twist_map(0.2);
    for (int i = 0; i < 20; ++i) {
        const Vec2 p = random_in_disk(rng, 1.0);
        const Vec2 q{chi[0].eval(p.x, p.y), chi[1].eval(p.x, p.y)};
        CHECK(gauss_curvature(twisted, q) == doctest::Approx(gauss_curvature(base, p)).epsilon(1e-9));
    }
}

TEST_CASE("pullback metric and validation") {
    const MetricField base = make_metric_preset("euclidean");
    const MetricField m = twist_pullback(base, 0.2);
    REQUIRE(m.pullback_info() != nullptr);
    CHECK(m.pullback_info()->base_hash == base.hash());
    const Box box{-1.25, 1.25, -1.25, 1.25};
    m.validate_spd(box);
    m.validate_pullback(box);
    // Boundary-fixing: chi = id on |p| = 1 and the metric there is Euclidean in tangential direction.
    const Sym2 g = m.at({0.0, 1.0});
    CHECK(g.xx == doctest::Approx(1.0));

    // A wrong inverse is caught.
    const MetricField bad = MetricField::pullback(base, twist_map(0.2), twist_map(0.1));
    CHECK_THROWS_AS(bad.validate_pullback(box), GeometryError);
    const MetricField indefinite = MetricField::direct(
        Expr::constant(1.0), parse_expression("2*x"), Expr::constant(1.0));
    CHECK_THROWS_AS(indefinite.validate_spd(box), GeometryError);
    const MetricField undefined = MetricField::direct(
        parse_expression("log(x + 1)"), Expr::constant(0.0), Expr::constant(1.0));
    CHECK_THROWS_AS(undefined.validate_spd(box), GeometryError);
}

TEST_CASE("boundary arclength") {
    const Domain disk = make_domain_preset("euclidean_disk");
    CHECK(std::abs(disk.length(0) - 2 * kPi) <= 1e-9);
    const auto& s = disk.component(0).table_s();
    for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k] > s[k - 1]);
    for (double t : {0.0, 0.5, 1.0, 3.0, 6.0}) {
        const Vec2 p = disk.point(0, t);
        CHECK(p.x == doctest::Approx(std::cos(t)).epsilon(1e-12));
        CHECK(p.y == doctest::Approx(std::sin(t)).epsilon(1e-12));
        const BoundaryCurve& c = disk.component(0);
        CHECK(c.s_of_u(c.u_of_s(t)) == doctest::Approx(t).epsilon(1e-13));
    }
    const BoundaryLocation loc = disk.locate({0.0, 1.1});
    CHECK(loc.s == doctest::Approx(kPi / 2).epsilon(1e-12));
    CHECK(loc.distance == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(disk.arclength_distance(0, 0.1, 2 * kPi - 0.1) == doctest::Approx(0.2));
}

TEST_CASE("boundary frames") {
    const Domain disk = make_domain_preset("euclidean_disk");
    const MetricField flat = make_metric_preset("euclidean");
    const BoundaryFrame f0 = boundary_frame(disk, flat, 0, 0.0);
    CHECK(f0.point.x == doctest::Approx(1.0));
    CHECK(f0.nu.x == doctest::Approx(-1.0));
    CHECK(std::abs(f0.nu.y) < 1e-15);
    CHECK(f0.tau.y == doctest::Approx(1.0));
    const BoundaryFrame f1 = boundary_frame(disk, flat, 0, kPi / 2);
    CHECK(f1.point.y == doctest::Approx(1.0));
    CHECK(f1.nu.y == doctest::Approx(-1.0));

    const Preset hyp = make_preset("poincare_disk", {{"R", 0.5}});
    const BoundaryFrame fh = boundary_frame(hyp.domain, hyp.metric, 0, 0.0);
    CHECK(fh.point.x == doctest::Approx(0.5));
    CHECK(fh.nu.x == doctest::Approx(-3.0 / 8.0).epsilon(1e-14));

    for (const char* name : {"euclidean_disk", "poincare_disk", "sphere_cap", "conformal_bump",
                             "cassini_peanut", "euclidean_annulus"}) {
        const Preset p = make_preset(name);
        for (int c = 0; c < p.domain.component_count(); ++c) {
            for (int k = 0; k < 512; ++k) {
                const double s = p.domain.length(c) * k / 512.0;
                const BoundaryFrame f = boundary_frame(p.domain, p.metric, c, s);
                const Sym2 g = p.metric.at(f.point);
                CHECK(std::abs(g.norm_sq(f.nu) - 1.0) <= 1e-12);
                CHECK(std::abs(g.norm_sq(f.tau) - 1.0) <= 1e-12);
                CHECK(std::abs(g.inner(f.nu, f.tau)) <= 1e-12);
                CHECK(p.domain.F(f.point + 1e-6 * f.nu) < p.domain.F(f.point));
            }
        }
    }
}

TEST_CASE("frame derivative matches finite differences") {
    const Preset p = make_preset("cassini_peanut");
    const MetricField m = twist_pullback(make_metric_preset("conformal_bump"), 0.2);
    for (double s : {0.0, 0.7, 2.1, 4.0}) {
        const BoundaryFrameJet j = boundary_frame_jet(p.domain, m, 0, s);
        const double h = 1e-6;
        const BoundaryFrame a = boundary_frame(p.domain, m, 0, s + h);
        const BoundaryFrame b = boundary_frame(p.domain, m, 0, s - h);
        const Vec2 dnu = (a.nu - b.nu) / (2 * h);
        const Vec2 dp = (a.point - b.point) / (2 * h);
        CHECK(norm(dnu - j.dnu_ds) < 1e-7);
        CHECK(norm(dp - j.dpoint_ds) < 1e-7);
        CHECK(norm(j.dpoint_ds) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("presets") {
    const Preset disk = make_preset("euclidean_disk");
    CHECK(disk.domain.F({0, 0}) == -1.0);
    CHECK(disk.metric.at({0.3, 0.4}).xx == 1.0);

    const Preset ann = make_preset("euclidean_annulus");
    CHECK(ann.domain.component_count() == 2);
    CHECK(ann.domain.contains({0.7, 0.0}));
    CHECK_FALSE(ann.domain.contains({0.1, 0.0}));

    // Cassini waist: signed curvature of the boundary changes sign.
    const Preset cas = make_preset("cassini_peanut", {{"a", 1.05}, {"c", 1.0}});
    int pos = 0, neg = 0;
    const BoundaryCurve& c = cas.domain.component(0);
    for (int k = 0; k < 512; ++k) {
        const auto d = c.derivatives(c.period() * k / 512.0);
        (cross(d[1], d[2]) > 0 ? pos : neg)++;
    }
    CHECK(pos > 0);
    CHECK(neg > 0);

    CHECK_THROWS_AS(make_preset("cassini_peanut", {{"a", 0.9}}), GeometryError);
    CHECK_THROWS_AS(make_preset("poincare_disk", {{"R", 1.0}}), GeometryError);
    CHECK_THROWS_AS(make_preset("nope"), GeometryError);
    CHECK_THROWS_AS(make_preset("euclidean_disk", {{"R", 1.0}}), GeometryError);
    CHECK(preset_catalog().size() == 6);
}

TEST_CASE("domain validation rejects bad boundaries") {
    const Expr circle = parse_expression("x^2 + y^2 - 1");
    static constexpr std::string_view u[] = {"u", "v"};
    // Boundary curve not on F = 0.
    CHECK_THROWS_AS(Domain(circle, {CurveSpec{parse_expression("2*cos(u)", u),
                                              parse_expression("2*sin(u)", u), 2 * kPi}}),
                    GeometryError);
    // Circle traversed twice: self-overlapping.
    CHECK_THROWS_AS(Domain(circle, {CurveSpec{parse_expression("cos(u)", u),
                                              parse_expression("sin(u)", u), 4 * kPi}}),
                    GeometryError);
}
