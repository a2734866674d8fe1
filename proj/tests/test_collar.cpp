#include <cmath>
#include <random>

#include "doctest.h"
#include "lensrig/collar.hpp"
#include "lensrig/errors.hpp"

using namespace lensrig;

namespace {

const char* const kPresets[] = {"euclidean_disk", "poincare_disk", "sphere_cap",
                                "conformal_bump", "cassini_peanut", "euclidean_annulus"};

Vec2 twist(Vec2 p, double a) {
    const double th = a * (1.0 - p.x * p.x - p.y * p.y);
    return {std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y};
}

}  // namespace

TEST_CASE("epsilon selection") {
    const Preset disk = make_preset("euclidean_disk");
    const EpsilonChoice a = choose_epsilon(disk.metric, disk.domain, 0.3);
    CHECK(a.epsilon == 0.3);
    CHECK(a.halvings == 0);
    const EpsilonChoice b = choose_epsilon(disk.metric, disk.domain, 1.5);
    CHECK(b.epsilon < 1.0);
    CHECK(b.halvings >= 1);

    // Opposite sides of the waist are 2 * 0.3202 apart.
    const Preset cas = make_preset("cassini_peanut");
    const EpsilonChoice c = choose_epsilon(cas.metric, cas.domain, 0.3);
    const double waist = std::sqrt(-1.0 + std::sqrt(1.0 + std::pow(1.05, 4) - 1.0));
    CHECK(c.epsilon <= 0.5 * waist);
    const CollarChart chart(cas.metric, cas.domain, c.epsilon);
    const auto grid = collar_metric_grid(chart, 128, 9);
    CHECK(gauge_report(grid, chart, 128, 9).injective);

    // Two circles 0.6 apart.
    const Preset ann = make_preset("euclidean_annulus");
    CHECK(choose_epsilon(ann.metric, ann.domain, 0.3).epsilon < 0.15);

    CHECK_THROWS_AS(choose_epsilon(disk.metric, disk.domain, -1.0), DomainError);
}

TEST_CASE("euclidean disk normal coordinates") {
    const Preset disk = make_preset("euclidean_disk");
    const CollarChart chart(disk.metric, disk.domain, 0.3);
    const Vec2 p = chart.exp_nu(0, 0.0, 0.1);
    CHECK(p.x == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(std::abs(p.y) < 1e-14);
    const Vec2 b = chart.exp_nu(0, 1.0, 0.0);
    CHECK(norm(b - disk.domain.point(0, 1.0)) < 1e-15);
    for (double s : {0.3, 2.0, 5.5}) {
        for (double t : {-0.3, -0.1, 0.0, 0.2, 0.3}) {
            const Vec2 q = chart.exp_nu(0, s, t);
            CHECK(norm(q - (1.0 - t) * Vec2{std::cos(s), std::sin(s)}) < 1e-12);
            const Sym2 g = chart.pulled_back_metric(0, s, t);
            CHECK(std::abs(g.xx - (1.0 - t) * (1.0 - t)) < 1e-10);
            CHECK(std::abs(g.xy) < 1e-10);
            CHECK(std::abs(g.yy - 1.0) < 1e-10);
        }
    }
    const CollarCoords c = chart.invert({0.9, 0.0});
    CHECK(c.component == 0);
    CHECK(std::abs(c.s) < 1e-12);
    CHECK(c.t == doctest::Approx(0.1).epsilon(1e-12));
    CHECK_THROWS_AS(chart.invert({0.55, 0.0}), OutOfCollarError);
    CHECK_FALSE(chart.contains({0.55, 0.0}));
    CHECK(chart.contains({0.0, 1.2}));
}

TEST_CASE("poincare normal geodesic is radial") {
    const Preset hyp = make_preset("poincare_disk", {{"R", 0.5}});
    const CollarChart chart(hyp.metric, hyp.domain, 0.3);
    for (double t : {-0.3, -0.1, 0.15, 0.3}) {
        const Vec2 p = chart.exp_nu(0, 0.0, t);
        CHECK(std::abs(p.y) < 1e-13);
        // hyperbolic distance from the centre is 2 artanh(r)
        CHECK(2.0 * std::atanh(0.5) - 2.0 * std::atanh(p.x) == doctest::Approx(t).epsilon(1e-10));
    }
}

TEST_CASE("inversion round trip on every preset") {
    std::mt19937_64 rng(11);
    for (const char* name : kPresets) {
        CAPTURE(name);
        const Preset p = make_preset(name);
        const double eps = choose_epsilon(p.metric, p.domain, 0.3).epsilon;
        const CollarChart chart(p.metric, p.domain, eps);
        std::uniform_real_distribution<double> uu(0.0, 1.0), ut(-1.0, 1.0);
        std::uniform_int_distribution<int> uc(0, p.domain.component_count() - 1);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const int comp = uc(rng);
            const double s = uu(rng) * p.domain.length(comp);
            const double t = 0.999 * eps * ut(rng);
            const Vec2 x = chart.exp_nu(comp, s, t);
            const CollarCoords c = chart.invert(x);
            CHECK(c.component == comp);
            worst = std::max({worst, p.domain.arclength_distance(comp, c.s, s), std::abs(c.t - t)});
            worst = std::max(worst, norm(chart.exp_nu(c.component, c.s, c.t) - x));
        }
        CHECK(worst < 1e-10);
        if (std::string(name) != "euclidean_annulus") {
            const Vec2 q = chart.exp_nu(0, 1.3, -std::min(0.07, eps));
            const CollarCoords c = chart.invert(q);
            CHECK(c.s == doctest::Approx(1.3).epsilon(1e-10));
        }
    }
}

TEST_CASE("gauge property on every preset") {
    for (const char* name : kPresets) {
        CAPTURE(name);
        const Preset p = make_preset(name);
        const double eps = choose_epsilon(p.metric, p.domain, 0.3).epsilon;
        const CollarChart chart(p.metric, p.domain, eps);
        const auto grid = collar_metric_grid(chart, 128, 33);
        const GaugeReport r = gauge_report(grid, chart, 128, 33);
        CHECK(r.max_gtt <= 1e-8);
        CHECK(r.max_gst <= 1e-8);
        CHECK(r.injective);
        // At t = 0, g_ss is the squared g-length of the Euclidean unit tangent.
        for (const auto& row : grid) {
            if (row.t != 0.0) continue;
            const auto d = p.domain.component(row.component).derivatives(
                p.domain.component(row.component).u_of_s(row.s));
            const Vec2 tan = (1.0 / norm(d[1])) * d[1];
            CHECK(row.g.xx == doctest::Approx(p.metric.at(p.domain.point(row.component, row.s)).norm_sq(tan))
                                  .epsilon(1e-10));
        }
    }
}

TEST_CASE("phi0 between twisted charts") {
    const Preset disk = make_preset("euclidean_disk");
    const double a = 0.2;
    const MetricField g2 = twist_pullback(disk.metric, a);
    const CollarChart c1(disk.metric, disk.domain, 0.3);
    const CollarChart c2(g2, disk.domain, 0.3);
    const CollarChart same(disk.metric, disk.domain, 0.3);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.0, 2.0 * M_PI), ut(-0.3, 0.3);
    double err_id = 0.0, err_twist = 0.0, err_push = 0.0, err_iso = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Vec2 p = c1.exp_nu(0, us(rng), ut(rng));
        err_id = std::max(err_id, norm(phi0(c1, same, p) - p));
        err_twist = std::max(err_twist, norm(phi0(c1, c2, p) - twist(p, a)));
        if (k % 10 == 0) {
            const Mat2 J = phi0_jacobian(c1, c2, p);
            for (Vec2 w : {Vec2{1.0, 0.0}, Vec2{0.3, -0.8}}) {
                err_push = std::max(err_push, norm(J * w - phi0_pushforward_fd(c1, c2, p, w)));
            }
            const Sym2 d = pullback(g2.at(phi0(c1, c2, p)), J);
            const Sym2 g1 = disk.metric.at(p);
            err_iso = std::max({err_iso, std::abs(d.xx - g1.xx), std::abs(d.xy - g1.xy),
                                std::abs(d.yy - g1.yy)});
        }
    }
    CHECK(err_id <= 1e-10);
    CHECK(err_twist <= 1e-8);
    CHECK(err_push <= 1e-6);
    CHECK(err_iso <= 1e-8);
}

TEST_CASE("phi0 pushforward of boundary vectors") {
    // The twist fixes the boundary; boundary frames of g1 map to frames of g2.
    const Preset disk = make_preset("euclidean_disk");
    const MetricField g2 = twist_pullback(disk.metric, 0.2);
    const CollarChart c1(disk.metric, disk.domain, 0.3);
    const CollarChart c2(g2, disk.domain, 0.3);
    for (double s : {0.0, 1.0, 4.0}) {
        for (double c : {-0.5, 0.0, 0.9}) {
            for (int sign : {-1, 1}) {
                const BoundaryFrame f1 = boundary_frame(disk.domain, disk.metric, 0, s);
                const BoundaryFrame f2 = boundary_frame(disk.domain, g2, 0, s);
                const double w = sign * std::sqrt(1.0 - c * c);
                const Vec2 v1 = c * f1.nu + w * f1.tau;
                const Vec2 v2 = c * f2.nu + w * f2.tau;
                CHECK(norm(phi0_pushforward_fd(c1, c2, f1.point, v1) - v2) <= 1e-6);
            }
        }
    }
}

TEST_CASE("collar metric comparison") {
    const Preset p = make_preset("conformal_bump");
    const CollarChart c1(p.metric, p.domain, 0.3);
    const CollarChart same(p.metric, p.domain, 0.3);
    const CollarChart tw(twist_pullback(p.metric, 0.2), p.domain, 0.3);
    const CollarChart pert(make_metric_preset("conformal_bump", {{"a", 0.35}}), p.domain, 0.3);

    const CollarComparison r0 = compare_collar_metrics(c1, same, 64, 17);
    CHECK(r0.max_dgss <= 1e-12);
    CHECK(r0.pass);
    const CollarComparison r1 = compare_collar_metrics(c1, tw, 64, 17);
    CHECK(r1.max_dgss <= 1e-6);
    CHECK(r1.max_iso_defect <= 1e-6);
    CHECK(r1.pass);
    const CollarComparison r2 = compare_collar_metrics(c1, pert, 64, 17);
    CHECK(r2.max_dgss >= 1e-3);
    CHECK_FALSE(r2.pass);
    CHECK(r2.argmax.t != 0.0);

    const Preset other = make_preset("cassini_peanut");
    const CollarChart c3(other.metric, other.domain, 0.1);
    CHECK_THROWS_AS(compare_collar_metrics(c1, c3, 8, 5), GeometryError);
}
