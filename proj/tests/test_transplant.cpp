#include <cmath>
#include <random>

#include "doctest.h"
#include "lensrig/errors.hpp"
#include "lensrig/transplant.hpp"

using namespace lensrig;

namespace {

Vec2 chi(Vec2 p, double a) {
    const double th = a * (1.0 - p.x * p.x - p.y * p.y);
    return {std::cos(th) * p.x - std::sin(th) * p.y, std::sin(th) * p.x + std::cos(th) * p.y};
}

const Preset& disk() {
    static const Preset p = make_preset("euclidean_disk");
    return p;
}

const TransplantContext& identity_ctx() {
    static const TransplantContext c(disk().metric, disk().metric, disk().domain, 0.3);
    return c;
}

const TransplantContext& twist_ctx() {
    static const TransplantContext c(disk().metric, twist_pullback(disk().metric, 0.2),
                                     disk().domain, 0.3);
    return c;
}

}  // namespace

TEST_CASE("exit times on the disk") {
    const TransplantContext& ctx = identity_ctx();
    for (double a : {0.0, 1.0, 2.5, 4.0}) {
        const ExitTimes et = exit_times(ctx, {0.0, 0.0}, {std::cos(a), std::sin(a)});
        CHECK(et.T0 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(et.T1 == doctest::Approx(1.3).epsilon(1e-10));
        CHECK_FALSE(et.reentered);
        CHECK_FALSE(et.capped);
    }
    const ExitTimes b = exit_times(ctx, {1.0, 0.0}, {-1.0, 0.0});
    CHECK(b.T0 == 0.0);
    CHECK(b.T1 == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("peanut waist re-entry") {
    const Preset cas = make_preset("cassini_peanut");
    const TransplantContext ctx(cas.metric, cas.metric, cas.domain, 0.15);
    // Backward ray runs along y = 0.325 just above the waist.
    const ExitTimes et = exit_times(ctx, {-0.8, 0.325}, {-1.0, 0.0});
    CHECK(et.reentered);
    CHECK(et.T1 < et.T0 + ctx.epsilon());
    CHECK(et.T1 > et.T0);

    const SegmentPartition sp = segment_partition(ctx, {-1.4, 0.325}, {1.0, 0.0}, 1.6);
    REQUIRE(sp.labels.size() >= 4);
    CHECK(sp.labels[0] == SegmentLabel::Collar);
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(sp.labels[k] == (k % 2 == 0 ? SegmentLabel::Collar : SegmentLabel::Interior));
    for (int order : sp.contact_orders) CHECK(order == 1);
    for (std::size_t k = 0; k + 1 < sp.times.size(); ++k) CHECK(sp.times[k] < sp.times[k + 1]);

    CHECK(norm(phi_tilde(ctx, {-0.8, 0.325}, {-1.0, 0.0}, default_anchor(et, ctx.epsilon())) -
               Vec2{-0.8, 0.325}) < 1e-10);
}

TEST_CASE("segment partitions on the disk") {
    const TransplantContext& ctx = identity_ctx();
    const SegmentPartition chord = segment_partition(ctx, {-1.0, 0.0}, {1.0, 0.0}, 2.0);
    REQUIRE(chord.labels.size() == 1);
    CHECK(chord.labels[0] == SegmentLabel::Interior);

    const SegmentPartition out = segment_partition(ctx, {1.1, 0.0}, {0.0, 1.0}, 0.1);
    REQUIRE(out.labels.size() == 1);
    CHECK(out.labels[0] == SegmentLabel::Collar);

    const SegmentPartition through = segment_partition(ctx, {-1.2, 0.0}, {1.0, 0.0}, 2.4);
    REQUIRE(through.labels.size() == 3);
    CHECK(through.times[1] == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(through.times[2] == doctest::Approx(2.2).epsilon(1e-10));
    CHECK(segment_label_name(through.labels[1]) == "M");
}

TEST_CASE("identity transplant") {
    const TransplantContext& ctx = identity_ctx();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * M_PI);
    const auto xs = interior_samples(ctx.domain(), 100, 8);
    double worst = 0.0;
    for (const Vec2 x : xs) {
        const Vec2 v{std::cos(ua(rng)), std::sin(ua(rng))};
        const Vec2 u = (1.0 / norm(v)) * v;
        try {
            const ExitTimes et = exit_times(ctx, x, u);
            worst = std::max(worst, norm(phi_tilde_detail(ctx, x, u, default_anchor(et, 0.3), et).point - x));
        } catch (const DegenerateError&) {
        }
    }
    CHECK(worst <= 1e-8);

    double worst_point = 0.0;
    for (const Vec2 x : interior_samples(ctx.domain(), 500, 9))
        worst_point = std::max(worst_point, norm(phi_point(ctx, x) - x));
    CHECK(worst_point <= 1e-8);
}

TEST_CASE("twist transplant reproduces the twist") {
    const TransplantContext& ctx = twist_ctx();
    REQUIRE(ctx.lens_match());
    const Vec2 x{0.3, 0.2};
    REQUIRE(ctx.reference(x).has_value());
    CHECK(norm(*ctx.reference(x) - chi(x, 0.2)) < 1e-15);
    for (double a : {0.0, 0.9, 2.0, 3.7, 5.1}) {
        const Vec2 v{std::cos(a), std::sin(a)};
        const ExitTimes et = exit_times(ctx, x, v);
        const Vec2 p = phi_tilde_detail(ctx, x, v, default_anchor(et, 0.3), et).point;
        CHECK(norm(p - chi(x, 0.2)) <= 1e-6);
        // T-independence over the whole interval
        double spread = 0.0;
        for (int k = 1; k < 8; ++k) {
            const double T = et.T0 + (et.T1 - et.T0) * k / 8.0;
            spread = std::max(spread, norm(phi_tilde_detail(ctx, x, v, T, et).point - p));
        }
        CHECK(spread <= 1e-7);
        CHECK_THROWS_AS(phi_tilde_detail(ctx, x, v, et.T0, et), DomainError);
    }

    double worst = 0.0;
    for (const Vec2 p : interior_samples(ctx.domain(), 200, 21))
        worst = std::max(worst, norm(phi_point(ctx, p) - chi(p, 0.2)));
    CHECK(worst <= 1e-5);
}

TEST_CASE("boundary is fixed and the collar branch agrees with phi0") {
    const TransplantContext& ctx = twist_ctx();
    for (double s = 0.0; s < 6.28; s += 0.37) {
        const Vec2 b = ctx.domain().point(0, s);
        CHECK(norm(phi_point(ctx, b) - b) <= 1e-10);
        CHECK(norm(phi_point(ctx.swapped(), b) - b) <= 1e-10);
    }
    // Points of V inside M: the transplant and phi0 must coincide.
    double worst = 0.0;
    for (double s = 0.1; s < 6.28; s += 0.7) {
        const Vec2 x = ctx.chart1().exp_nu(0, s, 0.2);
        const PhiPoint pp = phi_point_detail(ctx, x);
        CHECK(pp.collar);
        const DirectionChoice dc = choose_direction(ctx, x);
        const Vec2 q = phi_tilde_detail(ctx, x, dc.v, default_anchor(dc.times, 0.3), dc.times).point;
        worst = std::max(worst, norm(q - pp.point));
    }
    CHECK(worst <= 1e-8);
    CHECK_THROWS_AS(phi_point(ctx, {0.0, 1.5}), OutOfCollarError);
}

TEST_CASE("transplant verification reports") {
    const auto xs = interior_samples(disk().domain, 12, 77);

    const WellDefinedReport wi = verify_well_defined(identity_ctx(), xs);
    CHECK(wi.pass);
    CHECK(wi.max_t_spread <= 1e-9);
    CHECK(wi.max_v_spread <= 1e-9);

    const WellDefinedReport wt = verify_well_defined(twist_ctx(), xs);
    CHECK(wt.pass);
    CHECK(wt.max_t_spread <= 1e-7);
    CHECK(wt.max_v_spread <= 1e-6);
    for (const auto& row : wt.rows) CHECK(row.directions + row.skipped == 8);

    const InverseReport ii = verify_inverse(identity_ctx(), xs);
    CHECK(ii.max_psi_phi <= 1e-9);
    const InverseReport it = verify_inverse(twist_ctx(), xs);
    CHECK(it.pass);
    CHECK(it.max_phi_psi <= 1e-5);

    const IsometryReport si = verify_isometry(identity_ctx(), xs);
    CHECK(si.max_defect <= 1e-8);
    const IsometryReport st = verify_isometry(twist_ctx(), xs);
    CHECK(st.pass);
    CHECK(st.max_unit_defect <= 1e-4);
    CHECK(st.max_reference_error <= 1e-5);
}

TEST_CASE("lens-mismatched pair is rejected") {
    const Preset bump = make_preset("conformal_bump");
    const MetricField pert = make_metric_preset("conformal_bump", {{"a", 0.35}});
    CHECK_THROWS_AS(TransplantContext(bump.metric, pert, bump.domain, 0.3), LensMismatchError);

    TransplantOptions opt;
    opt.require_lens_match = false;
    const TransplantContext ctx(bump.metric, pert, bump.domain, 0.3, opt);
    CHECK_FALSE(ctx.lens_match());
    CHECK_FALSE(ctx.reference({0.1, 0.1}).has_value());
    const auto xs = interior_samples(bump.domain, 8, 5);
    const WellDefinedReport w = verify_well_defined(ctx, xs);
    const IsometryReport s = verify_isometry(ctx, xs);
    CHECK_FALSE(w.pass);
    CHECK((w.mismatches > 0 || w.max_v_spread > 1e-3 || s.max_defect > 1e-2));
}

TEST_CASE("interior samples") {
    const auto a = interior_samples(disk().domain, 50, 1, 0.1);
    const auto b = interior_samples(disk().domain, 50, 1, 0.1);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(norm(a[i]) < 0.9);
    }
}
