#include "lensrig/transplant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lensrig/errors.hpp"
#include "lensrig/parallel.hpp"

namespace lensrig {

namespace {

double max_pairwise(const std::vector<Vec2>& pts) {
    double best = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, norm(pts[i] - pts[j]));
    return best;
}

Vec2 direction(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Depth of p in normal coordinates, or -inf beyond twice the collar width.
double collar_depth(const CollarChart& c, Vec2 p) {
    try {
        return c.invert_extended(p).t;
    } catch (const NoConvergenceError&) {
    } catch (const OutOfCollarError&) {
    }
    return -std::numeric_limits<double>::infinity();
}

ExitTimes complete_exit_times(const TransplantContext& ctx, const ExitEvent& e) {
    if (e.contact_order != 1) throw DegenerateError("tangential backward exit");
    const MetricField& m = ctx.m1();
    const IntegratorOptions& tol = ctx.options().tol;
    const double eps = ctx.epsilon();
    const double cap = ctx.options().collar_cap * eps;
    const double h = eps / 16.0;

    ExitTimes et;
    et.T0 = e.t_exit;
    et.exit = e;
    GeodesicState state = e.state_at_exit;
    double tau = 0.0;
    while (tau < cap) {
        const double piece = std::min(h, cap - tau);
        double reentry = -1.0;
        const bool first = tau == 0.0;
        const ScanResult r = scan_crossings(
            m, ctx.domain(), state, piece, tol,
            [&](const Crossing& c) {
                if (first && c.t == 0.0) return true;
                reentry = c.t;
                return false;
            },
            &ctx.bounds());
        if (reentry < 0.0 && collar_depth(ctx.chart1(), r.state.x) <= -eps) {
            double lo = 0.0, hi = r.t_reached;
            for (int it = 0; it < 60 && hi - lo > 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                const GeodesicState s = geodesic_endpoint(m, state, mid, tol);
                (collar_depth(ctx.chart1(), s.x) <= -eps ? hi : lo) = mid;
            }
            et.T1 = et.T0 + tau + 0.5 * (lo + hi);
            return et;
        }
        if (reentry >= 0.0) {
            et.T1 = et.T0 + tau + reentry;
            et.reentered = true;
            if (!(et.T1 > et.T0)) throw DegenerateError("backward geodesic re-enters at its exit");
            return et;
        }
        if (r.left_box) throw IntegrationError("backward geodesic left the collar region");
        tau += piece;
        state = r.state;
    }
    et.T1 = et.T0 + cap;
    et.capped = true;
    return et;
}

SegmentPartition partition_with(const MetricField& m, const CollarChart& chart,
                                const TransplantContext& ctx, const GeodesicState& s,
                                double window) {
    SegmentPartition p;
    p.times.push_back(0.0);
    const ScanResult r = scan_crossings(
        m, ctx.domain(), s, window, ctx.options().tol,
        [&](const Crossing& c) {
            if (c.contact.order % 2 == 0)
                throw DegenerateError("tangential boundary contact at t = " + std::to_string(c.t));
            if (c.t > 0.0) {
                p.times.push_back(c.t);
                p.contact_orders.push_back(c.contact.order);
            }
            return true;
        },
        &ctx.bounds());
    if (r.t_reached > p.times.back()) {
        p.times.push_back(r.t_reached);
    } else if (!p.contact_orders.empty()) {
        p.contact_orders.pop_back();
    }
    for (std::size_t k = 0; k + 1 < p.times.size(); ++k) {
        const double mid = 0.5 * (p.times[k] + p.times[k + 1]);
        const Vec2 x = geodesic_endpoint(m, s, mid, ctx.options().tol).x;
        if (ctx.domain().F(x) < 0.0)
            p.labels.push_back(SegmentLabel::Interior);
        else
            p.labels.push_back(chart.contains(x) ? SegmentLabel::Collar : SegmentLabel::Exterior);
    }
    return p;
}

}  // namespace

TransplantContext::TransplantContext(MetricField m1, MetricField m2, Domain d, double epsilon,
                                     const TransplantOptions& opt)
    : opt_(opt) {
    const Box& ext = d.extended_box();
    const Box& bb = d.bounding_box();
    const double pad = 3.0 * epsilon;
    bounds_ = {std::min(ext.xmin, bb.xmin - pad), std::max(ext.xmax, bb.xmax + pad),
               std::min(ext.ymin, bb.ymin - pad), std::max(ext.ymax, bb.ymax + pad)};

    const LensTable table = sample_lens_table(m1, d, opt.smoke_grid, opt.tol);
    smoke_ = compare_lens_tables(table, m2, d, opt.thresholds, opt.tol);
    if (opt.require_lens_match && smoke_.verdict != Verdict::Pass)
        throw LensMismatchError("metrics do not have the same lens data (max discrepancy " +
                                std::to_string(smoke_.max_discrepancy) + ")");

    if (const PullbackInfo* info = m2.pullback_info(); info && info->base_hash == m1.hash()) {
        chi_ = info->map;
        chi_inverse_ = info->inverse;
    } else if (const PullbackInfo* back = m1.pullback_info();
               back && back->base_hash == m2.hash()) {
        chi_ = back->inverse;
        chi_inverse_ = back->map;
    }

    chart1_ = std::make_shared<const CollarChart>(std::move(m1), d, epsilon);
    chart2_ = std::make_shared<const CollarChart>(std::move(m2), std::move(d), epsilon);
}

std::optional<Vec2> TransplantContext::reference(Vec2 p) const {
    if (!chi_) return std::nullopt;
    return Vec2{(*chi_)[0].eval(p.x, p.y), (*chi_)[1].eval(p.x, p.y)};
}

TransplantContext TransplantContext::swapped() const {
    TransplantContext c;
    c.chart1_ = chart2_;
    c.chart2_ = chart1_;
    c.opt_ = opt_;
    c.smoke_ = smoke_;
    c.chi_ = chi_inverse_;
    c.chi_inverse_ = chi_;
    c.bounds_ = bounds_;
    return c;
}

ExitTimes exit_times(const TransplantContext& ctx, Vec2 x, Vec2 v) {
    const GeodesicState back = unit_state(ctx.m1(), x, -v);
    ExitEvent e;
    try {
        e = trace_to_exit(ctx.m1(), ctx.domain(), back, ctx.options().tol);
    } catch (const GrazingError& g) {
        throw DegenerateError(std::string("backward geodesic grazes: ") + g.what());
    }
    return complete_exit_times(ctx, e);
}

double default_anchor(const ExitTimes& et, double epsilon) {
    return et.T0 + std::min(0.5 * epsilon, 0.5 * (et.T1 - et.T0));
}

PhiTilde phi_tilde_detail(const TransplantContext& ctx, Vec2 x, Vec2 v, double T,
                          const ExitTimes& et) {
    if (!(T > et.T0 && T < et.T1))
        throw DomainError("anchor time outside (T0, T1)");
    const IntegratorOptions& tol = ctx.options().tol;
    const GeodesicState back = geodesic_endpoint(ctx.m1(), unit_state(ctx.m1(), x, -v), T, tol);
    PhiTilde out;
    out.footpoint = back.x;
    out.xi = -back.v;

    const CollarCoords cc = ctx.chart1().invert(back.x);
    const CollarJet j1 = ctx.chart1().exp_nu_jet(cc.component, cc.s, cc.t);
    const CollarJet j2 = ctx.chart2().exp_nu_jet(cc.component, cc.s, cc.t);
    const GeodesicState start{j2.point, (j2.jacobian() * j1.jacobian().inverse()) * out.xi};

    // The g2 geodesic must enter M once and stay inside until time T, as its g1
    // counterpart does.
    int entries = 0;
    bool exited = false;
    const double guard = 1e-9 * std::max(1.0, T);
    const ScanResult r = scan_crossings(
        ctx.m2(), ctx.domain(), start, T, tol,
        [&](const Crossing& c) {
            if (c.t >= T - guard) return true;
            if (c.contact.direction < 0 && entries == 0) {
                ++entries;
                out.entry_time = c.t;
                return true;
            }
            exited = true;
            return false;
        },
        &ctx.bounds());
    if (exited || entries != 1 || r.left_box)
        throw LensMismatchError("g2 geodesic leaves M before the anchor time");
    out.point = r.state.x;
    return out;
}

Vec2 phi_tilde(const TransplantContext& ctx, Vec2 x, Vec2 v, double T) {
    return phi_tilde_detail(ctx, x, v, T, exit_times(ctx, x, v)).point;
}

DirectionChoice choose_direction(const TransplantContext& ctx, Vec2 x) {
    for (int n : {16, 64}) {
        int best = -1;
        ExitEvent best_exit;
        Vec2 best_v;
        for (int k = 0; k < n; ++k) {
            const GeodesicState s = unit_state(ctx.m1(), x, direction(2.0 * M_PI * k / n));
            try {
                const ExitEvent e =
                    trace_to_exit(ctx.m1(), ctx.domain(), reversed(s), ctx.options().tol);
                if (e.contact_order != 1) continue;
                if (best < 0 || e.t_exit < best_exit.t_exit) {
                    best = k;
                    best_exit = e;
                    best_v = s.v;
                }
            } catch (const GrazingError&) {
            } catch (const TrappedError&) {
            } catch (const IntegrationError&) {
            }
        }
        if (best >= 0) return {best_v, best, n, complete_exit_times(ctx, best_exit)};
    }
    throw DegenerateError("no transversal backward exit among 64 directions");
}

PhiPoint phi_point_detail(const TransplantContext& ctx, Vec2 x) {
    PhiPoint out;
    try {
        const CollarCoords cc = ctx.chart1().invert(x);
        out.point = ctx.chart2().exp_nu(cc.component, cc.s, cc.t);
        out.collar = true;
        return out;
    } catch (const NoConvergenceError&) {
        if (!ctx.domain().contains(x)) throw;
    } catch (const OutOfCollarError&) {
        if (!ctx.domain().contains(x)) throw;
    }
    const DirectionChoice dc = choose_direction(ctx, x);
    out.point = phi_tilde_detail(ctx, x, dc.v, default_anchor(dc.times, ctx.epsilon()), dc.times).point;
    out.direction = dc;
    return out;
}

Vec2 phi_point(const TransplantContext& ctx, Vec2 x) { return phi_point_detail(ctx, x).point; }

std::string_view segment_label_name(SegmentLabel l) {
    switch (l) {
        case SegmentLabel::Collar: return "U";
        case SegmentLabel::Interior: return "M";
        case SegmentLabel::Exterior: return "outside";
    }
    return "?";
}

SegmentPartition segment_partition(const MetricField& m, const TransplantContext& ctx,
                                   const GeodesicState& s, double window) {
    const CollarChart& chart = m.hash() == ctx.m2().hash() && m.hash() != ctx.m1().hash()
                                   ? ctx.chart2()
                                   : ctx.chart1();
    return partition_with(m, chart, ctx, s, window);
}

SegmentPartition segment_partition(const TransplantContext& ctx, Vec2 x, Vec2 v, double window) {
    return partition_with(ctx.m1(), ctx.chart1(), ctx, unit_state(ctx.m1(), x, v), window);
}

WellDefinedReport verify_well_defined(const TransplantContext& ctx, const std::vector<Vec2>& samples) {
    WellDefinedReport rep;
    rep.rows.resize(samples.size());
    std::vector<int> mismatch(samples.size(), 0);
    parallel_for(samples.size(), [&](std::size_t i) {
        WellDefinedRow& row = rep.rows[i];
        row.x = samples[i];
        try {
            const DirectionChoice dc = choose_direction(ctx, row.x);
            const ExitTimes& et = dc.times;
            std::vector<Vec2> pts;
            for (int k = 0; k < 8; ++k) {
                const double T = et.T0 + (et.T1 - et.T0) * (k + 1) / 9.0;
                pts.push_back(phi_tilde_detail(ctx, row.x, dc.v, T, et).point);
            }
            row.t_spread = max_pairwise(pts);

            pts.clear();
            for (int k = 0; k < 8; ++k) {
                const Vec2 v = unit_state(ctx.m1(), row.x, direction(2.0 * M_PI * k / 8)).v;
                ExitTimes e;
                try {
                    e = exit_times(ctx, row.x, v);
                } catch (const DegenerateError&) {
                    ++row.skipped;
                    continue;
                } catch (const TrappedError&) {
                    ++row.skipped;
                    continue;
                }
                pts.push_back(phi_tilde_detail(ctx, row.x, v, default_anchor(e, ctx.epsilon()), e).point);
            }
            row.directions = static_cast<int>(pts.size());
            row.v_spread = max_pairwise(pts);
        } catch (const LensMismatchError& e) {
            row.error = e.what();
            mismatch[i] = 1;
        } catch (const Error& e) {
            row.error = e.what();
            mismatch[i] = 2;
        }
    });
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& row = rep.rows[i];
        rep.max_t_spread = std::max(rep.max_t_spread, row.t_spread);
        rep.max_v_spread = std::max(rep.max_v_spread, row.v_spread);
        rep.skipped += row.skipped;
        rep.mismatches += mismatch[i] == 1;
        rep.failures += mismatch[i] == 2;
    }
    rep.pass = rep.mismatches == 0 && rep.failures == 0 && rep.max_t_spread <= kTSpreadTol &&
               rep.max_v_spread <= kVSpreadTol;
    return rep;
}

InverseReport verify_inverse(const TransplantContext& ctx, const std::vector<Vec2>& samples) {
    const TransplantContext psi = ctx.swapped();
    InverseReport rep;
    rep.rows.resize(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        InverseRow& row = rep.rows[i];
        row.x = samples[i];
        try {
            row.phi = phi_point(ctx, row.x);
            row.psi_phi = norm(phi_point(psi, row.phi) - row.x);
            row.phi_psi = norm(phi_point(ctx, phi_point(psi, row.x)) - row.x);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    for (const auto& row : rep.rows) {
        if (!row.error.empty()) {
            ++rep.failures;
            continue;
        }
        rep.max_psi_phi = std::max(rep.max_psi_phi, row.psi_phi);
        rep.max_phi_psi = std::max(rep.max_phi_psi, row.phi_psi);
    }
    rep.pass = rep.failures == 0 && rep.max_psi_phi <= kInverseTol && rep.max_phi_psi <= kInverseTol;
    return rep;
}

IsometryReport verify_isometry(const TransplantContext& ctx, const std::vector<Vec2>& samples) {
    IsometryReport rep;
    rep.rows.resize(samples.size());
    const double h = kIsometryStep;
    parallel_for(samples.size(), [&](std::size_t i) {
        IsometryRow& row = rep.rows[i];
        row.x = samples[i];
        try {
            row.phi = phi_point(ctx, row.x);
            row.reference = ctx.reference(row.x);
            const Vec2 dx = (0.5 / h) * (phi_point(ctx, row.x + Vec2{h, 0.0}) -
                                         phi_point(ctx, row.x - Vec2{h, 0.0}));
            const Vec2 dy = (0.5 / h) * (phi_point(ctx, row.x + Vec2{0.0, h}) -
                                         phi_point(ctx, row.x - Vec2{0.0, h}));
            const Mat2 D = Mat2::from_columns(dx, dy);
            const Sym2 g2 = ctx.m2().at(row.phi);
            const Sym2 a = pullback(g2, D), b = ctx.m1().at(row.x);
            row.defect = std::max({std::abs(a.xx - b.xx), std::abs(a.xy - b.xy), std::abs(a.yy - b.yy)});
            for (int k = 0; k < 8; ++k) {
                const Vec2 w = unit_state(ctx.m1(), row.x, direction(2.0 * M_PI * k / 8)).v;
                row.unit_defect =
                    std::max(row.unit_defect, std::abs(std::sqrt(g2.norm_sq(D * w)) - 1.0));
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    for (const auto& row : rep.rows) {
        if (!row.error.empty()) {
            ++rep.failures;
            continue;
        }
        rep.max_defect = std::max(rep.max_defect, row.defect);
        rep.max_unit_defect = std::max(rep.max_unit_defect, row.unit_defect);
        if (row.reference)
            rep.max_reference_error = std::max(rep.max_reference_error, norm(row.phi - *row.reference));
    }
    rep.pass = rep.failures == 0 && rep.max_defect <= kIsometryTol &&
               rep.max_unit_defect <= kIsometryTol;
    return rep;
}

std::vector<Vec2> interior_samples(const Domain& d, int n, std::uint64_t seed, double margin) {
    std::mt19937_64 rng(seed);
    const Box& b = d.bounding_box();
    std::uniform_real_distribution<double> ux(b.xmin, b.xmax), uy(b.ymin, b.ymax);
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(std::max(n, 0)));
    for (long attempt = 0; static_cast<int>(out.size()) < n; ++attempt) {
        if (attempt > 1000L * n + 1000) throw DomainError("could not draw interior samples");
        const Vec2 p{ux(rng), uy(rng)};
        if (!d.contains(p)) continue;
        if (margin > 0.0 && d.locate(p).distance < margin) continue;
        out.push_back(p);
    }
    return out;
}

}  // namespace lensrig
