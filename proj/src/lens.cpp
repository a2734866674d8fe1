#include "lensrig/lens.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lensrig/errors.hpp"
#include "lensrig/format.hpp"
#include "lensrig/parallel.hpp"

namespace lensrig {

BoundaryVector negate(const BoundaryVector& v) { return {v.component, v.s, -v.c, -v.sign}; }

GeodesicState realize(const Domain& d, const MetricField& m, const BoundaryVector& v) {
    if (!(std::abs(v.c) <= 1.0)) throw GeometryError("boundary vector needs |c| <= 1");
    const BoundaryFrame f = boundary_frame(d, m, v.component, v.s);
    const double t = std::sqrt(std::max(0.0, 1.0 - v.c * v.c));
    return {f.point, v.c * f.nu + (v.sign * t) * f.tau};
}

BoundaryVector boundary_coordinates(const Domain& d, const MetricField& m,
                                    const GeodesicState& s) {
    const BoundaryLocation loc = d.locate(s.x);
    const BoundaryFrame f = boundary_frame(d, m, loc.component, loc.s);
    const Sym2 g = m.at(f.point);
    const double speed = std::sqrt(g.norm_sq(s.v));
    const double cn = g.inner(s.v, f.nu) / speed;
    const double t = g.inner(s.v, f.tau) / speed;
    // Near the normal the tangential part is the accurate one; derive c from it so that
    // sqrt(1 - c^2) reproduces |t| on realization.
    double c = std::abs(cn) > std::abs(t) ? std::copysign(std::sqrt(std::max(0.0, 1.0 - t * t)), cn)
                                          : cn;
    c = std::clamp(c, -1.0, 1.0);
    BoundaryVector out{loc.component, loc.s, c, 0};
    if (std::abs(c) < 1.0) out.sign = t > 0.0 ? 1 : (t < 0.0 ? -1 : 0);
    return out;
}

std::string_view status_name(LensStatus s) {
    switch (s) {
    case LensStatus::Ok: return "ok";
    case LensStatus::Grazing: return "grazing";
    case LensStatus::Trapped: return "trapped";
    case LensStatus::Failed: return "failed";
    }
    return "failed";
}

LensStatus parse_status(std::string_view s) {
    if (s == "ok") return LensStatus::Ok;
    if (s == "grazing") return LensStatus::Grazing;
    if (s == "trapped") return LensStatus::Trapped;
    if (s == "failed") return LensStatus::Failed;
    throw ConfigError("", "unknown lens record status '" + std::string(s) + "'");
}

LensRecord scattering(const MetricField& m, const Domain& d, const BoundaryVector& v_in,
                      const IntegratorOptions& tol, bool count_crossings) {
    if (!(v_in.c > 0.0)) throw GeometryError("scattering needs an inward vector (c > 0)");
    LensRecord rec;
    rec.v_in = v_in;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    rec.v_out = {v_in.component, nan, nan, 0};
    rec.length = nan;
    const GeodesicState s0 = realize(d, m, v_in);

    std::optional<Crossing> exit;
    ScanResult scan;
    try {
        scan = scan_crossings(m, d, s0, tol.t_max, tol, [&](const Crossing& c) {
            if (exit) {
                if (c.contact.direction != 0) ++rec.crossings;
                return count_crossings;
            }
            if (c.t == 0.0) return true;
            if (c.contact.direction == 0)
                throw GrazingError("geodesic meets the boundary tangentially", c.t,
                                   c.contact.order);
            if (c.contact.direction > 0) {
                exit = c;
                return count_crossings;
            }
            return true;
        });
    } catch (const GrazingError& e) {
        rec.status = LensStatus::Grazing;
        rec.message = e.what();
        return rec;
    } catch (const Error& e) {
        if (!exit) {
            rec.status = LensStatus::Failed;
            rec.message = e.what();
            return rec;
        }
        // failure while following the ray outside M only truncates the crossing count
    }
    if (!exit) {
        if (scan.left_box) {
            rec.status = LensStatus::Failed;
            rec.message = "ray left the extended domain without exiting";
        } else {
            rec.status = LensStatus::Trapped;
            rec.message = "no exit before t_max";
        }
        return rec;
    }
    rec.length = exit->t;
    rec.v_out = boundary_coordinates(d, m, exit->state);
    return rec;
}

BoundaryVector grid_vector(const Domain& d, const LensGrid& g, int component, int i, int j) {
    const double theta = -0.5 * std::numbers::pi + std::numbers::pi * (j + 1) / (g.N_c + 1);
    BoundaryVector v;
    v.component = component;
    v.s = d.length(component) * i / g.N_s;
    v.c = std::cos(theta);
    v.sign = theta > 0.0 ? 1 : (theta < 0.0 ? -1 : 0);
    return v;
}

std::size_t LensTable::count(LensStatus s) const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [s](const LensRecord& r) { return r.status == s; }));
}

namespace {

std::vector<BoundaryVector> grid_vectors(const Domain& d, const LensGrid& g) {
    if (g.N_s < 1 || g.N_c < 1) throw ConfigError("", "lens grid must be at least 1 x 1");
    std::vector<BoundaryVector> out;
    for (int c = 0; c < d.component_count(); ++c)
        for (int i = 0; i < g.N_s; ++i)
            for (int j = 0; j < g.N_c; ++j) out.push_back(grid_vector(d, g, c, i, j));
    return out;
}

std::vector<LensRecord> trace_all(const MetricField& m, const Domain& d,
                                  const std::vector<BoundaryVector>& vs,
                                  const IntegratorOptions& tol, bool count_crossings) {
    std::vector<LensRecord> out(vs.size());
    parallel_for(vs.size(), [&](std::size_t i) { out[i] = scattering(m, d, vs[i], tol, count_crossings); });
    return out;
}

}  // namespace

LensTable sample_lens_table(const MetricField& m, const Domain& d, const LensGrid& grid,
                            const IntegratorOptions& tol) {
    LensTable t;
    t.grid = grid;
    t.metric_hash = m.hash();
    t.domain_hash = d.hash();
    t.tol = tol;
    t.records = trace_all(m, d, grid_vectors(d, grid), tol, true);
    if (100 * t.count(LensStatus::Trapped) > t.records.size()) throw TrappedError(tol.t_max);
    return t;
}

std::string_view verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "fail";
}

LensComparison compare_lens_tables(const LensTable& t1, const MetricField& m2, const Domain& d,
                                   const LensThresholds& th, const IntegratorOptions& tol) {
    if (!t1.domain_hash.empty() && t1.domain_hash != d.hash())
        throw GeometryError("lens table was sampled on a different domain");
    std::vector<LensRecord> second(t1.records.size());
    parallel_for(t1.records.size(), [&](std::size_t i) {
        if (t1.records[i].status == LensStatus::Ok)
            second[i] = scattering(m2, d, lambda_map(t1.records[i].v_in), tol, false);
    });

    LensComparison r;
    double sum_ds = 0.0, sum_dc = 0.0, sum_dl = 0.0;
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t1.records.size(); ++i) {
        const LensRecord& a = t1.records[i];
        if (a.status != LensStatus::Ok) {
            ++r.skipped;
            continue;
        }
        const LensRecord& b = second[i];
        ++r.compared;
        double ds = inf, dc = inf, dl = inf;
        if (b.status == LensStatus::Ok) {
            const BoundaryVector out2 = lambda_map(b.v_out);
            if (out2.component == a.v_out.component)
                ds = d.arclength_distance(a.v_out.component, a.v_out.s, out2.s);
            dc = std::abs(out2.c - a.v_out.c);
            dl = std::abs(b.length - a.length);
        } else {
            ++r.mismatched;
        }
        if (ds > r.max_ds || r.compared == 1) r.max_ds = ds, r.argmax_ds = i;
        if (dc > r.max_dc || r.compared == 1) r.max_dc = dc, r.argmax_dc = i;
        if (dl > r.max_dlength || r.compared == 1) r.max_dlength = dl, r.argmax_dlength = i;
        sum_ds += ds;
        sum_dc += dc;
        sum_dl += dl;
    }
    if (r.compared > 0) {
        r.mean_ds = sum_ds / r.compared;
        r.mean_dc = sum_dc / r.compared;
        r.mean_dlength = sum_dl / r.compared;
    }
    r.max_discrepancy = std::max({r.max_ds, r.max_dc, r.max_dlength});
    if (r.compared == 0)
        r.verdict = Verdict::Inconclusive;
    else if (r.max_discrepancy <= th.pass_tol)
        r.verdict = Verdict::Pass;
    else if (r.max_discrepancy >= th.fail_floor)
        r.verdict = Verdict::Fail;
    else
        r.verdict = Verdict::Inconclusive;
    return r;
}

NontrapReport check_nontrapping(const MetricField& m, const Domain& d, const LensGrid& grid,
                                const IntegratorOptions& tol) {
    const auto records = trace_all(m, d, grid_vectors(d, grid), tol, false);
    NontrapReport r;
    r.rays = records.size();
    for (const auto& rec : records) {
        switch (rec.status) {
        case LensStatus::Ok: r.max_length = std::max(r.max_length, rec.length); break;
        case LensStatus::Trapped: ++r.trapped; break;
        case LensStatus::Grazing: ++r.grazing; break;
        case LensStatus::Failed: ++r.failed; break;
        }
    }
    r.pass = r.trapped == 0;
    return r;
}

std::optional<AdmissibleTangent> find_admissible_tangent(const MetricField& m, const Domain& d,
                                                         int component, int sign, int samples,
                                                         const IntegratorOptions& tol) {
    if (sign != 1 && sign != -1) throw GeometryError("tangent sign must be +1 or -1");
    std::optional<AdmissibleTangent> vacuous;
    for (int k = 0; k < samples; ++k) {
        const double s = d.length(component) * k / samples;
        const BoundaryFrame f = boundary_frame(d, m, component, s);
        const GeodesicState x0{f.point, static_cast<double>(sign) * f.tau};
        const Contact c = classify_contact(m, d, x0);
        if (c.order != 2) continue;
        if (c.d2 > 0.0) {
            // convex point: the maximal geodesic in M is the point itself
            if (!vacuous) {
                vacuous = AdmissibleTangent{};
                vacuous->component = component;
                vacuous->sign = sign;
                vacuous->s = s;
                vacuous->zero_length = true;
                vacuous->samples_scanned = k + 1;
            }
            continue;
        }
        try {
            const ExitEvent fwd = trace_to_exit(m, d, x0, tol);
            const ExitEvent bwd = trace_to_exit(m, d, reversed(x0), tol);
            AdmissibleTangent a;
            a.component = component;
            a.sign = sign;
            a.s = s;
            a.length = fwd.t_exit + bwd.t_exit;
            a.boundary_times = {-bwd.t_exit, fwd.t_exit};
            const double pad = 10.0 * kConjugateSeparation;
            for (double z : jacobi_zeros(m, x0, fwd.t_exit + pad, tol)) a.jacobi_zeros.push_back(z);
            for (double z : jacobi_zeros(m, reversed(x0), bwd.t_exit + pad, tol))
                a.jacobi_zeros.push_back(-z);
            std::sort(a.jacobi_zeros.begin(), a.jacobi_zeros.end());
            a.min_separation = std::numeric_limits<double>::infinity();
            for (double z : a.jacobi_zeros)
                for (double b : a.boundary_times)
                    a.min_separation = std::min(a.min_separation, std::abs(z - b));
            a.samples_scanned = k + 1;
            if (a.min_separation >= kConjugateSeparation) return a;
        } catch (const Error&) {
            // grazing or failed chord: try the next sample
        }
    }
    if (vacuous) vacuous->samples_scanned = samples;
    return vacuous;
}

void write_lens_csv(std::ostream& os, const LensTable& t) {
    os << "component_in,s_in,c_in,sign_in,component_out,s_out,c_out,sign_out,length,status,"
          "crossings\n";
    for (const auto& r : t.records) {
        os << r.v_in.component << ',' << fmt17(r.v_in.s) << ',' << fmt17(r.v_in.c) << ','
           << r.v_in.sign << ',' << r.v_out.component << ',' << fmt17(r.v_out.s) << ','
           << fmt17(r.v_out.c) << ',' << r.v_out.sign << ',' << fmt17(r.length) << ','
           << status_name(r.status) << ',' << r.crossings << '\n';
    }
}

LensTable read_lens_csv(std::istream& is) {
    LensTable t;
    std::string line;
    if (!std::getline(is, line) || line.rfind("component_in,", 0) != 0)
        throw ConfigError("", "lens table CSV is missing its header");
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 11)
            throw ConfigError("", "lens table row " + std::to_string(row) + " has " +
                                      std::to_string(f.size()) + " fields, expected 11");
        try {
            LensRecord r;
            r.v_in = {std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stoi(f[3])};
            r.v_out = {std::stoi(f[4]), std::stod(f[5]), std::stod(f[6]), std::stoi(f[7])};
            r.length = std::stod(f[8]);
            r.status = parse_status(f[9]);
            r.crossings = std::stoi(f[10]);
            t.records.push_back(r);
        } catch (const std::logic_error&) {
            throw ConfigError("", "lens table row " + std::to_string(row) + " is malformed");
        }
    }
    return t;
}

}  // namespace lensrig
