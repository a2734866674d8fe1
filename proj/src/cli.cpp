#include "lensrig/cli.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lensrig/collar.hpp"
#include "lensrig/config.hpp"
#include "lensrig/errors.hpp"
#include "lensrig/format.hpp"
#include "lensrig/parallel.hpp"
#include "lensrig/transplant.hpp"

namespace lensrig {

using nlohmann::json;

namespace {

constexpr int kPass = 0, kFail = 1, kUsage = 2;

void setup_logging() {
    static bool done = false;
    if (done) return;
    done = true;
    auto logger = spdlog::stderr_color_st("lensrig");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("LENSRIG_LOG");
    const std::string level = env ? env : "quiet";
    if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else if (level == "info")
        spdlog::set_level(spdlog::level::info);
    else
        spdlog::set_level(spdlog::level::warn);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("", "cannot write " + path);
    return os;
}

void write_json(const json& j, const std::string& path, std::ostream& fallback) {
    if (path.empty()) {
        fallback << j.dump(2) << '\n';
        return;
    }
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

json vec_json(Vec2 v) { return json::array({v.x, v.y}); }

json boundary_vector_json(const BoundaryVector& v) {
    return {{"component", v.component}, {"s", v.s}, {"c", v.c}, {"sign", v.sign}};
}

json comparison_json(const LensComparison& r, const LensTable& t) {
    auto rec = [&](std::size_t i) { return boundary_vector_json(t.records.at(i).v_in); };
    json j = {{"compared", r.compared},
              {"skipped", r.skipped},
              {"mismatched", r.mismatched},
              {"max_ds", r.max_ds},
              {"max_dc", r.max_dc},
              {"max_dlength", r.max_dlength},
              {"mean_ds", r.mean_ds},
              {"mean_dc", r.mean_dc},
              {"mean_dlength", r.mean_dlength},
              {"max_discrepancy", r.max_discrepancy},
              {"verdict", std::string(verdict_name(r.verdict))}};
    if (!t.records.empty()) {
        j["argmax_ds"] = {{"index", r.argmax_ds}, {"v_in", rec(r.argmax_ds)}};
        j["argmax_dc"] = {{"index", r.argmax_dc}, {"v_in", rec(r.argmax_dc)}};
        j["argmax_dlength"] = {{"index", r.argmax_dlength}, {"v_in", rec(r.argmax_dlength)}};
    }
    return j;
}

json gauge_json(const GaugeReport& g) {
    return {{"max_gtt_deviation", g.max_gtt},
            {"max_gst", g.max_gst},
            {"min_det", g.min_det},
            {"min_image_separation", g.min_image_separation},
            {"min_spacing", g.min_spacing},
            {"injective", g.injective}};
}

bool gauge_ok(const GaugeReport& g) { return g.max_gtt <= 1e-8 && g.max_gst <= 1e-8 && g.injective; }

double common_epsilon(const Setup& s, const Config& c) {
    double eps = choose_epsilon(s.metric, s.domain, c.eps0).epsilon;
    if (s.metric2) eps = std::min(eps, choose_epsilon(*s.metric2, s.domain, c.eps0).epsilon);
    return eps;
}

const MetricField& second_metric(const Setup& s) {
    if (!s.metric2) throw ConfigError("/metric2", "this command needs a second metric");
    return *s.metric2;
}

TransplantOptions transplant_options(const Config& c) {
    TransplantOptions o;
    o.tol = c.integrator;
    o.smoke_grid = {c.grids.smoke_s, c.grids.smoke_c};
    o.thresholds = c.thresholds;
    o.require_lens_match = c.require_lens_match;
    return o;
}

// ---- subcommands ------------------------------------------------------------------------

int cmd_presets(const std::string& out_path, std::ostream& out) {
    json list = json::array();
    for (const auto& p : preset_catalog())
        list.push_back({{"name", p.name}, {"description", p.description}, {"defaults", p.defaults}});
    write_json(list, out_path, out);
    return kPass;
}

int cmd_geod_trace(const Config& c, Vec2 x, Vec2 v, const std::string& out_path, std::ostream& out) {
    const Setup s = build_setup(c);
    const GeodesicState s0 = unit_state(s.metric, x, v);
    json summary = {{"x0", vec_json(x)}, {"v0", vec_json(s0.v)}};
    double t_end = c.integrator.t_max;
    int code = kPass;
    try {
        const ExitEvent e = trace_to_exit(s.metric, s.domain, s0, c.integrator);
        t_end = e.t_exit;
        summary["status"] = "exit";
        summary["t_exit"] = e.t_exit;
        summary["exit_point"] = vec_json(e.state_at_exit.x);
        summary["component"] = e.component;
        summary["s_exit"] = e.s_exit;
        summary["contact_order"] = e.contact_order;
        summary["transversality"] = e.transversality;
    } catch (const TrappedError&) {
        summary["status"] = "trapped";
        code = kFail;
    } catch (const GrazingError& g) {
        summary["status"] = "grazing";
        summary["t_contact"] = g.t();
        summary["contact_order"] = g.contact_order();
        t_end = g.t();
        code = kFail;
    }
    if (!out_path.empty()) {
        auto os = open_out(out_path);
        os << "t,x,y,vx,vy,speed\n";
        const Trajectory traj = integrate_geodesic(s.metric, s0, t_end, c.integrator);
        for (double t : traj.mesh()) {
            const GeodesicState st = traj.state(t);
            os << fmt17(t) << ',' << fmt17(st.x.x) << ',' << fmt17(st.x.y) << ',' << fmt17(st.v.x)
               << ',' << fmt17(st.v.y) << ',' << fmt17(std::sqrt(s.metric.at(st.x).norm_sq(st.v)))
               << '\n';
        }
    }
    out << summary.dump(2) << '\n';
    return code;
}

int cmd_lens_sample(const Config& c, const std::string& out_path) {
    const Setup s = build_setup(c);
    const LensGrid grid{c.grids.N_s, c.grids.N_c};
    spdlog::info("sampling {} x {} lens table", grid.N_s, grid.N_c);
    const LensTable t = sample_lens_table(s.metric, s.domain, grid, c.integrator);
    {
        auto os = open_out(out_path);
        write_lens_csv(os, t);
    }
    json meta = {{"grid", {{"N_s", grid.N_s}, {"N_c", grid.N_c}}},
                 {"metric_hash", t.metric_hash},
                 {"domain_hash", t.domain_hash},
                 {"records", t.records.size()},
                 {"counts",
                  {{"ok", t.count(LensStatus::Ok)},
                   {"grazing", t.count(LensStatus::Grazing)},
                   {"trapped", t.count(LensStatus::Trapped)},
                   {"failed", t.count(LensStatus::Failed)}}},
                 {"config", config_to_json(c)}};
    write_json(meta, out_path + ".meta.json", std::cout);
    return kPass;
}

int cmd_lens_compare(const Config& c, const std::string& table_path, const std::string& out_path,
                     std::ostream& out) {
    std::ifstream is(table_path);
    if (!is) throw ConfigError("", "cannot open lens table " + table_path);
    LensTable t = read_lens_csv(is);
    std::ifstream ms(table_path + ".meta.json");
    if (!ms) throw ConfigError("", "missing metadata sidecar " + table_path + ".meta.json");
    json meta;
    try {
        meta = json::parse(ms);
        t.grid = {meta.at("grid").at("N_s").get<int>(), meta.at("grid").at("N_c").get<int>()};
        t.metric_hash = meta.at("metric_hash").get<std::string>();
        t.domain_hash = meta.at("domain_hash").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError("", table_path + ".meta.json: " + e.what());
    }
    t.tol = c.integrator;
    const Setup s = build_setup(c);
    if (t.domain_hash != s.domain.hash())
        throw ConfigError("/domain", "domain differs from the one the table was sampled on");
    const LensComparison r = compare_lens_tables(t, s.metric, s.domain, c.thresholds, c.integrator);
    json report = comparison_json(r, t);
    report["reference_metric_hash"] = t.metric_hash;
    report["metric_hash"] = s.metric.hash();
    report["pass_tol"] = c.thresholds.pass_tol;
    report["fail_floor"] = c.thresholds.fail_floor;
    write_json(report, out_path, out);
    return r.verdict == Verdict::Pass ? kPass : kFail;
}

int cmd_check_nontrap(const Config& c, const std::string& out_path, std::ostream& out) {
    const Setup s = build_setup(c);
    const NontrapReport r =
        check_nontrapping(s.metric, s.domain, {c.grids.N_s, c.grids.N_c}, c.integrator);
    const json j = {{"rays", r.rays},         {"trapped", r.trapped},       {"grazing", r.grazing},
                    {"failed", r.failed},     {"max_length", r.max_length}, {"t_max", c.integrator.t_max},
                    {"pass", r.pass}};
    write_json(j, out_path, out);
    return r.pass ? kPass : kFail;
}

int cmd_check_admissible(const Config& c, const std::string& out_path, std::ostream& out) {
    const Setup s = build_setup(c);
    json list = json::array();
    bool all = true;
    for (int comp = 0; comp < s.domain.component_count(); ++comp) {
        for (int sign : {1, -1}) {
            const auto a = find_admissible_tangent(s.metric, s.domain, comp, sign,
                                                   c.grids.tangent_samples, c.integrator);
            json e = {{"component", comp}, {"sign", sign}, {"found", a.has_value()}};
            if (a) {
                e["s"] = a->s;
                e["zero_length"] = a->zero_length;
                e["length"] = a->length;
                e["boundary_times"] = a->boundary_times;
                e["jacobi_zeros"] = a->jacobi_zeros;
                e["min_separation"] = a->min_separation;
                e["samples_scanned"] = a->samples_scanned;
            }
            all = all && a.has_value();
            list.push_back(std::move(e));
        }
    }
    write_json({{"components", list}, {"pass", all}}, out_path, out);
    return all ? kPass : kFail;
}

void write_grid_csv(const std::string& path, const std::vector<CollarGridRow>& grid) {
    auto os = open_out(path);
    os << "component,s,t,g_ss,g_st,g_tt\n";
    for (const auto& r : grid)
        os << r.component << ',' << fmt17(r.s) << ',' << fmt17(r.t) << ',' << fmt17(r.g.xx) << ','
           << fmt17(r.g.xy) << ',' << fmt17(r.g.yy) << '\n';
}

json epsilon_json(const EpsilonChoice& e) {
    return {{"epsilon", e.epsilon},
            {"halvings", e.halvings},
            {"min_det", e.min_det},
            {"min_separation", e.min_separation},
            {"eta", e.eta}};
}

int cmd_collar_build(const Config& c, const std::string& out_path) {
    const Setup s = build_setup(c);
    const EpsilonChoice e = choose_epsilon(s.metric, s.domain, c.eps0);
    spdlog::info("collar width {}", e.epsilon);
    const CollarChart chart(s.metric, s.domain, e.epsilon);
    const auto grid = collar_metric_grid(chart, c.grids.collar_s, c.grids.collar_t);
    write_grid_csv(out_path, grid);
    const GaugeReport g = gauge_report(grid, chart, c.grids.collar_s, c.grids.collar_t);
    const json meta = {{"epsilon", epsilon_json(e)},
                       {"grid", {{"n_s", c.grids.collar_s}, {"n_t", c.grids.collar_t}}},
                       {"gauge", gauge_json(g)},
                       {"pass", gauge_ok(g)},
                       {"config", config_to_json(c)}};
    write_json(meta, out_path + ".meta.json", std::cout);
    return gauge_ok(g) ? kPass : kFail;
}

int cmd_collar_verify(const Config& c, const std::string& out_path, const std::string& csv_path,
                      std::ostream& out) {
    const Setup s = build_setup(c);
    const double eps = common_epsilon(s, c);
    const CollarChart c1(s.metric, s.domain, eps);
    const auto grid1 = collar_metric_grid(c1, c.grids.collar_s, c.grids.collar_t);
    if (!csv_path.empty()) write_grid_csv(csv_path, grid1);
    const GaugeReport g1 = gauge_report(grid1, c1, c.grids.collar_s, c.grids.collar_t);
    json report = {{"epsilon", eps}, {"gauge1", gauge_json(g1)}};
    bool pass = gauge_ok(g1);
    if (s.metric2) {
        const CollarChart c2(*s.metric2, s.domain, eps);
        const GaugeReport g2 = gauge_report(collar_metric_grid(c2, c.grids.collar_s, c.grids.collar_t),
                                            c2, c.grids.collar_s, c.grids.collar_t);
        const CollarComparison r = compare_collar_metrics(c1, c2, c.grids.collar_s, c.grids.collar_t);
        report["gauge2"] = gauge_json(g2);
        report["comparison"] = {{"depth", r.depth},
                                {"max_dgss", r.max_dgss},
                                {"argmax", {{"component", r.argmax.component}, {"s", r.argmax.s}, {"t", r.argmax.t}}},
                                {"max_gauge", r.max_gauge},
                                {"max_isometry_defect", r.max_iso_defect},
                                {"pass_tol", kCollarPassTol},
                                {"pass", r.pass}};
        pass = pass && gauge_ok(g2) && r.pass;
    }
    report["pass"] = pass;
    write_json(report, out_path, out);
    return pass ? kPass : kFail;
}

int cmd_transplant_run(const Config& c, const std::string& out_path) {
    const Setup s = build_setup(c);
    const double eps = common_epsilon(s, c);
    const TransplantContext ctx(s.metric, second_metric(s), s.domain, eps, transplant_options(c));
    const auto xs = interior_samples(s.domain, c.grids.samples, c.seed);
    std::vector<PhiPoint> res(xs.size());
    std::vector<std::string> errors(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        try {
            res[i] = phi_point_detail(ctx, xs[i]);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    auto os = open_out(out_path);
    os << "x,y,phi_x,phi_y,chi_x,chi_y,chi_error,branch,direction\n";
    double worst = 0.0;
    int failures = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        os << fmt17(xs[i].x) << ',' << fmt17(xs[i].y) << ',';
        if (!errors[i].empty()) {
            ++failures;
            os << ",,,,,error,\n";
            continue;
        }
        const auto ref = ctx.reference(xs[i]);
        os << fmt17(res[i].point.x) << ',' << fmt17(res[i].point.y) << ',';
        if (ref) {
            const double err = norm(res[i].point - *ref);
            worst = std::max(worst, err);
            os << fmt17(ref->x) << ',' << fmt17(ref->y) << ',' << fmt17(err) << ',';
        } else {
            os << ",,,";
        }
        os << (res[i].collar ? "collar" : "transplant") << ',';
        if (res[i].direction) os << res[i].direction->index << '/' << res[i].direction->directions;
        os << '\n';
    }
    const bool has_ref = ctx.reference({0.0, 0.0}).has_value();
    const bool pass = failures == 0 && (!has_ref || worst <= kInverseTol);
    json meta = {{"epsilon", eps},
                 {"samples", xs.size()},
                 {"failures", failures},
                 {"lens_smoke", {{"max_discrepancy", ctx.smoke().max_discrepancy},
                                 {"verdict", std::string(verdict_name(ctx.smoke().verdict))}}},
                 {"pass", pass},
                 {"config", config_to_json(c)}};
    if (has_ref) meta["max_reference_error"] = worst;
    write_json(meta, out_path + ".meta.json", std::cout);
    return pass ? kPass : kFail;
}

int cmd_transplant_verify(const Config& c, const std::string& out_path, const std::string& csv_path,
                          std::ostream& out) {
    const Setup s = build_setup(c);
    const double eps = common_epsilon(s, c);
    json report = {{"epsilon", eps}};
    std::optional<TransplantContext> ctx;
    try {
        ctx.emplace(s.metric, second_metric(s), s.domain, eps, transplant_options(c));
    } catch (const LensMismatchError& e) {
        report["error"] = e.what();
        report["lens_mismatch"] = true;
        report["pass"] = false;
        write_json(report, out_path, out);
        return kFail;
    }
    report["lens_smoke"] = {{"max_discrepancy", ctx->smoke().max_discrepancy},
                            {"verdict", std::string(verdict_name(ctx->smoke().verdict))}};
    const auto xs = interior_samples(s.domain, c.grids.samples, c.seed);

    spdlog::info("well-definedness on {} samples", xs.size());
    const WellDefinedReport w = verify_well_defined(*ctx, xs);
    spdlog::info("inverse");
    const InverseReport inv = verify_inverse(*ctx, xs);
    spdlog::info("isometry");
    const IsometryReport iso = verify_isometry(*ctx, xs);

    double boundary = 0.0;
    for (int comp = 0; comp < s.domain.component_count(); ++comp) {
        for (int k = 0; k < 64; ++k) {
            const Vec2 b = s.domain.point(comp, s.domain.length(comp) * k / 64);
            boundary = std::max(boundary, norm(phi_point(*ctx, b) - b));
        }
    }
    const bool boundary_ok = boundary <= 1e-10;

    report["checks"] = {
        {"well_defined",
         {{"max_t_spread", w.max_t_spread},
          {"max_v_spread", w.max_v_spread},
          {"t_tol", kTSpreadTol},
          {"v_tol", kVSpreadTol},
          {"skipped_directions", w.skipped},
          {"lens_mismatches", w.mismatches},
          {"failures", w.failures},
          {"pass", w.pass}}},
        {"inverse",
         {{"max_psi_phi", inv.max_psi_phi},
          {"max_phi_psi", inv.max_phi_psi},
          {"tol", kInverseTol},
          {"failures", inv.failures},
          {"pass", inv.pass}}},
        {"isometry",
         {{"max_defect", iso.max_defect},
          {"max_unit_defect", iso.max_unit_defect},
          {"tol", kIsometryTol},
          {"failures", iso.failures},
          {"pass", iso.pass}}},
        {"boundary", {{"max_displacement", boundary}, {"tol", 1e-10}, {"pass", boundary_ok}}},
    };
    if (ctx->reference({0.0, 0.0}))
        report["checks"]["reference"] = {{"max_error", iso.max_reference_error},
                                         {"tol", kInverseTol},
                                         {"pass", iso.max_reference_error <= kInverseTol}};
    const bool pass = w.pass && inv.pass && iso.pass && boundary_ok &&
                      (!report["checks"].contains("reference") ||
                       report["checks"]["reference"]["pass"].get<bool>());
    report["samples"] = xs.size();
    report["pass"] = pass;

    if (!csv_path.empty()) {
        auto os = open_out(csv_path);
        os << "x,y,phi_x,phi_y,chi_x,chi_y,t_spread,v_spread,psi_phi,phi_psi,isometry_defect,"
              "unit_defect,error\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto& r = iso.rows[i];
            os << fmt17(xs[i].x) << ',' << fmt17(xs[i].y) << ',' << fmt17(r.phi.x) << ','
               << fmt17(r.phi.y) << ',';
            if (r.reference)
                os << fmt17(r.reference->x) << ',' << fmt17(r.reference->y) << ',';
            else
                os << ",,";
            os << fmt17(w.rows[i].t_spread) << ',' << fmt17(w.rows[i].v_spread) << ','
               << fmt17(inv.rows[i].psi_phi) << ',' << fmt17(inv.rows[i].phi_psi) << ','
               << fmt17(r.defect) << ',' << fmt17(r.unit_defect) << ',';
            std::string err = !w.rows[i].error.empty() ? w.rows[i].error
                              : !inv.rows[i].error.empty() ? inv.rows[i].error
                                                           : r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            os << err << '\n';
        }
    }
    write_json(report, out_path, out);
    return pass ? kPass : kFail;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    setup_logging();
    CLI::App app{"Lens data, boundary normal coordinates and geodesic transplants for 2-D metrics",
                 "lensrig"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Maximum worker threads")->check(CLI::PositiveNumber);

    std::string config_path, out_path, table_path, csv_path;
    double x = 0.0, y = 0.0, vx = 1.0, vy = 0.0;

    auto* presets = app.add_subcommand("presets", "List built-in presets");
    presets->add_option("--out", out_path, "Output JSON (default stdout)");

    auto* geod = app.add_subcommand("geod", "Geodesics")->require_subcommand(1);
    auto* trace = geod->add_subcommand("trace", "Trace a geodesic to its boundary exit");
    trace->add_option("--config", config_path)->required();
    trace->add_option("--x", x)->required();
    trace->add_option("--y", y)->required();
    trace->add_option("--vx", vx)->required();
    trace->add_option("--vy", vy)->required();
    trace->add_option("--out", out_path, "Trajectory CSV");

    auto* lens = app.add_subcommand("lens", "Lens data")->require_subcommand(1);
    auto* sample = lens->add_subcommand("sample", "Sample the lens table");
    sample->add_option("--config", config_path)->required();
    sample->add_option("--out", out_path, "Lens table CSV")->required();
    auto* compare = lens->add_subcommand("compare", "Compare a stored table against a metric");
    compare->add_option("--table", table_path)->required();
    compare->add_option("--config", config_path)->required();
    compare->add_option("--out", out_path, "Report JSON (default stdout)");

    auto* check = app.add_subcommand("check", "Hypothesis checks")->require_subcommand(1);
    auto* nontrap = check->add_subcommand("nontrap", "Non-trapping check");
    nontrap->add_option("--config", config_path)->required();
    nontrap->add_option("--out", out_path);
    auto* admissible = check->add_subcommand("admissible", "Admissible tangential geodesics");
    admissible->add_option("--config", config_path)->required();
    admissible->add_option("--out", out_path);

    auto* collar = app.add_subcommand("collar", "Boundary normal coordinates")->require_subcommand(1);
    auto* build = collar->add_subcommand("build", "Pulled-back metric grid");
    build->add_option("--config", config_path)->required();
    build->add_option("--out", out_path, "Grid CSV")->required();
    auto* cverify = collar->add_subcommand("verify", "Gauge and metric comparison report");
    cverify->add_option("--config", config_path)->required();
    cverify->add_option("--out", out_path, "Report JSON (default stdout)");
    cverify->add_option("--csv", csv_path, "Grid CSV of the first metric");

    auto* transplant = app.add_subcommand("transplant", "Geodesic transplant map")->require_subcommand(1);
    auto* trun = transplant->add_subcommand("run", "Evaluate the map on sample points");
    trun->add_option("--pair", config_path)->required();
    trun->add_option("--out", out_path, "Sample CSV")->required();
    auto* tverify = transplant->add_subcommand("verify", "Well-definedness, inverse and isometry checks");
    tverify->add_option("--pair", config_path)->required();
    tverify->add_option("--out", out_path, "Report JSON (default stdout)");
    tverify->add_option("--csv", csv_path, "Per-sample CSV");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kPass;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }
    if (threads > 0) set_thread_count(threads);

    try {
        if (*presets) return cmd_presets(out_path, out);
        const Config c = load_config(config_path);
        if (*trace) return cmd_geod_trace(c, {x, y}, {vx, vy}, out_path, out);
        if (*sample) return cmd_lens_sample(c, out_path);
        if (*compare) return cmd_lens_compare(c, table_path, out_path, out);
        if (*nontrap) return cmd_check_nontrap(c, out_path, out);
        if (*admissible) return cmd_check_admissible(c, out_path, out);
        if (*build) return cmd_collar_build(c, out_path);
        if (*cverify) return cmd_collar_verify(c, out_path, csv_path, out);
        if (*trun) return cmd_transplant_run(c, out_path);
        if (*tverify) return cmd_transplant_verify(c, out_path, csv_path, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFail;
    }
    err << app.help();
    return kUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace lensrig
