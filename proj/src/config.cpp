#include "lensrig/config.hpp"

#include <algorithm>
#include <fstream>

#include "lensrig/errors.hpp"

namespace lensrig {

using nlohmann::json;

namespace {

std::string child(const std::string& path, std::string_view key) {
    std::string k;
    for (char ch : key) {
        if (ch == '~')
            k += "~0";
        else if (ch == '/')
            k += "~1";
        else
            k += ch;
    }
    return path + "/" + k;
}

std::string child(const std::string& path, std::size_t index) {
    return path + "/" + std::to_string(index);
}

const std::string& where(const std::string& path) {
    static const std::string root = "/";
    return path.empty() ? root : path;
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(where(path), "expected an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
    require_object(j, path);
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigError(child(path, item.key()), "unknown key");
    }
}

double get_positive(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(path, "must be positive");
    return v;
}

int get_grid(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    const auto v = j.get<long long>();
    if (v < 2 || v > 1000000) throw ConfigError(path, "must be between 2 and 1000000");
    return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

void check_expr(const std::string& text, const std::string& path,
                std::span<const std::string_view> vars) {
    try {
        parse_expression(text, vars);
    } catch (const ParseError& e) {
        throw ConfigError(path, e.what());
    }
}

constexpr std::string_view kXY[] = {"x", "y"};
constexpr std::string_view kU[] = {"u"};

PresetParams get_params(const json& j, const std::string& path) {
    require_object(j, path);
    PresetParams p;
    for (const auto& item : j.items()) {
        const std::string at = child(path, item.key());
        if (!item.value().is_number()) throw ConfigError(at, "expected a number");
        p[item.key()] = item.value().get<double>();
    }
    return p;
}

DomainSpec parse_domain(const json& j, const std::string& path) {
    require_object(j, path);
    DomainSpec d;
    if (j.contains("preset")) {
        check_keys(j, path, {"preset", "params"});
        d.preset = get_string(j["preset"], child(path, "preset"));
        if (j.contains("params")) d.params = get_params(j["params"], child(path, "params"));
        try {
            make_domain_preset(d.preset, d.params);
        } catch (const Error& e) {
            throw ConfigError(child(path, "preset"), e.what());
        }
        return d;
    }
    check_keys(j, path, {"inside", "boundary"});
    if (!j.contains("inside")) throw ConfigError(where(path), "needs \"preset\" or \"inside\"");
    d.inside = get_string(j["inside"], child(path, "inside"));
    check_expr(d.inside, child(path, "inside"), kXY);
    const std::string bpath = child(path, "boundary");
    if (!j.contains("boundary") || !j["boundary"].is_array() || j["boundary"].empty())
        throw ConfigError(bpath, "expected a non-empty array of curves");
    for (std::size_t i = 0; i < j["boundary"].size(); ++i) {
        const json& c = j["boundary"][i];
        const std::string cp = child(bpath, i);
        check_keys(c, cp, {"x", "y", "period"});
        for (const char* k : {"x", "y", "period"})
            if (!c.contains(k)) throw ConfigError(child(cp, k), "missing");
        CurveText t{get_string(c["x"], child(cp, "x")), get_string(c["y"], child(cp, "y")),
                    get_positive(c["period"], child(cp, "period"))};
        check_expr(t.x, child(cp, "x"), kU);
        check_expr(t.y, child(cp, "y"), kU);
        d.boundary.push_back(std::move(t));
    }
    return d;
}

MetricSpec parse_metric(const json& j, const std::string& path) {
    require_object(j, path);
    MetricSpec m;
    if (j.contains("preset")) {
        check_keys(j, path, {"preset", "params"});
        m.kind = MetricSpec::Kind::Preset;
        m.preset = get_string(j["preset"], child(path, "preset"));
        if (j.contains("params")) m.params = get_params(j["params"], child(path, "params"));
        try {
            make_metric_preset(m.preset, m.params);
        } catch (const Error& e) {
            throw ConfigError(child(path, "preset"), e.what());
        }
        return m;
    }
    if (j.contains("pullback")) {
        check_keys(j, path, {"pullback"});
        const std::string pp = child(path, "pullback");
        const json& pb = j["pullback"];
        check_keys(pb, pp, {"base", "map", "inverse"});
        if (!pb.contains("base")) throw ConfigError(child(pp, "base"), "missing");
        m.kind = MetricSpec::Kind::Pullback;
        m.base = std::make_shared<const MetricSpec>(parse_metric(pb["base"], child(pp, "base")));
        for (const char* key : {"map", "inverse"}) {
            const std::string kp = child(pp, key);
            if (!pb.contains(key) || !pb[key].is_array() || pb[key].size() != 2)
                throw ConfigError(kp, "expected two expressions [x', y']");
            auto& dst = std::string_view(key) == "map" ? m.map : m.inverse;
            for (std::size_t i = 0; i < 2; ++i) {
                dst[i] = get_string(pb[key][i], child(kp, i));
                check_expr(dst[i], child(kp, i), kXY);
            }
        }
        return m;
    }
    check_keys(j, path, {"g11", "g12", "g22"});
    m.kind = MetricSpec::Kind::Explicit;
    const char* names[] = {"g11", "g12", "g22"};
    for (int i = 0; i < 3; ++i) {
        const std::string kp = child(path, names[i]);
        if (!j.contains(names[i])) throw ConfigError(kp, "missing");
        m.components[i] = get_string(j[names[i]], kp);
        check_expr(m.components[i], kp, kXY);
    }
    return m;
}

json metric_to_json(const MetricSpec& m) {
    switch (m.kind) {
        case MetricSpec::Kind::Preset:
            return {{"preset", m.preset}, {"params", m.params}};
        case MetricSpec::Kind::Explicit:
            return {{"g11", m.components[0]}, {"g12", m.components[1]}, {"g22", m.components[2]}};
        case MetricSpec::Kind::Pullback:
            return {{"pullback",
                     {{"base", metric_to_json(*m.base)},
                      {"map", {m.map[0], m.map[1]}},
                      {"inverse", {m.inverse[0], m.inverse[1]}}}}};
    }
    return {};
}

}  // namespace

Config parse_config(const json& j) {
    check_keys(j, "", {"domain", "metric", "metric2", "integrator", "grids", "collar",
                       "thresholds", "transplant", "seed"});
    Config c;
    if (!j.contains("domain")) throw ConfigError("/domain", "missing");
    if (!j.contains("metric")) throw ConfigError("/metric", "missing");
    c.domain = parse_domain(j["domain"], "/domain");
    c.metric = parse_metric(j["metric"], "/metric");
    if (j.contains("metric2")) c.metric2 = parse_metric(j["metric2"], "/metric2");

    if (j.contains("integrator")) {
        const json& in = j["integrator"];
        check_keys(in, "/integrator", {"rel", "abs", "t_max"});
        if (in.contains("rel")) c.integrator.rel = get_positive(in["rel"], "/integrator/rel");
        if (in.contains("abs")) c.integrator.abs = get_positive(in["abs"], "/integrator/abs");
        if (in.contains("t_max")) c.integrator.t_max = get_positive(in["t_max"], "/integrator/t_max");
    }
    if (j.contains("grids")) {
        const json& g = j["grids"];
        check_keys(g, "/grids", {"N_s", "N_c", "samples", "collar_s", "collar_t",
                                 "tangent_samples", "smoke_s", "smoke_c"});
        auto grid = [&](const char* key, int& dst) {
            if (g.contains(key)) dst = get_grid(g[key], child("/grids", key));
        };
        grid("N_s", c.grids.N_s);
        grid("N_c", c.grids.N_c);
        grid("samples", c.grids.samples);
        grid("collar_s", c.grids.collar_s);
        grid("collar_t", c.grids.collar_t);
        grid("tangent_samples", c.grids.tangent_samples);
        grid("smoke_s", c.grids.smoke_s);
        grid("smoke_c", c.grids.smoke_c);
        if (c.grids.collar_t % 2 == 0) throw ConfigError("/grids/collar_t", "must be odd");
    }
    if (j.contains("collar")) {
        check_keys(j["collar"], "/collar", {"eps0"});
        if (j["collar"].contains("eps0")) c.eps0 = get_positive(j["collar"]["eps0"], "/collar/eps0");
    }
    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        check_keys(t, "/thresholds", {"pass_tol", "fail_floor"});
        if (t.contains("pass_tol")) c.thresholds.pass_tol = get_positive(t["pass_tol"], "/thresholds/pass_tol");
        if (t.contains("fail_floor"))
            c.thresholds.fail_floor = get_positive(t["fail_floor"], "/thresholds/fail_floor");
        if (!(c.thresholds.pass_tol < c.thresholds.fail_floor))
            throw ConfigError("/thresholds", "pass_tol must be below fail_floor");
    }
    if (j.contains("transplant")) {
        check_keys(j["transplant"], "/transplant", {"require_lens_match"});
        if (j["transplant"].contains("require_lens_match")) {
            const json& r = j["transplant"]["require_lens_match"];
            if (!r.is_boolean()) throw ConfigError("/transplant/require_lens_match", "expected a boolean");
            c.require_lens_match = r.get<bool>();
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw ConfigError("/seed", "expected a non-negative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("", path + ": " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const Config& c) {
    json domain;
    if (!c.domain.preset.empty()) {
        domain = {{"preset", c.domain.preset}, {"params", c.domain.params}};
    } else {
        json curves = json::array();
        for (const auto& t : c.domain.boundary)
            curves.push_back({{"x", t.x}, {"y", t.y}, {"period", t.period}});
        domain = {{"inside", c.domain.inside}, {"boundary", curves}};
    }
    json j = {
        {"domain", domain},
        {"metric", metric_to_json(c.metric)},
        {"integrator", {{"rel", c.integrator.rel}, {"abs", c.integrator.abs}, {"t_max", c.integrator.t_max}}},
        {"grids",
         {{"N_s", c.grids.N_s},
          {"N_c", c.grids.N_c},
          {"samples", c.grids.samples},
          {"collar_s", c.grids.collar_s},
          {"collar_t", c.grids.collar_t},
          {"tangent_samples", c.grids.tangent_samples},
          {"smoke_s", c.grids.smoke_s},
          {"smoke_c", c.grids.smoke_c}}},
        {"collar", {{"eps0", c.eps0}}},
        {"thresholds", {{"pass_tol", c.thresholds.pass_tol}, {"fail_floor", c.thresholds.fail_floor}}},
        {"transplant", {{"require_lens_match", c.require_lens_match}}},
        {"seed", c.seed},
    };
    if (c.metric2) j["metric2"] = metric_to_json(*c.metric2);
    return j;
}

Domain build_domain(const DomainSpec& s) {
    if (!s.preset.empty()) return make_domain_preset(s.preset, s.params);
    std::vector<CurveSpec> curves;
    for (const auto& t : s.boundary)
        curves.push_back({parse_expression(t.x, kU), parse_expression(t.y, kU), t.period});
    return Domain(parse_expression(s.inside, kXY), std::move(curves));
}

MetricField build_metric(const MetricSpec& s) {
    switch (s.kind) {
        case MetricSpec::Kind::Preset:
            return make_metric_preset(s.preset, s.params);
        case MetricSpec::Kind::Explicit:
            return MetricField::direct(parse_expression(s.components[0], kXY),
                                       parse_expression(s.components[1], kXY),
                                       parse_expression(s.components[2], kXY));
        case MetricSpec::Kind::Pullback:
            return MetricField::pullback(
                build_metric(*s.base),
                {parse_expression(s.map[0], kXY), parse_expression(s.map[1], kXY)},
                {parse_expression(s.inverse[0], kXY), parse_expression(s.inverse[1], kXY)});
    }
    throw ConfigError("/metric", "unknown metric kind");
}

Setup build_setup(const Config& c) {
    std::optional<Domain> domain;
    try {
        domain = build_domain(c.domain);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("/domain", e.what());
    }
    auto metric = [&](const MetricSpec& spec, const std::string& path) {
        try {
            MetricField m = build_metric(spec);
            m.validate_spd(domain->extended_box());
            m.validate_pullback(domain->extended_box(), 256, 1e-10);
            return m;
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(path, e.what());
        }
    };
    Setup s{*domain, metric(c.metric, "/metric"), std::nullopt};
    if (c.metric2) s.metric2 = metric(*c.metric2, "/metric2");
    return s;
}

}  // namespace lensrig
