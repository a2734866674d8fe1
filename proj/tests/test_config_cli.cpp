#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lensrig/cli.hpp"
#include "lensrig/config.hpp"
#include "lensrig/errors.hpp"

using namespace lensrig;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json kMinimal = {{"domain", {{"preset", "euclidean_disk"}}}, {"metric", {{"preset", "euclidean"}}}};

std::string config_error_path(const json& j) {
    try {
        parse_config(j);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<none>";
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lensrig_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = scratch(name);
    std::ofstream(p) << j.dump(2);
    return p;
}

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
    const Config c = parse_config(kMinimal);
    CHECK(c.grids.N_s == 16);
    CHECK(c.grids.N_c == 15);
    CHECK(c.grids.samples == 200);
    CHECK(c.eps0 == 0.3);
    CHECK(c.require_lens_match);
    CHECK_FALSE(c.metric2.has_value());
    const Setup s = build_setup(c);
    CHECK(s.domain.component_count() == 1);
}

TEST_CASE("pullback metric block") {
    json j = kMinimal;
    j["metric2"] = {{"pullback",
                     {{"base", {{"preset", "euclidean"}}},
                      {"map", {"x + 0.1*y*(1 - x^2 - y^2)", "y"}},
                      {"inverse", {"x", "y"}}}}};
    const Config c = parse_config(j);
    REQUIRE(c.metric2.has_value());
    CHECK(c.metric2->kind == MetricSpec::Kind::Pullback);
    // inverse is wrong, so validation must reject it
    CHECK_THROWS_AS(build_setup(c), ConfigError);

    j["metric2"]["pullback"]["map"] = {"-y", "x"};
    j["metric2"]["pullback"]["inverse"] = {"y", "-x"};
    CHECK_NOTHROW(build_setup(parse_config(j)));
}

TEST_CASE("config errors carry JSON pointers") {
    json j = kMinimal;
    j["grids"] = {{"N_s", 1}};
    CHECK(config_error_path(j) == "/grids/N_s");

    j = kMinimal;
    j["colour"] = 1;
    CHECK(config_error_path(j) == "/colour");

    j = kMinimal;
    j["metric"] = {{"g11", "1"}, {"g12", "0"}, {"g22", "1 +* x"}};
    CHECK(config_error_path(j) == "/metric/g22");

    j = kMinimal;
    j["domain"] = {{"preset", "torus"}};
    CHECK(config_error_path(j) == "/domain/preset");

    j = kMinimal;
    j["grids"] = {{"collar_t", 32}};
    CHECK(config_error_path(j) == "/grids/collar_t");

    j = kMinimal;
    j["thresholds"] = {{"pass_tol", 1e-2}, {"fail_floor", 1e-3}};
    CHECK(config_error_path(j) == "/thresholds");

    j = kMinimal;
    j.erase("metric");
    CHECK(config_error_path(j) == "/metric");

    j = kMinimal;
    j["domain"] = {{"inside", "1 - x^2 - y^2"}, {"boundary", {{{"x", "cos(u)"}, {"y", "sin(u)"}}}}};
    CHECK(config_error_path(j) == "/domain/boundary/0/period");
}

TEST_CASE("config round trip") {
    json j = kMinimal;
    j["domain"] = {{"inside", "1 - x^2 - y^2"},
                   {"boundary", {{{"x", "cos(u)"}, {"y", "sin(u)"}, {"period", 6.283185307179586}}}}};
    j["metric"] = {{"g11", "1 + x^2"}, {"g12", "0"}, {"g22", "1"}};
    j["seed"] = 42;
    j["integrator"] = {{"rel", 1e-11}};
    const Config c = parse_config(j);
    const json back = config_to_json(c);
    CHECK(config_to_json(parse_config(back)) == back);
    CHECK(back["seed"] == 42);
    CHECK(back["integrator"]["rel"] == 1e-11);

    const Config explicit_disk = parse_config(j);
    const Setup s = build_setup(explicit_disk);
    CHECK(s.domain.length(0) == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("cli exit codes") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
    CHECK(run({"lens", "sample"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);

    json bad = kMinimal;
    bad["grids"] = {{"N_s", 1}};
    const Run r = run({"lens", "sample", "--config", write_config("bad.json", bad).string(), "--out",
                       scratch("bad.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("/grids/N_s") != std::string::npos);
    CHECK(run({"check", "nontrap", "--config", scratch("missing.json").string()}).code == 2);

    const Run p = run({"presets"});
    CHECK(p.code == 0);
    CHECK(json::parse(p.out).size() == 6);
}

TEST_CASE("cli lens sample and compare") {
    json small = {{"domain", {{"preset", "conformal_bump"}}},
                  {"metric", {{"preset", "conformal_bump"}}},
                  {"grids", {{"N_s", 6}, {"N_c", 5}}}};
    const fs::path cfg = write_config("bump.json", small);
    const fs::path table = scratch("bump.csv");
    REQUIRE(run({"lens", "sample", "--config", cfg.string(), "--out", table.string()}).code == 0);

    std::ifstream in(table);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 6 * 5);
    const json meta = json::parse(slurp(table.string() + ".meta.json"));
    CHECK(meta["grid"]["N_s"] == 6);
    CHECK(meta["counts"]["ok"] == 30);

    const Run same = run({"lens", "compare", "--table", table.string(), "--config", cfg.string()});
    CHECK(same.code == 0);
    CHECK(json::parse(same.out)["verdict"] == "pass");

    small["metric"]["params"] = {{"a", 0.35}};
    const fs::path pert = write_config("bump_pert.json", small);
    const Run diff = run({"lens", "compare", "--table", table.string(), "--config", pert.string()});
    CHECK(diff.code == 1);
    CHECK(json::parse(diff.out)["verdict"] == "fail");

    // determinism: a second sample is byte-identical, with more threads too
    const fs::path again = scratch("bump_again.csv");
    REQUIRE(run({"--threads", "3", "lens", "sample", "--config", cfg.string(), "--out", again.string()})
                .code == 0);
    CHECK(slurp(table) == slurp(again));
    CHECK(slurp(table.string() + ".meta.json") == slurp(again.string() + ".meta.json"));
}

TEST_CASE("cli collar and transplant on a small twist pair") {
    json pair = kMinimal;
    pair["metric2"] = {{"pullback",
                        {{"base", {{"preset", "euclidean"}}},
                         {"map",
                          {"cos(0.2*(1 - x^2 - y^2))*x - sin(0.2*(1 - x^2 - y^2))*y",
                           "sin(0.2*(1 - x^2 - y^2))*x + cos(0.2*(1 - x^2 - y^2))*y"}},
                         {"inverse",
                          {"cos(0.2*(1 - x^2 - y^2))*x + sin(0.2*(1 - x^2 - y^2))*y",
                           "-sin(0.2*(1 - x^2 - y^2))*x + cos(0.2*(1 - x^2 - y^2))*y"}}}}};
    pair["grids"] = {{"samples", 4}, {"collar_s", 64}, {"collar_t", 9}};
    const fs::path cfg = write_config("twist.json", pair);

    const fs::path grid = scratch("collar.csv");
    CHECK(run({"collar", "build", "--config", cfg.string(), "--out", grid.string()}).code == 0);
    std::ifstream in(grid);
    std::string header;
    std::getline(in, header);
    CHECK(header == "component,s,t,g_ss,g_st,g_tt");

    const Run cv = run({"collar", "verify", "--config", cfg.string()});
    CHECK(cv.code == 0);
    CHECK(json::parse(cv.out)["comparison"]["pass"] == true);

    const fs::path report = scratch("verify.json");
    CHECK(run({"transplant", "verify", "--pair", cfg.string(), "--out", report.string()}).code == 0);
    const json rep = json::parse(slurp(report));
    CHECK(rep["pass"] == true);
    CHECK(rep["checks"]["reference"]["max_error"].get<double>() <= 1e-5);

    const fs::path run_csv = scratch("run.csv");
    CHECK(run({"transplant", "run", "--pair", cfg.string(), "--out", run_csv.string()}).code == 0);

    // a single-metric config cannot drive a transplant
    CHECK(run({"transplant", "run", "--pair", write_config("single.json", kMinimal).string(), "--out",
               run_csv.string()})
              .code == 2);
}
