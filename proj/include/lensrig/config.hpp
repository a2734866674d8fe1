#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lensrig/geodesic.hpp"
#include "lensrig/lens.hpp"

namespace lensrig {

struct CurveText {
    std::string x;
    std::string y;
    double period = 0.0;
};

struct DomainSpec {
    std::string preset;  // empty for an explicit domain
    PresetParams params;
    std::string inside;
    std::vector<CurveText> boundary;
};

struct MetricSpec {
    enum class Kind { Preset, Explicit, Pullback };
    Kind kind = Kind::Preset;
    std::string preset;
    PresetParams params;
    std::array<std::string, 3> components;  // g11, g12, g22
    std::shared_ptr<const MetricSpec> base;
    std::array<std::string, 2> map;
    std::array<std::string, 2> inverse;
};

struct GridConfig {
    int N_s = 16;
    int N_c = 15;
    int samples = 200;
    int collar_s = 512;
    int collar_t = 33;
    int tangent_samples = 256;
    int smoke_s = 8;
    int smoke_c = 7;
};

struct Config {
    DomainSpec domain;
    MetricSpec metric;
    std::optional<MetricSpec> metric2;
    IntegratorOptions integrator;
    GridConfig grids;
    double eps0 = 0.3;
    LensThresholds thresholds;
    bool require_lens_match = true;
    std::uint64_t seed = 1;
};

// Throws ConfigError carrying a JSON pointer to the offending value.
Config parse_config(const nlohmann::json& j);
Config load_config(const std::string& path);
// Full document with defaults filled in; parse_config(config_to_json(c)) reproduces c.
nlohmann::json config_to_json(const Config& c);

Domain build_domain(const DomainSpec& s);
MetricField build_metric(const MetricSpec& s);

// Domain and metrics of a config, validated on the extended box (SPD, and
// chi o chi^-1 = id on 256 samples for pullback metrics). Throws ConfigError.
struct Setup {
    Domain domain;
    MetricField metric;
    std::optional<MetricField> metric2;
};

Setup build_setup(const Config& c);

}  // namespace lensrig
