#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "warpkit/fields.hpp"
#include "warpkit/weather.hpp"

namespace warpkit {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& msg)
        : std::runtime_error("config: " + field + ": " + msg) {}
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double sample(Rng& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

struct BrownConradyConfig {
    // focal lengths as fractions of image width; principal point as fractions
    // of width/height
    double fx_rel = 1.0, fy_rel = 1.0;
    double cx_rel = 0.5, cy_rel = 0.5;
    // coefficient sampling ranges; defaults are mild barrel/pincushion
    Range k[6] = {{-0.2, 0.2}, {-0.05, 0.05}, {-0.01, 0.01}, {0, 0}, {0, 0}, {0, 0}};
    Range p1{-0.01, 0.01}, p2{-0.01, 0.01};
    Range s[4] = {{-0.01, 0.01}, {-0.01, 0.01}, {-0.01, 0.01}, {-0.01, 0.01}};
};

struct GrfWarpConfig {
    Range corr_length{16, 64};
    Range alpha{1, 4};
};

struct TpsWarpConfig {
    int grid = 4;
    double jitter_sigma = 3.0;  // px, control point placement
    double target_sigma = 5.0;  // px, target displacement
};

struct DivFreeConfig {
    Range corr_length{16, 64};
    Range alpha{1, 4};
};

struct FogConfig {
    double k0 = 0.0375;
    double visibility = 0.0;  // meters; > 0 overrides k0 via -ln(0.05)/V
    double d_max = 160.0;
    std::array<double, 3> atmo{220, 220, 235};
    double jitter = 0.05;

    FogParams to_params() const {
        FogParams p;
        p.k0 = visibility > 0.0 ? extinction_from_visibility(visibility) : k0;
        p.d_max = d_max;
        p.atmo = atmo;
        p.jitter = jitter;
        return p;
    }
};

struct FlareConfig {
    Range rho{0.25, 0.35};
    Range beta{0.55, 0.65};
};

inline const std::vector<std::string>& corruption_names() {
    static const std::vector<std::string> names = {
        "brown_conrady", "grf_warp", "tps", "div_free", "uniform_fog", "hetero_fog", "lens_flare"};
    return names;
}

inline bool is_refractive(const std::string& name) {
    return name == "brown_conrady" || name == "grf_warp" || name == "tps" || name == "div_free";
}

struct GenerationConfig {
    std::string input_dir;
    std::string output_dir;
    uint64_t global_seed = 0;
    int workers = 1;
    bool emit_visualizations = false;
    bool emit_transmission = false;
    std::map<std::string, double> corruptions;  // name -> weight

    BrownConradyConfig brown_conrady;
    GrfWarpConfig grf_warp;
    TpsWarpConfig tps;
    DivFreeConfig div_free;
    FogConfig uniform_fog;
    FogConfig hetero_fog;
    OctaveSpec octaves = OctaveSpec::defaults();
    FlareConfig lens_flare;

    void validate() const;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& path,
                         const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const auto& k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known) throw ConfigError(path + "." + it.key(), "unknown key");
    }
}

inline Range parse_range(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(path, "expected [lo, hi]");
    Range r{v[0].get<double>(), v[1].get<double>()};
    if (r.lo > r.hi) throw ConfigError(path, "range must satisfy lo <= hi");
    return r;
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

inline void parse_brown_conrady(const json& obj, BrownConradyConfig& cfg) {
    require_keys(obj, "brown_conrady",
                 {"fx_rel", "fy_rel", "cx_rel", "cy_rel", "k1", "k2", "k3", "k4", "k5", "k6",
                  "p1", "p2", "s1", "s2", "s3", "s4"});
    cfg.fx_rel = get_or(obj, "fx_rel", cfg.fx_rel);
    cfg.fy_rel = get_or(obj, "fy_rel", cfg.fy_rel);
    cfg.cx_rel = get_or(obj, "cx_rel", cfg.cx_rel);
    cfg.cy_rel = get_or(obj, "cy_rel", cfg.cy_rel);
    const char* knames[] = {"k1", "k2", "k3", "k4", "k5", "k6"};
    for (int i = 0; i < 6; ++i)
        if (obj.contains(knames[i])) cfg.k[i] = parse_range(obj.at(knames[i]), std::string("brown_conrady.") + knames[i]);
    if (obj.contains("p1")) cfg.p1 = parse_range(obj.at("p1"), "brown_conrady.p1");
    if (obj.contains("p2")) cfg.p2 = parse_range(obj.at("p2"), "brown_conrady.p2");
    const char* snames[] = {"s1", "s2", "s3", "s4"};
    for (int i = 0; i < 4; ++i)
        if (obj.contains(snames[i])) cfg.s[i] = parse_range(obj.at(snames[i]), std::string("brown_conrady.") + snames[i]);
}

inline void parse_fog(const json& obj, const std::string& path, FogConfig& cfg) {
    require_keys(obj, path, {"k0", "visibility", "d_max", "atmo", "jitter"});
    cfg.k0 = get_or(obj, "k0", cfg.k0);
    cfg.visibility = get_or(obj, "visibility", cfg.visibility);
    cfg.d_max = get_or(obj, "d_max", cfg.d_max);
    cfg.jitter = get_or(obj, "jitter", cfg.jitter);
    if (obj.contains("atmo")) {
        const auto& a = obj.at("atmo");
        if (!a.is_array() || a.size() != 3) throw ConfigError(path + ".atmo", "expected [r, g, b]");
        for (int i = 0; i < 3; ++i) cfg.atmo[static_cast<size_t>(i)] = a[static_cast<size_t>(i)].get<double>();
    }
}

}  // namespace detail

inline void GenerationConfig::validate() const {
    if (corruptions.empty()) throw ConfigError("corruptions", "at least one corruption must be selected");
    double wsum = 0.0;
    for (const auto& [name, weight] : corruptions) {
        bool known = false;
        for (const auto& n : corruption_names())
            if (n == name) { known = true; break; }
        if (!known) throw ConfigError("corruptions." + name, "unknown corruption");
        if (weight < 0.0) throw ConfigError("corruptions." + name, "weight must be >= 0");
        wsum += weight;
    }
    if (wsum <= 0.0) throw ConfigError("corruptions", "weights must sum to a positive value");
    if (workers < 1) throw ConfigError("workers", "must be >= 1");
    if (tps.grid < 2) throw ConfigError("tps.grid", "must be >= 2");
    if (grf_warp.corr_length.lo <= 0.0) throw ConfigError("grf_warp.corr_length", "must be positive");
    if (div_free.corr_length.lo <= 0.0) throw ConfigError("div_free.corr_length", "must be positive");
    if (grf_warp.alpha.lo < 0.0) throw ConfigError("grf_warp.alpha", "must be >= 0");
    if (div_free.alpha.lo < 0.0) throw ConfigError("div_free.alpha", "must be >= 0");
    octaves.validate();
    uniform_fog.to_params().validate();
    hetero_fog.to_params().validate();
}

inline GenerationConfig parse_config(const nlohmann::json& root) {
    using detail::get_or;
    detail::require_keys(root, "<root>",
                         {"input_dir", "output_dir", "global_seed", "workers", "emit_visualizations",
                          "emit_transmission", "corruptions", "brown_conrady", "grf_warp", "tps",
                          "div_free", "uniform_fog", "hetero_fog", "octaves", "lens_flare"});
    GenerationConfig cfg;
    cfg.input_dir = get_or<std::string>(root, "input_dir", "");
    cfg.output_dir = get_or<std::string>(root, "output_dir", "");
    cfg.global_seed = get_or<uint64_t>(root, "global_seed", 0);
    cfg.workers = get_or<int>(root, "workers", 1);
    cfg.emit_visualizations = get_or<bool>(root, "emit_visualizations", false);
    cfg.emit_transmission = get_or<bool>(root, "emit_transmission", false);

    if (!root.contains("corruptions")) throw ConfigError("corruptions", "missing");
    const auto& sel = root.at("corruptions");
    if (sel.is_string()) {
        cfg.corruptions[sel.get<std::string>()] = 1.0;
    } else if (sel.is_object()) {
        for (auto it = sel.begin(); it != sel.end(); ++it)
            cfg.corruptions[it.key()] = it.value().get<double>();
    } else {
        throw ConfigError("corruptions", "expected a name or a name->weight object");
    }

    if (root.contains("brown_conrady")) detail::parse_brown_conrady(root.at("brown_conrady"), cfg.brown_conrady);
    if (root.contains("grf_warp")) {
        const auto& o = root.at("grf_warp");
        detail::require_keys(o, "grf_warp", {"corr_length", "alpha"});
        if (o.contains("corr_length")) cfg.grf_warp.corr_length = detail::parse_range(o.at("corr_length"), "grf_warp.corr_length");
        if (o.contains("alpha")) cfg.grf_warp.alpha = detail::parse_range(o.at("alpha"), "grf_warp.alpha");
    }
    if (root.contains("tps")) {
        const auto& o = root.at("tps");
        detail::require_keys(o, "tps", {"grid", "jitter_sigma", "target_sigma"});
        cfg.tps.grid = get_or(o, "grid", cfg.tps.grid);
        cfg.tps.jitter_sigma = get_or(o, "jitter_sigma", cfg.tps.jitter_sigma);
        cfg.tps.target_sigma = get_or(o, "target_sigma", cfg.tps.target_sigma);
    }
    if (root.contains("div_free")) {
        const auto& o = root.at("div_free");
        detail::require_keys(o, "div_free", {"corr_length", "alpha"});
        if (o.contains("corr_length")) cfg.div_free.corr_length = detail::parse_range(o.at("corr_length"), "div_free.corr_length");
        if (o.contains("alpha")) cfg.div_free.alpha = detail::parse_range(o.at("alpha"), "div_free.alpha");
    }
    if (root.contains("uniform_fog")) detail::parse_fog(root.at("uniform_fog"), "uniform_fog", cfg.uniform_fog);
    if (root.contains("hetero_fog")) detail::parse_fog(root.at("hetero_fog"), "hetero_fog", cfg.hetero_fog);
    if (root.contains("octaves")) {
        const auto& o = root.at("octaves");
        detail::require_keys(o, "octaves", {"scales", "weights"});
        if (o.contains("scales")) cfg.octaves.scales = o.at("scales").get<std::vector<double>>();
        if (o.contains("weights")) cfg.octaves.weights = o.at("weights").get<std::vector<double>>();
    }
    if (root.contains("lens_flare")) {
        const auto& o = root.at("lens_flare");
        detail::require_keys(o, "lens_flare", {"rho", "beta"});
        if (o.contains("rho")) cfg.lens_flare.rho = detail::parse_range(o.at("rho"), "lens_flare.rho");
        if (o.contains("beta")) cfg.lens_flare.beta = detail::parse_range(o.at("beta"), "lens_flare.beta");
    }
    cfg.validate();
    return cfg;
}

inline GenerationConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("<file>", std::string("parse error: ") + e.what());
    }
    return parse_config(root);
}

}  // namespace warpkit
