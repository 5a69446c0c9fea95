#pragma once

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "voxelopt/features.hpp"
#include "voxelopt/level_solver.hpp"
#include "voxelopt/pyramid.hpp"

namespace voxelopt {

/// Feature-extraction knobs that ride along with the registration config.
struct FeatureOptions {
    FeatureMode mode = FeatureMode::raw;
    double window_lo = -800.0;  // CT intensity clip window for raw features
    double window_hi = 500.0;
    double mind_sigma_patch = 0.5;
    bool external_zscore = false;
};

struct FullConfig {
    RegistrationConfig reg;
    FeatureOptions features;
};

namespace detail {

[[noreturn]] inline void config_error(const std::string& key, const std::string& why) {
    throw std::invalid_argument("config: key \"" + key + "\": " + why);
}

inline double get_number(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number()) config_error(key, "expected a number");
    return j.get<double>();
}

inline int get_int(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number_integer()) config_error(key, "expected an integer");
    return j.get<int>();
}

inline bool get_bool(const nlohmann::json& j, const std::string& key) {
    if (!j.is_boolean()) config_error(key, "expected a boolean");
    return j.get<bool>();
}

}  // namespace detail

/// Parses a JSON config document. Every field is optional and defaults to
/// the stock settings (5 levels, k=1, alpha=1.5, beta=0.1, 7 integration
/// steps, theta {150,50,15,5,1.5,0.5}, adaptive and prefilter on, raw
/// features with CT window [-800,500]). Unknown keys are rejected.
inline FullConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    static const std::set<std::string> known = {
        "levels",     "kernel_size",       "alpha",
        "beta",       "thetas",            "iterations",
        "integration_steps",               "adaptive",
        "prefilter",  "feature",           "intensity_window",
        "mind_sigma_patch",                "external_zscore"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known.count(key)) throw std::invalid_argument("config: unknown key \"" + key + "\"");
    }

    FullConfig cfg;
    if (doc.contains("levels")) {
        cfg.reg.levels = detail::get_int(doc["levels"], "levels");
        if (cfg.reg.levels < 1) detail::config_error("levels", "must be >= 1");
    }
    if (doc.contains("kernel_size")) {
        cfg.reg.level.k = detail::get_int(doc["kernel_size"], "kernel_size");
        if (cfg.reg.level.k < 1) detail::config_error("kernel_size", "must be >= 1");
    }
    if (doc.contains("alpha")) {
        cfg.reg.level.alpha = detail::get_number(doc["alpha"], "alpha");
        if (!(cfg.reg.level.alpha > 0)) detail::config_error("alpha", "must be > 0");
    }
    if (doc.contains("beta")) {
        cfg.reg.level.beta = detail::get_number(doc["beta"], "beta");
        if (!(cfg.reg.level.beta > 0)) detail::config_error("beta", "must be > 0");
    }
    if (doc.contains("thetas") && doc.contains("iterations"))
        detail::config_error("iterations", "cannot be combined with an explicit \"thetas\" list");
    if (doc.contains("thetas")) {
        if (!doc["thetas"].is_array() || doc["thetas"].empty())
            detail::config_error("thetas", "expected a non-empty array of numbers");
        ThetaSchedule s;
        for (const auto& v : doc["thetas"]) s.values.push_back(detail::get_number(v, "thetas"));
        try {
            validate(s);
        } catch (const std::exception& e) {
            detail::config_error("thetas", e.what());
        }
        cfg.reg.level.thetas = s;
    }
    if (doc.contains("iterations")) {
        const int iters = detail::get_int(doc["iterations"], "iterations");
        if (iters < 1) detail::config_error("iterations", "must be >= 1");
        cfg.reg.level.thetas = theta_schedule(iters);
    }
    if (doc.contains("integration_steps")) {
        cfg.reg.integration_steps = detail::get_int(doc["integration_steps"], "integration_steps");
        if (cfg.reg.integration_steps < 1) detail::config_error("integration_steps", "must be >= 1");
    }
    if (doc.contains("adaptive")) cfg.reg.level.adaptive = detail::get_bool(doc["adaptive"], "adaptive");
    if (doc.contains("prefilter"))
        cfg.reg.level.prefilter = detail::get_bool(doc["prefilter"], "prefilter");
    if (doc.contains("feature")) {
        const auto& f = doc["feature"];
        if (!f.is_string()) detail::config_error("feature", "expected \"raw\", \"mind\" or \"external\"");
        const std::string mode = f.get<std::string>();
        if (mode == "raw")
            cfg.features.mode = FeatureMode::raw;
        else if (mode == "mind")
            cfg.features.mode = FeatureMode::mind;
        else if (mode == "external")
            cfg.features.mode = FeatureMode::external;
        else
            detail::config_error("feature", "expected \"raw\", \"mind\" or \"external\", got \"" + mode + "\"");
    }
    if (doc.contains("intensity_window")) {
        const auto& w = doc["intensity_window"];
        if (!w.is_array() || w.size() != 2)
            detail::config_error("intensity_window", "expected [lo, hi]");
        cfg.features.window_lo = detail::get_number(w[0], "intensity_window");
        cfg.features.window_hi = detail::get_number(w[1], "intensity_window");
        if (!(cfg.features.window_lo < cfg.features.window_hi))
            detail::config_error("intensity_window", "lo must be < hi");
    }
    if (doc.contains("mind_sigma_patch")) {
        cfg.features.mind_sigma_patch = detail::get_number(doc["mind_sigma_patch"], "mind_sigma_patch");
        if (!(cfg.features.mind_sigma_patch > 0)) detail::config_error("mind_sigma_patch", "must be > 0");
    }
    if (doc.contains("external_zscore"))
        cfg.features.external_zscore = detail::get_bool(doc["external_zscore"], "external_zscore");

    cfg.reg.feature_mode = cfg.features.mode;
    return cfg;
}

inline FullConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open config file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": malformed JSON: " + e.what());
    }
    return parse_config(doc);
}

/// Config echo for run reports.
inline nlohmann::json config_to_json(const FullConfig& cfg) {
    nlohmann::json j;
    j["levels"] = cfg.reg.levels;
    j["kernel_size"] = cfg.reg.level.k;
    j["alpha"] = cfg.reg.level.alpha;
    j["beta"] = cfg.reg.level.beta;
    j["thetas"] = cfg.reg.level.thetas.values;
    j["integration_steps"] = cfg.reg.integration_steps;
    j["adaptive"] = cfg.reg.level.adaptive;
    j["prefilter"] = cfg.reg.level.prefilter;
    switch (cfg.features.mode) {
        case FeatureMode::raw: j["feature"] = "raw"; break;
        case FeatureMode::mind: j["feature"] = "mind"; break;
        case FeatureMode::external: j["feature"] = "external"; break;
    }
    j["intensity_window"] = {cfg.features.window_lo, cfg.features.window_hi};
    j["mind_sigma_patch"] = cfg.features.mind_sigma_patch;
    j["external_zscore"] = cfg.features.external_zscore;
    return j;
}

}  // namespace voxelopt
