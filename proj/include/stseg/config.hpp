#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stseg/common.hpp"

namespace stseg {

// All pipeline tunables.  Every field maps 1:1 to a config-file key and a CLI
// flag of the same name; parsing goes through a single setter table so the two
// entry points cannot drift apart.
struct PipelineConfig {
    // PMI affinity model
    double rho = 1.25;
    int samples = 10000;
    double d0 = 1.0;
    double d_max = 8.0;
    double mu_d = 2.0;
    double sigma_d = 1.5;
    int grid = 64;

    // graph construction
    double r_intra = 5.0;
    double r_inter = 3.0;
    double clamp_log = 10.0;
    std::string temporal_boundary = "reflect";  // reflect | open

    // multiscale / windows
    std::vector<double> scales = {1.0, 0.5, 0.25};
    std::vector<int> windows = {5, 3, 3};
    std::vector<double> scale_weights = {0.5, 0.3, 0.2};
    bool full_video = false;

    // eigensolver
    int k = 20;
    double tol = 1e-6;
    int max_ops = 2000;
    int block_pad = 8;

    // pre-grouping reduction (finest scale only)
    bool reduction = true;
    double target_reduction = 13.0;
    double theta_b = -1.0;  // <0: auto via bisection toward target_reduction
    double prior_sigma = 1.5;
    double prior_smooth_sigma = 1.0;

    // oriented boundaries
    double sigma_f = 1.5;
    double lambda_floor = 1e-8;
    double percentile = 0.999;
    double temporal_anisotropy = 1.0;

    // hierarchy / output
    int levels = 51;

    // evaluation
    double tol_px = -1.0;  // <0: 0.0075 * frame diagonal

    // execution
    std::uint64_t seed = 7;
    int jobs = 4;

    void set(const std::string& key, const std::string& value);
    void validate() const;
    nlohmann::json to_json() const;

    static PipelineConfig from_file(const std::string& path);
    static PipelineConfig from_json(const nlohmann::json& j);
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected number, got '" + value + "'");
    }
}

inline long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected integer, got '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw ConfigError("key '" + key + "': expected boolean, got '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(value);
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const auto& item : split_list(value))
        out.push_back(static_cast<int>(parse_int(key, item)));
    return out;
}

}  // namespace detail

inline void PipelineConfig::set(const std::string& key, const std::string& value) {
    using namespace detail;
    if (key == "rho") rho = parse_double(key, value);
    else if (key == "samples") samples = static_cast<int>(parse_int(key, value));
    else if (key == "d0") d0 = parse_double(key, value);
    else if (key == "d_max") d_max = parse_double(key, value);
    else if (key == "mu_d") mu_d = parse_double(key, value);
    else if (key == "sigma_d") sigma_d = parse_double(key, value);
    else if (key == "grid") grid = static_cast<int>(parse_int(key, value));
    else if (key == "r_intra") r_intra = parse_double(key, value);
    else if (key == "r_inter") r_inter = parse_double(key, value);
    else if (key == "clamp_log") clamp_log = parse_double(key, value);
    else if (key == "temporal_boundary") temporal_boundary = value;
    else if (key == "scales") scales = parse_double_list(key, value);
    else if (key == "windows") windows = parse_int_list(key, value);
    else if (key == "scale_weights") scale_weights = parse_double_list(key, value);
    else if (key == "full_video") full_video = parse_bool(key, value);
    else if (key == "k") k = static_cast<int>(parse_int(key, value));
    else if (key == "tol") tol = parse_double(key, value);
    else if (key == "max_ops") max_ops = static_cast<int>(parse_int(key, value));
    else if (key == "block_pad") block_pad = static_cast<int>(parse_int(key, value));
    else if (key == "reduction") reduction = parse_bool(key, value);
    else if (key == "target_reduction") target_reduction = parse_double(key, value);
    else if (key == "theta_b") theta_b = parse_double(key, value);
    else if (key == "prior_sigma") prior_sigma = parse_double(key, value);
    else if (key == "prior_smooth_sigma") prior_smooth_sigma = parse_double(key, value);
    else if (key == "sigma_f") sigma_f = parse_double(key, value);
    else if (key == "lambda_floor") lambda_floor = parse_double(key, value);
    else if (key == "percentile") percentile = parse_double(key, value);
    else if (key == "temporal_anisotropy") temporal_anisotropy = parse_double(key, value);
    else if (key == "levels") levels = static_cast<int>(parse_int(key, value));
    else if (key == "tol_px") tol_px = parse_double(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "jobs") jobs = static_cast<int>(parse_int(key, value));
    else throw ConfigError("unknown config key '" + key + "'");
}

inline void PipelineConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    require(rho > 0.0, "rho must be positive");
    require(samples > 0, "samples must be positive");
    require(d0 > 0.0, "d0 must be positive");
    require(d_max >= d0, "d_max must be >= d0");
    require(sigma_d > 0.0, "sigma_d must be positive");
    require(grid >= 4, "grid must be at least 4");
    require(r_intra >= 1.0, "r_intra must be at least 1");
    require(r_inter >= 1.0, "r_inter must be at least 1");
    require(clamp_log > 0.0, "clamp_log must be positive");
    require(temporal_boundary == "reflect" || temporal_boundary == "open",
            "temporal_boundary must be 'reflect' or 'open'");
    require(!scales.empty(), "scales must not be empty");
    require(scales[0] == 1.0, "first scale must be 1");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const double inv = 1.0 / scales[i];
        require(scales[i] > 0.0 && scales[i] <= 1.0 &&
                    std::abs(inv - std::round(inv)) < 1e-9,
                "each scale must be the reciprocal of a positive integer");
        if (i > 0) require(scales[i] < scales[i - 1], "scales must be strictly decreasing");
    }
    require(windows.size() == scales.size(), "windows must have one entry per scale");
    for (int w : windows) require(w >= 1, "window lengths must be at least 1");
    require(scale_weights.size() == scales.size(),
            "scale_weights must have one entry per scale");
    double wsum = 0.0;
    for (double w : scale_weights) {
        require(w >= 0.0, "scale weights must be non-negative");
        wsum += w;
    }
    require(wsum > 0.0, "scale weights must not all be zero");
    require(k >= 1, "k must be at least 1");
    require(tol > 0.0, "tol must be positive");
    require(max_ops >= 1, "max_ops must be at least 1");
    require(block_pad >= 0, "block_pad must be non-negative");
    require(target_reduction >= 1.0, "target_reduction must be at least 1");
    require(prior_sigma > 0.0, "prior_sigma must be positive");
    require(prior_smooth_sigma > 0.0, "prior_smooth_sigma must be positive");
    require(sigma_f > 0.0, "sigma_f must be positive");
    require(lambda_floor >= 0.0, "lambda_floor must be non-negative");
    require(percentile > 0.0 && percentile <= 1.0, "percentile must be in (0, 1]");
    require(temporal_anisotropy > 0.0, "temporal_anisotropy must be positive");
    require(levels >= 2, "levels must be at least 2");
    require(jobs >= 1, "jobs must be at least 1");
}

inline nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["rho"] = rho;
    j["samples"] = samples;
    j["d0"] = d0;
    j["d_max"] = d_max;
    j["mu_d"] = mu_d;
    j["sigma_d"] = sigma_d;
    j["grid"] = grid;
    j["r_intra"] = r_intra;
    j["r_inter"] = r_inter;
    j["clamp_log"] = clamp_log;
    j["temporal_boundary"] = temporal_boundary;
    j["scales"] = scales;
    j["windows"] = windows;
    j["scale_weights"] = scale_weights;
    j["full_video"] = full_video;
    j["k"] = k;
    j["tol"] = tol;
    j["max_ops"] = max_ops;
    j["block_pad"] = block_pad;
    j["reduction"] = reduction;
    j["target_reduction"] = target_reduction;
    j["theta_b"] = theta_b;
    j["prior_sigma"] = prior_sigma;
    j["prior_smooth_sigma"] = prior_smooth_sigma;
    j["sigma_f"] = sigma_f;
    j["lambda_floor"] = lambda_floor;
    j["percentile"] = percentile;
    j["temporal_anisotropy"] = temporal_anisotropy;
    j["levels"] = levels;
    j["tol_px"] = tol_px;
    j["seed"] = seed;
    j["jobs"] = jobs;
    return j;
}

inline PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        cfg.set(key, value);
    }
    return cfg;
}

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const nlohmann::json& v = it.value();
        std::string text;
        if (v.is_string()) {
            text = v.get<std::string>();
        } else if (v.is_array()) {
            std::ostringstream os;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) os << ',';
                os << v[i].dump();
            }
            text = os.str();
        } else {
            text = v.dump();
        }
        cfg.set(it.key(), text);
    }
    return cfg;
}

}  // namespace stseg
