#pragma once

// Experiment configuration: an INI file with [geometry], [kernel], [target],
// [run], [spectrum] and [output] sections. List values are comma separated.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kcurve/curves.hpp"
#include "kcurve/error.hpp"
#include "kcurve/harmonics.hpp"
#include "kcurve/profile.hpp"

namespace kcurve {

struct ExperimentConfig {
    Geometry geometry = Geometry::full(2);
    SpectralProfile profile;
    std::vector<std::int64_t> m_grid;
    int trials = 20;
    std::int64_t test_points = 2000;
    std::uint64_t seed = 0;
    bool fixed_target = false;
    std::size_t norm_samples = 20000;
    int spectrum_degree = 1;
    std::int64_t spectrum_m = 0;  ///< 0: not configured
    std::filesystem::path out_dir = "out";
    std::set<std::string> formats{"csv"};

    bool wants(const std::string& format) const { return formats.count(format) != 0; }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "': expected a number, got '" + s + "'");
}

inline std::int64_t parse_int(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "': expected an integer, got '" + s + "'");
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        if (!s.empty() && s[0] != '-') {
            const unsigned long long v = std::stoull(s, &pos);
            if (pos == s.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("'" + key + "': expected an unsigned 64-bit integer, got '" + s + "'");
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("'" + key + "': expected true/false, got '" + s + "'");
}

class Section {
public:
    Section(const boost::property_tree::ptree& root, std::string name) : name_(std::move(name)) {
        if (auto child = root.get_child_optional(name_)) tree_ = *child;
    }

    std::optional<std::string> get(const std::string& key) const {
        if (auto v = tree_.get_optional<std::string>(key)) return trim(*v);
        return std::nullopt;
    }

    std::string require(const std::string& key) const {
        if (auto v = get(key)) return *v;
        throw ConfigError("missing [" + name_ + "] " + key);
    }

    std::string qualified(const std::string& key) const { return name_ + "." + key; }

private:
    std::string name_;
    boost::property_tree::ptree tree_;
};

inline std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "': empty list");
    return out;
}

}  // namespace detail

inline std::set<std::string> parse_formats(const std::string& s) {
    std::set<std::string> out;
    for (const auto& f : detail::split_list(s)) {
        if (f != "csv" && f != "json" && f != "svg") throw ConfigError("unknown output format '" + f + "'");
        out.insert(f);
    }
    if (out.empty()) throw ConfigError("empty output format list");
    return out;
}

inline ExperimentConfig parse_config(std::istream& in) {
    boost::property_tree::ptree root;
    try {
        boost::property_tree::ini_parser::read_ini(in, root);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    using detail::parse_double;
    using detail::parse_int;

    ExperimentConfig cfg;

    const detail::Section geo(root, "geometry");
    const std::string kind = geo.get("kind").value_or("full");
    try {
        if (kind == "full") {
            cfg.geometry = Geometry::full(static_cast<int>(parse_int(geo.qualified("d"), geo.require("d"))));
        } else if (kind == "patched") {
            cfg.geometry = Geometry::patched(static_cast<int>(parse_int(geo.qualified("d0"), geo.require("d0"))),
                                             static_cast<int>(parse_int(geo.qualified("p"), geo.require("p"))));
        } else {
            throw ConfigError("[geometry] kind must be 'full' or 'patched', got '" + kind + "'");
        }
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }

    const detail::Section kernel(root, "kernel");
    const auto gap = kernel.get("gap");
    const auto h2 = kernel.get("h2");
    if (gap.has_value() == h2.has_value()) throw ConfigError("[kernel] needs exactly one of 'gap' or 'h2'");
    std::optional<int> k_max;
    if (auto v = kernel.get("k_max")) k_max = static_cast<int>(parse_int(kernel.qualified("k_max"), *v));
    if (h2) {
        cfg.profile.h2 = detail::parse_double_list(kernel.qualified("h2"), *h2);
        if (k_max && *k_max != static_cast<int>(cfg.profile.h2.size()))
            throw ConfigError("[kernel] k_max disagrees with the length of h2");
        k_max = static_cast<int>(cfg.profile.h2.size());
    } else {
        const int k = k_max.value_or(7);
        if (k < 1) throw ConfigError("[kernel] k_max must be >= 1");
        const double g = parse_double(kernel.qualified("gap"), *gap);
        if (!(g > 0.0)) throw ConfigError("[kernel] gap must be > 0");
        cfg.profile.h2 = gap_profile(g, k).h2;
        k_max = k;
    }
    cfg.profile.lambda = parse_double(kernel.qualified("lambda"), kernel.get("lambda").value_or("0"));

    const detail::Section target(root, "target");
    const auto f2 = target.get("F2");
    const auto exponent = target.get("exponent");
    if (f2.has_value() == exponent.has_value())
        throw ConfigError("[target] needs exactly one of 'F2' or 'exponent'");
    if (f2) {
        cfg.profile.F2 = detail::parse_double_list(target.qualified("F2"), *f2);
        if (static_cast<int>(cfg.profile.F2.size()) != *k_max)
            throw ConfigError("[target] F2 length must equal the kernel's k_max");
    } else {
        cfg.profile.F2 = gap_profile(1.0, *k_max, parse_double(target.qualified("exponent"), *exponent)).F2;
    }
    cfg.profile.noise = parse_double(target.qualified("noise"), target.get("noise").value_or("0"));
    try {
        cfg.profile.validate();
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }

    const detail::Section run(root, "run");
    if (auto grid = run.get("m_grid")) {
        for (const auto& item : detail::split_list(*grid)) cfg.m_grid.push_back(parse_int(run.qualified("m_grid"), item));
        if (run.get("m_min") || run.get("m_max") || run.get("m_count"))
            throw ConfigError("[run] give either m_grid or m_min/m_max/m_count, not both");
    } else if (run.get("m_min") || run.get("m_max") || run.get("m_count")) {
        const auto lo = parse_int(run.qualified("m_min"), run.require("m_min"));
        const auto hi = parse_int(run.qualified("m_max"), run.require("m_max"));
        const auto count = parse_int(run.qualified("m_count"), run.require("m_count"));
        try {
            cfg.m_grid = log_grid(lo, hi, static_cast<int>(count));
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        }
    }
    for (std::size_t i = 0; i < cfg.m_grid.size(); ++i) {
        if (cfg.m_grid[i] < 1) throw ConfigError("[run] m_grid entries must be >= 1");
        if (i > 0 && cfg.m_grid[i] <= cfg.m_grid[i - 1]) throw ConfigError("[run] m_grid must be strictly increasing");
    }
    if (auto v = run.get("trials")) cfg.trials = static_cast<int>(parse_int(run.qualified("trials"), *v));
    if (auto v = run.get("test_points")) cfg.test_points = parse_int(run.qualified("test_points"), *v);
    if (auto v = run.get("seed")) cfg.seed = detail::parse_u64(run.qualified("seed"), *v);
    if (auto v = run.get("fixed_target")) cfg.fixed_target = detail::parse_bool(run.qualified("fixed_target"), *v);
    if (auto v = run.get("norm_samples"))
        cfg.norm_samples = static_cast<std::size_t>(parse_int(run.qualified("norm_samples"), *v));
    if (cfg.trials < 1) throw ConfigError("[run] trials must be >= 1");
    if (cfg.test_points < 1) throw ConfigError("[run] test_points must be >= 1");
    if (cfg.norm_samples < 10000) throw ConfigError("[run] norm_samples must be >= 10000");

    const detail::Section spectrum(root, "spectrum");
    if (auto v = spectrum.get("degree")) cfg.spectrum_degree = static_cast<int>(parse_int(spectrum.qualified("degree"), *v));
    if (auto v = spectrum.get("m")) cfg.spectrum_m = parse_int(spectrum.qualified("m"), *v);

    const detail::Section output(root, "output");
    if (auto v = output.get("directory")) cfg.out_dir = *v;
    if (auto v = output.get("formats")) cfg.formats = parse_formats(*v);
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in);
}

}  // namespace kcurve
