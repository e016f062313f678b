#pragma once

// Implementations of the CLI subcommands. Each writes its files into the
// configured output directory and returns a process exit status; configuration
// problems surface as ConfigError (exit 2), numerical failures as exit 3.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kcurve/config.hpp"
#include "kcurve/curves.hpp"
#include "kcurve/error.hpp"
#include "kcurve/sim.hpp"
#include "kcurve/svg.hpp"

namespace kcurve {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Largest training-set size accepted by simulate.
inline constexpr std::int64_t kMaxTrainSize = 25000;

struct RunOptions {
    int threads = 1;
    double budget_seconds = 3600.0;  ///< <= 0 disables the guard
};

/// Lossless double formatting (17 significant digits).
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::vector<double> column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("CSV is missing column '" + name + "'");
        const auto idx = static_cast<std::size_t>(it - header.begin());
        std::vector<double> out;
        for (const auto& row : rows) {
            if (idx >= row.size()) throw ConfigError("CSV row too short");
            const char* s = row[idx].c_str();
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end == s || *end != '\0') throw ConfigError("CSV value '" + row[idx] + "' is not a number");
            out.push_back(v);
        }
        return out;
    }

    bool has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw ConfigError(path.string() + " is empty");
    return t;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<double> as_doubles(const std::vector<std::int64_t>& v) {
    return {v.begin(), v.end()};
}

}  // namespace detail

inline std::string theory_csv(const LearningCurve& curve) {
    std::string out = "m,bias,variance,total\n";
    for (const auto& p : curve.points)
        out += std::to_string(p.m) + ',' + format_double(p.bias) + ',' + format_double(p.variance) + ',' +
               format_double(p.total) + '\n';
    return out;
}

inline int cmd_theory(const ExperimentConfig& cfg) {
    if (cfg.m_grid.empty()) throw ConfigError("[run] m grid is empty");
    const LearningCurve curve = learning_curve(cfg.profile, cfg.geometry, cfg.m_grid);
    detail::write_text(cfg.out_dir / "theory.csv", theory_csv(curve));
    if (cfg.wants("json")) {
        nlohmann::json j;
        j["geometry"] = cfg.geometry.describe();
        for (const auto& p : curve.points)
            j["points"].push_back({{"m", p.m}, {"bias", p.bias}, {"variance", p.variance}, {"total", p.total}});
        detail::write_text(cfg.out_dir / "theory.json", j.dump(2) + "\n");
    }
    if (cfg.wants("svg")) {
        svg::Plot plot("Learning curve, " + cfg.geometry.describe(), "m", "test error", true, true);
        svg::Series total{"total", "#1f77b4", {}, {}, {}, false, true};
        svg::Series bias{"bias", "#2ca02c", {}, {}, {}, false, true};
        svg::Series var{"variance", "#d62728", {}, {}, {}, false, true};
        for (const auto& p : curve.points) {
            const double m = static_cast<double>(p.m);
            total.x.push_back(m), total.y.push_back(p.total);
            bias.x.push_back(m), bias.y.push_back(p.bias);
            var.x.push_back(m), var.y.push_back(p.variance);
        }
        plot.add(total);
        plot.add(bias);
        plot.add(var);
        detail::write_text(cfg.out_dir / "theory.svg", plot.render());
    }
    return kExitOk;
}

/// Rough single-thread cost model for a simulate run, in seconds.
inline double estimate_simulation_seconds(const ExperimentConfig& cfg, double flops_per_second = 1e9) {
    const double d = cfg.geometry.dim();
    const double k = cfg.profile.k_max();
    const double test = static_cast<double>(cfg.test_points);
    double flops = 0.0;
    for (std::int64_t mi : cfg.m_grid) {
        const double m = static_cast<double>(mi);
        const double per_trial = m * m * m / 3.0 + (m * m / 2.0 + m * test) * (d + 4.0 * k) +
                                 (static_cast<double>(cfg.norm_samples) + m + test) * d * k * k;
        flops += per_trial * cfg.trials;
    }
    return flops / flops_per_second;
}

inline std::string empirical_csv_row(std::int64_t m, const MseResult& r) {
    return std::to_string(m) + ',' + format_double(r.mean) + ',' + format_double(r.std) + ',' +
           std::to_string(r.trials) + ',' + format_double(r.jitter_used) + '\n';
}

inline int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    if (cfg.m_grid.empty()) throw ConfigError("[run] m grid is empty");
    if (cfg.m_grid.back() > kMaxTrainSize)
        throw ConfigError("m = " + std::to_string(cfg.m_grid.back()) + " exceeds the desk-scale ceiling " +
                          std::to_string(kMaxTrainSize));
    if (cfg.profile.k_max() > cfg.geometry.patch_dim())
        throw ConfigError("k_max exceeds the patch dimension; targets need k <= d0");
    if (opts.budget_seconds > 0.0) {
        const double estimate = estimate_simulation_seconds(cfg);
        if (estimate > opts.budget_seconds)
            throw ConfigError("estimated run time " + format_double(estimate) + " s exceeds --budget-seconds " +
                              format_double(opts.budget_seconds));
    }

    SimOptions sim;
    sim.threads = opts.threads;
    sim.fixed_target = cfg.fixed_target;
    sim.norm_samples = cfg.norm_samples;

    std::string csv = "m,mse_mean,mse_std,trials,jitter_used\n";
    nlohmann::json rows = nlohmann::json::array();
    std::vector<double> ms, means, stds;
    std::size_t failures = 0;
    for (std::int64_t m : cfg.m_grid) {
        try {
            const MseResult r = empirical_mse(cfg.profile, cfg.geometry, m, cfg.trials, cfg.test_points, cfg.seed, sim);
            csv += empirical_csv_row(m, r);
            rows.push_back({{"m", m},
                            {"mse_mean", r.mean},
                            {"mse_std", r.std},
                            {"q25", r.q25},
                            {"median", r.median},
                            {"q75", r.q75},
                            {"trials", r.trials},
                            {"jitter_used", r.jitter_used}});
            ms.push_back(static_cast<double>(m));
            means.push_back(r.mean);
            stds.push_back(r.std);
        } catch (const ArgumentError& e) {
            throw ConfigError(e.what());
        } catch (const std::exception& e) {
            ++failures;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            csv += std::to_string(m) + ',' + format_double(nan) + ',' + format_double(nan) + ',' +
                   std::to_string(cfg.trials) + ',' + format_double(nan) + '\n';
            rows.push_back({{"m", m}, {"error", e.what()}});
        }
    }
    detail::write_text(cfg.out_dir / "empirical.csv", csv);
    if (cfg.wants("json")) {
        nlohmann::json j;
        j["geometry"] = cfg.geometry.describe();
        j["seed"] = cfg.seed;
        j["rows"] = rows;
        detail::write_text(cfg.out_dir / "empirical.json", j.dump(2) + "\n");
    }
    if (cfg.wants("svg")) {
        svg::Plot plot("Kernel regression test error, " + cfg.geometry.describe(), "m", "MSE", true, true);
        plot.add(svg::Series{"simulation", "#ff7f0e", ms, means, stds, true, false});
        detail::write_text(cfg.out_dir / "empirical.svg", plot.render());
    }
    return failures == cfg.m_grid.size() ? kExitNumerical : kExitOk;
}

inline std::string spectrum_csv(const SpectrumResult& s) {
    std::string out;
    for (double e : s.eigenvalues) out += format_double(e) + '\n';
    return out;
}

inline int cmd_spectrum(const ExperimentConfig& cfg) {
    if (cfg.spectrum_m < 2) throw ConfigError("spectrum needs m >= 2 ([spectrum] m or --m)");
    if (cfg.spectrum_degree < 1 || cfg.spectrum_degree > cfg.profile.k_max())
        throw ConfigError("spectrum degree must lie in 1..k_max");
    const Dataset data = sample_sphere(cfg.geometry, cfg.spectrum_m, cfg.seed);
    const SpectrumResult s = empirical_spectrum(data, cfg.spectrum_degree);

    detail::write_text(cfg.out_dir / "spectrum.csv", spectrum_csv(s));
    nlohmann::json j{{"alpha_used", s.ratio},
                     {"ks", s.ks},
                     {"m", s.m},
                     {"N_r", s.n_r},
                     {"degree", s.degree},
                     {"geometry", s.geometry.describe()},
                     {"seed", cfg.seed}};
    detail::write_text(cfg.out_dir / "spectrum.json", j.dump(2) + "\n");

    if (cfg.wants("svg")) {
        const MarchenkoPastur mp(s.ratio);
        std::vector<double> nonzero;
        for (double e : s.eigenvalues)
            if (e > 0.0) nonzero.push_back(e);
        const double lo = std::min(mp.alpha_minus, nonzero.empty() ? mp.alpha_minus : nonzero.front());
        const double hi = std::max(mp.alpha_plus, nonzero.empty() ? mp.alpha_plus : nonzero.back());
        const int bins = 40;
        const double width = (hi - lo) / bins;
        svg::Bars bars;
        std::vector<double> counts(bins, 0.0);
        for (double e : nonzero) {
            auto b = static_cast<int>((e - lo) / width);
            counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))] += 1.0;
        }
        for (int b = 0; b < bins; ++b) {
            bars.left.push_back(lo + b * width);
            bars.right.push_back(lo + (b + 1) * width);
            bars.height.push_back(counts[static_cast<std::size_t>(b)] / (static_cast<double>(s.m) * width));
        }
        svg::Series density{"Marchenko-Pastur", "#d62728", {}, {}, {}, false, true};
        for (int i = 0; i <= 400; ++i) {
            const double t = lo + (hi - lo) * i / 400.0;
            density.x.push_back(t);
            density.y.push_back(mp_pdf(mp, t));
        }
        std::ostringstream title;
        title << "degree " << s.degree << ", " << s.geometry.describe() << ", m=" << s.m << ", ratio=" << s.ratio
              << ", KS=" << s.ks << ", atom at 0: " << mp.point_mass;
        svg::Plot plot(title.str(), "eigenvalue", "density", false, false);
        plot.add(bars);
        plot.add(density);
        detail::write_text(cfg.out_dir / "spectrum.svg", plot.render());
    }
    return kExitOk;
}

struct CompareOptions {
    std::filesystem::path out_dir = "out";
    double m_floor = 30.0;
    bool svg = false;
};

struct CompareReport {
    std::vector<double> m, theory, empirical, deviation;
    std::vector<bool> absolute;
    double median_all = 0.0;
    double median_above_floor = 0.0;
    double max_above_floor = 0.0;
};

inline CompareReport compare_curves(const std::vector<double>& m, const std::vector<double>& theory,
                                    const std::vector<double>& m_emp, const std::vector<double>& empirical,
                                    double m_floor) {
    if (m != m_emp) throw ConfigError("theory and empirical files have different m grids");
    CompareReport r;
    r.m = m;
    r.theory = theory;
    r.empirical = empirical;
    std::vector<double> all, above;
    r.max_above_floor = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const bool abs_mode = theory[i] == 0.0;
        const double dev = abs_mode ? std::abs(empirical[i] - theory[i])
                                    : std::abs(empirical[i] - theory[i]) / std::abs(theory[i]);
        r.deviation.push_back(dev);
        r.absolute.push_back(abs_mode);
        if (std::isnan(dev)) continue;
        all.push_back(dev);
        if (m[i] >= m_floor) {
            above.push_back(dev);
            r.max_above_floor = std::max(r.max_above_floor, dev);
        }
    }
    r.median_all = detail::median(all);
    r.median_above_floor = detail::median(above);
    return r;
}

inline int cmd_compare(const std::filesystem::path& theory_path, const std::filesystem::path& empirical_path,
                       const CompareOptions& opts) {
    const auto theory = detail::read_csv(theory_path);
    const auto emp = detail::read_csv(empirical_path);
    const auto m_t = theory.column("m");
    const auto m_e = emp.column("m");
    const CompareReport r = compare_curves(m_t, theory.column("total"), m_e, emp.column("mse_mean"), opts.m_floor);

    nlohmann::json j;
    j["m_floor"] = opts.m_floor;
    j["median_deviation"] = r.median_all;
    j["median_deviation_above_floor"] = r.median_above_floor;
    j["max_deviation_above_floor"] = r.max_above_floor;
    j["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.m.size(); ++i) {
        nlohmann::json p{{"m", static_cast<std::int64_t>(r.m[i])},
                         {"theory", r.theory[i]},
                         {"empirical", r.empirical[i]},
                         {"absolute", r.absolute[i]}};
        p["deviation"] = std::isnan(r.deviation[i]) ? nlohmann::json(nullptr) : nlohmann::json(r.deviation[i]);
        j["points"].push_back(p);
    }
    detail::write_text(opts.out_dir / "compare.json", j.dump(2) + "\n");

    if (opts.svg) {
        svg::Plot plot("Theory vs simulation", "m", "test error", true, true);
        plot.add(svg::Series{"theory", "#1f77b4", r.m, r.theory, {}, false, true});
        std::vector<double> err = emp.has("mse_std") ? emp.column("mse_std") : std::vector<double>{};
        plot.add(svg::Series{"simulation", "#ff7f0e", r.m, r.empirical, err, true, false});
        detail::write_text(opts.out_dir / "compare.svg", plot.render());
    }
    return kExitOk;
}

}  // namespace kcurve
