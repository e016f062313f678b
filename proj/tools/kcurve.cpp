#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kcurve/commands.hpp"
#include "kcurve/config.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string formats;
    std::optional<int> degree;
    std::optional<std::int64_t> m;
};

kcurve::ExperimentConfig resolve(const Overrides& o) {
    kcurve::ExperimentConfig cfg = kcurve::load_config(o.config);
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) {
        if (*o.trials < 1) throw kcurve::ConfigError("--trials must be >= 1");
        cfg.trials = *o.trials;
    }
    if (!o.formats.empty()) cfg.formats = kcurve::parse_formats(o.formats);
    if (o.degree) cfg.spectrum_degree = *o.degree;
    if (o.m) cfg.spectrum_m = *o.m;
    return cfg;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "experiment config (INI)")->required();
    cmd->add_option("--out", o.out, "output directory (overrides [output] directory)");
    cmd->add_option("--seed", o.seed, "base seed (u64)");
    cmd->add_option("--format", o.formats, "comma-separated subset of csv,json,svg");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning curves of dot-product and one-layer convolutional kernel regression"};
    app.require_subcommand(1);

    Overrides o;
    kcurve::RunOptions run;
    kcurve::CompareOptions cmp;
    std::string theory_csv, empirical_csv, compare_formats, compare_out;

    auto* theory = app.add_subcommand("theory", "closed-form learning curve -> theory.csv");
    add_common(theory, o);

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo kernel regression -> empirical.csv");
    add_common(simulate, o);
    simulate->add_option("--trials", o.trials, "trials per m");
    simulate->add_option("--threads", run.threads, "concurrent trials")->check(CLI::PositiveNumber);
    simulate->add_option("--budget-seconds", run.budget_seconds, "refuse grids whose estimated cost exceeds this (0: off)");

    auto* spectrum = app.add_subcommand("spectrum", "empirical spectrum vs Marchenko-Pastur -> spectrum.csv/json");
    add_common(spectrum, o);
    spectrum->add_option("--degree", o.degree, "harmonic degree r");
    spectrum->add_option("--m", o.m, "number of samples");

    auto* compare = app.add_subcommand("compare", "theory vs simulation -> compare.json");
    compare->add_option("theory", theory_csv, "theory.csv")->required();
    compare->add_option("empirical", empirical_csv, "empirical.csv")->required();
    compare->add_option("--out", compare_out, "output directory");
    compare->add_option("--m-floor", cmp.m_floor, "median/max are also reported over m >= floor");
    compare->add_option("--format", compare_formats, "comma-separated subset of csv,json,svg");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kcurve::kExitConfig;
    }

    try {
        if (*theory) return kcurve::cmd_theory(resolve(o));
        if (*simulate) return kcurve::cmd_simulate(resolve(o), run);
        if (*spectrum) return kcurve::cmd_spectrum(resolve(o));
        if (*compare) {
            cmp.out_dir = compare_out.empty() ? std::filesystem::path(".") : std::filesystem::path(compare_out);
            if (!compare_formats.empty()) cmp.svg = kcurve::parse_formats(compare_formats).count("svg") != 0;
            return kcurve::cmd_compare(theory_csv, empirical_csv, cmp);
        }
    } catch (const kcurve::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kcurve::kExitConfig;
    } catch (const kcurve::ArgumentError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kcurve::kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kcurve::kExitNumerical;
    }
    return kcurve::kExitOk;
}
