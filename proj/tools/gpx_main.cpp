#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "gpx/cli.hpp"
#include "gpx/errors.hpp"

namespace {

struct FlagValues {
    std::string config, input, out, model, forecast;
    std::string is_range, os_range, levels;
    std::string seed, replicas, threads, point_kind;
};

void add_common_flags(CLI::App* cmd, FlagValues& f) {
    cmd->add_option("--config", f.config, "key = value config file; flags override it");
    cmd->add_option("--input", f.input, "daily panel CSV");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--model", f.model, "model artifact JSON (default <out>/model.json)");
    cmd->add_option("--forecast", f.forecast, "forecast CSV (default <out>/forecast.csv)");
    cmd->add_option("--is-range", f.is_range, "In-Sample range START:END (ISO dates)");
    cmd->add_option("--os-range", f.os_range, "Out-of-Sample range START:END");
    cmd->add_option("--levels", f.levels, "CI levels, e.g. 0.90,0.95,0.99");
    cmd->add_option("--seed", f.seed, "root RNG seed");
    cmd->add_option("--replicas", f.replicas, "bootstrap replicas");
    cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    cmd->add_option("--point-kind", f.point_kind, "point forecast: median or mean");
}

gpx::cli::RunConfig build_config(const FlagValues& f) {
    gpx::cli::RunConfig cfg;
    if (!f.config.empty()) gpx::cli::apply_config_file(cfg, f.config);
    // Flags win over the config file.
    if (!f.input.empty()) cfg.input = f.input;
    if (!f.out.empty()) cfg.out = f.out;
    if (!f.model.empty()) cfg.model_path = f.model;
    if (!f.forecast.empty()) cfg.forecast_path = f.forecast;
    if (!f.is_range.empty()) {
        if (!cfg.split) cfg.split.emplace();
        std::tie(cfg.split->is_start, cfg.split->is_end) = gpx::cli::parse_date_range(f.is_range);
    }
    if (!f.os_range.empty()) {
        if (!cfg.split) cfg.split.emplace();
        std::tie(cfg.split->os_start, cfg.split->os_end) = gpx::cli::parse_date_range(f.os_range);
    }
    if (!f.levels.empty()) cfg.levels = gpx::cli::parse_levels(f.levels);
    if (!f.seed.empty()) cfg.seed = std::stoull(f.seed);
    if (!f.replicas.empty()) cfg.bootstrap_replicas = std::stoi(f.replicas);
    if (!f.threads.empty()) cfg.threads = std::stoi(f.threads);
    if (!f.point_kind.empty()) cfg.point_kind = f.point_kind;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gpx — probabilistic daily power-consumption forecasting"};
    app.require_subcommand(1);

    FlagValues flags;
    auto* calibrate = app.add_subcommand("calibrate", "calibrate GLM + GP on the IS range");
    auto* forecast = app.add_subcommand("forecast", "ex-post density forecast over the OS range");
    auto* evaluate = app.add_subcommand("evaluate", "score a forecast against realized data");
    auto* compare = app.add_subcommand("compare", "three-way GLM/ARX/GPX comparison");
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic panel with known truth");
    for (auto* cmd : {calibrate, forecast, evaluate, compare, simulate})
        add_common_flags(cmd, flags);

    CLI11_PARSE(app, argc, argv);

    gpx::cli::RunConfig cfg;
    try {
        cfg = build_config(flags);
    } catch (const gpx::ValidationError& e) {
        std::cerr << "{\"error\": \"" << e.what() << "\", \"exit_code\": 2}\n";
        return gpx::cli::kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": \"" << e.what() << "\", \"exit_code\": 2}\n";
        return gpx::cli::kExitInputError;
    }

    if (calibrate->parsed()) return gpx::cli::cmd_calibrate(cfg);
    if (forecast->parsed()) return gpx::cli::cmd_forecast(cfg);
    if (evaluate->parsed()) return gpx::cli::cmd_evaluate(cfg);
    if (compare->parsed()) return gpx::cli::cmd_compare(cfg);
    if (simulate->parsed()) return gpx::cli::cmd_simulate(cfg);
    return gpx::cli::kExitInputError;
}
