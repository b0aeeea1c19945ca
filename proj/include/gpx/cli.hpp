#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpx/benchmarks.hpp"
#include "gpx/gp.hpp"
#include "gpx/panel.hpp"

namespace gpx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;

/// Effective run configuration: defaults, overridden by the config file,
/// overridden by command-line flags.
struct RunConfig {
    std::string input;
    std::string out;
    std::string model_path;     // forecast/evaluate: defaults to <out>/model.json
    std::string forecast_path;  // evaluate: defaults to <out>/forecast.csv

    std::optional<data::SplitSpec> split;
    std::vector<double> levels{0.90, 0.95, 0.99};
    std::uint64_t seed = 1;
    int bootstrap_replicas = 1000;
    int threads = 0;  // 0: hardware concurrency
    double outlier_k = 3.0;
    std::string point_kind = "median";  // or "mean"
    gp::OptimizerSettings optimizer;

    bench::SyntheticSpec synthetic;
};

/// Parses a flat key = value config file (# comments, "a:b" date ranges,
/// comma lists). Unknown keys are rejected.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Serializes the effective configuration; re-running from this file
/// reproduces the run.
void write_effective_config(const RunConfig& cfg, const std::string& path);

/// Parses "YYYY-MM-DD:YYYY-MM-DD".
std::pair<data::Date, data::Date> parse_date_range(const std::string& text);

/// Parses "0.90,0.95,0.99" (strictly increasing, each in (0,1)).
std::vector<double> parse_levels(const std::string& text);

int cmd_calibrate(const RunConfig& cfg);
int cmd_forecast(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_compare(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);

} // namespace gpx::cli
