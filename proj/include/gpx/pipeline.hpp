#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "gpx/evaluation.hpp"
#include "gpx/forecast.hpp"
#include "gpx/glm.hpp"
#include "gpx/gp.hpp"
#include "gpx/panel.hpp"

namespace gpx::pipeline {

struct CalibrationOptions {
    double outlier_k = 3.0;
    gp::OptimizerSettings optimizer;
    int bootstrap_replicas = 0;  // 0 skips the bootstrap
    std::uint64_t seed = 0;
    int threads = 0;
};

/// Everything needed to forecast: the working panel is the IS+OS slice with
/// day_index anchored at 1 on the first IS date.
struct CalibratedModel {
    data::DailyPanel work;          // sliced panel (leap days already stripped)
    data::ResolvedSplit split;      // resolved against `work`
    data::SplitSpec split_dates;
    std::set<std::size_t> outlier_rows;  // rows of `work` flagged IS

    glm::GlmParams glm;
    data::RegressorMatrix regressors;  // all work rows, IS-frozen stats
    Eigen::VectorXd residuals;         // GLM residuals, work rows 1..n−1 (0-based)
    std::vector<std::size_t> residual_rows;

    gp::GpParams gp;
    gp::OptimizerTrace trace;
    bool has_bootstrap = false;
    gp::BootstrapResult bootstrap;

    std::vector<std::string> warnings;
};

/// Preprocess (slice to IS+OS, outlier screening) and calibrate GLM + GP.
/// The input panel must already be leap-day stripped.
CalibratedModel calibrate(const data::DailyPanel& panel, const data::SplitSpec& split,
                          const CalibrationOptions& opts);

/// Ex-post density forecast over the OS range of a calibrated model.
forecast::DensityForecast forecast_os(const CalibratedModel& model,
                                      const std::vector<double>& levels,
                                      forecast::PointKind kind = forecast::PointKind::LognormalMedian);

/// Realized OS consumption (MWh) aligned with forecast_os output.
Eigen::VectorXd realized_os(const CalibratedModel& model);

} // namespace gpx::pipeline
