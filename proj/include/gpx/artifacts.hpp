#pragma once

#include <string>
#include <vector>

#include "gpx/benchmarks.hpp"
#include "gpx/evaluation.hpp"
#include "gpx/pipeline.hpp"

namespace gpx::artifacts {

/// Serializes the calibrated model (GLM + GP + standardization + residuals)
/// to JSON; write/load round-trip exactly.
void write_model(const pipeline::CalibratedModel& model, const std::string& path);

/// Reconstructs a forecast-ready model: the panel supplies the calendar and
/// OS covariates; coefficients, residuals and frozen statistics come from the
/// artifact.
pipeline::CalibratedModel load_model(const std::string& path, const data::DailyPanel& panel);

/// Human-readable GLM fit report: named coefficients, SEs, significance stars
/// at 1%/5%/10%, RSS, ACF/PACF arrays.
void write_glm_report(const pipeline::CalibratedModel& model, const std::string& path);

/// Optimizer trace summary for the GP calibration.
void write_trace(const pipeline::CalibratedModel& model, const std::string& path);

/// Forecast CSV: date,point_mwh,lo_*,hi_*,log_mean,log_var.
void write_forecast_csv(const forecast::DensityForecast& fc, const std::string& path);

struct LoadedForecast {
    std::vector<data::Date> dates;
    Eigen::VectorXd point_mwh;
    Eigen::VectorXd log_mean;
    Eigen::VectorXd log_var;
};

LoadedForecast load_forecast_csv(const std::string& path);

/// Evaluation artifacts: report JSON plus curve and coverage CSVs.
void write_evaluation(const eval::EvaluationReport& report, const std::string& json_path,
                      const std::string& curves_csv_path, const std::string& coverage_csv_path);

/// Comparison artifacts: metric table plus per-model score curves.
void write_comparison(const bench::Comparison& cmp, const std::string& table_csv_path,
                      const std::string& pinball_csv_path, const std::string& winkler_csv_path);

/// Synthetic-truth sidecar for a simulated panel.
void write_truth(const bench::SyntheticSpec& spec, const std::string& path);

} // namespace gpx::artifacts
