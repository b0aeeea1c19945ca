#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gpx/forecast.hpp"

namespace gpx::eval {

/// 90%-level rejection thresholds for the coverage tests.
inline constexpr double kChi2_1_90 = 2.706;  // χ²(1)
inline constexpr double kChi2_2_90 = 4.605;  // χ²(2)

struct PointErrors {
    double rmse{};
    double mape{};  // percent
};

PointErrors rmse_mape(const Eigen::VectorXd& forecast_mwh, const Eigen::VectorXd& realized_mwh);

/// Mean pinball loss of quantile forecasts at level q.
double pinball(const Eigen::VectorXd& quantile_forecast, const Eigen::VectorXd& realized, double q);

/// Mean Winkler score of central level-q interval forecasts.
double winkler(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
               const Eigen::VectorXd& realized, double q);

struct CoverageResult {
    std::vector<int> indicator;  // I_t: 1 hit, 0 violation
    double empirical{};          // mean of I_t
    int violations{};
};

CoverageResult coverage_indicator(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                  const Eigen::VectorXd& realized);

/// Kupiec unconditional-coverage LR statistic (asymptotically χ²(1)).
double lr_unconditional(const std::vector<int>& indicator, double q);

/// Christoffersen conditional-coverage LR statistic, computed as the
/// unconditional statistic plus the first-order-Markov independence statistic
/// (asymptotically χ²(2)). 0·ln 0 = 0 throughout; transition probabilities
/// with empty denominators contribute nothing.
double lr_conditional(const std::vector<int>& indicator, double q);

struct LevelBacktest {
    double level{};
    double empirical_coverage{};
    int violations{};
    double lr_uc{}, lr_cc{};
    bool uc_pass{}, cc_pass{};
    std::vector<int> indicator;
};

/// Full evaluation of one density forecast against realized consumption.
struct EvaluationReport {
    PointErrors point;
    std::vector<double> pinball_curve;  // percentiles 1..99
    std::vector<double> winkler_curve;  // CI levels 1..99 %
    std::vector<LevelBacktest> coverage;
    int n_days{};
};

/// Quantile forecast in MWh implied by the Gaussian log-density.
Eigen::VectorXd gaussian_quantile_mwh(const Eigen::VectorXd& log_mean,
                                      const Eigen::VectorXd& log_var, double q);

EvaluationReport evaluate_forecast(const forecast::DensityForecast& fc,
                                   const Eigen::VectorXd& realized_mwh,
                                   const std::vector<double>& coverage_levels);

} // namespace gpx::eval
