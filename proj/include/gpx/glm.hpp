#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

#include "gpx/panel.hpp"

namespace gpx::glm {

/// Coefficient order used throughout. The calendar pair comes before the
/// weekend dummies, matching the seasonality expansion; reports always label
/// parameters by name, never by index.
enum Coef : int {
    kIntercept = 0,
    kTrend = 1,
    kCos = 2,
    kSin = 3,
    kSaturday = 4,
    kSunday = 5,
    kAr = 6,
};

std::vector<std::string> coef_names(bool include_ar);

/// Design rows for a panel: [1, t, cos(ωt), sin(ωt), D_Sat, D_Sun] and, when
/// include_ar, lagged log-consumption. The first panel row is dropped when
/// include_ar (no lag available). row_index maps design rows to panel rows.
struct DesignMatrix {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;  // log-consumption aligned with X
    std::vector<std::size_t> row_index;
};

DesignMatrix design_matrix(const data::DailyPanel& panel, bool include_ar);

struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd se;
    Eigen::VectorXd residuals;
    double rss{};
    double s2{};      // RSS / (rows − cols)
    int dof{};
};

/// Ordinary least squares via column-pivoted QR. Throws ValidationError on a
/// rank-deficient design, naming the offending column.
OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<std::string>& column_names = {});

struct AcfPacf {
    std::vector<double> acf;   // lags 1..max_lag
    std::vector<double> pacf;  // lags 1..max_lag
    double band{};             // ±1.96/√n
    bool degenerate = false;   // constant input: zeros by convention
};

/// Sample autocorrelations and Durbin–Levinson partial autocorrelations.
AcfPacf acf_pacf(const std::vector<double>& series, int max_lag);

/// Calibrated deterministic part of the hybrid model plus fit diagnostics.
struct GlmParams {
    Eigen::VectorXd coef;  // length 7: [intercept, trend, cos, sin, sat, sun, ar]
    Eigen::VectorXd se;
    double gamma() const { return coef(kAr); }
    double gamma_se() const { return se(kAr); }

    /// Step-3 residuals R_t over panel rows 2..n, computed with the final
    /// coefficients on all rows (flagged outliers reinserted).
    Eigen::VectorXd residuals;
    std::vector<std::size_t> residual_rows;

    AcfPacf step1_diagnostics;  // ACF/PACF of the time-effects-only residuals
    double rss{};
    double s2{};
    std::vector<std::string> warnings;
};

/// Three-step calibration: time-effects OLS, residual ACF/PACF diagnostic,
/// OLS with the AR(1) lag column. Rows in excluded are dropped from the OLS
/// targets but still provide lag values to their successors.
GlmParams calibrate_glm(const data::DailyPanel& panel,
                        const std::set<std::size_t>& excluded = {});

/// Deterministic part T_t + S_t for one day.
double time_effect(const Eigen::VectorXd& coef, int day_index, bool saturday, bool sunday);

/// T_t + S_t for panel rows [first, last).
Eigen::VectorXd time_effects(const Eigen::VectorXd& coef, const data::DailyPanel& panel,
                             std::size_t first, std::size_t last);

/// Iterated outlier screening on an IS panel: fit time-effects OLS on
/// unflagged rows, flag residuals beyond k robust standard deviations, refit,
/// repeat until the flag set stabilizes.
std::set<std::size_t> screen_outliers(const data::DailyPanel& panel, double k,
                                      int max_rounds = 10);

} // namespace gpx::glm
