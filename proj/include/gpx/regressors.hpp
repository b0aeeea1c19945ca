#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "gpx/panel.hpp"

namespace gpx::data {

inline constexpr int kRegressorDims = 9;
inline constexpr double kYearOmega = 2.0 * 3.14159265358979323846 / 365.0;

/// Column names: the 7 weather covariates plus the two calendar regressors.
std::array<std::string, kRegressorDims> regressor_names();

/// Per-column affine standardization frozen on the training rows.
struct StandardizationStats {
    Eigen::VectorXd mean;    // length 9
    Eigen::VectorXd stddev;  // length 9, sample std (n−1), strictly positive

    Eigen::VectorXd apply(const Eigen::VectorXd& raw) const {
        return (raw - mean).cwiseQuotient(stddev);
    }
};

/// Standardized regressors for a consecutive block of panel rows.
/// X has one row per panel row in [row_begin, row_end); columns are the 9
/// regressors standardized with the frozen training statistics.
struct RegressorMatrix {
    Eigen::MatrixXd X;
    StandardizationStats stats;
    std::size_t row_begin{}, row_end{};

    /// Standardized block for panel rows [first, last) (absolute row indices).
    Eigen::MatrixXd block(std::size_t first, std::size_t last) const {
        return X.middleRows(static_cast<Eigen::Index>(first - row_begin),
                            static_cast<Eigen::Index>(last - first));
    }
};

/// Raw (unstandardized) regressor row for one panel row: 7 weather values plus
/// cos(ωt), sin(ωt) with t the panel's day index.
Eigen::VectorXd raw_regressor_row(const DailyPanel& panel, std::size_t row);

/// Builds the standardized regressor matrix over all panel rows, with the
/// affine map frozen on the training rows of the split. Throws on a column
/// that is constant over the training rows.
RegressorMatrix build_regressors(const DailyPanel& panel, const ResolvedSplit& split);

/// Same matrix layout but applying previously frozen statistics unchanged
/// (used when forecasting from a stored model artifact).
RegressorMatrix apply_standardization(const DailyPanel& panel, const ResolvedSplit& split,
                                      const StandardizationStats& stats);

} // namespace gpx::data
