#include "gpx/regressors.hpp"

#include <cmath>

#include "gpx/errors.hpp"

namespace gpx::data {

std::array<std::string, kRegressorDims> regressor_names() {
    return {"temperature", "wind_speed",  "precipitation", "chill",      "solar_radiation",
            "humidity",    "cloud_cover", "cos_omega_t",   "sin_omega_t"};
}

Eigen::VectorXd raw_regressor_row(const DailyPanel& panel, std::size_t row) {
    Eigen::VectorXd x(kRegressorDims);
    for (int j = 0; j < kWeatherDims; ++j) x(j) = panel.weather[row][j];
    const double wt = kYearOmega * panel.day_index[row];
    x(7) = std::cos(wt);
    x(8) = std::sin(wt);
    return x;
}

RegressorMatrix build_regressors(const DailyPanel& panel, const ResolvedSplit& split) {
    if (panel.empty()) throw ValidationError("build_regressors: empty panel");
    const std::size_t n_train = split.n();
    if (n_train == 0) throw ValidationError("build_regressors: empty training range");

    const std::size_t first = split.is_begin;
    const std::size_t last = split.os_end;
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(last - first), kRegressorDims);
    for (std::size_t i = first; i < last; ++i)
        raw.row(static_cast<Eigen::Index>(i - first)) = raw_regressor_row(panel, i).transpose();

    const auto train = raw.topRows(static_cast<Eigen::Index>(n_train));
    RegressorMatrix out;
    out.row_begin = first;
    out.row_end = last;
    out.stats.mean = train.colwise().mean();
    Eigen::MatrixXd centered = train.rowwise() - out.stats.mean.transpose();
    out.stats.stddev =
        (centered.colwise().squaredNorm() / static_cast<double>(n_train - 1)).cwiseSqrt();

    const auto names = regressor_names();
    for (int j = 0; j < kRegressorDims; ++j)
        if (!(out.stats.stddev(j) > 0.0))
            throw ValidationError("build_regressors: column '" + names[j] +
                                  "' is constant over the training rows");

    out.X = (raw.rowwise() - out.stats.mean.transpose()).array().rowwise() /
            out.stats.stddev.transpose().array();
    return out;
}

RegressorMatrix apply_standardization(const DailyPanel& panel, const ResolvedSplit& split,
                                      const StandardizationStats& stats) {
    if (stats.mean.size() != kRegressorDims || stats.stddev.size() != kRegressorDims)
        throw ValidationError("apply_standardization: stats must cover 9 regressors");
    const std::size_t first = split.is_begin;
    const std::size_t last = split.os_end;
    RegressorMatrix out;
    out.stats = stats;
    out.row_begin = first;
    out.row_end = last;
    out.X.resize(static_cast<Eigen::Index>(last - first), kRegressorDims);
    for (std::size_t i = first; i < last; ++i)
        out.X.row(static_cast<Eigen::Index>(i - first)) =
            stats.apply(raw_regressor_row(panel, i)).transpose();
    return out;
}

} // namespace gpx::data
