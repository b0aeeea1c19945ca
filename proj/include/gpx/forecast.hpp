#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gpx/date.hpp"
#include "gpx/gp.hpp"

namespace gpx::forecast {

/// Point forecast convention in consumption units.
enum class PointKind {
    LognormalMedian,  // exp(Ȳ), default
    LognormalMean,    // exp(Ȳ + var/2)
};

/// Per-day Gaussian density of OS log-consumption with derived bands in MWh.
struct DensityForecast {
    std::vector<data::Date> dates;
    Eigen::VectorXd log_mean;
    Eigen::VectorXd log_var;
    Eigen::VectorXd point_mwh;
    std::vector<double> levels;          // central CI levels, increasing
    std::vector<Eigen::VectorXd> lo;     // per level, MWh
    std::vector<Eigen::VectorXd> hi;
    int clamped_days = 0;                // negative variances clamped to 0
};

/// Conditional-mean recursion: Ȳ_{n+1} = (T+S)_{n+1} + γ·y_n + R̄_{n+1} and
/// Ȳ_{n+i} = (T+S)_{n+i} + γ·Ȳ_{n+i−1} + R̄_{n+i} for i ≥ 2.
Eigen::VectorXd forecast_mean(double gamma, const Eigen::VectorXd& trend_seasonal,
                              const Eigen::VectorXd& residual_mean, double y_n);

/// Conditional-variance recursion:
///   var(Y_{n+1}) = var(R_{n+1})
///   var(Y_{n+i}) = var(R_{n+i}) + γ²·var(Y_{n+i−1})
///                  + 2·Σ_{j=1}^{i−1} γ^j·cov(R_{n+i}, R_{n+i−j})
/// over the posterior covariance. Small negative results (> −1e-10 relative)
/// are clamped to zero and counted; anything worse throws NumericalError.
Eigen::VectorXd forecast_variance(double gamma, const gp::GpPosterior& post,
                                  int* clamped = nullptr);

/// Monte-Carlo oracle: joint residual draws from the posterior Gaussian rolled
/// through the consumption recursion; returns per-day empirical moments.
struct McMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

McMoments monte_carlo_check(double gamma, const Eigen::VectorXd& trend_seasonal, double y_n,
                            const gp::GpPosterior& post, int paths, std::uint64_t seed);

/// Maps log-scale density to consumption units: point forecast per kind and
/// central level-q CI [exp(Ȳ − z·s), exp(Ȳ + z·s)], z = Φ⁻¹((1+q)/2).
DensityForecast to_consumption_units(std::vector<data::Date> dates,
                                     const Eigen::VectorXd& log_mean,
                                     const Eigen::VectorXd& log_var,
                                     const std::vector<double>& levels,
                                     PointKind kind = PointKind::LognormalMedian);

} // namespace gpx::forecast
