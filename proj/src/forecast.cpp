#include "gpx/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gpx/errors.hpp"
#include "gpx/rng.hpp"
#include "gpx/stats.hpp"

namespace gpx::forecast {

Eigen::VectorXd forecast_mean(double gamma, const Eigen::VectorXd& trend_seasonal,
                              const Eigen::VectorXd& residual_mean, double y_n) {
    if (trend_seasonal.size() != residual_mean.size())
        throw std::invalid_argument("forecast_mean: length mismatch");
    const Eigen::Index h = trend_seasonal.size();
    Eigen::VectorXd mean(h);
    double prev = y_n;
    for (Eigen::Index i = 0; i < h; ++i) {
        mean(i) = trend_seasonal(i) + gamma * prev + residual_mean(i);
        prev = mean(i);
    }
    return mean;
}

Eigen::VectorXd forecast_variance(double gamma, const gp::GpPosterior& post, int* clamped) {
    const Eigen::Index h = post.cov.rows();
    if (post.cov.cols() != h)
        throw std::invalid_argument("forecast_variance: posterior covariance must be square");
    Eigen::VectorXd var(h);
    int clamp_count = 0;
    const double scale = std::max(post.cov.diagonal().cwiseAbs().maxCoeff(), 1.0);
    // Powers γ^j are accumulated once; cov terms reference only OS pairs
    // (IS residuals are known under conditioning and contribute nothing).
    std::vector<double> gamma_pow(static_cast<std::size_t>(h) + 1, 1.0);
    for (std::size_t j = 1; j < gamma_pow.size(); ++j) gamma_pow[j] = gamma_pow[j - 1] * gamma;

    for (Eigen::Index i = 0; i < h; ++i) {
        double v = post.cov(i, i);
        if (i > 0) {
            v += gamma * gamma * var(i - 1);
            double cross = 0.0;
            for (Eigen::Index j = 1; j <= i; ++j)
                cross += gamma_pow[static_cast<std::size_t>(j)] * post.cov(i, i - j);
            v += 2.0 * cross;
        }
        if (v < 0.0) {
            if (v > -1e-10 * scale) {
                v = 0.0;
                ++clamp_count;
            } else {
                throw NumericalError("forecast_variance: negative variance at day " +
                                     std::to_string(i + 1));
            }
        }
        var(i) = v;
    }
    if (clamped) *clamped = clamp_count;
    return var;
}

McMoments monte_carlo_check(double gamma, const Eigen::VectorXd& trend_seasonal, double y_n,
                            const gp::GpPosterior& post, int paths, std::uint64_t seed) {
    const Eigen::Index h = trend_seasonal.size();
    if (post.mean.size() != h)
        throw std::invalid_argument("monte_carlo_check: horizon mismatch");
    // Cholesky of the posterior covariance (jitter tolerated: it is PSD up to rounding).
    Eigen::MatrixXd C = post.cov;
    const double bump = 1e-12 * std::max(C.trace() / static_cast<double>(h), 1e-300);
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
        llt.compute(C);
        if (llt.info() == Eigen::Success) break;
        if (attempt > 8) throw NumericalError("monte_carlo_check: posterior covariance not PSD");
        C.diagonal().array() += bump * std::pow(10.0, attempt);
    }
    const Eigen::MatrixXd L = llt.matrixL();

    auto engine = rng::make_engine(seed, "mc-paths");
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd z(h), y(h);
    for (int p = 0; p < paths; ++p) {
        for (Eigen::Index i = 0; i < h; ++i) z(i) = normal(engine);
        const Eigen::VectorXd r = post.mean + L * z;
        double prev = y_n;
        for (Eigen::Index i = 0; i < h; ++i) {
            y(i) = trend_seasonal(i) + gamma * prev + r(i);
            prev = y(i);
        }
        sum += y;
        sum_sq += y.cwiseProduct(y);
    }
    McMoments mm;
    mm.mean = sum / static_cast<double>(paths);
    mm.variance = (sum_sq - paths * mm.mean.cwiseProduct(mm.mean)) / static_cast<double>(paths - 1);
    return mm;
}

DensityForecast to_consumption_units(std::vector<data::Date> dates,
                                     const Eigen::VectorXd& log_mean,
                                     const Eigen::VectorXd& log_var,
                                     const std::vector<double>& levels, PointKind kind) {
    const Eigen::Index h = log_mean.size();
    if (log_var.size() != h)
        throw std::invalid_argument("to_consumption_units: length mismatch");
    for (double q : levels)
        if (!(q > 0.0 && q < 1.0))
            throw std::invalid_argument("to_consumption_units: CI levels must lie in (0,1)");

    DensityForecast fc;
    fc.dates = std::move(dates);
    fc.log_mean = log_mean;
    fc.log_var = log_var;
    fc.levels = levels;
    const Eigen::VectorXd sd = log_var.cwiseMax(0.0).cwiseSqrt();

    fc.point_mwh.resize(h);
    for (Eigen::Index i = 0; i < h; ++i)
        fc.point_mwh(i) = kind == PointKind::LognormalMedian
                              ? std::exp(log_mean(i))
                              : std::exp(log_mean(i) + 0.5 * log_var(i));

    fc.lo.reserve(levels.size());
    fc.hi.reserve(levels.size());
    for (double q : levels) {
        const double z = stats::normal_quantile(0.5 * (1.0 + q));
        fc.lo.push_back((log_mean - z * sd).array().exp().matrix());
        fc.hi.push_back((log_mean + z * sd).array().exp().matrix());
    }
    return fc;
}

} // namespace gpx::forecast
