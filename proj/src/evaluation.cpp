#include "gpx/evaluation.hpp"

#include <cmath>
#include <stdexcept>

#include "gpx/stats.hpp"

namespace gpx::eval {

namespace {
inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }
} // namespace

PointErrors rmse_mape(const Eigen::VectorXd& forecast_mwh, const Eigen::VectorXd& realized_mwh) {
    if (forecast_mwh.size() != realized_mwh.size())
        throw std::invalid_argument("rmse_mape: length mismatch");
    if (realized_mwh.size() == 0) throw std::invalid_argument("rmse_mape: empty series");
    if ((realized_mwh.array() <= 0.0).any())
        throw std::invalid_argument("rmse_mape: realized values must be positive");
    const Eigen::VectorXd err = forecast_mwh - realized_mwh;
    PointErrors out;
    out.rmse = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
    out.mape = 100.0 * (err.cwiseAbs().cwiseQuotient(realized_mwh)).mean();
    return out;
}

double pinball(const Eigen::VectorXd& quantile_forecast, const Eigen::VectorXd& realized,
               double q) {
    if (quantile_forecast.size() != realized.size())
        throw std::invalid_argument("pinball: length mismatch");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("pinball: q must lie in (0,1)");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < realized.size(); ++i) {
        const double yhat = quantile_forecast(i), y = realized(i);
        acc += y < yhat ? (1.0 - q) * (yhat - y) : q * (y - yhat);
    }
    return acc / static_cast<double>(realized.size());
}

double winkler(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
               const Eigen::VectorXd& realized, double q) {
    if (lower.size() != realized.size() || upper.size() != realized.size())
        throw std::invalid_argument("winkler: length mismatch");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("winkler: q must lie in (0,1)");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < realized.size(); ++i) {
        const double L = lower(i), U = upper(i), y = realized(i);
        if (L > U) throw std::invalid_argument("winkler: lower bound above upper bound");
        double w = U - L;
        if (y < L)
            w += 2.0 * (L - y) / (1.0 - q);
        else if (y > U)
            w += 2.0 * (y - U) / (1.0 - q);
        acc += w;
    }
    return acc / static_cast<double>(realized.size());
}

CoverageResult coverage_indicator(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                  const Eigen::VectorXd& realized) {
    if (lower.size() != realized.size() || upper.size() != realized.size())
        throw std::invalid_argument("coverage_indicator: length mismatch");
    CoverageResult out;
    out.indicator.reserve(static_cast<std::size_t>(realized.size()));
    for (Eigen::Index i = 0; i < realized.size(); ++i) {
        const bool hit = realized(i) >= lower(i) && realized(i) <= upper(i);
        out.indicator.push_back(hit ? 1 : 0);
        if (!hit) ++out.violations;
    }
    out.empirical = realized.size() == 0
                        ? 0.0
                        : 1.0 - static_cast<double>(out.violations) /
                                    static_cast<double>(realized.size());
    return out;
}

double lr_unconditional(const std::vector<int>& indicator, double q) {
    if (indicator.empty()) throw std::invalid_argument("lr_unconditional: empty series");
    double n1 = 0.0;
    for (int v : indicator) n1 += v;
    const double n0 = static_cast<double>(indicator.size()) - n1;
    const double pi = n1 / static_cast<double>(indicator.size());
    const double ll_null = xlogy(n0, 1.0 - q) + xlogy(n1, q);
    const double ll_alt = xlogy(n0, 1.0 - pi) + xlogy(n1, pi);
    return -2.0 * (ll_null - ll_alt);
}

double lr_conditional(const std::vector<int>& indicator, double q) {
    if (indicator.size() < 2) throw std::invalid_argument("lr_conditional: need length >= 2");
    double n[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t t = 0; t + 1 < indicator.size(); ++t)
        n[indicator[t]][indicator[t + 1]] += 1.0;
    const double transitions = n[0][0] + n[0][1] + n[1][0] + n[1][1];
    const double pi_hat = (n[0][1] + n[1][1]) / transitions;

    double ll_bernoulli = xlogy(n[0][0] + n[1][0], 1.0 - pi_hat) + xlogy(n[0][1] + n[1][1], pi_hat);
    double ll_markov = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double row = n[i][0] + n[i][1];
        if (row == 0.0) continue;
        const double pi_i1 = n[i][1] / row;
        ll_markov += xlogy(n[i][0], 1.0 - pi_i1) + xlogy(n[i][1], pi_i1);
    }
    const double lr_ind = -2.0 * (ll_bernoulli - ll_markov);
    return lr_unconditional(indicator, q) + std::max(lr_ind, 0.0);
}

Eigen::VectorXd gaussian_quantile_mwh(const Eigen::VectorXd& log_mean,
                                      const Eigen::VectorXd& log_var, double q) {
    const double z = stats::normal_quantile(q);
    return (log_mean + z * log_var.cwiseMax(0.0).cwiseSqrt()).array().exp().matrix();
}

EvaluationReport evaluate_forecast(const forecast::DensityForecast& fc,
                                   const Eigen::VectorXd& realized_mwh,
                                   const std::vector<double>& coverage_levels) {
    if (realized_mwh.size() != fc.log_mean.size())
        throw std::invalid_argument("evaluate_forecast: forecast/realized length mismatch");
    EvaluationReport rep;
    rep.n_days = static_cast<int>(realized_mwh.size());
    rep.point = rmse_mape(fc.point_mwh, realized_mwh);

    const Eigen::VectorXd sd = fc.log_var.cwiseMax(0.0).cwiseSqrt();
    rep.pinball_curve.reserve(99);
    rep.winkler_curve.reserve(99);
    for (int p = 1; p <= 99; ++p) {
        const double q = p / 100.0;
        rep.pinball_curve.push_back(
            pinball(gaussian_quantile_mwh(fc.log_mean, fc.log_var, q), realized_mwh, q));
        const double z = stats::normal_quantile(0.5 * (1.0 + q));
        const Eigen::VectorXd lo = (fc.log_mean - z * sd).array().exp().matrix();
        const Eigen::VectorXd hi = (fc.log_mean + z * sd).array().exp().matrix();
        rep.winkler_curve.push_back(winkler(lo, hi, realized_mwh, q));
    }

    for (double level : coverage_levels) {
        const double z = stats::normal_quantile(0.5 * (1.0 + level));
        const Eigen::VectorXd lo = (fc.log_mean - z * sd).array().exp().matrix();
        const Eigen::VectorXd hi = (fc.log_mean + z * sd).array().exp().matrix();
        const auto cov = coverage_indicator(lo, hi, realized_mwh);
        LevelBacktest bt;
        bt.level = level;
        bt.empirical_coverage = cov.empirical;
        bt.violations = cov.violations;
        bt.lr_uc = lr_unconditional(cov.indicator, level);
        bt.lr_cc = lr_conditional(cov.indicator, level);
        bt.uc_pass = bt.lr_uc < kChi2_1_90;
        bt.cc_pass = bt.lr_cc < kChi2_2_90;
        bt.indicator = cov.indicator;
        rep.coverage.push_back(std::move(bt));
    }
    return rep;
}

} // namespace gpx::eval
