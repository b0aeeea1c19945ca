#include <doctest.h>

#include <cmath>
#include <random>

#include "gpx/glm.hpp"
#include "gpx/regressors.hpp"
#include "test_helpers.hpp"

using namespace gpx;

namespace {

/// Simulates the hybrid model's deterministic part plus AR(1) with i.i.d.
/// Gaussian residuals onto an existing calendar.
data::DailyPanel simulate_iid_glm(const Eigen::VectorXd& coef, double noise_sd, int days,
                                  unsigned seed, data::Date start = data::Date(2015, 1, 1)) {
    auto panel = test_helpers::make_panel(start, days, seed);
    std::mt19937_64 engine(seed * 7919 + 1);
    std::normal_distribution<double> normal(0.0, noise_sd);
    const double gamma = coef(glm::kAr);
    double prev = glm::time_effect(coef, 1, panel.dates[0].is_saturday(),
                                   panel.dates[0].is_sunday()) /
                  (1.0 - (std::abs(gamma) < 1.0 ? gamma : 0.0));
    for (int i = 0; i < days; ++i) {
        const double ts = glm::time_effect(coef, panel.day_index[i],
                                           panel.dates[i].is_saturday(),
                                           panel.dates[i].is_sunday());
        const double y = ts + gamma * prev + normal(engine);
        panel.consumption[static_cast<std::size_t>(i)] = std::exp(y);
        prev = y;
    }
    return panel;
}

Eigen::VectorXd spec_like_coef(double gamma) {
    Eigen::VectorXd coef(7);
    coef << 1.17, -4.36e-5, 0.103, 0.034, 0.022, 0.047, gamma;
    return coef;
}

} // namespace

TEST_SUITE("glm") {

TEST_CASE("design_matrix layout") {
    auto panel = test_helpers::make_panel(data::Date(2015, 1, 1), 400);

    SUBCASE("weekend dummies follow the calendar") {
        const auto d = glm::design_matrix(panel, false);
        // 2015-01-03 was a Saturday (row 2), 2015-01-04 a Sunday (row 3).
        CHECK(d.X(2, glm::kSaturday) == 1.0);
        CHECK(d.X(2, glm::kSunday) == 0.0);
        CHECK(d.X(3, glm::kSaturday) == 0.0);
        CHECK(d.X(3, glm::kSunday) == 1.0);
        CHECK(d.X(4, glm::kSaturday) == 0.0);
        CHECK(d.X(4, glm::kSunday) == 0.0);
    }
    SUBCASE("yearly harmonics repeat after 365 days") {
        const auto d = glm::design_matrix(panel, false);
        CHECK(d.X(10, glm::kCos) == doctest::Approx(d.X(375, glm::kCos)).epsilon(1e-12));
        CHECK(d.X(10, glm::kSin) == doctest::Approx(d.X(375, glm::kSin)).epsilon(1e-12));
    }
    SUBCASE("AR lag drops the first row") {
        auto ten = test_helpers::make_panel(data::Date(2015, 1, 1), 10);
        const auto d = glm::design_matrix(ten, true);
        CHECK(d.X.rows() == 9);
        CHECK(d.X.cols() == 7);
        // Lag column holds yesterday's log consumption.
        CHECK(d.X(0, glm::kAr) == doctest::Approx(std::log(ten.consumption[0])));
        CHECK(d.y(0) == doctest::Approx(std::log(ten.consumption[1])));
    }
}

TEST_CASE("fit_ols") {
    SUBCASE("interpolates an exactly linear response") {
        const Eigen::MatrixXd X = test_helpers::random_points(40, 3, 5);
        Eigen::VectorXd beta(3);
        beta << 1.5, -2.0, 0.25;
        const Eigen::VectorXd y = X * beta;
        const auto fit = glm::fit_ols(X, y);
        CHECK((fit.coef - beta).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("recovers an exact line through the origin plus intercept") {
        Eigen::MatrixXd X(5, 2);
        Eigen::VectorXd y(5);
        for (int i = 0; i < 5; ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = i + 1.0;
            y(i) = 2.0 * (i + 1.0);
        }
        const auto fit = glm::fit_ols(X, y);
        CHECK(fit.coef(0) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(fit.coef(1) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("matches the normal-equations oracle on a random 50x4 system") {
        const Eigen::MatrixXd X = test_helpers::random_points(50, 4, 17);
        const Eigen::VectorXd y = test_helpers::random_vector(50, 18);
        const auto fit = glm::fit_ols(X, y);
        // Independent dense route: solve (XᵀX)β = Xᵀy by full-pivot LU.
        const Eigen::VectorXd oracle =
            (X.transpose() * X).fullPivLu().solve(X.transpose() * y);
        CHECK((fit.coef - oracle).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("rank deficiency names the offending column") {
        Eigen::MatrixXd X(30, 3);
        X.col(0) = Eigen::VectorXd::Ones(30);
        X.col(1) = test_helpers::random_vector(30, 9);
        X.col(2) = 2.0 * X.col(1);  // exact collinearity
        const Eigen::VectorXd y = test_helpers::random_vector(30, 10);
        CHECK_THROWS_WITH_AS(glm::fit_ols(X, y, {"one", "x", "x_copy"}),
                             doctest::Contains("rank deficient"), ValidationError);
    }
    SUBCASE("orthogonality of residuals") {
        const Eigen::MatrixXd X = test_helpers::random_points(80, 5, 21);
        const Eigen::VectorXd y = test_helpers::random_vector(80, 22);
        const auto fit = glm::fit_ols(X, y);
        const double lhs = (X.transpose() * fit.residuals).norm();
        CHECK(lhs < 1e-8 * (X.transpose() * y).norm());
    }
}

TEST_CASE("calibrate_glm recovers simulated parameters") {
    SUBCASE("gamma = 0.8 lands within 3 standard errors") {
        const auto truth = spec_like_coef(0.8);
        const auto panel = simulate_iid_glm(truth, 0.02, 730, 42);
        const auto params = glm::calibrate_glm(panel);
        CHECK(std::abs(params.gamma() - 0.8) < 3.0 * params.gamma_se());
        // The remaining coefficients stay in their own 3-SE bands.
        for (int j = 0; j < 6; ++j)
            CHECK(std::abs(params.coef(j) - truth(j)) < 3.0 * params.se(j));
        // Least squares with an intercept centers the residuals.
        const double resid_mean = params.residuals.mean();
        const double resid_sd = std::sqrt(params.residuals.squaredNorm() /
                                          static_cast<double>(params.residuals.size()));
        CHECK(std::abs(resid_mean) < 1e-6 * resid_sd);
    }
    SUBCASE("gamma = 0 is not spuriously detected") {
        const auto truth = spec_like_coef(0.0);
        const auto panel = simulate_iid_glm(truth, 0.02, 730, 43);
        const auto params = glm::calibrate_glm(panel);
        CHECK(std::abs(params.gamma()) < 3.0 * params.gamma_se());
    }
    SUBCASE("adding the AR column never increases RSS on the same rows") {
        const auto panel = simulate_iid_glm(spec_like_coef(0.5), 0.05, 300, 44);
        const auto d_full = glm::design_matrix(panel, true);
        const auto with_ar = glm::fit_ols(d_full.X, d_full.y);
        const auto without = glm::fit_ols(d_full.X.leftCols(6), d_full.y);
        CHECK(with_ar.rss <= without.rss + 1e-12);
    }
    SUBCASE("excluded rows keep feeding the lag column") {
        const auto panel = simulate_iid_glm(spec_like_coef(0.8), 0.02, 400, 45);
        const auto with_exclusion = glm::calibrate_glm(panel, {200});
        // Residuals are still reported for every row after the first.
        CHECK(with_exclusion.residuals.size() == 399);
        CHECK(std::abs(with_exclusion.gamma() - 0.8) < 3.0 * with_exclusion.gamma_se());
    }
}

TEST_CASE("95% confidence intervals cover at the nominal rate") {
    // 100 synthetic replicas; per-parameter coverage frequency must sit in
    // the binomial band [0.88, 0.99].
    const auto truth = spec_like_coef(0.8);
    const int replicas = 100;
    Eigen::VectorXi hits = Eigen::VectorXi::Zero(7);
    for (int r = 0; r < replicas; ++r) {
        const auto panel = simulate_iid_glm(truth, 0.02, 400, 1000 + r);
        const auto params = glm::calibrate_glm(panel);
        for (int j = 0; j < 7; ++j)
            if (std::abs(params.coef(j) - truth(j)) <= 1.959963984540054 * params.se(j))
                hits(j) += 1;
    }
    for (int j = 0; j < 7; ++j) {
        const double freq = hits(j) / static_cast<double>(replicas);
        CHECK(freq >= 0.88);
        CHECK(freq <= 0.99);
    }
}

TEST_CASE("acf_pacf") {
    SUBCASE("white noise stays inside the band about 95% of the time") {
        std::mt19937_64 engine(77);
        std::normal_distribution<double> normal(0.0, 1.0);
        int inside = 0, total = 0;
        for (int s = 0; s < 100; ++s) {
            std::vector<double> series(500);
            for (auto& v : series) v = normal(engine);
            const auto r = glm::acf_pacf(series, 20);
            for (double a : r.acf) {
                total += 1;
                if (std::abs(a) <= r.band) inside += 1;
            }
        }
        const double frac = static_cast<double>(inside) / total;
        CHECK(frac > 0.92);
        CHECK(frac < 0.98);
    }
    SUBCASE("AR(1) autocorrelation decays geometrically and PACF cuts off") {
        std::mt19937_64 engine(78);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double gamma = 0.8;
        std::vector<double> series(20000);
        double prev = 0.0;
        for (auto& v : series) {
            prev = gamma * prev + normal(engine);
            v = prev;
        }
        const auto r = glm::acf_pacf(series, 10);
        for (int k = 1; k <= 5; ++k)
            CHECK(r.acf[k - 1] == doctest::Approx(std::pow(gamma, k)).epsilon(0.08));
        CHECK(r.pacf[0] == doctest::Approx(gamma).epsilon(0.05));
        for (int k = 2; k <= 10; ++k) CHECK(std::abs(r.pacf[k - 1]) < 0.03);
    }
    SUBCASE("constant series degenerates to zero ACF by convention") {
        std::vector<double> series(50, 0.0);
        const auto r = glm::acf_pacf(series, 5);
        CHECK(r.degenerate);
        for (double a : r.acf) CHECK(a == 0.0);
        for (double p : r.pacf) CHECK(p == 0.0);
    }
}

TEST_CASE("screen_outliers flags an injected spike and converges") {
    auto panel = simulate_iid_glm(spec_like_coef(0.0), 0.02, 365, 46);
    panel.consumption[100] *= std::exp(0.4);  // 20-sigma spike in log space
    const auto flagged = glm::screen_outliers(panel, 3.0);
    CHECK(flagged.count(100) == 1);
    CHECK(flagged.size() <= 4);  // at most a few tail points beside the spike
}

} // TEST_SUITE
