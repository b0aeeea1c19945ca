#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gpx/gp.hpp"
#include "test_helpers.hpp"

using namespace gpx;

namespace {

gp::GpParams make_params(double sigma_f, double sigma_l, double sigma) {
    gp::GpParams p;
    p.sigma_f = sigma_f;
    p.sigma_l = sigma_l;
    p.sigma = sigma;
    return p;
}

/// Draws R ~ N(0, K(X,X) + σ²I) through the Cholesky factor.
Eigen::VectorXd sample_residuals(const Eigen::MatrixXd& X, const gp::GpParams& truth,
                                 unsigned seed) {
    Eigen::MatrixXd H = gp::covariance_h(X, truth);
    const auto chol = gp::cholesky_with_jitter(std::move(H));
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(X.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(engine);
    return chol.lower.triangularView<Eigen::Lower>() * z;
}

} // namespace

TEST_SUITE("gp") {

TEST_CASE("sed") {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(9), b = Eigen::VectorXd::Zero(9);
    CHECK(gp::sed(a, b) == 0.0);
    b(4) = 1.0;
    CHECK(gp::sed(a, b) == doctest::Approx(1.0));
    const Eigen::VectorXd x = test_helpers::random_vector(9, 3);
    const Eigen::VectorXd y = test_helpers::random_vector(9, 4);
    double direct = 0.0;
    for (int i = 0; i < 9; ++i) direct += (x(i) - y(i)) * (x(i) - y(i));
    CHECK(gp::sed(x, y) == doctest::Approx(std::sqrt(direct)).epsilon(1e-14));
    Eigen::VectorXd short_vec(3);
    CHECK_THROWS_AS(gp::sed(x, short_vec), std::invalid_argument);
}

TEST_CASE("kernel_k") {
    const auto p = make_params(0.4, 1.7, 0.1);
    const Eigen::VectorXd x = test_helpers::random_vector(9, 5);

    SUBCASE("maximum at zero distance") {
        CHECK(gp::kernel_k(x, x, p) == doctest::Approx(0.16).epsilon(1e-14));
    }
    SUBCASE("half-life at sed = sigma_l ln 2") {
        Eigen::VectorXd y = x;
        y(0) += p.sigma_l * std::log(2.0);
        CHECK(gp::kernel_k(x, y, p) == doctest::Approx(0.08).epsilon(1e-12));
    }
    SUBCASE("sigma_f = 0 degenerates to the diagonal model") {
        const auto p0 = make_params(0.0, 1.7, 0.1);
        const Eigen::VectorXd y = test_helpers::random_vector(9, 6);
        CHECK(gp::kernel_k(x, y, p0) == 0.0);
        CHECK(gp::kernel_k(x, x, p0) == 0.0);
    }
    SUBCASE("symmetry") {
        for (unsigned s = 0; s < 20; ++s) {
            const Eigen::VectorXd u = test_helpers::random_vector(9, 100 + s);
            const Eigen::VectorXd v = test_helpers::random_vector(9, 200 + s);
            CHECK(gp::kernel_k(u, v, p) == gp::kernel_k(v, u, p));
        }
    }
}

TEST_CASE("covariance_h") {
    const auto p = make_params(0.3, 1.2, 0.05);

    SUBCASE("single point") {
        const Eigen::MatrixXd X = test_helpers::random_points(1, 9, 7);
        const Eigen::MatrixXd H = gp::covariance_h(X, p);
        REQUIRE(H.rows() == 1);
        CHECK(H(0, 0) == doctest::Approx(0.09 + 0.0025).epsilon(1e-14));
    }
    SUBCASE("duplicated row") {
        Eigen::MatrixXd X = test_helpers::random_points(4, 9, 8);
        X.row(2) = X.row(0);
        const Eigen::MatrixXd H = gp::covariance_h(X, p);
        CHECK(H(0, 2) == doctest::Approx(0.09).epsilon(1e-14));       // σ_f² off-diagonal
        CHECK(H(0, 0) == doctest::Approx(0.0925).epsilon(1e-14));    // σ_f² + σ²
        // Still factorizable thanks to the nugget.
        CHECK_NOTHROW(gp::cholesky_with_jitter(H));
    }
    SUBCASE("random 20-point set matches the double-loop oracle") {
        const Eigen::MatrixXd X = test_helpers::random_points(20, 9, 9);
        const Eigen::MatrixXd H = gp::covariance_h(X, p);
        for (int i = 0; i < 20; ++i) {
            for (int j = 0; j < 20; ++j) {
                double expect = gp::kernel_k(X.row(i).transpose(), X.row(j).transpose(), p);
                if (i == j) expect += p.sigma * p.sigma;
                CHECK(H(i, j) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
        CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("log_marginal_likelihood") {
    SUBCASE("standard normal at the mode") {
        const int n = 12;
        const Eigen::MatrixXd X = test_helpers::random_points(n, 9, 10);
        const Eigen::VectorXd R = Eigen::VectorXd::Zero(n);
        const double ll = gp::log_marginal_likelihood(R, X, make_params(0.0, 1.0, 1.0));
        CHECK(ll == doctest::Approx(-0.5 * n * std::log(2.0 * M_PI)).epsilon(1e-12));
    }
    SUBCASE("n=2 closed-form oracle") {
        Eigen::MatrixXd X(2, 9);
        X.row(0) = test_helpers::random_vector(9, 11).transpose();
        X.row(1) = test_helpers::random_vector(9, 12).transpose();
        Eigen::VectorXd R(2);
        R << 0.3, -0.7;
        const auto p = make_params(0.5, 2.0, 0.2);
        const double a = 0.25 + 0.04;                                   // diagonal
        const double b = 0.25 * std::exp(-(X.row(0) - X.row(1)).norm() / 2.0);
        const double det = a * a - b * b;
        const double quad = (a * R(0) * R(0) - 2.0 * b * R(0) * R(1) + a * R(1) * R(1)) / det;
        const double expect = -0.5 * quad - 0.5 * std::log(det) - std::log(2.0 * M_PI);
        CHECK(gp::log_marginal_likelihood(R, X, p) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("invariant under joint permutation of rows") {
        const int n = 15;
        const Eigen::MatrixXd X = test_helpers::random_points(n, 9, 13);
        const Eigen::VectorXd R = test_helpers::random_vector(n, 14, 0.3);
        const auto p = make_params(0.4, 1.5, 0.1);
        const double base = gp::log_marginal_likelihood(R, X, p);

        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 engine(15);
        std::shuffle(perm.begin(), perm.end(), engine);
        Eigen::MatrixXd Xp(n, 9);
        Eigen::VectorXd Rp(n);
        for (int i = 0; i < n; ++i) {
            Xp.row(i) = X.row(perm[static_cast<std::size_t>(i)]);
            Rp(i) = R(perm[static_cast<std::size_t>(i)]);
        }
        CHECK(gp::log_marginal_likelihood(Rp, Xp, p) == doctest::Approx(base).epsilon(1e-10));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    const int n = 30;
    const Eigen::MatrixXd X = test_helpers::random_points(n, 9, 16);
    const Eigen::MatrixXd D = gp::pairwise_sed(X, X);
    const Eigen::VectorXd R = sample_residuals(X, make_params(0.3, 1.5, 0.1), 17);
    std::mt19937_64 engine(18);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    const double h = 1e-5;
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::Vector3d theta{std::log(0.3) + u(engine), std::log(1.5) + 0.5 * u(engine),
                              std::log(0.1) + u(engine)};
        const auto params = make_params(std::exp(theta(0)), std::exp(theta(1)), std::exp(theta(2)));
        const auto lg = gp::log_marginal_gradient(R, D, params);
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d tp = theta, tm = theta;
            tp(j) += h;
            tm(j) -= h;
            const double lp = gp::log_marginal_likelihood(
                R, X, make_params(std::exp(tp(0)), std::exp(tp(1)), std::exp(tp(2))));
            const double lm = gp::log_marginal_likelihood(
                R, X, make_params(std::exp(tm(0)), std::exp(tm(1)), std::exp(tm(2))));
            const double fd = (lp - lm) / (2.0 * h);
            const double denom = std::max(std::abs(fd), 1e-8);
            CHECK(std::abs(lg.grad(j) - fd) / denom < 1e-4);
        }
    }
}

TEST_CASE("fit_gp") {
    SUBCASE("fitted point is at least as good as the heuristic start") {
        const int n = 80;
        const Eigen::MatrixXd X = test_helpers::random_points(n, 9, 19);
        const Eigen::VectorXd R = sample_residuals(X, make_params(0.25, 1.8, 0.05), 20);
        const auto init = gp::heuristic_init(R, X);
        gp::OptimizerTrace trace;
        const auto fitted = gp::fit_gp(R, X, init, {}, &trace);
        CHECK(gp::log_marginal_likelihood(R, X, fitted) >=
              gp::log_marginal_likelihood(R, X, init) - 1e-9);
        CHECK(trace.restarts_tried == 3);
        CHECK(fitted.sigma > 0.0);
        CHECK(fitted.sigma_l > 0.0);
    }
    SUBCASE("recovers simulated hyperparameters within bootstrap bands") {
        // Truth chosen at calibration scale: (σ_f, σ_l, σ) = (0.05, 1.8, 5e-4).
        const int n = 400;
        const auto truth = make_params(0.05, 1.8, 5e-4);
        const Eigen::MatrixXd X = test_helpers::random_points(n, 9, 21);
        const Eigen::VectorXd R = sample_residuals(X, truth, 22);
        const auto fitted = gp::fit_gp(R, X, gp::heuristic_init(R, X));
        const auto boot = gp::bootstrap_se(R, X, fitted, 50, 23, {}, 0);
        CHECK(std::abs(fitted.sigma_f - truth.sigma_f) < 3.0 * boot.se_sigma_f);
        CHECK(std::abs(fitted.sigma_l - truth.sigma_l) < 3.0 * boot.se_sigma_l);
        CHECK(std::abs(fitted.sigma - truth.sigma) < 3.0 * boot.se_sigma);
    }
}

TEST_CASE("posterior") {
    const auto p = make_params(0.3, 1.5, 0.06);
    const Eigen::MatrixXd X = test_helpers::random_points(12, 9, 24);
    const Eigen::VectorXd R = sample_residuals(X, p, 25);

    SUBCASE("noiseless interpolation at a training row") {
        auto tiny_noise = p;
        tiny_noise.sigma = 1e-8 * p.sigma_f;
        const Eigen::MatrixXd Xs = X.topRows(1);
        const auto post = gp::posterior(R, X, Xs, tiny_noise);
        CHECK(post.mean(0) == doctest::Approx(R(0)).epsilon(1e-5));
        CHECK(post.cov(0, 0) < 1e-8);
    }
    SUBCASE("reversion to the prior far from the data") {
        Eigen::MatrixXd Xs = Eigen::MatrixXd::Constant(1, 9, 100.0);  // sed ≈ 300 from data
        const auto post = gp::posterior(R, X, Xs, p);
        CHECK(post.mean(0) == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(post.cov(0, 0) == doctest::Approx(p.sigma_f * p.sigma_f).epsilon(1e-10));
    }
    SUBCASE("2x2 conditional-Gaussian oracle") {
        Eigen::MatrixXd X2(2, 9);
        X2.row(0) = test_helpers::random_vector(9, 26).transpose();
        X2.row(1) = test_helpers::random_vector(9, 27).transpose();
        Eigen::VectorXd R2(2);
        R2 << 0.4, -0.2;
        Eigen::MatrixXd Xs = test_helpers::random_points(1, 9, 28);

        const double a = p.sigma_f * p.sigma_f + p.sigma * p.sigma;
        const double b = p.sigma_f * p.sigma_f *
                         std::exp(-(X2.row(0) - X2.row(1)).norm() / p.sigma_l);
        const double k1 = p.sigma_f * p.sigma_f *
                          std::exp(-(Xs.row(0) - X2.row(0)).norm() / p.sigma_l);
        const double k2 = p.sigma_f * p.sigma_f *
                          std::exp(-(Xs.row(0) - X2.row(1)).norm() / p.sigma_l);
        const double det = a * a - b * b;
        // H⁻¹ = [[a, −b], [−b, a]] / det for the symmetric 2×2 system.
        const double w1 = (a * k1 - b * k2) / det;
        const double w2 = (-b * k1 + a * k2) / det;
        const double mean_oracle = w1 * R2(0) + w2 * R2(1);
        const double var_oracle = p.sigma_f * p.sigma_f - (k1 * w1 + k2 * w2);

        const auto post = gp::posterior(R2, X2, Xs, p);
        CHECK(post.mean(0) == doctest::Approx(mean_oracle).epsilon(1e-10));
        CHECK(post.cov(0, 0) == doctest::Approx(var_oracle).epsilon(1e-10));
    }
    SUBCASE("conditioning never inflates marginal variance and cov stays PSD") {
        const Eigen::MatrixXd Xs = test_helpers::random_points(6, 9, 29);
        const auto post = gp::posterior(R, X, Xs, p);
        for (int i = 0; i < 6; ++i)
            CHECK(post.cov(i, i) <= p.sigma_f * p.sigma_f + 1e-10);
        CHECK((post.cov - post.cov.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(post.cov);
        const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(max_eig, 1e-30));
    }
}

TEST_CASE("bootstrap_se") {
    const int n = 60;
    const auto truth = make_params(0.2, 1.5, 0.05);
    const Eigen::MatrixXd X = test_helpers::random_points(n, 9, 30);
    const Eigen::VectorXd R = sample_residuals(X, truth, 31);
    const auto fitted = gp::fit_gp(R, X, gp::heuristic_init(R, X));

    SUBCASE("deterministic under a fixed seed, serial equals parallel") {
        const auto a = gp::bootstrap_se(R, X, fitted, 8, 99, {}, 1);
        const auto b = gp::bootstrap_se(R, X, fitted, 8, 99, {}, 2);
        CHECK(a.se_sigma == b.se_sigma);
        CHECK(a.se_sigma_f == b.se_sigma_f);
        CHECK(a.se_sigma_l == b.se_sigma_l);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 3; ++j) CHECK(a.samples[i][j] == b.samples[i][j]);
        const auto c = gp::bootstrap_se(R, X, fitted, 8, 100, {}, 1);
        CHECK(a.se_sigma != c.se_sigma);  // different seed, different draws
    }
    SUBCASE("noise-only truth piles sigma_f near zero") {
        // Data with no kernel signal at all.
        std::mt19937_64 engine(32);
        std::normal_distribution<double> normal(0.0, 0.05);
        Eigen::VectorXd noise(n);
        for (int i = 0; i < n; ++i) noise(i) = normal(engine);
        const auto fit0 = gp::fit_gp(noise, X, gp::heuristic_init(noise, X));
        const auto boot = gp::bootstrap_se(noise, X, fit0, 16, 33, {}, 0);
        // Most replicas should keep σ_f well below the noise scale.
        int small = 0;
        for (const auto& s : boot.samples)
            if (!std::isnan(s[1]) && s[1] < 0.5 * fit0.sigma) ++small;
        CHECK(small * 3 >= 16 * 2);
        CHECK(boot.se_sigma_f < fit0.sigma);
    }
    SUBCASE("replica count below 2 is rejected") {
        CHECK_THROWS_AS(gp::bootstrap_se(R, X, fitted, 1, 5), std::invalid_argument);
    }
}

TEST_CASE("cholesky samples reproduce the covariance entrywise") {
    // Five nearby points so every entry of H is large relative to the
    // 20k-sample Monte Carlo error.
    Eigen::MatrixXd X = 0.3 * test_helpers::random_points(5, 9, 34);
    const auto p = make_params(1.0, 1.5, 0.3);
    const Eigen::MatrixXd H = gp::covariance_h(X, p);
    const auto chol = gp::cholesky_with_jitter(H);

    std::mt19937_64 engine(35);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int samples = 20000;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(5, 5);
    Eigen::VectorXd z(5);
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < 5; ++i) z(i) = normal(engine);
        const Eigen::VectorXd r = chol.lower.triangularView<Eigen::Lower>() * z;
        acc += r * r.transpose();
    }
    acc /= static_cast<double>(samples);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(std::abs(acc(i, j) - H(i, j)) / std::abs(H(i, j)) < 0.05);
}

TEST_CASE("jitter policy fails loudly on an indefinite matrix") {
    Eigen::MatrixXd broken(2, 2);
    broken << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3, −1: jitter cannot rescue
    CHECK_THROWS_AS(gp::cholesky_with_jitter(broken), NumericalError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(make_params(0.1, 1.0, 0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_params(-0.1, 1.0, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_params(0.1, 0.0, 0.1).validate(), std::invalid_argument);
    CHECK_NOTHROW(make_params(0.0, 1.0, 0.1).validate());  // σ_f = 0 is legal
}

} // TEST_SUITE
