#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gpx/regressors.hpp"

namespace gpx::gp {

/// Kernel hyperparameters of the residual Gaussian Process.
/// σ is the i.i.d. noise scale, σ_f the signal scale (both in log-consumption
/// units), σ_l the length scale in SED units.
struct GpParams {
    double sigma{};
    double sigma_f{};
    double sigma_l{};
    data::StandardizationStats stats;  // frozen standardization of the regressors

    /// Throws std::invalid_argument unless σ > 0, σ_f ≥ 0, σ_l > 0.
    void validate() const;
};

/// Standardised Euclidean Distance between two (already standardized) rows.
double sed(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Exponential kernel k(x,x') = σ_f² exp(−‖x−x'‖/σ_l).
double kernel_k(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GpParams& params);

/// Pairwise SED matrix between row sets A (n×9) and B (m×9).
Eigen::MatrixXd pairwise_sed(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// K(A,B) entrywise from a precomputed distance matrix.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& dist, double sigma_f, double sigma_l);

/// H(X,X) = K(X,X) + σ²I.
Eigen::MatrixXd covariance_h(const Eigen::MatrixXd& X, const GpParams& params);

struct Cholesky {
    Eigen::MatrixXd lower;
    double jitter{};  // total diagonal jitter that was required
};

/// Cholesky with the escalating jitter policy: 1e-12·tr(H)/n, ×10 up to
/// 1e-6·tr(H)/n, then NumericalError.
Cholesky cholesky_with_jitter(Eigen::MatrixXd H);

/// Gaussian log marginal likelihood of residuals under H(X,X), Eq.-style
/// −½ RᵀH⁻¹R − ½ ln det H − (n/2) ln 2π, via Cholesky.
double log_marginal_likelihood(const Eigen::VectorXd& R, const Eigen::MatrixXd& X,
                               const GpParams& params);

/// Likelihood and gradient in θ = (ln σ_f, ln σ_l, ln σ).
struct LikelihoodGradient {
    double loglik{};
    Eigen::Vector3d grad;
};

/// Analytic gradient ∂L/∂θ_j = ½ αᵀ(∂H/∂θ_j)α − ½ tr(H⁻¹ ∂H/∂θ_j) with
/// α = H⁻¹R, over a precomputed distance matrix.
LikelihoodGradient log_marginal_gradient(const Eigen::VectorXd& R, const Eigen::MatrixXd& dist,
                                         const GpParams& params);

struct OptimizerSettings {
    int max_iterations = 2000;
    double grad_tol = 1e-6;     // infinity norm in log-parameter space
    double initial_step = 1.0;
    double step_grow = 1.5;
    double step_shrink = 0.5;
    int restarts = 3;           // heuristic init plus ×e^{±1} perturbations
};

struct OptimizerTrace {
    int iterations{};
    int likelihood_evals{};
    bool converged = false;
    double final_loglik{};
    double grad_inf_norm{};
    int restarts_tried{};
    int best_restart{};
    std::vector<std::string> warnings;
};

/// Heuristic initialization: σ_f = std(R), σ_l = median pairwise SED,
/// σ = 0.1·std(R).
GpParams heuristic_init(const Eigen::VectorXd& R, const Eigen::MatrixXd& X);

/// Maximizes the log marginal likelihood by steepest ascent in log-parameter
/// space with a backtracking/growing step. Multi-start per settings.restarts;
/// the best restart wins. Standardization stats are carried over from init.
GpParams fit_gp(const Eigen::VectorXd& R, const Eigen::MatrixXd& X, const GpParams& init,
                const OptimizerSettings& opts = {}, OptimizerTrace* trace = nullptr);

/// Posterior of the OS residuals given IS residuals, Eq.-style conditional
/// Gaussian computed via the cached Cholesky (solves, never explicit inverses).
struct GpPosterior {
    Eigen::VectorXd mean;        // R̄_*, length n*
    Eigen::MatrixXd cov;         // n* × n*, symmetric PSD up to jitter
    Eigen::MatrixXd chol_lower;  // Cholesky factor of H(X,X)
    double jitter{};
};

GpPosterior posterior(const Eigen::VectorXd& R, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& Xstar, const GpParams& params);

struct BootstrapResult {
    double se_sigma{}, se_sigma_f{}, se_sigma_l{};
    int replicas{};
    int failed{};
    /// Per-replica estimates (σ, σ_f, σ_l); failed replicas hold NaN.
    std::vector<std::array<double, 3>> samples;
};

/// Parametric bootstrap: simulate residual vectors from N(0, H(X; fitted)),
/// refit each (single start at the fitted point), return per-parameter sample
/// standard deviations. Replica i draws from a stream derived from
/// (seed, "bootstrap", i) so parallel and serial runs agree bit-for-bit.
/// Errors if more than 10% of replicas fail.
BootstrapResult bootstrap_se(const Eigen::VectorXd& R, const Eigen::MatrixXd& X,
                             const GpParams& fitted, int replicas, std::uint64_t seed,
                             const OptimizerSettings& opts = {}, int threads = 0);

} // namespace gpx::gp
