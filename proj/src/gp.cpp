#include "gpx/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gpx/errors.hpp"
#include "gpx/parallel.hpp"
#include "gpx/rng.hpp"
#include "gpx/stats.hpp"

namespace gpx::gp {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinStep = 1e-18;
constexpr double kMaxLogParam = 300.0;  // beyond this exp() is useless anyway
} // namespace

void GpParams::validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("GpParams: sigma must be > 0");
    if (!(sigma_f >= 0.0)) throw std::invalid_argument("GpParams: sigma_f must be >= 0");
    if (!(sigma_l > 0.0)) throw std::invalid_argument("GpParams: sigma_l must be > 0");
}

double sed(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("sed: vector lengths disagree");
    return (a - b).norm();
}

double kernel_k(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GpParams& params) {
    return params.sigma_f * params.sigma_f * std::exp(-sed(a, b) / params.sigma_l);
}

Eigen::MatrixXd pairwise_sed(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("pairwise_sed: dimension mismatch");
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    Eigen::MatrixXd sq = (-2.0 * A * B.transpose());
    sq.colwise() += a2;
    sq.rowwise() += b2.transpose();
    return sq.cwiseMax(0.0).cwiseSqrt();
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& dist, double sigma_f, double sigma_l) {
    return (sigma_f * sigma_f) * (-dist / sigma_l).array().exp().matrix();
}

Eigen::MatrixXd covariance_h(const Eigen::MatrixXd& X, const GpParams& params) {
    if (X.rows() == 0) throw std::invalid_argument("covariance_h: empty input");
    Eigen::MatrixXd H = kernel_matrix(pairwise_sed(X, X), params.sigma_f, params.sigma_l);
    H.diagonal().array() += params.sigma * params.sigma;
    return H;
}

Cholesky cholesky_with_jitter(Eigen::MatrixXd H) {
    const Eigen::Index n = H.rows();
    const double scale = H.trace() / static_cast<double>(n);
    Cholesky out;
    double jitter = 0.0;
    for (;;) {
        Eigen::LLT<Eigen::MatrixXd> llt(H);
        if (llt.info() == Eigen::Success) {
            out.lower = llt.matrixL();
            out.jitter = jitter;
            return out;
        }
        const double next = jitter == 0.0 ? 1e-12 * scale : jitter * 10.0;
        if (!(next > jitter) || next > 1e-6 * scale)
            throw NumericalError("covariance not positive definite after maximum jitter escalation");
        H.diagonal().array() += (next - jitter);
        jitter = next;
    }
}

namespace {

// One likelihood evaluation over a cached distance matrix.
struct Eval {
    bool ok = false;
    double loglik = -std::numeric_limits<double>::infinity();
    Eigen::MatrixXd E;  // exp(−D/σ_l)
    Eigen::MatrixXd L;  // Cholesky lower of H
    Eigen::VectorXd alpha;
    double jitter = 0.0;
};

Eval evaluate(const Eigen::VectorXd& R, const Eigen::MatrixXd& D, double sigma_f, double sigma_l,
              double sigma) {
    Eval ev;
    const Eigen::Index n = D.rows();
    ev.E = (-D / sigma_l).array().exp().matrix();
    Eigen::MatrixXd H = (sigma_f * sigma_f) * ev.E;
    H.diagonal().array() += sigma * sigma;
    try {
        auto chol = cholesky_with_jitter(std::move(H));
        ev.L = std::move(chol.lower);
        ev.jitter = chol.jitter;
    } catch (const NumericalError&) {
        return ev;  // not PD: reject this point
    }
    ev.alpha = ev.L.triangularView<Eigen::Lower>().solve(R);
    const double quad = ev.alpha.squaredNorm();  // Rᵀ H⁻¹ R
    ev.L.transpose().triangularView<Eigen::Upper>().solveInPlace(ev.alpha);
    const double logdet = 2.0 * ev.L.diagonal().array().log().sum();
    ev.loglik = -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * kLog2Pi;
    ev.ok = std::isfinite(ev.loglik);
    return ev;
}

// Gradient in θ = (ln σ_f, ln σ_l, ln σ) at an accepted evaluation.
Eigen::Vector3d gradient_at(const Eval& ev, const Eigen::VectorXd& R, const Eigen::MatrixXd& D,
                            double sigma_f, double sigma_l, double sigma) {
    const Eigen::Index n = D.rows();
    const double s2 = sigma * sigma;
    const Eigen::MatrixXd Linv =
        ev.L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd Hinv = Eigen::MatrixXd::Zero(n, n);
    Hinv.selfadjointView<Eigen::Lower>().rankUpdate(Linv.transpose());
    Hinv.triangularView<Eigen::StrictlyUpper>() = Hinv.transpose();
    const double tr_hinv = Hinv.trace();

    const double alpha_r = ev.alpha.dot(R);           // αᵀHα = αᵀR
    const double alpha_sq = ev.alpha.squaredNorm();

    // ∂H/∂lnσ_f = 2K:   αᵀKα = αᵀR − σ²‖α‖²,  tr(H⁻¹K) = n − σ²·tr(H⁻¹)
    const double g_sf =
        (alpha_r - s2 * alpha_sq) - (static_cast<double>(n) - s2 * tr_hinv);
    // ∂H/∂lnσ_l = σ_f²(E∘D)/σ_l
    const Eigen::MatrixXd M =
        (sigma_f * sigma_f / sigma_l) * ev.E.cwiseProduct(D);
    const double g_sl =
        0.5 * ev.alpha.dot(M * ev.alpha) - 0.5 * Hinv.cwiseProduct(M).sum();
    // ∂H/∂lnσ = 2σ²I
    const double g_s = s2 * alpha_sq - s2 * tr_hinv;

    return {g_sf, g_sl, g_s};
}

struct AscentResult {
    Eigen::Vector3d theta;  // (ln σ_f, ln σ_l, ln σ)
    double loglik{};
    int iterations{};
    int evals{};
    bool converged = false;
    double grad_inf{};
    std::vector<std::string> warnings;
};

// Gradient ascent with an adaptive step length. Directions are
// Polak–Ribière conjugate-gradient updates (restarted to the raw gradient
// whenever they stop pointing uphill); plain steepest ascent needs orders of
// magnitude more iterations here because the curvature scales of the three
// log-parameters differ enormously.
AscentResult ascend(const Eigen::VectorXd& R, const Eigen::MatrixXd& D, Eigen::Vector3d theta,
                    const OptimizerSettings& opts) {
    AscentResult res;
    auto eval_theta = [&](const Eigen::Vector3d& t) -> Eval {
        ++res.evals;
        if (t.cwiseAbs().maxCoeff() > kMaxLogParam) return {};
        return evaluate(R, D, std::exp(t(0)), std::exp(t(1)), std::exp(t(2)));
    };

    Eval ev = eval_theta(theta);
    if (!ev.ok) throw NumericalError("fit_gp: likelihood not finite at the starting point");

    double step = opts.initial_step;
    Eigen::Vector3d g_prev = Eigen::Vector3d::Zero();
    Eigen::Vector3d dir = Eigen::Vector3d::Zero();
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        res.iterations = iter;
        const Eigen::Vector3d g =
            gradient_at(ev, R, D, std::exp(theta(0)), std::exp(theta(1)), std::exp(theta(2)));
        res.grad_inf = g.cwiseAbs().maxCoeff();
        if (res.grad_inf < opts.grad_tol) {
            res.converged = true;
            break;
        }
        if (iter == 1) {
            dir = g;
        } else {
            const double beta = std::max(0.0, g.dot(g - g_prev) / g_prev.squaredNorm());
            dir = g + beta * dir;
            if (dir.dot(g) <= 0.0) dir = g;  // not uphill: restart
        }
        g_prev = g;

        bool improved = false;
        for (int attempt = 0; attempt < 2 && !improved; ++attempt) {
            // Backtrack until some step along dir goes uphill.
            double t = step;
            Eval e_best;
            while (t >= kMinStep) {
                e_best = eval_theta(theta + t * dir);
                if (e_best.ok && e_best.loglik > ev.loglik) break;
                t *= opts.step_shrink;
            }
            if (t >= kMinStep) {
                improved = true;
                // Expand while the likelihood keeps rising, then refine the
                // bracket with one parabolic interpolation. A reasonably
                // exact 1-D maximization keeps the conjugate directions
                // effective in the narrow σ valley.
                double t_lo = 0.0, f_lo = ev.loglik;
                double t_hi = 0.0, f_hi = 0.0;
                bool bracketed = false;
                for (int k = 0; k < 30; ++k) {
                    const double t2 = t * opts.step_grow;
                    Eval e2 = eval_theta(theta + t2 * dir);
                    if (e2.ok && e2.loglik > e_best.loglik) {
                        t_lo = t;
                        f_lo = e_best.loglik;
                        t = t2;
                        e_best = std::move(e2);
                    } else {
                        t_hi = t2;
                        f_hi = e2.ok ? e2.loglik : std::numeric_limits<double>::lowest();
                        bracketed = std::isfinite(f_hi);
                        break;
                    }
                }
                if (bracketed) {
                    const double a = t_lo, b = t, c = t_hi;
                    const double fa = f_lo, fb = e_best.loglik, fc = f_hi;
                    const double num = (b - a) * (b - a) * (fb - fc) - (b - c) * (b - c) * (fb - fa);
                    const double den = (b - a) * (fb - fc) - (b - c) * (fb - fa);
                    if (std::abs(den) > 0.0) {
                        const double t_star = b - 0.5 * num / den;
                        if (t_star > a && t_star < c &&
                            std::abs(t_star - b) > 1e-3 * (c - a)) {
                            Eval es = eval_theta(theta + t_star * dir);
                            if (es.ok && es.loglik > e_best.loglik) {
                                t = t_star;
                                e_best = std::move(es);
                            }
                        }
                    }
                }
                theta += t * dir;
                ev = std::move(e_best);
                step = t * opts.step_grow;
            } else if (attempt == 0 && dir != g) {
                dir = g;  // conjugate direction exhausted: retry along the gradient
                step = opts.initial_step;
            }
        }
        if (!improved) {
            // Line search exhausted. Flat-to-rounding likelihood near an
            // optimum is treated as convergence; a genuinely large gradient
            // with no uphill step is an optimizer failure.
            if (res.grad_inf < 100.0 * opts.grad_tol) {
                res.converged = true;
                res.warnings.push_back("line search exhausted with near-zero gradient");
            } else {
                throw NumericalError("fit_gp: failed to find any uphill step");
            }
            break;
        }
    }
    if (!res.converged)
        res.warnings.push_back("maximum iterations reached before gradient tolerance");
    res.theta = theta;
    res.loglik = ev.loglik;
    return res;
}

} // namespace

double log_marginal_likelihood(const Eigen::VectorXd& R, const Eigen::MatrixXd& X,
                               const GpParams& params) {
    if (R.size() != X.rows())
        throw std::invalid_argument("log_marginal_likelihood: |R| must equal rows of X");
    const Eval ev = evaluate(R, pairwise_sed(X, X), params.sigma_f, params.sigma_l, params.sigma);
    if (!ev.ok) throw NumericalError("log_marginal_likelihood: covariance not positive definite");
    return ev.loglik;
}

LikelihoodGradient log_marginal_gradient(const Eigen::VectorXd& R, const Eigen::MatrixXd& dist,
                                         const GpParams& params) {
    const Eval ev = evaluate(R, dist, params.sigma_f, params.sigma_l, params.sigma);
    if (!ev.ok) throw NumericalError("log_marginal_gradient: covariance not positive definite");
    LikelihoodGradient out;
    out.loglik = ev.loglik;
    out.grad = gradient_at(ev, R, dist, params.sigma_f, params.sigma_l, params.sigma);
    return out;
}

GpParams heuristic_init(const Eigen::VectorXd& R, const Eigen::MatrixXd& X) {
    GpParams init;
    const double sd = stats::sample_std({R.data(), static_cast<std::size_t>(R.size())});
    init.sigma_f = sd > 0.0 ? sd : 1e-8;
    init.sigma = 0.1 * init.sigma_f;
    const Eigen::MatrixXd D = pairwise_sed(X, X);
    std::vector<double> offdiag;
    offdiag.reserve(static_cast<std::size_t>(D.rows()) * (D.rows() - 1) / 2);
    for (Eigen::Index i = 0; i < D.rows(); ++i)
        for (Eigen::Index j = i + 1; j < D.cols(); ++j) offdiag.push_back(D(i, j));
    init.sigma_l = offdiag.empty() ? 1.0 : std::max(stats::median(std::move(offdiag)), 1e-8);
    return init;
}

GpParams fit_gp(const Eigen::VectorXd& R, const Eigen::MatrixXd& X, const GpParams& init,
                const OptimizerSettings& opts, OptimizerTrace* trace) {
    if (R.size() != X.rows())
        throw std::invalid_argument("fit_gp: |R| must equal rows of X");
    if (R.size() < 10) throw std::invalid_argument("fit_gp: need at least 10 training points");
    init.validate();

    const Eigen::MatrixXd D = pairwise_sed(X, X);
    const Eigen::Vector3d theta0{std::log(init.sigma_f > 0 ? init.sigma_f : 1e-12),
                                 std::log(init.sigma_l), std::log(init.sigma)};

    std::vector<Eigen::Vector3d> starts{theta0};
    if (opts.restarts >= 2) starts.push_back(theta0 + Eigen::Vector3d::Ones());
    if (opts.restarts >= 3) starts.push_back(theta0 - Eigen::Vector3d::Ones());

    OptimizerTrace best_trace;
    Eigen::Vector3d best_theta = theta0;
    double best = -std::numeric_limits<double>::infinity();
    int tried = 0, failures = 0;
    std::string last_error;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        ++tried;
        try {
            AscentResult r = ascend(R, D, starts[s], opts);
            if (r.loglik > best) {
                best = r.loglik;
                best_theta = r.theta;
                best_trace.iterations = r.iterations;
                best_trace.likelihood_evals = r.evals;
                best_trace.converged = r.converged;
                best_trace.final_loglik = r.loglik;
                best_trace.grad_inf_norm = r.grad_inf;
                best_trace.best_restart = static_cast<int>(s);
                best_trace.warnings = r.warnings;
            }
        } catch (const NumericalError& e) {
            ++failures;
            last_error = e.what();
        }
    }
    if (failures == tried)
        throw NumericalError("fit_gp: all restarts failed (" + last_error + ")");

    GpParams fitted;
    fitted.sigma_f = std::exp(best_theta(0));
    fitted.sigma_l = std::exp(best_theta(1));
    fitted.sigma = std::exp(best_theta(2));
    fitted.stats = init.stats;
    if (trace) {
        best_trace.restarts_tried = tried;
        *trace = best_trace;
    }
    return fitted;
}

GpPosterior posterior(const Eigen::VectorXd& R, const Eigen::MatrixXd& X,
                      const Eigen::MatrixXd& Xstar, const GpParams& params) {
    if (R.size() != X.rows())
        throw std::invalid_argument("posterior: |R| must equal rows of X");
    params.validate();

    auto chol = cholesky_with_jitter(covariance_h(X, params));
    const Eigen::MatrixXd Ks =
        kernel_matrix(pairwise_sed(X, Xstar), params.sigma_f, params.sigma_l);  // n × n*

    Eigen::VectorXd alpha = chol.lower.triangularView<Eigen::Lower>().solve(R);
    chol.lower.transpose().triangularView<Eigen::Upper>().solveInPlace(alpha);

    GpPosterior post;
    post.mean = Ks.transpose() * alpha;
    const Eigen::MatrixXd V = chol.lower.triangularView<Eigen::Lower>().solve(Ks);
    Eigen::MatrixXd cov =
        kernel_matrix(pairwise_sed(Xstar, Xstar), params.sigma_f, params.sigma_l) -
        V.transpose() * V;
    post.cov = 0.5 * (cov + cov.transpose());
    post.chol_lower = std::move(chol.lower);
    post.jitter = chol.jitter;
    return post;
}

BootstrapResult bootstrap_se(const Eigen::VectorXd& R, const Eigen::MatrixXd& X,
                             const GpParams& fitted, int replicas, std::uint64_t seed,
                             const OptimizerSettings& opts, int threads) {
    if (replicas < 2) throw std::invalid_argument("bootstrap_se: need at least 2 replicas");
    if (R.size() != X.rows())
        throw std::invalid_argument("bootstrap_se: |R| must equal rows of X");
    fitted.validate();
    const Eigen::Index n = X.rows();
    const Eigen::MatrixXd D = pairwise_sed(X, X);
    const Cholesky chol = cholesky_with_jitter(covariance_h(X, fitted));
    const Eigen::Vector3d theta_hat{std::log(fitted.sigma_f), std::log(fitted.sigma_l),
                                    std::log(fitted.sigma)};

    OptimizerSettings replica_opts = opts;
    replica_opts.restarts = 1;  // replicas start at the fitted point

    BootstrapResult out;
    out.replicas = replicas;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.samples.assign(static_cast<std::size_t>(replicas), {nan, nan, nan});

    parallel_for(static_cast<std::size_t>(replicas), threads, [&](std::size_t i) {
        auto engine = rng::make_engine(seed, "bootstrap", i);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(n);
        for (Eigen::Index k = 0; k < n; ++k) z(k) = normal(engine);
        const Eigen::VectorXd Rb = chol.lower.triangularView<Eigen::Lower>() * z;
        try {
            AscentResult r = ascend(Rb, D, theta_hat, replica_opts);
            out.samples[i] = {std::exp(r.theta(2)), std::exp(r.theta(0)), std::exp(r.theta(1))};
        } catch (const NumericalError&) {
            // failed replica: slot stays NaN, counted below
        }
    });

    std::vector<double> s_sigma, s_sf, s_sl;
    for (const auto& s : out.samples) {
        if (std::isnan(s[0])) {
            ++out.failed;
            continue;
        }
        s_sigma.push_back(s[0]);
        s_sf.push_back(s[1]);
        s_sl.push_back(s[2]);
    }
    if (out.failed * 10 > replicas)
        throw NumericalError("bootstrap_se: more than 10% of replicas failed (" +
                             std::to_string(out.failed) + "/" + std::to_string(replicas) + ")");
    out.se_sigma = stats::sample_std(s_sigma);
    out.se_sigma_f = stats::sample_std(s_sf);
    out.se_sigma_l = stats::sample_std(s_sl);
    return out;
}

} // namespace gpx::gp
