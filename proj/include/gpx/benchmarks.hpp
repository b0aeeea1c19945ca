#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "gpx/evaluation.hpp"
#include "gpx/pipeline.hpp"

namespace gpx::bench {

enum class ModelKind { Glm, Arx, Gpx };

std::string model_name(ModelKind kind);

/// Ground-truth generator settings for the synthetic oracle.
struct SyntheticSpec {
    // GLM truth.
    double beta0 = 1.17;
    double beta1 = -4.36e-5;
    double beta_cos = 0.103;
    double beta_sin = 0.034;
    double beta_sat = 0.022;
    double beta_sun = 0.047;
    double gamma = 0.819;
    // GP truth.
    double sigma = 5e-4;
    double sigma_f = 0.05;
    double sigma_l = 1.8;

    int n = 730;       // IS length
    int n_star = 365;  // OS length
    std::uint64_t seed = 1;
    data::Date start{2015, 1, 1};
};

/// Synthetic panel plus the residual draws that generated it.
struct SimulatedPanel {
    data::DailyPanel panel;       // n + n_star leap-free days
    Eigen::VectorXd residuals;    // full-horizon GP residual draws
    data::SplitSpec split;        // the spec's IS/OS boundary as dates
};

/// Draws GP residuals jointly from N(0, H) over the full horizon (kernel over
/// regressors standardized by IS statistics) and rolls the consumption
/// recursion forward. Deterministic under the spec's seed.
SimulatedPanel simulate_panel(const SyntheticSpec& spec);

/// ARX: the GLM columns plus the 9 standardized regressors as linear terms,
/// with homoskedastic Gaussian residuals.
struct ArxFit {
    Eigen::VectorXd coef;  // [glm columns..., regressors..., ar]
    Eigen::VectorXd se;
    double gamma{};
    double s2{};  // residual variance
    std::vector<std::string> column_names;
};

ArxFit fit_arx(const data::DailyPanel& is_panel, const Eigen::MatrixXd& is_regressors,
               const std::set<std::size_t>& excluded = {});

/// Density forecast of a reference model (GLM or ARX) over the OS range.
forecast::DensityForecast forecast_reference(ModelKind kind, const pipeline::CalibratedModel& base,
                                             const std::vector<double>& levels);

struct Comparison {
    eval::EvaluationReport glm, arx, gpx;
};

/// Calibrates all three models on IS, forecasts OS ex-post, evaluates each.
Comparison compare_models(const data::DailyPanel& panel, const data::SplitSpec& split,
                          const pipeline::CalibrationOptions& opts,
                          const std::vector<double>& levels);

} // namespace gpx::bench
