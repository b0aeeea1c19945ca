#include "gpx/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gpx/errors.hpp"
#include "gpx/rng.hpp"

namespace gpx::bench {

std::string model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::Glm: return "glm";
        case ModelKind::Arx: return "arx";
        case ModelKind::Gpx: return "gpx";
    }
    return "?";
}

namespace {

// Seasonal sinusoid plus AR(1) noise for temperature; bounded noises for the
// rest; chill couples temperature and wind so the covariates are not mutually
// independent.
void fill_weather(data::DailyPanel& panel, std::uint64_t seed) {
    auto engine = rng::make_engine(seed, "weather");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    double temp_ar = 0.0;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        const double t = panel.day_index[i];
        temp_ar = 0.7 * temp_ar + 2.0 * normal(engine);
        const double temperature =
            8.9 - 6.5 * std::cos(data::kYearOmega * (t + 80.0)) + temp_ar;
        const double wind = std::clamp(3.4 + 1.6 * normal(engine), 0.5, 10.5);
        const double precipitation = std::min(-0.086 * std::log(1.0 - 0.999 * uniform(engine)), 1.5);
        const double chill =
            std::max(0.15 * std::max(21.0 - temperature, 0.0) * wind + 2.0 * normal(engine), 0.0);
        const double solar = std::clamp(
            400.0 - 300.0 * std::cos(data::kYearOmega * (t + 80.0)) + 120.0 * normal(engine),
            10.0, 1250.0);
        const double humidity = std::clamp(85.0 + 7.5 * normal(engine), 60.0, 100.0);
        const double cloud = std::clamp(5.7 + 1.2 * normal(engine), 0.0, 8.0);
        panel.weather[i] = {temperature, wind, precipitation, chill, solar, humidity, cloud};
    }
}

} // namespace

SimulatedPanel simulate_panel(const SyntheticSpec& spec) {
    if (spec.n < 2 || spec.n_star < 1)
        throw ValidationError("simulate_panel: need n >= 2 and n_star >= 1");
    const int total = spec.n + spec.n_star;

    SimulatedPanel out;
    auto& panel = out.panel;
    panel.dates.reserve(total);
    data::Date d = spec.start;
    while (panel.dates.size() < static_cast<std::size_t>(total)) {
        if (!d.is_feb29()) panel.dates.push_back(d);  // leap-free calendar
        d = d.next_day();
    }
    panel.consumption.assign(total, 1.0);
    panel.weather.assign(total, {});
    panel.renumber_days();
    fill_weather(panel, spec.seed);

    // Residuals drawn jointly from H over the full horizon, with the kernel
    // acting on regressors standardized by IS statistics.
    const data::ResolvedSplit split{0, static_cast<std::size_t>(spec.n),
                                    static_cast<std::size_t>(spec.n),
                                    static_cast<std::size_t>(total)};
    const auto regs = data::build_regressors(panel, split);

    out.residuals = Eigen::VectorXd::Zero(total);
    if (spec.sigma_f > 0.0 || spec.sigma > 0.0) {
        gp::GpParams truth;
        truth.sigma = std::max(spec.sigma, 1e-300);  // validate() needs σ > 0
        truth.sigma_f = spec.sigma_f;
        truth.sigma_l = spec.sigma_l;
        Eigen::MatrixXd H = gp::kernel_matrix(gp::pairwise_sed(regs.X, regs.X), spec.sigma_f,
                                              spec.sigma_l);
        H.diagonal().array() += spec.sigma * spec.sigma;
        const auto chol = gp::cholesky_with_jitter(std::move(H));
        auto engine = rng::make_engine(spec.seed, "residuals");
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd z(total);
        for (int i = 0; i < total; ++i) z(i) = normal(engine);
        out.residuals = chol.lower.triangularView<Eigen::Lower>() * z;
    }

    // Roll the consumption recursion from an approximately stationary start.
    Eigen::VectorXd coef(7);
    coef << spec.beta0, spec.beta1, spec.beta_cos, spec.beta_sin, spec.beta_sat, spec.beta_sun,
        spec.gamma;
    double prev = glm::time_effect(coef, 1, panel.dates[0].is_saturday(),
                                   panel.dates[0].is_sunday()) /
                  (1.0 - spec.gamma);
    for (int i = 0; i < total; ++i) {
        const double ts = glm::time_effect(coef, panel.day_index[i],
                                           panel.dates[i].is_saturday(),
                                           panel.dates[i].is_sunday());
        const double y = ts + spec.gamma * prev + out.residuals(i);
        panel.consumption[static_cast<std::size_t>(i)] = std::exp(y);
        prev = y;
    }
    panel.validate(true);

    out.split.is_start = panel.dates.front();
    out.split.is_end = panel.dates[static_cast<std::size_t>(spec.n - 1)];
    out.split.os_start = panel.dates[static_cast<std::size_t>(spec.n)];
    out.split.os_end = panel.dates.back();
    return out;
}

ArxFit fit_arx(const data::DailyPanel& is_panel, const Eigen::MatrixXd& is_regressors,
               const std::set<std::size_t>& excluded) {
    if (is_regressors.rows() != static_cast<Eigen::Index>(is_panel.size()))
        throw ValidationError("fit_arx: regressor rows must match panel rows");

    const auto d = glm::design_matrix(is_panel, true);
    const Eigen::Index rows = d.X.rows();
    const Eigen::Index glm_cols = d.X.cols();  // 7, AR last
    const Eigen::Index reg_cols = is_regressors.cols();

    // Columns: [glm time effects | weather regressors | ar].
    Eigen::MatrixXd X(rows, glm_cols + reg_cols);
    X.leftCols(glm_cols - 1) = d.X.leftCols(glm_cols - 1);
    for (Eigen::Index r = 0; r < rows; ++r)
        X.block(r, glm_cols - 1, 1, reg_cols) =
            is_regressors.row(static_cast<Eigen::Index>(d.row_index[static_cast<std::size_t>(r)]));
    X.col(glm_cols + reg_cols - 1) = d.X.col(glm_cols - 1);

    auto names = glm::coef_names(false);
    for (const auto& rn : data::regressor_names()) names.push_back(rn);
    names.push_back("ar");

    // Drop excluded target rows, keeping their lag contribution.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < rows; ++r)
        if (!excluded.count(d.row_index[static_cast<std::size_t>(r)])) keep.push_back(r);
    Eigen::MatrixXd Xk(static_cast<Eigen::Index>(keep.size()), X.cols());
    Eigen::VectorXd yk(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        Xk.row(static_cast<Eigen::Index>(i)) = X.row(keep[i]);
        yk(static_cast<Eigen::Index>(i)) = d.y(keep[i]);
    }

    const auto fit = glm::fit_ols(Xk, yk, names);
    ArxFit out;
    out.coef = fit.coef;
    out.se = fit.se;
    out.gamma = fit.coef(X.cols() - 1);
    out.s2 = fit.s2;
    out.column_names = names;
    return out;
}

forecast::DensityForecast forecast_reference(ModelKind kind, const pipeline::CalibratedModel& base,
                                             const std::vector<double>& levels) {
    const auto& split = base.split;
    const std::size_t n_star = split.n_star();
    const double y_n = std::log(base.work.consumption[split.is_end - 1]);

    Eigen::VectorXd ts;
    double gamma = 0.0, s2 = 0.0;
    if (kind == ModelKind::Glm) {
        gamma = base.glm.gamma();
        s2 = base.glm.s2;
        ts = glm::time_effects(base.glm.coef, base.work, split.os_begin, split.os_end);
    } else if (kind == ModelKind::Arx) {
        const auto is_panel = base.work.slice(split.is_begin, split.is_end);
        const Eigen::MatrixXd is_regs = base.regressors.block(split.is_begin, split.is_end);
        const auto arx = fit_arx(is_panel, is_regs, base.outlier_rows);
        gamma = arx.gamma;
        s2 = arx.s2;
        ts.resize(static_cast<Eigen::Index>(n_star));
        for (std::size_t i = split.os_begin; i < split.os_end; ++i) {
            const Eigen::Index r = static_cast<Eigen::Index>(i - split.os_begin);
            double v = glm::time_effect(arx.coef, base.work.day_index[i],
                                        base.work.dates[i].is_saturday(),
                                        base.work.dates[i].is_sunday());
            v += base.regressors.X.row(static_cast<Eigen::Index>(i))
                     .dot(arx.coef.segment(6, data::kRegressorDims));
            ts(r) = v;
        }
    } else {
        throw std::invalid_argument("forecast_reference: use pipeline::forecast_os for GPX");
    }

    // i.i.d. residual density: zero posterior mean, diagonal covariance.
    gp::GpPosterior post;
    post.mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_star));
    post.cov = s2 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_star),
                                              static_cast<Eigen::Index>(n_star));
    const Eigen::VectorXd mean = forecast::forecast_mean(gamma, ts, post.mean, y_n);
    const Eigen::VectorXd var = forecast::forecast_variance(gamma, post);

    std::vector<data::Date> dates(base.work.dates.begin() + static_cast<long>(split.os_begin),
                                  base.work.dates.begin() + static_cast<long>(split.os_end));
    return forecast::to_consumption_units(std::move(dates), mean, var, levels);
}

Comparison compare_models(const data::DailyPanel& panel, const data::SplitSpec& split,
                          const pipeline::CalibrationOptions& opts,
                          const std::vector<double>& levels) {
    const auto model = pipeline::calibrate(panel, split, opts);
    const Eigen::VectorXd realized = pipeline::realized_os(model);

    Comparison cmp;
    cmp.gpx = eval::evaluate_forecast(pipeline::forecast_os(model, levels), realized, levels);
    cmp.glm = eval::evaluate_forecast(forecast_reference(ModelKind::Glm, model, levels), realized,
                                      levels);
    cmp.arx = eval::evaluate_forecast(forecast_reference(ModelKind::Arx, model, levels), realized,
                                      levels);
    return cmp;
}

} // namespace gpx::bench
