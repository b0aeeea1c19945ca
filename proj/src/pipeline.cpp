#include "gpx/pipeline.hpp"

#include <cmath>

#include "gpx/errors.hpp"

namespace gpx::pipeline {

CalibratedModel calibrate(const data::DailyPanel& panel, const data::SplitSpec& split,
                          const CalibrationOptions& opts) {
    CalibratedModel model;
    model.split_dates = split;

    const auto resolved = data::resolve_split(panel, split, &model.warnings);
    model.work = panel.slice(resolved.is_begin, resolved.os_end);
    model.work.validate(true);
    model.split = data::ResolvedSplit{0, resolved.n(), resolved.n(), resolved.n() + resolved.n_star()};

    const auto is_panel = model.work.slice(model.split.is_begin, model.split.is_end);
    model.outlier_rows = glm::screen_outliers(is_panel, opts.outlier_k);
    model.glm = glm::calibrate_glm(is_panel, model.outlier_rows);
    model.warnings.insert(model.warnings.end(), model.glm.warnings.begin(),
                          model.glm.warnings.end());

    model.regressors = data::build_regressors(model.work, model.split);
    model.residuals = model.glm.residuals;
    model.residual_rows = model.glm.residual_rows;

    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(model.residual_rows.size()),
                            data::kRegressorDims);
    for (std::size_t i = 0; i < model.residual_rows.size(); ++i)
        x_train.row(static_cast<Eigen::Index>(i)) =
            model.regressors.X.row(static_cast<Eigen::Index>(model.residual_rows[i]));

    gp::GpParams init = gp::heuristic_init(model.residuals, x_train);
    init.stats = model.regressors.stats;
    model.gp = gp::fit_gp(model.residuals, x_train, init, opts.optimizer, &model.trace);
    model.warnings.insert(model.warnings.end(), model.trace.warnings.begin(),
                          model.trace.warnings.end());

    if (opts.bootstrap_replicas > 0) {
        model.bootstrap = gp::bootstrap_se(model.residuals, x_train, model.gp,
                                           opts.bootstrap_replicas, opts.seed, opts.optimizer,
                                           opts.threads);
        model.has_bootstrap = true;
    }
    return model;
}

forecast::DensityForecast forecast_os(const CalibratedModel& model,
                                      const std::vector<double>& levels,
                                      forecast::PointKind kind) {
    const auto& split = model.split;

    Eigen::MatrixXd x_train(static_cast<Eigen::Index>(model.residual_rows.size()),
                            data::kRegressorDims);
    for (std::size_t i = 0; i < model.residual_rows.size(); ++i)
        x_train.row(static_cast<Eigen::Index>(i)) =
            model.regressors.X.row(static_cast<Eigen::Index>(model.residual_rows[i]));
    const Eigen::MatrixXd x_os = model.regressors.block(split.os_begin, split.os_end);

    const auto post = gp::posterior(model.residuals, x_train, x_os, model.gp);
    const Eigen::VectorXd ts =
        glm::time_effects(model.glm.coef, model.work, split.os_begin, split.os_end);
    const double y_n = std::log(model.work.consumption[split.is_end - 1]);

    const Eigen::VectorXd mean = forecast::forecast_mean(model.glm.gamma(), ts, post.mean, y_n);
    int clamped = 0;
    const Eigen::VectorXd var = forecast::forecast_variance(model.glm.gamma(), post, &clamped);

    std::vector<data::Date> dates(model.work.dates.begin() + static_cast<long>(split.os_begin),
                                  model.work.dates.begin() + static_cast<long>(split.os_end));
    auto fc = forecast::to_consumption_units(std::move(dates), mean, var, levels, kind);
    fc.clamped_days = clamped;
    return fc;
}

Eigen::VectorXd realized_os(const CalibratedModel& model) {
    const auto& split = model.split;
    Eigen::VectorXd out(static_cast<Eigen::Index>(split.n_star()));
    for (std::size_t i = split.os_begin; i < split.os_end; ++i)
        out(static_cast<Eigen::Index>(i - split.os_begin)) = model.work.consumption[i];
    return out;
}

} // namespace gpx::pipeline
