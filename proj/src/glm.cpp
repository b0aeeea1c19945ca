#include "gpx/glm.hpp"

#include <cmath>

#include "gpx/errors.hpp"
#include "gpx/regressors.hpp"

namespace gpx::glm {

std::vector<std::string> coef_names(bool include_ar) {
    std::vector<std::string> names = {"intercept", "trend", "cos", "sin", "saturday", "sunday"};
    if (include_ar) names.push_back("ar");
    return names;
}

DesignMatrix design_matrix(const data::DailyPanel& panel, bool include_ar) {
    const std::size_t n = panel.size();
    if (include_ar && n < 2)
        throw ValidationError("design_matrix: need at least 2 rows for the AR column");
    const std::size_t first = include_ar ? 1 : 0;
    const std::size_t rows = n - first;
    const int cols = include_ar ? 7 : 6;

    DesignMatrix d;
    d.X.resize(static_cast<Eigen::Index>(rows), cols);
    d.y.resize(static_cast<Eigen::Index>(rows));
    d.row_index.reserve(rows);
    const auto log_c = panel.log_consumption();
    for (std::size_t i = first; i < n; ++i) {
        const Eigen::Index r = static_cast<Eigen::Index>(i - first);
        const double t = panel.day_index[i];
        d.X(r, kIntercept) = 1.0;
        d.X(r, kTrend) = t;
        d.X(r, kCos) = std::cos(data::kYearOmega * t);
        d.X(r, kSin) = std::sin(data::kYearOmega * t);
        d.X(r, kSaturday) = panel.dates[i].is_saturday() ? 1.0 : 0.0;
        d.X(r, kSunday) = panel.dates[i].is_sunday() ? 1.0 : 0.0;
        if (include_ar) d.X(r, kAr) = log_c[i - 1];
        d.y(r) = log_c[i];
        d.row_index.push_back(i);
    }
    return d;
}

OlsFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const std::vector<std::string>& column_names) {
    const Eigen::Index rows = X.rows(), cols = X.cols();
    if (rows <= cols)
        throw ValidationError("fit_ols: need more rows than columns (" + std::to_string(rows) +
                              " rows, " + std::to_string(cols) + " columns)");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) {
        // The trailing permuted columns are the linearly dependent ones.
        const auto perm = qr.colsPermutation().indices();
        Eigen::Index offender = static_cast<Eigen::Index>(perm(cols - 1));
        for (Eigen::Index k = qr.rank(); k < cols; ++k)
            offender = std::min(offender, static_cast<Eigen::Index>(perm(k)));
        std::string name = column_names.size() > static_cast<std::size_t>(offender)
                               ? column_names[static_cast<std::size_t>(offender)]
                               : ("#" + std::to_string(offender));
        throw ValidationError("fit_ols: design matrix is rank deficient (column " + name + ")");
    }

    OlsFit fit;
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    fit.rss = fit.residuals.squaredNorm();
    fit.dof = static_cast<int>(rows - cols);
    fit.s2 = fit.rss / fit.dof;
    Eigen::MatrixXd xtx_inv =
        (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(cols, cols));
    fit.se = (fit.s2 * xtx_inv.diagonal()).cwiseSqrt();
    return fit;
}

AcfPacf acf_pacf(const std::vector<double>& series, int max_lag) {
    const std::size_t n = series.size();
    if (static_cast<std::size_t>(max_lag) >= n)
        throw ValidationError("acf_pacf: series length must exceed max_lag");
    AcfPacf out;
    out.band = 1.96 / std::sqrt(static_cast<double>(n));
    out.acf.assign(max_lag, 0.0);
    out.pacf.assign(max_lag, 0.0);

    double m = 0.0;
    for (double x : series) m += x;
    m /= static_cast<double>(n);
    double denom = 0.0;
    for (double x : series) denom += (x - m) * (x - m);
    if (denom <= 0.0) {
        out.degenerate = true;  // constant series: zero ACF by convention
        return out;
    }
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) num += (series[t] - m) * (series[t + k] - m);
        out.acf[k - 1] = num / denom;
    }

    // Durbin–Levinson recursion.
    std::vector<double> phi(max_lag + 1, 0.0), prev(max_lag + 1, 0.0);
    double v = 1.0;
    for (int k = 1; k <= max_lag; ++k) {
        double acc = out.acf[k - 1];
        for (int j = 1; j < k; ++j) acc -= prev[j] * out.acf[k - 1 - j];
        const double alpha = v > 0.0 ? acc / v : 0.0;
        phi[k] = alpha;
        for (int j = 1; j < k; ++j) phi[j] = prev[j] - alpha * prev[k - j];
        v *= (1.0 - alpha * alpha);
        out.pacf[k - 1] = alpha;
        prev = phi;
    }
    return out;
}

namespace {

// Rows kept for estimation: design rows whose panel row is not excluded.
DesignMatrix drop_rows(const DesignMatrix& d, const std::set<std::size_t>& excluded) {
    if (excluded.empty()) return d;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < d.X.rows(); ++r)
        if (!excluded.count(d.row_index[static_cast<std::size_t>(r)])) keep.push_back(r);
    DesignMatrix out;
    out.X.resize(static_cast<Eigen::Index>(keep.size()), d.X.cols());
    out.y.resize(static_cast<Eigen::Index>(keep.size()));
    out.row_index.reserve(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = d.X.row(keep[i]);
        out.y(static_cast<Eigen::Index>(i)) = d.y(keep[i]);
        out.row_index.push_back(d.row_index[static_cast<std::size_t>(keep[i])]);
    }
    return out;
}

} // namespace

GlmParams calibrate_glm(const data::DailyPanel& panel, const std::set<std::size_t>& excluded) {
    GlmParams params;

    // Step 1: time effects only.
    const auto d1_full = design_matrix(panel, false);
    const auto d1 = drop_rows(d1_full, excluded);
    const auto fit1 = fit_ols(d1.X, d1.y, coef_names(false));

    // Step 2: autocorrelation diagnostic of the step-1 residuals.
    std::vector<double> resid1(fit1.residuals.data(), fit1.residuals.data() + fit1.residuals.size());
    const int max_lag = std::min<int>(30, static_cast<int>(resid1.size()) - 1);
    params.step1_diagnostics = acf_pacf(resid1, max_lag);

    // Step 3: full model with the AR(1) lag column.
    const auto d3_full = design_matrix(panel, true);
    const auto d3 = drop_rows(d3_full, excluded);
    const auto fit3 = fit_ols(d3.X, d3.y, coef_names(true));
    params.coef = fit3.coef;
    params.se = fit3.se;
    params.rss = fit3.rss;
    params.s2 = fit3.s2;

    if (std::abs(params.gamma()) >= 1.0)
        params.warnings.push_back("fitted AR coefficient |gamma| >= 1: series may be nonstationary");

    // Residuals over all rows 2..n with the final coefficients (outliers reinserted).
    params.residuals = d3_full.y - d3_full.X * params.coef;
    params.residual_rows = d3_full.row_index;
    return params;
}

double time_effect(const Eigen::VectorXd& coef, int day_index, bool saturday, bool sunday) {
    const double wt = data::kYearOmega * day_index;
    return coef(kIntercept) + coef(kTrend) * day_index + coef(kCos) * std::cos(wt) +
           coef(kSin) * std::sin(wt) + (saturday ? coef(kSaturday) : 0.0) +
           (sunday ? coef(kSunday) : 0.0);
}

Eigen::VectorXd time_effects(const Eigen::VectorXd& coef, const data::DailyPanel& panel,
                             std::size_t first, std::size_t last) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(last - first));
    for (std::size_t i = first; i < last; ++i)
        out(static_cast<Eigen::Index>(i - first)) =
            time_effect(coef, panel.day_index[i], panel.dates[i].is_saturday(),
                        panel.dates[i].is_sunday());
    return out;
}

std::set<std::size_t> screen_outliers(const data::DailyPanel& panel, double k, int max_rounds) {
    const auto log_c = panel.log_consumption();
    std::set<std::size_t> flagged;
    for (int round = 0; round < max_rounds; ++round) {
        const auto d_full = design_matrix(panel, false);
        const auto d = drop_rows(d_full, flagged);
        const auto fit = fit_ols(d.X, d.y, coef_names(false));
        Eigen::VectorXd seasonal = d_full.X * fit.coef;
        std::vector<double> fit_series(seasonal.data(), seasonal.data() + seasonal.size());
        auto next = data::detect_outliers(log_c, fit_series, k);
        if (next == flagged) break;
        flagged = std::move(next);
    }
    return flagged;
}

} // namespace gpx::glm
