#include "gpx/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gpx/errors.hpp"

namespace gpx::artifacts {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    return out;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON (" + e.what() + ")");
    }
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

std::string stars(double estimate, double se) {
    if (!(se > 0.0)) return "";
    const double t = std::abs(estimate / se);
    if (t > 2.5758293035489004) return "***";  // 1%
    if (t > 1.959963984540054) return "**";    // 5%
    if (t > 1.6448536269514722) return "*";    // 10%
    return "";
}

} // namespace

void write_model(const pipeline::CalibratedModel& model, const std::string& path) {
    json j;
    j["format"] = "gpx-model-v1";
    j["split"] = {{"is_start", model.split_dates.is_start.to_string()},
                  {"is_end", model.split_dates.is_end.to_string()},
                  {"os_start", model.split_dates.os_start.to_string()},
                  {"os_end", model.split_dates.os_end.to_string()}};

    json coefs, ses;
    const auto names = glm::coef_names(true);
    for (std::size_t i = 0; i < names.size(); ++i) {
        coefs[names[i]] = model.glm.coef(static_cast<Eigen::Index>(i));
        ses[names[i]] = model.glm.se(static_cast<Eigen::Index>(i));
    }
    j["glm"] = {{"coefficients", coefs}, {"standard_errors", ses}, {"rss", model.glm.rss},
                {"s2", model.glm.s2}};

    j["gp"] = {{"sigma", model.gp.sigma}, {"sigma_f", model.gp.sigma_f},
               {"sigma_l", model.gp.sigma_l}};
    j["standardization"] = {{"mean", vector_to_json(model.regressors.stats.mean)},
                            {"stddev", vector_to_json(model.regressors.stats.stddev)}};

    json outliers = json::array();
    for (std::size_t row : model.outlier_rows) outliers.push_back(model.work.dates[row].to_string());
    j["outlier_dates"] = outliers;

    j["optimizer_trace"] = {{"iterations", model.trace.iterations},
                            {"likelihood_evals", model.trace.likelihood_evals},
                            {"converged", model.trace.converged},
                            {"final_loglik", model.trace.final_loglik},
                            {"grad_inf_norm", model.trace.grad_inf_norm},
                            {"restarts_tried", model.trace.restarts_tried},
                            {"best_restart", model.trace.best_restart}};
    if (model.has_bootstrap) {
        j["bootstrap"] = {{"replicas", model.bootstrap.replicas},
                          {"failed", model.bootstrap.failed},
                          {"se", {{"sigma", model.bootstrap.se_sigma},
                                  {"sigma_f", model.bootstrap.se_sigma_f},
                                  {"sigma_l", model.bootstrap.se_sigma_l}}}};
    }
    j["residuals"] = vector_to_json(model.residuals);
    json warn = json::array();
    for (const auto& w : model.warnings) warn.push_back(w);
    j["warnings"] = warn;

    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

pipeline::CalibratedModel load_model(const std::string& path, const data::DailyPanel& panel) {
    const json j = read_json(path);
    if (!j.contains("format") || j["format"] != "gpx-model-v1")
        throw ValidationError(path + ": not a gpx model artifact");

    pipeline::CalibratedModel model;
    model.split_dates.is_start = data::Date::parse(j["split"]["is_start"].get<std::string>());
    model.split_dates.is_end = data::Date::parse(j["split"]["is_end"].get<std::string>());
    model.split_dates.os_start = data::Date::parse(j["split"]["os_start"].get<std::string>());
    model.split_dates.os_end = data::Date::parse(j["split"]["os_end"].get<std::string>());

    const auto resolved = data::resolve_split(panel, model.split_dates);
    model.work = panel.slice(resolved.is_begin, resolved.os_end);
    model.work.validate(true);
    model.split =
        data::ResolvedSplit{0, resolved.n(), resolved.n(), resolved.n() + resolved.n_star()};

    const auto names = glm::coef_names(true);
    model.glm.coef.resize(static_cast<Eigen::Index>(names.size()));
    model.glm.se.resize(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        model.glm.coef(static_cast<Eigen::Index>(i)) = j["glm"]["coefficients"].at(names[i]).get<double>();
        model.glm.se(static_cast<Eigen::Index>(i)) = j["glm"]["standard_errors"].at(names[i]).get<double>();
    }
    model.glm.rss = j["glm"]["rss"].get<double>();
    model.glm.s2 = j["glm"]["s2"].get<double>();

    model.gp.sigma = j["gp"]["sigma"].get<double>();
    model.gp.sigma_f = j["gp"]["sigma_f"].get<double>();
    model.gp.sigma_l = j["gp"]["sigma_l"].get<double>();

    data::StandardizationStats stats;
    stats.mean = vector_from_json(j["standardization"]["mean"]);
    stats.stddev = vector_from_json(j["standardization"]["stddev"]);
    model.gp.stats = stats;
    model.regressors = data::apply_standardization(model.work, model.split, stats);

    model.residuals = vector_from_json(j["residuals"]);
    if (model.residuals.size() != static_cast<Eigen::Index>(model.split.n()) - 1)
        throw ValidationError(path + ": residual length does not match the IS range");
    model.residual_rows.clear();
    for (std::size_t r = 1; r < model.split.n(); ++r) model.residual_rows.push_back(r);

    for (const auto& d : j["outlier_dates"]) {
        const std::size_t row = model.work.find(data::Date::parse(d.get<std::string>()));
        if (row != data::DailyPanel::npos) model.outlier_rows.insert(row);
    }
    return model;
}

void write_glm_report(const pipeline::CalibratedModel& model, const std::string& path) {
    json j;
    j["format"] = "gpx-glm-report-v1";
    json rows = json::array();
    const auto names = glm::coef_names(true);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double est = model.glm.coef(static_cast<Eigen::Index>(i));
        const double se = model.glm.se(static_cast<Eigen::Index>(i));
        rows.push_back({{"name", names[i]}, {"estimate", est}, {"se", se},
                        {"significance", stars(est, se)}});
    }
    j["coefficients"] = rows;
    j["rss"] = model.glm.rss;
    j["s2"] = model.glm.s2;
    j["residual_acf"] = model.glm.step1_diagnostics.acf;
    j["residual_pacf"] = model.glm.step1_diagnostics.pacf;
    j["acf_band"] = model.glm.step1_diagnostics.band;
    json outliers = json::array();
    for (std::size_t row : model.outlier_rows) outliers.push_back(model.work.dates[row].to_string());
    j["outlier_dates"] = outliers;
    json warn = json::array();
    for (const auto& w : model.warnings) warn.push_back(w);
    j["warnings"] = warn;

    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_trace(const pipeline::CalibratedModel& model, const std::string& path) {
    json j;
    j["format"] = "gpx-optimizer-trace-v1";
    j["iterations"] = model.trace.iterations;
    j["likelihood_evals"] = model.trace.likelihood_evals;
    j["converged"] = model.trace.converged;
    j["final_loglik"] = model.trace.final_loglik;
    j["grad_inf_norm"] = model.trace.grad_inf_norm;
    j["restarts_tried"] = model.trace.restarts_tried;
    j["best_restart"] = model.trace.best_restart;
    json warn = json::array();
    for (const auto& w : model.trace.warnings) warn.push_back(w);
    j["warnings"] = warn;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_forecast_csv(const forecast::DensityForecast& fc, const std::string& path) {
    auto out = open_out(path);
    out << "date,point_mwh";
    char buf[64];
    for (double q : fc.levels) {
        const int pct = static_cast<int>(std::lround(q * 100.0));
        out << ",lo_" << pct << ",hi_" << pct;
    }
    out << ",log_mean,log_var\n";
    for (Eigen::Index i = 0; i < fc.log_mean.size(); ++i) {
        out << fc.dates[static_cast<std::size_t>(i)].to_string();
        std::snprintf(buf, sizeof(buf), ",%.17g", fc.point_mwh(i));
        out << buf;
        for (std::size_t l = 0; l < fc.levels.size(); ++l) {
            std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", fc.lo[l](i), fc.hi[l](i));
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", fc.log_mean(i), fc.log_var(i));
        out << buf;
    }
    if (!out) throw ValidationError("failed writing " + path);
}

LoadedForecast load_forecast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) header.push_back(f);
    }
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ValidationError(path + ": missing column '" + name + "'");
    };
    const std::size_t c_date = col("date"), c_point = col("point_mwh");
    const std::size_t c_mean = col("log_mean"), c_var = col("log_var");

    LoadedForecast fc;
    std::vector<double> point, mean, var;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() < header.size())
            throw ValidationError(path + ": row " + std::to_string(row_no) + ": too few fields");
        fc.dates.push_back(data::Date::parse(fields[c_date]));
        point.push_back(std::stod(fields[c_point]));
        mean.push_back(std::stod(fields[c_mean]));
        var.push_back(std::stod(fields[c_var]));
    }
    fc.point_mwh = Eigen::Map<Eigen::VectorXd>(point.data(), static_cast<Eigen::Index>(point.size()));
    fc.log_mean = Eigen::Map<Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    fc.log_var = Eigen::Map<Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
    return fc;
}

namespace {

json report_to_json(const eval::EvaluationReport& rep) {
    json j;
    j["rmse"] = rep.point.rmse;
    j["mape"] = rep.point.mape;
    j["n_days"] = rep.n_days;
    json cov = json::array();
    for (const auto& bt : rep.coverage) {
        cov.push_back({{"level", bt.level},
                       {"empirical_coverage", bt.empirical_coverage},
                       {"violations", bt.violations},
                       {"lr_uc", bt.lr_uc},
                       {"lr_cc", bt.lr_cc},
                       {"uc_pass", bt.uc_pass},
                       {"cc_pass", bt.cc_pass}});
    }
    j["coverage"] = cov;
    return j;
}

} // namespace

void write_evaluation(const eval::EvaluationReport& report, const std::string& json_path,
                      const std::string& curves_csv_path, const std::string& coverage_csv_path) {
    {
        json j = report_to_json(report);
        j["format"] = "gpx-evaluation-v1";
        auto out = open_out(json_path);
        out << j.dump(2) << "\n";
    }
    {
        auto out = open_out(curves_csv_path);
        out << "percentile,pinball,winkler\n";
        char buf[80];
        for (std::size_t p = 0; p < report.pinball_curve.size(); ++p) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", p + 1, report.pinball_curve[p],
                          report.winkler_curve[p]);
            out << buf;
        }
    }
    {
        auto out = open_out(coverage_csv_path);
        out << "level,empirical_coverage,violations,lr_uc,lr_cc,uc_pass,cc_pass\n";
        char buf[160];
        for (const auto& bt : report.coverage) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%.17g,%d,%d\n", bt.level,
                          bt.empirical_coverage, bt.violations, bt.lr_uc, bt.lr_cc,
                          bt.uc_pass ? 1 : 0, bt.cc_pass ? 1 : 0);
            out << buf;
        }
    }
}

void write_comparison(const bench::Comparison& cmp, const std::string& table_csv_path,
                      const std::string& pinball_csv_path, const std::string& winkler_csv_path) {
    {
        auto out = open_out(table_csv_path);
        out << "metric,glm,arx,gpx\n";
        char buf[160];
        auto row = [&](const std::string& name, double g, double a, double x) {
            std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", name.c_str(), g, a, x);
            out << buf;
        };
        row("rmse", cmp.glm.point.rmse, cmp.arx.point.rmse, cmp.gpx.point.rmse);
        row("mape", cmp.glm.point.mape, cmp.arx.point.mape, cmp.gpx.point.mape);
        for (std::size_t i = 0; i < cmp.gpx.coverage.size(); ++i) {
            const int pct = static_cast<int>(std::lround(cmp.gpx.coverage[i].level * 100.0));
            row("coverage_" + std::to_string(pct), cmp.glm.coverage[i].empirical_coverage,
                cmp.arx.coverage[i].empirical_coverage, cmp.gpx.coverage[i].empirical_coverage);
            row("lr_uc_" + std::to_string(pct), cmp.glm.coverage[i].lr_uc,
                cmp.arx.coverage[i].lr_uc, cmp.gpx.coverage[i].lr_uc);
            row("lr_cc_" + std::to_string(pct), cmp.glm.coverage[i].lr_cc,
                cmp.arx.coverage[i].lr_cc, cmp.gpx.coverage[i].lr_cc);
        }
    }
    auto write_curve = [&](const std::string& path, auto accessor) {
        auto out = open_out(path);
        out << "percentile,glm,arx,gpx\n";
        char buf[120];
        for (std::size_t p = 0; p < 99; ++p) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", p + 1,
                          accessor(cmp.glm)[p], accessor(cmp.arx)[p], accessor(cmp.gpx)[p]);
            out << buf;
        }
    };
    write_curve(pinball_csv_path,
                [](const eval::EvaluationReport& r) -> const std::vector<double>& {
                    return r.pinball_curve;
                });
    write_curve(winkler_csv_path,
                [](const eval::EvaluationReport& r) -> const std::vector<double>& {
                    return r.winkler_curve;
                });
}

void write_truth(const bench::SyntheticSpec& spec, const std::string& path) {
    json j;
    j["format"] = "gpx-synthetic-truth-v1";
    j["glm"] = {{"beta0", spec.beta0}, {"beta1", spec.beta1}, {"cos", spec.beta_cos},
                {"sin", spec.beta_sin}, {"saturday", spec.beta_sat}, {"sunday", spec.beta_sun},
                {"gamma", spec.gamma}};
    j["gp"] = {{"sigma", spec.sigma}, {"sigma_f", spec.sigma_f}, {"sigma_l", spec.sigma_l}};
    j["n"] = spec.n;
    j["n_star"] = spec.n_star;
    j["seed"] = spec.seed;
    j["start"] = spec.start.to_string();
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

} // namespace gpx::artifacts
