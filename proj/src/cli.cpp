#include "gpx/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "gpx/artifacts.hpp"
#include "gpx/errors.hpp"
#include "gpx/pipeline.hpp"

namespace gpx::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::pair<data::Date, data::Date> parse_date_range(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ValidationError("invalid date range '" + text + "': expected START:END");
    const auto a = data::Date::parse(text.substr(0, colon));
    const auto b = data::Date::parse(text.substr(colon + 1));
    if (b < a) throw ValidationError("invalid date range '" + text + "': end before start");
    return {a, b};
}

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> levels;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) {
        try {
            levels.push_back(std::stod(field));
        } catch (const std::exception&) {
            throw ValidationError("invalid CI level '" + field + "'");
        }
    }
    if (levels.empty()) throw ValidationError("no CI levels given");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0 && levels[i] < 1.0))
            throw ValidationError("CI levels must lie strictly inside (0,1)");
        if (i > 0 && levels[i] <= levels[i - 1])
            throw ValidationError("CI levels must be strictly increasing");
    }
    return levels;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void set_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto range = [&] { return parse_date_range(value); };
    if (key == "input") cfg.input = value;
    else if (key == "out") cfg.out = value;
    else if (key == "model") cfg.model_path = value;
    else if (key == "forecast") cfg.forecast_path = value;
    else if (key == "is_range") {
        if (!cfg.split) cfg.split.emplace();
        std::tie(cfg.split->is_start, cfg.split->is_end) = range();
    } else if (key == "os_range") {
        if (!cfg.split) cfg.split.emplace();
        std::tie(cfg.split->os_start, cfg.split->os_end) = range();
    } else if (key == "levels") cfg.levels = parse_levels(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "bootstrap_replicas") cfg.bootstrap_replicas = std::stoi(value);
    else if (key == "threads") cfg.threads = std::stoi(value);
    else if (key == "outlier_k") cfg.outlier_k = std::stod(value);
    else if (key == "point_kind") {
        if (value != "median" && value != "mean")
            throw ValidationError("point_kind must be 'median' or 'mean'");
        cfg.point_kind = value;
    } else if (key == "gp_max_iterations") cfg.optimizer.max_iterations = std::stoi(value);
    else if (key == "gp_grad_tol") cfg.optimizer.grad_tol = std::stod(value);
    else if (key == "gp_initial_step") cfg.optimizer.initial_step = std::stod(value);
    else if (key == "gp_restarts") cfg.optimizer.restarts = std::stoi(value);
    else if (key == "sim_n") cfg.synthetic.n = std::stoi(value);
    else if (key == "sim_n_star") cfg.synthetic.n_star = std::stoi(value);
    else if (key == "sim_start") cfg.synthetic.start = data::Date::parse(value);
    else if (key == "sim_beta0") cfg.synthetic.beta0 = std::stod(value);
    else if (key == "sim_beta1") cfg.synthetic.beta1 = std::stod(value);
    else if (key == "sim_cos") cfg.synthetic.beta_cos = std::stod(value);
    else if (key == "sim_sin") cfg.synthetic.beta_sin = std::stod(value);
    else if (key == "sim_saturday") cfg.synthetic.beta_sat = std::stod(value);
    else if (key == "sim_sunday") cfg.synthetic.beta_sun = std::stod(value);
    else if (key == "sim_gamma") cfg.synthetic.gamma = std::stod(value);
    else if (key == "sim_sigma") cfg.synthetic.sigma = std::stod(value);
    else if (key == "sim_sigma_f") cfg.synthetic.sigma_f = std::stod(value);
    else if (key == "sim_sigma_l") cfg.synthetic.sigma_l = std::stod(value);
    else throw ValidationError("unknown config key '" + key + "'");
}

std::string strip_quotes(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

} // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = strip_quotes(trim(line.substr(eq + 1)));
        try {
            set_key(cfg, key, value);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const std::exception& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": bad value for '" +
                                  key + "': " + e.what());
        }
    }
}

void write_effective_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << "input = \"" << cfg.input << "\"\n";
    out << "out = \"" << cfg.out << "\"\n";
    if (!cfg.model_path.empty()) out << "model = \"" << cfg.model_path << "\"\n";
    if (!cfg.forecast_path.empty()) out << "forecast = \"" << cfg.forecast_path << "\"\n";
    if (cfg.split) {
        out << "is_range = " << cfg.split->is_start.to_string() << ":"
            << cfg.split->is_end.to_string() << "\n";
        out << "os_range = " << cfg.split->os_start.to_string() << ":"
            << cfg.split->os_end.to_string() << "\n";
    }
    out << "levels = ";
    for (std::size_t i = 0; i < cfg.levels.size(); ++i)
        out << (i ? "," : "") << fmt(cfg.levels[i]);
    out << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "bootstrap_replicas = " << cfg.bootstrap_replicas << "\n";
    out << "threads = " << cfg.threads << "\n";
    out << "outlier_k = " << fmt(cfg.outlier_k) << "\n";
    out << "point_kind = \"" << cfg.point_kind << "\"\n";
    out << "gp_max_iterations = " << cfg.optimizer.max_iterations << "\n";
    out << "gp_grad_tol = " << fmt(cfg.optimizer.grad_tol) << "\n";
    out << "gp_initial_step = " << fmt(cfg.optimizer.initial_step) << "\n";
    out << "gp_restarts = " << cfg.optimizer.restarts << "\n";
    out << "sim_n = " << cfg.synthetic.n << "\n";
    out << "sim_n_star = " << cfg.synthetic.n_star << "\n";
    out << "sim_start = " << cfg.synthetic.start.to_string() << "\n";
    out << "sim_beta0 = " << fmt(cfg.synthetic.beta0) << "\n";
    out << "sim_beta1 = " << fmt(cfg.synthetic.beta1) << "\n";
    out << "sim_cos = " << fmt(cfg.synthetic.beta_cos) << "\n";
    out << "sim_sin = " << fmt(cfg.synthetic.beta_sin) << "\n";
    out << "sim_saturday = " << fmt(cfg.synthetic.beta_sat) << "\n";
    out << "sim_sunday = " << fmt(cfg.synthetic.beta_sun) << "\n";
    out << "sim_gamma = " << fmt(cfg.synthetic.gamma) << "\n";
    out << "sim_sigma = " << fmt(cfg.synthetic.sigma) << "\n";
    out << "sim_sigma_f = " << fmt(cfg.synthetic.sigma_f) << "\n";
    out << "sim_sigma_l = " << fmt(cfg.synthetic.sigma_l) << "\n";
}

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

void prepare_out_dir(const RunConfig& cfg) {
    require(!cfg.out.empty(), "missing output directory (--out)");
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw ValidationError("cannot create output directory " + cfg.out + ": " + ec.message());
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out) / name).string();
}

void report_error(const RunConfig& cfg, const std::string& message, int code) {
    json j{{"error", message}, {"exit_code", code}};
    std::cerr << j.dump() << "\n";
    if (!cfg.out.empty()) {
        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (!ec) {
            std::ofstream out(out_path(cfg, "error.json"));
            if (out) out << j.dump(2) << "\n";
        }
    }
}

int run_guarded(const RunConfig& cfg, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const ValidationError& e) {
        report_error(cfg, e.what(), kExitInputError);
        return kExitInputError;
    } catch (const std::exception& e) {
        report_error(cfg, e.what(), kExitNumericalError);
        return kExitNumericalError;
    }
}

pipeline::CalibrationOptions calibration_options(const RunConfig& cfg, bool with_bootstrap) {
    pipeline::CalibrationOptions opts;
    opts.outlier_k = cfg.outlier_k;
    opts.optimizer = cfg.optimizer;
    opts.bootstrap_replicas = with_bootstrap ? cfg.bootstrap_replicas : 0;
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    return opts;
}

data::DailyPanel load_input(const RunConfig& cfg) {
    require(!cfg.input.empty(), "missing input file (--input)");
    require(fs::exists(cfg.input), "input file does not exist: " + cfg.input);
    return data::strip_leap_days(data::load_panel(cfg.input));
}

void check_os_coverage(const data::DailyPanel& panel, const data::SplitSpec& split) {
    std::vector<std::string> missing;
    for (data::Date d = split.os_start; d <= split.os_end; d = d.next_day()) {
        if (d.is_feb29()) continue;
        if (panel.find(d) == data::DailyPanel::npos) missing.push_back(d.to_string());
    }
    if (!missing.empty()) {
        std::string msg = "OS covariates missing for dates:";
        for (const auto& m : missing) msg += " " + m;
        throw ValidationError(msg);
    }
}

forecast::PointKind point_kind(const RunConfig& cfg) {
    return cfg.point_kind == "mean" ? forecast::PointKind::LognormalMean
                                    : forecast::PointKind::LognormalMedian;
}

} // namespace

int cmd_calibrate(const RunConfig& cfg) {
    return run_guarded(cfg, [&] {
        prepare_out_dir(cfg);
        require(cfg.split.has_value(), "missing IS/OS ranges (--is-range/--os-range)");
        const auto panel = load_input(cfg);
        const auto model = pipeline::calibrate(panel, *cfg.split, calibration_options(cfg, true));
        for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
        artifacts::write_model(model, out_path(cfg, "model.json"));
        artifacts::write_glm_report(model, out_path(cfg, "glm_report.json"));
        artifacts::write_trace(model, out_path(cfg, "optimizer_trace.json"));
        write_effective_config(cfg, out_path(cfg, "effective_config.toml"));
    });
}

int cmd_forecast(const RunConfig& cfg) {
    return run_guarded(cfg, [&] {
        prepare_out_dir(cfg);
        const auto panel = load_input(cfg);
        const std::string model_file =
            cfg.model_path.empty() ? out_path(cfg, "model.json") : cfg.model_path;
        require(fs::exists(model_file), "model artifact does not exist: " + model_file);
        const auto model = artifacts::load_model(model_file, panel);
        check_os_coverage(model.work, model.split_dates);
        const auto fc = pipeline::forecast_os(model, cfg.levels, point_kind(cfg));
        artifacts::write_forecast_csv(fc, out_path(cfg, "forecast.csv"));
        write_effective_config(cfg, out_path(cfg, "effective_config.toml"));
    });
}

int cmd_evaluate(const RunConfig& cfg) {
    return run_guarded(cfg, [&] {
        prepare_out_dir(cfg);
        const auto panel = load_input(cfg);
        const std::string forecast_file =
            cfg.forecast_path.empty() ? out_path(cfg, "forecast.csv") : cfg.forecast_path;
        require(fs::exists(forecast_file), "forecast file does not exist: " + forecast_file);
        const auto loaded = artifacts::load_forecast_csv(forecast_file);

        Eigen::VectorXd realized(static_cast<Eigen::Index>(loaded.dates.size()));
        for (std::size_t i = 0; i < loaded.dates.size(); ++i) {
            const std::size_t row = panel.find(loaded.dates[i]);
            if (row == data::DailyPanel::npos)
                throw ValidationError("realized consumption missing for forecast date " +
                                      loaded.dates[i].to_string());
            realized(static_cast<Eigen::Index>(i)) = panel.consumption[row];
        }

        forecast::DensityForecast fc;
        fc.dates = loaded.dates;
        fc.log_mean = loaded.log_mean;
        fc.log_var = loaded.log_var;
        fc.point_mwh = loaded.point_mwh;
        const auto report = eval::evaluate_forecast(fc, realized, cfg.levels);
        artifacts::write_evaluation(report, out_path(cfg, "evaluation.json"),
                                    out_path(cfg, "pinball_winkler.csv"),
                                    out_path(cfg, "coverage.csv"));
        write_effective_config(cfg, out_path(cfg, "effective_config.toml"));
    });
}

int cmd_compare(const RunConfig& cfg) {
    return run_guarded(cfg, [&] {
        prepare_out_dir(cfg);
        require(cfg.split.has_value(), "missing IS/OS ranges (--is-range/--os-range)");
        const auto panel = load_input(cfg);
        const auto cmp =
            bench::compare_models(panel, *cfg.split, calibration_options(cfg, false), cfg.levels);
        artifacts::write_comparison(cmp, out_path(cfg, "comparison.csv"),
                                    out_path(cfg, "pinball_curve.csv"),
                                    out_path(cfg, "winkler_curve.csv"));
        write_effective_config(cfg, out_path(cfg, "effective_config.toml"));
    });
}

int cmd_simulate(const RunConfig& cfg) {
    return run_guarded(cfg, [&] {
        prepare_out_dir(cfg);
        bench::SyntheticSpec spec = cfg.synthetic;
        spec.seed = cfg.seed;
        const auto sim = bench::simulate_panel(spec);
        data::write_panel(sim.panel, out_path(cfg, "synthetic.csv"));
        artifacts::write_truth(spec, out_path(cfg, "truth.json"));
        write_effective_config(cfg, out_path(cfg, "effective_config.toml"));
    });
}

} // namespace gpx::cli
