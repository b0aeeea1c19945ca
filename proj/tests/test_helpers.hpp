#pragma once

#include <Eigen/Dense>
#include <array>
#include <random>
#include <vector>

#include "gpx/panel.hpp"

namespace test_helpers {

/// Small hand-built panel starting at the given date with synthetic but valid
/// covariates; consumption defaults to a smooth positive series.
inline gpx::data::DailyPanel make_panel(gpx::data::Date start, int days,
                                        unsigned covariate_seed = 7) {
    gpx::data::DailyPanel panel;
    std::mt19937_64 engine(covariate_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    gpx::data::Date d = start;
    for (int i = 0; i < days; ++i) {
        panel.dates.push_back(d);
        panel.consumption.push_back(600.0 + 40.0 * std::sin(0.02 * i) + 5.0 * normal(engine));
        std::array<double, 7> w{};
        w[0] = 9.0 + 6.0 * std::sin(0.017 * i) + normal(engine);             // temperature
        w[1] = std::clamp(3.4 + 1.5 * normal(engine), 0.5, 10.0);            // wind
        w[2] = std::min(std::abs(0.1 * normal(engine)), 1.4);                // precipitation
        w[3] = std::clamp(30.0 + 20.0 * normal(engine), 0.5, 140.0);         // chill
        w[4] = std::clamp(400.0 + 250.0 * normal(engine), 15.0, 1200.0);     // solar
        w[5] = std::clamp(85.0 + 7.0 * normal(engine), 60.0, 100.0);         // humidity
        w[6] = std::clamp(5.7 + 1.2 * normal(engine), 0.0, 8.0);             // cloud cover
        panel.weather.push_back(w);
        d = d.next_day();
    }
    panel.renumber_days();
    return panel;
}

inline Eigen::MatrixXd random_points(int n, int dims, unsigned seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd X(n, dims);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dims; ++j) X(i, j) = normal(engine);
    return X;
}

inline Eigen::VectorXd random_vector(int n, unsigned seed, double scale = 1.0) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(engine);
    return v;
}

} // namespace test_helpers
