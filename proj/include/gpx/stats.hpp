#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gpx::stats {

/// Standard normal CDF Φ(x), accurate to machine precision via erfc.
double normal_cdf(double x);

/// Standard normal quantile Φ⁻¹(p) for p in (0,1).
/// Rational approximation refined by one Halley step; |error| < 1e-13.
double normal_quantile(double p);

double mean(std::span<const double> xs);
/// Sample standard deviation (n−1 denominator).
double sample_std(std::span<const double> xs);
/// Median (copies and partially sorts its input).
double median(std::vector<double> xs);
/// Robust scale estimate 1.4826 · median(|x − median(x)|).
double mad_std(std::span<const double> xs);

} // namespace gpx::stats
