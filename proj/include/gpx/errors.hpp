#pragma once

#include <stdexcept>
#include <string>

namespace gpx {

/// Input/validation problems: bad files, malformed rows, schema violations.
/// CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures: non-PD covariance after jitter escalation, optimizer
/// breakdown, negative variances beyond tolerance. CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gpx
