#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gpx/date.hpp"

namespace gpx::data {

inline constexpr int kWeatherDims = 7;

/// Names of the seven weather covariates in canonical column order.
inline constexpr std::array<const char*, kWeatherDims> kWeatherNames = {
    "temperature", "wind_speed", "precipitation", "chill",
    "solar_radiation", "humidity", "cloud_cover"};

/// Maps canonical fields to CSV column names; defaults match the canonical header.
struct CsvSchema {
    std::string date = "date";
    std::string consumption = "consumption";
    std::array<std::string, kWeatherDims> weather = {
        "temperature", "wind_speed", "precipitation", "chill",
        "solar_radiation", "humidity", "cloud_cover"};
};

/// Aligned daily series of consumption and weather with calendar metadata.
/// Invariants (enforced by validate()): dates strictly increasing one per day
/// (gap-free after preprocessing), consumption strictly positive, weather rows
/// of length 7 with humidity in [0,100] and cloud cover in [0,8].
struct DailyPanel {
    std::vector<Date> dates;
    std::vector<double> consumption;                      // MWh, > 0
    std::vector<std::array<double, kWeatherDims>> weather;
    std::vector<int> day_index;                           // t, starting at 1

    std::size_t size() const { return dates.size(); }
    bool empty() const { return dates.empty(); }

    /// Natural log of consumption for every row.
    std::vector<double> log_consumption() const;

    /// Rows [first, last) as a new panel; day_index restarts at 1.
    DailyPanel slice(std::size_t first, std::size_t last) const;

    /// Row of the given date, or npos.
    std::size_t find(Date d) const;

    /// Throws ValidationError on any invariant violation.
    void validate(bool require_gap_free) const;

    void renumber_days() {
        day_index.resize(dates.size());
        for (std::size_t i = 0; i < dates.size(); ++i) day_index[i] = static_cast<int>(i) + 1;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Contiguous In-Sample / Out-of-Sample date split.
struct SplitSpec {
    Date is_start, is_end;  // inclusive
    Date os_start, os_end;  // inclusive
    bool contiguous = true;
};

/// SplitSpec resolved against a panel's rows: half-open row ranges.
struct ResolvedSplit {
    std::size_t is_begin{}, is_end{};  // [is_begin, is_end)
    std::size_t os_begin{}, os_end{};  // [os_begin, os_end)
    std::size_t n() const { return is_end - is_begin; }
    std::size_t n_star() const { return os_end - os_begin; }
};

/// Validates the split against the panel (dates present, OS immediately after IS).
/// Warnings (e.g. n < 366) are appended to *warnings when provided.
ResolvedSplit resolve_split(const DailyPanel& panel, const SplitSpec& split,
                            std::vector<std::string>* warnings = nullptr);

/// Loads and validates a daily panel from CSV. Rows are sorted by date.
/// Errors report the offending 1-based data row.
DailyPanel load_panel(const std::string& path, const CsvSchema& schema = {});

/// Writes the canonical CSV: header
/// date,consumption,temperature,wind_speed,precipitation,chill,solar_radiation,humidity,cloud_cover
void write_panel(const DailyPanel& panel, const std::string& path);

/// Removes every Feb-29 row and renumbers day_index contiguously. Idempotent.
DailyPanel strip_leap_days(const DailyPanel& panel);

/// Flags rows whose |residual from the seasonal fit| exceeds k robust standard
/// deviations. The scale is 1.4826·MAD over all residuals, so the flag set does
/// not feed back into the estimate and a single pass is the fixpoint.
std::set<std::size_t> detect_outliers(std::span<const double> log_consumption,
                                      std::span<const double> seasonal_fit, double k);

} // namespace gpx::data
