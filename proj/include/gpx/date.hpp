#pragma once

#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>

#include "gpx/errors.hpp"

namespace gpx::data {

/// Calendar date held as a serial day count (days since 1970-01-01).
/// Supports exactly what a daily panel needs: ordering, day stepping,
/// weekday lookup and ISO-8601 text.
struct Date {
    std::int32_t serial{0};

    Date() = default;
    explicit Date(std::int32_t s) : serial(s) {}
    Date(int y, int m, int d) : serial(days_from_civil(y, m, d)) {}

    auto operator<=>(const Date&) const = default;

    Date next_day() const { return Date{serial + 1}; }
    Date plus_days(int n) const { return Date{serial + n}; }

    /// 0 = Sunday ... 6 = Saturday.
    int weekday() const { return static_cast<int>(((serial % 7) + 11) % 7); }
    bool is_saturday() const { return weekday() == 6; }
    bool is_sunday() const { return weekday() == 0; }

    bool is_feb29() const {
        auto [y, m, d] = to_civil();
        return m == 2 && d == 29;
    }

    struct Civil { int year, month, day; };

    Civil to_civil() const {
        // Howard Hinnant's civil_from_days.
        std::int64_t z = serial + 719468;
        const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
        const unsigned doe = static_cast<unsigned>(z - era * 146097);
        const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
        const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
        const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        const unsigned mp = (5 * doy + 2) / 153;
        const unsigned d = doy - (153 * mp + 2) / 5 + 1;
        const unsigned m = mp < 10 ? mp + 3 : mp - 9;
        return Civil{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
    }

    static std::int32_t days_from_civil(int y, int m, int d) {
        // Howard Hinnant's days_from_civil.
        y -= m <= 2;
        const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
        const unsigned yoe = static_cast<unsigned>(y - era * 400);
        const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
        const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        return static_cast<std::int32_t>(era * 146097 + static_cast<std::int64_t>(doe) - 719468);
    }

    std::string to_string() const {
        auto [y, m, d] = to_civil();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
        return buf;
    }

    /// Parses strict ISO-8601 "YYYY-MM-DD".
    static Date parse(const std::string& text) {
        int y = 0, m = 0, d = 0;
        char trailing = 0;
        if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &y, &m, &d, &trailing) != 3)
            throw ValidationError("invalid date '" + text + "': expected YYYY-MM-DD");
        if (m < 1 || m > 12 || d < 1 || d > 31)
            throw ValidationError("invalid date '" + text + "': out-of-range field");
        Date parsed(y, m, d);
        auto civil = parsed.to_civil();
        if (civil.year != y || civil.month != m || civil.day != d)
            throw ValidationError("invalid date '" + text + "': no such calendar day");
        return parsed;
    }
};

} // namespace gpx::data
