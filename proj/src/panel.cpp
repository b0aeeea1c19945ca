#include "gpx/panel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gpx/stats.hpp"

namespace gpx::data {

std::vector<double> DailyPanel::log_consumption() const {
    std::vector<double> out(consumption.size());
    for (std::size_t i = 0; i < consumption.size(); ++i) out[i] = std::log(consumption[i]);
    return out;
}

DailyPanel DailyPanel::slice(std::size_t first, std::size_t last) const {
    DailyPanel out;
    out.dates.assign(dates.begin() + first, dates.begin() + last);
    out.consumption.assign(consumption.begin() + first, consumption.begin() + last);
    out.weather.assign(weather.begin() + first, weather.begin() + last);
    out.renumber_days();
    return out;
}

std::size_t DailyPanel::find(Date d) const {
    auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return npos;
    return static_cast<std::size_t>(it - dates.begin());
}

void DailyPanel::validate(bool require_gap_free) const {
    const std::size_t n = dates.size();
    if (consumption.size() != n || weather.size() != n || day_index.size() != n)
        throw ValidationError("panel: column lengths disagree");
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && dates[i] <= dates[i - 1])
            throw ValidationError("panel: dates not strictly increasing at row " + std::to_string(i + 1));
        if (require_gap_free && i > 0 && dates[i].serial != dates[i - 1].serial + 1 &&
            !(dates[i - 1].next_day().is_feb29() && dates[i].serial == dates[i - 1].serial + 2))
            throw ValidationError("panel: calendar gap before " + dates[i].to_string());
        if (!(consumption[i] > 0.0))
            throw ValidationError("panel: non-positive consumption on " + dates[i].to_string());
        const auto& w = weather[i];
        if (w[5] < 0.0 || w[5] > 100.0)
            throw ValidationError("panel: humidity out of [0,100] on " + dates[i].to_string());
        if (w[6] < 0.0 || w[6] > 8.0)
            throw ValidationError("panel: cloud cover out of [0,8] on " + dates[i].to_string());
    }
}

ResolvedSplit resolve_split(const DailyPanel& panel, const SplitSpec& split,
                            std::vector<std::string>* warnings) {
    if (split.is_start > split.is_end || split.os_start > split.os_end)
        throw ValidationError("split: range start after range end");
    const std::size_t is_begin = panel.find(split.is_start);
    const std::size_t is_last = panel.find(split.is_end);
    const std::size_t os_begin = panel.find(split.os_start);
    const std::size_t os_last = panel.find(split.os_end);
    if (is_begin == DailyPanel::npos || is_last == DailyPanel::npos)
        throw ValidationError("split: IS range not covered by panel");
    if (os_begin == DailyPanel::npos || os_last == DailyPanel::npos)
        throw ValidationError("split: OS range not covered by panel");
    if (os_begin != is_last + 1)
        throw ValidationError("split: OS range must immediately follow IS range");
    ResolvedSplit r{is_begin, is_last + 1, os_begin, os_last + 1};
    if (r.n_star() < 1) throw ValidationError("split: empty OS range");
    if (warnings && r.n() < 366)
        warnings->push_back("IS length " + std::to_string(r.n()) +
                            " is below one full seasonal cycle (366 recommended)");
    return r;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        if (!std::isfinite(v)) throw std::invalid_argument("nonfinite");
        return v;
    } catch (const std::exception&) {
        throw ValidationError("row " + std::to_string(row) + ": unparsable value '" + text +
                              "' in column '" + column + "'");
    }
}

} // namespace

DailyPanel load_panel(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open input file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    auto header = split_csv_line(trim(line));
    for (auto& h : header) h = trim(h);

    auto column_of = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw ValidationError(path + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    const std::size_t date_col = column_of(schema.date);
    const std::size_t cons_col = column_of(schema.consumption);
    std::array<std::size_t, kWeatherDims> weather_cols{};
    for (int j = 0; j < kWeatherDims; ++j) weather_cols[j] = column_of(schema.weather[j]);

    struct Row {
        Date date;
        double consumption;
        std::array<double, kWeatherDims> weather;
    };
    std::vector<Row> rows;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto fields = split_csv_line(trimmed);
        if (fields.size() < header.size())
            throw ValidationError("row " + std::to_string(row_no) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
        Row r;
        try {
            r.date = Date::parse(trim(fields[date_col]));
        } catch (const ValidationError& e) {
            throw ValidationError("row " + std::to_string(row_no) + ": " + e.what());
        }
        r.consumption = parse_number(trim(fields[cons_col]), row_no, schema.consumption);
        if (!(r.consumption > 0.0))
            throw ValidationError("row " + std::to_string(row_no) + ": non-positive consumption on " +
                                  r.date.to_string());
        for (int j = 0; j < kWeatherDims; ++j)
            r.weather[j] = parse_number(trim(fields[weather_cols[j]]), row_no, schema.weather[j]);
        rows.push_back(r);
    }
    if (rows.empty()) throw ValidationError(path + ": no data rows");

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].date == rows[i - 1].date)
            throw ValidationError("duplicate date " + rows[i].date.to_string());

    DailyPanel panel;
    panel.dates.reserve(rows.size());
    for (const auto& r : rows) {
        panel.dates.push_back(r.date);
        panel.consumption.push_back(r.consumption);
        panel.weather.push_back(r.weather);
    }
    panel.renumber_days();
    panel.validate(false);
    return panel;
}

void write_panel(const DailyPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << "date,consumption,temperature,wind_speed,precipitation,chill,"
           "solar_radiation,humidity,cloud_cover\n";
    char buf[64];
    for (std::size_t i = 0; i < panel.size(); ++i) {
        out << panel.dates[i].to_string();
        std::snprintf(buf, sizeof(buf), ",%.17g", panel.consumption[i]);
        out << buf;
        for (int j = 0; j < kWeatherDims; ++j) {
            std::snprintf(buf, sizeof(buf), ",%.17g", panel.weather[i][j]);
            out << buf;
        }
        out << "\n";
    }
    if (!out) throw ValidationError("failed writing " + path);
}

DailyPanel strip_leap_days(const DailyPanel& panel) {
    DailyPanel out;
    for (std::size_t i = 0; i < panel.size(); ++i) {
        if (panel.dates[i].is_feb29()) continue;
        out.dates.push_back(panel.dates[i]);
        out.consumption.push_back(panel.consumption[i]);
        out.weather.push_back(panel.weather[i]);
    }
    out.renumber_days();
    return out;
}

std::set<std::size_t> detect_outliers(std::span<const double> log_consumption,
                                      std::span<const double> seasonal_fit, double k) {
    if (log_consumption.size() != seasonal_fit.size())
        throw ValidationError("detect_outliers: series lengths disagree");
    if (log_consumption.empty()) return {};
    std::vector<double> resid(log_consumption.size());
    for (std::size_t i = 0; i < resid.size(); ++i)
        resid[i] = log_consumption[i] - seasonal_fit[i];
    const double center = stats::median(resid);
    const double scale = stats::mad_std(resid);
    std::set<std::size_t> flagged;
    if (scale <= 0.0) return flagged;
    for (std::size_t i = 0; i < resid.size(); ++i)
        if (std::abs(resid[i] - center) > k * scale) flagged.insert(i);
    return flagged;
}

} // namespace gpx::data
