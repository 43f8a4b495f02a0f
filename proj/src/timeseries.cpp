#include "ecopf/timeseries.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ecopf/errors.hpp"

namespace ecopf {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

bool parse_int(const std::string& s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

} // namespace

std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& year, int& month, int& day) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    year = static_cast<int>(y + (month <= 2));
}

std::int64_t Timestamp::local_day() const {
    const std::int64_t ls = local_s();
    return ls >= 0 ? ls / kSecondsPerDay : (ls - kSecondsPerDay + 1) / kSecondsPerDay;
}

int Timestamp::local_seconds_of_day() const {
    return static_cast<int>(local_s() - local_day() * kSecondsPerDay);
}

Timestamp parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
    if (!parse_int(text, 0, 4, y) || text.size() < 16 || text[4] != '-' ||
        !parse_int(text, 5, 2, mo) || text[7] != '-' || !parse_int(text, 8, 2, d) ||
        (text[10] != 'T' && text[10] != ' ') || !parse_int(text, 11, 2, hh) || text[13] != ':' ||
        !parse_int(text, 14, 2, mi)) {
        throw DataError("unparseable timestamp: " + text);
    }
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!parse_int(text, pos + 1, 2, ss)) throw DataError("unparseable timestamp: " + text);
        pos += 3;
    }
    if (pos >= text.size()) throw DataError("timestamp missing UTC offset: " + text);

    int offset = 0;
    if (text[pos] == 'Z') {
        if (pos + 1 != text.size()) throw DataError("unparseable timestamp: " + text);
    } else if (text[pos] == '+' || text[pos] == '-') {
        int oh = 0, om = 0;
        if (!parse_int(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
            !parse_int(text, pos + 4, 2, om) || pos + 6 != text.size()) {
            throw DataError("unparseable timestamp: " + text);
        }
        offset = oh * 60 + om;
        if (text[pos] == '-') offset = -offset;
    } else {
        throw DataError("timestamp missing UTC offset: " + text);
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh > 23 || mi > 59 || ss > 60) {
        throw DataError("timestamp out of range: " + text);
    }

    Timestamp ts;
    ts.offset_minutes = offset;
    ts.epoch_s = days_from_civil(y, mo, d) * kSecondsPerDay + hh * 3600LL + mi * 60LL + ss -
                 60LL * offset;
    return ts;
}

std::string format_timestamp(const Timestamp& ts) {
    const std::int64_t ls = ts.local_s();
    const std::int64_t day = ts.local_day();
    int y, mo, d;
    civil_from_days(day, y, mo, d);
    const int sod = static_cast<int>(ls - day * kSecondsPerDay);
    char buf[40];
    const int off = ts.offset_minutes;
    if (off == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, mo, d, sod / 3600,
                      (sod / 60) % 60, sod % 60);
    } else {
        const int a = std::abs(off);
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d%c%02d:%02d", y, mo, d,
                      sod / 3600, (sod / 60) % 60, sod % 60, off > 0 ? '+' : '-', a / 60, a % 60);
    }
    return buf;
}

std::int64_t parse_date(const std::string& text) {
    int y = 0, mo = 0, d = 0;
    if (text.size() != 10 || !parse_int(text, 0, 4, y) || text[4] != '-' ||
        !parse_int(text, 5, 2, mo) || text[7] != '-' || !parse_int(text, 8, 2, d) || mo < 1 ||
        mo > 12 || d < 1 || d > 31) {
        throw DataError("unparseable date: " + text);
    }
    return days_from_civil(y, mo, d);
}

std::string format_date(std::int64_t days) {
    int y, mo, d;
    civil_from_days(days, y, mo, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, mo, d);
    return buf;
}

Timestamp TimeSeries::time_at(std::size_t i) const {
    Timestamp ts = start;
    ts.epoch_s += static_cast<std::int64_t>(i) * 60 * step_minutes;
    return ts;
}

bool TimeSeries::is_gap(std::size_t i) const { return std::isnan(values[i]); }

std::int64_t TimeSeries::index_of(const Timestamp& ts) const {
    const std::int64_t diff = ts.epoch_s - start.epoch_s;
    const std::int64_t step_s = 60LL * step_minutes;
    if (diff < 0 || diff % step_s != 0) return -1;
    const std::int64_t idx = diff / step_s;
    return idx < static_cast<std::int64_t>(values.size()) ? idx : -1;
}

std::size_t TimeSeries::gap_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < values.size(); ++i) n += is_gap(i) ? 1 : 0;
    return n;
}

TimeSeries load_series_csv(const std::string& path, const SeriesSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open series file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty series file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,value") {
        throw DataError("series file must start with header \"timestamp,value\": " + path);
    }

    std::vector<Timestamp> stamps;
    std::vector<double> raw;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw DataError(path + ":" + std::to_string(line_no) + ": missing value column");
        }
        stamps.push_back(parse_timestamp(line.substr(0, comma)));
        const std::string field = line.substr(comma + 1);
        if (field.empty()) {
            raw.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(field, &used);
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) + ": bad value: " + field);
            }
            if (used != field.size()) {
                throw DataError(path + ":" + std::to_string(line_no) + ": bad value: " + field);
            }
            raw.push_back(v);
        }
    }
    if (stamps.empty()) throw DataError("series file has no rows: " + path);

    for (std::size_t i = 1; i < stamps.size(); ++i) {
        if (stamps[i].epoch_s == stamps[i - 1].epoch_s) {
            throw DataError(path + ": duplicate timestamp " + format_timestamp(stamps[i]));
        }
        if (stamps[i].epoch_s < stamps[i - 1].epoch_s) {
            throw DataError(path + ": out-of-order timestamp " + format_timestamp(stamps[i]));
        }
    }

    std::int64_t step_s = 0;
    if (schema.expected_step_minutes > 0) {
        step_s = 60LL * schema.expected_step_minutes;
    } else {
        for (std::size_t i = 1; i < stamps.size(); ++i) {
            const std::int64_t d = stamps[i].epoch_s - stamps[i - 1].epoch_s;
            if (step_s == 0 || d < step_s) step_s = d;
        }
        if (step_s == 0) step_s = 15 * 60;
    }

    TimeSeries series;
    series.start = stamps.front();
    series.step_minutes = static_cast<int>(step_s / 60);
    series.unit = schema.unit;
    const std::int64_t span = stamps.back().epoch_s - stamps.front().epoch_s;
    if (span % step_s != 0) throw DataError(path + ": timestamps not aligned to a uniform step");
    series.values.assign(static_cast<std::size_t>(span / step_s) + 1,
                         std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < stamps.size(); ++i) {
        const std::int64_t off = stamps[i].epoch_s - stamps.front().epoch_s;
        if (off % step_s != 0) {
            throw DataError(path + ": timestamp off the step grid: " + format_timestamp(stamps[i]));
        }
        series.values[static_cast<std::size_t>(off / step_s)] = raw[i];
    }
    return series;
}

void write_series_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write series file: " + path);
    out << "timestamp,value\n";
    char buf[32];
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << format_timestamp(series.time_at(i)) << ',';
        if (!series.is_gap(i)) {
            std::snprintf(buf, sizeof buf, "%.9g", series.values[i]);
            out << buf;
        }
        out << '\n';
    }
}

TimeSeries downsample_10_to_15(const TimeSeries& series) {
    if (series.step_minutes != 10) throw DataError("downsample input must have 10-minute spacing");
    if (series.start.local_s() % 3600 != 0) {
        throw DataError("downsample input must start on the hour");
    }

    TimeSeries out;
    out.start = series.start;
    out.step_minutes = 15;
    out.unit = series.unit;

    const std::size_t n = series.size();
    // each 15-minute window averages 1.5 source intervals; source sample k
    // covers [10k, 10k+10) minutes
    const std::size_t windows = (n * 10) / 15;
    out.values.reserve(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        const std::int64_t t0 = static_cast<std::int64_t>(w) * 15;
        const std::int64_t t1 = t0 + 15;
        double acc = 0.0;
        bool gap = false;
        for (std::int64_t k = t0 / 10; k * 10 < t1; ++k) {
            const double overlap =
                static_cast<double>(std::min(t1, (k + 1) * 10) - std::max(t0, k * 10));
            if (series.is_gap(static_cast<std::size_t>(k))) {
                gap = true;
                break;
            }
            acc += overlap * series.values[static_cast<std::size_t>(k)];
        }
        out.values.push_back(gap ? std::numeric_limits<double>::quiet_NaN() : acc / 15.0);
    }
    return out;
}

} // namespace ecopf
