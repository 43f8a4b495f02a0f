#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ecopf {

/// Instant in time with the UTC offset it was written with, so files
/// round-trip without altering their wall-clock representation.
struct Timestamp {
    std::int64_t epoch_s = 0;  // seconds since 1970-01-01T00:00:00Z
    int offset_minutes = 0;

    std::int64_t local_s() const { return epoch_s + 60LL * offset_minutes; }
    /// Local civil day as days since 1970-01-01.
    std::int64_t local_day() const;
    /// Seconds past local midnight.
    int local_seconds_of_day() const;

    bool operator==(const Timestamp& other) const { return epoch_s == other.epoch_s; }
};

/// Parse "YYYY-MM-DDTHH:MM[:SS](Z|+HH:MM|-HH:MM)". The offset is mandatory.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(const Timestamp& ts);

/// Days since the epoch for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int year, int month, int day);
void civil_from_days(std::int64_t days, int& year, int& month, int& day);

/// Parse "YYYY-MM-DD".
std::int64_t parse_date(const std::string& text);
std::string format_date(std::int64_t days);

/// Uniformly spaced measurements; NaN entries mark gaps explicitly.
struct TimeSeries {
    Timestamp start;
    int step_minutes = 15;
    std::vector<double> values;
    std::string unit;

    std::size_t size() const { return values.size(); }
    Timestamp time_at(std::size_t i) const;
    bool is_gap(std::size_t i) const;
    /// Index of the sample at `ts`, or -1 if off-grid / out of range.
    std::int64_t index_of(const Timestamp& ts) const;
    std::size_t gap_count() const;
};

struct SeriesSchema {
    int expected_step_minutes = 0; // 0 = infer from the file
    std::string unit;
};

/// Read a "timestamp,value" CSV. Duplicate or out-of-order timestamps are
/// errors; skipped rows become explicit NaN gaps.
TimeSeries load_series_csv(const std::string& path, const SeriesSchema& schema = {});
void write_series_csv(const TimeSeries& series, const std::string& path);

/// Time-weighted mean from 10-minute to 15-minute spacing. Windows align to
/// the hour and each covers 1.5 source intervals (weights 1 and 0.5
/// alternating); a window touching a gap becomes a gap.
TimeSeries downsample_10_to_15(const TimeSeries& series);

} // namespace ecopf
