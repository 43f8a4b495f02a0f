#include "ecopf/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ecopf/errors.hpp"

namespace ecopf {

namespace {

constexpr std::int64_t kStepSeconds = 15 * 60;

/// Align a 15-minute series to local midnight, padding with NaN.
void place_into(const TimeSeries& series, std::int64_t first_day, std::vector<double>& out) {
    const std::int64_t day0_start = first_day * 86400 - 60LL * series.start.offset_minutes;
    const std::int64_t shift = (series.start.epoch_s - day0_start) / kStepSeconds;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const std::int64_t idx = shift + static_cast<std::int64_t>(i);
        if (idx >= 0 && idx < static_cast<std::int64_t>(out.size())) {
            out[static_cast<std::size_t>(idx)] = series.values[i];
        }
    }
}

} // namespace

int LagSpec::max_power_lag() const {
    int best = 0;
    for (int a : power_lags) best = std::max(best, a);
    return best;
}

void LagSpec::validate() const {
    std::set<int> seen;
    for (int a : power_lags) {
        if (a <= 0) throw ConfigError("power lag must be strictly positive: " + std::to_string(a));
        if (!seen.insert(a).second) {
            throw ConfigError("duplicate power lag: " + std::to_string(a));
        }
    }
    std::set<int> seen_t;
    for (int b : temperature_lags) {
        if (!seen_t.insert(b).second) {
            throw ConfigError("duplicate temperature lag: " + std::to_string(b));
        }
    }
}

Timestamp SeriesFrame::time_at(std::size_t idx) const {
    Timestamp ts;
    ts.offset_minutes = offset_minutes;
    ts.epoch_s = first_day * 86400 - 60LL * offset_minutes +
                 static_cast<std::int64_t>(idx) * kStepSeconds;
    return ts;
}

std::int64_t SeriesFrame::index_of(std::int64_t day, int step) const {
    const std::int64_t idx = (day - first_day) * steps_per_day + step;
    return idx >= 0 ? idx : -1;
}

SeriesFrame make_frame(const TimeSeries& power, const TimeSeries& temperature) {
    if (power.step_minutes != 15 || temperature.step_minutes != 15) {
        throw DataError("series frame requires 15-minute spacing");
    }
    if ((power.start.local_s() % kStepSeconds) != 0 ||
        (temperature.start.local_s() % kStepSeconds) != 0) {
        throw DataError("series must be aligned to the 15-minute grid");
    }

    SeriesFrame frame;
    frame.offset_minutes = power.start.offset_minutes;
    frame.first_day = std::min(power.start.local_day(), temperature.start.local_day());

    const auto end_day = [&](const TimeSeries& s) {
        return s.time_at(s.size() - 1).local_day() + 1;
    };
    const std::int64_t last_day = std::max(end_day(power), end_day(temperature));
    const auto total =
        static_cast<std::size_t>((last_day - frame.first_day) * SeriesFrame::steps_per_day);

    frame.power.assign(total, std::numeric_limits<double>::quiet_NaN());
    frame.temperature.assign(total, std::numeric_limits<double>::quiet_NaN());
    place_into(power, frame.first_day, frame.power);
    place_into(temperature, frame.first_day, frame.temperature);
    return frame;
}

DesignMatrix build_design_matrix(const SeriesFrame& frame, const LagSpec& lags, int step,
                                 DayCluster cluster, const HolidayCalendar& calendar,
                                 std::size_t history_end) {
    lags.validate();
    if (step < 0 || step >= SeriesFrame::steps_per_day) {
        throw DataError("step-of-day outside 0..95");
    }
    history_end = std::min(history_end, frame.size());

    const std::size_t n_dims = lags.dims();
    std::vector<std::vector<double>> physical(n_dims);
    std::vector<std::int64_t> row_days;
    std::size_t dropped = 0;
    std::vector<std::size_t> lag_violations(n_dims, 0);

    const std::int64_t n_days =
        (static_cast<std::int64_t>(history_end) + SeriesFrame::steps_per_day - 1) /
        SeriesFrame::steps_per_day;

    std::size_t cluster_days_seen = 0;
    for (std::int64_t d = 0; d < n_days; ++d) {
        const std::int64_t target = d * SeriesFrame::steps_per_day + step;
        if (target >= static_cast<std::int64_t>(history_end)) continue;
        if (cluster_of_day(frame.first_day + d, calendar) != cluster) continue;
        ++cluster_days_seen;

        std::vector<double> row(n_dims);
        bool ok = true;
        const auto fetch = [&](const std::vector<double>& track, std::int64_t idx,
                               std::size_t dim) {
            if (idx < 0 || idx >= static_cast<std::int64_t>(track.size()) ||
                std::isnan(track[static_cast<std::size_t>(idx)])) {
                ++lag_violations[dim];
                ok = false;
                return 0.0;
            }
            return track[static_cast<std::size_t>(idx)];
        };

        row[0] = fetch(frame.power, target, 0);
        std::size_t dim = 1;
        for (const int a : lags.power_lags) {
            row[dim] = fetch(frame.power, target - a, dim);
            ++dim;
        }
        for (const int b : lags.temperature_lags) {
            row[dim] = fetch(frame.temperature, target - b, dim);
            ++dim;
        }

        if (!ok) {
            ++dropped;
            continue;
        }
        for (std::size_t k = 0; k < n_dims; ++k) physical[k].push_back(row[k]);
        row_days.push_back(frame.first_day + d);
    }

    if (row_days.empty()) {
        if (cluster_days_seen == 0) {
            throw DataError("no historical days in cluster " + to_string(cluster) + " for step " +
                            std::to_string(step));
        }
        // name the lag that dropped the most rows
        std::size_t worst = 1;
        for (std::size_t k = 1; k < n_dims; ++k) {
            if (lag_violations[k] > lag_violations[worst]) worst = k;
        }
        std::string lag_name;
        if (lag_violations[0] >= lag_violations[worst]) {
            lag_name = "target step";
        } else if (worst <= lags.power_lags.size()) {
            lag_name = "power lag " + std::to_string(lags.power_lags[worst - 1]);
        } else {
            lag_name = "temperature lag " +
                       std::to_string(lags.temperature_lags[worst - 1 - lags.power_lags.size()]);
        }
        throw DataError("insufficient history to cover " + lag_name + " at step " +
                        std::to_string(step));
    }

    DesignMatrix matrix;
    matrix.step_of_day = step;
    matrix.cluster = cluster;
    matrix.row_days = std::move(row_days);
    matrix.dropped_rows = dropped;
    matrix.physical = std::move(physical);

    std::vector<std::vector<double>> rank_columns(n_dims);
    matrix.columns.reserve(n_dims);
    for (std::size_t k = 0; k < n_dims; ++k) {
        rank_columns[k] = rank_transform(matrix.physical[k]);
        matrix.columns.push_back(make_rank_column(matrix.physical[k]));
    }
    matrix.ranks = CopulaData::from_columns(rank_columns);
    return matrix;
}

} // namespace ecopf
