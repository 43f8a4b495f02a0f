#pragma once

#include <cstdint>
#include <vector>

#include "ecopf/calendar.hpp"
#include "ecopf/kernel.hpp"
#include "ecopf/ranking.hpp"
#include "ecopf/timeseries.hpp"

namespace ecopf {

/// Lag sets for the copula dimensions. Power lags are strictly positive
/// (steps of 15 minutes); temperature lags may be zero or negative, pointing
/// at forecasted values.
struct LagSpec {
    std::vector<int> power_lags;
    std::vector<int> temperature_lags;

    /// Copula dimension count: target + power lags + temperature lags.
    std::size_t dims() const { return 1 + power_lags.size() + temperature_lags.size(); }
    int max_power_lag() const;
    void validate() const;
};

/// Power and temperature aligned to a shared local-midnight origin at
/// 96 steps/day. The temperature track may extend past the power track to
/// carry forecasted values.
struct SeriesFrame {
    std::int64_t first_day = 0; // local day of index 0
    int offset_minutes = 0;
    std::vector<double> power;
    std::vector<double> temperature;

    static constexpr int steps_per_day = 96;

    std::size_t size() const { return power.size(); }
    std::int64_t day_of(std::size_t idx) const {
        return first_day + static_cast<std::int64_t>(idx) / steps_per_day;
    }
    int step_of(std::size_t idx) const { return static_cast<int>(idx % steps_per_day); }
    Timestamp time_at(std::size_t idx) const;
    /// Absolute step index of (local day, step-of-day), or -1 before origin.
    std::int64_t index_of(std::int64_t day, int step) const;
};

SeriesFrame make_frame(const TimeSeries& power, const TimeSeries& temperature);

/// Rank-space design matrix for one step-of-day and cluster. Column 0 is the
/// target; power-lag columns follow in Lambda order, then temperature-lag
/// columns in Gamma order.
struct DesignMatrix {
    CopulaData ranks;
    std::vector<RankColumn> columns;
    std::vector<std::vector<double>> physical; // column-major, same order
    std::size_t target_column = 0;
    int step_of_day = 0;
    DayCluster cluster = DayCluster::working;
    std::vector<std::int64_t> row_days;
    std::size_t dropped_rows = 0; // rows removed for missing data

    std::size_t sample_count() const { return ranks.rows; }
    std::size_t dim_count() const { return ranks.cols; }
};

/// Build the design matrix for step-of-day `step` from history strictly
/// before `history_end` (frame index, exclusive). Lagged values are taken
/// from the unclustered series; rows are then filtered to days whose target
/// timestamp falls in the requested cluster. Rows with any missing value are
/// dropped and counted.
DesignMatrix build_design_matrix(const SeriesFrame& frame, const LagSpec& lags, int step,
                                 DayCluster cluster, const HolidayCalendar& calendar,
                                 std::size_t history_end);

} // namespace ecopf
