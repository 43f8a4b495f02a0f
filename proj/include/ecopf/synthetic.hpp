#pragma once

#include <cstdint>
#include <vector>

#include "ecopf/calendar.hpp"
#include "ecopf/timeseries.hpp"

namespace ecopf {

/// Synthetic distribution-feeder demand: daily and weekly shapes, a
/// nonlinear heating response to temperature, and AR(1) noise. Temperature
/// doubles as its own day-ahead forecast.
struct SyntheticSpec {
    std::int64_t start_day = 0; // set from a date before use
    int days = 120;
    std::uint64_t seed = 42;

    double base_kw = 220.0;
    double daily_amplitude_kw = 60.0;
    double weekend_factor = 0.78;
    double heating_ref_c = 18.0;
    double heating_gain = 0.32; // kW per (degC below reference)^2
    double noise_sigma_kw = 7.0;
    double noise_ar1 = 0.7;

    double temp_mean_c = 8.0;
    double temp_season_amp_c = 7.0;
    double temp_daily_amp_c = 4.0;
    double temp_noise_sigma_c = 1.2;
    double temp_ar1 = 0.9;
};

struct SyntheticData {
    TimeSeries power;
    TimeSeries temperature;
    std::vector<std::int64_t> holiday_days;
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

/// Split a synthetic total into leaf meters whose sums reproduce the parent
/// exactly; share weights differ per leaf.
std::vector<TimeSeries> split_into_leaves(const TimeSeries& total, std::size_t n_leaves,
                                          std::uint64_t seed);

} // namespace ecopf
