#include "ecopf/synthetic.hpp"

#include <cmath>

#include "ecopf/errors.hpp"
#include "ecopf/rng.hpp"

namespace ecopf {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Standard normal via Box-Muller on two counter-based uniforms.
double normal_draw(const CounterRng& rng, std::uint64_t counter) {
    const double u1 = std::max(rng.uniform_at(2 * counter), 1e-16);
    const double u2 = rng.uniform_at(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

} // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec) {
    if (spec.days < 2) throw DataError("synthetic span must cover at least 2 days");

    const int steps = spec.days * 96;
    SyntheticData data;

    Timestamp start;
    start.offset_minutes = 0;
    start.epoch_s = spec.start_day * 86400;

    data.temperature.start = start;
    data.temperature.step_minutes = 15;
    data.temperature.unit = "degC";
    data.temperature.values.resize(steps);

    data.power.start = start;
    data.power.step_minutes = 15;
    data.power.unit = "kW";
    data.power.values.resize(steps);

    const CounterRng temp_rng(spec.seed, 1);
    const CounterRng load_rng(spec.seed, 2);

    double temp_noise = 0.0;
    double load_noise = 0.0;
    const double temp_innov = spec.temp_noise_sigma_c * std::sqrt(1.0 - spec.temp_ar1 * spec.temp_ar1);
    const double load_innov = spec.noise_sigma_kw * std::sqrt(1.0 - spec.noise_ar1 * spec.noise_ar1);

    for (int t = 0; t < steps; ++t) {
        const int day = t / 96;
        const int step = t % 96;
        const double day_frac = static_cast<double>(step) / 96.0;

        temp_noise = spec.temp_ar1 * temp_noise +
                     temp_innov * normal_draw(temp_rng, static_cast<std::uint64_t>(t));
        const double season =
            spec.temp_season_amp_c * std::sin(2.0 * kPi * (day + 15.0) / 365.0 - kPi / 2.0);
        const double diurnal = spec.temp_daily_amp_c * std::sin(2.0 * kPi * day_frac - kPi * 0.65);
        const double temp = spec.temp_mean_c + season + diurnal + temp_noise;
        data.temperature.values[static_cast<std::size_t>(t)] = temp;

        const std::int64_t civil_day = spec.start_day + day;
        const Weekday w = weekday_of_day(civil_day);
        const bool weekend = w == Weekday::sat || w == Weekday::sun;

        // two intraday peaks (morning and evening)
        const double shape = 0.55 * std::sin(2.0 * kPi * day_frac - kPi * 0.55) +
                             0.45 * std::sin(4.0 * kPi * day_frac - kPi * 0.15);
        const double heating_deficit = std::max(0.0, spec.heating_ref_c - temp);
        const double heating = spec.heating_gain * heating_deficit * heating_deficit;

        load_noise = spec.noise_ar1 * load_noise +
                     load_innov * normal_draw(load_rng, static_cast<std::uint64_t>(t));
        double demand = spec.base_kw + spec.daily_amplitude_kw * shape + heating + load_noise;
        if (weekend) demand *= spec.weekend_factor;
        data.power.values[static_cast<std::size_t>(t)] = std::max(demand, 1.0);
    }

    // a couple of mid-week civic holidays to populate the holiday cluster
    for (int d = 17; d < spec.days; d += 43) {
        const std::int64_t civil_day = spec.start_day + d;
        const Weekday w = weekday_of_day(civil_day);
        if (w != Weekday::sat && w != Weekday::sun) data.holiday_days.push_back(civil_day);
    }
    return data;
}

std::vector<TimeSeries> split_into_leaves(const TimeSeries& total, std::size_t n_leaves,
                                          std::uint64_t seed) {
    if (n_leaves < 1) throw DataError("need at least one leaf");

    // fixed share weights, lightly perturbed per leaf but constant in time so
    // the leaves sum to the parent exactly
    const CounterRng rng(seed, 7);
    std::vector<double> shares(n_leaves);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_leaves; ++i) {
        shares[i] = 0.5 + rng.uniform_at(i);
        sum += shares[i];
    }
    for (double& s : shares) s /= sum;

    std::vector<TimeSeries> leaves(n_leaves, total);
    for (std::size_t i = 0; i < n_leaves; ++i) {
        for (double& v : leaves[i].values) v *= shares[i];
    }
    return leaves;
}

} // namespace ecopf
