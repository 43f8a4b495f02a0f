#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecopf/calendar.hpp"
#include "ecopf/forecast.hpp"
#include "ecopf/kernel.hpp"

namespace ecopf {

enum class BandwidthMethod { ise, rule_of_thumb, ql };

std::string to_string(BandwidthMethod method);
BandwidthMethod bandwidth_method_from_string(const std::string& name);

struct BandwidthConfig {
    BandwidthMethod method = BandwidthMethod::ise;
    double initial_guess = 0.01;
    double lower = 1e-4;
    double upper = 10.0;
    int max_iterations = 200;
    int restarts = 3;

    void validate() const;
};

/// One bandwidth vector per weekday; holidays fall back to Sunday's.
struct WeekdayBandwidths {
    std::array<std::optional<Bandwidths>, 7> per_weekday;
    std::array<double, 7> objective{};

    bool complete() const;
    const Bandwidths& for_day(std::int64_t day, const HolidayCalendar& calendar) const;
};

struct OptimizeOutcome {
    Bandwidths h;
    double objective = 0.0;
    int evaluations = 0;
    bool warning = false; // optimizer failed; h is the initial guess
};

/// Closed-form multivariate rule of thumb. sigma defaults to the sample
/// standard deviation of the m rank values {1/(m+1), ..., m/(m+1)}.
Bandwidths rule_of_thumb(std::size_t dims, std::size_t samples);
Bandwidths rule_of_thumb(std::size_t dims, std::size_t samples, double sigma);
/// The dimension/sample factor (4/(D+2))^(1/(D+4)) * m^(-1/(D+4)).
double rule_of_thumb_factor(std::size_t dims, std::size_t samples);

/// Leave-one-out conditional ISE criterion: the squared-density integral on
/// the midpoint grid minus twice the average leave-one-out density at the
/// held-out points' own rank coordinates. Needs no realization of the
/// forecast-day target.
double ise_objective(const Bandwidths& h, const CopulaData& data,
                     const std::vector<double>& conditioning, std::size_t grid_size);

/// Bounded minimization of ise_objective from the configured initial guess.
OptimizeOutcome optimize_ise(const CopulaData& data, const std::vector<double>& conditioning,
                             const BandwidthConfig& config, std::size_t grid_size = 100);

/// Summed pinball loss of a full training-day forecast run with fixed h over
/// the 99 quantile levels and all reported steps.
double ql_objective(const Bandwidths& h, const SeriesFrame& frame,
                    const HolidayCalendar& calendar, const EngineConfig& engine,
                    std::int64_t training_day, std::uint64_t seed);

/// Train one bandwidth vector per weekday on seven consecutive days starting
/// at `week_start`, with deterministic multi-start.
WeekdayBandwidths optimize_ql(const SeriesFrame& frame, const HolidayCalendar& calendar,
                              const EngineConfig& engine, std::int64_t week_start,
                              const BandwidthConfig& config, std::uint64_t seed);

/// Plain-text persistence: one block per bandwidth vector with method,
/// weekday, h, objective and timestamp keys.
struct BandwidthRecord {
    BandwidthMethod method = BandwidthMethod::ise;
    std::optional<Weekday> weekday; // empty = applies to all days
    Bandwidths h;
    double objective = 0.0;
    std::string timestamp;
};

void save_bandwidths(const std::vector<BandwidthRecord>& records, const std::string& path);
std::vector<BandwidthRecord> load_bandwidths(const std::string& path);

} // namespace ecopf
