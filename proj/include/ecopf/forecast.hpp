#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ecopf/features.hpp"
#include "ecopf/kernel.hpp"

namespace ecopf {

struct EngineConfig {
    LagSpec lags;
    std::size_t grid_size = 100;
    int scenario_count = 50;
    int cutoff_step = 40; // 10:00 at 15-minute resolution
    int threads = 1;
    /// Skip forecast steps that cannot influence the reported window. The
    /// per-step RNG substreams make the output identical either way.
    bool prune_unneeded_steps = true;
};

/// Per-step predictive distribution in rank space plus the physical mapping.
struct ForecastDistribution {
    GridDensity grid_density;
    std::shared_ptr<const DesignMatrix> matrix;
    bool underflow_fallback = false;

    /// Physical quantile: inverse grid CDF mapped through the target column.
    double physical_quantile(double alpha) const;
    /// Physical expectation under the grid density.
    double physical_mean() const;
};

/// One multi-step trajectory. Unevaluated (pruned) steps hold no density and
/// a NaN sampled value.
struct Scenario {
    std::vector<ForecastDistribution> steps;
    std::vector<double> sampled_path;                  // physical demand, NaN if not sampled
    std::vector<std::vector<double>> conditioning_used; // rank-space, per evaluated step
};

struct CombinedStep {
    GridDensity mixture;
    std::shared_ptr<const DesignMatrix> matrix;
    std::vector<double> quantiles; // physical, levels 0.01..0.99
    double expected = 0.0;
};

struct CombinedForecast {
    std::vector<Timestamp> times;
    std::vector<CombinedStep> steps;
    std::vector<Bandwidths> step_bandwidths;
    int scenarios_used = 1;
};

/// Bandwidth lookup for one forecast step: receives the step's design matrix
/// and the local day of the forecasted timestamp.
using BandwidthFn = std::function<Bandwidths(const DesignMatrix&, std::int64_t target_day)>;

/// Precomputed per-run state shared by all scenarios: matrices, bandwidth
/// vectors, known conditioning ranks and the sampling dependency graph.
class ForecastPlan {
public:
    ForecastPlan(const SeriesFrame& frame, const HolidayCalendar& calendar, EngineConfig config,
                 const BandwidthFn& bandwidths, std::int64_t target_day);

    std::size_t horizon() const { return horizon_; }
    std::size_t origin() const { return origin_; }
    std::size_t reported_offset() const { return reported_offset_; }
    bool needs_sampling() const { return needs_sampling_; }
    const EngineConfig& config() const { return config_; }

    Scenario run_scenario(std::uint64_t master_seed, std::uint64_t scenario_index) const;

    struct Step {
        std::shared_ptr<const DesignMatrix> matrix;
        Bandwidths bandwidths;
        bool needed = false;
        bool sample_consumed = false; // a later needed step conditions on it
        // per non-target column: rank fixed at plan time, or the earlier
        // step index whose sample feeds it (rank computed per scenario)
        std::vector<double> fixed_ranks;       // NaN where sampled
        std::vector<std::int64_t> sample_from; // -1 where known
    };
    const std::vector<Step>& steps() const { return steps_; }

private:
    const SeriesFrame& frame_;
    EngineConfig config_;
    std::size_t origin_ = 0;
    std::size_t horizon_ = 0;
    std::size_t reported_offset_ = 0;
    bool needs_sampling_ = false;
    std::vector<Step> steps_;
};

/// Pointwise mixture of the scenarios' per-step densities with physical
/// quantiles recomputed from the mixture. Scenario order never matters.
CombinedForecast combine_scenarios(const ForecastPlan& plan, const std::vector<Scenario>& scenarios);

/// Full day-ahead run: scenarios over the intraday remainder plus the target
/// day, reported for the target day's 96 steps. Deterministic for a fixed
/// seed, independent of thread count.
CombinedForecast day_ahead_forecast(const SeriesFrame& frame, const HolidayCalendar& calendar,
                                    const EngineConfig& config, const BandwidthFn& bandwidths,
                                    std::int64_t target_day, std::uint64_t seed);

/// Design matrix and fully-known conditioning ranks of the first forecast
/// step (the ISE optimization point).
struct FirstStepSpec {
    std::shared_ptr<const DesignMatrix> matrix;
    std::vector<double> fixed_ranks;
};
FirstStepSpec first_forecast_step_spec(const SeriesFrame& frame, const HolidayCalendar& calendar,
                                       const EngineConfig& config, std::int64_t target_day);

} // namespace ecopf
