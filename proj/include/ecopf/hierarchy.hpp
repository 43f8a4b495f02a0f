#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <map>
#include <string>
#include <vector>

#include "ecopf/bandwidth.hpp"
#include "ecopf/forecast.hpp"
#include "ecopf/metrics.hpp"
#include "ecopf/timeseries.hpp"

namespace ecopf {

/// Meter tree: leaves are physical meters (L1), the root is the total
/// demand (highest level). Level numbers count height above the leaves.
struct MeterHierarchy {
    std::string root;
    std::map<std::string, std::vector<std::string>> children;

    bool is_leaf(const std::string& node) const;
    std::vector<std::string> all_nodes() const;
    int level_count() const;
    /// Nodes whose level label is L<level> (level_count for the root).
    std::vector<std::string> nodes_at_level(int level) const;
};

/// JSON document: {"root": "name", "children": {"name": ["child", ...]}}.
MeterHierarchy load_hierarchy(const std::string& path);

/// Check node series against the sum of their children where both exist.
/// Deviations beyond rel_tolerance fail; gaps are skipped.
void validate_hierarchy_series(const MeterHierarchy& hierarchy,
                               const std::map<std::string, TimeSeries>& node_series,
                               double rel_tolerance = 0.005);

/// Physical quantile function of one child distribution.
using QuantileFn = std::function<double(double)>;

/// Sum independent draws from every child and report the empirical
/// 99-quantile table of the sums. Point-mass children aggregate exactly.
std::vector<double> aggregate_quantile_samples(const std::vector<QuantileFn>& children,
                                               int n_samples, std::uint64_t seed,
                                               std::uint64_t stream);

struct AggregatedForecast {
    std::vector<Timestamp> times;
    std::vector<std::vector<double>> quantiles; // per step, 99 levels
};

/// Per-step aggregation of sibling forecasts covering identical steps.
AggregatedForecast aggregate_forecasts(const std::vector<CombinedForecast>& forecasts,
                                       int n_samples, std::uint64_t seed);

struct AggregationStudyInput {
    MeterHierarchy hierarchy;
    std::map<std::string, TimeSeries> node_power;
    TimeSeries temperature;
    HolidayCalendar calendar;
    EngineConfig engine;
    BandwidthConfig bandwidth;
    std::vector<std::int64_t> eval_days;
    int n_samples = 10000;
    std::uint64_t seed = 0;
    std::optional<int> only_level;
};

struct LevelResult {
    int level = 0;
    EvaluationReport report;
    std::map<std::string, std::uint64_t> node_seeds;
};

/// Forecast every node of each level independently (ISE-optimized per node
/// and day), aggregate to the root by independent sampling, and score
/// against realized root demand. The root level bypasses aggregation.
std::vector<LevelResult> aggregation_study(const AggregationStudyInput& input);

} // namespace ecopf
