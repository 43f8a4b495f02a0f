#include "ecopf/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "ecopf/errors.hpp"
#include "ecopf/rng.hpp"

namespace ecopf {

namespace {

int depth_of(const MeterHierarchy& hierarchy, const std::string& node) {
    int depth = 0;
    std::string current = hierarchy.root;
    std::vector<std::pair<std::string, int>> stack{{hierarchy.root, 0}};
    while (!stack.empty()) {
        auto [name, d] = stack.back();
        stack.pop_back();
        if (name == node) return d;
        const auto it = hierarchy.children.find(name);
        if (it != hierarchy.children.end()) {
            for (const auto& child : it->second) stack.emplace_back(child, d + 1);
        }
    }
    (void)depth;
    (void)current;
    throw DataError("node not reachable from root: " + node);
}

double empirical_quantile(std::vector<double>& sorted_samples, double alpha) {
    // type-7 (linear interpolation between order statistics)
    const std::size_t n = sorted_samples.size();
    const double pos = alpha * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted_samples[n - 1];
    return sorted_samples[lo] + t * (sorted_samples[lo + 1] - sorted_samples[lo]);
}

} // namespace

bool MeterHierarchy::is_leaf(const std::string& node) const {
    const auto it = children.find(node);
    return it == children.end() || it->second.empty();
}

std::vector<std::string> MeterHierarchy::all_nodes() const {
    std::vector<std::string> out;
    std::vector<std::string> stack{root};
    std::set<std::string> seen;
    while (!stack.empty()) {
        const std::string node = stack.back();
        stack.pop_back();
        if (!seen.insert(node).second) throw DataError("hierarchy contains a cycle at " + node);
        out.push_back(node);
        const auto it = children.find(node);
        if (it != children.end()) {
            for (const auto& child : it->second) stack.push_back(child);
        }
    }
    return out;
}

int MeterHierarchy::level_count() const {
    int max_depth = 0;
    for (const auto& node : all_nodes()) max_depth = std::max(max_depth, depth_of(*this, node));
    return max_depth + 1;
}

std::vector<std::string> MeterHierarchy::nodes_at_level(int level) const {
    const int levels = level_count();
    if (level < 1 || level > levels) throw DataError("level outside hierarchy range");
    const int depth = levels - level;
    std::vector<std::string> out;
    for (const auto& node : all_nodes()) {
        if (depth_of(*this, node) == depth) out.push_back(node);
    }
    std::sort(out.begin(), out.end());
    return out;
}

MeterHierarchy load_hierarchy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open hierarchy file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw DataError("bad hierarchy file " + path + ": " + e.what());
    }

    MeterHierarchy hierarchy;
    if (!doc.contains("root") || !doc["root"].is_string()) {
        throw DataError("hierarchy file missing \"root\": " + path);
    }
    hierarchy.root = doc["root"].get<std::string>();
    if (doc.contains("children")) {
        for (const auto& [name, kids] : doc["children"].items()) {
            std::vector<std::string> list;
            for (const auto& kid : kids) list.push_back(kid.get<std::string>());
            hierarchy.children[name] = std::move(list);
        }
    }
    hierarchy.all_nodes(); // reachability / cycle check
    return hierarchy;
}

void validate_hierarchy_series(const MeterHierarchy& hierarchy,
                               const std::map<std::string, TimeSeries>& node_series,
                               double rel_tolerance) {
    for (const auto& [parent, kids] : hierarchy.children) {
        if (kids.empty()) continue;
        const auto parent_it = node_series.find(parent);
        if (parent_it == node_series.end()) continue;
        bool all_children = true;
        for (const auto& kid : kids) all_children = all_children && node_series.count(kid) > 0;
        if (!all_children) continue;

        const TimeSeries& ps = parent_it->second;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (ps.is_gap(i)) continue;
            double sum = 0.0;
            bool usable = true;
            for (const auto& kid : kids) {
                const TimeSeries& ks = node_series.at(kid);
                const std::int64_t idx = ks.index_of(ps.time_at(i));
                if (idx < 0 || ks.is_gap(static_cast<std::size_t>(idx))) {
                    usable = false;
                    break;
                }
                sum += ks.values[static_cast<std::size_t>(idx)];
            }
            if (!usable) continue;
            const double scale = std::max(std::abs(ps.values[i]), 1.0);
            if (std::abs(sum - ps.values[i]) > rel_tolerance * scale) {
                throw DataError("hierarchy mismatch at " + parent + " " +
                                format_timestamp(ps.time_at(i)) + ": children sum " +
                                std::to_string(sum) + " vs " + std::to_string(ps.values[i]));
            }
        }
    }
}

std::vector<double> aggregate_quantile_samples(const std::vector<QuantileFn>& children,
                                               int n_samples, std::uint64_t seed,
                                               std::uint64_t stream) {
    if (children.empty()) throw DataError("nothing to aggregate");
    if (n_samples < 1) throw DataError("n_samples must be positive");

    std::vector<double> sums(static_cast<std::size_t>(n_samples), 0.0);
    const CounterRng base(seed, stream);
    for (std::size_t c = 0; c < children.size(); ++c) {
        const CounterRng rng = base.substream(c);
        for (int k = 0; k < n_samples; ++k) {
            const double alpha = rng.uniform_at(static_cast<std::uint64_t>(k));
            sums[static_cast<std::size_t>(k)] += children[c](alpha);
        }
    }
    std::sort(sums.begin(), sums.end());

    std::vector<double> quantiles;
    quantiles.reserve(99);
    for (const double alpha : quantile_levels()) {
        quantiles.push_back(empirical_quantile(sums, alpha));
    }
    return quantiles;
}

AggregatedForecast aggregate_forecasts(const std::vector<CombinedForecast>& forecasts,
                                       int n_samples, std::uint64_t seed) {
    if (forecasts.empty()) throw DataError("nothing to aggregate");
    const std::size_t steps = forecasts.front().steps.size();
    for (const auto& f : forecasts) {
        if (f.steps.size() != steps) throw DataError("forecast step mismatch");
        for (std::size_t j = 0; j < steps; ++j) {
            if (!(f.times[j] == forecasts.front().times[j])) {
                throw DataError("forecast step mismatch");
            }
        }
    }

    AggregatedForecast out;
    out.times = forecasts.front().times;
    out.quantiles.resize(steps);
    for (std::size_t j = 0; j < steps; ++j) {
        std::vector<QuantileFn> children;
        children.reserve(forecasts.size());
        for (const auto& f : forecasts) {
            const CombinedStep& step = f.steps[j];
            children.push_back([&step](double alpha) {
                const double u =
                    std::clamp(step.mixture.quantile(alpha), 1e-12, 1.0 - 1e-12);
                return inverse_rank(u, step.matrix->columns[step.matrix->target_column]);
            });
        }
        out.quantiles[j] = aggregate_quantile_samples(children, n_samples, seed, j);
    }
    return out;
}

std::vector<LevelResult> aggregation_study(const AggregationStudyInput& input) {
    const MeterHierarchy& hierarchy = input.hierarchy;
    const int levels = hierarchy.level_count();

    // frames are per node; the temperature track is shared
    std::map<std::string, SeriesFrame> frames;
    for (const auto& node : hierarchy.all_nodes()) {
        const auto it = input.node_power.find(node);
        if (it == input.node_power.end()) throw DataError("missing series for node " + node);
        frames.emplace(node, make_frame(it->second, input.temperature));
    }
    const SeriesFrame& root_frame = frames.at(hierarchy.root);

    std::vector<LevelResult> results;
    for (int level = 1; level <= levels; ++level) {
        if (input.only_level && *input.only_level != level) continue;
        const std::vector<std::string> nodes = hierarchy.nodes_at_level(level);
        LevelResult lr;
        lr.level = level;

        std::vector<EvaluationReport> day_reports;
        for (const std::int64_t day : input.eval_days) {
            std::vector<CombinedForecast> forecasts;
            forecasts.reserve(nodes.size());
            for (std::size_t n = 0; n < nodes.size(); ++n) {
                const SeriesFrame& frame = frames.at(nodes[n]);
                const FirstStepSpec spec =
                    first_forecast_step_spec(frame, input.calendar, input.engine, day);
                const OptimizeOutcome opt = optimize_ise(spec.matrix->ranks, spec.fixed_ranks,
                                                         input.bandwidth, input.engine.grid_size);
                const Bandwidths h = opt.h;
                const BandwidthFn fn = [&h](const DesignMatrix&, std::int64_t) { return h; };
                const std::uint64_t node_seed = CounterRng::derive_seed(
                    CounterRng::derive_seed(input.seed, static_cast<std::uint64_t>(level), n),
                    static_cast<std::uint64_t>(day), 0);
                lr.node_seeds[nodes[n]] = node_seed;
                forecasts.push_back(day_ahead_forecast(frame, input.calendar, input.engine, fn,
                                                       day, node_seed));
            }

            std::vector<std::vector<double>> quantiles;
            if (nodes.size() == 1 && nodes.front() == hierarchy.root) {
                quantiles.reserve(forecasts.front().steps.size());
                for (const auto& step : forecasts.front().steps) quantiles.push_back(step.quantiles);
            } else {
                quantiles = aggregate_forecasts(forecasts, input.n_samples,
                                                input.seed ^ static_cast<std::uint64_t>(day))
                                .quantiles;
            }

            std::vector<double> realized;
            realized.reserve(quantiles.size());
            for (std::size_t j = 0; j < quantiles.size(); ++j) {
                const std::int64_t idx = root_frame.index_of(day, static_cast<int>(j));
                if (idx < 0 || idx >= static_cast<std::int64_t>(root_frame.power.size()) ||
                    std::isnan(root_frame.power[static_cast<std::size_t>(idx)])) {
                    throw DataError("missing realized root demand on " + format_date(day));
                }
                realized.push_back(root_frame.power[static_cast<std::size_t>(idx)]);
            }
            day_reports.push_back(evaluate_forecast(quantiles, realized));
        }
        lr.report = average_reports(day_reports);
        results.push_back(std::move(lr));
    }
    return results;
}

} // namespace ecopf
