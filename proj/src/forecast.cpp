#include "ecopf/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "ecopf/errors.hpp"
#include "ecopf/metrics.hpp"
#include "ecopf/rng.hpp"

namespace ecopf {

namespace {

constexpr double kRankEps = 1e-12;

double clamp_rank(double u) { return std::clamp(u, kRankEps, 1.0 - kRankEps); }

} // namespace

double ForecastDistribution::physical_quantile(double alpha) const {
    const double u = clamp_rank(grid_density.quantile(alpha));
    return inverse_rank(u, matrix->columns[matrix->target_column]);
}

double ForecastDistribution::physical_mean() const {
    const auto& col = matrix->columns[matrix->target_column];
    const std::size_t L = grid_density.size();
    double acc = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        acc += inverse_rank(grid_density.point(l), col) * grid_density.values[l];
    }
    return acc / static_cast<double>(L);
}

ForecastPlan::ForecastPlan(const SeriesFrame& frame, const HolidayCalendar& calendar,
                           EngineConfig config, const BandwidthFn& bandwidths,
                           std::int64_t target_day)
    : frame_(frame), config_(std::move(config)) {
    config_.lags.validate();
    if (config_.cutoff_step < 0 || config_.cutoff_step >= SeriesFrame::steps_per_day) {
        throw ConfigError("market cutoff step outside 0..95");
    }

    const std::int64_t origin_idx = frame.index_of(target_day - 1, config_.cutoff_step);
    if (origin_idx <= 0) throw DataError("history does not reach the market cutoff");
    origin_ = static_cast<std::size_t>(origin_idx);
    if (origin_ > frame.power.size() || std::isnan(frame.power[origin_ - 1])) {
        throw DataError("history gap at the market cutoff");
    }

    const std::size_t intraday = SeriesFrame::steps_per_day - static_cast<std::size_t>(config_.cutoff_step);
    horizon_ = intraday + SeriesFrame::steps_per_day;
    reported_offset_ = intraday;

    // one design matrix per (step-of-day, cluster), shared across steps
    std::map<std::pair<int, int>, std::shared_ptr<const DesignMatrix>> matrix_cache;
    const auto matrix_for = [&](int step, DayCluster cluster) {
        const auto key = std::make_pair(step, static_cast<int>(cluster));
        auto it = matrix_cache.find(key);
        if (it != matrix_cache.end()) return it->second;
        auto built = std::make_shared<const DesignMatrix>(
            build_design_matrix(frame, config_.lags, step, cluster, calendar, origin_));
        matrix_cache.emplace(key, built);
        return built;
    };

    steps_.resize(horizon_);
    for (std::size_t k = 0; k < horizon_; ++k) {
        Step& st = steps_[k];
        const std::size_t abs_idx = origin_ + k;
        const std::int64_t day = frame.day_of(abs_idx);
        const int step_of_day = frame.step_of(abs_idx);
        st.matrix = matrix_for(step_of_day, cluster_of_day(day, calendar));

        const std::size_t dims = st.matrix->dim_count();
        st.fixed_ranks.assign(dims - 1, std::numeric_limits<double>::quiet_NaN());
        st.sample_from.assign(dims - 1, -1);

        std::size_t dim = 0;
        for (const int a : config_.lags.power_lags) {
            const std::int64_t idx = static_cast<std::int64_t>(abs_idx) - a;
            if (idx < 0) throw DataError("insufficient history for power lag " + std::to_string(a));
            if (idx >= static_cast<std::int64_t>(origin_)) {
                st.sample_from[dim] = idx - static_cast<std::int64_t>(origin_);
            } else {
                const double v = frame.power[static_cast<std::size_t>(idx)];
                if (std::isnan(v)) {
                    throw DataError("missing historical demand for power lag " + std::to_string(a));
                }
                st.fixed_ranks[dim] = pseudo_rank(v, st.matrix->columns[dim + 1]);
            }
            ++dim;
        }
        for (const int b : config_.lags.temperature_lags) {
            const std::int64_t idx = static_cast<std::int64_t>(abs_idx) - b;
            if (idx < 0 || idx >= static_cast<std::int64_t>(frame.temperature.size()) ||
                std::isnan(frame.temperature[static_cast<std::size_t>(idx)])) {
                throw DataError("horizon exceeds available temperature forecasts (lag " +
                                std::to_string(b) + ")");
            }
            st.fixed_ranks[dim] = pseudo_rank(frame.temperature[static_cast<std::size_t>(idx)],
                                              st.matrix->columns[dim + 1]);
            ++dim;
        }
    }

    // backward closure: a step is needed if reported or if a needed step
    // conditions on its sample
    for (std::size_t k = horizon_; k-- > 0;) {
        Step& st = steps_[k];
        st.needed = k >= reported_offset_;
        if (!st.needed) {
            for (const int a : config_.lags.power_lags) {
                const std::size_t k2 = k + static_cast<std::size_t>(a);
                if (k2 < horizon_ && steps_[k2].needed) {
                    bool consumed = false;
                    for (const std::int64_t src : steps_[k2].sample_from) {
                        consumed = consumed || src == static_cast<std::int64_t>(k);
                    }
                    if (consumed) {
                        st.needed = true;
                        break;
                    }
                }
            }
        }
        if (!config_.prune_unneeded_steps) st.needed = true;
    }
    for (std::size_t k = 0; k < horizon_; ++k) {
        Step& st = steps_[k];
        if (!st.needed) continue;
        for (const std::int64_t src : st.sample_from) {
            if (src >= 0) {
                steps_[static_cast<std::size_t>(src)].sample_consumed = true;
                needs_sampling_ = true;
            }
        }
    }

    // bandwidths are keyed to the target day for the whole run, so intraday
    // steps share the reported day's per-weekday vector
    for (std::size_t k = 0; k < horizon_; ++k) {
        Step& st = steps_[k];
        if (st.needed) {
            st.bandwidths = bandwidths(*st.matrix, target_day);
            if (st.bandwidths.dims() != st.matrix->dim_count()) {
                throw ConfigError("bandwidth dimension does not match the design matrix");
            }
        }
    }
}

Scenario ForecastPlan::run_scenario(std::uint64_t master_seed,
                                    std::uint64_t scenario_index) const {
    Scenario scenario;
    scenario.steps.resize(horizon_);
    scenario.sampled_path.assign(horizon_, std::numeric_limits<double>::quiet_NaN());
    scenario.conditioning_used.resize(horizon_);

    const CounterRng rng = CounterRng(master_seed, 0).substream(scenario_index);

    for (std::size_t k = 0; k < horizon_; ++k) {
        const Step& st = steps_[k];
        if (!st.needed) continue;

        std::vector<double> fixed = st.fixed_ranks;
        for (std::size_t dim = 0; dim < fixed.size(); ++dim) {
            const std::int64_t src = st.sample_from[dim];
            if (src >= 0) {
                const double sampled = scenario.sampled_path[static_cast<std::size_t>(src)];
                if (std::isnan(sampled)) throw NumericalError("scenario chain broken");
                fixed[dim] = pseudo_rank(sampled, st.matrix->columns[dim + 1]);
            }
        }

        ConditionalResult cond =
            conditional_density(st.matrix->ranks, st.bandwidths, fixed, config_.grid_size);
        ForecastDistribution dist;
        dist.grid_density = std::move(cond.density);
        dist.matrix = st.matrix;
        dist.underflow_fallback = cond.underflow_fallback;

        if (st.sample_consumed) {
            // one substream draw per step keeps results identical no matter
            // which steps are pruned or how scenarios are scheduled
            const double alpha = rng.uniform_at(k);
            const double u = clamp_rank(dist.grid_density.quantile(alpha));
            scenario.sampled_path[k] =
                inverse_rank(u, st.matrix->columns[st.matrix->target_column]);
        }
        scenario.conditioning_used[k] = std::move(fixed);
        scenario.steps[k] = std::move(dist);
    }
    return scenario;
}

CombinedForecast combine_scenarios(const ForecastPlan& plan,
                                   const std::vector<Scenario>& scenarios) {
    if (scenarios.empty()) throw DataError("no scenarios to combine");
    const std::size_t H = plan.horizon();
    const std::size_t L = plan.config().grid_size;
    for (const Scenario& s : scenarios) {
        if (s.steps.size() != H) throw DataError("scenario horizon mismatch");
    }

    CombinedForecast combined;
    combined.scenarios_used = static_cast<int>(scenarios.size());
    const std::vector<double> levels = quantile_levels();

    for (std::size_t k = plan.reported_offset(); k < H; ++k) {
        GridDensity mixture;
        mixture.values.assign(L, 0.0);
        for (const Scenario& s : scenarios) { // fixed scenario order
            const GridDensity& d = s.steps[k].grid_density;
            if (d.size() != L) throw DataError("scenario grid size mismatch");
            for (std::size_t l = 0; l < L; ++l) mixture.values[l] += d.values[l];
        }
        double sum = 0.0;
        for (double v : mixture.values) sum += v;
        if (!(sum > 0.0)) throw NumericalError("empty scenario mixture");
        const double scale = static_cast<double>(L) / sum;
        for (double& v : mixture.values) v *= scale;

        CombinedStep step;
        step.matrix = plan.steps()[k].matrix;
        step.mixture = std::move(mixture);
        const auto& col = step.matrix->columns[step.matrix->target_column];
        step.quantiles.resize(levels.size());
        for (std::size_t q = 0; q < levels.size(); ++q) {
            step.quantiles[q] = inverse_rank(clamp_rank(step.mixture.quantile(levels[q])), col);
        }
        double mean = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            mean += inverse_rank(step.mixture.point(l), col) * step.mixture.values[l];
        }
        step.expected = mean / static_cast<double>(L);
        combined.steps.push_back(std::move(step));
        combined.step_bandwidths.push_back(plan.steps()[k].bandwidths);
    }
    return combined;
}

CombinedForecast day_ahead_forecast(const SeriesFrame& frame, const HolidayCalendar& calendar,
                                    const EngineConfig& config, const BandwidthFn& bandwidths,
                                    std::int64_t target_day, std::uint64_t seed) {
    const ForecastPlan plan(frame, calendar, config, bandwidths, target_day);

    const int s = plan.needs_sampling() ? std::max(1, config.scenario_count) : 1;
    std::vector<Scenario> scenarios(static_cast<std::size_t>(s));

    const int threads = std::clamp(config.threads, 1, s);
    if (threads <= 1) {
        for (int i = 0; i < s; ++i) {
            scenarios[static_cast<std::size_t>(i)] =
                plan.run_scenario(seed, static_cast<std::uint64_t>(i));
        }
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (int i = t; i < s; i += threads) {
                        scenarios[static_cast<std::size_t>(i)] =
                            plan.run_scenario(seed, static_cast<std::uint64_t>(i));
                    }
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    CombinedForecast combined = combine_scenarios(plan, scenarios);
    combined.times.reserve(combined.steps.size());
    for (std::size_t k = plan.reported_offset(); k < plan.horizon(); ++k) {
        combined.times.push_back(frame.time_at(plan.origin() + k));
    }
    return combined;
}

FirstStepSpec first_forecast_step_spec(const SeriesFrame& frame, const HolidayCalendar& calendar,
                                       const EngineConfig& config, std::int64_t target_day) {
    EngineConfig probe = config;
    probe.prune_unneeded_steps = false;
    const auto fallback = [](const DesignMatrix& m, std::int64_t) {
        return Bandwidths::uniform(m.dim_count(), 0.01);
    };
    // plan construction validates the run; step 0 conditions only on history
    const ForecastPlan plan(frame, calendar, probe, fallback, target_day);
    const ForecastPlan::Step& first = plan.steps().front();
    FirstStepSpec spec;
    spec.matrix = first.matrix;
    spec.fixed_ranks = first.fixed_ranks;
    for (const double u : spec.fixed_ranks) {
        if (std::isnan(u)) throw NumericalError("first forecast step has unknown conditioning");
    }
    return spec;
}

} // namespace ecopf
