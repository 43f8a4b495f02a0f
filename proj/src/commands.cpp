#include "ecopf/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <unistd.h>

#include <json.hpp>

#include "ecopf/bandwidth.hpp"
#include "ecopf/errors.hpp"
#include "ecopf/hierarchy.hpp"
#include "ecopf/metrics.hpp"
#include "ecopf/qr.hpp"
#include "ecopf/rng.hpp"

namespace ecopf::commands {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Exclusive lock on the output directory for the lifetime of a command.
class OutputLock {
public:
    explicit OutputLock(const std::string& dir) : path_(fs::path(dir) / ".ecopf.lock") {
        fs::create_directories(dir);
        std::error_code ec;
        if (fs::exists(path_)) {
            throw ConfigError("output directory is locked by another run: " + dir);
        }
        std::ofstream out(path_);
        if (!out) throw ConfigError("cannot create lock file in " + dir);
        out << "pid " << ::getpid() << '\n';
    }
    ~OutputLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    fs::path path_;
};

struct Inputs {
    SeriesFrame frame;
    HolidayCalendar calendar;
};

Inputs load_inputs(const RunConfig& config) {
    const TimeSeries power = load_series_csv(config.power_csv, {15, "kW"});
    const TimeSeries temperature = load_series_csv(config.temperature_csv, {15, "degC"});
    Inputs inputs{make_frame(power, temperature),
                  load_calendar(config.calendar_path, config.calendar_region)};
    return inputs;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::uint64_t require_seed(const RunConfig& config) {
    if (!config.seed) throw ConfigError("a seed is required for scenario or aggregation runs");
    return *config.seed;
}

/// Bandwidth source for one run; QL training is done once and reused.
struct BandwidthSource {
    BandwidthMethod method;
    Bandwidths fixed;                         // ise
    std::optional<WeekdayBandwidths> weekday; // ql
    HolidayCalendar calendar;                 // for the holiday->Sunday rule
    mutable std::vector<BandwidthRecord> used;

    BandwidthFn fn() const {
        return [this](const DesignMatrix& matrix, std::int64_t day) {
            Bandwidths h;
            switch (method) {
                case BandwidthMethod::ise: h = fixed; break;
                case BandwidthMethod::ql: h = weekday->for_day(day, calendar); break;
                case BandwidthMethod::rule_of_thumb:
                    h = rule_of_thumb(matrix.dim_count(), matrix.sample_count());
                    break;
            }
            return h;
        };
    }
};

BandwidthSource make_bandwidth_source(const RunConfig& config, const Inputs& inputs,
                                      const EngineConfig& engine, std::int64_t target_day,
                                      std::uint64_t seed,
                                      const std::optional<WeekdayBandwidths>& trained_ql) {
    BandwidthSource source;
    source.method = config.bandwidth.method;
    source.calendar = inputs.calendar;

    switch (config.bandwidth.method) {
        case BandwidthMethod::ise: {
            // one online optimization per forecast day, conditioned on the
            // first forecast step
            const FirstStepSpec spec =
                first_forecast_step_spec(inputs.frame, inputs.calendar, engine, target_day);
            const OptimizeOutcome outcome =
                optimize_ise(spec.matrix->ranks, spec.fixed_ranks, config.bandwidth,
                             engine.grid_size);
            source.fixed = outcome.h;
            BandwidthRecord rec;
            rec.method = BandwidthMethod::ise;
            rec.h = outcome.h;
            rec.objective = outcome.objective;
            source.used.push_back(rec);
            break;
        }
        case BandwidthMethod::ql: {
            if (trained_ql) {
                source.weekday = *trained_ql;
            } else {
                if (!config.ql_training_start) {
                    throw ConfigError("ql bandwidth method requires ql_training_start");
                }
                if (*config.ql_training_start + 6 >= target_day) {
                    throw ConfigError("ql training week must strictly precede the forecast day");
                }
                source.weekday = optimize_ql(inputs.frame, inputs.calendar, engine,
                                             *config.ql_training_start, config.bandwidth, seed);
            }
            for (int w = 0; w < 7; ++w) {
                BandwidthRecord rec;
                rec.method = BandwidthMethod::ql;
                rec.weekday = static_cast<Weekday>(w);
                rec.h = *source.weekday->per_weekday[static_cast<std::size_t>(w)];
                rec.objective = source.weekday->objective[static_cast<std::size_t>(w)];
                source.used.push_back(rec);
            }
            break;
        }
        case BandwidthMethod::rule_of_thumb: {
            const FirstStepSpec spec =
                first_forecast_step_spec(inputs.frame, inputs.calendar, engine, target_day);
            BandwidthRecord rec;
            rec.method = BandwidthMethod::rule_of_thumb;
            rec.h = rule_of_thumb(spec.matrix->dim_count(), spec.matrix->sample_count());
            source.used.push_back(rec);
            break;
        }
    }
    return source;
}

json bandwidth_records_json(const std::vector<BandwidthRecord>& records) {
    json arr = json::array();
    for (const auto& rec : records) {
        json item;
        item["method"] = to_string(rec.method);
        if (rec.weekday) item["weekday"] = to_string(*rec.weekday);
        item["h"] = rec.h.h;
        item["objective"] = rec.objective;
        arr.push_back(item);
    }
    return arr;
}

void write_manifest(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << doc.dump(2) << '\n';
}

std::vector<double> realized_window(const SeriesFrame& frame, std::int64_t day,
                                    std::size_t steps) {
    std::vector<double> y;
    y.reserve(steps);
    for (std::size_t j = 0; j < steps; ++j) {
        const std::int64_t idx = frame.index_of(day, static_cast<int>(j));
        if (idx < 0 || idx >= static_cast<std::int64_t>(frame.power.size()) ||
            std::isnan(frame.power[static_cast<std::size_t>(idx)])) {
            throw DataError("missing realized demand on " + format_date(day));
        }
        y.push_back(frame.power[static_cast<std::size_t>(idx)]);
    }
    return y;
}

} // namespace

ForecastTable to_table(const CombinedForecast& forecast) {
    ForecastTable table;
    table.times = forecast.times;
    table.expected.reserve(forecast.steps.size());
    table.quantiles.reserve(forecast.steps.size());
    for (const auto& step : forecast.steps) {
        table.expected.push_back(step.expected);
        table.quantiles.push_back(step.quantiles);
    }
    return table;
}

void write_forecast_csv(const ForecastTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write forecast to " + path);
    out << "timestamp,expected_value_kW";
    for (int k = 1; k <= 99; ++k) {
        char buf[8];
        std::snprintf(buf, sizeof buf, ",q%02d", k);
        out << buf;
    }
    out << '\n';
    for (std::size_t j = 0; j < table.times.size(); ++j) {
        out << format_timestamp(table.times[j]) << ',' << fmt(table.expected[j]);
        for (const double q : table.quantiles[j]) out << ',' << fmt(q);
        out << '\n';
    }
}

ForecastTable read_forecast_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open forecast file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty forecast file: " + path);

    ForecastTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const auto comma = line.find(',', pos);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (fields.size() != 101) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 101 columns");
        }
        table.times.push_back(parse_timestamp(fields[0]));
        table.expected.push_back(std::stod(fields[1]));
        std::vector<double> qs(99);
        for (std::size_t k = 0; k < 99; ++k) qs[k] = std::stod(fields[k + 2]);
        table.quantiles.push_back(std::move(qs));
    }
    if (table.times.empty()) throw DataError("forecast file has no rows: " + path);
    return table;
}

std::vector<std::string> cmd_ingest(const std::string& in_csv, const std::string& out_csv,
                                    const std::string& unit) {
    SeriesSchema schema;
    schema.unit = unit;
    TimeSeries series = load_series_csv(in_csv, schema);
    if (series.step_minutes == 10) {
        series = downsample_10_to_15(series);
    } else if (series.step_minutes != 15) {
        throw DataError("ingest expects 10- or 15-minute input, got " +
                        std::to_string(series.step_minutes) + " minutes");
    }
    write_series_csv(series, out_csv);
    std::fprintf(stderr, "ingest: %zu steps, %zu gaps -> %s\n", series.size(),
                 series.gap_count(), out_csv.c_str());
    return {out_csv};
}

std::vector<std::string> cmd_forecast(const RunConfig& config, std::int64_t target_day) {
    const OutputLock lock(config.output_dir);
    const auto t0 = std::chrono::steady_clock::now();

    const Inputs inputs = load_inputs(config);
    const EngineConfig engine = config.engine_config();
    const std::uint64_t seed = require_seed(config);

    const BandwidthSource source =
        make_bandwidth_source(config, inputs, engine, target_day, seed, std::nullopt);
    const CombinedForecast forecast = day_ahead_forecast(inputs.frame, inputs.calendar, engine,
                                                         source.fn(), target_day, seed);

    const std::string date = format_date(target_day);
    const std::string csv_path = (fs::path(config.output_dir) / ("forecast_" + date + ".csv")).string();
    write_forecast_csv(to_table(forecast), csv_path);

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    json manifest;
    manifest["command"] = "forecast";
    manifest["date"] = date;
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = seed;
    manifest["method"] = to_string(config.bandwidth.method);
    manifest["scenarios_used"] = forecast.scenarios_used;
    manifest["bandwidths"] = bandwidth_records_json(source.used);
    manifest["wall_time_ms"] = wall_ms;
    manifest["outputs"] = {csv_path};
    const std::string manifest_path =
        (fs::path(config.output_dir) / ("manifest_forecast_" + date + ".json")).string();
    write_manifest(manifest, manifest_path);
    return {csv_path, manifest_path};
}

std::vector<std::string> cmd_evaluate(const std::string& forecast_csv,
                                      const std::string& realized_csv,
                                      const std::string& out_dir) {
    const OutputLock lock(out_dir);

    const ForecastTable table = read_forecast_csv(forecast_csv);
    const TimeSeries realized = load_series_csv(realized_csv, {15, "kW"});

    // group forecast rows by local day
    std::map<std::int64_t, std::vector<std::size_t>> by_day;
    for (std::size_t j = 0; j < table.times.size(); ++j) {
        by_day[table.times[j].local_day()].push_back(j);
    }

    std::vector<std::pair<std::string, EvaluationReport>> rows;
    std::vector<EvaluationReport> day_reports;
    for (const auto& [day, indices] : by_day) {
        std::vector<std::vector<double>> quantiles;
        std::vector<double> y;
        for (const std::size_t j : indices) {
            const std::int64_t idx = realized.index_of(table.times[j]);
            if (idx < 0 || realized.is_gap(static_cast<std::size_t>(idx))) {
                throw DataError("no realized value at " + format_timestamp(table.times[j]));
            }
            quantiles.push_back(table.quantiles[j]);
            y.push_back(realized.values[static_cast<std::size_t>(idx)]);
        }
        const EvaluationReport report = evaluate_forecast(quantiles, y);
        day_reports.push_back(report);
        rows.emplace_back(format_date(day), report);
    }
    const EvaluationReport average = average_reports(day_reports);
    rows.emplace_back("average", average);

    const std::string csv_path = (fs::path(out_dir) / "metrics.csv").string();
    const std::string kv_path = (fs::path(out_dir) / "metrics.txt").string();
    write_report_csv(rows, csv_path);
    write_report_keyvalue(average, kv_path);
    return {csv_path, kv_path};
}

std::vector<std::string> cmd_benchmark(const RunConfig& config, std::int64_t start_day) {
    const OutputLock lock(config.output_dir);
    const auto t0 = std::chrono::steady_clock::now();

    const Inputs inputs = load_inputs(config);
    const std::uint64_t seed = require_seed(config);
    const int n_days = config.eval_days;

    const LagSpec short_lags{{672}, {0}};
    const LagSpec long_lags{{1, 12, 24, 96, 672}, {0}};

    struct Variant {
        std::string name;
        BandwidthMethod method;
        LagSpec lags;
    };
    const std::vector<Variant> variants = {
        {"EC ISE-optimized", BandwidthMethod::ise, short_lags},
        {"EC QL-optimized 1", BandwidthMethod::ql, short_lags},
        {"EC QL-optimized 2", BandwidthMethod::ql, long_lags},
        {"EC Rule-of-thumb 1", BandwidthMethod::rule_of_thumb, short_lags},
        {"EC Rule-of-thumb 2", BandwidthMethod::rule_of_thumb, long_lags},
    };

    std::vector<std::pair<std::string, EvaluationReport>> rows;
    json variant_manifest = json::array();

    for (std::size_t v = 0; v < variants.size(); ++v) {
        const Variant& variant = variants[v];
        RunConfig vconfig = config;
        vconfig.lags = variant.lags;
        vconfig.bandwidth.method = variant.method;
        EngineConfig engine = vconfig.engine_config();

        std::optional<WeekdayBandwidths> trained;
        if (variant.method == BandwidthMethod::ql) {
            if (!config.ql_training_start) {
                throw ConfigError("benchmark requires ql_training_start for the QL variants");
            }
            if (*config.ql_training_start + 6 >= start_day) {
                throw ConfigError("ql training week must strictly precede the evaluation window");
            }
            trained = optimize_ql(inputs.frame, inputs.calendar, engine,
                                  *config.ql_training_start, vconfig.bandwidth,
                                  CounterRng::derive_seed(seed, v, 0));
        }

        std::vector<EvaluationReport> day_reports;
        json bandwidths_used = json::array();
        for (int d = 0; d < n_days; ++d) {
            const std::int64_t day = start_day + d;
            const BandwidthSource source = make_bandwidth_source(
                vconfig, inputs, engine, day, seed, trained);
            const CombinedForecast forecast =
                day_ahead_forecast(inputs.frame, inputs.calendar, engine, source.fn(), day,
                                   CounterRng::derive_seed(seed, v, static_cast<std::uint64_t>(day)));
            std::vector<std::vector<double>> quantiles;
            quantiles.reserve(forecast.steps.size());
            for (const auto& step : forecast.steps) quantiles.push_back(step.quantiles);
            day_reports.push_back(
                evaluate_forecast(quantiles, realized_window(inputs.frame, day, quantiles.size())));
            if (d == 0) bandwidths_used = bandwidth_records_json(source.used);
        }
        rows.emplace_back(variant.name, average_reports(day_reports));
        json vm;
        vm["name"] = variant.name;
        vm["method"] = to_string(variant.method);
        vm["power_lags"] = variant.lags.power_lags;
        vm["temperature_lags"] = variant.lags.temperature_lags;
        vm["bandwidths_first_day"] = bandwidths_used;
        variant_manifest.push_back(vm);
    }

    // linear QR benchmark sharing the ISE lag set and pre-clustering
    {
        EngineConfig engine = config.engine_config();
        engine.lags = short_lags;
        const std::int64_t first_origin_day = start_day - 1;
        const std::int64_t history_end =
            inputs.frame.index_of(first_origin_day, config.cutoff_step);
        if (history_end <= 0) throw DataError("history does not reach the market cutoff");

        QrModel model;
        for (const DayCluster cluster : {DayCluster::working, DayCluster::holiday}) {
            std::vector<QrRow> rows_cluster;
            for (int step = 0; step < SeriesFrame::steps_per_day; ++step) {
                const DesignMatrix matrix =
                    build_design_matrix(inputs.frame, short_lags, step, cluster, inputs.calendar,
                                        static_cast<std::size_t>(history_end));
                for (std::size_t i = 0; i < matrix.sample_count(); ++i) {
                    QrRow row;
                    row.target = matrix.physical[0][i];
                    row.lag_power = matrix.physical[1][i];
                    row.temperature = matrix.physical[2][i];
                    rows_cluster.push_back(row);
                }
            }
            model.weights[cluster] = fit_qr(rows_cluster);
        }

        std::size_t crossings = 0;
        std::vector<EvaluationReport> day_reports;
        for (int d = 0; d < n_days; ++d) {
            const std::int64_t day = start_day + d;
            const DayCluster cluster = cluster_of_day(day, inputs.calendar);
            std::vector<std::vector<double>> quantiles;
            for (int step = 0; step < SeriesFrame::steps_per_day; ++step) {
                const std::int64_t idx = inputs.frame.index_of(day, step);
                const std::int64_t lag_idx = idx - 672;
                if (lag_idx < 0 || std::isnan(inputs.frame.power[static_cast<std::size_t>(lag_idx)]) ||
                    std::isnan(inputs.frame.temperature[static_cast<std::size_t>(idx)])) {
                    throw DataError("missing QR features on " + format_date(day));
                }
                quantiles.push_back(predict_qr(model, cluster,
                                               inputs.frame.power[static_cast<std::size_t>(lag_idx)],
                                               inputs.frame.temperature[static_cast<std::size_t>(idx)],
                                               &crossings));
            }
            day_reports.push_back(evaluate_forecast(
                quantiles, realized_window(inputs.frame, day, quantiles.size())));
        }
        rows.emplace_back("Quantile regression", average_reports(day_reports));
        json vm;
        vm["name"] = "Quantile regression";
        vm["crossing_pairs"] = crossings;
        variant_manifest.push_back(vm);
        if (crossings > 0) {
            std::fprintf(stderr, "benchmark: QR produced %zu crossing quantile pairs\n", crossings);
        }
    }

    const std::string csv_path = (fs::path(config.output_dir) / "benchmark.csv").string();
    write_report_csv(rows, csv_path);

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    json manifest;
    manifest["command"] = "benchmark";
    manifest["start_date"] = format_date(start_day);
    manifest["days"] = n_days;
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = seed;
    manifest["variants"] = variant_manifest;
    manifest["wall_time_ms"] = wall_ms;
    manifest["outputs"] = {csv_path};
    const std::string manifest_path =
        (fs::path(config.output_dir) / "manifest_benchmark.json").string();
    write_manifest(manifest, manifest_path);
    return {csv_path, manifest_path};
}

std::vector<std::string> cmd_optimize_bandwidth(const RunConfig& config,
                                                std::int64_t target_day) {
    const OutputLock lock(config.output_dir);
    const Inputs inputs = load_inputs(config);
    const EngineConfig engine = config.engine_config();
    const std::uint64_t seed = config.seed.value_or(0);

    const BandwidthSource source =
        make_bandwidth_source(config, inputs, engine, target_day, seed, std::nullopt);
    const std::string path =
        (fs::path(config.output_dir) /
         ("bandwidths_" + to_string(config.bandwidth.method) + "_" + format_date(target_day) +
          ".txt"))
            .string();
    save_bandwidths(source.used, path);
    return {path};
}

std::vector<std::string> cmd_aggregation_study(const RunConfig& config, std::int64_t start_day,
                                               std::optional<int> only_level) {
    const OutputLock lock(config.output_dir);
    const auto t0 = std::chrono::steady_clock::now();

    if (config.hierarchy_path.empty() || config.series_dir.empty()) {
        throw ConfigError("aggregation study requires hierarchy and series_dir");
    }

    AggregationStudyInput input;
    input.hierarchy = load_hierarchy(config.hierarchy_path);
    input.temperature = load_series_csv(config.temperature_csv, {15, "degC"});
    input.calendar = load_calendar(config.calendar_path, config.calendar_region);
    input.engine = config.engine_config();
    input.bandwidth = config.bandwidth;
    input.n_samples = config.aggregation_samples;
    input.seed = require_seed(config);
    input.only_level = only_level;
    for (int d = 0; d < config.eval_days; ++d) input.eval_days.push_back(start_day + d);

    // leaf series come from files; parents default to the sum of children
    const std::vector<std::string> nodes = input.hierarchy.all_nodes();
    for (const auto& node : nodes) {
        const fs::path path = fs::path(config.series_dir) / (node + ".csv");
        if (fs::exists(path)) {
            input.node_power[node] = load_series_csv(path.string(), {15, "kW"});
        }
    }
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        const std::string& node = *it;
        if (input.node_power.count(node) > 0 || input.hierarchy.is_leaf(node)) continue;
        const auto& kids = input.hierarchy.children.at(node);
        TimeSeries sum;
        bool first = true;
        for (const auto& kid : kids) {
            const auto kit = input.node_power.find(kid);
            if (kit == input.node_power.end()) {
                throw DataError("no series for node " + node + " or its child " + kid);
            }
            if (first) {
                sum = kit->second;
                first = false;
            } else {
                if (kit->second.size() != sum.size() ||
                    !(kit->second.start == sum.start)) {
                    throw DataError("child series misaligned under " + node);
                }
                for (std::size_t i = 0; i < sum.size(); ++i) sum.values[i] += kit->second.values[i];
            }
        }
        input.node_power[node] = std::move(sum);
    }
    validate_hierarchy_series(input.hierarchy, input.node_power);

    const std::vector<LevelResult> results = aggregation_study(input);

    std::vector<std::pair<std::string, EvaluationReport>> rows;
    json level_manifest = json::array();
    for (const auto& lr : results) {
        rows.emplace_back("L" + std::to_string(lr.level), lr.report);
        json lm;
        lm["level"] = lr.level;
        lm["node_seeds"] = lr.node_seeds;
        level_manifest.push_back(lm);
    }
    const std::string csv_path =
        (fs::path(config.output_dir) / "aggregation_study.csv").string();
    write_report_csv(rows, csv_path);

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    json manifest;
    manifest["command"] = "aggregate-study";
    manifest["start_date"] = format_date(start_day);
    manifest["days"] = config.eval_days;
    manifest["config_hash"] = config_hash(config);
    manifest["seed"] = *config.seed;
    manifest["n_samples"] = config.aggregation_samples;
    manifest["levels"] = level_manifest;
    manifest["wall_time_ms"] = wall_ms;
    manifest["outputs"] = {csv_path};
    const std::string manifest_path =
        (fs::path(config.output_dir) / "manifest_aggregation.json").string();
    write_manifest(manifest, manifest_path);
    return {csv_path, manifest_path};
}

} // namespace ecopf::commands
