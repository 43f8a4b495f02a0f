#include "ecopf/runconfig.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ecopf/errors.hpp"

namespace ecopf {

namespace {

using nlohmann::json;

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError("config missing required path: " + what);
    if (!std::filesystem::exists(path)) {
        throw ConfigError(what + " does not exist: " + path);
    }
}

} // namespace

int parse_cutoff(const std::string& text) {
    if (text.size() != 5 || text[2] != ':') throw ConfigError("market cutoff must be HH:MM");
    const int hh = std::stoi(text.substr(0, 2));
    const int mm = std::stoi(text.substr(3, 2));
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59) throw ConfigError("market cutoff out of range");
    if ((hh * 60 + mm) % 15 != 0) {
        throw ConfigError("market cutoff must fall on the 15-minute grid");
    }
    return (hh * 60 + mm) / 15;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }

    RunConfig config;
    try {
        config.power_csv = doc.value("power_csv", "");
        config.temperature_csv = doc.value("temperature_csv", "");
        config.calendar_path = doc.value("calendar", "");
        config.calendar_region = doc.value("calendar_region", "");
        config.hierarchy_path = doc.value("hierarchy", "");
        config.series_dir = doc.value("series_dir", "");
        config.output_dir = doc.value("output_dir", "out");

        if (doc.contains("lags")) {
            config.lags.power_lags = doc["lags"].value("power", std::vector<int>{672});
            config.lags.temperature_lags = doc["lags"].value("temperature", std::vector<int>{0});
        } else {
            config.lags.power_lags = {672};
            config.lags.temperature_lags = {0};
        }
        config.grid_size = doc.value("grid_size", std::size_t{100});
        config.scenarios = doc.value("scenarios", 50);
        config.threads = doc.value("threads", 1);
        config.cutoff_step = parse_cutoff(doc.value("market_cutoff", "10:00"));
        if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("bandwidth")) {
            const json& bw = doc["bandwidth"];
            config.bandwidth.method =
                bandwidth_method_from_string(bw.value("method", "ise"));
            config.bandwidth.initial_guess = bw.value("initial_guess", 0.01);
            config.bandwidth.lower = bw.value("lower", 1e-4);
            config.bandwidth.upper = bw.value("upper", 10.0);
            config.bandwidth.max_iterations = bw.value("max_iterations", 200);
            config.bandwidth.restarts = bw.value("restarts", 3);
        }
        if (doc.contains("ql_training_start")) {
            config.ql_training_start = parse_date(doc["ql_training_start"].get<std::string>());
        }
        config.eval_days = doc.value("eval_days", 1);
        config.aggregation_samples = doc.value("aggregation_samples", 10000);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }

    config.lags.validate();
    config.bandwidth.validate();
    if (config.grid_size < 2) throw ConfigError("grid_size must be at least 2");
    if (config.scenarios < 1) throw ConfigError("scenarios must be positive");
    if (config.threads < 1) throw ConfigError("threads must be positive");
    if (config.eval_days < 1) throw ConfigError("eval_days must be positive");
    if (config.aggregation_samples < 1) throw ConfigError("aggregation_samples must be positive");

    require_file(config.power_csv, "power_csv");
    require_file(config.temperature_csv, "temperature_csv");
    require_file(config.calendar_path, "calendar");
    if (!config.hierarchy_path.empty()) require_file(config.hierarchy_path, "hierarchy");
    if (!config.series_dir.empty() && !std::filesystem::is_directory(config.series_dir)) {
        throw ConfigError("series_dir is not a directory: " + config.series_dir);
    }
    return config;
}

std::string RunConfig::canonical_json() const {
    json doc;
    doc["power_csv"] = power_csv;
    doc["temperature_csv"] = temperature_csv;
    doc["calendar"] = calendar_path;
    doc["calendar_region"] = calendar_region;
    doc["hierarchy"] = hierarchy_path;
    doc["series_dir"] = series_dir;
    doc["lags"]["power"] = lags.power_lags;
    doc["lags"]["temperature"] = lags.temperature_lags;
    doc["grid_size"] = grid_size;
    doc["scenarios"] = scenarios;
    doc["cutoff_step"] = cutoff_step;
    if (seed) doc["seed"] = *seed;
    doc["bandwidth"]["method"] = to_string(bandwidth.method);
    doc["bandwidth"]["initial_guess"] = bandwidth.initial_guess;
    doc["bandwidth"]["lower"] = bandwidth.lower;
    doc["bandwidth"]["upper"] = bandwidth.upper;
    doc["bandwidth"]["max_iterations"] = bandwidth.max_iterations;
    doc["bandwidth"]["restarts"] = bandwidth.restarts;
    if (ql_training_start) doc["ql_training_start"] = format_date(*ql_training_start);
    doc["eval_days"] = eval_days;
    doc["aggregation_samples"] = aggregation_samples;
    return doc.dump();
}

EngineConfig RunConfig::engine_config() const {
    EngineConfig engine;
    engine.lags = lags;
    engine.grid_size = grid_size;
    engine.scenario_count = scenarios;
    engine.cutoff_step = cutoff_step;
    engine.threads = threads;
    return engine;
}

std::uint64_t config_hash(const RunConfig& config) {
    const std::string text = config.canonical_json();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

} // namespace ecopf
