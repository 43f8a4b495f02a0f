#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ecopf/bandwidth.hpp"
#include "ecopf/features.hpp"

namespace ecopf {

/// Run settings parsed from the JSON config file. CLI flags may override
/// seed, method and output directory after parsing.
struct RunConfig {
    std::string power_csv;
    std::string temperature_csv;
    std::string calendar_path;
    std::string calendar_region;
    std::string hierarchy_path;
    std::string series_dir;
    std::string output_dir = "out";

    LagSpec lags;
    std::size_t grid_size = 100;
    int scenarios = 50;
    int threads = 1;
    int cutoff_step = 40; // "10:00"
    std::optional<std::uint64_t> seed;
    BandwidthConfig bandwidth;
    std::optional<std::int64_t> ql_training_start;
    int eval_days = 1;
    int aggregation_samples = 10000;

    std::string canonical_json() const;
    EngineConfig engine_config() const;
};

RunConfig load_run_config(const std::string& path);

/// Parse "HH:MM" into a 15-minute step index.
int parse_cutoff(const std::string& text);

/// FNV-1a hash of the canonical config serialization.
std::uint64_t config_hash(const RunConfig& config);

} // namespace ecopf
