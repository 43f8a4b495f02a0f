#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecopf/forecast.hpp"
#include "ecopf/runconfig.hpp"

namespace ecopf::commands {

/// Forecast document: one row per step with the expectation and 99 quantiles.
struct ForecastTable {
    std::vector<Timestamp> times;
    std::vector<double> expected;
    std::vector<std::vector<double>> quantiles;
};

ForecastTable to_table(const CombinedForecast& forecast);
void write_forecast_csv(const ForecastTable& table, const std::string& path);
ForecastTable read_forecast_csv(const std::string& path);

/// Normalize a raw series file: 10-minute inputs are downsampled to the
/// 15-minute grid, gaps are made explicit. Returns the paths written.
std::vector<std::string> cmd_ingest(const std::string& in_csv, const std::string& out_csv,
                                    const std::string& unit);

/// Day-ahead forecast for `target_day`, written as CSV plus a manifest that
/// pins config hash, seed and the bandwidths used.
std::vector<std::string> cmd_forecast(const RunConfig& config, std::int64_t target_day);

/// Score a forecast CSV against realized demand; reports are averaged over
/// whole days and written as CSV and key-value documents.
std::vector<std::string> cmd_evaluate(const std::string& forecast_csv,
                                      const std::string& realized_csv,
                                      const std::string& out_dir);

/// Table-2 style comparison: the five EC variants against linear QR over an
/// evaluation window.
std::vector<std::string> cmd_benchmark(const RunConfig& config, std::int64_t start_day);

/// Run the configured bandwidth selection and persist the records.
std::vector<std::string> cmd_optimize_bandwidth(const RunConfig& config, std::int64_t target_day);

/// Appendix-style aggregation study over the meter hierarchy.
std::vector<std::string> cmd_aggregation_study(const RunConfig& config, std::int64_t start_day,
                                               std::optional<int> only_level);

} // namespace ecopf::commands
