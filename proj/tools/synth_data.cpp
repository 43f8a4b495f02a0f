// Demo data generator: writes a synthetic feeder dataset (power,
// temperature, holiday calendar, meter hierarchy and per-node series) plus a
// ready-to-run config file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecopf/errors.hpp"
#include "ecopf/synthetic.hpp"
#include "ecopf/timeseries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

int main(int argc, char** argv) {
    CLI::App app{"Synthetic dataset generator for the load-forecasting demo"};

    std::string out_dir = "demo";
    std::string start_date = "2018-01-01";
    int days = 130;
    std::uint64_t seed = 42;
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--start", start_date, "First day YYYY-MM-DD");
    app.add_option("--days", days, "Number of days to simulate");
    app.add_option("--seed", seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(out_dir);
        fs::create_directories(fs::path(out_dir) / "nodes");

        ecopf::SyntheticSpec spec;
        spec.start_day = ecopf::parse_date(start_date);
        spec.days = days;
        spec.seed = seed;
        const ecopf::SyntheticData data = ecopf::make_synthetic(spec);

        ecopf::write_series_csv(data.power, (fs::path(out_dir) / "power.csv").string());
        ecopf::write_series_csv(data.temperature,
                                (fs::path(out_dir) / "temperature.csv").string());

        std::ofstream cal((fs::path(out_dir) / "holidays.txt").string());
        cal << "[synthetic]\n";
        for (const auto day : data.holiday_days) cal << ecopf::format_date(day) << '\n';
        cal.close();

        // two-substation hierarchy: 4 meters, 2 substations, 1 feeder total
        const auto leaves = ecopf::split_into_leaves(data.power, 4, seed);
        const std::vector<std::string> leaf_names = {"M1", "M2", "M3", "M4"};
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            ecopf::write_series_csv(
                leaves[i], (fs::path(out_dir) / "nodes" / (leaf_names[i] + ".csv")).string());
        }
        ecopf::TimeSeries s1 = leaves[0], s2 = leaves[2];
        for (std::size_t i = 0; i < s1.size(); ++i) s1.values[i] += leaves[1].values[i];
        for (std::size_t i = 0; i < s2.size(); ++i) s2.values[i] += leaves[3].values[i];
        ecopf::write_series_csv(s1, (fs::path(out_dir) / "nodes" / "S1.csv").string());
        ecopf::write_series_csv(s2, (fs::path(out_dir) / "nodes" / "S2.csv").string());
        ecopf::write_series_csv(data.power, (fs::path(out_dir) / "nodes" / "TOTAL.csv").string());

        json hierarchy;
        hierarchy["root"] = "TOTAL";
        hierarchy["children"]["TOTAL"] = {"S1", "S2"};
        hierarchy["children"]["S1"] = {"M1", "M2"};
        hierarchy["children"]["S2"] = {"M3", "M4"};
        std::ofstream hier((fs::path(out_dir) / "hierarchy.json").string());
        hier << hierarchy.dump(2) << '\n';
        hier.close();

        json config;
        config["power_csv"] = (fs::path(out_dir) / "power.csv").string();
        config["temperature_csv"] = (fs::path(out_dir) / "temperature.csv").string();
        config["calendar"] = (fs::path(out_dir) / "holidays.txt").string();
        config["calendar_region"] = "synthetic";
        config["hierarchy"] = (fs::path(out_dir) / "hierarchy.json").string();
        config["series_dir"] = (fs::path(out_dir) / "nodes").string();
        config["output_dir"] = "out";
        config["lags"]["power"] = {672};
        config["lags"]["temperature"] = {0};
        config["grid_size"] = 100;
        config["scenarios"] = 50;
        config["market_cutoff"] = "10:00";
        config["seed"] = 1234;
        config["bandwidth"]["method"] = "ise";
        config["eval_days"] = 7;
        // a training week two weeks before the end of the span
        const std::int64_t train_start = spec.start_day + days - 21;
        config["ql_training_start"] = ecopf::format_date(train_start);
        std::ofstream cfg((fs::path(out_dir) / "config.json").string());
        cfg << config.dump(2) << '\n';

        std::printf("wrote synthetic dataset under %s (%d days from %s)\n", out_dir.c_str(), days,
                    start_date.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
