#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ecopf/commands.hpp"
#include "ecopf/errors.hpp"
#include "ecopf/timeseries.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string date;
    std::string method;
    std::string out_dir;
};

ecopf::RunConfig load_config(const GlobalArgs& args) {
    if (args.config_path.empty()) throw ecopf::ConfigError("--config is required");
    ecopf::RunConfig config = ecopf::load_run_config(args.config_path);
    if (args.seed) config.seed = *args.seed;
    if (!args.method.empty()) {
        config.bandwidth.method = ecopf::bandwidth_method_from_string(args.method);
    }
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    return config;
}

std::int64_t require_date(const GlobalArgs& args) {
    if (args.date.empty()) throw ecopf::ConfigError("--date YYYY-MM-DD is required");
    return ecopf::parse_date(args.date);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic load forecasting with empirical copulas"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "Run configuration JSON");
    app.add_option("--seed", args.seed, "Master seed (overrides config)");
    app.add_option("--date", args.date, "Target date YYYY-MM-DD");
    app.add_option("--method", args.method, "Bandwidth method: ise, ql or rot");
    app.add_option("--out", args.out_dir, "Output directory (overrides config)");

    std::string ingest_in, ingest_out, ingest_unit = "kW";
    CLI::App* ingest = app.add_subcommand("ingest", "Normalize a raw series CSV to 15 minutes");
    ingest->add_option("--in", ingest_in, "Input CSV (10- or 15-minute)")->required();
    ingest->add_option("--out-file", ingest_out, "Output CSV")->required();
    ingest->add_option("--unit", ingest_unit, "Unit tag (kW, degC)");

    CLI::App* forecast = app.add_subcommand("forecast", "Day-ahead forecast for --date");

    std::string eval_forecast, eval_realized;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score a forecast CSV");
    evaluate->add_option("--forecast", eval_forecast, "Forecast CSV")->required();
    evaluate->add_option("--realized", eval_realized, "Realized demand CSV")->required();

    CLI::App* benchmark =
        app.add_subcommand("benchmark", "EC variants vs quantile regression from --date");

    CLI::App* optimize = app.add_subcommand("optimize-bandwidth",
                                            "Select bandwidths and persist them");

    std::string level_arg;
    CLI::App* study = app.add_subcommand("aggregate-study",
                                         "Forecast-aggregation study over the hierarchy");
    study->add_option("--level", level_arg, "Restrict to one level (L1..L4)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (ingest->parsed()) {
            ecopf::commands::cmd_ingest(ingest_in, ingest_out, ingest_unit);
        } else if (forecast->parsed()) {
            const auto outputs =
                ecopf::commands::cmd_forecast(load_config(args), require_date(args));
            for (const auto& path : outputs) std::printf("%s\n", path.c_str());
        } else if (evaluate->parsed()) {
            const std::string out = args.out_dir.empty() ? "out" : args.out_dir;
            const auto outputs = ecopf::commands::cmd_evaluate(eval_forecast, eval_realized, out);
            for (const auto& path : outputs) std::printf("%s\n", path.c_str());
        } else if (benchmark->parsed()) {
            const auto outputs =
                ecopf::commands::cmd_benchmark(load_config(args), require_date(args));
            for (const auto& path : outputs) std::printf("%s\n", path.c_str());
        } else if (optimize->parsed()) {
            const auto outputs =
                ecopf::commands::cmd_optimize_bandwidth(load_config(args), require_date(args));
            for (const auto& path : outputs) std::printf("%s\n", path.c_str());
        } else if (study->parsed()) {
            std::optional<int> level;
            if (!level_arg.empty()) {
                if (level_arg.size() != 2 || level_arg[0] != 'L' || level_arg[1] < '1' ||
                    level_arg[1] > '9') {
                    throw ecopf::ConfigError("--level expects L1..L9");
                }
                level = level_arg[1] - '0';
            }
            const auto outputs = ecopf::commands::cmd_aggregation_study(load_config(args),
                                                                        require_date(args), level);
            for (const auto& path : outputs) std::printf("%s\n", path.c_str());
        }
    } catch (const ecopf::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ecopf::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return 0;
}
