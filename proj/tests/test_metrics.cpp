#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "ecopf/errors.hpp"
#include "ecopf/metrics.hpp"
#include "ecopf/rng.hpp"

using namespace ecopf;

namespace {

std::vector<std::vector<double>> constant_forecast(std::size_t steps, double value) {
    return std::vector<std::vector<double>>(steps, std::vector<double>(99, value));
}

} // namespace

TEST_CASE("quantile_loss pinball values") {
    CHECK(quantile_loss(0.5, 4.0, 2.0) == 1.0);
    CHECK(quantile_loss(0.9, 0.0, 1.0) == doctest::Approx(0.9).epsilon(1e-15));
    for (const double alpha : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        CHECK(quantile_loss(alpha, 3.0, 3.0) == 0.0);
    }
    CHECK_THROWS_AS(quantile_loss(0.0, 1.0, 1.0), DataError);
    CHECK_THROWS_AS(quantile_loss(1.0, 1.0, 1.0), DataError);
}

TEST_CASE("average_ql closed-form cases") {
    // point mass at the realization
    CHECK(average_ql(constant_forecast(5, 7.0), std::vector<double>(5, 7.0)) == 0.0);

    // every quantile one above the outcome: mean of (1-alpha) over the grid
    const double expected = 0.5; // (1/99) * sum_{k=1..99} (1 - k/100) = 0.5
    CHECK(average_ql(constant_forecast(1, 3.0), {2.0}) == doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(average_ql(constant_forecast(3, 1.0), {1.0, 1.0}), DataError);
    CHECK_THROWS_AS(average_ql({{1.0, 2.0}}, {1.0}), DataError);
}

TEST_CASE("average_ql matches the naive double loop on random fixtures") {
    const CounterRng rng(77, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t H = 4 + static_cast<std::size_t>(rng.uniform_at(900 + trial) * 8);
        std::vector<std::vector<double>> forecast(H, std::vector<double>(99));
        std::vector<double> realized(H);
        std::uint64_t c = trial * 10000;
        for (std::size_t j = 0; j < H; ++j) {
            realized[j] = rng.uniform_at(c++) * 40.0;
            for (int k = 0; k < 99; ++k) forecast[j][k] = rng.uniform_at(c++) * 40.0;
        }

        double naive = 0.0;
        for (std::size_t j = 0; j < H; ++j) {
            for (int k = 1; k <= 99; ++k) {
                const double alpha = k / 100.0;
                const double y_hat = forecast[j][static_cast<std::size_t>(k - 1)];
                naive += y_hat <= realized[j] ? alpha * (realized[j] - y_hat)
                                              : (1.0 - alpha) * (y_hat - realized[j]);
            }
        }
        naive /= 99.0 * static_cast<double>(H);
        CHECK(average_ql(forecast, realized) == doctest::Approx(naive).epsilon(1e-9));
    }
}

TEST_CASE("picp counts inclusive band membership") {
    CHECK(picp({0, 0, 0}, {2, 2, 2}, {1, 1, 1}) == 1.0);
    CHECK(picp({0, 0}, {1, 1}, {5, -3}) == 0.0);
    CHECK(picp({0, 0}, {1, 1}, {0.5, 9.0}) == 0.5);
    // boundary values are inside
    CHECK(picp({1, 1}, {2, 2}, {1, 2}) == 1.0);
}

TEST_CASE("pinaw normalized width") {
    // constant width w over realizations spanning range R gives w/R
    CHECK(pinaw({0, 0, 0}, {2, 2, 2}, {0, 5, 10}) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(pinaw({1, 2}, {1, 2}, {0, 4}) == 0.0);
    CHECK_THROWS_AS(pinaw({0, 0}, {1, 1}, {3, 3}), NumericalError);

    // joint affine rescaling leaves pinaw unchanged
    const std::vector<double> lo{1, 2, 3}, hi{2, 4, 5}, y{0, 3, 9};
    const double base = pinaw(lo, hi, y);
    std::vector<double> lo2, hi2, y2;
    for (std::size_t i = 0; i < 3; ++i) {
        lo2.push_back(2.5 * lo[i] - 7.0);
        hi2.push_back(2.5 * hi[i] - 7.0);
        y2.push_back(2.5 * y[i] - 7.0);
    }
    CHECK(pinaw(lo2, hi2, y2) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("metric invariances") {
    const CounterRng rng(31, 4);
    std::vector<std::vector<double>> forecast(6, std::vector<double>(99));
    std::vector<double> realized(6);
    std::uint64_t c = 0;
    for (std::size_t j = 0; j < 6; ++j) {
        realized[j] = rng.uniform_at(c++) * 10.0 + 1.0;
        for (int k = 0; k < 99; ++k) forecast[j][k] = rng.uniform_at(c++) * 10.0 + 1.0;
    }

    // positive homogeneity of the quantile loss
    std::vector<std::vector<double>> scaled = forecast;
    std::vector<double> scaled_y = realized;
    for (auto& row : scaled) {
        for (double& v : row) v *= 3.0;
    }
    for (double& v : scaled_y) v *= 3.0;
    CHECK(average_ql(scaled, scaled_y) ==
          doctest::Approx(3.0 * average_ql(forecast, realized)).epsilon(1e-12));

    // picp under a strictly increasing transform
    std::vector<double> lo(6), hi(6);
    for (std::size_t j = 0; j < 6; ++j) {
        lo[j] = forecast[j][4];
        hi[j] = forecast[j][94];
    }
    const double cover = picp(lo, hi, realized);
    std::vector<double> lo_t(6), hi_t(6), y_t(6);
    for (std::size_t j = 0; j < 6; ++j) {
        lo_t[j] = std::exp(lo[j] * 0.1);
        hi_t[j] = std::exp(hi[j] * 0.1);
        y_t[j] = std::exp(realized[j] * 0.1);
    }
    CHECK(picp(lo_t, hi_t, y_t) == cover);
}

TEST_CASE("evaluate_forecast pulls the right band columns") {
    std::vector<std::vector<double>> forecast(4, std::vector<double>(99));
    std::vector<double> realized = {10, 20, 30, 40};
    for (std::size_t j = 0; j < 4; ++j) {
        for (int k = 0; k < 99; ++k) {
            forecast[j][k] = realized[j] - 5.0 + 0.1 * k; // quantiles straddle the outcome
        }
    }
    const EvaluationReport report = evaluate_forecast(forecast, realized);
    CHECK(report.picp_5_95 == 1.0);
    CHECK(report.picp_10_90 == 1.0);
    CHECK(report.steps == 4);
    // band widths: q95-q05 = 9, q90-q10 = 8, range 30
    CHECK(report.pinaw_5_95 == doctest::Approx(9.0 / 30.0).epsilon(1e-12));
    CHECK(report.pinaw_10_90 == doctest::Approx(8.0 / 30.0).epsilon(1e-12));
}

TEST_CASE("multi-day averaging weights days equally") {
    EvaluationReport a, b;
    a.avg_ql = 1.0;
    a.picp_5_95 = 0.9;
    a.picp_10_90 = 0.8;
    a.pinaw_5_95 = 0.3;
    a.pinaw_10_90 = 0.2;
    a.steps = 96;
    b.avg_ql = 3.0;
    b.picp_5_95 = 0.7;
    b.picp_10_90 = 0.6;
    b.pinaw_5_95 = 0.1;
    b.pinaw_10_90 = 0.4;
    b.steps = 96;
    const EvaluationReport avg = average_reports({a, b});
    CHECK(avg.avg_ql == 2.0);
    CHECK(avg.picp_5_95 == doctest::Approx(0.8));
    CHECK(avg.pinaw_10_90 == doctest::Approx(0.3));
    CHECK(avg.days == 2);
    CHECK(avg.steps == 192);
}

TEST_CASE("report files round-trip the Table-2 shaped columns") {
    EvaluationReport r;
    r.avg_ql = 9.874;
    r.picp_5_95 = 0.946;
    r.picp_10_90 = 0.902;
    r.pinaw_5_95 = 0.305;
    r.pinaw_10_90 = 0.239;
    r.steps = 96;

    const auto dir = std::filesystem::temp_directory_path() / "ecopf_metrics_test";
    std::filesystem::create_directories(dir);
    const std::string csv = (dir / "report.csv").string();
    const std::string kv = (dir / "report.txt").string();
    write_report_csv({{"EC ISE-optimized", r}}, csv);
    write_report_keyvalue(r, kv);

    std::ifstream in(csv);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "model,ql,picp_5_95,picp_10_90,pinaw_5_95,pinaw_10_90");
    CHECK(row == "EC ISE-optimized,9.874,0.946,0.902,0.305,0.239");

    std::ifstream kin(kv);
    std::string first;
    std::getline(kin, first);
    CHECK(first == "ql = 9.874");
    std::filesystem::remove_all(dir);
}
