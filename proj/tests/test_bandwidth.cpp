#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "ecopf/bandwidth.hpp"
#include "ecopf/errors.hpp"
#include "ecopf/synthetic.hpp"
#include "ise_oracle.hpp"
#include "support.hpp"

using namespace ecopf;
using namespace ecopf::testsupport;

TEST_CASE("rule_of_thumb closed forms") {
    // (4/4)^(1/6) = 1 and 64^(-1/6) = 1/2, so h = 0.29/2
    const Bandwidths h2 = rule_of_thumb(2, 64, 0.29);
    CHECK(h2.h.size() == 2);
    for (const double v : h2.h) CHECK(v == doctest::Approx(0.145).epsilon(1e-12));

    const long double factor3 =
        std::pow(4.0L / 5.0L, 1.0L / 7.0L) * std::pow(100.0L, -1.0L / 7.0L);
    const Bandwidths h3 = rule_of_thumb(3, 100, 0.29);
    for (const double v : h3.h) {
        CHECK(v == doctest::Approx(static_cast<double>(factor3 * 0.29L)).epsilon(1e-10));
    }
}

TEST_CASE("rule_of_thumb default sigma comes from the rank set") {
    for (const std::size_t m : {5, 64, 313}) {
        const double md = static_cast<double>(m);
        const double sigma = std::sqrt(md / (12.0 * (md + 1.0)));
        const Bandwidths h = rule_of_thumb(2, m);
        CHECK(h.h[0] == doctest::Approx(rule_of_thumb_factor(2, m) * sigma).epsilon(1e-12));
    }
    CHECK_THROWS_AS(rule_of_thumb(0, 10), DataError);
    CHECK_THROWS_AS(rule_of_thumb(2, 0), DataError);
}

TEST_CASE("rule_of_thumb decreases monotonically in the sample count") {
    double prev = 1e9;
    for (std::size_t m = 2; m <= 4096; m *= 2) {
        const double h = rule_of_thumb(3, m).h[0];
        CHECK(h < prev);
        prev = h;
    }
}

TEST_CASE("ise_objective agrees with the from-scratch trapezoid oracle") {
    const CopulaData data = dependent_copula(20, 2, 0.5, 21);
    const Bandwidths h{{0.1, 0.1}};
    const std::vector<double> conditioning{0.45};

    const double fast = ise_objective(h, data, conditioning, 100);
    const double reference = ise_objective_ref(h, data, conditioning, 10000);
    CHECK(std::abs(fast - reference) < 1e-4);
}

TEST_CASE("ise_objective is stable under grid refinement") {
    const CopulaData data = dependent_copula(24, 2, 0.6, 22);
    const Bandwidths h{{0.15, 0.15}};
    const double coarse = ise_objective(h, data, {0.5}, 100);
    const double fine = ise_objective(h, data, {0.5}, 400);
    CHECK(std::abs(coarse - fine) < 1e-3);
}

TEST_CASE("ise_objective row-permutation invariance and m guard") {
    const std::size_t m = 12;
    const CopulaData data = dependent_copula(m, 3, 0.4, 23);
    std::vector<std::vector<double>> permuted(3, std::vector<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t src = (i * 5 + 2) % m;
        for (std::size_t j = 0; j < 3; ++j) permuted[j][i] = data.at(src, j);
    }
    const CopulaData shuffled = CopulaData::from_columns(permuted);
    const Bandwidths h{{0.08, 0.2, 0.12}};
    CHECK(ise_objective(h, data, {0.3, 0.6}, 100) ==
          doctest::Approx(ise_objective(h, shuffled, {0.3, 0.6}, 100)).epsilon(1e-12));

    const CopulaData one = independent_copula(1, 2, 24);
    CHECK_THROWS_WITH_AS(ise_objective(h, one, {0.5}, 50), "leave-one-out requires m >= 2",
                         DataError);
}

TEST_CASE("ise_objective leave-one-out bookkeeping on tiny samples") {
    // small-m fixtures, one of them with a duplicated row, against the
    // explicit-loop oracle
    const std::vector<double> u1 = {0.2, 0.4, 0.55, 0.7, 0.85};
    const std::vector<double> u2 = {0.25, 0.45, 0.5, 0.72, 0.8};
    const CopulaData base = CopulaData::from_columns({u1, u2});

    std::vector<double> d1 = u1, d2 = u2;
    d1.push_back(u1[2]); // duplicate the middle row
    d2.push_back(u2[2]);
    const CopulaData with_dup = CopulaData::from_columns({d1, d2});

    const Bandwidths h{{0.12, 0.12}};
    CHECK(std::abs(ise_objective(h, base, {0.5}, 100) -
                   ise_objective_ref(h, base, {0.5}, 4000)) < 1e-4);
    CHECK(std::abs(ise_objective(h, with_dup, {0.5}, 100) -
                   ise_objective_ref(h, with_dup, {0.5}, 4000)) < 1e-4);
}

TEST_CASE("optimize_ise descent, determinism and bounds") {
    const CopulaData data = dependent_copula(200, 2, 0.35, 25);
    BandwidthConfig config;
    config.max_iterations = 60;

    const OptimizeOutcome first = optimize_ise(data, {0.5}, config);
    const OptimizeOutcome second = optimize_ise(data, {0.5}, config);

    const double start = ise_objective(Bandwidths::uniform(2, config.initial_guess), data, {0.5}, 100);
    CHECK(first.objective <= start);
    CHECK_FALSE(first.warning);
    CHECK(first.h.h == second.h.h); // bit-identical reruns
    for (const double v : first.h.h) {
        CHECK(v >= config.lower);
        CHECK(v <= config.upper);
    }
}

TEST_CASE("larger samples select smaller ISE bandwidths") {
    BandwidthConfig config;
    config.max_iterations = 40;
    const CopulaData small = dependent_copula(200, 2, 0.5, 26);
    const CopulaData large = dependent_copula(2000, 2, 0.5, 26);
    const double h_small = optimize_ise(small, {0.5}, config).h.h[0];
    const double h_large = optimize_ise(large, {0.5}, config).h.h[0];
    CHECK(h_large < h_small);
}

namespace {

struct QlFixture {
    SeriesFrame frame;
    HolidayCalendar calendar;
    EngineConfig engine;
    std::int64_t training_day;
};

QlFixture make_ql_fixture(int days, std::uint64_t seed, double scale = 1.0) {
    SyntheticSpec spec;
    spec.start_day = parse_date("2018-01-01");
    spec.days = days;
    spec.seed = seed;
    SyntheticData data = make_synthetic(spec);
    if (scale != 1.0) {
        for (double& v : data.power.values) v *= scale;
    }

    QlFixture fixture{make_frame(data.power, data.temperature), HolidayCalendar{}, {}, 0};
    for (const auto d : data.holiday_days) fixture.calendar.holidays.insert(d);
    fixture.engine.lags = LagSpec{{672}, {0}};
    fixture.engine.grid_size = 64;
    fixture.engine.scenario_count = 8;
    fixture.training_day = spec.start_day + days - 2;
    return fixture;
}

} // namespace

TEST_CASE("ql_objective is zero for a point-mass history") {
    QlFixture fx = make_ql_fixture(30, 31);
    // constant demand makes every forecast a point mass at the realization
    for (double& v : fx.frame.power) v = 42.0;
    const double value = ql_objective(Bandwidths::uniform(3, 0.05), fx.frame, fx.calendar,
                                      fx.engine, fx.training_day, 9);
    CHECK(value == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("ql_objective scales linearly with demand") {
    const QlFixture base = make_ql_fixture(30, 32);
    const QlFixture doubled = make_ql_fixture(30, 32, 2.0);
    const Bandwidths h = Bandwidths::uniform(3, 0.05);
    const double v1 = ql_objective(h, base.frame, base.calendar, base.engine, base.training_day, 5);
    const double v2 =
        ql_objective(h, doubled.frame, doubled.calendar, doubled.engine, doubled.training_day, 5);
    CHECK(v2 == doctest::Approx(2.0 * v1).epsilon(1e-9));
}

TEST_CASE("ql_objective equals an explicit loop over the forecast quantiles") {
    const QlFixture fx = make_ql_fixture(30, 33);
    const Bandwidths h = Bandwidths::uniform(3, 0.08);
    const std::uint64_t seed = 77;

    const double value = ql_objective(h, fx.frame, fx.calendar, fx.engine, fx.training_day, seed);

    const BandwidthFn fixed = [&](const DesignMatrix&, std::int64_t) { return h; };
    const CombinedForecast forecast =
        day_ahead_forecast(fx.frame, fx.calendar, fx.engine, fixed, fx.training_day, seed);
    double naive = 0.0;
    for (std::size_t j = 0; j < forecast.steps.size(); ++j) {
        const std::int64_t idx = fx.frame.index_of(fx.training_day, static_cast<int>(j));
        const double y = fx.frame.power[static_cast<std::size_t>(idx)];
        for (int k = 1; k <= 99; ++k) {
            const double q = forecast.steps[j].quantiles[static_cast<std::size_t>(k - 1)];
            naive += q <= y ? (k / 100.0) * (y - q) : (1.0 - k / 100.0) * (q - y);
        }
    }
    CHECK(value == doctest::Approx(naive).epsilon(1e-9));
}

TEST_CASE("optimize_ql trains every weekday and descends") {
    const QlFixture fx = make_ql_fixture(40, 34);
    BandwidthConfig config;
    config.restarts = 1;
    config.max_iterations = 4;

    const std::int64_t week_start = fx.training_day - 8; // 7 training days, all realized
    const WeekdayBandwidths trained =
        optimize_ql(fx.frame, fx.calendar, fx.engine, week_start, config, 11);

    CHECK(trained.complete());
    for (int w = 0; w < 7; ++w) {
        const std::int64_t day = week_start + ((w - static_cast<int>(weekday_of_day(week_start)) + 7) % 7);
        const double at_guess = ql_objective(Bandwidths::uniform(3, config.initial_guess),
                                             fx.frame, fx.calendar, fx.engine, day, 11);
        const Weekday weekday = weekday_of_day(day);
        CHECK(trained.objective[static_cast<std::size_t>(weekday)] <= at_guess + 1e-9);
        for (const double v : trained.per_weekday[static_cast<std::size_t>(weekday)]->h) {
            CHECK(v >= config.lower);
            CHECK(v <= config.upper);
        }
    }

    // single-restart training is deterministic
    const WeekdayBandwidths again =
        optimize_ql(fx.frame, fx.calendar, fx.engine, week_start, config, 11);
    for (int w = 0; w < 7; ++w) {
        CHECK(trained.per_weekday[w]->h == again.per_weekday[w]->h);
    }
}

TEST_CASE("holiday lookups use the Sunday bandwidths") {
    WeekdayBandwidths trained;
    for (int w = 0; w < 7; ++w) {
        trained.per_weekday[w] = Bandwidths::uniform(1, 0.01 * (w + 1));
    }
    HolidayCalendar calendar;
    const std::int64_t wednesday = parse_date("2018-12-12");
    calendar.holidays.insert(wednesday);

    CHECK(trained.for_day(wednesday, calendar).h[0] ==
          trained.per_weekday[static_cast<int>(Weekday::sun)]->h[0]);
    CHECK(trained.for_day(parse_date("2018-12-11"), calendar).h[0] ==
          trained.per_weekday[static_cast<int>(Weekday::tue)]->h[0]);
    // Saturdays are holiday-clustered by default
    CHECK(trained.for_day(parse_date("2018-12-15"), calendar).h[0] ==
          trained.per_weekday[static_cast<int>(Weekday::sun)]->h[0]);
}

TEST_CASE("bandwidth records round-trip through the key-value document") {
    std::vector<BandwidthRecord> records;
    BandwidthRecord a;
    a.method = BandwidthMethod::ise;
    a.h.h = {0.0123456789012345, 0.2};
    a.objective = -1.25;
    a.timestamp = "2026-01-01T00:00:00Z";
    records.push_back(a);
    BandwidthRecord b;
    b.method = BandwidthMethod::ql;
    b.weekday = Weekday::fri;
    b.h.h = {0.5};
    b.objective = 321.0;
    b.timestamp = "2026-01-02T00:00:00Z";
    records.push_back(b);

    const auto path =
        (std::filesystem::temp_directory_path() / "ecopf_bandwidths_test.txt").string();
    save_bandwidths(records, path);
    const auto loaded = load_bandwidths(path);

    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].method == BandwidthMethod::ise);
    CHECK_FALSE(loaded[0].weekday.has_value());
    CHECK(loaded[0].h.h == records[0].h.h);
    CHECK(loaded[0].objective == records[0].objective);
    CHECK(loaded[1].weekday == Weekday::fri);
    CHECK(loaded[1].h.h == records[1].h.h);
    std::filesystem::remove(path);
}
