#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ecopf/errors.hpp"
#include "ecopf/features.hpp"

using namespace ecopf;

namespace {

// 2018-01-01 was a Monday
const std::int64_t kMonday = parse_date("2018-01-01");

TimeSeries make_series(int days, double (*f)(int), const std::string& unit) {
    TimeSeries s;
    s.start.offset_minutes = 0;
    s.start.epoch_s = kMonday * 86400;
    s.step_minutes = 15;
    s.unit = unit;
    s.values.resize(static_cast<std::size_t>(days) * 96);
    for (int t = 0; t < days * 96; ++t) s.values[static_cast<std::size_t>(t)] = f(t);
    return s;
}

double identity(int t) { return static_cast<double>(t); }
double wiggle(int t) { return 10.0 + std::sin(t * 0.13) * 3.0; }

} // namespace

TEST_CASE("lag spec dimensions match the published configurations") {
    CHECK(LagSpec{{672}, {0}}.dims() == 3);
    CHECK(LagSpec{{1, 12, 24, 96, 672}, {0}}.dims() == 7);
    CHECK_THROWS_AS((LagSpec{{0}, {}}).validate(), ConfigError);
    CHECK_THROWS_AS((LagSpec{{-5}, {}}).validate(), ConfigError);
    CHECK_THROWS_AS((LagSpec{{96, 96}, {}}).validate(), ConfigError);
    CHECK_NOTHROW((LagSpec{{672}, {-4, 0}}).validate()); // negative temperature lags are fine
}

TEST_CASE("cluster_days partitions weekends, holidays and working days") {
    HolidayCalendar calendar;
    const std::int64_t wednesday = parse_date("2018-01-10");
    calendar.holidays.insert(wednesday);

    const std::int64_t saturday = parse_date("2018-01-06");
    const std::int64_t tuesday = parse_date("2018-01-09");
    const auto clusters = cluster_days(calendar, {saturday, tuesday, wednesday});
    CHECK(clusters.at(saturday) == DayCluster::holiday);
    CHECK(clusters.at(wednesday) == DayCluster::holiday);
    CHECK(clusters.at(tuesday) == DayCluster::working);
}

TEST_CASE("design matrix columns and the week-lag arithmetic") {
    const TimeSeries power = make_series(30, identity, "kW");
    const TimeSeries temperature = make_series(30, wiggle, "degC");
    const SeriesFrame frame = make_frame(power, temperature);
    const HolidayCalendar calendar;

    const LagSpec lags{{672}, {0}};
    const int step = 17;
    const DesignMatrix matrix =
        build_design_matrix(frame, lags, step, DayCluster::working, calendar, frame.size());

    CHECK(matrix.dim_count() == 3);
    CHECK(matrix.step_of_day == step);
    // the first week of working days (Mon..Fri) has no lag-672 coverage
    CHECK(matrix.dropped_rows == 5);
    REQUIRE(matrix.sample_count() > 0);

    for (std::size_t i = 0; i < matrix.sample_count(); ++i) {
        // with values equal to their index, lag 672 is exactly one week back
        CHECK(matrix.physical[1][i] == matrix.physical[0][i] - 672.0);
        const auto target_idx = static_cast<int>(matrix.physical[0][i]);
        CHECK(target_idx % 96 == step);
        CHECK(weekday_of_day(frame.day_of(static_cast<std::size_t>(target_idx))) != Weekday::sat);
        CHECK(matrix.physical[2][i] == wiggle(target_idx));
    }

    for (const double u : matrix.ranks.entries) {
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("rows are filtered by the target day's cluster") {
    const TimeSeries power = make_series(30, identity, "kW");
    const TimeSeries temperature = make_series(30, wiggle, "degC");
    const SeriesFrame frame = make_frame(power, temperature);
    const HolidayCalendar calendar;

    const DesignMatrix holiday = build_design_matrix(frame, LagSpec{{672}, {0}}, 10,
                                                     DayCluster::holiday, calendar, frame.size());
    for (const std::int64_t day : holiday.row_days) {
        const Weekday w = weekday_of_day(day);
        CHECK((w == Weekday::sat || w == Weekday::sun));
    }
}

TEST_CASE("constant power column ranks in day order") {
    const TimeSeries power = make_series(20, [](int) { return 5.5; }, "kW");
    const TimeSeries temperature = make_series(20, wiggle, "degC");
    const SeriesFrame frame = make_frame(power, temperature);

    const DesignMatrix matrix = build_design_matrix(frame, LagSpec{{96}, {0}}, 3,
                                                    DayCluster::working, HolidayCalendar{},
                                                    frame.size());
    const std::size_t m = matrix.sample_count();
    for (std::size_t i = 0; i < m; ++i) {
        CHECK(matrix.ranks.at(i, 0) == static_cast<double>(i + 1) / static_cast<double>(m + 1));
    }
}

TEST_CASE("dropping the most recent day removes exactly one row") {
    const TimeSeries power = make_series(32, identity, "kW");
    const TimeSeries temperature = make_series(32, wiggle, "degC");
    const SeriesFrame frame = make_frame(power, temperature);
    const HolidayCalendar calendar;
    const LagSpec lags{{672}, {0}};
    const int step = 40;

    const DesignMatrix full =
        build_design_matrix(frame, lags, step, DayCluster::working, calendar, 32 * 96);
    const DesignMatrix trimmed =
        build_design_matrix(frame, lags, step, DayCluster::working, calendar, 31 * 96);

    REQUIRE(full.sample_count() == trimmed.sample_count() + 1);
    for (std::size_t i = 0; i < trimmed.sample_count(); ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(full.physical[j][i] == trimmed.physical[j][i]);
        }
    }
}

TEST_CASE("insufficient history names the offending lag") {
    const TimeSeries power = make_series(5, identity, "kW");
    const TimeSeries temperature = make_series(5, wiggle, "degC");
    const SeriesFrame frame = make_frame(power, temperature);

    CHECK_THROWS_WITH_AS(build_design_matrix(frame, LagSpec{{672}, {0}}, 8, DayCluster::working,
                                             HolidayCalendar{}, frame.size()),
                         "insufficient history to cover power lag 672 at step 8", DataError);
}

TEST_CASE("rows with missing data are dropped and counted") {
    TimeSeries power = make_series(24, identity, "kW");
    const TimeSeries temperature = make_series(24, wiggle, "degC");
    // hole at step 30 of day 10 kills the day-10 row (target) and the
    // day-11 row (through the 96-step lag)
    power.values[10 * 96 + 30] = std::numeric_limits<double>::quiet_NaN();
    const SeriesFrame frame = make_frame(power, temperature);

    const DesignMatrix matrix = build_design_matrix(frame, LagSpec{{96}, {0}}, 30,
                                                    DayCluster::working, HolidayCalendar{},
                                                    frame.size());
    // day 0 lacks lag coverage; day 10 loses its target, day 11 its lag
    CHECK(matrix.dropped_rows == 3);
    for (const std::int64_t day : matrix.row_days) {
        CHECK(day != kMonday);
        CHECK(day != kMonday + 10);
        CHECK(day != kMonday + 11);
    }
}

TEST_CASE("frame alignment rejects mismatched spacing") {
    TimeSeries power = make_series(4, identity, "kW");
    TimeSeries temperature = make_series(4, wiggle, "degC");
    power.step_minutes = 10;
    CHECK_THROWS_AS(make_frame(power, temperature), DataError);
}

TEST_CASE("calendar file parsing with regions") {
    const auto path = std::filesystem::temp_directory_path() / "ecopf_calendar_test.txt";
    {
        std::ofstream out(path);
        out << "# fixture\n[vaud]\n2018-01-01\n2018-04-02\n\n[geneva]\n2018-12-31\n";
    }
    const HolidayCalendar vaud = load_calendar(path.string(), "vaud");
    CHECK(vaud.holidays.count(parse_date("2018-01-01")) == 1);
    CHECK(vaud.holidays.count(parse_date("2018-12-31")) == 0);

    const HolidayCalendar geneva = load_calendar(path.string(), "geneva");
    CHECK(geneva.holidays.count(parse_date("2018-12-31")) == 1);

    const HolidayCalendar first = load_calendar(path.string());
    CHECK(first.holidays.count(parse_date("2018-04-02")) == 1);

    CHECK_THROWS_AS(load_calendar(path.string(), "zurich"), ConfigError);
    CHECK_THROWS_AS(load_calendar("/nonexistent/calendar.txt"), ConfigError);
    std::filesystem::remove(path);
}
