#include "ecopf/calendar.hpp"

#include <fstream>

#include "ecopf/errors.hpp"
#include "ecopf/timeseries.hpp"

namespace ecopf {

std::string to_string(DayCluster cluster) {
    return cluster == DayCluster::working ? "working" : "holiday";
}

std::string to_string(Weekday weekday) {
    static const char* names[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    return names[static_cast<int>(weekday)];
}

Weekday weekday_from_string(const std::string& name) {
    static const char* names[] = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
    for (int i = 0; i < 7; ++i) {
        if (name == names[i]) return static_cast<Weekday>(i);
    }
    throw ConfigError("unknown weekday: " + name);
}

HolidayCalendar load_calendar(const std::string& path, const std::string& region) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open calendar file: " + path);

    HolidayCalendar calendar;
    std::string line;
    std::string current;
    bool seen_region = false;
    bool in_selected = region.empty(); // headerless files apply as-is
    bool matched = region.empty();
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t begin = 0;
        while (begin < line.size() && (line[begin] == ' ' || line[begin] == '\t')) ++begin;
        line.erase(0, begin);
        if (line.empty()) continue;

        if (line.front() == '[' && line.back() == ']') {
            current = line.substr(1, line.size() - 2);
            if (region.empty()) {
                // first section wins for an unnamed request
                in_selected = !seen_region;
            } else {
                in_selected = current == region;
                matched = matched || in_selected;
            }
            seen_region = true;
            continue;
        }
        if (in_selected) calendar.holidays.insert(parse_date(line));
    }
    if (!region.empty() && !matched) {
        throw ConfigError("calendar region not found: " + region + " in " + path);
    }
    return calendar;
}

Weekday weekday_of_day(std::int64_t days_since_epoch) {
    // 1970-01-01 was a Thursday
    const std::int64_t w = (days_since_epoch % 7 + 7 + 3) % 7;
    return static_cast<Weekday>(w);
}

DayCluster cluster_of_day(std::int64_t days_since_epoch, const HolidayCalendar& calendar) {
    if (calendar.weekends_are_holidays) {
        const Weekday w = weekday_of_day(days_since_epoch);
        if (w == Weekday::sat || w == Weekday::sun) return DayCluster::holiday;
    }
    if (calendar.holidays.count(days_since_epoch) > 0) return DayCluster::holiday;
    return DayCluster::working;
}

std::map<std::int64_t, DayCluster> cluster_days(const HolidayCalendar& calendar,
                                                const std::vector<std::int64_t>& days) {
    std::map<std::int64_t, DayCluster> out;
    for (const std::int64_t d : days) out[d] = cluster_of_day(d, calendar);
    return out;
}

} // namespace ecopf
