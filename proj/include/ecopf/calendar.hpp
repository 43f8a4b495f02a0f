#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace ecopf {

enum class DayCluster { working, holiday };
enum class Weekday { mon = 0, tue, wed, thu, fri, sat, sun };

std::string to_string(DayCluster cluster);
std::string to_string(Weekday weekday);
Weekday weekday_from_string(const std::string& name);

/// Public-holiday dates plus the weekend rule. Saturdays and Sundays are in
/// the holiday cluster unless weekends_are_holidays is cleared.
struct HolidayCalendar {
    std::set<std::int64_t> holidays; // days since epoch
    bool weekends_are_holidays = true;
};

/// Parse a calendar file: "[region]" section headers followed by one
/// ISO-8601 date per line; '#' starts a comment. Empty region selects the
/// first section (or a headerless file).
HolidayCalendar load_calendar(const std::string& path, const std::string& region = "");

Weekday weekday_of_day(std::int64_t days_since_epoch);
DayCluster cluster_of_day(std::int64_t days_since_epoch, const HolidayCalendar& calendar);

/// Deterministic partition of dates into clusters.
std::map<std::int64_t, DayCluster> cluster_days(const HolidayCalendar& calendar,
                                                const std::vector<std::int64_t>& days);

} // namespace ecopf
