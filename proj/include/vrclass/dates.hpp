#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace vrclass {

using Date = std::chrono::year_month_day;

/// Closed calendar interval [start, end].
struct DateRange {
    Date start;
    Date end;

    bool operator==(const DateRange&) const = default;
};

// First recorded UK case through the lifting of restrictions.
inline constexpr Date kStudyStart{std::chrono::year{2020}, std::chrono::month{1}, std::chrono::day{30}};
inline constexpr Date kStudyEnd{std::chrono::year{2021}, std::chrono::month{7}, std::chrono::day{19}};

/// Inclusive day count of the study window, checked against calendar enumeration in tests.
inline constexpr int kStudyWindowDays = 537;

inline constexpr DateRange study_window() { return {kStudyStart, kStudyEnd}; }

/// Number of calendar days in the range, counting both ends. Zero if end < start.
long long days_inclusive(const DateRange& range);

/// True when [first, last] shares at least one day with the range.
bool overlaps(Date first, Date last, const DateRange& range);

/// Strict YYYY-MM-DD parser; rejects impossible dates such as 2021-02-29.
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_iso_date(Date date);

/// "YYYY-MM"
std::string format_year_month(std::chrono::year_month ym);

}  // namespace vrclass
