#include "vrclass/dates.hpp"

#include <charconv>
#include <cstdio>

namespace vrclass {

namespace chr = std::chrono;

long long days_inclusive(const DateRange& range) {
    const auto span = (chr::sys_days{range.end} - chr::sys_days{range.start}).count();
    return span < 0 ? 0 : span + 1;
}

bool overlaps(Date first, Date last, const DateRange& range) {
    return chr::sys_days{first} <= chr::sys_days{range.end} && chr::sys_days{last} >= chr::sys_days{range.start};
}

std::optional<Date> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int value = 0;
        const char* first = text.data() + pos;
        const char* last = first + len;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last) {
            return std::nullopt;
        }
        return value;
    };
    const auto y = field(0, 4);
    const auto m = field(5, 2);
    const auto d = field(8, 2);
    if (!y || !m || !d) {
        return std::nullopt;
    }
    const Date date{chr::year{*y}, chr::month{static_cast<unsigned>(*m)}, chr::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

std::string format_iso_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::string format_year_month(chr::year_month ym) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u", static_cast<int>(ym.year()), static_cast<unsigned>(ym.month()));
    return buf;
}

}  // namespace vrclass
