#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace epimob {

// Seconds since the Unix epoch, second resolution. Timestamps are treated as
// dataset-local clock time; the reference deployment (Ivory Coast) is UTC+0.
using Instant = std::int64_t;

enum class DayClass { weekday, weekend };

struct CivilDateTime {
    int year   = 1970;
    int month  = 1;  // 1..12
    int day    = 1;  // 1..31
    int hour   = 0;
    int minute = 0;
    int second = 0;
};

std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t z, int& y, int& m, int& d);

CivilDateTime civil_from_instant(Instant t);
Instant instant_from_civil(const CivilDateTime& c);

// 0 = Monday .. 6 = Sunday.
int weekday_index(Instant t);
DayClass day_class_of(Instant t);
int hour_of_day(Instant t);

// Accepts `YYYY-MM-DDTHH:MM:SSZ`.
std::optional<Instant> parse_iso8601(const std::string& s);
std::string format_iso8601(Instant t);

const char* to_string(DayClass c);
std::optional<DayClass> day_class_from_string(const std::string& s);

} // namespace epimob
