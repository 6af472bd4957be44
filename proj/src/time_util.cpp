#include "epimob/time_util.hpp"

#include <cstdio>

namespace epimob {

// Proleptic Gregorian day count (days since 1970-01-01).
std::int64_t days_from_civil(int y, int m, int d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe     = static_cast<unsigned>(y - era * 400);
    const unsigned doy     = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe     = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe     = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe     = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr  = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy     = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp      = (5 * doy + 2) / 153;
    d                      = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m                      = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y                      = static_cast<int>(yr + (m <= 2));
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

} // namespace

CivilDateTime civil_from_instant(Instant t)
{
    const std::int64_t days = floor_div(t, 86400);
    std::int64_t sod        = t - days * 86400;
    CivilDateTime c;
    civil_from_days(days, c.year, c.month, c.day);
    c.hour   = static_cast<int>(sod / 3600);
    c.minute = static_cast<int>((sod % 3600) / 60);
    c.second = static_cast<int>(sod % 60);
    return c;
}

Instant instant_from_civil(const CivilDateTime& c)
{
    return days_from_civil(c.year, c.month, c.day) * 86400 + c.hour * 3600 + c.minute * 60 + c.second;
}

int weekday_index(Instant t)
{
    // 1970-01-01 was a Thursday.
    const std::int64_t days = floor_div(t, 86400);
    return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

DayClass day_class_of(Instant t)
{
    return weekday_index(t) >= 5 ? DayClass::weekend : DayClass::weekday;
}

int hour_of_day(Instant t)
{
    const std::int64_t days = floor_div(t, 86400);
    return static_cast<int>((t - days * 86400) / 3600);
}

std::optional<Instant> parse_iso8601(const std::string& s)
{
    CivilDateTime c;
    char zone = '\0';
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &c.year, &c.month, &c.day, &c.hour, &c.minute,
                    &c.second, &zone) != 7)
        return std::nullopt;
    if (zone != 'Z')
        return std::nullopt;
    if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31)
        return std::nullopt;
    if (c.hour > 23 || c.minute > 59 || c.second > 59 || c.hour < 0 || c.minute < 0 || c.second < 0)
        return std::nullopt;
    return instant_from_civil(c);
}

std::string format_iso8601(Instant t)
{
    const CivilDateTime c = civil_from_instant(t);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year, c.month, c.day, c.hour, c.minute,
                  c.second);
    return buf;
}

const char* to_string(DayClass c)
{
    return c == DayClass::weekday ? "weekday" : "weekend";
}

std::optional<DayClass> day_class_from_string(const std::string& s)
{
    if (s == "weekday")
        return DayClass::weekday;
    if (s == "weekend")
        return DayClass::weekend;
    return std::nullopt;
}

} // namespace epimob
