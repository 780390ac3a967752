#include "haze/model.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "haze/errors.hpp"
#include "haze/text.hpp"

namespace haze {

using namespace std::chrono;

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
        lon > 180.0) {
        throw RangeError(fmt::format("coordinate out of range: lat={} lon={}", lat, lon));
    }
}

std::string to_string(const IsoWeek& w) { return fmt::format("{:04d}-W{:02d}", w.year, w.week); }

IsoWeek parse_iso_week(std::string_view s) {
    s = text::trim(s);
    const auto pos = s.find("-W");
    if (pos == std::string_view::npos) throw ConfigError(fmt::format("bad ISO week '{}'", s));
    const auto y = text::parse_int(s.substr(0, pos));
    const auto w = text::parse_int(s.substr(pos + 2));
    if (!y || !w || *w < 1 || *w > 53) throw ConfigError(fmt::format("bad ISO week '{}'", s));
    const IsoWeek out{static_cast<int>(*y), static_cast<unsigned>(*w)};
    if (iso_week(iso_week_monday(out)) != out) {
        throw ConfigError(fmt::format("ISO week '{}' does not exist", s));
    }
    return out;
}

IsoWeek iso_week(Date d) {
    const unsigned wd = weekday{d}.iso_encoding();  // Mon=1 .. Sun=7
    const Date thursday = d + days{4 - static_cast<int>(wd)};
    const year y = year_month_day{thursday}.year();
    const Date jan1 = sys_days{y / January / 1};
    const auto week = static_cast<unsigned>((thursday - jan1).count() / 7 + 1);
    return {static_cast<int>(y), week};
}

Date iso_week_monday(IsoWeek w) {
    const Date jan4 = sys_days{year{w.year} / January / 4};
    const unsigned wd = weekday{jan4}.iso_encoding();
    return jan4 - days{wd - 1} + days{7 * (static_cast<int>(w.week) - 1)};
}

Date LocalCalendar::local_day(Instant t) const {
    return floor<days>(t + minutes{utc_offset_minutes});
}

IsoWeek LocalCalendar::local_week(Instant t) const { return iso_week(local_day(t)); }

std::string_view to_string(DistanceMode m) {
    return m == DistanceMode::Haversine ? "haversine" : "euclid-degrees";
}

DistanceMode parse_distance_mode(std::string_view s) {
    if (s == "haversine") return DistanceMode::Haversine;
    if (s == "euclid-degrees") return DistanceMode::EuclidDegrees;
    throw ConfigError(fmt::format("unknown distance mode '{}'", s));
}

double great_circle_km(const GeoPoint& a, const GeoPoint& b) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (b.lat() - a.lat()) * rad;
    const double dlon = (b.lon() - a.lon()) * rad;
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    double h = s1 * s1 + std::cos(a.lat() * rad) * std::cos(b.lat() * rad) * s2 * s2;
    if (h > 1.0) h = 1.0;
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double euclid_degrees(const GeoPoint& a, const GeoPoint& b) {
    return std::hypot(a.lat() - b.lat(), a.lon() - b.lon());
}

double distance(const GeoPoint& a, const GeoPoint& b, DistanceMode mode) {
    return mode == DistanceMode::Haversine ? great_circle_km(a, b) : euclid_degrees(a, b);
}

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n, std::string_view whole) {
    if (pos + n > s.size()) throw FormatError("", 0, "", fmt::format("truncated date/time '{}'", whole));
    int v = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (s[i] < '0' || s[i] > '9') {
            throw FormatError("", 0, "", fmt::format("bad digit in '{}'", whole));
        }
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

Date checked_date(int y, int m, int d, std::string_view whole) {
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) throw FormatError("", 0, "", fmt::format("invalid calendar date '{}'", whole));
    return sys_days{ymd};
}

}  // namespace

Date parse_date(std::string_view s) {
    const auto whole = s;
    s = text::trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw FormatError("", 0, "", fmt::format("expected YYYY-MM-DD, got '{}'", whole));
    }
    return checked_date(digits(s, 0, 4, whole), digits(s, 5, 2, whole), digits(s, 8, 2, whole), whole);
}

std::string format_date(Date d) {
    const year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

Instant parse_instant(std::string_view s) {
    const auto whole = s;
    s = text::trim(s);
    if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ')) {
        throw FormatError("", 0, "", fmt::format("expected ISO-8601 timestamp, got '{}'", whole));
    }
    const Date d = parse_date(s.substr(0, 10));
    const int hh = digits(s, 11, 2, whole);
    if (s[13] != ':') throw FormatError("", 0, "", fmt::format("bad time in '{}'", whole));
    const int mm = digits(s, 14, 2, whole);
    int ss = 0;
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        ss = digits(s, pos + 1, 2, whole);
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) throw FormatError("", 0, "", fmt::format("bad time in '{}'", whole));
    if (pos >= s.size()) throw FormatError("", 0, "", fmt::format("timestamp '{}' lacks a UTC offset", whole));
    int offset_min = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const int sign = s[pos] == '-' ? -1 : 1;
        const int oh = digits(s, pos + 1, 2, whole);
        pos += 3;
        if (pos < s.size() && s[pos] == ':') ++pos;
        const int om = digits(s, pos, 2, whole);
        pos += 2;
        offset_min = sign * (oh * 60 + om);
    } else {
        throw FormatError("", 0, "", fmt::format("bad UTC offset in '{}'", whole));
    }
    if (pos != s.size()) throw FormatError("", 0, "", fmt::format("trailing characters in '{}'", whole));
    return Instant{d} + hours{hh} + minutes{mm} + seconds{ss} - minutes{offset_min};
}

std::string format_instant(Instant t) {
    const Date d = floor<days>(t);
    const auto tod = hh_mm_ss<seconds>{t - d};
    return fmt::format("{}T{:02d}:{:02d}:{:02d}Z", format_date(d), tod.hours().count(),
                       tod.minutes().count(), tod.seconds().count());
}

}  // namespace haze
