#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace haze {

using Date = std::chrono::sys_days;
using Instant = std::chrono::sys_seconds;

inline constexpr double kEarthRadiusKm = 6371.0088;

/// A WGS84 position in decimal degrees. Construction rejects out-of-range values.
class GeoPoint {
public:
    GeoPoint() = default;
    GeoPoint(double lat, double lon);

    double lat() const noexcept { return lat_; }
    double lon() const noexcept { return lon_; }

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_ = 0.0;
    double lon_ = 0.0;
};

enum class Confidence { High, Low };

struct GeoPost {
    std::string id;
    std::string user_id;
    Instant timestamp;
    GeoPoint location;
    std::string text;
    std::string source;
};

struct FireHotspot {
    std::string id;
    Date date;
    GeoPoint location;
    Confidence confidence = Confidence::High;
    bool peatland = false;
};

struct IsoWeek {
    int year = 0;
    unsigned week = 0;

    friend auto operator<=>(const IsoWeek&, const IsoWeek&) = default;
};

std::string to_string(const IsoWeek& w);  // "2014-W11"
IsoWeek parse_iso_week(std::string_view text);

IsoWeek iso_week(Date d);
Date iso_week_monday(IsoWeek w);

/// Local-time bucketing of instants. The offset is fixed (no DST), in minutes east of UTC.
struct LocalCalendar {
    int utc_offset_minutes = 420;

    Date local_day(Instant t) const;
    IsoWeek local_week(Instant t) const;
};

enum class DistanceMode { Haversine, EuclidDegrees };

std::string_view to_string(DistanceMode m);
DistanceMode parse_distance_mode(std::string_view text);

double great_circle_km(const GeoPoint& a, const GeoPoint& b);
// Planar distance on raw degrees; literal reading of "Euclidean distance".
double euclid_degrees(const GeoPoint& a, const GeoPoint& b);
double distance(const GeoPoint& a, const GeoPoint& b, DistanceMode mode);

// ISO-8601 parsing/formatting. Timestamps accept "Z" or "+HH:MM"/"-HH:MM" offsets and optional seconds.
Date parse_date(std::string_view text);
std::string format_date(Date d);
Instant parse_instant(std::string_view text);
std::string format_instant(Instant t);  // always UTC with "Z"

}  // namespace haze
