#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "haze/model.hpp"

namespace haze {

enum class ParseMode { Lenient, Strict };

// ---------------------------------------------------------------------------
// Hotspots: CSV with header id,date,lat,lon,confidence,peatland

struct HotspotFilter {
    bool peatland_only = true;
    bool high_confidence_only = true;
};

struct HotspotReport {
    std::size_t total = 0;  // data rows, malformed included
    std::size_t malformed = 0;
    std::size_t after_peat_filter = 0;
    std::size_t after_confidence_filter = 0;
};

struct HotspotLoad {
    std::vector<FireHotspot> hotspots;
    HotspotReport report;
};

HotspotLoad read_hotspots(std::istream& in, const HotspotFilter& filter, ParseMode mode,
                          const std::string& source_name = "hotspots");
HotspotLoad load_hotspots(const std::filesystem::path& path, const HotspotFilter& filter,
                          ParseMode mode = ParseMode::Lenient);

std::string hotspot_csv_header();
std::string format_hotspot_row(const FireHotspot& h);

// ---------------------------------------------------------------------------
// Posts: one record per line, `id,user_id,timestamp,lat,lon,source,text`.
// The text field runs to the end of the line. Backslash escapes: `\n`, `\r`,
// `\t`, `\\`, and `\,` (needed only for commas in the first six fields).

struct BoundingBox {
    double min_lat = -90.0;
    double min_lon = -180.0;
    double max_lat = 90.0;
    double max_lon = 180.0;

    bool contains(const GeoPoint& p) const noexcept {
        return p.lat() >= min_lat && p.lat() <= max_lat && p.lon() >= min_lon && p.lon() <= max_lon;
    }
};

BoundingBox parse_bounding_box(std::string_view text);  // "min_lat,min_lon,max_lat,max_lon"

struct PostReport {
    std::size_t total = 0;  // record lines read (an optional header line is not counted)
    std::size_t malformed = 0;
    std::size_t out_of_bbox = 0;
    std::size_t accepted = 0;

    double malformed_fraction() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(malformed) / static_cast<double>(total);
    }
};

/// Streaming post reader; holds one line at a time.
class PostReader {
public:
    explicit PostReader(const std::filesystem::path& path, ParseMode mode = ParseMode::Lenient,
                        std::optional<BoundingBox> bbox = std::nullopt);
    PostReader(std::istream& in, std::string source_name, ParseMode mode = ParseMode::Lenient,
               std::optional<BoundingBox> bbox = std::nullopt);
    ~PostReader();
    PostReader(PostReader&&) noexcept;
    PostReader& operator=(PostReader&&) noexcept;

    /// Next accepted post, or nullopt at end of input. Strict mode throws FormatError on a bad record.
    std::optional<GeoPost> next();
    const PostReport& report() const noexcept { return report_; }

private:
    std::unique_ptr<std::istream> owned_;
    std::istream* in_ = nullptr;
    std::string source_;
    ParseMode mode_;
    std::optional<BoundingBox> bbox_;
    PostReport report_;
    std::size_t line_no_ = 0;
    std::string line_;
};

struct PostLoad {
    std::vector<GeoPost> posts;
    PostReport report;
};

PostLoad load_posts(const std::filesystem::path& path, ParseMode mode = ParseMode::Lenient,
                    std::optional<BoundingBox> bbox = std::nullopt);

/// Parses one record line. Throws FormatError (row left 0) on bad input.
GeoPost parse_post_record(std::string_view line);
std::string format_post_record(const GeoPost& post);
inline constexpr std::string_view kPostHeader = "id,user_id,timestamp,lat,lon,source,text";

// ---------------------------------------------------------------------------
// Region geometry

/// Closed planar ring over (lon, lat).
class Polygon {
public:
    Polygon() = default;
    /// Closes the ring if needed and validates it; throws GeometryError.
    explicit Polygon(std::vector<GeoPoint> ring);

    const std::vector<GeoPoint>& ring() const noexcept { return ring_; }
    /// Even-odd ray casting; points on an edge or vertex count as inside.
    bool contains(const GeoPoint& p) const;
    BoundingBox bounds() const noexcept { return bounds_; }

private:
    std::vector<GeoPoint> ring_;
    BoundingBox bounds_;
};

struct Subdistrict {
    std::string name;
    Polygon polygon;
};

struct RegionDef {
    std::string code;  // 4-digit postal prefix, e.g. "1471"
    std::string province;
    Polygon polygon;
    std::vector<Subdistrict> subdistricts;
};

struct RegionHit {
    const RegionDef* region = nullptr;
    const Subdistrict* subdistrict = nullptr;  // null when the region has none containing the point
    bool ambiguous = false;                    // another region also contains the point
};

/// First region in file order that contains p.
std::optional<RegionHit> assign_region(const GeoPoint& p, std::span<const RegionDef> regions);

/// Native CSV (`code,province,subdistrict,lat,lon`, rows in ring order, empty subdistrict
/// for the region outline) or a GeoJSON FeatureCollection with a `postal_code` property.
std::vector<RegionDef> load_regions(const std::filesystem::path& path);
std::vector<RegionDef> parse_region_csv(std::istream& in, const std::string& source_name = "regions");
std::vector<RegionDef> parse_region_geojson(std::string_view json, const std::string& source_name = "regions");
std::string format_region_csv(std::span<const RegionDef> regions);

// ---------------------------------------------------------------------------
// Air quality

/// Ordered best to worst; Missing sits outside the order.
enum class AirQuality { Green, Blue, Yellow, Red, Black, Missing };

std::string_view to_code(AirQuality q);  // G, BL, Y, R, B, -
AirQuality parse_air_quality(std::string_view text);
std::optional<int> severity(AirQuality q);

class AirQualityTable {
public:
    /// Throws DuplicateKey when (code, date) is already present.
    void insert(const std::string& region_code, Date date, AirQuality q);
    /// Missing when no record exists.
    AirQuality at(const std::string& region_code, Date date) const;
    std::size_t size() const noexcept { return cells_.size(); }
    const std::map<std::pair<std::string, Date>, AirQuality>& cells() const noexcept { return cells_; }

private:
    std::map<std::pair<std::string, Date>, AirQuality> cells_;
};

AirQualityTable read_air_quality(std::istream& in, const std::string& source_name = "air-quality");
AirQualityTable load_air_quality(const std::filesystem::path& path);

}  // namespace haze
