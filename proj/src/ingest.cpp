#include "haze/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "haze/errors.hpp"
#include "haze/text.hpp"

namespace haze {

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::unique_ptr<std::istream> open_input(const std::filesystem::path& path) {
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw Error(fmt::format("cannot open {}", path.string()));
    return in;
}

std::optional<bool> parse_bool(std::string_view s) {
    const auto v = text::to_lower_ascii(text::trim(s));
    if (v == "true" || v == "1" || v == "yes" || v == "t" || v == "y") return true;
    if (v == "false" || v == "0" || v == "no" || v == "f" || v == "n") return false;
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Hotspots

HotspotLoad read_hotspots(std::istream& in, const HotspotFilter& filter, ParseMode mode,
                          const std::string& source_name) {
    HotspotLoad out;
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) return out;
    ++row;
    const auto header = text::split_csv(strip_cr(line));
    static constexpr std::string_view kCols[] = {"id", "date", "lat", "lon", "confidence", "peatland"};
    std::size_t idx[6];
    for (std::size_t c = 0; c < 6; ++c) {
        const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
            return text::iequals_ascii(text::trim(h), kCols[c]);
        });
        if (it == header.end()) {
            throw FormatError(source_name, 1, std::string(kCols[c]), "missing column in header");
        }
        idx[c] = static_cast<std::size_t>(it - header.begin());
    }
    const std::size_t width = *std::max_element(std::begin(idx), std::end(idx)) + 1;

    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(std::move(line));
        if (text::trim(line).empty()) continue;
        ++out.report.total;
        try {
            const auto f = text::split_csv(line);
            if (f.size() < width) throw FormatError(source_name, row, "", "too few columns");
            const auto col = [&](std::size_t c) { return std::string_view(f[idx[c]]); };
            FireHotspot h;
            h.id = std::string(text::trim(col(0)));
            if (h.id.empty()) throw FormatError(source_name, row, "id", "empty id");
            try {
                h.date = parse_date(col(1));
            } catch (const FormatError& e) {
                throw FormatError(source_name, row, "date", e.detail());
            }
            const auto lat = text::parse_double(col(2));
            if (!lat) throw FormatError(source_name, row, "lat", "not a number");
            const auto lon = text::parse_double(col(3));
            if (!lon) throw FormatError(source_name, row, "lon", "not a number");
            try {
                h.location = GeoPoint(*lat, *lon);
            } catch (const RangeError& e) {
                throw FormatError(source_name, row, "lat", e.what());
            }
            const auto conf = text::to_lower_ascii(text::trim(col(4)));
            if (conf == "high") {
                h.confidence = Confidence::High;
            } else if (conf == "low") {
                h.confidence = Confidence::Low;
            } else {
                throw FormatError(source_name, row, "confidence", fmt::format("expected high|low, got '{}'", conf));
            }
            const auto peat = parse_bool(col(5));
            if (!peat) throw FormatError(source_name, row, "peatland", "expected true|false");
            h.peatland = *peat;
            if (!seen.insert(h.id).second) {
                throw FormatError(source_name, row, "id", fmt::format("duplicate id '{}'", h.id));
            }

            if (filter.peatland_only && !h.peatland) continue;
            ++out.report.after_peat_filter;
            if (filter.high_confidence_only && h.confidence != Confidence::High) continue;
            ++out.report.after_confidence_filter;
            out.hotspots.push_back(std::move(h));
        } catch (const FormatError&) {
            if (mode == ParseMode::Strict) throw;
            ++out.report.malformed;
        }
    }
    return out;
}

HotspotLoad load_hotspots(const std::filesystem::path& path, const HotspotFilter& filter, ParseMode mode) {
    const auto in = open_input(path);
    return read_hotspots(*in, filter, mode, path.string());
}

std::string hotspot_csv_header() { return "id,date,lat,lon,confidence,peatland"; }

std::string format_hotspot_row(const FireHotspot& h) {
    return fmt::format("{},{},{},{},{},{}", text::quote_csv(h.id), format_date(h.date),
                       text::format_double(h.location.lat()), text::format_double(h.location.lon()),
                       h.confidence == Confidence::High ? "high" : "low", h.peatland ? "true" : "false");
}

// ---------------------------------------------------------------------------
// Posts

BoundingBox parse_bounding_box(std::string_view s) {
    const auto parts = text::split(s, ',');
    if (parts.size() != 4) throw ConfigError(fmt::format("bounding box needs 4 values, got '{}'", s));
    double v[4];
    for (int i = 0; i < 4; ++i) {
        const auto d = text::parse_double(parts[static_cast<std::size_t>(i)]);
        if (!d) throw ConfigError(fmt::format("bad bounding box value in '{}'", s));
        v[i] = *d;
    }
    if (v[0] > v[2] || v[1] > v[3]) throw ConfigError(fmt::format("empty bounding box '{}'", s));
    return {v[0], v[1], v[2], v[3]};
}

namespace {

char unescape(char c) {
    switch (c) {
        case 'n':
            return '\n';
        case 'r':
            return '\r';
        case 't':
            return '\t';
        default:
            return c;
    }
}

void escape_into(std::string& out, std::string_view s, bool escape_commas) {
    for (char c : s) {
        switch (c) {
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            case '\r':
                out += "\\r";
                break;
            case '\t':
                out += "\\t";
                break;
            case ',':
                if (escape_commas) out += '\\';
                out += ',';
                break;
            default:
                out += c;
        }
    }
}

}  // namespace

GeoPost parse_post_record(std::string_view line) {
    static constexpr const char* kNames[] = {"id", "user_id", "timestamp", "lat", "lon", "source", "text"};
    std::string fields[7];
    std::size_t field = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '\\' && i + 1 < line.size()) {
            const char n = line[++i];
            if (n == 'n' || n == 'r' || n == 't' || n == '\\' || n == ',') {
                fields[field] += unescape(n);
            } else {
                fields[field] += '\\';
                fields[field] += n;
            }
        } else if (c == ',' && field < 6) {
            ++field;
        } else {
            fields[field] += c;
        }
    }
    if (field < 6) throw FormatError("", 0, kNames[field + 1], "missing field");
    GeoPost p;
    p.id = std::string(text::trim(fields[0]));
    if (p.id.empty()) throw FormatError("", 0, "id", "empty id");
    p.user_id = std::string(text::trim(fields[1]));
    if (p.user_id.empty()) throw FormatError("", 0, "user_id", "empty user id");
    try {
        p.timestamp = parse_instant(fields[2]);
    } catch (const FormatError& e) {
        throw FormatError("", 0, "timestamp", e.detail());
    }
    const auto lat = text::parse_double(fields[3]);
    if (!lat) throw FormatError("", 0, "lat", "not a number");
    const auto lon = text::parse_double(fields[4]);
    if (!lon) throw FormatError("", 0, "lon", "not a number");
    try {
        p.location = GeoPoint(*lat, *lon);
    } catch (const RangeError& e) {
        throw FormatError("", 0, *lat < -90.0 || *lat > 90.0 ? "lat" : "lon", e.what());
    }
    p.source = std::move(fields[5]);
    p.text = std::move(fields[6]);
    return p;
}

std::string format_post_record(const GeoPost& p) {
    std::string out;
    out.reserve(64 + p.text.size());
    escape_into(out, p.id, true);
    out += ',';
    escape_into(out, p.user_id, true);
    out += ',';
    out += format_instant(p.timestamp);
    out += ',';
    out += text::format_double(p.location.lat());
    out += ',';
    out += text::format_double(p.location.lon());
    out += ',';
    escape_into(out, p.source, true);
    out += ',';
    escape_into(out, p.text, false);
    return out;
}

PostReader::PostReader(const std::filesystem::path& path, ParseMode mode, std::optional<BoundingBox> bbox)
    : owned_(open_input(path)), in_(owned_.get()), source_(path.string()), mode_(mode), bbox_(bbox) {}

PostReader::PostReader(std::istream& in, std::string source_name, ParseMode mode,
                       std::optional<BoundingBox> bbox)
    : in_(&in), source_(std::move(source_name)), mode_(mode), bbox_(bbox) {}

PostReader::~PostReader() = default;
PostReader::PostReader(PostReader&&) noexcept = default;
PostReader& PostReader::operator=(PostReader&&) noexcept = default;

std::optional<GeoPost> PostReader::next() {
    while (std::getline(*in_, line_)) {
        ++line_no_;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        if (line_no_ == 1 && line_ == kPostHeader) continue;
        ++report_.total;
        GeoPost post;
        try {
            if (text::trim(line_).empty()) throw FormatError("", 0, "", "blank record");
            post = parse_post_record(line_);
        } catch (const FormatError& e) {
            if (mode_ == ParseMode::Strict) {
                throw FormatError(source_, line_no_, e.column(), e.detail());
            }
            ++report_.malformed;
            continue;
        }
        if (bbox_ && !bbox_->contains(post.location)) {
            ++report_.out_of_bbox;
            continue;
        }
        ++report_.accepted;
        return post;
    }
    return std::nullopt;
}

PostLoad load_posts(const std::filesystem::path& path, ParseMode mode, std::optional<BoundingBox> bbox) {
    PostReader reader(path, mode, bbox);
    PostLoad out;
    while (auto p = reader.next()) out.posts.push_back(std::move(*p));
    out.report = reader.report();
    return out;
}

// ---------------------------------------------------------------------------
// Geometry

namespace {

double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
    return (a.lon() - o.lon()) * (b.lat() - o.lat()) - (a.lat() - o.lat()) * (b.lon() - o.lon());
}

bool on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
    return std::min(a.lon(), b.lon()) <= p.lon() && p.lon() <= std::max(a.lon(), b.lon()) &&
           std::min(a.lat(), b.lat()) <= p.lat() && p.lat() <= std::max(a.lat(), b.lat());
}

int sign(double v) { return (v > 0) - (v < 0); }

bool segments_intersect(const GeoPoint& p1, const GeoPoint& p2, const GeoPoint& q1, const GeoPoint& q2) {
    const int d1 = sign(cross(q1, q2, p1));
    const int d2 = sign(cross(q1, q2, p2));
    const int d3 = sign(cross(p1, p2, q1));
    const int d4 = sign(cross(p1, p2, q2));
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(p1, q1, q2)) return true;
    if (d2 == 0 && on_segment(p2, q1, q2)) return true;
    if (d3 == 0 && on_segment(q1, p1, p2)) return true;
    if (d4 == 0 && on_segment(q2, p1, p2)) return true;
    return false;
}

}  // namespace

Polygon::Polygon(std::vector<GeoPoint> ring) {
    // Drop consecutive duplicates, then close.
    std::vector<GeoPoint> pts;
    for (const auto& p : ring) {
        if (pts.empty() || !(pts.back() == p)) pts.push_back(p);
    }
    if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
    if (pts.size() < 3) throw GeometryError("polygon needs at least 3 distinct vertices");
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a1 = pts[i];
        const auto& a2 = pts[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const auto& b1 = pts[j];
            const auto& b2 = pts[(j + 1) % n];
            if (adjacent) {
                // Adjacent edges may only share their common vertex: reject folding back onto each other.
                const auto& shared = (j == i + 1) ? a2 : a1;
                const auto& other_a = (j == i + 1) ? a1 : a2;
                const auto& other_b = (j == i + 1) ? b2 : b1;
                if (sign(cross(shared, other_a, other_b)) == 0 &&
                    (on_segment(other_a, shared, other_b) || on_segment(other_b, shared, other_a))) {
                    throw GeometryError(fmt::format("polygon edges {} and {} overlap", i, j));
                }
                continue;
            }
            if (segments_intersect(a1, a2, b1, b2)) {
                throw GeometryError(fmt::format("polygon self-intersects at edges {} and {}", i, j));
            }
        }
    }
    pts.push_back(pts.front());
    ring_ = std::move(pts);
    bounds_ = {90.0, 180.0, -90.0, -180.0};
    for (const auto& p : ring_) {
        bounds_.min_lat = std::min(bounds_.min_lat, p.lat());
        bounds_.max_lat = std::max(bounds_.max_lat, p.lat());
        bounds_.min_lon = std::min(bounds_.min_lon, p.lon());
        bounds_.max_lon = std::max(bounds_.max_lon, p.lon());
    }
}

bool Polygon::contains(const GeoPoint& p) const {
    if (ring_.empty() || !bounds_.contains(p)) return false;
    const double x = p.lon();
    const double y = p.lat();
    bool inside = false;
    for (std::size_t i = 0, n = ring_.size() - 1; i < n; ++i) {
        const auto& a = ring_[i];
        const auto& b = ring_[i + 1];
        if (cross(a, b, p) == 0.0 && on_segment(p, a, b)) return true;
        if ((a.lat() > y) != (b.lat() > y)) {
            const double xi = a.lon() + (y - a.lat()) * (b.lon() - a.lon()) / (b.lat() - a.lat());
            if (x < xi) inside = !inside;
        }
    }
    return inside;
}

std::optional<RegionHit> assign_region(const GeoPoint& p, std::span<const RegionDef> regions) {
    std::optional<RegionHit> hit;
    for (const auto& r : regions) {
        if (!r.polygon.contains(p)) continue;
        if (hit) {
            hit->ambiguous = true;
            break;
        }
        hit = RegionHit{&r, nullptr, false};
        for (const auto& s : r.subdistricts) {
            if (s.polygon.contains(p)) {
                hit->subdistrict = &s;
                break;
            }
        }
    }
    return hit;
}

namespace {

struct RingBuilder {
    std::string code;
    std::string province;
    std::string subdistrict;
    std::vector<GeoPoint> ring;
};

std::vector<RegionDef> assemble(std::vector<RingBuilder> rings, const std::string& source_name) {
    std::vector<RegionDef> out;
    for (auto& r : rings) {
        if (!r.subdistrict.empty()) continue;
        if (std::any_of(out.begin(), out.end(), [&](const RegionDef& d) { return d.code == r.code; })) {
            throw DuplicateKey(fmt::format("{}: region {} defined twice", source_name, r.code));
        }
        try {
            out.push_back(RegionDef{r.code, r.province, Polygon(std::move(r.ring)), {}});
        } catch (const GeometryError& e) {
            throw GeometryError(fmt::format("{}: region {}: {}", source_name, r.code, e.what()));
        }
    }
    for (auto& r : rings) {
        if (r.subdistrict.empty()) continue;
        auto it = std::find_if(out.begin(), out.end(), [&](const RegionDef& d) { return d.code == r.code; });
        if (it == out.end()) {
            throw GeometryError(
                fmt::format("{}: sub-district '{}' refers to unknown region {}", source_name, r.subdistrict, r.code));
        }
        if (std::any_of(it->subdistricts.begin(), it->subdistricts.end(),
                        [&](const Subdistrict& s) { return s.name == r.subdistrict; })) {
            throw DuplicateKey(
                fmt::format("{}: sub-district '{}' of {} defined twice", source_name, r.subdistrict, r.code));
        }
        try {
            it->subdistricts.push_back(Subdistrict{r.subdistrict, Polygon(std::move(r.ring))});
        } catch (const GeometryError& e) {
            throw GeometryError(fmt::format("{}: sub-district {}/{}: {}", source_name, r.code, r.subdistrict, e.what()));
        }
    }
    return out;
}

}  // namespace

std::vector<RegionDef> parse_region_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) return {};
    ++row;
    const auto header = text::split_csv(strip_cr(line));
    static constexpr std::string_view kCols[] = {"code", "province", "subdistrict", "lat", "lon"};
    std::size_t idx[5];
    for (std::size_t c = 0; c < 5; ++c) {
        const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) {
            return text::iequals_ascii(text::trim(h), kCols[c]);
        });
        if (it == header.end()) throw FormatError(source_name, 1, std::string(kCols[c]), "missing column in header");
        idx[c] = static_cast<std::size_t>(it - header.begin());
    }
    std::vector<RingBuilder> rings;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(std::move(line));
        if (text::trim(line).empty()) continue;
        const auto f = text::split_csv(line);
        if (f.size() < header.size()) throw FormatError(source_name, row, "", "too few columns");
        const auto code = std::string(text::trim(f[idx[0]]));
        const auto province = std::string(text::trim(f[idx[1]]));
        const auto sub = std::string(text::trim(f[idx[2]]));
        if (code.empty()) throw FormatError(source_name, row, "code", "empty region code");
        const auto lat = text::parse_double(f[idx[3]]);
        const auto lon = text::parse_double(f[idx[4]]);
        if (!lat) throw FormatError(source_name, row, "lat", "not a number");
        if (!lon) throw FormatError(source_name, row, "lon", "not a number");
        GeoPoint p;
        try {
            p = GeoPoint(*lat, *lon);
        } catch (const RangeError& e) {
            throw FormatError(source_name, row, "lat", e.what());
        }
        if (rings.empty() || rings.back().code != code || rings.back().subdistrict != sub) {
            const bool seen = std::any_of(rings.begin(), rings.end(), [&](const RingBuilder& r) {
                return r.code == code && r.subdistrict == sub;
            });
            if (seen) throw FormatError(source_name, row, "code", "ring rows must be contiguous");
            rings.push_back(RingBuilder{code, province, sub, {}});
        }
        rings.back().ring.push_back(p);
    }
    return assemble(std::move(rings), source_name);
}

std::vector<RegionDef> parse_region_geojson(std::string_view json_text, const std::string& source_name) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(source_name, 0, "", e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
        throw FormatError(source_name, 0, "", "expected a GeoJSON FeatureCollection");
    }
    std::vector<RingBuilder> rings;
    std::size_t n = 0;
    for (const auto& feat : doc["features"]) {
        ++n;
        const auto where = fmt::format("feature {}", n);
        const auto& props = feat.contains("properties") ? feat["properties"] : json::object();
        if (!props.is_object() || !props.contains("postal_code")) {
            throw FormatError(source_name, n, "postal_code", "feature lacks postal_code");
        }
        const auto& pc = props["postal_code"];
        const std::string code = pc.is_string() ? pc.get<std::string>() : pc.dump();
        const std::string province = props.contains("province") && props["province"].is_string()
                                         ? props["province"].get<std::string>()
                                         : std::string{};
        const std::string sub = props.contains("subdistrict") && props["subdistrict"].is_string()
                                    ? props["subdistrict"].get<std::string>()
                                    : std::string{};
        const auto& geom = feat.contains("geometry") ? feat["geometry"] : json();
        if (!geom.is_object() || geom.value("type", "") != "Polygon" || !geom.contains("coordinates") ||
            geom["coordinates"].empty()) {
            throw FormatError(source_name, n, "geometry", where + ": only Polygon geometries are supported");
        }
        RingBuilder rb{code, province, sub, {}};
        for (const auto& c : geom["coordinates"][0]) {
            if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
                throw FormatError(source_name, n, "geometry", where + ": bad coordinate");
            }
            try {
                rb.ring.emplace_back(c[1].get<double>(), c[0].get<double>());
            } catch (const RangeError& e) {
                throw FormatError(source_name, n, "geometry", e.what());
            }
        }
        rings.push_back(std::move(rb));
    }
    return assemble(std::move(rings), source_name);
}

std::vector<RegionDef> load_regions(const std::filesystem::path& path) {
    const auto in = open_input(path);
    std::stringstream buf;
    buf << in->rdbuf();
    const std::string content = buf.str();
    const auto first = content.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && content[first] == '{') return parse_region_geojson(content, path.string());
    std::istringstream is(content);
    return parse_region_csv(is, path.string());
}

std::string format_region_csv(std::span<const RegionDef> regions) {
    std::string out = "code,province,subdistrict,lat,lon\n";
    const auto emit = [&](const RegionDef& r, const std::string& sub, const Polygon& poly) {
        const auto& ring = poly.ring();
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            out += fmt::format("{},{},{},{},{}\n", text::quote_csv(r.code), text::quote_csv(r.province),
                               text::quote_csv(sub), text::format_double(ring[i].lat()),
                               text::format_double(ring[i].lon()));
        }
    };
    for (const auto& r : regions) {
        emit(r, "", r.polygon);
        for (const auto& s : r.subdistricts) emit(r, s.name, s.polygon);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Air quality

std::string_view to_code(AirQuality q) {
    switch (q) {
        case AirQuality::Green:
            return "G";
        case AirQuality::Blue:
            return "BL";
        case AirQuality::Yellow:
            return "Y";
        case AirQuality::Red:
            return "R";
        case AirQuality::Black:
            return "B";
        case AirQuality::Missing:
            break;
    }
    return "-";
}

AirQuality parse_air_quality(std::string_view s) {
    s = text::trim(s);
    const auto v = text::to_lower_ascii(s);
    if (v.empty() || v == "-" || v == "_" || s == "\xE2\x80\x93" || s == "\xE2\x80\x94" || v == "missing") {
        return AirQuality::Missing;
    }
    if (v == "g" || v == "green") return AirQuality::Green;
    if (v == "bl" || v == "blue") return AirQuality::Blue;
    if (v == "y" || v == "yellow") return AirQuality::Yellow;
    if (v == "r" || v == "red") return AirQuality::Red;
    if (v == "b" || v == "black") return AirQuality::Black;
    throw FormatError("", 0, "class", fmt::format("unknown air-quality class '{}'", s));
}

std::optional<int> severity(AirQuality q) {
    if (q == AirQuality::Missing) return std::nullopt;
    return static_cast<int>(q);
}

void AirQualityTable::insert(const std::string& code, Date date, AirQuality q) {
    if (!cells_.emplace(std::make_pair(code, date), q).second) {
        throw DuplicateKey(fmt::format("duplicate air-quality record for ({}, {})", code, format_date(date)));
    }
}

AirQuality AirQualityTable::at(const std::string& code, Date date) const {
    const auto it = cells_.find({code, date});
    return it == cells_.end() ? AirQuality::Missing : it->second;
}

AirQualityTable read_air_quality(std::istream& in, const std::string& source_name) {
    AirQualityTable table;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        line = strip_cr(std::move(line));
        if (text::trim(line).empty()) continue;
        const auto f = text::split_csv(line);
        if (row == 1 && !f.empty() && text::iequals_ascii(text::trim(f[0]), "region_code")) continue;
        if (f.size() < 2 || f.size() > 3) throw FormatError(source_name, row, "", "expected region_code,date,class");
        const auto code = std::string(text::trim(f[0]));
        if (code.empty()) throw FormatError(source_name, row, "region_code", "empty region code");
        Date date;
        try {
            date = parse_date(f[1]);
        } catch (const FormatError& e) {
            throw FormatError(source_name, row, "date", e.detail());
        }
        AirQuality q = AirQuality::Missing;
        if (f.size() == 3) {
            try {
                q = parse_air_quality(f[2]);
            } catch (const FormatError& e) {
                throw FormatError(source_name, row, "class", e.detail());
            }
        }
        try {
            table.insert(code, date, q);
        } catch (const DuplicateKey& e) {
            throw DuplicateKey(fmt::format("{}: row {}: {}", source_name, row, e.what()));
        }
    }
    return table;
}

AirQualityTable load_air_quality(const std::filesystem::path& path) {
    const auto in = open_input(path);
    return read_air_quality(*in, path.string());
}

}  // namespace haze
