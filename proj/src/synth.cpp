#include "haze/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "haze/errors.hpp"
#include "haze/random.hpp"
#include "haze/text.hpp"

namespace haze::synth {

using json = nlohmann::ordered_json;

namespace {

constexpr double kKmPerDegree = kEarthRadiusKm * std::numbers::pi / 180.0;

constexpr std::string_view kGeneral[] = {
    "kabut asap tebal sekali pagi ini",
    "titik api makin banyak di sekitar sini",
    "awas asap pekat di jalan lintas",
    "haze lagi hari ini di kota",
};
constexpr std::string_view kHashtag[] = {
    "semoga cepat berlalu #prayforriau",
    "ayo bersama #melawanasap",
    "#saveriau dari kita untuk kita",
};
constexpr std::string_view kImpact[] = {
    "jarak pandang cuma seratus meter",
    "penerbangan tertunda lagi hari ini",
    "sekolah diliburkan mulai besok",
};
constexpr std::string_view kHealth[] = {
    "batuk terus dari kemarin",
    "jangan lupa pakai masker kalau keluar",
    "mata perih sekali dari tadi",
};
constexpr std::string_view kBackground[] = {
    "lagi makan siang sama teman",
    "selamat pagi semua",
    "nonton bola malam ini",
    "hujan turun sore ini",
    "kerja lembur lagi",
    "macet di simpang tiga",
    "ngopi dulu biar semangat",
    "akhir pekan ke pantai",
};
constexpr std::string_view kHomeSentence = "akhirnya sampai di rumah";
constexpr std::string_view kEvacuationSentence = "keluarga mau ngungsi ke padang";

struct Source {
    std::string_view name;
    double weight;
};
constexpr Source kSources[] = {
    {"Twitter for Android", 0.45},
    {"Twitter for iPhone", 0.30},
    {"Twitter Web Client", 0.10},
    {"Foursquare", 0.15},
};

std::string_view pick_source(Rng& rng) {
    double u = rng.uniform01();
    for (const auto& s : kSources) {
        if (u < s.weight) return s.name;
        u -= s.weight;
    }
    return kSources[0].name;
}

int class_index(char c) {
    switch (c) {
        case 'N':
            return 0;
        case 'H':
            return 1;
        case 'S':
            return 2;
    }
    throw ConfigError(fmt::format("week pattern letter '{}' is not one of N, H, S", c));
}

struct Rect {
    double lat0, lon0, lat1, lon1;

    GeoPoint sample(Rng& rng, double margin_lat = 0.0, double margin_lon = 0.0) const {
        return GeoPoint(rng.uniform(lat0 + margin_lat, lat1 - margin_lat), rng.uniform(lon0 + margin_lon, lon1 - margin_lon));
    }
    GeoPoint center() const { return GeoPoint((lat0 + lat1) / 2.0, (lon0 + lon1) / 2.0); }
};

Polygon rect_polygon(const Rect& r) {
    return Polygon({GeoPoint(r.lat0, r.lon0), GeoPoint(r.lat0, r.lon1), GeoPoint(r.lat1, r.lon1),
                    GeoPoint(r.lat1, r.lon0)});
}

GeoPoint offset_km(const GeoPoint& c, double north_km, double east_km) {
    const double lat = c.lat() + north_km / kKmPerDegree;
    const double lon = c.lon() + east_km / (kKmPerDegree * std::cos(c.lat() * std::numbers::pi / 180.0));
    return GeoPoint(lat, lon);
}

GeoPoint clamp_to(const GeoPoint& p, const BoundingBox& b) {
    return GeoPoint(std::clamp(p.lat(), b.min_lat, b.max_lat), std::clamp(p.lon(), b.min_lon, b.max_lon));
}

Instant local_instant(Date day, std::int64_t second_of_day, int offset_minutes) {
    return Instant{day} + std::chrono::seconds{second_of_day} - std::chrono::minutes{offset_minutes};
}

void check_fraction(double v, std::string_view name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("{} must lie in [0, 1], got {}", name, v));
}

void validate(const ScenarioConfig& c) {
    if (c.weeks < 1) throw ConfigError("weeks must be at least 1");
    if (std::chrono::weekday{c.start} != std::chrono::Monday) {
        throw ConfigError(fmt::format("start date {} is not a Monday", format_date(c.start)));
    }
    const auto& l = c.layout;
    if (l.rows < 1 || l.cols < 1) throw ConfigError("layout needs at least one row and one column");
    if (!(l.cell_lat > 0.0) || !(l.cell_lon > 0.0)) throw ConfigError("layout cell size must be positive");
    if (l.home_regions < 1 || l.home_regions > l.rows * l.cols) {
        throw ConfigError("home_regions must be between 1 and the number of regions");
    }
    if (l.subdistrict_grid < 0) throw ConfigError("subdistrict_grid must be non-negative");
    // Validates coordinates up front.
    (void)GeoPoint(l.origin_lat, l.origin_lon);
    (void)GeoPoint(l.origin_lat + l.rows * l.cell_lat, l.origin_lon + l.cols * l.cell_lon);
    if (c.hotspots.week_pattern.empty()) throw ConfigError("week_pattern must not be empty");
    for (const char ch : c.hotspots.week_pattern) class_index(ch);
    for (const auto& [lo, hi] : c.hotspots.ranges) {
        if (lo < 0 || hi < lo) throw ConfigError("hotspot ranges need 0 <= lo <= hi");
    }
    if (!(c.hotspots.filtered_fraction >= 0.0)) throw ConfigError("filtered_fraction must be non-negative");
    const auto& u = c.cohort;
    if (u.users < 0 || u.posts_per_week < 0) throw ConfigError("users and posts_per_week must be non-negative");
    check_fraction(u.home_fraction, "home_fraction");
    check_fraction(u.home_keyword_rate, "home_keyword_rate");
    check_fraction(u.evacuation_keyword_rate, "evacuation_keyword_rate");
    if (!(u.radius_min_km >= 0.0) || u.radius_max_km < u.radius_min_km) {
        throw ConfigError("ring radii need 0 <= radius_min_km <= radius_max_km");
    }
    const double max_lat_deg = std::max(std::abs(l.origin_lat), std::abs(l.origin_lat + l.rows * l.cell_lat));
    const double margin_lon = u.radius_max_km / (kKmPerDegree * std::cos(max_lat_deg * std::numbers::pi / 180.0));
    if (u.radius_max_km / kKmPerDegree >= l.cell_lat / 2.0 || margin_lon >= l.cell_lon / 2.0) {
        throw ConfigError("radius_max_km does not fit inside a layout cell");
    }
    const auto& b = c.behavior;
    check_fraction(b.reducer_fraction, "reducer_fraction");
    check_fraction(b.shift_fraction, "shift_fraction");
    if (!(b.reducer_multiplier >= 0.0)) throw ConfigError("reducer_multiplier must be non-negative");
    if (!(b.shift_km >= 0.0)) throw ConfigError("shift_km must be non-negative");
    if (b.evacuation_day < 0 || b.evacuation_day > 6) throw ConfigError("evacuation_day must be in 0..6");
    if (b.evacuation_regions < 0 || b.evacuation_regions > l.rows * l.cols) {
        throw ConfigError("evacuation_regions exceeds the number of regions");
    }
    double uniform_share = 0.0;
    for (const auto& t : c.topics) {
        if (t.taxonomy.empty()) throw ConfigError("topic taxonomy must be named");
        if (topic_sentences(t.taxonomy).empty()) {
            throw ConfigError(fmt::format("no template sentences for taxonomy '{}'", t.taxonomy));
        }
        if (!(t.rho >= -1.0 && t.rho <= 1.0)) throw ConfigError("topic rho must lie in [-1, 1]");
        if (!(t.base >= 0.0) || !(t.amplitude >= 0.0)) throw ConfigError("topic base and amplitude must be non-negative");
        if (!(t.radius_km > 0.0)) throw ConfigError("topic radius_km must be positive");
        if (!(t.fraction >= 0.0)) throw ConfigError("topic fraction must be non-negative");
        if (t.mode == TopicMode::Uniform) uniform_share += t.fraction;
    }
    if (uniform_share > 1.0) {
        throw ConfigError(fmt::format("uniform topic fractions add up to {} which exceeds the post rate", uniform_share));
    }
    if (c.topic_accounts < 1) throw ConfigError("topic_accounts must be at least 1");
    check_fraction(c.air_missing_rate, "air_missing_rate");
}

// ---------------------------------------------------------------------------
// JSON helpers

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
    for (const auto& [k, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
            throw ConfigError(fmt::format("unknown key '{}' in {}", k, where));
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

}  // namespace

std::string_view to_string(TopicMode m) {
    switch (m) {
        case TopicMode::Correlated:
            return "correlated";
        case TopicMode::Uniform:
            return "uniform";
        case TopicMode::Concentrated:
            return "concentrated";
    }
    return "?";
}

TopicMode parse_topic_mode(std::string_view text) {
    if (text == "correlated") return TopicMode::Correlated;
    if (text == "uniform") return TopicMode::Uniform;
    if (text == "concentrated") return TopicMode::Concentrated;
    throw ConfigError(fmt::format("unknown topic mode '{}'", text));
}

ScenarioConfig parse_scenario_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("scenario config is not valid JSON: {}", e.what()));
    }
    check_keys(j, {"seed", "start", "weeks", "utc_offset_minutes", "layout", "hotspots", "cohort", "behavior", "topics",
                   "topic_accounts", "air_missing_rate"},
               "scenario");
    ScenarioConfig c;
    read(j, "seed", c.seed);
    if (j.contains("start")) {
        try {
            c.start = parse_date(j.at("start").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(fmt::format("bad start date: {}", e.what()));
        }
    }
    read(j, "weeks", c.weeks);
    read(j, "utc_offset_minutes", c.utc_offset_minutes);
    read(j, "air_missing_rate", c.air_missing_rate);
    read(j, "topic_accounts", c.topic_accounts);
    if (j.contains("layout")) {
        const auto& l = j.at("layout");
        check_keys(l, {"rows", "cols", "origin_lat", "origin_lon", "cell_lat", "cell_lon", "home_regions",
                       "home_province", "other_province", "subdistrict_grid"},
                   "layout");
        read(l, "rows", c.layout.rows);
        read(l, "cols", c.layout.cols);
        read(l, "origin_lat", c.layout.origin_lat);
        read(l, "origin_lon", c.layout.origin_lon);
        read(l, "cell_lat", c.layout.cell_lat);
        read(l, "cell_lon", c.layout.cell_lon);
        read(l, "home_regions", c.layout.home_regions);
        read(l, "home_province", c.layout.home_province);
        read(l, "other_province", c.layout.other_province);
        read(l, "subdistrict_grid", c.layout.subdistrict_grid);
    }
    if (j.contains("hotspots")) {
        const auto& h = j.at("hotspots");
        check_keys(h, {"week_pattern", "no_haze", "haze", "severe", "filtered_fraction"}, "hotspots");
        read(h, "week_pattern", c.hotspots.week_pattern);
        read(h, "no_haze", c.hotspots.ranges[0]);
        read(h, "haze", c.hotspots.ranges[1]);
        read(h, "severe", c.hotspots.ranges[2]);
        read(h, "filtered_fraction", c.hotspots.filtered_fraction);
    }
    if (j.contains("cohort")) {
        const auto& u = j.at("cohort");
        check_keys(u, {"users", "posts_per_week", "home_fraction", "radius_min_km", "radius_max_km",
                       "home_keyword_rate", "evacuation_keyword_rate"},
                   "cohort");
        read(u, "users", c.cohort.users);
        read(u, "posts_per_week", c.cohort.posts_per_week);
        read(u, "home_fraction", c.cohort.home_fraction);
        read(u, "radius_min_km", c.cohort.radius_min_km);
        read(u, "radius_max_km", c.cohort.radius_max_km);
        read(u, "home_keyword_rate", c.cohort.home_keyword_rate);
        read(u, "evacuation_keyword_rate", c.cohort.evacuation_keyword_rate);
    }
    if (j.contains("behavior")) {
        const auto& b = j.at("behavior");
        check_keys(b, {"reducer_fraction", "reducer_multiplier", "shift_fraction", "shift_km", "evacuation_week",
                       "evacuation_day", "evacuation_regions"},
                   "behavior");
        read(b, "reducer_fraction", c.behavior.reducer_fraction);
        read(b, "reducer_multiplier", c.behavior.reducer_multiplier);
        read(b, "shift_fraction", c.behavior.shift_fraction);
        read(b, "shift_km", c.behavior.shift_km);
        read(b, "evacuation_day", c.behavior.evacuation_day);
        read(b, "evacuation_regions", c.behavior.evacuation_regions);
        if (b.contains("evacuation_week")) {
            const auto& w = b.at("evacuation_week");
            if (w.is_null()) {
                c.behavior.evacuation_week.reset();
            } else {
                try {
                    c.behavior.evacuation_week = parse_iso_week(w.get<std::string>());
                } catch (const std::exception& e) {
                    throw ConfigError(fmt::format("bad evacuation_week: {}", e.what()));
                }
            }
        }
    }
    if (j.contains("topics")) {
        const auto& ts = j.at("topics");
        if (!ts.is_array()) throw ConfigError("topics must be an array");
        for (const auto& t : ts) {
            check_keys(t, {"taxonomy", "mode", "rho", "base", "amplitude", "fraction", "radius_km"}, "topic");
            TopicConfig tc;
            read(t, "taxonomy", tc.taxonomy);
            if (t.contains("mode")) tc.mode = parse_topic_mode(t.at("mode").get<std::string>());
            read(t, "rho", tc.rho);
            read(t, "base", tc.base);
            read(t, "amplitude", tc.amplitude);
            read(t, "fraction", tc.fraction);
            read(t, "radius_km", tc.radius_km);
            c.topics.push_back(std::move(tc));
        }
    }
    validate(c);
    return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open scenario config {}", path.string()));
    const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario_config(content);
}

namespace {

json config_json(const ScenarioConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["start"] = format_date(c.start);
    j["weeks"] = c.weeks;
    j["utc_offset_minutes"] = c.utc_offset_minutes;
    j["layout"] = {{"rows", c.layout.rows},
                   {"cols", c.layout.cols},
                   {"origin_lat", c.layout.origin_lat},
                   {"origin_lon", c.layout.origin_lon},
                   {"cell_lat", c.layout.cell_lat},
                   {"cell_lon", c.layout.cell_lon},
                   {"home_regions", c.layout.home_regions},
                   {"home_province", c.layout.home_province},
                   {"other_province", c.layout.other_province},
                   {"subdistrict_grid", c.layout.subdistrict_grid}};
    j["hotspots"] = {{"week_pattern", c.hotspots.week_pattern},
                     {"no_haze", c.hotspots.ranges[0]},
                     {"haze", c.hotspots.ranges[1]},
                     {"severe", c.hotspots.ranges[2]},
                     {"filtered_fraction", c.hotspots.filtered_fraction}};
    j["cohort"] = {{"users", c.cohort.users},
                   {"posts_per_week", c.cohort.posts_per_week},
                   {"home_fraction", c.cohort.home_fraction},
                   {"radius_min_km", c.cohort.radius_min_km},
                   {"radius_max_km", c.cohort.radius_max_km},
                   {"home_keyword_rate", c.cohort.home_keyword_rate},
                   {"evacuation_keyword_rate", c.cohort.evacuation_keyword_rate}};
    j["behavior"] = {{"reducer_fraction", c.behavior.reducer_fraction},
                     {"reducer_multiplier", c.behavior.reducer_multiplier},
                     {"shift_fraction", c.behavior.shift_fraction},
                     {"shift_km", c.behavior.shift_km},
                     {"evacuation_week", c.behavior.evacuation_week ? json(to_string(*c.behavior.evacuation_week))
                                                                    : json(nullptr)},
                     {"evacuation_day", c.behavior.evacuation_day},
                     {"evacuation_regions", c.behavior.evacuation_regions}};
    json topics = json::array();
    for (const auto& t : c.topics) {
        topics.push_back({{"taxonomy", t.taxonomy},
                          {"mode", to_string(t.mode)},
                          {"rho", t.rho},
                          {"base", t.base},
                          {"amplitude", t.amplitude},
                          {"fraction", t.fraction},
                          {"radius_km", t.radius_km}});
    }
    j["topics"] = topics;
    j["topic_accounts"] = c.topic_accounts;
    j["air_missing_rate"] = c.air_missing_rate;
    return j;
}

}  // namespace

std::string to_json(const ScenarioConfig& config) { return config_json(config).dump(2) + "\n"; }

std::span<const std::string_view> topic_sentences(std::string_view taxonomy) {
    if (taxonomy == "haze-general") return kGeneral;
    if (taxonomy == "haze-hashtag") return kHashtag;
    if (taxonomy == "haze-impact") return kImpact;
    if (taxonomy == "haze-health") return kHealth;
    return {};
}

std::span<const std::string_view> background_sentences() { return kBackground; }

// ---------------------------------------------------------------------------
// Generation

namespace {

struct User {
    std::string id;
    std::size_t region = 0;
    GeoPoint home;
    double radius_km = 0.0;
    bool reducer = false;
    bool shifted = false;
    GeoPoint shifted_home;
};

struct DraftPost {
    GeoPost post;
    std::size_t seq = 0;
    bool topic = false;
};

std::string pick(std::span<const std::string_view> options, Rng& rng) {
    return std::string(options[rng.below(options.size())]);
}

}  // namespace

Scenario generate(const ScenarioConfig& config) {
    validate(config);
    Scenario sc;
    sc.config = config;
    auto& truth = sc.truth;
    const auto& L = config.layout;
    const int offset = config.utc_offset_minutes;

    // Layout.
    std::vector<Rect> rects;
    int home_code = 1401, other_code = 1301;
    for (int r = 0; r < L.rows; ++r) {
        for (int c = 0; c < L.cols; ++c) {
            const Rect rect{L.origin_lat + r * L.cell_lat, L.origin_lon + c * L.cell_lon,
                            L.origin_lat + (r + 1) * L.cell_lat, L.origin_lon + (c + 1) * L.cell_lon};
            const bool home = static_cast<int>(rects.size()) < L.home_regions;
            RegionDef def;
            def.code = std::to_string(home ? home_code++ : other_code++);
            def.province = home ? L.home_province : L.other_province;
            def.polygon = rect_polygon(rect);
            const int s = L.subdistrict_grid;
            for (int i = 0; i < s; ++i) {
                for (int k = 0; k < s; ++k) {
                    const double dlat = L.cell_lat / s, dlon = L.cell_lon / s;
                    const Rect sub{rect.lat0 + i * dlat, rect.lon0 + k * dlon, i + 1 == s ? rect.lat1 : rect.lat0 + (i + 1) * dlat,
                                   k + 1 == s ? rect.lon1 : rect.lon0 + (k + 1) * dlon};
                    def.subdistricts.push_back({fmt::format("{}-{:02}", def.code, i * s + k + 1), rect_polygon(sub)});
                }
            }
            sc.regions.push_back(std::move(def));
            rects.push_back(rect);
        }
    }
    const BoundingBox bbox{L.origin_lat, L.origin_lon, L.origin_lat + L.rows * L.cell_lat,
                           L.origin_lon + L.cols * L.cell_lon};
    const Rect layout_rect{bbox.min_lat, bbox.min_lon, bbox.max_lat, bbox.max_lon};
    truth.bounds = bbox;
    truth.home_region = sc.regions.front().code;
    truth.home_province = L.home_province;

    // Weekly plan.
    Rng week_rng(derive_seed({config.seed, 1}));
    std::optional<int> evac_index;
    for (int w = 0; w < config.weeks; ++w) {
        PlannedWeek pw;
        pw.monday = config.start + std::chrono::days{7 * w};
        pw.week = iso_week(pw.monday);
        pw.planned_class = config.hotspots.week_pattern[static_cast<std::size_t>(w) % config.hotspots.week_pattern.size()];
        if (config.behavior.evacuation_week && *config.behavior.evacuation_week == pw.week) {
            pw.planned_class = 'S';
            evac_index = w;
        }
        const auto [lo, hi] = config.hotspots.ranges[static_cast<std::size_t>(class_index(pw.planned_class))];
        pw.hotspots = static_cast<int>(week_rng.between(lo, hi));
        truth.weeks.push_back(pw);
    }
    const Date end = config.start + std::chrono::days{7 * config.weeks};  // exclusive
    if (evac_index) {
        truth.evacuation_week = truth.weeks[static_cast<std::size_t>(*evac_index)].week;
        truth.evacuation_day = truth.weeks[static_cast<std::size_t>(*evac_index)].monday +
                               std::chrono::days{config.behavior.evacuation_day};
    }

    // Hotspots.
    Rng hot_rng(derive_seed({config.seed, 2}));
    for (const auto& pw : truth.weeks) {
        for (int i = 0; i < pw.hotspots; ++i) {
            FireHotspot h;
            h.date = pw.monday + std::chrono::days{hot_rng.below(7)};
            h.location = layout_rect.sample(hot_rng);
            h.confidence = Confidence::High;
            h.peatland = true;
            sc.hotspots.push_back(std::move(h));
        }
        const auto extra = static_cast<int>(std::lround(pw.hotspots * config.hotspots.filtered_fraction));
        for (int i = 0; i < extra; ++i) {
            FireHotspot h;
            h.date = pw.monday + std::chrono::days{hot_rng.below(7)};
            h.location = layout_rect.sample(hot_rng);
            const bool low = hot_rng.bernoulli(0.5);
            h.confidence = low ? Confidence::Low : Confidence::High;
            h.peatland = low ? hot_rng.bernoulli(0.5) : false;
            sc.hotspots.push_back(std::move(h));
        }
    }
    for (std::size_t i = 0; i < sc.hotspots.size(); ++i) sc.hotspots[i].id = fmt::format("h{:06}", i + 1);
    truth.hotspots_total = sc.hotspots.size();
    for (const auto& pw : truth.weeks) truth.hotspots_kept += static_cast<std::size_t>(pw.hotspots);

    // Users.
    Rng user_rng(derive_seed({config.seed, 3}));
    const auto& C = config.cohort;
    const auto n_users = static_cast<std::uint32_t>(C.users);
    const auto n_home = static_cast<std::uint32_t>(std::lround(C.home_fraction * C.users));
    std::vector<User> users(n_users);
    const double margin_lat = C.radius_max_km / kKmPerDegree;
    for (std::uint32_t i = 0; i < n_users; ++i) {
        auto& u = users[i];
        u.id = fmt::format("u{:05}", i + 1);
        u.region = (i < n_home || rects.size() == 1) ? 0 : 1 + user_rng.below(rects.size() - 1);
        const Rect& r = rects[u.region];
        const double margin_lon =
            C.radius_max_km / (kKmPerDegree * std::cos(std::max(std::abs(r.lat0), std::abs(r.lat1)) * std::numbers::pi / 180.0));
        u.home = r.sample(user_rng, margin_lat, margin_lon);
        u.radius_km = user_rng.uniform(C.radius_min_km, C.radius_max_km);
    }
    std::vector<std::uint32_t> scratch, picked;
    {
        Rng rng(derive_seed({config.seed, 4}));
        sample_without_replacement(n_users, static_cast<std::uint32_t>(std::lround(config.behavior.reducer_fraction * n_users)),
                                   rng, scratch, picked);
        for (const auto i : picked) users[i].reducer = true;
        sample_without_replacement(n_users, static_cast<std::uint32_t>(std::lround(config.behavior.shift_fraction * n_users)),
                                   rng, scratch, picked);
        const GeoPoint mid = layout_rect.center();
        for (const auto i : picked) {
            auto& u = users[i];
            u.shifted = true;
            double north = mid.lat() - u.home.lat();
            double east = (mid.lon() - u.home.lon()) * std::cos(u.home.lat() * std::numbers::pi / 180.0);
            const double norm = std::hypot(north, east);
            if (norm == 0.0) {
                north = 1.0;
                east = 0.0;
            } else {
                north /= norm;
                east /= norm;
            }
            const BoundingBox inner{bbox.min_lat + margin_lat, bbox.min_lon + margin_lat * 2.0,
                                    bbox.max_lat - margin_lat, bbox.max_lon - margin_lat * 2.0};
            u.shifted_home = clamp_to(offset_km(u.home, north * config.behavior.shift_km, east * config.behavior.shift_km), inner);
        }
    }
    for (const auto& u : users) {
        if (u.reducer) truth.reducers.push_back(u.id);
        if (u.shifted) truth.shifted.push_back(u.id);
    }
    truth.users = n_users;
    truth.home_users = std::min(n_home, n_users);

    // Evacuation destinations.
    std::vector<std::size_t> evac_regions;
    const auto k_evac = static_cast<std::uint32_t>(config.behavior.evacuation_regions);
    if (evac_index && k_evac > 0) {
        if (truth.home_users < k_evac) {
            throw ConfigError(fmt::format("evacuation fan-out into {} regions needs at least that many home users", k_evac));
        }
        Rng rng(derive_seed({config.seed, 5}));
        sample_without_replacement(static_cast<std::uint32_t>(rects.size()), k_evac, rng, scratch, picked);
        for (const auto i : picked) {
            evac_regions.push_back(i);
            truth.evacuation_regions.push_back(sc.regions[i].code);
        }
    }

    // Background posts on rings.
    std::vector<DraftPost> drafts;
    std::size_t seq = 0;
    const auto add_post = [&](std::string user, Date day, std::int64_t second, GeoPoint where, std::string text,
                              std::string_view source, bool topic) {
        DraftPost d;
        d.post.user_id = std::move(user);
        d.post.timestamp = local_instant(day, second, offset);
        d.post.location = where;
        d.post.text = std::move(text);
        d.post.source = std::string(source);
        d.seq = seq++;
        d.topic = topic;
        drafts.push_back(std::move(d));
    };
    const int M = C.posts_per_week;
    for (std::uint32_t ui = 0; ui < n_users; ++ui) {
        const auto& u = users[ui];
        Rng rng(derive_seed({config.seed, 6, ui}));
        const bool cohort_member = ui < n_home;
        for (int w = 0; w < config.weeks; ++w) {
            const auto& pw = truth.weeks[static_cast<std::size_t>(w)];
            const bool severe = pw.planned_class == 'S';
            const bool evac_week = evac_index && *evac_index == w;
            const GeoPoint center = severe && u.shifted ? u.shifted_home : u.home;
            const double radius = u.radius_km * (severe && u.reducer ? config.behavior.reducer_multiplier : 1.0);
            const double theta0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
            for (int k = 0; k < M; ++k) {
                const double theta = theta0 + 2.0 * std::numbers::pi * k / M;
                GeoPoint where = offset_km(center, radius * std::cos(theta), radius * std::sin(theta));
                Date day = pw.monday + std::chrono::days{rng.below(7)};
                if (evac_week && cohort_member && !evac_regions.empty()) {
                    if (k == 0) day = *truth.evacuation_day;
                    if (day == *truth.evacuation_day) {
                        const Rect& dest = rects[evac_regions[ui % evac_regions.size()]];
                        where = dest.sample(rng, L.cell_lat * 0.01, L.cell_lon * 0.01);
                    }
                }
                std::string text;
                if (evac_week && rng.bernoulli(C.evacuation_keyword_rate)) {
                    text = std::string(kEvacuationSentence);
                } else if (rng.bernoulli(C.home_keyword_rate)) {
                    text = std::string(kHomeSentence);
                } else {
                    text = pick(kBackground, rng);
                }
                add_post(u.id, day, static_cast<std::int64_t>(rng.below(86400)), clamp_to(where, bbox), std::move(text),
                         pick_source(rng), false);
            }
        }
    }

    // Topic posts.
    std::map<Date, std::vector<std::uint32_t>> kept_by_day;
    {
        std::size_t idx = 0;
        for (const auto& pw : truth.weeks) {
            for (int i = 0; i < pw.hotspots; ++i, ++idx) kept_by_day[sc.hotspots[idx].date].push_back(static_cast<std::uint32_t>(idx));
            idx += static_cast<std::size_t>(std::lround(pw.hotspots * config.hotspots.filtered_fraction));
        }
    }
    const LocalCalendar cal{offset};
    std::map<Date, std::vector<std::uint32_t>> background_by_day;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        background_by_day[cal.local_day(drafts[i].post.timestamp)].push_back(static_cast<std::uint32_t>(i));
    }
    const auto random_user = [&](Rng& rng) {
        return fmt::format("t{:04}", 1 + rng.below(static_cast<std::uint64_t>(config.topic_accounts)));
    };

    for (std::size_t t = 0; t < config.topics.size(); ++t) {
        const auto& tc = config.topics[t];
        PlantedTopic planted{tc, 0.0, std::vector<std::int64_t>(truth.weeks.size(), 0), 0};
        Rng rng(derive_seed({config.seed, 7, t}));
        const auto sentences = topic_sentences(tc.taxonomy);
        switch (tc.mode) {
            case TopicMode::Correlated: {
                if (truth.weeks.size() < 2) throw ConfigError("a correlated topic needs at least two weeks");
                double mean = 0.0;
                for (const auto& pw : truth.weeks) mean += pw.hotspots;
                mean /= static_cast<double>(truth.weeks.size());
                double ss = 0.0;
                for (const auto& pw : truth.weeks) ss += (pw.hotspots - mean) * (pw.hotspots - mean);
                const double sd = std::sqrt(ss / static_cast<double>(truth.weeks.size()));
                if (sd == 0.0) throw ConfigError("a correlated topic needs a non-constant hotspot series");
                planted.noise_weight = std::sqrt(1.0 - tc.rho * tc.rho);
                for (std::size_t w = 0; w < truth.weeks.size(); ++w) {
                    const double z = (truth.weeks[w].hotspots - mean) / sd;
                    const double e = rng.normal();
                    const double target = tc.base + tc.amplitude * (tc.rho * z + planted.noise_weight * e);
                    const auto n = std::max<std::int64_t>(0, std::llround(target));
                    planted.weekly_posts[w] = n;
                    for (std::int64_t i = 0; i < n; ++i) {
                        const Date day = truth.weeks[w].monday + std::chrono::days{rng.below(7)};
                        add_post(random_user(rng), day, static_cast<std::int64_t>(rng.below(86400)), layout_rect.sample(rng),
                                 pick(sentences, rng), pick_source(rng), true);
                    }
                }
                break;
            }
            case TopicMode::Concentrated: {
                for (const auto& [day, hs] : kept_by_day) {
                    const auto it = background_by_day.find(day);
                    const std::size_t n_day = it == background_by_day.end() ? 0 : it->second.size();
                    const auto n = std::llround(tc.fraction * static_cast<double>(n_day));
                    const auto w = static_cast<std::size_t>((day - config.start).count() / 7);
                    for (std::int64_t i = 0; i < n; ++i) {
                        const auto& h = sc.hotspots[hs[rng.below(hs.size())]];
                        const double r = tc.radius_km * std::sqrt(rng.uniform01());
                        const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
                        const GeoPoint where = clamp_to(offset_km(h.location, r * std::cos(theta), r * std::sin(theta)), bbox);
                        add_post(random_user(rng), day, static_cast<std::int64_t>(rng.below(86400)), where,
                                 pick(sentences, rng), pick_source(rng), true);
                        ++planted.weekly_posts[w];
                    }
                }
                break;
            }
            case TopicMode::Uniform:
                break;  // relabelled below, once every other post exists
        }
        truth.topics.push_back(std::move(planted));
    }
    // Uniform topics relabel a share of each day's background posts; disjoint across topics.
    {
        std::map<Date, std::vector<std::uint32_t>> pool = background_by_day;
        for (std::size_t t = 0; t < config.topics.size(); ++t) {
            const auto& tc = config.topics[t];
            if (tc.mode != TopicMode::Uniform) continue;
            Rng rng(derive_seed({config.seed, 8, t}));
            const auto sentences = topic_sentences(tc.taxonomy);
            for (auto& [day, avail] : pool) {
                const auto n_day = background_by_day[day].size();
                const auto n = static_cast<std::uint32_t>(
                    std::min<long long>(std::llround(tc.fraction * static_cast<double>(n_day)), static_cast<long long>(avail.size())));
                sample_without_replacement(static_cast<std::uint32_t>(avail.size()), n, rng, scratch, picked);
                std::vector<char> take(avail.size(), 0);
                for (const auto k : picked) {
                    take[k] = 1;
                    auto& d = drafts[avail[k]];
                    d.post.text = pick(sentences, rng);
                    d.topic = true;
                }
                const auto w = static_cast<std::size_t>((day - config.start).count() / 7);
                if (w < truth.weeks.size()) truth.topics[t].weekly_posts[w] += n;
                std::vector<std::uint32_t> rest;
                for (std::size_t k = 0; k < avail.size(); ++k) {
                    if (!take[k]) rest.push_back(avail[k]);
                }
                avail = std::move(rest);
            }
        }
    }
    for (auto& p : truth.topics) {
        p.posts = 0;
        for (const auto n : p.weekly_posts) p.posts += static_cast<std::size_t>(n);
    }

    // Final order and ids.
    std::stable_sort(drafts.begin(), drafts.end(), [](const DraftPost& a, const DraftPost& b) {
        if (a.post.timestamp != b.post.timestamp) return a.post.timestamp < b.post.timestamp;
        return a.post.user_id < b.post.user_id;
    });
    sc.posts.reserve(drafts.size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        drafts[i].post.id = fmt::format("p{:07}", i + 1);
        sc.posts.push_back(std::move(drafts[i].post));
    }
    truth.posts_total = sc.posts.size();

    // Air quality follows the planned class of the week.
    Rng air_rng(derive_seed({config.seed, 9}));
    for (const auto& region : sc.regions) {
        for (Date d = config.start; d < end; d += std::chrono::days{1}) {
            const auto w = static_cast<std::size_t>((d - config.start).count() / 7);
            AirQuality q = AirQuality::Missing;
            if (!air_rng.bernoulli(config.air_missing_rate)) {
                const bool second = air_rng.bernoulli(0.5);
                switch (truth.weeks[w].planned_class) {
                    case 'N':
                        q = second ? AirQuality::Blue : AirQuality::Green;
                        break;
                    case 'H':
                        q = AirQuality::Yellow;
                        break;
                    default:
                        q = second ? AirQuality::Black : AirQuality::Red;
                        break;
                }
            }
            sc.air_quality.insert(region.code, d, q);
        }
    }
    return sc;
}

std::string manifest_json(const Scenario& sc) {
    const auto& t = sc.truth;
    json j;
    j["config"] = config_json(sc.config);
    j["bounds"] = {{"min_lat", t.bounds.min_lat}, {"min_lon", t.bounds.min_lon},
                   {"max_lat", t.bounds.max_lat}, {"max_lon", t.bounds.max_lon}};
    j["home_region"] = t.home_region;
    j["home_province"] = t.home_province;
    json weeks = json::array();
    for (const auto& w : t.weeks) {
        weeks.push_back({{"week", to_string(w.week)},
                         {"monday", format_date(w.monday)},
                         {"planned_class", std::string(1, w.planned_class)},
                         {"hotspots", w.hotspots}});
    }
    j["weeks"] = weeks;
    j["hotspots_total"] = t.hotspots_total;
    j["hotspots_kept"] = t.hotspots_kept;
    j["posts_total"] = t.posts_total;
    j["users"] = t.users;
    j["home_users"] = t.home_users;
    j["reducers"] = {{"fraction", sc.config.behavior.reducer_fraction},
                     {"multiplier", sc.config.behavior.reducer_multiplier},
                     {"count", t.reducers.size()},
                     {"users", t.reducers}};
    j["shift"] = {{"fraction", sc.config.behavior.shift_fraction},
                  {"km", sc.config.behavior.shift_km},
                  {"count", t.shifted.size()},
                  {"users", t.shifted}};
    j["evacuation"] = {{"week", t.evacuation_week ? json(to_string(*t.evacuation_week)) : json(nullptr)},
                       {"day", t.evacuation_day ? json(format_date(*t.evacuation_day)) : json(nullptr)},
                       {"regions", t.evacuation_regions},
                       {"k", t.evacuation_regions.size()}};
    json topics = json::array();
    for (const auto& p : t.topics) {
        topics.push_back({{"taxonomy", p.config.taxonomy},
                          {"mode", to_string(p.config.mode)},
                          {"rho", p.config.rho},
                          {"noise_weight", p.noise_weight},
                          {"fraction", p.config.fraction},
                          {"radius_km", p.config.radius_km},
                          {"posts", p.posts},
                          {"weekly_posts", p.weekly_posts}});
    }
    j["topics"] = topics;
    return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_scenario(const Scenario& sc, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    const auto open = [&](const char* name) {
        written.push_back(dir / name);
        std::ofstream out(written.back(), std::ios::binary);
        if (!out) throw Error(fmt::format("cannot write {}", written.back().string()));
        return out;
    };
    {
        auto out = open("hotspots.csv");
        out << hotspot_csv_header() << '\n';
        for (const auto& h : sc.hotspots) out << format_hotspot_row(h) << '\n';
    }
    {
        auto out = open("posts.txt");
        out << kPostHeader << '\n';
        for (const auto& p : sc.posts) out << format_post_record(p) << '\n';
    }
    {
        auto out = open("regions.csv");
        out << format_region_csv(sc.regions);
    }
    {
        auto out = open("air_quality.csv");
        out << "region_code,date,class\n";
        for (const auto& [key, q] : sc.air_quality.cells()) {
            out << key.first << ',' << format_date(key.second) << ',' << to_code(q) << '\n';
        }
    }
    {
        auto out = open("manifest.json");
        out << manifest_json(sc);
    }
    return written;
}

std::vector<std::optional<Neighbor>> oracle_nearest(std::span<const GeoPost> posts,
                                                    std::span<const FireHotspot> hotspots, const LocalCalendar& cal,
                                                    DistanceMode mode) {
    std::map<Date, std::vector<std::uint32_t>> by_day;
    for (std::size_t i = 0; i < hotspots.size(); ++i) by_day[hotspots[i].date].push_back(static_cast<std::uint32_t>(i));
    std::vector<std::optional<Neighbor>> out(posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        const auto it = by_day.find(cal.local_day(posts[i].timestamp));
        if (it == by_day.end()) continue;
        std::optional<Neighbor> best;
        for (const auto h : it->second) {
            const double d = distance(posts[i].location, hotspots[h].location, mode);
            if (!best || d < best->distance ||
                (d == best->distance && hotspots[h].id < hotspots[best->ref].id)) {
                best = Neighbor{h, d};
            }
        }
        out[i] = best;
    }
    return out;
}

}  // namespace haze::synth
