#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "haze/ingest.hpp"
#include "haze/model.hpp"
#include "haze/spatial.hpp"

namespace haze::synth {

/// Row-major grid of rectangular regions. The first `home_regions` cells belong to
/// the home province and get codes 1401, 1402, ...; the rest get 1301, 1302, ...
struct LayoutConfig {
    int rows = 3;
    int cols = 4;
    double origin_lat = -1.0;  // south-west corner
    double origin_lon = 100.0;
    double cell_lat = 1.5;
    double cell_lon = 1.5;
    int home_regions = 6;
    std::string home_province = "Riau";
    std::string other_province = "Sumatera Barat";
    int subdistrict_grid = 2;  // s x s sub-districts per region, 0 for none
};

/// Weekly hotspot counts (after the peat/confidence filter) are drawn from the
/// range of each week's planned class. Pattern letters: N(o haze), H(aze), S(evere).
struct HotspotConfig {
    std::string week_pattern = "NNHSSHNN";
    std::array<std::pair<int, int>, 3> ranges{{{20, 99}, {100, 400}, {401, 800}}};
    double filtered_fraction = 0.1;  // extra low-confidence or non-peat hotspots, relative to kept ones
};

/// Every user posts `posts_per_week` times a week on a ring around their home.
struct CohortConfig {
    int users = 200;
    int posts_per_week = 6;
    double home_fraction = 0.3;  // share of users living in the first region
    double radius_min_km = 2.0;
    double radius_max_km = 10.0;
    double home_keyword_rate = 0.05;
    double evacuation_keyword_rate = 0.2;  // applied in the evacuation week only
};

struct BehaviorConfig {
    double reducer_fraction = 0.0;    // users whose ring shrinks in severe weeks
    double reducer_multiplier = 0.25;
    double shift_fraction = 0.0;      // users whose home moves in severe weeks
    double shift_km = 0.0;
    std::optional<IsoWeek> evacuation_week = IsoWeek{2014, 11};
    int evacuation_day = 2;           // offset from the Monday of the evacuation week
    int evacuation_regions = 0;       // k; 0 disables the fan-out
};

enum class TopicMode {
    Correlated,    // weekly count follows the hotspot series with correlation rho
    Uniform,       // a uniform share of each day's posts is relabelled; no spatial signal
    Concentrated,  // extra posts within radius_km of a same-day hotspot
};
std::string_view to_string(TopicMode m);
TopicMode parse_topic_mode(std::string_view text);

struct TopicConfig {
    std::string taxonomy = "haze-general";
    TopicMode mode = TopicMode::Uniform;
    double rho = 0.8;
    double base = 100.0;
    double amplitude = 30.0;
    double fraction = 0.1;
    double radius_km = 10.0;
};

struct ScenarioConfig {
    std::uint64_t seed = 42;
    Date start = std::chrono::sys_days{std::chrono::year{2014} / 1 / 6};  // must be a Monday
    int weeks = 8;
    int utc_offset_minutes = 420;
    LayoutConfig layout;
    HotspotConfig hotspots;
    CohortConfig cohort;
    BehaviorConfig behavior;
    std::vector<TopicConfig> topics;
    int topic_accounts = 50;  // authors of added topic posts, disjoint from the cohort
    double air_missing_rate = 0.05;
};

/// Throws ConfigError on malformed JSON or impossible settings. Missing keys keep defaults.
ScenarioConfig parse_scenario_config(std::string_view json);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
std::string to_json(const ScenarioConfig& config);

struct PlannedWeek {
    IsoWeek week;
    Date monday;
    char planned_class = 'N';
    int hotspots = 0;  // kept after filtering
};

struct PlantedTopic {
    TopicConfig config;
    double noise_weight = 0.0;              // sqrt(1 - rho^2) for correlated topics
    std::vector<std::int64_t> weekly_posts; // per planned week
    std::size_t posts = 0;
};

struct GroundTruth {
    std::vector<PlannedWeek> weeks;
    std::string home_region;
    std::string home_province;
    std::size_t users = 0;
    std::size_t home_users = 0;
    std::vector<std::string> reducers;  // user ids, sorted
    std::vector<std::string> shifted;
    std::optional<IsoWeek> evacuation_week;
    std::optional<Date> evacuation_day;
    std::vector<std::string> evacuation_regions;
    std::vector<PlantedTopic> topics;
    std::size_t hotspots_total = 0;
    std::size_t hotspots_kept = 0;
    std::size_t posts_total = 0;
    BoundingBox bounds;
};

struct Scenario {
    ScenarioConfig config;
    std::vector<RegionDef> regions;
    std::vector<FireHotspot> hotspots;  // includes the filtered-out extras
    std::vector<GeoPost> posts;         // ordered by timestamp, ids ascending
    AirQualityTable air_quality;
    GroundTruth truth;
};

/// Deterministic in the config: same config, same bytes.
Scenario generate(const ScenarioConfig& config);

/// The manifest records the config and every planted parameter.
std::string manifest_json(const Scenario& scenario);

/// Writes hotspots.csv, posts.txt, regions.csv, air_quality.csv, manifest.json. Returns the written paths.
std::vector<std::filesystem::path> write_scenario(const Scenario& scenario, const std::filesystem::path& dir);

/// Exhaustive same-day join; entry i answers posts[i]. Ties go to the smallest hotspot id.
std::vector<std::optional<Neighbor>> oracle_nearest(std::span<const GeoPost> posts,
                                                    std::span<const FireHotspot> hotspots, const LocalCalendar& cal,
                                                    DistanceMode mode = DistanceMode::Haversine);

/// Template sentences. Each topic sentence matches exactly its own taxonomy of the shipped
/// file; background sentences match none.
std::span<const std::string_view> topic_sentences(std::string_view taxonomy);
std::span<const std::string_view> background_sentences();

}  // namespace haze::synth
