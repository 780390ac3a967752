#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "haze/ingest.hpp"
#include "haze/model.hpp"
#include "haze/ruledsl.hpp"

namespace haze {

enum class Granularity { Day, Week };

/// Aligned event counts on a gap-free bucket axis. Weekly buckets start on the
/// ISO Monday; daily buckets are local calendar days. Absent buckets are zeros.
struct WeeklySeries {
    Granularity granularity = Granularity::Week;
    std::vector<Date> buckets;
    std::vector<std::string> topics;
    std::vector<std::int64_t> hotspot_count;
    std::vector<std::vector<std::int64_t>> topic_counts;  // [topic][bucket]
    std::vector<std::int64_t> total_posts;

    std::size_t size() const noexcept { return buckets.size(); }
    IsoWeek week(std::size_t i) const { return iso_week(buckets[i]); }
    std::optional<std::size_t> index_of(Date bucket_start) const;
};

/// `topic_masks[i]` holds the taxonomy bits of `posts[i]`; bit j refers to `topics[j]`.
/// Throws EmptyInput when there are neither hotspots nor posts.
WeeklySeries build_weekly_series(std::span<const FireHotspot> hotspots, std::span<const GeoPost> posts,
                                 std::span<const TopicMask> topic_masks, std::span<const std::string> topics,
                                 const LocalCalendar& cal, Granularity granularity = Granularity::Week);

/// Product-moment correlation. Throws DegenerateSeries on a constant series and
/// std::invalid_argument on mismatched or too-short input.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationCell {
    std::string area;
    std::string taxonomy;
    std::optional<double> r;  // empty when a series was degenerate
    std::size_t n_weeks = 0;
    std::string note;
};

/// One coefficient per taxonomy between weekly hotspots and weekly topic posts,
/// skipping `excluded` weeks.
std::vector<CorrelationCell> correlate_series(const WeeklySeries& series, const std::string& area,
                                              const std::set<IsoWeek>& excluded);

/// Restricts hotspots and posts to an area: a bounding box, a set of region
/// codes, or a province (matched through region geometry). No constraint = everything.
struct AreaFilter {
    std::string name;
    std::optional<BoundingBox> bbox;
    std::vector<std::string> region_codes;
    std::optional<std::string> province;

    bool matches(const GeoPoint& p, std::span<const RegionDef> regions) const;
};

std::vector<CorrelationCell> correlate_all(std::span<const FireHotspot> hotspots, std::span<const GeoPost> posts,
                                           std::span<const TopicMask> topic_masks,
                                           std::span<const std::string> topics, const LocalCalendar& cal,
                                           std::span<const AreaFilter> areas, std::span<const RegionDef> regions,
                                           const std::set<IsoWeek>& excluded);

enum class HazeClass { NoHaze, Haze, SevereHaze };

std::string_view to_string(HazeClass c);

struct WeekClassConfig {
    std::int64_t low = 100;
    std::int64_t high = 400;
    std::set<IsoWeek> excluded;
    std::set<IsoWeek> evacuation{IsoWeek{2014, 11}};
};

/// NO_HAZE below `low`, SEVERE_HAZE above `high`, HAZE on the closed interval between.
HazeClass classify_count(std::int64_t weekly_hotspots, std::int64_t low, std::int64_t high);

struct WeekInfo {
    IsoWeek week;
    std::int64_t hotspots = 0;
    std::optional<HazeClass> haze_class;  // empty for excluded weeks
    bool evacuation = false;
};

class WeekClassTable {
public:
    WeekClassTable() = default;
    explicit WeekClassTable(std::vector<WeekInfo> weeks, std::vector<std::string> warnings = {});

    const std::vector<WeekInfo>& weeks() const noexcept { return weeks_; }
    const WeekInfo* find(IsoWeek w) const;
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    std::vector<WeekInfo> weeks_;
    std::map<IsoWeek, std::size_t> index_;
    std::vector<std::string> warnings_;
};

/// Throws ConfigError if low >= high or the series is not weekly. A configured
/// evacuation week that is present but not SEVERE_HAZE is left unflagged with a warning.
WeekClassTable classify_weeks(const WeeklySeries& series, const WeekClassConfig& config);

void write_series_csv(std::ostream& out, const WeeklySeries& series);
void write_correlations_csv(std::ostream& out, std::span<const CorrelationCell> cells);
void write_week_classes_csv(std::ostream& out, const WeekClassTable& table);

}  // namespace haze
