#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "haze/ingest.hpp"
#include "haze/model.hpp"
#include "haze/ruledsl.hpp"
#include "haze/temporal.hpp"

namespace haze {

struct WeekMobility {
    IsoWeek week;
    GeoPoint centroid;
    double spread = 0.0;  // mean distance from centroid to each post
    std::size_t post_count = 0;
};

struct MobilityProfile {
    std::string user_id;
    std::vector<WeekMobility> weeks;  // eligible weeks only, ascending

    const WeekMobility* find(IsoWeek w) const;
};

/// Arithmetic-mean centroid and mean centroid distance of a point set (non-empty).
std::pair<GeoPoint, double> centroid_and_spread(std::span<const GeoPoint> points, DistanceMode mode);

/// A week is kept iff the user posted more than `tau` times in it. Profiles are sorted by user id;
/// users without an eligible week get an empty profile.
std::vector<MobilityProfile> build_profiles(std::span<const GeoPost> posts, const LocalCalendar& cal,
                                            std::size_t tau = 4, DistanceMode mode = DistanceMode::Haversine);

/// Comparison classes for the second week of a pair. Evacuation weeks form their own class.
enum class WeekGroup { NoHaze, Haze, Severe, Evacuation };
inline constexpr std::array kWeekGroups = {WeekGroup::NoHaze, WeekGroup::Haze, WeekGroup::Severe,
                                           WeekGroup::Evacuation};
std::string_view to_string(WeekGroup g);
WeekGroup parse_week_group(std::string_view text);

/// Empty for excluded or unknown weeks.
std::optional<WeekGroup> week_group(const WeekClassTable& table, IsoWeek w);

struct WeekPairSample {
    std::string user_id;
    IsoWeek w1;
    IsoWeek w2;
    WeekGroup group = WeekGroup::NoHaze;  // class of w2
    double distance = 0.0;                // centroid displacement
    double rs = 1.0;                      // S(w2) / S(w1); +inf when only the baseline is zero
};

/// S2/S1 with the zero-baseline convention: both zero gives 1, only S1 zero gives +inf.
double relative_spread(double s1, double s2);

enum class Pairing { All, FirstBaseline };
std::string_view to_string(Pairing p);
Pairing parse_pairing(std::string_view text);

/// Ordered pairs (w1, w2): w1 an eligible NO_HAZE week, w2 any other eligible non-excluded week.
std::vector<WeekPairSample> build_pairs(std::span<const MobilityProfile> profiles, const WeekClassTable& weeks,
                                        Pairing pairing = Pairing::All,
                                        DistanceMode mode = DistanceMode::Haversine);

struct CdfPoint {
    double distance = 0.0;
    double cumulative = 0.0;  // fraction of samples <= distance
};

/// Empirical CDF of pair distances whose w2 falls in `group`. Throws EmptyClass when there are none.
std::vector<CdfPoint> distance_cdf(std::span<const WeekPairSample> pairs, WeekGroup group);

struct ReductionConfig {
    double threshold = 1.0 / 3.0;
    std::vector<double> bin_edges{0.0, 50.0, 500.0};  // the last bin is open-ended
};

struct ReductionCell {
    WeekGroup group = WeekGroup::NoHaze;
    bool all_distances = false;  // true for the row pooling every bin
    double bin_start = 0.0;
    double bin_end = 0.0;        // +inf for the open bin
    std::size_t pairs = 0;
    std::size_t reducers = 0;
    double per_pair = 0.0;       // reducers / pairs
    std::size_t users = 0;
    double per_user_mean = 0.0;  // mean over users of their own reducer fraction
};

/// One cell per non-empty (group, bin), plus a pooled row per group. Empty cells are absent.
/// Throws ConfigError on invalid bin edges or threshold.
std::vector<ReductionCell> reduction_rate(std::span<const WeekPairSample> pairs,
                                          const ReductionConfig& config = {});

/// Region holding the plurality of the posts; ties go to the region posted from earliest.
std::optional<std::string> home_region(std::span<const GeoPost> user_posts, std::span<const RegionDef> regions);
/// user id -> home region code, for every user with at least one post inside a region.
std::map<std::string, std::string> home_regions(std::span<const GeoPost> posts, std::span<const RegionDef> regions);

/// Posts of users whose home region is `code`.
std::vector<GeoPost> select_cohort(std::span<const GeoPost> posts, std::span<const RegionDef> regions,
                                   const std::string& code);

struct DayRange {
    std::optional<Date> from;
    std::optional<Date> to;

    bool contains(Date d) const noexcept { return (!from || d >= *from) && (!to || d <= *to); }
};

struct RegionDiversityRow {
    Date day;
    std::size_t inside = 0;   // distinct regions in the home province
    std::size_t outside = 0;
    std::size_t posts = 0;    // cohort posts that day
    AirQuality home_air = AirQuality::Missing;
    std::vector<std::string> regions;
};

/// One row per day of the range (or of the cohort's posting span when open), zeros included.
std::vector<RegionDiversityRow> region_diversity(std::span<const GeoPost> cohort_posts,
                                                 std::span<const RegionDef> regions,
                                                 const std::string& home_province, const LocalCalendar& cal,
                                                 const DayRange& range = {},
                                                 const AirQualityTable* air_quality = nullptr,
                                                 const std::string& home_code = {});

struct SubdistrictBucketRow {
    Date day;
    std::array<std::size_t, 4> users{};  // visiting exactly 1, 2, 3, and 4+ sub-districts
};

/// Throws MissingSubdistricts when the region has no sub-district geometry.
std::vector<SubdistrictBucketRow> subdistrict_visit_buckets(std::span<const GeoPost> cohort_posts,
                                                            const RegionDef& region, const LocalCalendar& cal,
                                                            const DayRange& range = {});

struct SourceRule {
    std::string name;
    std::string needle;  // case-insensitive substring of the source field
};

struct MetaSignalConfig {
    std::vector<Taxonomy> keywords;
    std::vector<SourceRule> sources{{"browser", "web"}, {"checkin", "foursquare"}};
};

struct MetaSignalRow {
    Date day;
    std::size_t total = 0;
    std::vector<std::size_t> keyword_counts;  // parallel to config.keywords
    std::vector<std::size_t> source_counts;   // parallel to config.sources
};

struct MetaSignalSeries {
    std::vector<std::string> keyword_names;
    std::vector<std::string> source_names;
    std::vector<MetaSignalRow> rows;
};

MetaSignalSeries meta_signals(std::span<const GeoPost> cohort_posts, const MetaSignalConfig& config,
                              const LocalCalendar& cal, const DayRange& range = {});

void write_profiles_csv(std::ostream& out, std::span<const MobilityProfile> profiles);
void write_pairs_csv(std::ostream& out, std::span<const WeekPairSample> pairs);
void write_distance_cdf_csv(std::ostream& out, std::span<const CdfPoint> cdf);
void write_reduction_rates_csv(std::ostream& out, std::span<const ReductionCell> cells);
void write_region_diversity_csv(std::ostream& out, std::span<const RegionDiversityRow> rows);
void write_subdistrict_buckets_csv(std::ostream& out, std::span<const SubdistrictBucketRow> rows);
void write_meta_signals_csv(std::ostream& out, const MetaSignalSeries& series);

}  // namespace haze
