#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haze/model.hpp"

namespace haze {

struct Neighbor {
    std::uint32_t ref = 0;  // caller-supplied reference of the matched point
    double distance = 0.0;  // km, or degrees under DistanceMode::EuclidDegrees
};

/// Exact nearest-neighbour index over a fixed point set (k-d tree).
///
/// Points are embedded so that embedding distance is monotone in the query
/// metric (unit vectors for great-circle, raw degrees for the planar mode).
/// The tree only prunes; every candidate is scored with the metric itself, so
/// results equal a brute-force scan bit for bit, ties going to the smallest id.
/// The index keeps views of the ids; their storage must outlive it.
class PointIndex {
public:
    struct Entry {
        GeoPoint location;
        std::string_view id;
        std::uint32_t ref = 0;
    };

    PointIndex() = default;
    PointIndex(std::vector<Entry> entries, DistanceMode mode);

    std::optional<Neighbor> nearest(const GeoPoint& query) const;
    std::size_t size() const noexcept { return entries_.size(); }
    DistanceMode mode() const noexcept { return mode_; }

private:
    struct Coord {
        double v[3];
    };

    void build(std::vector<std::uint32_t>& order, std::size_t lo, std::size_t hi);
    void search(std::size_t lo, std::size_t hi, const GeoPoint& q, const Coord& qc, std::optional<Neighbor>& best,
                std::string_view& best_id) const;
    Coord embed(const GeoPoint& p) const;
    double bound_for(double metric_distance) const;

    std::vector<Entry> entries_;
    std::vector<Coord> coords_;
    std::vector<std::uint8_t> axis_;
    DistanceMode mode_ = DistanceMode::Haversine;
};

/// One PointIndex per local calendar day.
class SpatialDayIndex {
public:
    SpatialDayIndex() = default;

    static SpatialDayIndex of_hotspots(std::span<const FireHotspot> hotspots, DistanceMode mode);
    /// `subset` lists indices into `posts`; empty span means every post.
    static SpatialDayIndex of_posts(std::span<const GeoPost> posts, const LocalCalendar& cal, DistanceMode mode,
                                    std::span<const std::uint32_t> subset = {});

    const PointIndex* day(Date d) const;
    std::optional<Neighbor> nearest(Date d, const GeoPoint& q) const;
    const std::map<Date, PointIndex>& days() const noexcept { return days_; }

private:
    std::map<Date, PointIndex> days_;
};

/// Nearest same-day hotspot, or nullopt when that day has none. Neighbor::ref indexes the hotspot array.
std::optional<Neighbor> nearest_hotspot(const GeoPost& post, const SpatialDayIndex& hotspot_index,
                                        const LocalCalendar& cal);

struct PopularityTable {
    std::vector<std::string> hotspot_ids;
    std::vector<std::int64_t> popularity;  // parallel to hotspot_ids
    std::size_t matched_posts = 0;         // posts on a day with at least one hotspot
    std::size_t unmatched_posts = 0;

    /// popularity value -> number of hotspots with that value, over hotspots with popularity >= 1.
    std::map<std::int64_t, std::size_t> frequency() const;
};

PopularityTable popularity(std::span<const GeoPost> posts, std::span<const FireHotspot> hotspots,
                           const SpatialDayIndex& hotspot_index, const LocalCalendar& cal);
PopularityTable popularity(std::span<const GeoPost> posts, std::span<const FireHotspot> hotspots,
                           const LocalCalendar& cal, DistanceMode mode = DistanceMode::Haversine);

struct DistanceSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double stdev = 0.0;  // population standard deviation
};

/// Throws EmptyDistribution for an empty sample.
DistanceSummary summarize(std::span<const double> samples);

struct HistogramBin {
    double start = 0.0;
    double end = 0.0;
    std::size_t count = 0;
    double density = 0.0;  // count / (n * width)
};

struct DistanceDistribution {
    std::vector<double> samples;
    double bin_width = 5.0;
    std::vector<HistogramBin> bins;
    DistanceSummary summary;
    std::size_t excluded = 0;  // items with no same-day counterpart
};

/// Throws EmptyDistribution when `samples` is empty and ConfigError for a non-positive width.
DistanceDistribution make_distribution(std::vector<double> samples, double bin_width, std::size_t excluded = 0);

/// One sample per post that has a same-day hotspot.
DistanceDistribution tweet_to_hotspot_distribution(std::span<const GeoPost> posts,
                                                   const SpatialDayIndex& hotspot_index, const LocalCalendar& cal,
                                                   double bin_width = 5.0);

/// One sample per hotspot that has at least one same-day post, in day order.
DistanceDistribution hotspot_to_tweet_distribution(std::span<const GeoPost> posts,
                                                   std::span<const FireHotspot> hotspots, const LocalCalendar& cal,
                                                   DistanceMode mode = DistanceMode::Haversine,
                                                   double bin_width = 5.0);

struct NullModelConfig {
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    DistanceMode mode = DistanceMode::Haversine;
};

struct IterationStats {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double stdev = 0.0;
};

struct NullModelResult {
    std::uint64_t seed = 0;
    DistanceSummary real;                   // hotspot -> nearest topic post
    std::vector<IterationStats> iterations; // hotspot -> nearest day-matched random post
    double mean = 0.0;                      // mean of iteration means
    double median = 0.0;                    // mean of iteration medians
    double stdev_across_iterations = 0.0;   // sample stdev of iteration means
    double stdev_pooled = 0.0;              // population stdev of all null samples pooled
};

/// Day-matched random-subset null model. For every day with hotspots and n_d > 0
/// topic posts, each iteration draws n_d posts without replacement from all of that
/// day's posts and measures hotspot -> nearest drawn post. The random stream of
/// each (day, iteration) is derived from the seed, so results do not depend on `threads`.
/// Throws ConfigError when iterations < 1 and EmptyDistribution when no hotspot has a same-day topic post.
NullModelResult null_model(std::span<const GeoPost> posts, std::span<const std::uint8_t> in_topic,
                           std::span<const FireHotspot> hotspots, const LocalCalendar& cal,
                           const NullModelConfig& config);

void write_popularity_csv(std::ostream& out, std::string_view topic, std::span<const FireHotspot> hotspots,
                          const PopularityTable& table, bool header);
void write_popularity_frequency_csv(std::ostream& out, std::string_view topic, const PopularityTable& table,
                                    bool header);
void write_distance_pdf_csv(std::ostream& out, const DistanceDistribution& dist);
void write_null_model_csv(std::ostream& out, const NullModelResult& result);

}  // namespace haze
