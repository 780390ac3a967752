#include "haze/spatial.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

#include <fmt/format.h>

#include "haze/errors.hpp"
#include "haze/random.hpp"
#include "haze/text.hpp"

namespace haze {

namespace {

constexpr std::size_t kLeafSize = 8;
constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

// ---------------------------------------------------------------------------
// PointIndex

PointIndex::PointIndex(std::vector<Entry> entries, DistanceMode mode) : mode_(mode) {
    const std::size_t n = entries.size();
    std::vector<Coord> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = embed(entries[i].location);
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    axis_.assign(n, 0);
    coords_ = std::move(coords);
    build(order, 0, n);
    entries_.reserve(n);
    std::vector<Coord> sorted(n);
    for (std::size_t i = 0; i < n; ++i) {
        entries_.push_back(entries[order[i]]);
        sorted[i] = coords_[order[i]];
    }
    coords_ = std::move(sorted);
}

PointIndex::Coord PointIndex::embed(const GeoPoint& p) const {
    if (mode_ == DistanceMode::EuclidDegrees) return {{p.lat(), p.lon(), 0.0}};
    const double lat = p.lat() * kDegToRad;
    const double lon = p.lon() * kDegToRad;
    return {{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)}};
}

// Embedding-space distance corresponding to a metric distance, padded for rounding.
double PointIndex::bound_for(double d) const {
    double e = d;
    if (mode_ == DistanceMode::Haversine) {
        const double half_angle = std::min(d / (2.0 * kEarthRadiusKm), std::numbers::pi / 2.0);
        e = 2.0 * std::sin(half_angle);
    }
    return e * (1.0 + 1e-9) + 1e-12;
}

void PointIndex::build(std::vector<std::uint32_t>& order, std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeafSize) return;
    double mn[3] = {1e300, 1e300, 1e300};
    double mx[3] = {-1e300, -1e300, -1e300};
    for (std::size_t i = lo; i < hi; ++i) {
        for (int a = 0; a < 3; ++a) {
            mn[a] = std::min(mn[a], coords_[order[i]].v[a]);
            mx[a] = std::max(mx[a], coords_[order[i]].v[a]);
        }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
        if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto first = order.begin();
    std::nth_element(first + static_cast<std::ptrdiff_t>(lo), first + static_cast<std::ptrdiff_t>(mid),
                     first + static_cast<std::ptrdiff_t>(hi),
                     [&](std::uint32_t a, std::uint32_t b) { return coords_[a].v[axis] < coords_[b].v[axis]; });
    axis_[mid] = static_cast<std::uint8_t>(axis);
    build(order, lo, mid);
    build(order, mid + 1, hi);
}

void PointIndex::search(std::size_t lo, std::size_t hi, const GeoPoint& q, const Coord& qc,
                        std::optional<Neighbor>& best, std::string_view& best_id) const {
    const auto consider = [&](std::size_t i) {
        const double d = distance(q, entries_[i].location, mode_);
        if (!best || d < best->distance || (d == best->distance && entries_[i].id < best_id)) {
            best = Neighbor{entries_[i].ref, d};
            best_id = entries_[i].id;
        }
    };
    if (hi - lo <= kLeafSize) {
        for (std::size_t i = lo; i < hi; ++i) consider(i);
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const int axis = axis_[mid];
    const double diff = qc.v[axis] - coords_[mid].v[axis];
    consider(mid);
    const bool left_first = diff < 0.0;
    if (left_first) {
        search(lo, mid, q, qc, best, best_id);
        if (!best || std::abs(diff) <= bound_for(best->distance)) search(mid + 1, hi, q, qc, best, best_id);
    } else {
        search(mid + 1, hi, q, qc, best, best_id);
        if (!best || std::abs(diff) <= bound_for(best->distance)) search(lo, mid, q, qc, best, best_id);
    }
}

std::optional<Neighbor> PointIndex::nearest(const GeoPoint& query) const {
    if (entries_.empty()) return std::nullopt;
    std::optional<Neighbor> best;
    std::string_view best_id;
    search(0, entries_.size(), query, embed(query), best, best_id);
    return best;
}

// ---------------------------------------------------------------------------
// SpatialDayIndex

SpatialDayIndex SpatialDayIndex::of_hotspots(std::span<const FireHotspot> hotspots, DistanceMode mode) {
    std::map<Date, std::vector<PointIndex::Entry>> by_day;
    for (std::size_t i = 0; i < hotspots.size(); ++i) {
        by_day[hotspots[i].date].push_back({hotspots[i].location, hotspots[i].id, static_cast<std::uint32_t>(i)});
    }
    SpatialDayIndex idx;
    for (auto& [d, entries] : by_day) idx.days_.emplace(d, PointIndex(std::move(entries), mode));
    return idx;
}

SpatialDayIndex SpatialDayIndex::of_posts(std::span<const GeoPost> posts, const LocalCalendar& cal, DistanceMode mode,
                                          std::span<const std::uint32_t> subset) {
    std::map<Date, std::vector<PointIndex::Entry>> by_day;
    const auto add = [&](std::uint32_t i) {
        by_day[cal.local_day(posts[i].timestamp)].push_back({posts[i].location, posts[i].id, i});
    };
    if (subset.empty()) {
        for (std::size_t i = 0; i < posts.size(); ++i) add(static_cast<std::uint32_t>(i));
    } else {
        for (const auto i : subset) add(i);
    }
    SpatialDayIndex idx;
    for (auto& [d, entries] : by_day) idx.days_.emplace(d, PointIndex(std::move(entries), mode));
    return idx;
}

const PointIndex* SpatialDayIndex::day(Date d) const {
    const auto it = days_.find(d);
    return it == days_.end() ? nullptr : &it->second;
}

std::optional<Neighbor> SpatialDayIndex::nearest(Date d, const GeoPoint& q) const {
    const auto* idx = day(d);
    return idx ? idx->nearest(q) : std::nullopt;
}

std::optional<Neighbor> nearest_hotspot(const GeoPost& post, const SpatialDayIndex& hotspot_index,
                                        const LocalCalendar& cal) {
    return hotspot_index.nearest(cal.local_day(post.timestamp), post.location);
}

// ---------------------------------------------------------------------------
// Popularity

std::map<std::int64_t, std::size_t> PopularityTable::frequency() const {
    std::map<std::int64_t, std::size_t> out;
    for (const auto p : popularity) {
        if (p >= 1) ++out[p];
    }
    return out;
}

PopularityTable popularity(std::span<const GeoPost> posts, std::span<const FireHotspot> hotspots,
                           const SpatialDayIndex& hotspot_index, const LocalCalendar& cal) {
    PopularityTable t;
    t.hotspot_ids.reserve(hotspots.size());
    for (const auto& h : hotspots) t.hotspot_ids.push_back(h.id);
    t.popularity.assign(hotspots.size(), 0);
    for (const auto& p : posts) {
        if (const auto n = nearest_hotspot(p, hotspot_index, cal)) {
            ++t.popularity[n->ref];
            ++t.matched_posts;
        } else {
            ++t.unmatched_posts;
        }
    }
    return t;
}

PopularityTable popularity(std::span<const GeoPost> posts, std::span<const FireHotspot> hotspots,
                           const LocalCalendar& cal, DistanceMode mode) {
    return popularity(posts, hotspots, SpatialDayIndex::of_hotspots(hotspots, mode), cal);
}

// ---------------------------------------------------------------------------
// Distributions

DistanceSummary summarize(std::span<const double> samples) {
    if (samples.empty()) throw EmptyDistribution("no distance samples");
    DistanceSummary s;
    s.n = samples.size();
    const auto n = static_cast<double>(s.n);
    double sum = 0.0;
    for (const double v : samples) sum += v;
    s.mean = sum / n;
    double ss = 0.0;
    for (const double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.stdev = std::sqrt(ss / n);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[m] : (sorted[m - 1] + sorted[m]) / 2.0;
    return s;
}

DistanceDistribution make_distribution(std::vector<double> samples, double bin_width, std::size_t excluded) {
    if (!(bin_width > 0.0)) throw ConfigError("histogram bin width must be positive");
    DistanceDistribution d;
    d.summary = summarize(samples);
    d.bin_width = bin_width;
    d.excluded = excluded;
    const double max = *std::max_element(samples.begin(), samples.end());
    const auto nbins = static_cast<std::size_t>(std::floor(max / bin_width)) + 1;
    d.bins.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        d.bins[i].start = static_cast<double>(i) * bin_width;
        d.bins[i].end = static_cast<double>(i + 1) * bin_width;
    }
    for (const double v : samples) {
        auto b = static_cast<std::size_t>(std::floor(v / bin_width));
        if (b >= nbins) b = nbins - 1;
        ++d.bins[b].count;
    }
    const double norm = static_cast<double>(samples.size()) * bin_width;
    for (auto& b : d.bins) b.density = static_cast<double>(b.count) / norm;
    d.samples = std::move(samples);
    return d;
}

DistanceDistribution tweet_to_hotspot_distribution(std::span<const GeoPost> posts,
                                                   const SpatialDayIndex& hotspot_index, const LocalCalendar& cal,
                                                   double bin_width) {
    std::vector<double> samples;
    std::size_t excluded = 0;
    for (const auto& p : posts) {
        if (const auto n = nearest_hotspot(p, hotspot_index, cal)) {
            samples.push_back(n->distance);
        } else {
            ++excluded;
        }
    }
    if (samples.empty()) throw EmptyDistribution("no post has a same-day hotspot");
    return make_distribution(std::move(samples), bin_width, excluded);
}

namespace {

// Per-day inputs shared by the real and null computations.
struct DayGroup {
    Date day;
    std::vector<std::uint32_t> hotspots;   // indices into the hotspot array, input order
    std::vector<std::uint32_t> all_posts;  // indices into the post array, input order
    std::vector<std::uint32_t> topic_posts;
};

std::vector<DayGroup> group_days(std::span<const GeoPost> posts, std::span<const std::uint8_t> in_topic,
                                 std::span<const FireHotspot> hotspots, const LocalCalendar& cal) {
    std::map<Date, DayGroup> by_day;
    for (std::size_t i = 0; i < hotspots.size(); ++i) {
        auto& g = by_day[hotspots[i].date];
        g.day = hotspots[i].date;
        g.hotspots.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::size_t i = 0; i < posts.size(); ++i) {
        const auto it = by_day.find(cal.local_day(posts[i].timestamp));
        if (it == by_day.end()) continue;
        it->second.all_posts.push_back(static_cast<std::uint32_t>(i));
        if (in_topic.empty() || in_topic[i]) it->second.topic_posts.push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<DayGroup> out;
    for (auto& [d, g] : by_day) out.push_back(std::move(g));
    return out;
}

PointIndex index_subset(std::span<const GeoPost> posts, std::span<const std::uint32_t> subset, DistanceMode mode) {
    std::vector<PointIndex::Entry> entries;
    entries.reserve(subset.size());
    for (const auto i : subset) entries.push_back({posts[i].location, posts[i].id, i});
    return PointIndex(std::move(entries), mode);
}

IterationStats stats_of(std::span<const double> samples) {
    const auto s = summarize(samples);
    return {s.n, s.mean, s.median, s.stdev};
}

}  // namespace

DistanceDistribution hotspot_to_tweet_distribution(std::span<const GeoPost> posts,
                                                   std::span<const FireHotspot> hotspots, const LocalCalendar& cal,
                                                   DistanceMode mode, double bin_width) {
    std::vector<double> samples;
    std::size_t excluded = 0;
    const auto groups = group_days(posts, {}, hotspots, cal);
    for (const auto& g : groups) {
        if (g.topic_posts.empty()) {
            excluded += g.hotspots.size();
            continue;
        }
        const auto idx = index_subset(posts, g.topic_posts, mode);
        for (const auto h : g.hotspots) samples.push_back(idx.nearest(hotspots[h].location)->distance);
    }
    if (samples.empty()) throw EmptyDistribution("no hotspot has a same-day post");
    return make_distribution(std::move(samples), bin_width, excluded);
}

NullModelResult null_model(std::span<const GeoPost> posts, std::span<const std::uint8_t> in_topic,
                           std::span<const FireHotspot> hotspots, const LocalCalendar& cal,
                           const NullModelConfig& config) {
    if (config.iterations < 1) throw ConfigError("null model needs at least one iteration");
    if (!in_topic.empty() && in_topic.size() != posts.size()) {
        throw std::invalid_argument("in_topic must align with posts");
    }
    std::vector<DayGroup> groups;
    for (auto& g : group_days(posts, in_topic, hotspots, cal)) {
        if (!g.topic_posts.empty()) groups.push_back(std::move(g));
    }
    if (groups.empty()) throw EmptyDistribution("no hotspot has a same-day topic post");

    NullModelResult result;
    result.seed = config.seed;
    std::vector<std::vector<double>> real_by_day(groups.size());
    {
        std::vector<double> real;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& g = groups[gi];
            const auto idx = index_subset(posts, g.topic_posts, config.mode);
            for (const auto h : g.hotspots) real_by_day[gi].push_back(idx.nearest(hotspots[h].location)->distance);
            real.insert(real.end(), real_by_day[gi].begin(), real_by_day[gi].end());
        }
        result.real = summarize(real);
    }

    result.iterations.resize(config.iterations);
    std::vector<double> pooled_var(config.iterations, 0.0);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        std::vector<double> samples;
        std::vector<std::uint32_t> scratch, picked, chosen;
        for (std::size_t it = next++; it < config.iterations; it = next++) {
            samples.clear();
            for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                const auto& g = groups[gi];
                if (g.topic_posts.size() == g.all_posts.size()) {
                    // Drawing every post reproduces the real subset exactly.
                    samples.insert(samples.end(), real_by_day[gi].begin(), real_by_day[gi].end());
                    continue;
                }
                Rng rng(derive_seed({config.seed, static_cast<std::uint64_t>(g.day.time_since_epoch().count()),
                                     static_cast<std::uint64_t>(it)}));
                sample_without_replacement(static_cast<std::uint32_t>(g.all_posts.size()),
                                           static_cast<std::uint32_t>(g.topic_posts.size()), rng, scratch, picked);
                chosen.clear();
                for (const auto k : picked) chosen.push_back(g.all_posts[k]);
                const auto idx = index_subset(posts, chosen, config.mode);
                for (const auto h : g.hotspots) samples.push_back(idx.nearest(hotspots[h].location)->distance);
            }
            result.iterations[it] = stats_of(samples);
            double m2 = 0.0;
            for (const double v : samples) m2 += (v - result.iterations[it].mean) * (v - result.iterations[it].mean);
            pooled_var[it] = m2 / static_cast<double>(samples.size());
        }
    };
    const unsigned nthreads =
        std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.iterations)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deterministic reduction in iteration order, taken relative to the first
    // iteration so identical iterations reproduce their statistics exactly.
    const auto k = static_cast<double>(config.iterations);
    const auto& first = result.iterations.front();
    double d_mean = 0.0, d_median = 0.0;
    for (const auto& s : result.iterations) {
        d_mean += s.mean - first.mean;
        d_median += s.median - first.median;
    }
    result.mean = first.mean + d_mean / k;
    result.median = first.median + d_median / k;
    if (config.iterations > 1) {
        double ss = 0.0;
        for (const auto& s : result.iterations) ss += (s.mean - result.mean) * (s.mean - result.mean);
        result.stdev_across_iterations = std::sqrt(ss / (k - 1.0));
    }
    double n_total = 0.0, w_mean = 0.0;
    for (const auto& s : result.iterations) {
        n_total += static_cast<double>(s.n);
        w_mean += static_cast<double>(s.n) * (s.mean - first.mean);
    }
    const double grand = first.mean + w_mean / n_total;
    const double var0 = pooled_var[0];
    double d_var = 0.0, between = 0.0;
    for (std::size_t i = 0; i < config.iterations; ++i) {
        const auto n_i = static_cast<double>(result.iterations[i].n);
        d_var += n_i * (pooled_var[i] - var0);
        between += n_i * (result.iterations[i].mean - grand) * (result.iterations[i].mean - grand);
    }
    result.stdev_pooled = std::sqrt(var0 + d_var / n_total + between / n_total);
    return result;
}

// ---------------------------------------------------------------------------
// Writers

void write_popularity_csv(std::ostream& out, std::string_view topic, std::span<const FireHotspot> hotspots,
                          const PopularityTable& table, bool header) {
    if (header) out << "topic,hotspot_id,date,popularity\n";
    for (std::size_t i = 0; i < table.hotspot_ids.size(); ++i) {
        out << text::quote_csv(topic) << ',' << text::quote_csv(table.hotspot_ids[i]) << ','
            << format_date(hotspots[i].date) << ',' << table.popularity[i] << '\n';
    }
}

void write_popularity_frequency_csv(std::ostream& out, std::string_view topic, const PopularityTable& table,
                                    bool header) {
    if (header) out << "topic,popularity,hotspots\n";
    for (const auto& [p, n] : table.frequency()) out << text::quote_csv(topic) << ',' << p << ',' << n << '\n';
}

void write_distance_pdf_csv(std::ostream& out, const DistanceDistribution& dist) {
    out << "bin_start,bin_end,density,count\n";
    for (const auto& b : dist.bins) {
        out << text::format_double(b.start) << ',' << text::format_double(b.end) << ','
            << text::format_double(b.density) << ',' << b.count << '\n';
    }
}

void write_null_model_csv(std::ostream& out, const NullModelResult& r) {
    out << "iteration,n_samples,mean,median,stdev\n";
    out << "real," << r.real.n << ',' << text::format_double(r.real.mean) << ','
        << text::format_double(r.real.median) << ',' << text::format_double(r.real.stdev) << '\n';
    std::size_t pooled_n = 0;
    for (std::size_t i = 0; i < r.iterations.size(); ++i) {
        const auto& s = r.iterations[i];
        pooled_n += s.n;
        out << i << ',' << s.n << ',' << text::format_double(s.mean) << ',' << text::format_double(s.median) << ','
            << text::format_double(s.stdev) << '\n';
    }
    // Aggregates: mean of means, mean of medians, and the two stdev readings.
    out << "null_pooled," << pooled_n << ',' << text::format_double(r.mean) << ',' << text::format_double(r.median)
        << ',' << text::format_double(r.stdev_pooled) << '\n';
    out << "null_across_iterations," << r.iterations.size() << ',' << text::format_double(r.mean) << ','
        << text::format_double(r.median) << ',' << text::format_double(r.stdev_across_iterations) << '\n';
}

}  // namespace haze
