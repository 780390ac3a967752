#include "haze/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "haze/errors.hpp"
#include "haze/text.hpp"

namespace haze {

const WeekMobility* MobilityProfile::find(IsoWeek w) const {
    const auto it = std::lower_bound(weeks.begin(), weeks.end(), w,
                                     [](const WeekMobility& m, IsoWeek k) { return m.week < k; });
    return it != weeks.end() && it->week == w ? &*it : nullptr;
}

std::pair<GeoPoint, double> centroid_and_spread(std::span<const GeoPoint> points, DistanceMode mode) {
    if (points.empty()) throw std::invalid_argument("centroid of an empty point set");
    // Offsets from the first point keep identical inputs exactly identical.
    const double lat0 = points.front().lat();
    const double lon0 = points.front().lon();
    double dlat = 0.0, dlon = 0.0;
    for (const auto& p : points) {
        dlat += p.lat() - lat0;
        dlon += p.lon() - lon0;
    }
    const auto n = static_cast<double>(points.size());
    const GeoPoint c(lat0 + dlat / n, lon0 + dlon / n);
    double spread = 0.0;
    for (const auto& p : points) spread += distance(c, p, mode);
    return {c, spread / n};
}

std::vector<MobilityProfile> build_profiles(std::span<const GeoPost> posts, const LocalCalendar& cal,
                                            std::size_t tau, DistanceMode mode) {
    std::vector<IsoWeek> weeks(posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) weeks[i] = cal.local_week(posts[i].timestamp);
    std::vector<std::size_t> order(posts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (posts[a].user_id != posts[b].user_id) return posts[a].user_id < posts[b].user_id;
        return weeks[a] < weeks[b];
    });

    std::vector<MobilityProfile> out;
    std::vector<GeoPoint> pts;
    for (std::size_t i = 0; i < order.size();) {
        const auto& user = posts[order[i]].user_id;
        MobilityProfile profile{user, {}};
        while (i < order.size() && posts[order[i]].user_id == user) {
            const IsoWeek w = weeks[order[i]];
            pts.clear();
            while (i < order.size() && posts[order[i]].user_id == user && weeks[order[i]] == w) {
                pts.push_back(posts[order[i]].location);
                ++i;
            }
            if (pts.size() > tau) {
                const auto [c, s] = centroid_and_spread(pts, mode);
                profile.weeks.push_back({w, c, s, pts.size()});
            }
        }
        out.push_back(std::move(profile));
    }
    return out;
}

std::string_view to_string(WeekGroup g) {
    switch (g) {
        case WeekGroup::NoHaze:
            return "no-haze";
        case WeekGroup::Haze:
            return "haze";
        case WeekGroup::Severe:
            return "severe-haze";
        case WeekGroup::Evacuation:
            return "evacuation";
    }
    return "?";
}

WeekGroup parse_week_group(std::string_view text) {
    for (const auto g : kWeekGroups) {
        if (text::iequals_ascii(text, to_string(g))) return g;
    }
    throw ConfigError(fmt::format("unknown week class '{}'", text));
}

std::optional<WeekGroup> week_group(const WeekClassTable& table, IsoWeek w) {
    const auto* info = table.find(w);
    if (!info || !info->haze_class) return std::nullopt;
    if (info->evacuation) return WeekGroup::Evacuation;
    switch (*info->haze_class) {
        case HazeClass::NoHaze:
            return WeekGroup::NoHaze;
        case HazeClass::Haze:
            return WeekGroup::Haze;
        case HazeClass::SevereHaze:
            return WeekGroup::Severe;
    }
    return std::nullopt;
}

double relative_spread(double s1, double s2) {
    if (s1 == 0.0) return s2 == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return s2 / s1;
}

std::string_view to_string(Pairing p) { return p == Pairing::All ? "all" : "first-baseline"; }

Pairing parse_pairing(std::string_view text) {
    if (text == "all") return Pairing::All;
    if (text == "first-baseline") return Pairing::FirstBaseline;
    throw ConfigError(fmt::format("unknown pairing '{}' (expected all or first-baseline)", text));
}

std::vector<WeekPairSample> build_pairs(std::span<const MobilityProfile> profiles, const WeekClassTable& weeks,
                                        Pairing pairing, DistanceMode mode) {
    std::vector<WeekPairSample> out;
    std::vector<std::pair<const WeekMobility*, WeekGroup>> eligible;
    for (const auto& p : profiles) {
        eligible.clear();
        for (const auto& w : p.weeks) {
            if (const auto g = week_group(weeks, w.week)) eligible.emplace_back(&w, *g);
        }
        bool first = true;
        for (const auto& [w1, g1] : eligible) {
            if (g1 != WeekGroup::NoHaze) continue;
            if (pairing == Pairing::FirstBaseline && !first) break;
            first = false;
            for (const auto& [w2, g2] : eligible) {
                if (w2 == w1) continue;
                out.push_back({p.user_id, w1->week, w2->week, g2, distance(w1->centroid, w2->centroid, mode),
                               relative_spread(w1->spread, w2->spread)});
            }
        }
    }
    return out;
}

std::vector<CdfPoint> distance_cdf(std::span<const WeekPairSample> pairs, WeekGroup group) {
    std::vector<double> d;
    for (const auto& p : pairs) {
        if (p.group == group) d.push_back(p.distance);
    }
    if (d.empty()) throw EmptyClass(fmt::format("no week pairs in class {}", to_string(group)));
    std::sort(d.begin(), d.end());
    std::vector<CdfPoint> out;
    const auto n = static_cast<double>(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i + 1 < d.size() && d[i + 1] == d[i]) continue;
        out.push_back({d[i], static_cast<double>(i + 1) / n});
    }
    return out;
}

std::vector<ReductionCell> reduction_rate(std::span<const WeekPairSample> pairs, const ReductionConfig& config) {
    if (!(config.threshold > 0.0) || !std::isfinite(config.threshold)) {
        throw ConfigError("reduction threshold must be a positive number");
    }
    const auto& edges = config.bin_edges;
    if (edges.empty()) throw ConfigError("at least one distance bin edge is required");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!std::isfinite(edges[i]) || edges[i] < 0.0 || (i > 0 && edges[i] <= edges[i - 1])) {
            throw ConfigError("distance bin edges must be finite, non-negative and strictly increasing");
        }
    }
    constexpr std::size_t kPooled = std::numeric_limits<std::size_t>::max();
    struct Acc {
        std::size_t pairs = 0, reducers = 0;
        std::map<std::string, std::pair<std::size_t, std::size_t>> users;  // user -> (pairs, reducers)
    };
    std::map<std::pair<WeekGroup, std::size_t>, Acc> acc;
    const auto add = [&](WeekGroup g, std::size_t bin, const WeekPairSample& p, bool reducer) {
        auto& a = acc[{g, bin}];
        ++a.pairs;
        auto& u = a.users[p.user_id];
        ++u.first;
        if (reducer) {
            ++a.reducers;
            ++u.second;
        }
    };
    for (const auto& p : pairs) {
        const bool reducer = p.rs < config.threshold;
        add(p.group, kPooled, p, reducer);
        const auto it = std::upper_bound(edges.begin(), edges.end(), p.distance);
        if (it == edges.begin()) continue;
        add(p.group, static_cast<std::size_t>(it - edges.begin()) - 1, p, reducer);
    }

    std::vector<ReductionCell> out;
    for (const auto g : kWeekGroups) {
        const auto emit = [&](std::size_t bin) {
            const auto it = acc.find({g, bin});
            if (it == acc.end()) return;
            const auto& a = it->second;
            ReductionCell c;
            c.group = g;
            c.all_distances = bin == kPooled;
            c.bin_start = c.all_distances ? 0.0 : edges[bin];
            c.bin_end = c.all_distances || bin + 1 == edges.size() ? std::numeric_limits<double>::infinity()
                                                                   : edges[bin + 1];
            c.pairs = a.pairs;
            c.reducers = a.reducers;
            c.per_pair = static_cast<double>(a.reducers) / static_cast<double>(a.pairs);
            c.users = a.users.size();
            double sum = 0.0;
            for (const auto& [user, nr] : a.users) {
                sum += static_cast<double>(nr.second) / static_cast<double>(nr.first);
            }
            c.per_user_mean = sum / static_cast<double>(c.users);
            out.push_back(c);
        };
        emit(kPooled);
        for (std::size_t b = 0; b < edges.size(); ++b) emit(b);
    }
    return out;
}

namespace {

struct RegionTally {
    std::size_t count = 0;
    Instant first = Instant::max();
};

std::optional<std::string> pick_home(const std::map<std::string, RegionTally>& tally) {
    const std::pair<const std::string, RegionTally>* best = nullptr;
    for (const auto& entry : tally) {
        if (!best || entry.second.count > best->second.count ||
            (entry.second.count == best->second.count && entry.second.first < best->second.first)) {
            best = &entry;
        }
    }
    if (!best) return std::nullopt;
    return best->first;
}

std::vector<Date> day_axis(const std::set<Date>& seen, const DayRange& range) {
    std::vector<Date> out;
    if (range.from && range.to) {
        for (Date d = *range.from; d <= *range.to; d += std::chrono::days{1}) out.push_back(d);
        return out;
    }
    if (seen.empty()) return out;
    const Date lo = range.from ? std::max(*range.from, *seen.begin()) : *seen.begin();
    const Date hi = range.to ? std::min(*range.to, *seen.rbegin()) : *seen.rbegin();
    for (Date d = lo; d <= hi; d += std::chrono::days{1}) out.push_back(d);
    return out;
}

}  // namespace

std::optional<std::string> home_region(std::span<const GeoPost> user_posts, std::span<const RegionDef> regions) {
    std::map<std::string, RegionTally> tally;
    for (const auto& p : user_posts) {
        const auto hit = assign_region(p.location, regions);
        if (!hit) continue;
        auto& t = tally[hit->region->code];
        ++t.count;
        t.first = std::min(t.first, p.timestamp);
    }
    return pick_home(tally);
}

std::map<std::string, std::string> home_regions(std::span<const GeoPost> posts, std::span<const RegionDef> regions) {
    std::map<std::string, std::map<std::string, RegionTally>> tallies;
    for (const auto& p : posts) {
        const auto hit = assign_region(p.location, regions);
        if (!hit) continue;
        auto& t = tallies[p.user_id][hit->region->code];
        ++t.count;
        t.first = std::min(t.first, p.timestamp);
    }
    std::map<std::string, std::string> out;
    for (const auto& [user, tally] : tallies) {
        if (auto h = pick_home(tally)) out.emplace(user, std::move(*h));
    }
    return out;
}

std::vector<GeoPost> select_cohort(std::span<const GeoPost> posts, std::span<const RegionDef> regions,
                                   const std::string& code) {
    const auto homes = home_regions(posts, regions);
    std::vector<GeoPost> out;
    for (const auto& p : posts) {
        const auto it = homes.find(p.user_id);
        if (it != homes.end() && it->second == code) out.push_back(p);
    }
    return out;
}

std::vector<RegionDiversityRow> region_diversity(std::span<const GeoPost> cohort_posts,
                                                 std::span<const RegionDef> regions,
                                                 const std::string& home_province, const LocalCalendar& cal,
                                                 const DayRange& range, const AirQualityTable* air_quality,
                                                 const std::string& home_code) {
    std::map<Date, std::map<std::string, bool>> visited;  // day -> code -> inside province
    std::map<Date, std::size_t> posts_per_day;
    std::set<Date> seen;
    for (const auto& p : cohort_posts) {
        const Date d = cal.local_day(p.timestamp);
        if (!range.contains(d)) continue;
        seen.insert(d);
        ++posts_per_day[d];
        if (const auto hit = assign_region(p.location, regions)) {
            visited[d][hit->region->code] = hit->region->province == home_province;
        }
    }
    std::vector<RegionDiversityRow> out;
    for (const Date d : day_axis(seen, range)) {
        RegionDiversityRow row;
        row.day = d;
        if (const auto it = visited.find(d); it != visited.end()) {
            for (const auto& [code, inside] : it->second) {
                ++(inside ? row.inside : row.outside);
                row.regions.push_back(code);
            }
        }
        if (const auto it = posts_per_day.find(d); it != posts_per_day.end()) row.posts = it->second;
        if (air_quality && !home_code.empty()) row.home_air = air_quality->at(home_code, d);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<SubdistrictBucketRow> subdistrict_visit_buckets(std::span<const GeoPost> cohort_posts,
                                                            const RegionDef& region, const LocalCalendar& cal,
                                                            const DayRange& range) {
    if (region.subdistricts.empty()) {
        throw MissingSubdistricts(fmt::format("region {} has no sub-district geometry", region.code));
    }
    std::map<Date, std::map<std::string, std::set<std::size_t>>> visits;
    std::set<Date> seen;
    for (const auto& p : cohort_posts) {
        const Date d = cal.local_day(p.timestamp);
        if (!range.contains(d)) continue;
        seen.insert(d);
        for (std::size_t s = 0; s < region.subdistricts.size(); ++s) {
            if (region.subdistricts[s].polygon.contains(p.location)) {
                visits[d][p.user_id].insert(s);
                break;
            }
        }
    }
    std::vector<SubdistrictBucketRow> out;
    for (const Date d : day_axis(seen, range)) {
        SubdistrictBucketRow row;
        row.day = d;
        if (const auto it = visits.find(d); it != visits.end()) {
            for (const auto& [user, subs] : it->second) ++row.users[std::min<std::size_t>(subs.size(), 4) - 1];
        }
        out.push_back(row);
    }
    return out;
}

MetaSignalSeries meta_signals(std::span<const GeoPost> cohort_posts, const MetaSignalConfig& config,
                              const LocalCalendar& cal, const DayRange& range) {
    MetaSignalSeries series;
    for (const auto& k : config.keywords) series.keyword_names.push_back(k.name);
    for (const auto& s : config.sources) series.source_names.push_back(s.name);
    std::map<Date, MetaSignalRow> rows;
    std::set<Date> seen;
    for (const auto& p : cohort_posts) {
        const Date d = cal.local_day(p.timestamp);
        if (!range.contains(d)) continue;
        seen.insert(d);
        auto& row = rows[d];
        if (row.keyword_counts.empty()) {
            row.keyword_counts.assign(config.keywords.size(), 0);
            row.source_counts.assign(config.sources.size(), 0);
        }
        ++row.total;
        const TokenizedText tokens(p.text);
        for (std::size_t k = 0; k < config.keywords.size(); ++k) {
            if (config.keywords[k].matches(tokens)) ++row.keyword_counts[k];
        }
        for (std::size_t s = 0; s < config.sources.size(); ++s) {
            if (text::icontains_ascii(p.source, config.sources[s].needle)) ++row.source_counts[s];
        }
    }
    for (const Date d : day_axis(seen, range)) {
        MetaSignalRow row;
        if (const auto it = rows.find(d); it != rows.end()) row = it->second;
        row.day = d;
        row.keyword_counts.resize(config.keywords.size(), 0);
        row.source_counts.resize(config.sources.size(), 0);
        series.rows.push_back(std::move(row));
    }
    return series;
}

// ---------------------------------------------------------------------------
// Writers

void write_profiles_csv(std::ostream& out, std::span<const MobilityProfile> profiles) {
    out << "user_id,week,centroid_lat,centroid_lon,spread,posts\n";
    for (const auto& p : profiles) {
        for (const auto& w : p.weeks) {
            out << text::quote_csv(p.user_id) << ',' << to_string(w.week) << ','
                << text::format_double(w.centroid.lat()) << ',' << text::format_double(w.centroid.lon()) << ','
                << text::format_double(w.spread) << ',' << w.post_count << '\n';
        }
    }
}

void write_pairs_csv(std::ostream& out, std::span<const WeekPairSample> pairs) {
    out << "user_id,w1,w2,class,distance,rs\n";
    for (const auto& p : pairs) {
        out << text::quote_csv(p.user_id) << ',' << to_string(p.w1) << ',' << to_string(p.w2) << ','
            << to_string(p.group) << ',' << text::format_double(p.distance) << ',' << text::format_double(p.rs)
            << '\n';
    }
}

void write_distance_cdf_csv(std::ostream& out, std::span<const CdfPoint> cdf) {
    out << "distance,cdf\n";
    for (const auto& c : cdf) out << text::format_double(c.distance) << ',' << text::format_double(c.cumulative) << '\n';
}

void write_reduction_rates_csv(std::ostream& out, std::span<const ReductionCell> cells) {
    out << "class,bin,bin_start,bin_end,pairs,reducers,per_pair,users,per_user_mean\n";
    for (const auto& c : cells) {
        const std::string bin = c.all_distances
                                    ? std::string("all")
                                    : fmt::format("{}-{}", text::format_double(c.bin_start),
                                                  text::format_double(c.bin_end));
        out << to_string(c.group) << ',' << bin << ',' << text::format_double(c.bin_start) << ','
            << text::format_double(c.bin_end) << ',' << c.pairs << ',' << c.reducers << ','
            << text::format_double(c.per_pair) << ',' << c.users << ',' << text::format_double(c.per_user_mean)
            << '\n';
    }
}

void write_region_diversity_csv(std::ostream& out, std::span<const RegionDiversityRow> rows) {
    out << "date,inside,outside,total,posts,home_air_quality,regions\n";
    for (const auto& r : rows) {
        std::string codes;
        for (const auto& c : r.regions) {
            if (!codes.empty()) codes += ';';
            codes += c;
        }
        out << format_date(r.day) << ',' << r.inside << ',' << r.outside << ',' << r.inside + r.outside << ','
            << r.posts << ',' << to_code(r.home_air) << ',' << text::quote_csv(codes) << '\n';
    }
}

void write_subdistrict_buckets_csv(std::ostream& out, std::span<const SubdistrictBucketRow> rows) {
    out << "date,one,two,three,four_plus\n";
    for (const auto& r : rows) {
        out << format_date(r.day) << ',' << r.users[0] << ',' << r.users[1] << ',' << r.users[2] << ','
            << r.users[3] << '\n';
    }
}

void write_meta_signals_csv(std::ostream& out, const MetaSignalSeries& s) {
    out << "date,total";
    for (const auto& k : s.keyword_names) out << ',' << text::quote_csv(k);
    for (const auto& k : s.source_names) out << ',' << text::quote_csv(k);
    out << '\n';
    for (const auto& r : s.rows) {
        out << format_date(r.day) << ',' << r.total;
        for (const auto c : r.keyword_counts) out << ',' << c;
        for (const auto c : r.source_counts) out << ',' << c;
        out << '\n';
    }
}

}  // namespace haze
