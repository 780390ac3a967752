#include "haze/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "haze/errors.hpp"
#include "haze/text.hpp"

namespace haze {

std::optional<std::size_t> WeeklySeries::index_of(Date bucket_start) const {
    const auto it = std::lower_bound(buckets.begin(), buckets.end(), bucket_start);
    if (it == buckets.end() || *it != bucket_start) return std::nullopt;
    return static_cast<std::size_t>(it - buckets.begin());
}

namespace {

Date bucket_of(Date day, Granularity g) {
    return g == Granularity::Day ? day : iso_week_monday(iso_week(day));
}

}  // namespace

WeeklySeries build_weekly_series(std::span<const FireHotspot> hotspots, std::span<const GeoPost> posts,
                                 std::span<const TopicMask> topic_masks, std::span<const std::string> topics,
                                 const LocalCalendar& cal, Granularity granularity) {
    if (hotspots.empty() && posts.empty()) throw EmptyInput("no hotspots and no posts to bucket");
    if (topic_masks.size() != posts.size()) {
        throw std::invalid_argument("topic_masks must align with posts");
    }
    if (topics.size() > kMaxTaxonomies) throw std::invalid_argument("too many topics");

    std::optional<Date> lo, hi;
    const auto extend = [&](Date b) {
        if (!lo || b < *lo) lo = b;
        if (!hi || b > *hi) hi = b;
    };
    for (const auto& h : hotspots) extend(bucket_of(h.date, granularity));
    for (const auto& p : posts) extend(bucket_of(cal.local_day(p.timestamp), granularity));

    WeeklySeries s;
    s.granularity = granularity;
    s.topics.assign(topics.begin(), topics.end());
    const int step = granularity == Granularity::Day ? 1 : 7;
    for (Date b = *lo; b <= *hi; b += std::chrono::days{step}) s.buckets.push_back(b);
    const auto n = s.buckets.size();
    s.hotspot_count.assign(n, 0);
    s.total_posts.assign(n, 0);
    s.topic_counts.assign(topics.size(), std::vector<std::int64_t>(n, 0));

    const auto slot = [&](Date b) {
        return static_cast<std::size_t>((b - *lo).count() / step);
    };
    for (const auto& h : hotspots) ++s.hotspot_count[slot(bucket_of(h.date, granularity))];
    for (std::size_t i = 0; i < posts.size(); ++i) {
        const auto k = slot(bucket_of(cal.local_day(posts[i].timestamp), granularity));
        ++s.total_posts[k];
        for (std::size_t t = 0; t < topics.size(); ++t) {
            if (topic_masks[i] & (TopicMask{1} << t)) ++s.topic_counts[t][k];
        }
    }
    return s;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: series lengths differ");
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least two observations");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateSeries("pearson: first series is constant");
    if (syy == 0.0) throw DegenerateSeries("pearson: second series is constant");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<CorrelationCell> correlate_series(const WeeklySeries& series, const std::string& area,
                                              const std::set<IsoWeek>& excluded) {
    if (series.granularity != Granularity::Week) throw ConfigError("correlations need a weekly series");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!excluded.contains(series.week(i))) keep.push_back(i);
    }
    std::vector<double> hot;
    for (const auto i : keep) hot.push_back(static_cast<double>(series.hotspot_count[i]));

    std::vector<CorrelationCell> out;
    for (std::size_t t = 0; t < series.topics.size(); ++t) {
        CorrelationCell cell{area, series.topics[t], std::nullopt, keep.size(), {}};
        std::vector<double> y;
        for (const auto i : keep) y.push_back(static_cast<double>(series.topic_counts[t][i]));
        try {
            cell.r = pearson(hot, y);
        } catch (const DegenerateSeries& e) {
            cell.note = e.what();
        } catch (const std::invalid_argument& e) {
            cell.note = e.what();
        }
        out.push_back(std::move(cell));
    }
    return out;
}

bool AreaFilter::matches(const GeoPoint& p, std::span<const RegionDef> regions) const {
    if (bbox && !bbox->contains(p)) return false;
    if (region_codes.empty() && !province) return true;
    const auto hit = assign_region(p, regions);
    if (!hit) return false;
    if (province && hit->region->province != *province) return false;
    if (!region_codes.empty() &&
        std::find(region_codes.begin(), region_codes.end(), hit->region->code) == region_codes.end()) {
        return false;
    }
    return true;
}

std::vector<CorrelationCell> correlate_all(std::span<const FireHotspot> hotspots, std::span<const GeoPost> posts,
                                           std::span<const TopicMask> topic_masks,
                                           std::span<const std::string> topics, const LocalCalendar& cal,
                                           std::span<const AreaFilter> areas, std::span<const RegionDef> regions,
                                           const std::set<IsoWeek>& excluded) {
    std::vector<CorrelationCell> out;
    for (const auto& area : areas) {
        std::vector<FireHotspot> hs;
        for (const auto& h : hotspots) {
            if (area.matches(h.location, regions)) hs.push_back(h);
        }
        std::vector<GeoPost> ps;
        std::vector<TopicMask> ms;
        for (std::size_t i = 0; i < posts.size(); ++i) {
            if (area.matches(posts[i].location, regions)) {
                ps.push_back(posts[i]);
                ms.push_back(topic_masks[i]);
            }
        }
        if (hs.empty() && ps.empty()) {
            for (const auto& t : topics) out.push_back({area.name, t, std::nullopt, 0, "no data in area"});
            continue;
        }
        const auto series = build_weekly_series(hs, ps, ms, topics, cal);
        for (auto& c : correlate_series(series, area.name, excluded)) out.push_back(std::move(c));
    }
    return out;
}

std::string_view to_string(HazeClass c) {
    switch (c) {
        case HazeClass::NoHaze:
            return "no-haze";
        case HazeClass::Haze:
            return "haze";
        case HazeClass::SevereHaze:
            return "severe-haze";
    }
    return "?";
}

HazeClass classify_count(std::int64_t n, std::int64_t low, std::int64_t high) {
    if (n < low) return HazeClass::NoHaze;
    if (n > high) return HazeClass::SevereHaze;
    return HazeClass::Haze;
}

WeekClassTable::WeekClassTable(std::vector<WeekInfo> weeks, std::vector<std::string> warnings)
    : weeks_(std::move(weeks)), warnings_(std::move(warnings)) {
    for (std::size_t i = 0; i < weeks_.size(); ++i) index_.emplace(weeks_[i].week, i);
}

const WeekInfo* WeekClassTable::find(IsoWeek w) const {
    const auto it = index_.find(w);
    return it == index_.end() ? nullptr : &weeks_[it->second];
}

WeekClassTable classify_weeks(const WeeklySeries& series, const WeekClassConfig& config) {
    if (config.low >= config.high) {
        throw ConfigError(fmt::format("week-class bounds need low < high, got {},{}", config.low, config.high));
    }
    if (series.granularity != Granularity::Week) throw ConfigError("week classification needs a weekly series");
    std::vector<WeekInfo> weeks;
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < series.size(); ++i) {
        WeekInfo info{series.week(i), series.hotspot_count[i], std::nullopt, false};
        if (!config.excluded.contains(info.week)) {
            info.haze_class = classify_count(info.hotspots, config.low, config.high);
            if (config.evacuation.contains(info.week)) {
                if (info.haze_class == HazeClass::SevereHaze) {
                    info.evacuation = true;
                } else {
                    warnings.push_back(fmt::format("evacuation week {} has {} hotspots ({}); not flagged",
                                                   to_string(info.week), info.hotspots,
                                                   to_string(*info.haze_class)));
                }
            }
        }
        weeks.push_back(info);
    }
    return WeekClassTable(std::move(weeks), std::move(warnings));
}

void write_series_csv(std::ostream& out, const WeeklySeries& s) {
    out << (s.granularity == Granularity::Week ? "week" : "day") << ",bucket_start,hotspots";
    for (const auto& t : s.topics) out << ',' << text::quote_csv(t);
    out << ",total\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << (s.granularity == Granularity::Week ? to_string(s.week(i)) : format_date(s.buckets[i])) << ','
            << format_date(s.buckets[i]) << ',' << s.hotspot_count[i];
        for (const auto& c : s.topic_counts) out << ',' << c[i];
        out << ',' << s.total_posts[i] << '\n';
    }
}

void write_correlations_csv(std::ostream& out, std::span<const CorrelationCell> cells) {
    out << "area,taxonomy,r,n_weeks,note\n";
    for (const auto& c : cells) {
        out << text::quote_csv(c.area) << ',' << text::quote_csv(c.taxonomy) << ','
            << (c.r ? text::format_double(*c.r) : std::string{}) << ',' << c.n_weeks << ','
            << text::quote_csv(c.note) << '\n';
    }
}

void write_week_classes_csv(std::ostream& out, const WeekClassTable& table) {
    out << "week,hotspots,class,evacuation,excluded\n";
    for (const auto& w : table.weeks()) {
        out << to_string(w.week) << ',' << w.hotspots << ','
            << (w.haze_class ? std::string(to_string(*w.haze_class)) : std::string{}) << ','
            << (w.evacuation ? "true" : "false") << ',' << (w.haze_class ? "false" : "true") << '\n';
    }
}

}  // namespace haze
