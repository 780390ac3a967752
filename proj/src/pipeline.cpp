#include "haze/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "haze/random.hpp"
#include "haze/ruledsl.hpp"
#include "haze/spatial.hpp"
#include "haze/synth.hpp"
#include "haze/temporal.hpp"
#include "haze/text.hpp"

namespace haze {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Data failed a quality gate (e.g. too many malformed rows).
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace

std::string_view to_string(Subcommand s) {
    switch (s) {
        case Subcommand::IngestCheck:
            return "ingest-check";
        case Subcommand::Classify:
            return "classify";
        case Subcommand::Temporal:
            return "temporal";
        case Subcommand::Spatial:
            return "spatial";
        case Subcommand::Mobility:
            return "mobility";
        case Subcommand::Synth:
            return "synth";
        case Subcommand::All:
            return "all";
    }
    return "?";
}

Subcommand parse_subcommand(std::string_view text) {
    for (const auto s : {Subcommand::IngestCheck, Subcommand::Classify, Subcommand::Temporal, Subcommand::Spatial,
                         Subcommand::Mobility, Subcommand::Synth, Subcommand::All}) {
        if (text == to_string(s)) return s;
    }
    throw UsageError(fmt::format("unknown subcommand '{}'", text));
}

std::vector<IsoWeek> parse_week_list(std::string_view s) {
    std::vector<IsoWeek> out;
    for (const auto& part : text::split(s, ',')) {
        const auto t = text::trim(part);
        if (t.empty()) continue;
        out.push_back(parse_iso_week(t));
    }
    return out;
}

std::pair<std::int64_t, std::int64_t> parse_week_bounds(std::string_view s) {
    const auto parts = text::split(s, ',');
    if (parts.size() != 2) throw ConfigError(fmt::format("week bounds must be 'lo,hi', got '{}'", s));
    const auto lo = text::parse_int(text::trim(parts[0]));
    const auto hi = text::parse_int(text::trim(parts[1]));
    if (!lo || !hi) throw ConfigError(fmt::format("week bounds must be integers, got '{}'", s));
    if (*lo >= *hi) throw ConfigError(fmt::format("week bounds need lo < hi, got '{}'", s));
    return {*lo, *hi};
}

std::vector<double> parse_number_list(std::string_view s) {
    std::vector<double> out;
    for (const auto& part : text::split(s, ',')) {
        const auto v = text::parse_double(text::trim(part));
        if (!v) throw ConfigError(fmt::format("'{}' is not a number", part));
        out.push_back(*v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config serialization

namespace {

json path_or_null(const std::optional<fs::path>& p) { return p ? json(p->generic_string()) : json(nullptr); }

json weeks_json(const std::vector<IsoWeek>& weeks) {
    json a = json::array();
    for (const auto& w : weeks) a.push_back(to_string(w));
    return a;
}

std::vector<IsoWeek> weeks_from(const json& v) {
    if (v.is_string()) return parse_week_list(v.get<std::string>());
    std::vector<IsoWeek> out;
    for (const auto& w : v) out.push_back(parse_iso_week(w.get<std::string>()));
    return out;
}

}  // namespace

std::string to_json(const RunConfig& c) {
    json j;
    j["posts"] = path_or_null(c.posts);
    j["hotspots"] = path_or_null(c.hotspots);
    j["regions"] = path_or_null(c.regions);
    j["air_quality"] = path_or_null(c.air_quality);
    j["taxonomies"] = c.taxonomies.generic_string();
    j["meta_keywords"] = path_or_null(c.meta_keywords);
    j["scenario"] = path_or_null(c.scenario);
    j["out"] = c.out.generic_string();
    j["utc_offset_minutes"] = c.utc_offset_minutes;
    j["distance"] = to_string(c.distance);
    j["strict"] = c.strict;
    j["max_malformed_fraction"] = c.max_malformed_fraction;
    j["peatland_only"] = c.peatland_only;
    j["high_confidence_only"] = c.high_confidence_only;
    j["bbox"] = c.bbox ? json::array({c.bbox->min_lat, c.bbox->min_lon, c.bbox->max_lat, c.bbox->max_lon})
                       : json(nullptr);
    j["week_bounds"] = json::array({c.week_low, c.week_high});
    j["exclude_weeks"] = weeks_json(c.exclude_weeks);
    j["evac_weeks"] = weeks_json(c.evac_weeks);
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    j["iterations"] = c.iterations;
    j["bin_width"] = c.bin_width;
    j["tau"] = c.tau;
    j["rs_threshold"] = c.rs_threshold;
    j["distance_bins"] = c.distance_bins;
    j["pairing"] = to_string(c.pairing);
    j["home_region"] = c.home_region ? json(*c.home_region) : json(nullptr);
    j["home_province"] = c.home_province ? json(*c.home_province) : json(nullptr);
    j["day_from"] = c.day_from ? json(format_date(*c.day_from)) : json(nullptr);
    j["day_to"] = c.day_to ? json(format_date(*c.day_to)) : json(nullptr);
    return j.dump(2) + "\n";
}

RunConfig apply_config_json(RunConfig c, std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto opt_path = [](const json& v) -> std::optional<fs::path> {
        if (v.is_null()) return std::nullopt;
        return fs::path(v.get<std::string>());
    };
    const auto opt_string = [](const json& v) -> std::optional<std::string> {
        if (v.is_null()) return std::nullopt;
        return v.get<std::string>();
    };
    const auto opt_date = [](const json& v) -> std::optional<Date> {
        if (v.is_null()) return std::nullopt;
        return parse_date(v.get<std::string>());
    };
    const std::map<std::string, std::function<void(const json&)>> setters{
        {"posts", [&](const json& v) { c.posts = opt_path(v); }},
        {"hotspots", [&](const json& v) { c.hotspots = opt_path(v); }},
        {"regions", [&](const json& v) { c.regions = opt_path(v); }},
        {"air_quality", [&](const json& v) { c.air_quality = opt_path(v); }},
        {"taxonomies", [&](const json& v) { c.taxonomies = v.get<std::string>(); }},
        {"meta_keywords", [&](const json& v) { c.meta_keywords = opt_path(v); }},
        {"scenario", [&](const json& v) { c.scenario = opt_path(v); }},
        {"out", [&](const json& v) { c.out = v.get<std::string>(); }},
        {"utc_offset_minutes", [&](const json& v) { c.utc_offset_minutes = v.get<int>(); }},
        {"distance", [&](const json& v) { c.distance = parse_distance_mode(v.get<std::string>()); }},
        {"strict", [&](const json& v) { c.strict = v.get<bool>(); }},
        {"max_malformed_fraction", [&](const json& v) { c.max_malformed_fraction = v.get<double>(); }},
        {"peatland_only", [&](const json& v) { c.peatland_only = v.get<bool>(); }},
        {"high_confidence_only", [&](const json& v) { c.high_confidence_only = v.get<bool>(); }},
        {"bbox",
         [&](const json& v) {
             if (v.is_null()) {
                 c.bbox.reset();
             } else if (v.is_string()) {
                 c.bbox = parse_bounding_box(v.get<std::string>());
             } else {
                 const auto a = v.get<std::vector<double>>();
                 if (a.size() != 4) throw ConfigError("bbox needs four numbers");
                 c.bbox = BoundingBox{a[0], a[1], a[2], a[3]};
             }
         }},
        {"week_bounds",
         [&](const json& v) {
             if (v.is_string()) {
                 std::tie(c.week_low, c.week_high) = parse_week_bounds(v.get<std::string>());
             } else {
                 const auto a = v.get<std::vector<std::int64_t>>();
                 if (a.size() != 2) throw ConfigError("week_bounds needs two numbers");
                 c.week_low = a[0];
                 c.week_high = a[1];
             }
         }},
        {"exclude_weeks", [&](const json& v) { c.exclude_weeks = weeks_from(v); }},
        {"evac_weeks", [&](const json& v) { c.evac_weeks = weeks_from(v); }},
        {"seed",
         [&](const json& v) {
             if (v.is_null()) {
                 c.seed.reset();
             } else {
                 c.seed = v.get<std::uint64_t>();
             }
         }},
        {"iterations", [&](const json& v) { c.iterations = v.get<std::size_t>(); }},
        {"bin_width", [&](const json& v) { c.bin_width = v.get<double>(); }},
        {"tau", [&](const json& v) { c.tau = v.get<std::size_t>(); }},
        {"rs_threshold", [&](const json& v) { c.rs_threshold = v.get<double>(); }},
        {"distance_bins", [&](const json& v) { c.distance_bins = v.get<std::vector<double>>(); }},
        {"pairing", [&](const json& v) { c.pairing = parse_pairing(v.get<std::string>()); }},
        {"home_region", [&](const json& v) { c.home_region = opt_string(v); }},
        {"home_province", [&](const json& v) { c.home_province = opt_string(v); }},
        {"day_from", [&](const json& v) { c.day_from = opt_date(v); }},
        {"day_to", [&](const json& v) { c.day_to = opt_date(v); }},
        {"threads", [&](const json& v) { c.threads = v.get<unsigned>(); }},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
        try {
            it->second(value);
        } catch (const json::exception& e) {
            throw ConfigError(fmt::format("bad value for config key '{}': {}", key, e.what()));
        } catch (const Error& e) {
            throw ConfigError(fmt::format("bad value for config key '{}': {}", key, e.what()));
        }
    }
    if (c.week_low >= c.week_high) throw ConfigError("week bounds need lo < hi");
    return c;
}

RunConfig apply_config_file(RunConfig base, const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return apply_config_json(std::move(base), content);
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string sha256_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read {}", file.string()));
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

// ---------------------------------------------------------------------------
// Run session

namespace {

class Session {
public:
    Session(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log), cal_{cfg.utc_offset_minutes} {}

    const RunConfig& cfg() const { return cfg_; }
    const LocalCalendar& cal() const { return cal_; }
    ParseMode mode() const { return cfg_.strict ? ParseMode::Strict : ParseMode::Lenient; }

    void warn(std::string msg) {
        log_ << "haze: warning: " << msg << '\n';
        warnings_.push_back(std::move(msg));
    }

    template <typename F>
    void write(const std::string& name, F&& body) {
        const fs::path path = cfg_.out / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(fmt::format("cannot write {}", path.string()));
        body(out);
        out.close();
        if (!out) throw Error(fmt::format("failed writing {}", path.string()));
        files_.insert(name);
    }
    void record(const std::string& name) { files_.insert(name); }

    static const fs::path& need(const std::optional<fs::path>& p, std::string_view flag) {
        if (!p) throw UsageError(fmt::format("this subcommand needs {}", flag));
        return *p;
    }

    const HotspotLoad& hotspots() {
        if (!hotspots_) {
            hotspots_ = load_hotspots(need(cfg_.hotspots, "--hotspots"),
                                      HotspotFilter{cfg_.peatland_only, cfg_.high_confidence_only}, mode());
        }
        return *hotspots_;
    }
    const PostLoad& posts() {
        if (!posts_) posts_ = load_posts(need(cfg_.posts, "--posts"), mode(), cfg_.bbox);
        return *posts_;
    }
    const std::vector<Taxonomy>& taxonomies() {
        if (!taxonomies_) taxonomies_ = load_taxonomies(cfg_.taxonomies);
        return *taxonomies_;
    }
    std::vector<std::string> topic_names() {
        std::vector<std::string> out;
        for (const auto& t : taxonomies()) out.push_back(t.name);
        return out;
    }
    const std::vector<TopicMask>& masks() {
        if (!masks_) {
            masks_.emplace();
            for (const auto& p : posts().posts) masks_->push_back(classify_mask(TokenizedText(p.text), taxonomies()));
        }
        return *masks_;
    }
    const std::vector<RegionDef>* regions() {
        if (!cfg_.regions) return nullptr;
        if (!regions_) regions_ = load_regions(*cfg_.regions);
        return &*regions_;
    }
    const AirQualityTable* air_quality() {
        if (!cfg_.air_quality) return nullptr;
        if (!air_) air_ = load_air_quality(*cfg_.air_quality);
        return &*air_;
    }

    void check_quality() {
        if (cfg_.hotspots) {
            const auto& r = hotspots().report;
            const double f = r.total ? static_cast<double>(r.malformed) / static_cast<double>(r.total) : 0.0;
            if (f > cfg_.max_malformed_fraction) {
                throw ValidationError(fmt::format("{}: {} of {} hotspot rows malformed ({:.2f}% > {:.2f}%)",
                                                  cfg_.hotspots->string(), r.malformed, r.total, 100.0 * f,
                                                  100.0 * cfg_.max_malformed_fraction));
            }
        }
        if (cfg_.posts) {
            const auto& r = posts().report;
            if (r.malformed_fraction() > cfg_.max_malformed_fraction) {
                throw ValidationError(fmt::format("{}: {} of {} post records malformed ({:.2f}% > {:.2f}%)",
                                                  cfg_.posts->string(), r.malformed, r.total,
                                                  100.0 * r.malformed_fraction(),
                                                  100.0 * cfg_.max_malformed_fraction));
            }
        }
    }

    WeekClassTable week_classes() {
        const auto series = build_weekly_series(hotspots().hotspots, posts().posts, masks(), topic_names(), cal_);
        WeekClassConfig wc;
        wc.low = cfg_.week_low;
        wc.high = cfg_.week_high;
        wc.excluded = {cfg_.exclude_weeks.begin(), cfg_.exclude_weeks.end()};
        wc.evacuation = {cfg_.evac_weeks.begin(), cfg_.evac_weeks.end()};
        auto table = classify_weeks(series, wc);
        if (!week_warnings_done_) {
            for (const auto& w : table.warnings()) warn(w);
            week_warnings_done_ = true;
        }
        return table;
    }

    void finish(Subcommand sub) {
        write("resolved_config.json", [&](std::ostream& o) { o << to_json(cfg_); });
        json m;
        m["subcommand"] = to_string(sub);
        json files = json::array();
        for (const auto& name : files_) {
            const auto path = cfg_.out / name;
            files.push_back({{"path", name}, {"bytes", fs::file_size(path)}, {"sha256", sha256_hex(path)}});
        }
        m["files"] = files;
        m["warnings"] = warnings_;
        const auto path = cfg_.out / "run_manifest.json";
        std::ofstream out(path, std::ios::binary);
        out << m.dump(2) << '\n';
        if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    }

private:
    const RunConfig& cfg_;
    std::ostream& log_;
    LocalCalendar cal_;
    std::vector<std::string> warnings_;
    std::set<std::string> files_;
    std::optional<HotspotLoad> hotspots_;
    std::optional<PostLoad> posts_;
    std::optional<std::vector<Taxonomy>> taxonomies_;
    std::optional<std::vector<TopicMask>> masks_;
    std::optional<std::vector<RegionDef>> regions_;
    std::optional<AirQualityTable> air_;
    bool week_warnings_done_ = false;
};

// ---------------------------------------------------------------------------
// Subcommands

// Writes the report; returns false when a quality gate fails.
bool do_ingest_check(Session& s) {
    const auto& cfg = s.cfg();
    if (!cfg.posts && !cfg.hotspots && !cfg.regions && !cfg.air_quality) {
        throw UsageError("ingest-check needs at least one of --posts, --hotspots, --regions, --air-quality");
    }
    json j;
    if (cfg.hotspots) {
        const auto& r = s.hotspots().report;
        j["hotspots"] = {{"total", r.total},
                         {"malformed", r.malformed},
                         {"after_peat_filter", r.after_peat_filter},
                         {"after_confidence_filter", r.after_confidence_filter}};
    }
    if (cfg.posts) {
        const auto& r = s.posts().report;
        j["posts"] = {{"total", r.total},
                      {"malformed", r.malformed},
                      {"out_of_bbox", r.out_of_bbox},
                      {"accepted", r.accepted},
                      {"malformed_fraction", r.malformed_fraction()}};
    }
    if (const auto* regions = s.regions()) {
        std::size_t subs = 0;
        for (const auto& r : *regions) subs += r.subdistricts.size();
        j["regions"] = {{"regions", regions->size()}, {"subdistricts", subs}};
    }
    if (const auto* aq = s.air_quality()) j["air_quality"] = {{"records", aq->size()}};
    json tax = json::array();
    for (const auto& t : s.taxonomies()) {
        tax.push_back({{"name", t.name},
                       {"rules", t.rules.size()},
                       {"keywords", t.keyword_count()},
                       {"expanded_rules", t.expanded_rule_count()}});
    }
    j["taxonomies"] = tax;
    j["max_malformed_fraction"] = cfg.max_malformed_fraction;
    s.write("ingest_report.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    return true;
}

void do_classify(Session& s) {
    const auto& posts = s.posts().posts;
    const auto& masks = s.masks();
    const auto names = s.topic_names();
    std::vector<std::size_t> counts(names.size(), 0);
    s.write("classified.csv", [&](std::ostream& o) {
        o << "post_id,topics\n";
        for (std::size_t i = 0; i < posts.size(); ++i) {
            std::string topics;
            for (std::size_t t = 0; t < names.size(); ++t) {
                if (masks[i] & (TopicMask{1} << t)) {
                    if (!topics.empty()) topics += ';';
                    topics += names[t];
                    ++counts[t];
                }
            }
            o << text::quote_csv(posts[i].id) << ',' << text::quote_csv(topics) << '\n';
        }
    });
    s.write("topic_counts.csv", [&](std::ostream& o) {
        o << "taxonomy,keywords,expanded_rules,posts\n";
        for (std::size_t t = 0; t < names.size(); ++t) {
            const auto& tax = s.taxonomies()[t];
            o << text::quote_csv(names[t]) << ',' << tax.keyword_count() << ',' << tax.expanded_rule_count() << ','
              << counts[t] << '\n';
        }
        o << "all," << ",," << posts.size() << '\n';
    });
}

void do_temporal(Session& s) {
    const auto& cfg = s.cfg();
    const auto& hotspots = s.hotspots().hotspots;
    const auto& posts = s.posts().posts;
    if (posts.empty()) throw EmptyInput(fmt::format("{}: no posts accepted; correlations need a post series", cfg.posts->string()));
    if (hotspots.empty()) {
        throw EmptyInput(fmt::format("{}: no hotspots left after filtering; correlations need a hotspot series",
                                     cfg.hotspots->string()));
    }
    const auto names = s.topic_names();
    const auto weekly = build_weekly_series(hotspots, posts, s.masks(), names, s.cal());
    const auto daily = build_weekly_series(hotspots, posts, s.masks(), names, s.cal(), Granularity::Day);
    s.write("weekly_series.csv", [&](std::ostream& o) { write_series_csv(o, weekly); });
    s.write("daily_series.csv", [&](std::ostream& o) { write_series_csv(o, daily); });

    std::vector<AreaFilter> areas{{"all", std::nullopt, {}, std::nullopt}};
    std::span<const RegionDef> regions;
    if (const auto* r = s.regions()) {
        regions = *r;
        std::set<std::string> provinces;
        for (const auto& def : *r) provinces.insert(def.province);
        for (const auto& p : provinces) areas.push_back({p, std::nullopt, {}, p});
    }
    const std::set<IsoWeek> excluded(cfg.exclude_weeks.begin(), cfg.exclude_weeks.end());
    const auto cells = correlate_all(hotspots, posts, s.masks(), names, s.cal(), areas, regions, excluded);
    s.write("correlations.csv", [&](std::ostream& o) { write_correlations_csv(o, cells); });
    const auto table = s.week_classes();
    s.write("week_classes.csv", [&](std::ostream& o) { write_week_classes_csv(o, table); });
}

void do_spatial(Session& s) {
    const auto& cfg = s.cfg();
    const auto& hotspots = s.hotspots().hotspots;
    const auto& posts = s.posts().posts;
    const auto& masks = s.masks();
    const auto names = s.topic_names();
    const auto hot_index = SpatialDayIndex::of_hotspots(hotspots, cfg.distance);

    std::vector<std::string> topics{"all"};
    topics.insert(topics.end(), names.begin(), names.end());

    std::ostringstream popularity_csv, frequency_csv, coverage_csv, summary_csv;
    coverage_csv << "topic,posts,posts_with_hotspot_day,posts_excluded,hotspots_with_topic_day,hotspots_excluded,note\n";
    summary_csv << "topic,seed,iterations,real_n,real_mean,real_median,real_stdev,null_mean,null_median,"
                   "null_stdev_across_iterations,null_stdev_pooled\n";
    for (std::size_t t = 0; t < topics.size(); ++t) {
        const auto& topic = topics[t];
        std::vector<GeoPost> subset;
        std::vector<std::uint8_t> in_topic(posts.size(), 0);
        for (std::size_t i = 0; i < posts.size(); ++i) {
            if (t == 0 || (masks[i] & (TopicMask{1} << (t - 1)))) {
                in_topic[i] = 1;
                subset.push_back(posts[i]);
            }
        }
        const auto pop = popularity(subset, hotspots, hot_index, s.cal());
        write_popularity_csv(popularity_csv, topic, hotspots, pop, t == 0);
        write_popularity_frequency_csv(frequency_csv, topic, pop, t == 0);

        std::string note;
        std::size_t hot_with = 0, hot_without = hotspots.size();
        try {
            const auto d = tweet_to_hotspot_distribution(subset, hot_index, s.cal(), cfg.bin_width);
            s.write(fmt::format("distance_pdf_{}.csv", topic), [&](std::ostream& o) { write_distance_pdf_csv(o, d); });
        } catch (const EmptyDistribution& e) {
            note += fmt::format("tweet-to-hotspot: {}; ", e.what());
        }
        try {
            const auto d = hotspot_to_tweet_distribution(subset, hotspots, s.cal(), cfg.distance, cfg.bin_width);
            hot_with = d.samples.size();
            hot_without = d.excluded;
            s.write(fmt::format("hotspot_distance_pdf_{}.csv", topic),
                    [&](std::ostream& o) { write_distance_pdf_csv(o, d); });
        } catch (const EmptyDistribution& e) {
            note += fmt::format("hotspot-to-tweet: {}; ", e.what());
        }
        const std::uint64_t seed = derive_seed({cfg.seed.value_or(0), t});
        try {
            NullModelConfig nc{cfg.iterations, seed, cfg.threads, cfg.distance};
            const auto r = null_model(posts, in_topic, hotspots, s.cal(), nc);
            s.write(fmt::format("null_model_{}.csv", topic), [&](std::ostream& o) { write_null_model_csv(o, r); });
            summary_csv << text::quote_csv(topic) << ',' << seed << ',' << r.iterations.size() << ',' << r.real.n
                        << ',' << text::format_double(r.real.mean) << ',' << text::format_double(r.real.median)
                        << ',' << text::format_double(r.real.stdev) << ',' << text::format_double(r.mean) << ','
                        << text::format_double(r.median) << ',' << text::format_double(r.stdev_across_iterations)
                        << ',' << text::format_double(r.stdev_pooled) << '\n';
        } catch (const EmptyDistribution& e) {
            note += fmt::format("null model: {}; ", e.what());
        }
        if (!note.empty()) {
            note.resize(note.size() - 2);
            s.warn(fmt::format("topic {}: {}", topic, note));
        }
        coverage_csv << text::quote_csv(topic) << ',' << subset.size() << ',' << pop.matched_posts << ','
                     << pop.unmatched_posts << ',' << hot_with << ',' << hot_without << ','
                     << text::quote_csv(note) << '\n';
    }
    s.write("popularity.csv", [&](std::ostream& o) { o << popularity_csv.str(); });
    s.write("popularity_frequency.csv", [&](std::ostream& o) { o << frequency_csv.str(); });
    s.write("spatial_coverage.csv", [&](std::ostream& o) { o << coverage_csv.str(); });
    s.write("null_model_summary.csv", [&](std::ostream& o) { o << summary_csv.str(); });
}

void do_mobility(Session& s) {
    const auto& cfg = s.cfg();
    const auto& posts = s.posts().posts;
    if (posts.empty()) throw EmptyInput(fmt::format("{}: no posts accepted", cfg.posts->string()));
    const auto table = s.week_classes();
    s.write("week_classes.csv", [&](std::ostream& o) { write_week_classes_csv(o, table); });

    const auto profiles = build_profiles(posts, s.cal(), cfg.tau, cfg.distance);
    s.write("profiles.csv", [&](std::ostream& o) { write_profiles_csv(o, profiles); });
    const auto pairs = build_pairs(profiles, table, cfg.pairing, cfg.distance);
    s.write("pairs.csv", [&](std::ostream& o) { write_pairs_csv(o, pairs); });
    for (const auto g : kWeekGroups) {
        try {
            const auto cdf = distance_cdf(pairs, g);
            s.write(fmt::format("distance_cdf_{}.csv", to_string(g)),
                    [&](std::ostream& o) { write_distance_cdf_csv(o, cdf); });
        } catch (const EmptyClass& e) {
            s.warn(e.what());
        }
    }
    const auto cells = reduction_rate(pairs, ReductionConfig{cfg.rs_threshold, cfg.distance_bins});
    s.write("reduction_rates.csv", [&](std::ostream& o) { write_reduction_rates_csv(o, cells); });

    const auto* regions = s.regions();
    if (!regions) {
        s.warn("no --regions given; home-region, region diversity, sub-district and meta-signal outputs skipped");
        return;
    }
    const auto homes = home_regions(posts, *regions);
    s.write("home_regions.csv", [&](std::ostream& o) {
        o << "user_id,region\n";
        for (const auto& [user, code] : homes) o << text::quote_csv(user) << ',' << code << '\n';
    });
    std::string home = cfg.home_region.value_or("");
    if (home.empty()) {
        std::map<std::string, std::size_t> residents;
        for (const auto& [user, code] : homes) ++residents[code];
        std::size_t best = 0;
        for (const auto& [code, n] : residents) {
            if (n > best) {
                best = n;
                home = code;
            }
        }
        if (home.empty()) {
            s.warn("no user has a home region; cohort outputs skipped");
            return;
        }
    }
    const auto region_it = std::find_if(regions->begin(), regions->end(), [&](const RegionDef& r) { return r.code == home; });
    if (region_it == regions->end()) throw ConfigError(fmt::format("home region {} is not in {}", home, cfg.regions->string()));
    const std::string province = cfg.home_province.value_or(region_it->province);

    std::vector<GeoPost> cohort;
    for (const auto& p : posts) {
        const auto it = homes.find(p.user_id);
        if (it != homes.end() && it->second == home) cohort.push_back(p);
    }
    const DayRange range{cfg.day_from, cfg.day_to};
    const auto diversity = region_diversity(cohort, *regions, province, s.cal(), range, s.air_quality(), home);
    s.write("region_diversity.csv", [&](std::ostream& o) { write_region_diversity_csv(o, diversity); });
    try {
        const auto buckets = subdistrict_visit_buckets(cohort, *region_it, s.cal(), range);
        s.write("subdistrict_buckets.csv", [&](std::ostream& o) { write_subdistrict_buckets_csv(o, buckets); });
    } catch (const MissingSubdistricts& e) {
        s.warn(e.what());
    }
    MetaSignalConfig mc;
    if (cfg.meta_keywords) mc.keywords = load_taxonomies(*cfg.meta_keywords);
    const auto meta = meta_signals(cohort, mc, s.cal(), range);
    s.write("meta_signals.csv", [&](std::ostream& o) { write_meta_signals_csv(o, meta); });
}

void do_synth(Session& s) {
    const auto& cfg = s.cfg();
    synth::ScenarioConfig sc = cfg.scenario ? synth::load_scenario_config(*cfg.scenario) : synth::ScenarioConfig{};
    if (cfg.seed) sc.seed = *cfg.seed;
    const auto scenario = synth::generate(sc);
    for (const auto& p : synth::write_scenario(scenario, cfg.out)) s.record(p.filename().string());
}

}  // namespace

int run(Subcommand sub, const RunConfig& cfg, std::ostream& log) {
    try {
        std::error_code ec;
        fs::create_directories(cfg.out, ec);
        if (ec) throw Error(fmt::format("cannot create output directory {}: {}", cfg.out.string(), ec.message()));
        Session s(cfg, log);
        bool ok = true;
        switch (sub) {
            case Subcommand::IngestCheck:
                do_ingest_check(s);
                try {
                    s.check_quality();
                } catch (const ValidationError& e) {
                    log << "haze: error: " << e.what() << '\n';
                    ok = false;
                }
                break;
            case Subcommand::Classify:
                s.check_quality();
                do_classify(s);
                break;
            case Subcommand::Temporal:
                s.check_quality();
                do_temporal(s);
                break;
            case Subcommand::Spatial:
                s.check_quality();
                do_spatial(s);
                break;
            case Subcommand::Mobility:
                s.check_quality();
                do_mobility(s);
                break;
            case Subcommand::Synth:
                do_synth(s);
                break;
            case Subcommand::All:
                Session::need(cfg.posts, "--posts");
                Session::need(cfg.hotspots, "--hotspots");
                do_ingest_check(s);
                s.check_quality();
                do_classify(s);
                do_temporal(s);
                do_spatial(s);
                do_mobility(s);
                break;
        }
        s.finish(sub);
        return ok ? 0 : 1;
    } catch (const UsageError& e) {
        log << "haze: usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        log << "haze: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        log << "haze: error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace haze
