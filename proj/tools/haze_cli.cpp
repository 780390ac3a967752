// haze: command-line front end for the haze conversation analytics library.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "haze/pipeline.hpp"

namespace {

// Raw flag values. A flag overrides the config file only when given.
struct Flags {
    std::string config, posts, hotspots, regions, air_quality, taxonomies, meta_keywords, scenario, out;
    std::string week_bounds, exclude_weeks, evac_weeks, distance, distance_bins, pairing, bbox;
    std::string home_region, home_province, day_from, day_to;
    std::uint64_t seed = 0;
    std::size_t iterations = 0, tau = 0;
    double rs_threshold = 0.0, bin_width = 0.0, max_malformed = 0.0;
    int utc_offset = 0;
    unsigned threads = 1;
    bool strict = false, all_hotspots = false;
    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const {
        const auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_flags(CLI::App& app, Flags& f) {
    auto& o = f.opts;
    o["config"] = app.add_option("--config", f.config, "JSON run config; flags override it")->check(CLI::ExistingFile);
    o["posts"] = app.add_option("--posts", f.posts, "post records file");
    o["hotspots"] = app.add_option("--hotspots", f.hotspots, "hotspot CSV");
    o["regions"] = app.add_option("--regions", f.regions, "region boundaries (CSV or GeoJSON)");
    o["air-quality"] = app.add_option("--air-quality", f.air_quality, "air-quality CSV (region_code,date,class)");
    o["taxonomies"] = app.add_option("--taxonomies", f.taxonomies, "taxonomy rule file");
    o["meta-keywords"] = app.add_option("--meta-keywords", f.meta_keywords, "keyword sections for meta signals");
    o["scenario"] = app.add_option("--scenario", f.scenario, "synthetic scenario config (synth only)");
    o["out"] = app.add_option("--out", f.out, "output directory (default: out)");
    o["seed"] = app.add_option("--seed", f.seed, "random seed");
    o["iterations"] = app.add_option("--iterations", f.iterations, "null-model iterations (default 1000)");
    o["tau"] = app.add_option("--tau", f.tau, "weekly post threshold, strict > (default 4)");
    o["rs-threshold"] = app.add_option("--rs-threshold", f.rs_threshold, "relative-spread reducer threshold (default 1/3)");
    o["week-bounds"] = app.add_option("--week-bounds", f.week_bounds, "week-class bounds lo,hi (default 100,400)");
    o["exclude-weeks"] = app.add_option("--exclude-weeks", f.exclude_weeks, "ISO weeks to skip, e.g. 2014-W01,2014-W02");
    o["evac-weeks"] = app.add_option("--evac-weeks", f.evac_weeks, "evacuation ISO weeks (default 2014-W11)");
    o["utc-offset-minutes"] = app.add_option("--utc-offset-minutes", f.utc_offset, "local offset east of UTC (default 420)");
    o["distance"] = app.add_option("--distance", f.distance, "haversine or euclid-degrees")
                        ->check(CLI::IsMember({"haversine", "euclid-degrees"}));
    o["strict"] = app.add_flag("--strict", f.strict, "fail on the first malformed record");
    o["threads"] = app.add_option("--threads", f.threads, "worker threads; never changes results")->check(CLI::PositiveNumber);
    o["bin-width"] = app.add_option("--bin-width", f.bin_width, "distance histogram bin width (default 5)");
    o["distance-bins"] = app.add_option("--distance-bins", f.distance_bins, "reduction-rate bin edges (default 0,50,500)");
    o["pairing"] = app.add_option("--pairing", f.pairing, "all or first-baseline")
                       ->check(CLI::IsMember({"all", "first-baseline"}));
    o["bbox"] = app.add_option("--bbox", f.bbox, "post bounding box min_lat,min_lon,max_lat,max_lon");
    o["home-region"] = app.add_option("--home-region", f.home_region, "cohort home region code");
    o["home-province"] = app.add_option("--home-province", f.home_province, "province counted as inside");
    o["day-from"] = app.add_option("--day-from", f.day_from, "first day of cohort outputs (YYYY-MM-DD)");
    o["day-to"] = app.add_option("--day-to", f.day_to, "last day of cohort outputs (YYYY-MM-DD)");
    o["max-malformed"] = app.add_option("--max-malformed", f.max_malformed, "tolerated malformed fraction (default 0.01)");
    o["all-hotspots"] = app.add_flag("--all-hotspots", f.all_hotspots, "keep non-peat and low-confidence hotspots");
}

haze::RunConfig resolve(const Flags& f) {
    haze::RunConfig c;
    c.taxonomies = std::filesystem::path(HAZE_DATA_DIR) / "taxonomies.txt";
    c.meta_keywords = std::filesystem::path(HAZE_DATA_DIR) / "meta_keywords.txt";
    if (f.given("config")) c = haze::apply_config_file(c, f.config);
    if (f.given("posts")) c.posts = f.posts;
    if (f.given("hotspots")) c.hotspots = f.hotspots;
    if (f.given("regions")) c.regions = f.regions;
    if (f.given("air-quality")) c.air_quality = f.air_quality;
    if (f.given("taxonomies")) c.taxonomies = f.taxonomies;
    if (f.given("meta-keywords")) c.meta_keywords = f.meta_keywords;
    if (f.given("scenario")) c.scenario = f.scenario;
    if (f.given("out")) c.out = f.out;
    if (f.given("seed")) c.seed = f.seed;
    if (f.given("iterations")) c.iterations = f.iterations;
    if (f.given("tau")) c.tau = f.tau;
    if (f.given("rs-threshold")) c.rs_threshold = f.rs_threshold;
    if (f.given("week-bounds")) std::tie(c.week_low, c.week_high) = haze::parse_week_bounds(f.week_bounds);
    if (f.given("exclude-weeks")) c.exclude_weeks = haze::parse_week_list(f.exclude_weeks);
    if (f.given("evac-weeks")) c.evac_weeks = haze::parse_week_list(f.evac_weeks);
    if (f.given("utc-offset-minutes")) c.utc_offset_minutes = f.utc_offset;
    if (f.given("distance")) c.distance = haze::parse_distance_mode(f.distance);
    if (f.given("strict")) c.strict = f.strict;
    if (f.given("threads")) c.threads = f.threads;
    if (f.given("bin-width")) c.bin_width = f.bin_width;
    if (f.given("distance-bins")) c.distance_bins = haze::parse_number_list(f.distance_bins);
    if (f.given("pairing")) c.pairing = haze::parse_pairing(f.pairing);
    if (f.given("bbox")) c.bbox = haze::parse_bounding_box(f.bbox);
    if (f.given("home-region")) c.home_region = f.home_region;
    if (f.given("home-province")) c.home_province = f.home_province;
    if (f.given("day-from")) c.day_from = haze::parse_date(f.day_from);
    if (f.given("day-to")) c.day_to = haze::parse_date(f.day_to);
    if (f.given("max-malformed")) c.max_malformed_fraction = f.max_malformed;
    if (f.given("all-hotspots")) c.peatland_only = c.high_confidence_only = false;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Haze conversation analytics: ingest, classify, and relate posts to fire hotspots."};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> subs{
        {"ingest-check", "validate inputs and report row counts"},
        {"classify", "tag posts with taxonomy topics"},
        {"temporal", "weekly series, correlations and week classes"},
        {"spatial", "nearest-hotspot joins, distance distributions and null model"},
        {"mobility", "weekly mobility, reduction rates and region analytics"},
        {"synth", "generate a synthetic scenario with planted ground truth"},
        {"all", "ingest-check, classify, temporal, spatial and mobility"},
    };
    std::vector<Flags> flags(subs.size());
    std::vector<CLI::App*> apps;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        auto* sub = app.add_subcommand(subs[i].first, subs[i].second);
        add_flags(*sub, flags[i]);
        apps.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    for (std::size_t i = 0; i < apps.size(); ++i) {
        if (!apps[i]->parsed()) continue;
        haze::RunConfig cfg;
        try {
            cfg = resolve(flags[i]);
        } catch (const haze::Error& e) {
            std::cerr << "haze: usage error: " << e.what() << '\n';
            return 2;
        }
        return haze::run(haze::parse_subcommand(subs[i].first), cfg, std::cerr);
    }
    return 2;
}
