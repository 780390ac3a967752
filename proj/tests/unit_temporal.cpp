#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "haze/errors.hpp"
#include "haze/random.hpp"
#include "haze/temporal.hpp"
#include "support.hpp"

using namespace haze;
using haze::test::hotspot;
using haze::test::post;
using haze::test::ymd;

namespace {

// Two-pass textbook formula in extended precision.
double textbook_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<long double>(x.size());
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

const std::vector<std::string> kTopics{"a", "b"};

}  // namespace

TEST_CASE("pearson examples") {
    const std::vector<double> x{1, 2, 3, 4}, y{2, 1, 4, 3}, neg{-1, -2, -3, -4};
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(pearson(x, y) - textbook_pearson(x, y)) < 1e-12);
    CHECK(std::abs(pearson(x, y) - 0.6) < 1e-12);
    const std::vector<double> flat{3, 3, 3, 3};
    CHECK_THROWS_AS(pearson(x, flat), DegenerateSeries);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}), std::invalid_argument);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("pearson matches the textbook oracle and its invariances") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> x(52), y(52), xs(52);
        const double a = rng.uniform(0.1, 50.0), b = rng.uniform(-100.0, 100.0);
        for (std::size_t k = 0; k < 52; ++k) {
            x[k] = rng.uniform(0, 1000);
            y[k] = 0.5 * x[k] + rng.uniform(0, 500);
            xs[k] = a * x[k] + b;
        }
        const double r = pearson(x, y);
        CHECK(std::abs(r - textbook_pearson(x, y)) < 1e-12);
        CHECK(std::abs(r - pearson(y, x)) < 1e-12);
        CHECK(std::abs(r - pearson(xs, y)) < 1e-12);
        CHECK(std::abs(r) <= 1.0 + 1e-12);
    }
}

TEST_CASE("weekly series counts") {
    std::vector<FireHotspot> hs;
    for (int i = 0; i < 3; ++i) hs.push_back(hotspot("h" + std::to_string(i), ymd(2014, 1, 28), 0, 101));
    std::vector<GeoPost> posts{post("p1", "u", ymd(2014, 1, 6), 0, 101), post("p2", "u", ymd(2014, 1, 14), 0, 101)};
    const std::vector<TopicMask> masks{0b11, 0b00};
    const auto s = build_weekly_series(hs, posts, masks, kTopics, LocalCalendar{});
    REQUIRE(s.size() == 4);  // weeks 2..5, gap free
    CHECK(s.week(0) == IsoWeek{2014, 2});
    CHECK(s.week(3) == IsoWeek{2014, 5});
    CHECK(s.hotspot_count == std::vector<std::int64_t>{0, 0, 0, 3});
    CHECK(s.topic_counts[0] == std::vector<std::int64_t>{1, 0, 0, 0});
    CHECK(s.topic_counts[1] == std::vector<std::int64_t>{1, 0, 0, 0});
    CHECK(s.total_posts == std::vector<std::int64_t>{1, 1, 0, 0});
    CHECK_THROWS_AS(build_weekly_series({}, {}, {}, kTopics, LocalCalendar{}), EmptyInput);
}

TEST_CASE("weekly series agrees with a hand tally of 50 events") {
    // Events cycle over 5 weeks starting 2014-03-03; post i matches topic a when i % 3 == 0, b when i % 4 == 0.
    std::vector<FireHotspot> hs;
    std::vector<GeoPost> posts;
    std::vector<TopicMask> masks;
    for (int i = 0; i < 25; ++i) {
        const Date d = ymd(2014, 3, 3) + std::chrono::days{(i % 5) * 7 + i % 7};
        hs.push_back(hotspot("h" + std::to_string(i), d, 0, 101));
        posts.push_back(post("p" + std::to_string(i), "u", d, 0, 101));
        masks.push_back((i % 3 == 0 ? 1u : 0u) | (i % 4 == 0 ? 2u : 0u));
    }
    const auto s = build_weekly_series(hs, posts, masks, kTopics, LocalCalendar{});
    REQUIRE(s.size() == 5);
    // Week k holds events i with i % 5 == k: five each.
    CHECK(s.hotspot_count == std::vector<std::int64_t>{5, 5, 5, 5, 5});
    CHECK(s.total_posts == std::vector<std::int64_t>{5, 5, 5, 5, 5});
    // i%3==0 among {0,5,10,15,20}: 0,15 | {1,6,11,16,21}: 6,21 | {2,7,12,17,22}: 12 | {3,8,13,18,23}: 3,18 | {4,9,14,19,24}: 9,24
    CHECK(s.topic_counts[0] == std::vector<std::int64_t>{2, 2, 1, 2, 2});
    // i%4==0: 0,20 | 16 | 12 | 8 | 4,24
    CHECK(s.topic_counts[1] == std::vector<std::int64_t>{2, 1, 1, 1, 2});

    const auto daily = build_weekly_series(hs, posts, masks, kTopics, LocalCalendar{}, Granularity::Day);
    std::int64_t sum = 0;
    for (const auto v : daily.hotspot_count) sum += v;
    CHECK(sum == 25);
}

TEST_CASE("correlation over a linear topic series") {
    std::vector<FireHotspot> hs;
    std::vector<GeoPost> posts;
    std::vector<TopicMask> masks;
    int id = 0;
    for (int w = 0; w < 10; ++w) {
        const Date d = ymd(2014, 1, 6) + std::chrono::days{7 * w};
        const int n = (w * 7) % 10 + 1;
        for (int k = 0; k < n; ++k) hs.push_back(hotspot("h" + std::to_string(id++), d, 0, 101));
        for (int k = 0; k < 3 * n; ++k) {
            posts.push_back(post("p" + std::to_string(id++), "u", d, 0, 101));
            masks.push_back(1);
        }
    }
    const auto s = build_weekly_series(hs, posts, masks, kTopics, LocalCalendar{});
    const auto cells = correlate_series(s, "all", {});
    REQUIRE(cells.size() == 2);
    REQUIRE(cells[0].r);
    CHECK(*cells[0].r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cells[0].n_weeks == 10);
    CHECK_FALSE(cells[1].r);  // topic b is all zeros
    CHECK_FALSE(cells[1].note.empty());

    const auto excluded = correlate_series(s, "all", {IsoWeek{2014, 2}});
    CHECK(excluded[0].n_weeks == 9);
}

TEST_CASE("area filters") {
    std::vector<FireHotspot> hs{hotspot("h1", ymd(2014, 1, 6), 0.5, 101.5), hotspot("h2", ymd(2014, 1, 13), 5, 110),
                                hotspot("h3", ymd(2014, 1, 13), 0.5, 101.5)};
    std::vector<GeoPost> posts{post("p1", "u", ymd(2014, 1, 6), 0.5, 101.5), post("p2", "u", ymd(2014, 1, 13), 0.5, 101.5),
                               post("p3", "u", ymd(2014, 1, 13), 0.5, 101.5)};
    const std::vector<TopicMask> masks{1, 1, 1};
    RegionDef r;
    r.code = "1471";
    r.province = "Riau";
    r.polygon = Polygon({{0, 101}, {0, 102}, {1, 102}, {1, 101}});
    const std::vector<RegionDef> regions{r};
    const std::vector<AreaFilter> areas{{"all", {}, {}, {}}, {"riau", {}, {}, std::string("Riau")}};
    const std::vector<std::string> topics{"a"};
    const auto cells = correlate_all(hs, posts, masks, topics, LocalCalendar{}, areas, regions, {});
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].area == "all");
    CHECK(cells[1].area == "riau");
    // all: hotspots (1,2) vs posts (1,2); riau: hotspots (1,1) is constant.
    REQUIRE(cells[0].r);
    CHECK(*cells[0].r == doctest::Approx(1.0));
    CHECK_FALSE(cells[1].r);
    CHECK(areas[1].matches({0.5, 101.5}, regions));
    CHECK_FALSE(areas[1].matches({5, 110}, regions));
}

TEST_CASE("week class boundaries") {
    CHECK(classify_count(50, 100, 400) == HazeClass::NoHaze);
    CHECK(classify_count(99, 100, 400) == HazeClass::NoHaze);
    CHECK(classify_count(100, 100, 400) == HazeClass::Haze);
    CHECK(classify_count(250, 100, 400) == HazeClass::Haze);
    CHECK(classify_count(400, 100, 400) == HazeClass::Haze);
    CHECK(classify_count(401, 100, 400) == HazeClass::SevereHaze);
}

TEST_CASE("classify weeks") {
    WeeklySeries s;
    s.topics = {};
    for (int w = 0; w < 4; ++w) s.buckets.push_back(iso_week_monday({2014, static_cast<unsigned>(9 + w)}));
    s.hotspot_count = {50, 250, 500, 300};
    s.total_posts = {0, 0, 0, 0};
    WeekClassConfig cfg;
    cfg.excluded = {IsoWeek{2014, 12}};
    cfg.evacuation = {IsoWeek{2014, 11}};
    const auto t = classify_weeks(s, cfg);
    REQUIRE(t.weeks().size() == 4);
    CHECK(t.find({2014, 9})->haze_class == HazeClass::NoHaze);
    CHECK(t.find({2014, 10})->haze_class == HazeClass::Haze);
    CHECK(t.find({2014, 11})->haze_class == HazeClass::SevereHaze);
    CHECK(t.find({2014, 11})->evacuation);
    CHECK_FALSE(t.find({2014, 12})->haze_class);
    CHECK(t.warnings().empty());
    for (const auto& w : t.weeks()) {
        if (w.evacuation) CHECK(w.haze_class != HazeClass::NoHaze);
    }

    cfg.evacuation = {IsoWeek{2014, 9}};
    const auto warned = classify_weeks(s, cfg);
    CHECK_FALSE(warned.find({2014, 9})->evacuation);
    CHECK(warned.warnings().size() == 1);

    cfg.low = 400;
    cfg.high = 400;
    CHECK_THROWS_AS(classify_weeks(s, cfg), ConfigError);
}

TEST_CASE("series csv") {
    std::vector<FireHotspot> hs{hotspot("h1", ymd(2014, 1, 6), 0, 101)};
    std::vector<GeoPost> posts{post("p1", "u", ymd(2014, 1, 13), 0, 101)};
    const std::vector<TopicMask> masks{1};
    const auto s = build_weekly_series(hs, posts, masks, kTopics, LocalCalendar{});
    std::ostringstream out;
    write_series_csv(out, s);
    CHECK(out.str() ==
          "week,bucket_start,hotspots,a,b,total\n"
          "2014-W02,2014-01-06,1,0,0,0\n"
          "2014-W03,2014-01-13,0,1,0,1\n");
}
