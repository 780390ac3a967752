#include <doctest.h>

#include <cctype>
#include <set>
#include <string>
#include <vector>

#include "haze/errors.hpp"
#include "haze/random.hpp"
#include "haze/ruledsl.hpp"
#include "haze/synth.hpp"

using namespace haze;

namespace {

RuleExpr P(std::initializer_list<std::string> t) { return RuleExpr::phrase(t); }

const std::vector<Taxonomy>& shipped() {
    static const auto t = load_taxonomies(HAZE_DATA_DIR "/taxonomies.txt");
    return t;
}

std::set<std::string> classify_text(std::string_view text) {
    GeoPost p;
    p.text = std::string(text);
    const auto names = classify(p, shipped());
    return {names.begin(), names.end()};
}

std::size_t error_position(std::string_view src) {
    try {
        parse_rule(src);
    } catch (const SyntaxError& e) {
        return e.position();
    }
    return std::string::npos;
}

}  // namespace

TEST_CASE("parse examples") {
    CHECK(parse_rule("( A || B ) && C") == RuleExpr::all_of({RuleExpr::any_of({P({"a"}), P({"b"})}), P({"c"})}));
    CHECK(parse_rule("kabut asap") == P({"kabut", "asap"}));
    CHECK(parse_rule("A && B || C") == RuleExpr::any_of({RuleExpr::all_of({P({"a"}), P({"b"})}), P({"c"})}));
    CHECK(parse_rule("A OR B") == parse_rule("A || B"));
    CHECK(parse_rule("#SaveRiau") == P({"#saveriau"}));
    CHECK(parse_rule("paru-paru") == P({"paru-paru"}));
    CHECK(parse_rule("a || b || c").children().size() == 3);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_rule(""), SyntaxError);
    CHECK(error_position("(a || b") == 0);
    CHECK(error_position("a || b)") == 6);
    CHECK(error_position("a &&") != std::string::npos);
    CHECK(error_position("&& a") == 0);
    CHECK(error_position("a || || b") == 5);
    CHECK(error_position("()") == 1);
    CHECK(error_position("a && ( )") != std::string::npos);
}

TEST_CASE("matching semantics") {
    CHECK(matches(parse_rule("(bencana||badai) && asap"), "badai asap melanda"));
    CHECK(matches(parse_rule("#saveriau"), "ayo #SaveRiau sekarang"));
    CHECK_FALSE(matches(parse_rule("kabut asap"), "asap kabut"));
    CHECK_FALSE(matches(parse_rule("asap"), "asapnya tebal"));
    CHECK(matches(parse_rule("asap"), "asap, tebal!"));
    CHECK(matches(parse_rule("paru-paru"), "sakit paru-paru"));
    CHECK_FALSE(matches(parse_rule("paru"), "sakit paru-paru"));
}

TEST_CASE("tokenizer") {
    CHECK(tokenize("Day #3 off, because of HAZE!") ==
          std::vector<std::string>{"day", "#3", "off", "because", "of", "haze"});
    CHECK(tokenize("  ").empty());
    CHECK(tokenize("caf\xc3\xa9 asap") == std::vector<std::string>{"caf\xc3\xa9", "asap"});
}

TEST_CASE("classify examples") {
    CHECK(classify_text("Day #3 off because of Haze") == std::set<std::string>{"haze-general"});
    CHECK(classify_text("selamat pagi").empty());
    CHECK(classify_text("#prayforriau pakai masker ya") == std::set<std::string>{"haze-hashtag", "haze-health"});
}

TEST_CASE("shipped taxonomies") {
    const auto& t = shipped();
    REQUIRE(t.size() == 4);
    CHECK(t[0].name == kHazeGeneral);
    CHECK(t[1].name == kHazeHashtag);
    CHECK(t[2].name == kHazeImpact);
    CHECK(t[3].name == kHazeHealth);
    // Distinct phrase leaves and disjunctive-normal-form clause counts of the file as transcribed.
    CHECK(t[0].keyword_count() == 29);
    CHECK(t[1].keyword_count() == 5);
    CHECK(t[2].keyword_count() == 23);
    CHECK(t[3].keyword_count() == 30);
    CHECK(t[0].expanded_rule_count() == 53);
    CHECK(t[1].expanded_rule_count() == 5);
    CHECK(t[2].expanded_rule_count() == 39);
    CHECK(t[3].expanded_rule_count() == 39);
}

TEST_CASE("every shipped rule round-trips through its text form") {
    for (const auto& tax : shipped()) {
        for (const auto& r : tax.rules) {
            const auto text = to_string(r);
            CHECK(parse_rule(text) == r);
            CHECK(to_string(parse_rule(text)) == text);
        }
    }
}

TEST_CASE("taxonomy file format") {
    const auto t = parse_taxonomies("# comment\n[a]\n#tag\n\n# another\nx && y\n[b]\nz\n");
    REQUIRE(t.size() == 2);
    CHECK(t[0].rules.size() == 2);
    CHECK(t[0].rules[0] == P({"#tag"}));
    CHECK_THROWS_AS(parse_taxonomies("x\n[a]\ny\n"), SyntaxError);
    CHECK_THROWS_AS(parse_taxonomies("[a]\n[b]\nx\n"), SyntaxError);
    CHECK_THROWS_AS(parse_taxonomies("[a]\nx\n[a]\ny\n"), SyntaxError);
    try {
        parse_taxonomies("[a]\nx\n(y && \n");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("synth templates hit exactly their own taxonomy") {
    for (const auto& tax : shipped()) {
        for (const auto s : synth::topic_sentences(tax.name)) {
            INFO(s);
            CHECK(classify_text(s) == std::set<std::string>{tax.name});
        }
    }
    for (const auto s : synth::background_sentences()) {
        INFO(s);
        CHECK(classify_text(s).empty());
    }
}

TEST_CASE("OR-extension never turns a match off") {
    Rng rng(5);
    const std::vector<std::string> words{"asap", "kabut", "api", "hutan", "rumah", "sakit"};
    for (int i = 0; i < 300; ++i) {
        std::string text;
        for (int k = 0; k < 5; ++k) text += words[rng.below(words.size())] + " ";
        const auto base = parse_rule(words[rng.below(words.size())] + " && " + words[rng.below(words.size())]);
        const auto extended = RuleExpr::any_of({base, P({words[rng.below(words.size())]})});
        if (matches(base, text)) CHECK(matches(extended, text));
    }
}
