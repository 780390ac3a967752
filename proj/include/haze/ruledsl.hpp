#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "haze/model.hpp"

namespace haze {

/// Boolean keyword rule: phrases combined with AND / OR.
///
/// Grammar (OR binds loosest, `OR` and `||` are synonyms):
///
///     expr    := andExpr { ("||" | "OR") andExpr }
///     andExpr := term { "&&" term }
///     term    := "(" expr ")" | phrase
///     phrase  := word { word }
///
/// Words are normalized with the same tokenizer used for post text, so a rule
/// word like `Paru-Paru` becomes the single token `paru-paru`.
class RuleExpr {
public:
    enum class Kind { Phrase, And, Or };

    static RuleExpr phrase(std::vector<std::string> tokens);
    static RuleExpr all_of(std::vector<RuleExpr> children);
    static RuleExpr any_of(std::vector<RuleExpr> children);

    Kind kind() const noexcept { return kind_; }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::vector<RuleExpr>& children() const noexcept { return children_; }

    friend bool operator==(const RuleExpr&, const RuleExpr&) = default;

private:
    RuleExpr() = default;

    Kind kind_ = Kind::Phrase;
    std::vector<std::string> tokens_;
    std::vector<RuleExpr> children_;
};

/// Throws SyntaxError carrying the 0-based byte offset of the offending input.
RuleExpr parse_rule(std::string_view source);

/// Canonical text form; parse_rule(to_string(r)) == r.
std::string to_string(const RuleExpr& rule);

/// Lowercases ASCII and splits on every character that is not a letter, digit,
/// `#` or `-`. Bytes >= 0x80 count as letters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

class TokenizedText {
public:
    explicit TokenizedText(std::string_view text) : tokens_(tokenize(text)) {}

    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    bool contains(std::span<const std::string> phrase) const;

private:
    std::vector<std::string> tokens_;
};

bool matches(const RuleExpr& rule, const TokenizedText& text);
bool matches(const RuleExpr& rule, std::string_view text);

/// Named topic whose top-level rules are OR-ed together.
struct Taxonomy {
    std::string name;
    std::vector<RuleExpr> rules;

    /// Distinct phrase leaves across all rules.
    std::size_t keyword_count() const;
    std::vector<std::string> keywords() const;
    /// Number of conjunctive clauses once every rule is expanded to disjunctive normal form.
    std::size_t expanded_rule_count() const;

    bool matches(const TokenizedText& text) const;
};

inline constexpr std::string_view kHazeGeneral = "haze-general";
inline constexpr std::string_view kHazeHashtag = "haze-hashtag";
inline constexpr std::string_view kHazeImpact = "haze-impact";
inline constexpr std::string_view kHazeHealth = "haze-health";

inline constexpr std::size_t kMaxTaxonomies = 64;

/// Bit i set iff taxonomy i (in file order) matched.
using TopicMask = std::uint64_t;

/// Parses the sectioned taxonomy format: `[name]` headers, one rule per line,
/// and `# ` comment lines (a `#` directly followed by text is a hashtag rule).
std::vector<Taxonomy> parse_taxonomies(std::string_view content);
std::vector<Taxonomy> load_taxonomies(const std::filesystem::path& path);

TopicMask classify_mask(const TokenizedText& text, std::span<const Taxonomy> taxonomies);
std::vector<std::string> classify(const GeoPost& post, std::span<const Taxonomy> taxonomies);

}  // namespace haze
