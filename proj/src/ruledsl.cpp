#include "haze/ruledsl.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "haze/errors.hpp"
#include "haze/text.hpp"

namespace haze {

RuleExpr RuleExpr::phrase(std::vector<std::string> tokens) {
    if (tokens.empty()) throw SyntaxError("empty phrase", 0);
    for (const auto& t : tokens) {
        if (t.empty()) throw SyntaxError("empty token in phrase", 0);
    }
    RuleExpr r;
    r.kind_ = Kind::Phrase;
    r.tokens_ = std::move(tokens);
    return r;
}

RuleExpr RuleExpr::all_of(std::vector<RuleExpr> children) {
    if (children.size() < 2) throw SyntaxError("AND needs at least two operands", 0);
    RuleExpr r;
    r.kind_ = Kind::And;
    r.children_ = std::move(children);
    return r;
}

RuleExpr RuleExpr::any_of(std::vector<RuleExpr> children) {
    if (children.size() < 2) throw SyntaxError("OR needs at least two operands", 0);
    RuleExpr r;
    r.kind_ = Kind::Or;
    r.children_ = std::move(children);
    return r;
}

namespace {

bool is_word_char(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '#' ||
           c == '-' || c >= 0x80;
}

enum class Lex { Word, LParen, RParen, And, Or, End };

struct Lexeme {
    Lex kind;
    std::string_view text;
    std::size_t pos;
};

std::vector<Lexeme> lex(std::string_view src) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++i;
        } else if (c == '(') {
            out.push_back({Lex::LParen, src.substr(i, 1), i});
            ++i;
        } else if (c == ')') {
            out.push_back({Lex::RParen, src.substr(i, 1), i});
            ++i;
        } else if (src.substr(i, 2) == "&&") {
            out.push_back({Lex::And, src.substr(i, 2), i});
            i += 2;
        } else if (src.substr(i, 2) == "||") {
            out.push_back({Lex::Or, src.substr(i, 2), i});
            i += 2;
        } else if (c == '&' || c == '|') {
            throw SyntaxError(fmt::format("stray '{}'", c), i);
        } else {
            const std::size_t start = i;
            while (i < src.size()) {
                const char d = src[i];
                if (d == ' ' || d == '\t' || d == '\r' || d == '\n' || d == '(' || d == ')' || d == '&' ||
                    d == '|') {
                    break;
                }
                ++i;
            }
            const auto word = src.substr(start, i - start);
            out.push_back({word == "OR" ? Lex::Or : Lex::Word, word, start});
        }
    }
    out.push_back({Lex::End, {}, src.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view src) : lexemes_(lex(src)) {}

    RuleExpr parse() {
        auto e = parse_or();
        const auto& next = peek();
        if (next.kind == Lex::RParen) throw SyntaxError("unbalanced ')'", next.pos);
        if (next.kind != Lex::End) throw SyntaxError("unexpected input", next.pos);
        return e;
    }

private:
    const Lexeme& peek() const { return lexemes_[at_]; }
    const Lexeme& take() { return lexemes_[at_++]; }

    RuleExpr parse_or() {
        std::vector<RuleExpr> kids;
        kids.push_back(parse_and());
        while (peek().kind == Lex::Or) {
            take();
            kids.push_back(parse_and());
        }
        return kids.size() == 1 ? std::move(kids.front()) : RuleExpr::any_of(std::move(kids));
    }

    RuleExpr parse_and() {
        std::vector<RuleExpr> kids;
        kids.push_back(parse_term());
        while (peek().kind == Lex::And) {
            take();
            kids.push_back(parse_term());
        }
        return kids.size() == 1 ? std::move(kids.front()) : RuleExpr::all_of(std::move(kids));
    }

    RuleExpr parse_term() {
        const auto& next = peek();
        switch (next.kind) {
            case Lex::LParen: {
                const std::size_t open = take().pos;
                if (peek().kind == Lex::RParen) throw SyntaxError("empty phrase", peek().pos);
                auto inner = parse_or();
                if (peek().kind != Lex::RParen) throw SyntaxError("unbalanced '('", open);
                take();
                return inner;
            }
            case Lex::Word: {
                std::vector<std::string> tokens;
                const std::size_t start = next.pos;
                while (peek().kind == Lex::Word) {
                    for (auto& t : tokenize(take().text)) tokens.push_back(std::move(t));
                }
                if (tokens.empty()) throw SyntaxError("empty phrase", start);
                return RuleExpr::phrase(std::move(tokens));
            }
            case Lex::And:
            case Lex::Or:
                throw SyntaxError(fmt::format("dangling operator '{}'", next.text), next.pos);
            case Lex::RParen:
                throw SyntaxError(at_ == 0 ? "unbalanced ')'" : "empty phrase", next.pos);
            case Lex::End:
                break;
        }
        throw SyntaxError(at_ == 0 ? "empty rule" : "dangling operator at end of rule", next.pos);
    }

    std::vector<Lexeme> lexemes_;
    std::size_t at_ = 0;
};

void print(const RuleExpr& r, std::string& out) {
    if (r.kind() == RuleExpr::Kind::Phrase) {
        for (std::size_t i = 0; i < r.tokens().size(); ++i) {
            if (i) out += ' ';
            out += r.tokens()[i];
        }
        return;
    }
    const char* sep = r.kind() == RuleExpr::Kind::And ? " && " : " || ";
    for (std::size_t i = 0; i < r.children().size(); ++i) {
        if (i) out += sep;
        const auto& c = r.children()[i];
        if (c.kind() == RuleExpr::Kind::Phrase) {
            print(c, out);
        } else {
            out += '(';
            print(c, out);
            out += ')';
        }
    }
}

void collect_keywords(const RuleExpr& r, std::set<std::string>& out) {
    if (r.kind() == RuleExpr::Kind::Phrase) {
        std::string joined;
        print(r, joined);
        out.insert(std::move(joined));
        return;
    }
    for (const auto& c : r.children()) collect_keywords(c, out);
}

std::size_t clause_count(const RuleExpr& r) {
    switch (r.kind()) {
        case RuleExpr::Kind::Phrase:
            return 1;
        case RuleExpr::Kind::Or: {
            std::size_t n = 0;
            for (const auto& c : r.children()) n += clause_count(c);
            return n;
        }
        case RuleExpr::Kind::And: {
            std::size_t n = 1;
            for (const auto& c : r.children()) n *= clause_count(c);
            return n;
        }
    }
    return 0;
}

}  // namespace

RuleExpr parse_rule(std::string_view source) { return Parser(source).parse(); }

std::string to_string(const RuleExpr& rule) {
    std::string out;
    print(rule, out);
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_char(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

bool TokenizedText::contains(std::span<const std::string> phrase) const {
    if (phrase.empty() || phrase.size() > tokens_.size()) return false;
    return std::search(tokens_.begin(), tokens_.end(), phrase.begin(), phrase.end()) != tokens_.end();
}

bool matches(const RuleExpr& rule, const TokenizedText& text) {
    switch (rule.kind()) {
        case RuleExpr::Kind::Phrase:
            return text.contains(rule.tokens());
        case RuleExpr::Kind::And:
            return std::all_of(rule.children().begin(), rule.children().end(),
                               [&](const RuleExpr& c) { return matches(c, text); });
        case RuleExpr::Kind::Or:
            return std::any_of(rule.children().begin(), rule.children().end(),
                               [&](const RuleExpr& c) { return matches(c, text); });
    }
    return false;
}

bool matches(const RuleExpr& rule, std::string_view text) { return matches(rule, TokenizedText(text)); }

std::size_t Taxonomy::keyword_count() const { return keywords().size(); }

std::vector<std::string> Taxonomy::keywords() const {
    std::set<std::string> all;
    for (const auto& r : rules) collect_keywords(r, all);
    return {all.begin(), all.end()};
}

std::size_t Taxonomy::expanded_rule_count() const {
    std::size_t n = 0;
    for (const auto& r : rules) n += clause_count(r);
    return n;
}

bool Taxonomy::matches(const TokenizedText& text) const {
    return std::any_of(rules.begin(), rules.end(),
                       [&](const RuleExpr& r) { return haze::matches(r, text); });
}

std::vector<Taxonomy> parse_taxonomies(std::string_view content) {
    if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
    std::vector<Taxonomy> out;
    std::size_t line_no = 0;
    for (auto raw : text::split(content, '\n')) {
        ++line_no;
        const auto line = text::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#' && (line.size() == 1 || line[1] == ' ' || line[1] == '\t')) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw SyntaxError("unterminated section header", line.size() - 1, line_no);
            const auto name = std::string(text::trim(line.substr(1, line.size() - 2)));
            if (name.empty()) throw SyntaxError("empty section name", 1, line_no);
            for (const auto& t : out) {
                if (t.name == name) throw SyntaxError(fmt::format("duplicate section [{}]", name), 0, line_no);
            }
            if (!out.empty() && out.back().rules.empty()) {
                throw SyntaxError(fmt::format("section [{}] has no rules", out.back().name), 0, line_no);
            }
            if (out.size() == kMaxTaxonomies) {
                throw SyntaxError(fmt::format("more than {} sections", kMaxTaxonomies), 0, line_no);
            }
            out.push_back(Taxonomy{name, {}});
            continue;
        }
        if (out.empty()) throw SyntaxError("rule before any [section] header", 0, line_no);
        try {
            out.back().rules.push_back(parse_rule(line));
        } catch (const SyntaxError& e) {
            const auto offset = static_cast<std::size_t>(line.data() - raw.data());
            throw SyntaxError(fmt::format("{} in rule '{}'", e.detail(), line), e.position() + offset, line_no);
        }
    }
    if (!out.empty() && out.back().rules.empty()) {
        throw SyntaxError(fmt::format("section [{}] has no rules", out.back().name), 0, line_no);
    }
    return out;
}

std::vector<Taxonomy> load_taxonomies(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open taxonomy file {}", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_taxonomies(buf.str());
    } catch (const SyntaxError& e) {
        throw SyntaxError(fmt::format("{}: {}", path.string(), e.detail()), e.position(), e.line());
    }
}

TopicMask classify_mask(const TokenizedText& text, std::span<const Taxonomy> taxonomies) {
    TopicMask mask = 0;
    for (std::size_t i = 0; i < taxonomies.size() && i < kMaxTaxonomies; ++i) {
        if (taxonomies[i].matches(text)) mask |= TopicMask{1} << i;
    }
    return mask;
}

std::vector<std::string> classify(const GeoPost& post, std::span<const Taxonomy> taxonomies) {
    const auto mask = classify_mask(TokenizedText(post.text), taxonomies);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < taxonomies.size(); ++i) {
        if (mask & (TopicMask{1} << i)) names.push_back(taxonomies[i].name);
    }
    return names;
}

}  // namespace haze
