#pragma once

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "structure.hpp"

namespace polyclone {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline Json parse_json_text(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError("malformed JSON", line, col);
    }
}

inline std::pair<std::string, std::size_t> split_relation_key(const std::string& key) {
    auto slash = key.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == key.size())
        throw ParseError("relation key '" + key + "' must have the form name/arity");
    std::size_t arity = 0;
    auto digits = std::string_view(key).substr(slash + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), arity);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || arity == 0)
        throw ParseError("relation key '" + key + "' has an invalid arity");
    return {key.substr(0, slash), arity};
}

/// Tokenizer for the compact grammar `size N; R/k = {(..),(..)};`.
class CompactLexer {
public:
    explicit CompactLexer(std::string_view text) : text_(text) {}

    [[noreturn]] void fail(const std::string& what) const {
        auto [line, col] = line_column(text_, start_);
        throw ParseError(what, line, col);
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
        start_ = pos_;
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    char peek() {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    std::string identifier() {
        skip_space();
        std::size_t b = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (b == pos_ || std::isdigit(static_cast<unsigned char>(text_[b])))
            fail("expected an identifier");
        return std::string(text_.substr(b, pos_ - b));
    }

    std::uint64_t integer() {
        skip_space();
        std::size_t b = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (b == pos_) fail("expected a non-negative integer");
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + b, text_.data() + pos_, v);
        if (ec != std::errc()) fail("integer out of range");
        return v;
    }

    std::size_t token_start() const { return start_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t start_ = 0;
};

struct RawRelation {
    std::string name;
    std::size_t arity;
    std::vector<Tuple> tuples;
};

inline RelStructure build_structure(std::uint64_t size, std::vector<RawRelation> raws) {
    if (size == 0) throw ValidationError("structure size must be positive");
    std::vector<std::pair<std::string, Relation>> rels;
    for (auto& raw : raws) {
        for (std::size_t i = 0; i < raw.tuples.size(); ++i) {
            const Tuple& t = raw.tuples[i];
            if (t.size() != raw.arity)
                throw ValidationError("arity mismatch in relation '" + raw.name + "': tuple " +
                                      std::to_string(i) + " has length " + std::to_string(t.size()) +
                                      ", expected " + std::to_string(raw.arity));
            for (Element x : t)
                if (x >= size)
                    throw ValidationError("element " + std::to_string(x) + " in relation '" + raw.name +
                                          "' is out of range for size " + std::to_string(size));
        }
        try {
            rels.emplace_back(raw.name, Relation(static_cast<std::size_t>(size), raw.arity, raw.tuples,
                                                 Relation::Duplicates::reject));
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(e.what()) + " ('" + raw.name + "')");
        }
    }
    return RelStructure(static_cast<std::size_t>(size), std::move(rels));
}

inline RelStructure parse_compact(std::string_view text) {
    CompactLexer lex(text);
    const bool braced = lex.accept('{');
    std::optional<std::uint64_t> size;
    std::vector<RawRelation> raws;
    while (!lex.at_end() && lex.peek() != '}') {
        std::string word = lex.identifier();
        if (word == "size" && lex.peek() != '/') {
            if (!lex.accept(':')) lex.accept('=');
            if (size) lex.fail("size declared twice");
            size = lex.integer();
        } else {
            lex.expect('/');
            auto arity = lex.integer();
            if (arity == 0) lex.fail("relation arity must be positive");
            if (!lex.accept('=')) lex.expect(':');
            lex.expect('{');
            RawRelation raw{word, static_cast<std::size_t>(arity), {}};
            if (!lex.accept('}')) {
                do {
                    lex.expect('(');
                    Tuple t;
                    if (!lex.accept(')')) {
                        do {
                            auto v = lex.integer();
                            if (v > std::numeric_limits<Element>::max()) lex.fail("element too large");
                            t.push_back(static_cast<Element>(v));
                        } while (lex.accept(','));
                        lex.expect(')');
                    }
                    if (size && !t.empty())
                        for (Element x : t)
                            if (x >= *size) lex.fail("element " + std::to_string(x) + " out of range");
                    if (t.size() != raw.arity) lex.fail("tuple length does not match arity " + std::to_string(arity));
                    raw.tuples.push_back(std::move(t));
                } while (lex.accept(','));
                lex.expect('}');
            }
            raws.push_back(std::move(raw));
        }
        if (!lex.accept(';')) lex.accept(',');
    }
    if (braced) lex.expect('}');
    if (!lex.at_end()) lex.fail("trailing input");
    if (!size) throw ParseError("missing size declaration");
    return build_structure(*size, std::move(raws));
}

} // namespace detail

inline RelStructure structure_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("size") || !j.contains("relations"))
        throw ParseError("structure JSON needs \"size\" and \"relations\"");
    const auto& sz = j.at("size");
    if (!sz.is_number_unsigned()) throw ParseError("\"size\" must be a positive integer");
    const auto& rels = j.at("relations");
    if (!rels.is_object()) throw ParseError("\"relations\" must be an object");
    std::vector<detail::RawRelation> raws;
    for (auto it = rels.begin(); it != rels.end(); ++it) {
        auto [name, arity] = detail::split_relation_key(it.key());
        if (!it.value().is_array()) throw ParseError("relation '" + it.key() + "' must be an array");
        detail::RawRelation raw{name, arity, {}};
        for (const auto& t : it.value()) {
            if (!t.is_array()) throw ParseError("tuples of '" + it.key() + "' must be arrays");
            Tuple tup;
            for (const auto& x : t) {
                if (!x.is_number_unsigned()) throw ParseError("tuple entries must be non-negative integers");
                tup.push_back(x.get<Element>());
            }
            raw.tuples.push_back(std::move(tup));
        }
        raws.push_back(std::move(raw));
    }
    return detail::build_structure(sz.get<std::uint64_t>(), std::move(raws));
}

/// Accepts either the JSON form or the compact text grammar.
inline RelStructure parse_structure(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i + 1;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const bool json = i < text.size() && text[i] == '{' && j < text.size() && text[j] == '"';
    if (json) return structure_from_json(detail::parse_json_text(text));
    return detail::parse_compact(text);
}

inline Json structure_to_json(const RelStructure& a) {
    Json rels = Json::object();
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        const Relation& rel = a.relation(r);
        Json tuples = Json::array();
        for (std::size_t t = 0; t < rel.size(); ++t) {
            auto tup = rel.tuple(t);
            tuples.push_back(Json(std::vector<Element>(tup.begin(), tup.end())));
        }
        rels[a.name(r) + "/" + std::to_string(rel.arity())] = std::move(tuples);
    }
    Json j;
    j["size"] = a.size();
    j["relations"] = std::move(rels);
    return j;
}

/// Canonical serialization: compact JSON, relations by name, tuples lexicographic.
inline std::string serialize_structure(const RelStructure& a) { return structure_to_json(a).dump(); }

inline std::string serialize_structure_text(const RelStructure& a) {
    std::string out = "size " + std::to_string(a.size()) + ";";
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        const Relation& rel = a.relation(r);
        out += " " + a.name(r) + "/" + std::to_string(rel.arity()) + " = {";
        for (std::size_t t = 0; t < rel.size(); ++t) {
            if (t) out += ",";
            out += "(";
            auto tup = rel.tuple(t);
            for (std::size_t k = 0; k < tup.size(); ++k) {
                if (k) out += ",";
                out += std::to_string(tup[k]);
            }
            out += ")";
        }
        out += "};";
    }
    return out;
}

} // namespace polyclone
