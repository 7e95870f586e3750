#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"
#include "structure.hpp"

namespace polyclone {

struct PPAtom {
    std::string relation;
    std::vector<std::size_t> args;
    friend bool operator==(const PPAtom&, const PPAtom&) = default;
};

/// exists y1..ye. atom & ... & atom, over variables 0..free_vars+exist_vars-1 (free ones first).
struct PPFormula {
    std::string name;
    std::size_t free_vars = 0;
    std::size_t exist_vars = 0;
    std::vector<PPAtom> atoms;
    std::vector<std::pair<std::size_t, std::size_t>> equalities;
    std::vector<std::string> var_names; // empty means x1.., y1..

    std::size_t var_count() const noexcept { return free_vars + exist_vars; }

    std::string var_name(std::size_t v) const {
        if (v < var_names.size()) return var_names[v];
        return v < free_vars ? "x" + std::to_string(v + 1) : "y" + std::to_string(v - free_vars + 1);
    }

    void validate(const RelStructure& a) const {
        const std::size_t n = var_count();
        for (const auto& at : atoms) {
            auto idx = a.find(at.relation);
            if (!idx) throw SignatureMismatch("formula uses unknown relation '" + at.relation + "'");
            if (a.relation(*idx).arity() != at.args.size())
                throw ValidationError("atom " + at.relation + " has the wrong number of arguments");
            for (auto v : at.args)
                if (v >= n) throw ValidationError("atom variable out of range");
        }
        for (auto [u, v] : equalities)
            if (u >= n || v >= n) throw ValidationError("equality variable out of range");
    }

    std::string to_string() const {
        std::string s = (name.empty() ? std::string("phi") : name) + "(";
        for (std::size_t i = 0; i < free_vars; ++i) s += (i ? "," : "") + var_name(i);
        s += ") := ";
        if (exist_vars > 0) {
            s += "exists ";
            for (std::size_t i = 0; i < exist_vars; ++i) s += (i ? "," : "") + var_name(free_vars + i);
            s += ". ";
        }
        bool first = true;
        for (const auto& at : atoms) {
            if (!first) s += " & ";
            first = false;
            s += at.relation + "(";
            for (std::size_t i = 0; i < at.args.size(); ++i) s += (i ? "," : "") + var_name(at.args[i]);
            s += ")";
        }
        for (auto [u, v] : equalities) {
            if (!first) s += " & ";
            first = false;
            s += var_name(u) + " = " + var_name(v);
        }
        if (first) s += "true";
        return s + " ;";
    }

    friend bool operator==(const PPFormula& a, const PPFormula& b) {
        return a.name == b.name && a.free_vars == b.free_vars && a.exist_vars == b.exist_vars &&
               a.atoms == b.atoms && a.equalities == b.equalities;
    }
};

/// Output relations of a pp-power: each formula with k*dimension free variables defines a
/// k-ary relation on A^dimension, read in blocks of `dimension` coordinates.
struct PPPowerSpec {
    std::size_t dimension = 1;
    std::vector<PPFormula> defs;

    std::string to_string() const {
        std::string s = "dimension " + std::to_string(dimension) + ";\n";
        for (const auto& f : defs) s += f.to_string() + "\n";
        return s;
    }
};

namespace detail {

class PPLexer {
public:
    explicit PPLexer(std::string_view s) : s_(s) {}

    void skip() {
        for (;;) {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) step();
            if (pos_ < s_.size() && s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') step();
                continue;
            }
            return;
        }
    }
    bool at_end() {
        skip();
        return pos_ >= s_.size();
    }
    bool accept(std::string_view tok) {
        skip();
        if (s_.substr(pos_, tok.size()) != tok) return false;
        for (std::size_t i = 0; i < tok.size(); ++i) step();
        return true;
    }
    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }
    bool peek_ident() {
        skip();
        return pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_');
    }
    std::string ident() {
        if (!peek_ident()) fail("expected a name");
        std::string out;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            out += s_[pos_];
            step();
        }
        return out;
    }
    std::size_t number() {
        skip();
        std::size_t v = 0;
        bool any = false;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            v = v * 10 + static_cast<std::size_t>(s_[pos_] - '0');
            any = true;
            step();
        }
        if (!any) fail("expected a number");
        return v;
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

private:
    void step() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    std::string_view s_;
    std::size_t pos_ = 0, line_ = 1, col_ = 1;
};

inline PPFormula parse_formula(PPLexer& lex) {
    PPFormula f;
    f.name = lex.ident();
    std::vector<std::string> names;
    auto lookup = [&](const std::string& v) -> std::size_t {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == v) return i;
        lex.fail("undeclared variable '" + v + "'");
    };
    auto declare = [&](const std::string& v) {
        for (const auto& n : names)
            if (n == v) lex.fail("variable '" + v + "' declared twice");
        names.push_back(v);
    };
    lex.expect("(");
    if (!lex.accept(")")) {
        do {
            declare(lex.ident());
        } while (lex.accept(","));
        lex.expect(")");
    }
    f.free_vars = names.size();
    lex.expect(":=");
    if (lex.accept("exists")) {
        do {
            declare(lex.ident());
        } while (lex.accept(",") || lex.peek_ident());
        lex.expect(".");
    }
    f.exist_vars = names.size() - f.free_vars;
    do {
        std::string head = lex.ident();
        if (lex.accept("(")) {
            PPAtom at{head, {}};
            if (!lex.accept(")")) {
                do {
                    at.args.push_back(lookup(lex.ident()));
                } while (lex.accept(","));
                lex.expect(")");
            }
            f.atoms.push_back(std::move(at));
        } else if (head != "true") {
            lex.expect("=");
            f.equalities.emplace_back(lookup(head), lookup(lex.ident()));
        }
    } while (lex.accept("&"));
    lex.expect(";");
    f.var_names = std::move(names);
    return f;
}

} // namespace detail

/// `name(x1,x2) := exists y1. R(x1,y1) & y1 = x2 ;`
inline PPFormula parse_pp_formula(std::string_view text) {
    detail::PPLexer lex(text);
    PPFormula f = detail::parse_formula(lex);
    if (!lex.at_end()) lex.fail("trailing input after formula");
    return f;
}

/// Optional `dimension N;` followed by formulas, one per output relation.
inline PPPowerSpec parse_pp_power_spec(std::string_view text) {
    detail::PPLexer lex(text);
    PPPowerSpec spec;
    if (lex.accept("dimension")) {
        spec.dimension = lex.number();
        if (spec.dimension == 0) lex.fail("dimension must be positive");
        lex.expect(";");
    }
    while (!lex.at_end()) spec.defs.push_back(detail::parse_formula(lex));
    for (std::size_t i = 0; i < spec.defs.size(); ++i) {
        const auto& f = spec.defs[i];
        if (f.free_vars == 0 || f.free_vars % spec.dimension != 0)
            throw ValidationError("formula '" + f.name + "' needs a positive multiple of the dimension as free variables");
        for (std::size_t j = 0; j < i; ++j)
            if (spec.defs[j].name == f.name) throw ValidationError("relation '" + f.name + "' defined twice");
    }
    return spec;
}

/// Dimension 1, every relation defined by its own atom.
inline PPPowerSpec identity_spec(const RelStructure& a) {
    PPPowerSpec spec;
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        PPFormula f;
        f.name = a.name(r);
        f.free_vars = a.relation(r).arity();
        PPAtom at{a.name(r), {}};
        for (std::size_t i = 0; i < f.free_vars; ++i) at.args.push_back(i);
        f.atoms.push_back(std::move(at));
        spec.defs.push_back(std::move(f));
    }
    return spec;
}

} // namespace polyclone
