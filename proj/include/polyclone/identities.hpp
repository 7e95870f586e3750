#pragma once

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "operation.hpp"

namespace polyclone {

/// Either a symbol applied to variables, or a bare variable (symbol == kBareVariable).
struct FlatTerm {
    static constexpr std::size_t kBareVariable = std::numeric_limits<std::size_t>::max();
    std::size_t symbol = kBareVariable;
    std::vector<std::size_t> args;

    bool is_variable() const noexcept { return symbol == kBareVariable; }
    friend bool operator==(const FlatTerm&, const FlatTerm&) = default;
};

struct Identity {
    FlatTerm lhs;
    FlatTerm rhs;
    friend bool operator==(const Identity&, const Identity&) = default;
};

struct SymbolDecl {
    std::string name;
    std::size_t arity = 0;
    friend bool operator==(const SymbolDecl&, const SymbolDecl&) = default;
};

/// Identities of height at most 1: each side is f(x1..xn) or a single variable.
class H1IdentitySystem {
public:
    std::size_t add_symbol(const std::string& name, std::size_t arity) {
        if (auto it = index_.find(name); it != index_.end()) {
            if (symbols_[it->second].arity != arity)
                throw ValidationError("symbol '" + name + "' used with two arities");
            return it->second;
        }
        symbols_.push_back({name, arity});
        index_.emplace(name, symbols_.size() - 1);
        return symbols_.size() - 1;
    }

    std::size_t add_variable(const std::string& name) {
        for (std::size_t i = 0; i < variables_.size(); ++i)
            if (variables_[i] == name) return i;
        variables_.push_back(name);
        return variables_.size() - 1;
    }

    void add_identity(Identity id) {
        check_term(id.lhs);
        check_term(id.rhs);
        equations_.push_back(std::move(id));
    }

    const std::vector<SymbolDecl>& symbols() const noexcept { return symbols_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::vector<Identity>& equations() const noexcept { return equations_; }

    std::string term_to_string(const FlatTerm& t) const {
        if (t.is_variable()) return variables_[t.args.at(0)];
        std::string s = symbols_[t.symbol].name + "(";
        for (std::size_t i = 0; i < t.args.size(); ++i) {
            if (i) s += ',';
            s += variables_[t.args[i]];
        }
        return s + ')';
    }

    std::string to_string() const {
        std::string s;
        for (const auto& e : equations_) {
            if (!s.empty()) s += ' ';
            s += term_to_string(e.lhs) + " = " + term_to_string(e.rhs) + ';';
        }
        return s;
    }

private:
    void check_term(const FlatTerm& t) const {
        if (t.is_variable()) {
            if (t.args.size() != 1 || t.args[0] >= variables_.size())
                throw ValidationError("bare variable term must name one declared variable");
            return;
        }
        if (t.symbol >= symbols_.size()) throw ValidationError("undeclared symbol in identity");
        if (t.args.size() != symbols_[t.symbol].arity) throw ValidationError("term arity mismatch");
        for (auto v : t.args)
            if (v >= variables_.size()) throw ValidationError("undeclared variable in identity");
    }

    std::vector<SymbolDecl> symbols_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::string> variables_;
    std::vector<Identity> equations_;
};

namespace detail {

class IdentityLexer {
public:
    explicit IdentityLexer(std::string_view text) : s_(text) {}

    void skip_space() {
        for (;;) {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
            if (pos_ < s_.size() && s_[pos_] == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
                continue;
            }
            return;
        }
    }

    bool at_end() {
        skip_space();
        return pos_ >= s_.size();
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == c) {
            advance();
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool accept_equals() {
        skip_space();
        if (accept('=')) return true;
        static constexpr std::string_view approx = "\xE2\x89\x88";
        if (s_.substr(pos_, approx.size()) == approx) {
            for (std::size_t i = 0; i < approx.size(); ++i) advance();
            return true;
        }
        return false;
    }

    std::string name() {
        skip_space();
        if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
            const char q = s_[pos_];
            advance();
            std::string out;
            while (pos_ < s_.size() && s_[pos_] != q) {
                out += s_[pos_];
                advance();
            }
            if (pos_ >= s_.size()) fail("unterminated quoted variable");
            advance();
            if (out.empty()) fail("empty quoted variable");
            return out;
        }
        std::string out;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            out += s_[pos_];
            advance();
        }
        if (out.empty()) fail("expected a name");
        return out;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

private:
    void advance() {
        if (s_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

inline FlatTerm parse_term(IdentityLexer& lex, H1IdentitySystem& sys) {
    std::string head = lex.name();
    if (!lex.accept('(')) {
        FlatTerm t;
        t.args.push_back(sys.add_variable(head));
        return t;
    }
    std::vector<std::size_t> args;
    if (!lex.accept(')')) {
        do {
            args.push_back(sys.add_variable(lex.name()));
        } while (lex.accept(','));
        lex.expect(')');
    }
    if (args.empty()) lex.fail("operation symbols need at least one argument");
    FlatTerm t;
    t.symbol = sys.add_symbol(head, args.size());
    t.args = std::move(args);
    return t;
}

} // namespace detail

/// Parses `t(a,r,e,a) = t(r,a,r,e); p(x,y,y) = x;` ('=' or '≈'; ';' or newline separated).
inline H1IdentitySystem parse_identities(std::string_view text) {
    H1IdentitySystem sys;
    detail::IdentityLexer lex(text);
    while (!lex.at_end()) {
        if (lex.accept(';')) continue;
        Identity id;
        id.lhs = detail::parse_term(lex, sys);
        if (!lex.accept_equals()) lex.fail("expected '=' between terms");
        id.rhs = detail::parse_term(lex, sys);
        sys.add_identity(std::move(id));
        lex.accept(';');
    }
    if (sys.equations().empty()) throw ParseError("no identities given", 1, 1);
    return sys;
}

/// Variables occurring in an identity, in first-occurrence order.
inline std::vector<std::size_t> identity_variables(const Identity& id) {
    std::vector<std::size_t> vars;
    for (const FlatTerm* t : {&id.lhs, &id.rhs})
        for (auto v : t->args)
            if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    return vars;
}

/// Pointwise check of every identity under every valuation of its variables.
inline bool satisfies(const H1IdentitySystem& sys, std::size_t d, const std::vector<OperationTable>& ops) {
    if (ops.size() != sys.symbols().size()) return false;
    for (std::size_t s = 0; s < ops.size(); ++s)
        if (ops[s].domain_size() != d || ops[s].arity() != sys.symbols()[s].arity) return false;
    std::vector<Element> val(sys.variables().size(), 0);
    std::vector<Element> args;
    auto eval = [&](const FlatTerm& t) {
        if (t.is_variable()) return val[t.args[0]];
        args.clear();
        for (auto v : t.args) args.push_back(val[v]);
        return ops[t.symbol](args);
    };
    for (const auto& id : sys.equations()) {
        const auto vars = identity_variables(id);
        for (TupleOdometer it(d, vars.size()); !it.done(); it.next()) {
            for (std::size_t i = 0; i < vars.size(); ++i) val[vars[i]] = it.current()[i];
            if (eval(id.lhs) != eval(id.rhs)) return false;
        }
    }
    return true;
}

inline H1IdentitySystem siggers_system() { return parse_identities("t(a,r,e,a) = t(r,a,r,e);"); }

inline H1IdentitySystem cyclic_system(std::size_t n) {
    if (n < 2) throw ValidationError("cyclic terms need arity at least 2");
    std::string l = "c(", r = "c(";
    for (std::size_t i = 0; i < n; ++i) {
        l += (i ? ",x" : "x") + std::to_string(i + 1);
        r += (i ? ",x" : "x") + std::to_string((i + 1) % n + 1);
    }
    return parse_identities(l + ") = " + r + ")");
}

/// p1(x,y,y) = x, p_i(x,x,y) = p_{i+1}(x,y,y), p_{n-1}(x,x,y) = y.
inline H1IdentitySystem hagemann_mitschke_system(std::size_t n) {
    if (n < 2) throw ValidationError("Hagemann-Mitschke chains need n >= 2");
    std::string text = "p1(x,y,y) = x;";
    for (std::size_t i = 1; i + 1 < n; ++i)
        text += " p" + std::to_string(i) + "(x,x,y) = p" + std::to_string(i + 1) + "(x,y,y);";
    text += " p" + std::to_string(n - 1) + "(x,x,y) = y;";
    return parse_identities(text);
}

} // namespace polyclone
