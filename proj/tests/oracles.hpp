#pragma once

// Brute-force reference implementations. They share no search code with the library.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "polyclone/structure.hpp"
#include "polyclone/operation.hpp"
#include "polyclone/pp_formula.hpp"

namespace oracle {

using polyclone::Element;
using polyclone::RelStructure;
using polyclone::Relation;
using polyclone::Tuple;

template <class T>
inline bool next_word(std::vector<T>& w, std::size_t base) {
    for (std::size_t i = w.size(); i-- > 0;) {
        if (++w[i] < base) return true;
        w[i] = 0;
    }
    return false;
}

inline bool in_relation(const Relation& r, const Tuple& t) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        auto u = r.tuple(i);
        if (std::equal(u.begin(), u.end(), t.begin(), t.end())) return true;
    }
    return false;
}

inline bool map_is_hom(const std::vector<Element>& f, const RelStructure& c, const RelStructure& a) {
    for (std::size_t r = 0; r < c.relation_count(); ++r) {
        const Relation& src = c.relation(r);
        const Relation& dst = a.relation(c.name(r));
        for (std::size_t i = 0; i < src.size(); ++i) {
            Tuple img;
            for (auto x : src.tuple(i)) img.push_back(f[x]);
            if (!in_relation(dst, img)) return false;
        }
    }
    return true;
}

/// Every homomorphism C -> A, in lexicographic order of the map.
inline std::vector<std::vector<Element>> all_homs(const RelStructure& c, const RelStructure& a) {
    std::vector<std::vector<Element>> out;
    std::vector<Element> f(c.size(), 0);
    do {
        if (map_is_hom(f, c, a)) out.push_back(f);
    } while (next_word(f, a.size()));
    return out;
}

inline Element apply(const std::vector<Element>& table, std::size_t d, const Tuple& args) {
    std::size_t code = 0;
    for (auto x : args) code = code * d + x;
    return table[code];
}

inline bool table_preserves(const std::vector<Element>& table, std::size_t d, std::size_t n, const Relation& r) {
    if (r.size() == 0) return true;
    std::vector<Element> pick(n, 0);
    do {
        Tuple img;
        for (std::size_t j = 0; j < r.arity(); ++j) {
            Tuple args;
            for (std::size_t i = 0; i < n; ++i) args.push_back(r.tuple(pick[i])[j]);
            img.push_back(apply(table, d, args));
        }
        if (!in_relation(r, img)) return false;
    } while (next_word(pick, r.size()));
    return true;
}

/// All n-ary polymorphisms as raw tables, lexicographic.
inline std::vector<std::vector<Element>> all_polymorphisms(const RelStructure& a, std::size_t n) {
    const std::size_t d = a.size();
    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) cells *= d;
    std::vector<std::vector<Element>> out;
    std::vector<Element> t(cells, 0);
    do {
        bool ok = true;
        for (std::size_t r = 0; r < a.relation_count() && ok; ++r) ok = table_preserves(t, d, n, a.relation(r));
        if (ok) out.push_back(t);
    } while (next_word(t, d));
    return out;
}

/// Satisfying assignments of the free variables, by trying every assignment of all variables.
inline std::vector<Tuple> naive_pp(const RelStructure& a, const polyclone::PPFormula& f) {
    std::vector<Tuple> out;
    std::vector<Element> v(f.var_count(), 0);
    do {
        bool ok = true;
        for (const auto& at : f.atoms) {
            Tuple t;
            for (auto x : at.args) t.push_back(v[x]);
            if (!in_relation(a.relation(at.relation), t)) {
                ok = false;
                break;
            }
        }
        for (auto [x, y] : f.equalities) ok = ok && v[x] == v[y];
        if (ok) {
            Tuple t(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(f.free_vars));
            if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        }
    } while (!v.empty() && next_word(v, a.size()));
    std::sort(out.begin(), out.end());
    return out;
}

/// Random structure: each possible tuple of each relation kept with probability p.
inline RelStructure random_structure(std::mt19937& rng, std::size_t size, const std::vector<std::size_t>& arities,
                                     double p) {
    std::bernoulli_distribution keep(p);
    std::vector<std::pair<std::string, Relation>> rels;
    for (std::size_t r = 0; r < arities.size(); ++r) {
        std::vector<Element> flat;
        std::vector<Element> t(arities[r], 0);
        do {
            if (keep(rng)) flat.insert(flat.end(), t.begin(), t.end());
        } while (next_word(t, size));
        rels.emplace_back("R" + std::to_string(r), Relation(size, arities[r], std::move(flat)));
    }
    return RelStructure(size, std::move(rels));
}

inline polyclone::OperationTable random_operation(std::mt19937& rng, std::size_t d, std::size_t n) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) cells *= d;
    std::uniform_int_distribution<Element> pick(0, static_cast<Element>(d - 1));
    std::vector<Element> t(cells);
    for (auto& x : t) x = pick(rng);
    return polyclone::OperationTable(d, n, std::move(t));
}

} // namespace oracle
