#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "budget.hpp"
#include "csp.hpp"
#include "structure.hpp"

namespace polyclone {

/// A total map from a source domain into a target domain.
struct HomMap {
    std::size_t source_size = 0;
    std::size_t target_size = 0;
    std::vector<Element> map;

    Element operator()(Element x) const { return map.at(x); }
    friend bool operator==(const HomMap&, const HomMap&) = default;
};

inline HomMap identity_map(std::size_t n) {
    HomMap h{n, n, std::vector<Element>(n)};
    for (std::size_t i = 0; i < n; ++i) h.map[i] = static_cast<Element>(i);
    return h;
}

/// g after f.
inline HomMap compose_maps(const HomMap& g, const HomMap& f) {
    if (f.target_size != g.source_size) throw ValidationError("maps do not compose");
    HomMap h{f.source_size, g.target_size, std::vector<Element>(f.source_size)};
    for (std::size_t i = 0; i < f.source_size; ++i) h.map[i] = g.map.at(f.map[i]);
    return h;
}

/// Checks the homomorphism property directly, independent of any search.
inline bool is_hom(const HomMap& f, const RelStructure& c, const RelStructure& a) {
    require_same_signature(c, a);
    if (f.map.size() != c.size() || f.source_size != c.size() || f.target_size != a.size()) return false;
    for (Element x : f.map)
        if (x >= a.size()) return false;
    Tuple image;
    for (std::size_t r = 0; r < c.relation_count(); ++r) {
        const Relation& src = c.relation(r);
        const Relation& dst = a.relation(r);
        image.resize(src.arity());
        for (std::size_t t = 0; t < src.size(); ++t) {
            auto tup = src.tuple(t);
            for (std::size_t i = 0; i < tup.size(); ++i) image[i] = f.map[tup[i]];
            if (!dst.contains(image)) return false;
        }
    }
    return true;
}

/// CSP whose solutions are the homomorphisms c -> a.
inline std::shared_ptr<csp::Problem> hom_problem(const RelStructure& c, const RelStructure& a) {
    require_same_signature(c, a);
    auto p = std::make_shared<csp::Problem>(c.size(), a.size());
    std::vector<std::uint32_t> scope;
    for (std::size_t r = 0; r < c.relation_count(); ++r) {
        const auto rid = p->add_relation(a.shared_relation(r));
        const Relation& src = c.relation(r);
        for (std::size_t t = 0; t < src.size(); ++t) {
            auto tup = src.tuple(t);
            scope.assign(tup.begin(), tup.end());
            p->add_constraint(rid, scope);
        }
    }
    return p;
}

template <class Witness>
struct SearchResult {
    Outcome outcome = Outcome::none;
    std::optional<Witness> witness;
    SearchStats stats;

    bool found() const noexcept { return outcome == Outcome::found; }
};

using HomResult = SearchResult<HomMap>;

inline HomResult solve_hom_problem(std::shared_ptr<const csp::Problem> p, std::size_t target_size,
                                   const SearchBudget& budget) {
    auto sol = csp::solve_first(p, budget);
    HomResult r;
    r.outcome = sol.outcome;
    r.stats = sol.stats;
    if (sol.outcome == Outcome::found)
        r.witness = HomMap{p->num_vars(), target_size, std::move(sol.assignment)};
    return r;
}

/// Backtracking with GAC; smallest-domain-first, ascending values.
inline HomResult find_homomorphism(const RelStructure& c, const RelStructure& a,
                                   const SearchBudget& budget = {}) {
    auto r = solve_hom_problem(hom_problem(c, a), a.size(), budget);
    if (r.witness && !is_hom(*r.witness, c, a))
        throw CrossCheckError("search returned a map that is not a homomorphism");
    return r;
}

/// Bijective homomorphism with the same tuple counts, i.e. an isomorphism.
inline HomResult find_isomorphism(const RelStructure& a, const RelStructure& b,
                                  const SearchBudget& budget = {}) {
    require_same_signature(a, b);
    HomResult r;
    if (a.size() != b.size()) return r;
    for (std::size_t i = 0; i < a.relation_count(); ++i)
        if (a.relation(i).size() != b.relation(i).size()) return r;
    auto p = hom_problem(a, b);
    p->set_injective(true);
    r = solve_hom_problem(p, b.size(), budget);
    if (r.witness && !is_hom(*r.witness, a, b))
        throw CrossCheckError("search returned a map that is not a homomorphism");
    return r;
}

struct HomPair {
    HomMap forward;  // a -> b
    HomMap backward; // b -> a
};

using HomEqResult = SearchResult<HomPair>;

inline HomEqResult hom_equivalent(const RelStructure& a, const RelStructure& b,
                                  const SearchBudget& budget = {}) {
    BudgetMeter meter(budget);
    HomEqResult r;
    auto fwd = find_homomorphism(a, b, meter.remaining());
    meter.charge(fwd.stats.nodes);
    r.stats.nodes = meter.used();
    if (!fwd.found()) {
        r.outcome = fwd.outcome;
        return r;
    }
    if (meter.exhausted()) {
        r.outcome = Outcome::budget_exceeded;
        return r;
    }
    auto bwd = find_homomorphism(b, a, meter.remaining());
    meter.charge(bwd.stats.nodes);
    r.stats.nodes = meter.used();
    r.outcome = bwd.outcome;
    if (bwd.found()) r.witness = HomPair{*fwd.witness, *bwd.witness};
    return r;
}

/// A retract of minimum size together with the retraction onto it.
struct Core {
    RelStructure structure;          // induced on `subset`, relabelled 0..m-1
    std::vector<Element> subset;     // sorted elements of the original domain
    HomMap retraction;               // original -> structure, identity on subset
};

using CoreResult = SearchResult<Core>;

/// Subsets tried when picking the lexicographically least minimum retract.
inline constexpr std::uint64_t kCoreSubsetScanCap = 100'000;

namespace detail {

inline std::vector<Element> without(const std::vector<Element>& s, Element a) {
    std::vector<Element> out;
    for (Element x : s)
        if (x != a) out.push_back(x);
    return out;
}

inline bool next_combination(std::vector<Element>& comb, std::size_t n) {
    const std::size_t m = comb.size();
    for (std::size_t i = m; i-- > 0;) {
        if (comb[i] < n - m + i) {
            ++comb[i];
            for (std::size_t j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > (std::uint64_t{1} << 62)) return r;
    }
    return r;
}

} // namespace detail

/// Computes the core by shrinking through endomorphism images, then picks the
/// lexicographically least subset of that size that A retracts onto.
inline CoreResult core_of(const RelStructure& a, const SearchBudget& budget = {}) {
    BudgetMeter meter(budget);
    CoreResult result;
    auto exceeded = [&] {
        result.outcome = Outcome::budget_exceeded;
        result.stats.nodes = meter.used();
        return result;
    };

    std::vector<Element> cur(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) cur[i] = static_cast<Element>(i);

    bool shrunk = true;
    while (shrunk && cur.size() > 1) {
        shrunk = false;
        const RelStructure here = induced_substructure(a, cur);
        for (std::size_t k = cur.size(); k-- > 0;) {
            if (meter.exhausted()) return exceeded();
            auto smaller = detail::without(cur, cur[k]);
            auto h = find_homomorphism(here, induced_substructure(a, smaller), meter.remaining());
            meter.charge(h.stats.nodes);
            if (h.outcome == Outcome::budget_exceeded) return exceeded();
            if (!h.found()) continue;
            std::vector<Element> image;
            for (Element x : h.witness->map) image.push_back(smaller[x]);
            std::sort(image.begin(), image.end());
            image.erase(std::unique(image.begin(), image.end()), image.end());
            cur = std::move(image);
            shrunk = true;
            break;
        }
    }

    std::vector<Element> subset = cur;
    std::optional<HomMap> onto;
    const std::size_t m = cur.size();
    if (detail::binomial(a.size(), m) <= kCoreSubsetScanCap) {
        std::vector<Element> comb(m);
        for (std::size_t i = 0; i < m; ++i) comb[i] = static_cast<Element>(i);
        do {
            if (meter.exhausted()) return exceeded();
            auto h = find_homomorphism(a, induced_substructure(a, comb), meter.remaining());
            meter.charge(h.stats.nodes);
            if (h.outcome == Outcome::budget_exceeded) return exceeded();
            if (h.found()) {
                subset = comb;
                onto = std::move(h.witness);
                break;
            }
        } while (comb != cur && detail::next_combination(comb, a.size()));
    }
    RelStructure core = induced_substructure(a, subset);
    if (!onto) {
        if (meter.exhausted()) return exceeded();
        auto h = find_homomorphism(a, core, meter.remaining());
        meter.charge(h.stats.nodes);
        if (!h.found()) return exceeded();
        onto = std::move(h.witness);
    }

    // h restricted to the subset is an automorphism of the core; undo it
    std::vector<Element> inverse(m);
    for (std::size_t i = 0; i < m; ++i) inverse[onto->map[subset[i]]] = static_cast<Element>(i);
    HomMap retraction{a.size(), m, std::vector<Element>(a.size())};
    for (std::size_t x = 0; x < a.size(); ++x) retraction.map[x] = inverse[onto->map[x]];

    // every endomorphism of the core must be injective
    for (std::size_t k = 0; k < m && m > 1; ++k) {
        if (meter.exhausted()) return exceeded();
        std::vector<Element> labels(m);
        for (std::size_t i = 0; i < m; ++i) labels[i] = static_cast<Element>(i);
        auto h = find_homomorphism(core, induced_substructure(core, detail::without(labels, static_cast<Element>(k))),
                                   meter.remaining());
        meter.charge(h.stats.nodes);
        if (h.outcome == Outcome::budget_exceeded) return exceeded();
        if (h.found()) throw CrossCheckError("computed core has a non-injective endomorphism");
    }
    if (!is_hom(retraction, a, core)) throw CrossCheckError("core retraction is not a homomorphism");
    for (std::size_t i = 0; i < m; ++i)
        if (retraction.map[subset[i]] != i) throw CrossCheckError("core retraction is not idempotent");

    result.outcome = Outcome::found;
    result.witness = Core{std::move(core), std::move(subset), std::move(retraction)};
    result.stats.nodes = meter.used();
    return result;
}

/// Adds the unary relation {a} for every element a that does not already have one.
/// New relations are named c<a> (with trailing underscores on a name clash).
inline RelStructure add_singletons(const RelStructure& a) {
    std::vector<std::pair<std::string, Relation>> rels;
    std::vector<char> present(a.size(), 0);
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        const Relation& rel = a.relation(r);
        if (rel.arity() == 1 && rel.size() == 1) present[rel.tuple(0)[0]] = 1;
        rels.emplace_back(a.name(r), rel);
    }
    for (std::size_t x = 0; x < a.size(); ++x) {
        if (present[x]) continue;
        std::string name = "c" + std::to_string(x);
        while (a.find(name)) name += "_";
        rels.emplace_back(name, Relation(a.size(), 1, std::vector<Element>{static_cast<Element>(x)}));
    }
    return RelStructure(a.size(), std::move(rels));
}

} // namespace polyclone
