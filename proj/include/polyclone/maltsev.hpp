#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "digest.hpp"
#include "fixtures.hpp"
#include "free_structure.hpp"
#include "identities.hpp"
#include "polymorphism.hpp"

namespace polyclone {

/// Ternary p1..p_{n-1} with p1(x,y,y) = x, p_i(x,x,y) = p_{i+1}(x,y,y), p_{n-1}(x,x,y) = y.
struct HMChain {
    std::size_t n = 0;
    std::vector<OperationTable> ops;
};

inline bool is_hm_chain(const HMChain& c) {
    if (c.n < 2 || c.ops.size() != c.n - 1) return false;
    const std::size_t d = c.ops.front().domain_size();
    for (const auto& p : c.ops)
        if (p.arity() != 3 || p.domain_size() != d) return false;
    return satisfies(hagemann_mitschke_system(c.n), d, c.ops);
}

namespace detail {

inline OperationTable minor_xyy(const OperationTable& p) {
    const std::size_t idx[] = {0, 1, 1};
    return minor(p, idx, 2);
}
inline OperationTable minor_xxy(const OperationTable& p) {
    const std::size_t idx[] = {0, 0, 1};
    return minor(p, idx, 2);
}

/// Layered search over the binary minors of the clone's ternary members.
inline std::optional<HMChain> chain_from_members(const std::vector<OperationTable>& ternary, std::size_t n) {
    const std::size_t d = ternary.front().domain_size();
    const OperationTable first = projection(d, 2, 1);
    const OperationTable second = projection(d, 2, 2);
    std::vector<OperationTable> xyy, xxy;
    for (const auto& p : ternary) {
        xyy.push_back(minor_xyy(p));
        xxy.push_back(minor_xxy(p));
    }
    // layer i: binary table -> index of a member p_i reaching it as p_i(x,x,y), plus the previous table
    std::vector<std::map<OperationTable, std::pair<std::size_t, std::optional<OperationTable>>>> layers(n - 1);
    for (std::size_t i = 0; i < ternary.size(); ++i)
        if (xyy[i] == first) layers[0].emplace(xxy[i], std::make_pair(i, std::nullopt));
    for (std::size_t l = 1; l < n - 1; ++l)
        for (std::size_t i = 0; i < ternary.size(); ++i)
            if (layers[l - 1].count(xyy[i])) layers[l].emplace(xxy[i], std::make_pair(i, xyy[i]));
    auto it = layers[n - 2].find(second);
    if (it == layers[n - 2].end()) return std::nullopt;
    HMChain chain{n, std::vector<OperationTable>(n - 1, ternary.front())};
    OperationTable cur = second;
    for (std::size_t l = n - 1; l-- > 0;) {
        const auto& entry = layers[l].at(cur);
        chain.ops[l] = ternary[entry.first];
        if (entry.second) cur = *entry.second;
    }
    return chain;
}

} // namespace detail

inline SearchResult<HMChain> find_hagemann_mitschke(const CloneSource& src, std::size_t n,
                                                    const SearchBudget& budget = {}) {
    if (n < 2) throw ValidationError("Hagemann-Mitschke chains need n >= 2");
    SearchResult<HMChain> r;
    std::optional<HMChain> chain;
    if (const auto* a = std::get_if<RelStructure>(&src)) {
        auto found = find_operation_satisfying(*a, hagemann_mitschke_system(n), budget);
        r.outcome = found.outcome;
        r.stats = found.stats;
        if (found.witness) chain = HMChain{n, std::move(*found.witness)};
    } else {
        auto members = generate_to_arity(std::get<CloneGenSet>(src), 3, budget);
        r.stats = members.stats;
        if (!members.found()) {
            r.outcome = Outcome::budget_exceeded;
            return r;
        }
        chain = detail::chain_from_members(*members.witness, n);
        r.outcome = chain ? Outcome::found : Outcome::none;
    }
    if (chain) {
        if (!is_hm_chain(*chain)) throw CrossCheckError("chain search returned an invalid Hagemann-Mitschke chain");
        r.witness = std::move(chain);
    }
    return r;
}

inline constexpr std::size_t kDefaultChainLengthCap = 4;

/// Outcome of a strong-coloring based Maltsev-condition test.
struct MaltsevResult {
    Outcome outcome = Outcome::budget_exceeded; // found: the condition holds (no strong coloring)
    std::optional<Coloring> coloring;           // refutes the condition
    std::optional<HMChain> chain;               // only for n-permutability
    std::string refutation_digest;              // free structure + search size, when no coloring exists
    std::size_t carrier_size = 0;
    SearchStats stats;
};

namespace detail {

inline MaltsevResult strong_coloring_test(const CloneSource& src, const RelStructure& b, BudgetMeter& meter) {
    MaltsevResult res;
    auto fs = free_structure(src, b, meter.remaining());
    meter.charge(fs.stats.nodes);
    res.stats.nodes = meter.used();
    if (!fs.found()) return res;
    res.carrier_size = fs.witness->carrier.size();
    if (meter.exhausted()) return res;
    auto col = find_coloring(*fs.witness, true, meter.remaining());
    meter.charge(col.stats.nodes);
    res.stats.nodes = meter.used();
    if (col.outcome == Outcome::budget_exceeded) return res;
    if (col.found()) {
        res.outcome = Outcome::none;
        res.coloring = col.witness;
    } else {
        res.outcome = Outcome::found;
        std::uint64_t h = fnv1a64(free_structure_to_json(*fs.witness).dump());
        h = fnv1a64(std::to_string(col.stats.nodes), h);
        res.refutation_digest = hex_digest(h);
    }
    return res;
}

} // namespace detail

/// n-permutable for some n iff not strongly ({0,1}; le)-colorable.
inline MaltsevResult is_n_permutable_somewhere(const CloneSource& src, const SearchBudget& budget = {},
                                               std::size_t chain_cap = kDefaultChainLengthCap) {
    BudgetMeter meter(budget);
    MaltsevResult res = detail::strong_coloring_test(src, fixtures::le2(), meter);
    if (res.outcome == Outcome::found) {
        for (std::size_t n = 2; n <= chain_cap && !meter.exhausted(); ++n) {
            auto c = find_hagemann_mitschke(src, n, meter.remaining());
            meter.charge(c.stats.nodes);
            if (c.found()) {
                res.chain = std::move(c.witness);
                break;
            }
        }
        res.stats.nodes = meter.used();
    }
    return res;
}

/// Congruence modular iff not strongly colorable by the Day structure.
inline MaltsevResult is_congruence_modular(const CloneSource& src, const SearchBudget& budget = {}) {
    BudgetMeter meter(budget);
    return detail::strong_coloring_test(src, fixtures::day_structure(), meter);
}

} // namespace polyclone
