#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "csp.hpp"
#include "hom.hpp"
#include "operation.hpp"
#include "polymorphism.hpp"
#include "pp_formula.hpp"
#include "structure.hpp"

namespace polyclone {

/// Satisfying assignments of the free variables of `phi` in `a`.
inline Relation evaluate_pp(const RelStructure& a, const PPFormula& phi) {
    phi.validate(a);
    const std::size_t d = a.size();
    const std::size_t n = phi.var_count();
    csp::UnionFind uf(n);
    for (auto [u, v] : phi.equalities) uf.unite(u, v);
    std::vector<std::uint32_t> cls(n);
    std::map<std::size_t, std::uint32_t> ids;
    for (std::size_t v = 0; v < n; ++v) {
        auto [it, fresh] = ids.emplace(uf.find(v), static_cast<std::uint32_t>(ids.size()));
        cls[v] = it->second;
    }
    if (n == 0) return Relation::nullary(d, true);
    auto p = std::make_shared<csp::Problem>(ids.size(), d);
    std::map<std::string, std::uint32_t> rel_ids;
    std::vector<std::uint32_t> scope;
    for (const auto& at : phi.atoms) {
        auto [it, fresh] = rel_ids.emplace(at.relation, 0);
        if (fresh) it->second = p->add_relation(a.shared_relation(*a.find(at.relation)));
        scope.clear();
        for (auto v : at.args) scope.push_back(cls[v]);
        p->add_constraint(it->second, scope);
    }
    p->dedup();
    if (phi.free_vars == 0) {
        auto sol = csp::solve_first(p, SearchBudget{}, csp::VariableOrder::lexicographic);
        return Relation::nullary(d, sol.outcome == Outcome::found);
    }
    std::vector<std::uint32_t> focus;
    for (std::size_t v = 0; v < phi.free_vars; ++v)
        if (std::find(focus.begin(), focus.end(), cls[v]) == focus.end()) focus.push_back(cls[v]);
    std::sort(focus.begin(), focus.end());
    std::vector<Element> flat;
    csp::Solver solver(p, SearchBudget{}, csp::VariableOrder::lexicographic);
    const Outcome o = solver.search(
        [&](std::span<const Element> s) {
            for (std::size_t v = 0; v < phi.free_vars; ++v) flat.push_back(s[cls[v]]);
            return true;
        },
        focus);
    if (o == Outcome::budget_exceeded) throw CapacityError("pp-formula evaluation exceeded the default budget");
    return Relation(d, phi.free_vars, std::move(flat));
}

/// Regroups a (k*n)-ary relation on A into a k-ary relation on A^n.
inline Relation group_blocks(const Relation& r, std::size_t d, std::size_t n) {
    const std::size_t k = r.arity() / n;
    const TupleCoding coding(d, n);
    const auto size = static_cast<std::size_t>(coding.count());
    std::vector<Element> flat;
    flat.reserve(r.size() * k);
    for (std::size_t i = 0; i < r.size(); ++i) {
        auto t = r.tuple(i);
        for (std::size_t b = 0; b < k; ++b)
            flat.push_back(static_cast<Element>(coding.encode(t.subspan(b * n, n))));
    }
    return Relation(size, k, std::move(flat));
}

inline RelStructure pp_power(const RelStructure& a, const PPPowerSpec& spec) {
    const std::uint64_t size = checked_power(a.size(), spec.dimension);
    if (size > kDefaultPowerDomainCap) throw CapacityError("pp-power domain exceeds capacity");
    std::vector<std::pair<std::string, Relation>> rels;
    for (const auto& f : spec.defs) {
        if (f.free_vars == 0 || f.free_vars % spec.dimension != 0)
            throw ValidationError("formula '" + f.name + "' has a free-variable count not divisible by the dimension");
        rels.emplace_back(f.name, group_blocks(evaluate_pp(a, f), a.size(), spec.dimension));
    }
    return RelStructure(static_cast<std::size_t>(size), std::move(rels));
}

inline constexpr std::size_t kDefaultDefinabilityArityCap = 4;

enum class Definability { definable, not_definable, budget_exceeded };

inline const char* to_string(Definability d) {
    switch (d) {
    case Definability::definable: return "definable";
    case Definability::not_definable: return "not_definable";
    case Definability::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

struct DefinabilityResult {
    Definability verdict = Definability::definable;
    bool complete = false;            // no violator exists at all (arity |R| was reached)
    std::size_t checked_arity = 0;
    std::optional<OperationTable> violator;
    std::vector<std::size_t> rows;    // indices of the tuples of R fed to the violator
    SearchStats stats;
};

/// Searches for a polymorphism of `a` that maps tuples of `r` outside `r`, by arity 1..min(|R|, cap).
inline DefinabilityResult is_pp_definable(const RelStructure& a, const Relation& r, const SearchBudget& budget = {},
                                          std::size_t arity_cap = kDefaultDefinabilityArityCap) {
    if (r.domain_size() != a.size()) throw ValidationError("candidate relation over a different domain");
    if (r.arity() == 0) throw ValidationError("candidate relation must have positive arity");
    BudgetMeter meter(budget);
    DefinabilityResult res;
    const std::size_t d = a.size();
    const std::size_t top = std::min(r.size(), arity_cap);
    res.complete = arity_cap >= r.size();
    std::vector<std::size_t> cells(r.arity());
    for (std::size_t m = 1; m <= top; ++m) {
        const CellProblem cp = build_cell_problem(a, single_symbol_system(m));
        std::vector<Element> comb(m);
        for (std::size_t i = 0; i < m; ++i) comb[i] = static_cast<Element>(i);
        do {
            for (std::size_t j = 0; j < r.arity(); ++j) {
                std::size_t code = 0;
                for (std::size_t i = 0; i < m; ++i) code = code * d + r.tuple(comb[i])[j];
                cells[j] = code;
            }
            SearchStats st;
            const Outcome o = project_cells(
                cp, cells,
                [&](std::span<const Element> image, const std::vector<Element>& sol) {
                    if (r.contains(image)) return true;
                    res.violator = cp.decode(sol).front();
                    return false;
                },
                meter.remaining(), &st);
            meter.charge(st.nodes);
            res.stats.nodes = meter.used();
            if (o == Outcome::found) {
                res.verdict = Definability::not_definable;
                res.complete = true;
                res.checked_arity = m;
                res.rows.assign(comb.begin(), comb.end());
                if (!is_polymorphism(*res.violator, a) || preserves(*res.violator, r))
                    throw CrossCheckError("definability certificate failed re-verification");
                return res;
            }
            if (o == Outcome::budget_exceeded || meter.exhausted()) {
                res.verdict = Definability::budget_exceeded;
                res.complete = false;
                res.checked_arity = m - 1;
                return res;
            }
        } while (detail::next_combination(comb, r.size()));
        res.checked_arity = m;
    }
    return res;
}

/// h1: B -> A and h2: A -> B, as vectors indexed by the source element.
struct ReflectionMaps {
    std::vector<Element> h1;
    std::vector<Element> h2;

    void validate() const {
        if (h1.empty() || h2.empty()) throw ValidationError("reflection maps must be total on nonempty domains");
        for (auto x : h1)
            if (x >= h2.size()) throw ValidationError("h1 value outside the source domain");
        for (auto x : h2)
            if (x >= h1.size()) throw ValidationError("h2 value outside the target domain");
    }

    bool is_retraction() const {
        for (std::size_t b = 0; b < h1.size(); ++b)
            if (h2[h1[b]] != b) return false;
        return true;
    }
};

/// x1..xn -> h2(f(h1(x1), ..., h1(xn)))
inline OperationTable reflect_operation(const OperationTable& f, const ReflectionMaps& maps) {
    maps.validate();
    if (f.domain_size() != maps.h2.size()) throw ValidationError("operation domain does not match h2");
    std::vector<Element> args(f.arity());
    return OperationTable::from_function(maps.h1.size(), f.arity(), [&](std::span<const Element> x) {
        for (std::size_t i = 0; i < x.size(); ++i) args[i] = maps.h1[x[i]];
        return maps.h2[f(args)];
    });
}

inline std::vector<OperationTable> reflect_operations(const std::vector<OperationTable>& ops,
                                                      const ReflectionMaps& maps) {
    std::vector<OperationTable> out;
    out.reserve(ops.size());
    for (const auto& f : ops) out.push_back(reflect_operation(f, maps));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct PPConstruction {
    RelStructure power;
    HomPair homs; // power -> B and B -> power
};

/// pp_power(A, spec) followed by a homomorphic-equivalence test against B.
inline SearchResult<PPConstruction> check_pp_constructible(const RelStructure& a, const RelStructure& b,
                                                           const PPPowerSpec& spec, const SearchBudget& budget = {}) {
    RelStructure power = pp_power(a, spec);
    require_same_signature(power, b);
    auto eq = hom_equivalent(power, b, budget);
    SearchResult<PPConstruction> r;
    r.outcome = eq.outcome;
    r.stats = eq.stats;
    if (eq.found()) r.witness = PPConstruction{std::move(power), *eq.witness};
    return r;
}

struct PPSearchBounds {
    std::size_t max_dimension = 1;
    std::size_t max_existentials = 1;
    std::size_t max_atoms = 2;
};

struct PPSearchResult {
    Outcome outcome = Outcome::none; // none means nothing found within the bounds, not a refutation
    std::optional<PPPowerSpec> spec;
    std::optional<PPConstruction> construction;
    PPSearchBounds bounds;
    SearchStats stats;
};

namespace detail {

struct PPCandidate {
    PPFormula formula;
    Relation relation; // on A^n
};

/// Existential variables must all occur, first occurrences in increasing order.
inline bool canonical_existentials(const std::vector<std::vector<std::size_t>>& arg_lists, std::size_t free_vars,
                                   std::size_t exist_vars) {
    std::size_t next = free_vars;
    for (const auto& args : arg_lists)
        for (auto v : args) {
            if (v < free_vars) continue;
            if (v > next) return false;
            if (v == next) ++next;
        }
    return next == free_vars + exist_vars;
}

/// Distinct relations definable with at most the given atoms/existentials, first formula kept.
inline std::vector<PPCandidate> pp_candidates(const RelStructure& a, std::size_t k, std::size_t n,
                                              const PPSearchBounds& bounds, BudgetMeter& meter, bool& exhausted) {
    std::vector<PPCandidate> out;
    std::set<std::vector<Element>> seen;
    const std::size_t free = k * n;
    for (std::size_t t = 0; t <= bounds.max_atoms; ++t) {
        for (std::size_t e = 0; e <= bounds.max_existentials; ++e) {
            const std::size_t vars = free + e;
            struct U {
                std::optional<std::size_t> rel; // nullopt: equality
                std::vector<std::size_t> args;
            };
            std::vector<U> universe;
            for (std::size_t r = 0; r < a.relation_count(); ++r)
                for (TupleOdometer it(vars, a.relation(r).arity()); !it.done(); it.next())
                    universe.push_back({r, {it.current().begin(), it.current().end()}});
            for (std::size_t i = 0; i < vars; ++i)
                for (std::size_t j = i + 1; j < vars; ++j) universe.push_back({std::nullopt, {i, j}});
            if (t > universe.size()) continue;
            if (t == 0 && e > 0) continue;
            std::vector<Element> comb(t);
            for (std::size_t i = 0; i < t; ++i) comb[i] = static_cast<Element>(i);
            do {
                std::vector<std::vector<std::size_t>> arg_lists;
                for (auto c : comb) arg_lists.push_back(universe[c].args);
                if (!canonical_existentials(arg_lists, free, e)) continue;
                if (meter.exhausted()) {
                    exhausted = true;
                    return out;
                }
                meter.charge(1);
                PPFormula f;
                f.free_vars = free;
                f.exist_vars = e;
                for (auto c : comb) {
                    if (universe[c].rel)
                        f.atoms.push_back({a.name(*universe[c].rel), universe[c].args});
                    else
                        f.equalities.emplace_back(universe[c].args[0], universe[c].args[1]);
                }
                Relation rel = group_blocks(evaluate_pp(a, f), a.size(), n);
                if (seen.insert(rel.flat()).second) out.push_back({std::move(f), std::move(rel)});
            } while (t > 0 && next_combination(comb, universe.size()));
        }
    }
    return out;
}

} // namespace detail

/// Enumerates pp-power specs within the bounds, checking homomorphic equivalence with B.
/// Per dimension, each output relation draws from its distinct definable relations ordered
/// by (atoms, existentials); partial choices are pruned by homomorphisms between reducts.
inline PPSearchResult bounded_pp_search(const RelStructure& a, const RelStructure& b, const PPSearchBounds& bounds,
                                        const SearchBudget& budget = {}) {
    if (bounds.max_dimension == 0) throw ValidationError("bounds need a positive dimension");
    BudgetMeter meter(budget);
    PPSearchResult res;
    res.bounds = bounds;
    const std::size_t symbols = b.relation_count();
    for (std::size_t n = 1; n <= bounds.max_dimension; ++n) {
        const std::uint64_t size = checked_power(a.size(), n);
        if (size > kDefaultPowerDomainCap) throw CapacityError("pp-power domain exceeds capacity");
        std::vector<std::vector<detail::PPCandidate>> cands(symbols);
        for (std::size_t s = 0; s < symbols; ++s) {
            bool exhausted = false;
            cands[s] = detail::pp_candidates(a, b.relation(s).arity(), n, bounds, meter, exhausted);
            if (exhausted) {
                res.outcome = Outcome::budget_exceeded;
                res.stats.nodes = meter.used();
                return res;
            }
        }
        std::vector<std::size_t> order(symbols);
        for (std::size_t s = 0; s < symbols; ++s) order[s] = s;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return cands[x].size() < cands[y].size(); });

        std::vector<std::size_t> pick(symbols, 0);
        bool budget_out = false;
        // true if the partial choice order[0..depth) admits homomorphisms both ways between reducts
        auto consistent = [&](std::size_t depth) {
            std::vector<std::pair<std::string, Relation>> rels;
            std::vector<std::pair<std::string, std::string>> keep;
            for (std::size_t i = 0; i < depth; ++i) {
                const std::size_t s = order[i];
                rels.emplace_back(b.name(s), cands[s][pick[s]].relation);
                keep.emplace_back(b.name(s), b.name(s));
            }
            const RelStructure partial(static_cast<std::size_t>(size), std::move(rels));
            const RelStructure target = b.reduct(keep);
            auto eq = hom_equivalent(partial, target, meter.remaining());
            meter.charge(eq.stats.nodes);
            if (eq.outcome == Outcome::budget_exceeded || meter.exhausted()) budget_out = true;
            return eq.found();
        };
        std::function<bool(std::size_t)> dfs = [&](std::size_t depth) -> bool {
            if (depth == symbols) return consistent(depth);
            const std::size_t s = order[depth];
            for (std::size_t c = 0; c < cands[s].size(); ++c) {
                pick[s] = c;
                if (consistent(depth + 1)) {
                    if (depth + 1 == symbols || dfs(depth + 1)) return true;
                }
                if (budget_out) return false;
            }
            return false;
        };
        const bool hit = symbols == 0 ? consistent(0) : dfs(0);
        if (hit) {
            PPPowerSpec spec;
            spec.dimension = n;
            for (std::size_t s = 0; s < symbols; ++s) {
                PPFormula f = cands[s][pick[s]].formula;
                f.name = b.name(s);
                spec.defs.push_back(std::move(f));
            }
            auto check = check_pp_constructible(a, b, spec, meter.remaining());
            meter.charge(check.stats.nodes);
            res.stats.nodes = meter.used();
            if (!check.found()) {
                if (check.outcome == Outcome::budget_exceeded) {
                    res.outcome = Outcome::budget_exceeded;
                    return res;
                }
                throw CrossCheckError("pp search accepted a spec that fails the constructibility check");
            }
            res.outcome = Outcome::found;
            res.spec = std::move(spec);
            res.construction = std::move(check.witness);
            return res;
        }
        if (budget_out) {
            res.outcome = Outcome::budget_exceeded;
            res.stats.nodes = meter.used();
            return res;
        }
    }
    res.outcome = Outcome::none;
    res.stats.nodes = meter.used();
    return res;
}

struct InterpretationCheck {
    bool surjective = false;
    std::vector<std::pair<std::string, DefinabilityResult>> checks; // domain, kernel, then B's relations

    bool accepted() const {
        return surjective && std::all_of(checks.begin(), checks.end(), [](const auto& c) {
                   return c.second.verdict == Definability::definable;
               });
    }
    bool complete() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second.complete; });
    }
};

/// Checks a user-supplied partial surjection A^n -> B (negative entries = undefined): the domain,
/// the kernel and the preimage of every relation of B must be pp-definable in A.
inline InterpretationCheck verify_pp_interpretation(const RelStructure& a, const RelStructure& b, std::size_t n,
                                                    const std::vector<std::int64_t>& map,
                                                    const SearchBudget& budget = {},
                                                    std::size_t arity_cap = kDefaultDefinabilityArityCap) {
    const TupleCoding coding(a.size(), n);
    if (map.size() != coding.count()) throw ValidationError("interpretation map must cover A^n");
    InterpretationCheck res;
    std::vector<char> hit(b.size(), 0);
    std::vector<std::size_t> dom;
    for (std::size_t x = 0; x < map.size(); ++x) {
        if (map[x] < 0) continue;
        if (static_cast<std::size_t>(map[x]) >= b.size()) throw ValidationError("interpretation value out of range");
        hit[static_cast<std::size_t>(map[x])] = 1;
        dom.push_back(x);
    }
    res.surjective = std::all_of(hit.begin(), hit.end(), [](char c) { return c != 0; });
    auto decoded = [&](std::size_t x) { return coding.decode(x); };
    {
        std::vector<Element> flat;
        for (auto x : dom) {
            auto t = decoded(x);
            flat.insert(flat.end(), t.begin(), t.end());
        }
        res.checks.emplace_back("domain", is_pp_definable(a, Relation(a.size(), n, std::move(flat)), budget, arity_cap));
    }
    {
        std::vector<Element> flat;
        for (auto x : dom)
            for (auto y : dom)
                if (map[x] == map[y]) {
                    auto tx = decoded(x), ty = decoded(y);
                    flat.insert(flat.end(), tx.begin(), tx.end());
                    flat.insert(flat.end(), ty.begin(), ty.end());
                }
        res.checks.emplace_back("kernel", is_pp_definable(a, Relation(a.size(), 2 * n, std::move(flat)), budget, arity_cap));
    }
    for (std::size_t r = 0; r < b.relation_count(); ++r) {
        const Relation& rel = b.relation(r);
        const std::size_t k = rel.arity();
        std::vector<Element> flat;
        std::vector<Element> image(k);
        for (TupleOdometer it(dom.size(), k); !it.done(); it.next()) {
            for (std::size_t i = 0; i < k; ++i) image[i] = static_cast<Element>(map[dom[it.current()[i]]]);
            if (!rel.contains(image)) continue;
            for (std::size_t i = 0; i < k; ++i) {
                auto t = decoded(dom[it.current()[i]]);
                flat.insert(flat.end(), t.begin(), t.end());
            }
        }
        res.checks.emplace_back(b.name(r), is_pp_definable(a, Relation(a.size(), k * n, std::move(flat)), budget, arity_cap));
    }
    return res;
}

} // namespace polyclone
