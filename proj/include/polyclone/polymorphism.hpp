#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "csp.hpp"
#include "hom.hpp"
#include "identities.hpp"
#include "operation.hpp"
#include "structure.hpp"

namespace polyclone {

/// Upper bound on total constraint scope entries generated for one table search.
inline constexpr std::uint64_t kDefaultScopeEntryCap = 16'000'000;

/// Table search as a CSP: one variable per class of table cells merged by the identities.
struct CellProblem {
    std::size_t domain_size = 0;
    std::vector<std::size_t> arities;
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> var_of_cell;
    std::shared_ptr<csp::Problem> problem; // null when the identities alone are contradictory

    std::vector<OperationTable> decode(std::span<const Element> assignment) const {
        std::vector<OperationTable> ops;
        for (std::size_t s = 0; s < arities.size(); ++s) {
            const std::size_t cells = static_cast<std::size_t>(checked_power(domain_size, arities[s]));
            std::vector<Element> table(cells);
            for (std::size_t c = 0; c < cells; ++c) table[c] = assignment[var_of_cell[offsets[s] + c]];
            ops.emplace_back(domain_size, arities[s], std::move(table));
        }
        return ops;
    }
};

inline CellProblem build_cell_problem(const RelStructure& a, const H1IdentitySystem& sys) {
    CellProblem cp;
    const std::size_t d = a.size();
    cp.domain_size = d;
    std::size_t total = 0;
    for (const auto& sym : sys.symbols()) {
        const std::uint64_t cells = checked_power(d, sym.arity);
        if (cells > kDefaultTableCellCap) throw CapacityError("operation table exceeds the cell capacity");
        cp.arities.push_back(sym.arity);
        cp.offsets.push_back(total);
        total += static_cast<std::size_t>(cells);
        if (total > kDefaultTableCellCap) throw CapacityError("identity system exceeds the cell capacity");
    }

    // cells, then one node per constant
    csp::UnionFind uf(total + d);
    std::vector<Element> val(sys.variables().size(), 0);
    auto node = [&](const FlatTerm& t) -> std::size_t {
        if (t.is_variable()) return total + val[t.args[0]];
        std::size_t code = 0;
        for (auto v : t.args) code = code * d + val[v];
        return cp.offsets[t.symbol] + code;
    };
    for (const auto& id : sys.equations()) {
        const auto vars = identity_variables(id);
        for (TupleOdometer it(d, vars.size()); !it.done(); it.next()) {
            for (std::size_t i = 0; i < vars.size(); ++i) val[vars[i]] = it.current()[i];
            uf.unite(node(id.lhs), node(id.rhs));
        }
    }
    std::vector<std::int64_t> constant_of(total + d, -1);
    for (std::size_t c = 0; c < d; ++c) {
        auto& slot = constant_of[uf.find(total + c)];
        if (slot >= 0) return cp; // two distinct constants identified
        slot = static_cast<std::int64_t>(c);
    }

    cp.var_of_cell.assign(total, 0);
    std::vector<std::int64_t> var_of_root(total + d, -1);
    std::uint32_t vars = 0;
    for (std::size_t c = 0; c < total; ++c) {
        auto& v = var_of_root[uf.find(c)];
        if (v < 0) v = vars++;
        cp.var_of_cell[c] = static_cast<std::uint32_t>(v);
    }
    auto p = std::make_shared<csp::Problem>(vars, d);
    for (std::size_t root = 0; root < total + d; ++root)
        if (var_of_root[root] >= 0 && constant_of[root] >= 0)
            p->fix(static_cast<std::uint32_t>(var_of_root[root]), static_cast<Element>(constant_of[root]));

    std::uint64_t entries = 0;
    std::vector<std::uint32_t> scope;
    for (std::size_t r = 0; r < a.relation_count(); ++r) {
        const Relation& rel = a.relation(r);
        if (rel.empty()) continue;
        const std::uint32_t rid = p->add_relation(a.shared_relation(r));
        const std::size_t m = rel.arity();
        for (std::size_t s = 0; s < cp.arities.size(); ++s) {
            const std::size_t n = cp.arities[s];
            entries += checked_power(rel.size(), n) * m;
            if (entries > kDefaultScopeEntryCap)
                throw CapacityError("too many preservation constraints for table search");
            scope.assign(m, 0);
            for (TupleOdometer pick(rel.size(), n); !pick.done(); pick.next()) {
                for (std::size_t j = 0; j < m; ++j) {
                    std::size_t code = 0;
                    for (std::size_t i = 0; i < n; ++i) code = code * d + rel.tuple(pick.current()[i])[j];
                    scope[j] = cp.var_of_cell[cp.offsets[s] + code];
                }
                p->add_constraint(rid, scope);
            }
        }
    }
    p->dedup();
    cp.problem = std::move(p);
    return cp;
}

using OperationsResult = SearchResult<std::vector<OperationTable>>;

/// Polymorphisms of `a` jointly satisfying `sys`. Witnesses are re-verified independently.
inline OperationsResult find_operation_satisfying(const RelStructure& a, const H1IdentitySystem& sys,
                                                  const SearchBudget& budget = {}) {
    budget.validate();
    const CellProblem cp = build_cell_problem(a, sys);
    OperationsResult r;
    if (!cp.problem) return r;
    auto sol = csp::solve_first(cp.problem, budget);
    r.outcome = sol.outcome;
    r.stats = sol.stats;
    if (sol.outcome != Outcome::found) return r;
    auto ops = cp.decode(sol.assignment);
    for (const auto& f : ops)
        if (!is_polymorphism(f, a)) throw CrossCheckError("table search returned a non-polymorphism");
    if (!satisfies(sys, a.size(), ops)) throw CrossCheckError("table search violated an identity");
    r.witness = std::move(ops);
    return r;
}

inline SearchResult<OperationTable> single_operation(OperationsResult r) {
    SearchResult<OperationTable> out;
    out.outcome = r.outcome;
    out.stats = r.stats;
    if (r.witness) out.witness = std::move(r.witness->front());
    return out;
}

/// A 4-ary polymorphism with t(a,r,e,a) = t(r,a,r,e).
inline SearchResult<OperationTable> has_siggers(const RelStructure& a, const SearchBudget& budget = {}) {
    return single_operation(find_operation_satisfying(a, siggers_system(), budget));
}

/// An n-ary polymorphism invariant under cyclic shift of its arguments.
inline SearchResult<OperationTable> has_cyclic(const RelStructure& a, std::size_t n,
                                               const SearchBudget& budget = {}) {
    return single_operation(find_operation_satisfying(a, cyclic_system(n), budget));
}

inline H1IdentitySystem single_symbol_system(std::size_t n) {
    H1IdentitySystem sys;
    sys.add_symbol("f", n);
    return sys;
}

using OperationCallback = std::function<bool(const OperationTable&)>;

/// Streams the n-ary polymorphisms of `a` in lexicographic table order.
/// Returns none when the stream ran to completion, found when the callback stopped it.
inline Outcome for_each_polymorphism(const RelStructure& a, std::size_t n, const OperationCallback& cb,
                                     const SearchBudget& budget = {}, SearchStats* stats = nullptr) {
    const CellProblem cp = build_cell_problem(a, single_symbol_system(n));
    csp::Solver solver(cp.problem, budget, csp::VariableOrder::lexicographic);
    const Outcome o = solver.search(
        [&](std::span<const Element> s) {
            auto ops = cp.decode(s);
            if (!is_polymorphism(ops.front(), a))
                throw CrossCheckError("polymorphism stream produced a non-polymorphism");
            return cb(ops.front());
        },
        {});
    if (stats) stats->nodes = solver.nodes();
    return o;
}

/// All n-ary polymorphisms, sorted; found means the list is complete.
inline OperationsResult polymorphisms(const RelStructure& a, std::size_t n, const SearchBudget& budget = {}) {
    OperationsResult r;
    std::vector<OperationTable> out;
    const Outcome o = for_each_polymorphism(
        a, n,
        [&](const OperationTable& f) {
            out.push_back(f);
            return true;
        },
        budget, &r.stats);
    r.outcome = o == Outcome::none ? Outcome::found : o;
    r.witness = std::move(out);
    return r;
}

using ProjectionCallback = std::function<bool(std::span<const Element> image, const std::vector<Element>& solution)>;

/// Enumerates the distinct value vectors (f(c) for c in `cells`) over the solutions of a
/// single-symbol cell problem; `solution` decodes with cp.decode. Cells are table indices.
/// Returns none when exhausted, found when stopped by the callback.
inline Outcome project_cells(const CellProblem& cp, std::span<const std::size_t> cells, const ProjectionCallback& cb,
                             const SearchBudget& budget = {}, SearchStats* stats = nullptr) {
    if (!cp.problem) return Outcome::none;
    std::vector<std::uint32_t> focus;
    for (auto c : cells) {
        const auto v = cp.var_of_cell.at(c);
        if (std::find(focus.begin(), focus.end(), v) == focus.end()) focus.push_back(v);
    }
    std::sort(focus.begin(), focus.end());
    if (focus.empty()) {
        auto first = csp::solve_first(cp.problem, budget, csp::VariableOrder::lexicographic);
        if (stats) stats->nodes = first.stats.nodes;
        if (first.outcome != Outcome::found) return first.outcome;
        return cb({}, first.assignment) ? Outcome::none : Outcome::found;
    }
    csp::Solver solver(cp.problem, budget, csp::VariableOrder::lexicographic);
    std::vector<Element> image(cells.size());
    std::vector<Element> solution;
    const Outcome o = solver.search(
        [&](std::span<const Element> s) {
            for (std::size_t i = 0; i < cells.size(); ++i) image[i] = s[cp.var_of_cell[cells[i]]];
            solution.assign(s.begin(), s.end());
            return cb(image, solution);
        },
        focus);
    if (stats) stats->nodes = solver.nodes();
    return o;
}

/// Distinct images of the given table cells under the n-ary polymorphisms of `a`.
inline Outcome for_each_polymorphism_projection(const RelStructure& a, std::size_t n,
                                                std::span<const std::size_t> cells, const ProjectionCallback& cb,
                                                const SearchBudget& budget = {}, SearchStats* stats = nullptr) {
    return project_cells(build_cell_problem(a, single_symbol_system(n)), cells, cb, budget, stats);
}

} // namespace polyclone
