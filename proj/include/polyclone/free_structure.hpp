#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clone.hpp"
#include "hom.hpp"
#include "identities.hpp"
#include "operation.hpp"
#include "polymorphism.hpp"
#include "structure.hpp"
#include "structure_io.hpp"

namespace polyclone {

/// A clone given either by generators or as Pol(A) of a structure.
using CloneSource = std::variant<CloneGenSet, RelStructure>;

inline std::size_t clone_domain_size(const CloneSource& src) {
    if (const auto* g = std::get_if<CloneGenSet>(&src)) return g->domain_size;
    return std::get<RelStructure>(src).size();
}

/// Members of the clone of arity n (all of them), sorted. found means complete.
inline OperationsResult clone_members(const CloneSource& src, std::size_t n, const SearchBudget& budget = {}) {
    if (const auto* g = std::get_if<CloneGenSet>(&src)) return generate_to_arity(*g, n, budget);
    return polymorphisms(std::get<RelStructure>(src), n, budget);
}

/// The |B|-ary members of a clone together with the relations of B lifted to them.
struct FreeStructure {
    std::size_t domain_size = 0;
    RelStructure target;
    std::vector<OperationTable> carrier; // sorted
    std::vector<std::size_t> generator_index; // b -> index of the b-th projection
    RelStructure lifted; // on carrier indices, same signature as target

    std::optional<std::size_t> find(const OperationTable& f) const {
        auto it = std::lower_bound(carrier.begin(), carrier.end(), f);
        if (it == carrier.end() || !(*it == f)) return std::nullopt;
        return static_cast<std::size_t>(it - carrier.begin());
    }
};

using FreeResult = SearchResult<FreeStructure>;

namespace detail {

/// Lifted relations by closing generator tuples under the generators, acting on carrier indices.
inline std::optional<Relation> lift_by_generators(const CloneGenSet& clone, const std::vector<OperationTable>& carrier,
                                                  const RowSet& carrier_set, const std::vector<std::size_t>& gen_index,
                                                  const Relation& r, BudgetMeter& meter) {
    const std::size_t n_car = carrier.size();
    const std::size_t k = r.arity();
    const std::size_t cells = carrier.empty() ? 0 : carrier.front().table().size();
    const std::size_t d = clone.domain_size;
    // action tables on carrier indices where affordable
    std::vector<std::vector<Element>> action(clone.generators.size());
    std::vector<std::size_t> arities;
    std::vector<char> symmetric;
    auto combine = [&](const OperationTable& g, std::span<const std::size_t> ids) {
        std::vector<Element> t(cells);
        for (std::size_t p = 0; p < cells; ++p) {
            std::size_t code = 0;
            for (auto id : ids) code = code * d + carrier[id].table()[p];
            t[p] = g.table()[code];
        }
        auto idx = carrier_set.find(t);
        if (!idx) throw CrossCheckError("clone action left the free structure carrier");
        return static_cast<Element>(*idx);
    };
    for (std::size_t gi = 0; gi < clone.generators.size(); ++gi) {
        const auto& g = clone.generators[gi];
        arities.push_back(g.arity());
        symmetric.push_back(is_symmetric(g) ? 1 : 0);
        if (checked_power(n_car, g.arity()) > (std::uint64_t{1} << 22)) continue;
        auto& act = action[gi];
        act.resize(static_cast<std::size_t>(checked_power(n_car, g.arity())));
        std::vector<std::size_t> ids(g.arity());
        for (std::size_t c = 0; c < act.size(); ++c) {
            std::size_t rest = c;
            for (std::size_t i = g.arity(); i-- > 0;) {
                ids[i] = rest % n_car;
                rest /= n_car;
            }
            act[c] = combine(g, ids);
        }
    }
    RowSet rows(k);
    std::vector<Element> seed(k);
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (std::size_t j = 0; j < k; ++j) seed[j] = static_cast<Element>(gen_index[r.tuple(i)[j]]);
        rows.insert(seed);
    }
    if (rows.size() == 0 && std::none_of(arities.begin(), arities.end(), [](std::size_t a) { return a == 0; }))
        return Relation(n_car, k, std::vector<Element>{});
    const bool done = semi_naive_closure(
        rows, arities,
        [&](std::size_t gi, std::span<const std::size_t> ids, std::span<Element> out) {
            const auto& act = action[gi];
            if (!act.empty()) {
                for (std::size_t p = 0; p < out.size(); ++p) {
                    std::size_t code = 0;
                    for (auto id : ids) code = code * n_car + rows.row(id)[p];
                    out[p] = act[code];
                }
                return;
            }
            std::vector<std::size_t> args(ids.size());
            for (std::size_t p = 0; p < out.size(); ++p) {
                for (std::size_t a = 0; a < ids.size(); ++a) args[a] = rows.row(ids[a])[p];
                out[p] = combine(clone.generators[gi], args);
            }
        },
        meter, symmetric);
    if (!done) return std::nullopt;
    std::vector<Element> flat;
    for (std::size_t i = 0; i < rows.size(); ++i) flat.insert(flat.end(), rows.row(i).begin(), rows.row(i).end());
    return Relation(n_car, k, std::move(flat));
}

/// Lifted relation over Pol(A): the tuples (f(x_{r1[j]},...,x_{rm[j]}))_j for |R|-ary polymorphisms f.
inline std::optional<Relation> lift_by_polymorphisms(const RelStructure& a, std::size_t n, const RowSet& carrier_set,
                                                     std::size_t n_car, const Relation& r, BudgetMeter& meter) {
    const std::size_t d = a.size();
    const std::size_t m = r.size();
    const std::size_t k = r.arity();
    if (m == 0) return Relation(n_car, k, std::vector<Element>{});
    if (checked_power(d, m) > kDefaultTableCellCap)
        throw CapacityError("relation too large to lift through polymorphisms of its size");
    const TupleCoding points(d, n);
    const std::size_t cells_per = static_cast<std::size_t>(points.count());
    std::vector<std::size_t> cells;
    cells.reserve(k * cells_per);
    Tuple x(n);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t p = 0; p < cells_per; ++p) {
            points.decode_into(p, x);
            std::size_t code = 0;
            for (std::size_t i = 0; i < m; ++i) code = code * d + x[r.tuple(i)[j]];
            cells.push_back(code);
        }
    std::vector<Element> flat;
    SearchStats st;
    const Outcome o = for_each_polymorphism_projection(
        a, m, cells,
        [&](std::span<const Element> image, const std::vector<Element>&) {
            for (std::size_t j = 0; j < k; ++j) {
                auto idx = carrier_set.find(image.subspan(j * cells_per, cells_per));
                if (!idx) throw CrossCheckError("lifted tuple outside the polymorphism carrier");
                flat.push_back(static_cast<Element>(*idx));
            }
            return !meter.exhausted();
        },
        meter.remaining(), &st);
    meter.charge(st.nodes);
    if (o != Outcome::none) return std::nullopt;
    return Relation(n_car, k, std::move(flat));
}

} // namespace detail

inline FreeResult free_structure(const CloneSource& src, const RelStructure& b, const SearchBudget& budget = {}) {
    const std::size_t d = clone_domain_size(src);
    const std::size_t n = b.size();
    if (checked_power(d, n) > kDefaultTableCellCap) throw CapacityError("free structure tables exceed capacity");
    BudgetMeter meter(budget);
    FreeResult res;
    auto members = clone_members(src, n, meter.remaining());
    meter.charge(members.stats.nodes);
    res.stats.nodes = meter.used();
    if (!members.found()) {
        res.outcome = Outcome::budget_exceeded;
        return res;
    }
    std::vector<OperationTable> carrier = std::move(*members.witness);
    const std::size_t cells = static_cast<std::size_t>(checked_power(d, n));
    RowSet carrier_set(cells);
    for (const auto& f : carrier) carrier_set.insert(f.table());
    std::vector<std::size_t> gen_index(n);
    for (std::size_t x = 0; x < n; ++x) {
        auto idx = carrier_set.find(projection(d, n, x + 1).table());
        if (!idx) throw CrossCheckError("clone members lack a projection");
        gen_index[x] = *idx;
    }
    std::vector<std::pair<std::string, Relation>> lifted;
    for (std::size_t r = 0; r < b.relation_count(); ++r) {
        std::optional<Relation> rel;
        if (const auto* g = std::get_if<CloneGenSet>(&src))
            rel = detail::lift_by_generators(*g, carrier, carrier_set, gen_index, b.relation(r), meter);
        else
            rel = detail::lift_by_polymorphisms(std::get<RelStructure>(src), n, carrier_set, carrier.size(),
                                                b.relation(r), meter);
        res.stats.nodes = meter.used();
        if (!rel) {
            res.outcome = Outcome::budget_exceeded;
            return res;
        }
        lifted.emplace_back(b.name(r), std::move(*rel));
    }
    const std::size_t n_car = carrier.size();
    res.outcome = Outcome::found;
    res.witness = FreeStructure{d, b, std::move(carrier), std::move(gen_index), RelStructure(n_car, std::move(lifted))};
    return res;
}

inline Json free_structure_to_json(const FreeStructure& f) {
    Json j;
    j["domain_size"] = f.domain_size;
    j["target"] = structure_to_json(f.target);
    Json car = Json::array();
    for (const auto& t : f.carrier) car.push_back(t.table());
    j["carrier"] = std::move(car);
    j["generator_index"] = f.generator_index;
    j["lifted"] = structure_to_json(f.lifted);
    return j;
}

/// A map from the carrier to B sending lifted tuples into B's relations.
struct Coloring {
    std::vector<Element> map;
    bool strong = false;
};

inline bool is_coloring(const FreeStructure& f, const Coloring& c) {
    if (c.map.size() != f.carrier.size()) return false;
    if (!is_hom(HomMap{f.carrier.size(), f.target.size(), c.map}, f.lifted, f.target)) return false;
    if (c.strong)
        for (std::size_t x = 0; x < f.generator_index.size(); ++x)
            if (c.map[f.generator_index[x]] != x) return false;
    return true;
}

/// Homomorphism search from the lifted structure to B; strong pins the projections.
inline SearchResult<Coloring> find_coloring(const FreeStructure& f, bool strong, const SearchBudget& budget = {}) {
    auto p = hom_problem(f.lifted, f.target);
    if (strong)
        for (std::size_t x = 0; x < f.generator_index.size(); ++x)
            p->fix(static_cast<std::uint32_t>(f.generator_index[x]), static_cast<Element>(x));
    auto h = solve_hom_problem(p, f.target.size(), budget);
    SearchResult<Coloring> r;
    r.outcome = h.outcome;
    r.stats = h.stats;
    if (h.witness) {
        Coloring c{std::move(h.witness->map), strong};
        if (!is_coloring(f, c)) throw CrossCheckError("coloring search returned an invalid coloring");
        r.witness = std::move(c);
    }
    return r;
}

/// The operation on B induced by a clone member: b1..bn -> c(f(pi_b1, ..., pi_bn)).
inline OperationTable induced_operation(const FreeStructure& fs, const Coloring& c, const OperationTable& f) {
    const std::size_t nb = fs.target.size();
    std::vector<OperationTable> projections;
    for (std::size_t x = 0; x < nb; ++x) projections.push_back(projection(fs.domain_size, nb, x + 1));
    std::vector<OperationTable> args(f.arity(), projections.front());
    return OperationTable::from_function(nb, f.arity(), [&](std::span<const Element> bs) {
        for (std::size_t i = 0; i < bs.size(); ++i) args[i] = projections[bs[i]];
        auto idx = fs.find(compose(f, args));
        if (!idx) throw ValidationError("operation is not a member of the colored clone");
        return c.map[*idx];
    });
}

struct InducedCheck {
    std::size_t operations_checked = 0;
    bool all_preserve = true;
    bool complete = true; // every member up to the arity bound was checked
    std::vector<OperationTable> induced; // distinct induced operations, sorted
};

inline constexpr std::size_t kDefaultInducedSampleCap = 512;

/// Induced operations of clone members of arity <= max_arity must be polymorphisms of B.
inline InducedCheck check_induced_operations(const CloneSource& src, const FreeStructure& fs, const Coloring& c,
                                             std::size_t max_arity = 3, const SearchBudget& budget = {},
                                             std::size_t per_arity_cap = kDefaultInducedSampleCap) {
    InducedCheck out;
    const std::size_t d = clone_domain_size(src);
    auto visit = [&](const OperationTable& f) {
        OperationTable g = induced_operation(fs, c, f);
        ++out.operations_checked;
        if (!is_polymorphism(g, fs.target)) out.all_preserve = false;
        out.induced.push_back(std::move(g));
    };
    for (std::size_t n = 1; n <= max_arity; ++n) {
        if (checked_power(d, n) > kDefaultTableCellCap) break;
        std::size_t seen = 0;
        if (const auto* g = std::get_if<CloneGenSet>(&src)) {
            auto members = generate_to_arity(*g, n, budget);
            if (!members.found()) out.complete = false;
            for (const auto& f : *members.witness) {
                if (seen++ == per_arity_cap) {
                    out.complete = false;
                    break;
                }
                visit(f);
            }
        } else {
            const Outcome o = for_each_polymorphism(
                std::get<RelStructure>(src), n,
                [&](const OperationTable& f) {
                    if (seen++ == per_arity_cap) return false;
                    visit(f);
                    return true;
                },
                budget);
            if (o != Outcome::none) out.complete = false;
        }
    }
    std::sort(out.induced.begin(), out.induced.end());
    out.induced.erase(std::unique(out.induced.begin(), out.induced.end()), out.induced.end());
    return out;
}

struct H1Result {
    Outcome outcome = Outcome::none; // found: an h1 clone homomorphism Pol(A) -> Pol(B) exists
    std::optional<Coloring> coloring;
    std::optional<InducedCheck> induced;
    std::size_t carrier_size = 0;
    SearchStats stats;
};

/// Pol(A) is B-colorable iff an h1 clone homomorphism Pol(A) -> Pol(B) exists.
inline H1Result h1_homomorphism_exists(const RelStructure& a, const RelStructure& b, const SearchBudget& budget = {}) {
    BudgetMeter meter(budget);
    H1Result res;
    const CloneSource src = a;
    auto fs = free_structure(src, b, meter.remaining());
    meter.charge(fs.stats.nodes);
    res.stats.nodes = meter.used();
    if (!fs.found()) {
        res.outcome = fs.outcome;
        return res;
    }
    res.carrier_size = fs.witness->carrier.size();
    if (meter.exhausted()) {
        res.outcome = Outcome::budget_exceeded;
        return res;
    }
    auto col = find_coloring(*fs.witness, false, meter.remaining());
    meter.charge(col.stats.nodes);
    res.stats.nodes = meter.used();
    res.outcome = col.outcome;
    if (!col.found()) return res;
    res.coloring = col.witness;
    res.induced = check_induced_operations(src, *fs.witness, *col.witness, 3, meter.remaining());
    if (!res.induced->all_preserve)
        throw CrossCheckError("a coloring induced an operation that is not a polymorphism of the target");
    return res;
}

/// True iff every operation of arity <= max_arity on {0,1} preserving T is a projection,
/// checked by brute force over all tables.
inline bool only_projections_up_to(const RelStructure& t, std::size_t max_arity) {
    const std::size_t d = t.size();
    for (std::size_t n = 1; n <= max_arity; ++n) {
        const std::size_t cells = static_cast<std::size_t>(checked_power(d, n));
        if (checked_power(d, cells) > (std::uint64_t{1} << 24)) throw CapacityError("brute-force projection check too large");
        for (TupleOdometer it(d, cells); !it.done(); it.next()) {
            OperationTable f(d, n, it.current());
            if (is_polymorphism(f, t) && !is_projection(f)) return false;
        }
    }
    return true;
}

inline const RelStructure& validated_projection_structure() {
    static const RelStructure t = [] {
        RelStructure s = add_singletons(RelStructure(2, {{"R", Relation(2, 3, std::vector<Element>{0, 0, 1, 0, 1, 0, 1, 0, 0})}}));
        if (!only_projections_up_to(s, 3))
            throw CrossCheckError("projection-test structure admits a non-projection polymorphism");
        return s;
    }();
    return t;
}

struct ProjectionsResult {
    Outcome outcome = Outcome::budget_exceeded; // found: Pol(A) maps to projections by an h1 homomorphism
    Outcome siggers_outcome = Outcome::budget_exceeded;
    Outcome coloring_outcome = Outcome::budget_exceeded;
    std::optional<OperationTable> siggers;
    std::optional<Coloring> coloring;
    std::size_t carrier_size = 0;
    SearchStats stats;
};

/// Decides two ways: (a) no Siggers polymorphism; (b) Pol(A) is colorable by the projection-test
/// structure. (a) is authoritative; a disagreement between decided answers is an internal error.
inline ProjectionsResult h1_to_projections(const RelStructure& a, const SearchBudget& budget = {}) {
    BudgetMeter meter(budget);
    ProjectionsResult res;
    auto sig = has_siggers(a, meter.remaining());
    meter.charge(sig.stats.nodes);
    res.siggers_outcome = sig.outcome;
    res.siggers = sig.witness;
    if (!meter.exhausted()) {
        auto h1 = h1_homomorphism_exists(a, validated_projection_structure(), meter.remaining());
        meter.charge(h1.stats.nodes);
        res.coloring_outcome = h1.outcome;
        res.coloring = h1.coloring;
        res.carrier_size = h1.carrier_size;
    }
    res.stats.nodes = meter.used();
    const bool a_decided = res.siggers_outcome != Outcome::budget_exceeded;
    const bool b_decided = res.coloring_outcome != Outcome::budget_exceeded;
    const Outcome from_a = res.siggers_outcome == Outcome::found ? Outcome::none : Outcome::found;
    if (a_decided && b_decided && from_a != res.coloring_outcome)
        throw CrossCheckError("Siggers search and projection coloring disagree");
    if (a_decided)
        res.outcome = from_a;
    else if (b_decided)
        res.outcome = res.coloring_outcome;
    return res;
}

} // namespace polyclone
