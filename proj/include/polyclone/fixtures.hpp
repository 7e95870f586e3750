#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "clone.hpp"
#include "hom.hpp"
#include "operation.hpp"
#include "structure.hpp"

namespace polyclone::fixtures {

/// The relation {t in d^n : pred(t)}.
inline Relation relation_where(std::size_t d, std::size_t n, const std::function<bool(const Tuple&)>& pred) {
    std::vector<Element> flat;
    for (TupleOdometer it(d, n); !it.done(); it.next())
        if (pred(it.current())) flat.insert(flat.end(), it.current().begin(), it.current().end());
    return Relation(d, n, std::move(flat));
}

inline RelStructure complete_graph(std::size_t n) {
    return RelStructure(n, {{"E", relation_where(n, 2, [](const Tuple& t) { return t[0] != t[1]; })}});
}

/// Undirected path 0 - 1 - 2.
inline RelStructure path3() {
    return RelStructure(3, {{"E", relation_where(3, 2, [](const Tuple& t) {
                                 return t[0] + 1 == t[1] || t[1] + 1 == t[0];
                             })}});
}

inline Relation le_relation() { return relation_where(2, 2, [](const Tuple& t) { return t[0] <= t[1]; }); }
inline Relation xor0_relation() {
    return relation_where(2, 3, [](const Tuple& t) { return ((t[0] ^ t[1] ^ t[2]) & 1U) == 0; });
}
inline Relation one_in_three_relation() {
    return relation_where(2, 3, [](const Tuple& t) { return t[0] + t[1] + t[2] == 1; });
}
inline Relation nae_relation() {
    return relation_where(2, 3, [](const Tuple& t) { return !(t[0] == t[1] && t[1] == t[2]); });
}
inline Relation diseq_relation() { return relation_where(2, 2, [](const Tuple& t) { return t[0] != t[1]; }); }

/// ({0,1}; le)
inline RelStructure le2() { return RelStructure(2, {{"le", le_relation()}}); }

/// ({0,1}; le, {0}, {1})
inline RelStructure boolean_order() { return add_singletons(le2()); }

/// ({0,1}; R, {0}, {1}) with R = {(1,0,0),(0,1,0),(0,0,1)}; its polymorphisms are projections.
inline RelStructure projection_test_structure() {
    return add_singletons(RelStructure(2, {{"R", one_in_three_relation()}}));
}

/// Named Boolean relations used to build the Boolean corpus.
inline std::vector<std::pair<std::string, Relation>> boolean_relations() {
    return {{"le", le_relation()},
            {"xor0", xor0_relation()},
            {"one_in_three", one_in_three_relation()},
            {"nae", nae_relation()},
            {"diseq", diseq_relation()}};
}

/// Singletons plus one relation, and singletons plus each pair of relations.
inline std::vector<std::pair<std::string, RelStructure>> boolean_corpus() {
    const auto rels = boolean_relations();
    std::vector<std::pair<std::string, RelStructure>> out;
    for (const auto& [name, rel] : rels) out.emplace_back(name, add_singletons(RelStructure(2, {{name, rel}})));
    for (std::size_t i = 0; i < rels.size(); ++i)
        for (std::size_t j = i + 1; j < rels.size(); ++j)
            out.emplace_back(rels[i].first + "+" + rels[j].first,
                             add_singletons(RelStructure(2, {rels[i], rels[j]})));
    return out;
}

/// Equivalence relation of a partition of {0..n-1}, given as block labels.
inline Relation partition_relation(const std::vector<Element>& block) {
    return relation_where(block.size(), 2, [&](const Tuple& t) { return block[t[0]] == block[t[1]]; });
}

/// ({0,1,2,3}; alpha, beta, gamma) for the partitions 01|23, 02|13, 01|2|3.
inline RelStructure day_structure() {
    return RelStructure(4, {{"alpha", partition_relation({0, 0, 1, 1})},
                            {"beta", partition_relation({0, 1, 0, 1})},
                            {"gamma", partition_relation({0, 0, 1, 2})}});
}

/// Z2^2 (pair (a,b) encoded as 2a+b) with x+y+z = c for every c, and all singletons.
inline RelStructure hepp_a() {
    std::vector<std::pair<std::string, Relation>> rels;
    for (Element c = 0; c < 4; ++c) {
        rels.emplace_back("R" + std::to_string(c >> 1) + std::to_string(c & 1), relation_where(4, 3, [c](const Tuple& t) {
                              return (t[0] ^ t[1] ^ t[2]) == c;
                          }));
        rels.emplace_back("c" + std::to_string(c), Relation(4, 1, std::vector<Element>{c}));
    }
    return RelStructure(4, std::move(rels));
}

/// The reduct of hepp_a keeping the sums (0,0), (1,0) and the points (0,0), (1,0), named as in hepp_b.
inline RelStructure hepp_a_prime() {
    return hepp_a().reduct({{"R00", "R0"}, {"R10", "R1"}, {"c0", "c0"}, {"c2", "c1"}});
}

/// Z2 with x+y+z = 0, x+y+z = 1 and both points.
inline RelStructure hepp_b() {
    return RelStructure(2, {{"R0", relation_where(2, 3, [](const Tuple& t) { return ((t[0] ^ t[1] ^ t[2]) & 1U) == 0; })},
                            {"R1", relation_where(2, 3, [](const Tuple& t) { return ((t[0] ^ t[1] ^ t[2]) & 1U) == 1; })},
                            {"c0", Relation(2, 1, std::vector<Element>{0})},
                            {"c1", Relation(2, 1, std::vector<Element>{1})}});
}

inline CloneGenSet projection_clone(std::size_t d = 2) { return CloneGenSet(d, {}); }
inline CloneGenSet minority_clone() { return CloneGenSet(2, {ops::minority()}); }
inline CloneGenSet minmax_clone() { return CloneGenSet(2, {ops::boolean_min(), ops::boolean_max()}); }

} // namespace polyclone::fixtures
