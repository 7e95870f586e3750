#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "polyclone/fixtures.hpp"
#include "polyclone/hom.hpp"

using namespace polyclone;

namespace {

RelStructure single_point() { return RelStructure(1, {}); }

std::vector<RelStructure> small_graphs(std::size_t max_n) {
    std::vector<RelStructure> out;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<std::pair<Element, Element>> slots;
        for (Element i = 0; i < n; ++i)
            for (Element j = i; j < n; ++j) slots.emplace_back(i, j);
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << slots.size()); ++mask) {
            std::vector<Element> flat;
            for (std::size_t s = 0; s < slots.size(); ++s) {
                if (!((mask >> s) & 1U)) continue;
                auto [i, j] = slots[s];
                flat.insert(flat.end(), {i, j});
                if (i != j) flat.insert(flat.end(), {j, i});
            }
            out.emplace_back(n, std::vector<std::pair<std::string, Relation>>{{"E", Relation(n, 2, flat)}});
        }
    }
    return out;
}

std::size_t brute_core_size(const RelStructure& a) {
    std::size_t best = a.size();
    for (const auto& f : oracle::all_homs(a, a)) best = std::min(best, std::set<Element>(f.begin(), f.end()).size());
    return best;
}

} // namespace

TEST(IsHom, IdentityAndSimpleMaps) {
    auto h = fixtures::hepp_a();
    EXPECT_TRUE(is_hom(identity_map(4), h, h));
    auto k3 = fixtures::complete_graph(3);
    EXPECT_FALSE(is_hom(HomMap{3, 3, {0, 0, 0}}, k3, k3));
    EXPECT_FALSE(is_hom(HomMap{3, 3, {0, 1}}, k3, k3));
}

TEST(IsHom, HeppProjectionAndEmbedding) {
    auto ap = fixtures::hepp_a_prime();
    auto b = fixtures::hepp_b();
    // (x1, x2) -> x1, i.e. 2a+b -> a
    EXPECT_TRUE(is_hom(HomMap{4, 2, {0, 0, 1, 1}}, ap, b));
    // x -> (x, 0), i.e. x -> 2x
    EXPECT_TRUE(is_hom(HomMap{2, 4, {0, 2}}, b, ap));
}

TEST(FindHom, BasicCases) {
    EXPECT_TRUE(find_homomorphism(single_point(), fixtures::complete_graph(3).reduct({})).found());
    auto r = find_homomorphism(fixtures::complete_graph(3), fixtures::complete_graph(2));
    EXPECT_EQ(r.outcome, Outcome::none);
    EXPECT_FALSE(r.witness);
    auto c = find_homomorphism(fixtures::hepp_b(), fixtures::hepp_a_prime());
    ASSERT_TRUE(c.found());
    EXPECT_TRUE(is_hom(*c.witness, fixtures::hepp_b(), fixtures::hepp_a_prime()));
}

TEST(FindHom, SignatureMismatchIsReported) {
    EXPECT_THROW(find_homomorphism(fixtures::le2(), fixtures::complete_graph(2)), Error);
}

TEST(FindHom, BudgetExhaustionIsDistinguishable) {
    SearchBudget tiny;
    tiny.node_limit = 1;
    auto r = find_homomorphism(fixtures::complete_graph(5), fixtures::complete_graph(4), tiny);
    EXPECT_EQ(r.outcome, Outcome::budget_exceeded);
    SearchBudget bad;
    bad.node_limit = 0;
    EXPECT_THROW(find_homomorphism(fixtures::complete_graph(2), fixtures::complete_graph(2), bad), ValidationError);
}

TEST(FindHom, AgreesWithBruteForceOnRandomInstances) {
    std::mt19937 rng(2024);
    int instances = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t sc = 2 + trial % 4, sa = 2 + (trial / 4) % 3;
        auto c = oracle::random_structure(rng, sc, {2, 1}, 0.35);
        auto a = oracle::random_structure(rng, sa, {2, 1}, 0.55);
        auto brute = oracle::all_homs(c, a);
        auto r = find_homomorphism(c, a);
        ASSERT_NE(r.outcome, Outcome::budget_exceeded);
        EXPECT_EQ(r.found(), !brute.empty()) << "trial " << trial;
        if (r.found()) {
            EXPECT_TRUE(oracle::map_is_hom(r.witness->map, c, a));
            EXPECT_TRUE(std::find(brute.begin(), brute.end(), r.witness->map) != brute.end());
        }
        ++instances;
    }
    EXPECT_GE(instances, 50);
}

TEST(FindHom, ParallelSplitFindsSameAnswer) {
    std::mt19937 rng(77);
    SearchBudget par;
    par.parallel_width = 3;
    for (int trial = 0; trial < 30; ++trial) {
        auto c = oracle::random_structure(rng, 5, {2}, 0.3);
        auto a = oracle::random_structure(rng, 3, {2}, 0.5);
        auto one = find_homomorphism(c, a);
        auto many = find_homomorphism(c, a, par);
        EXPECT_EQ(one.outcome, many.outcome);
        if (one.found()) {
            EXPECT_EQ(one.witness->map, many.witness->map);
        }
    }
}

TEST(FindIsomorphism, RelabelledCopy) {
    auto h = fixtures::hepp_a_prime();
    std::vector<Element> perm{2, 0, 3, 1};
    std::vector<std::pair<std::string, Relation>> rels;
    for (std::size_t r = 0; r < h.relation_count(); ++r) {
        std::vector<Element> flat;
        for (Element x : h.relation(r).flat()) flat.push_back(perm[x]);
        rels.emplace_back(h.name(r), Relation(4, h.relation(r).arity(), flat));
    }
    RelStructure copy(4, std::move(rels));
    auto fwd = find_isomorphism(h, copy);
    auto bwd = find_isomorphism(copy, h);
    ASSERT_TRUE(fwd.found());
    ASSERT_TRUE(bwd.found());
    EXPECT_TRUE(is_hom(*fwd.witness, h, copy));
    EXPECT_FALSE(find_isomorphism(fixtures::path3(), fixtures::complete_graph(3)).found());
}

TEST(HomEquivalent, Cases) {
    auto r = hom_equivalent(fixtures::hepp_a_prime(), fixtures::hepp_b());
    ASSERT_TRUE(r.found());
    EXPECT_TRUE(is_hom(r.witness->forward, fixtures::hepp_a_prime(), fixtures::hepp_b()));
    EXPECT_TRUE(is_hom(r.witness->backward, fixtures::hepp_b(), fixtures::hepp_a_prime()));
    EXPECT_EQ(hom_equivalent(fixtures::complete_graph(3), fixtures::complete_graph(2)).outcome, Outcome::none);
    EXPECT_TRUE(hom_equivalent(fixtures::path3(), fixtures::complete_graph(2)).found());
}

TEST(Core, TriangleIsItsOwnCore) {
    auto r = core_of(fixtures::complete_graph(3));
    ASSERT_TRUE(r.found());
    EXPECT_EQ(r.witness->subset, (std::vector<Element>{0, 1, 2}));
    EXPECT_EQ(r.witness->retraction.map, (std::vector<Element>{0, 1, 2}));
}

TEST(Core, PathRetractsToEdge) {
    auto r = core_of(fixtures::path3());
    ASSERT_TRUE(r.found());
    EXPECT_EQ(r.witness->subset, (std::vector<Element>{0, 1}));
    EXPECT_EQ(r.witness->retraction.map, (std::vector<Element>{0, 1, 0}));
    EXPECT_EQ(r.witness->structure, fixtures::complete_graph(2));
}

TEST(Core, HeppReductCoreIsB) {
    auto r = core_of(fixtures::hepp_a_prime());
    ASSERT_TRUE(r.found());
    EXPECT_EQ(r.witness->structure.size(), 2u);
    EXPECT_TRUE(find_isomorphism(r.witness->structure, fixtures::hepp_b()).found());
}

TEST(Core, MatchesBruteForceOnAllSmallGraphs) {
    for (const auto& g : small_graphs(4)) {
        auto r = core_of(g);
        ASSERT_TRUE(r.found());
        const Core& c = *r.witness;
        EXPECT_EQ(c.structure.size(), brute_core_size(g));
        EXPECT_TRUE(is_hom(c.retraction, g, c.structure));
        auto again = core_of(c.structure);
        ASSERT_TRUE(again.found());
        EXPECT_TRUE(find_isomorphism(again.witness->structure, c.structure).found());
        EXPECT_TRUE(hom_equivalent(g, c.structure).found());
    }
}

TEST(Singletons, AddsMissingPoints) {
    auto s = add_singletons(fixtures::le2());
    EXPECT_EQ(s.relation_count(), 3u);
    EXPECT_EQ(s.relation("c0").tuples(), (std::vector<Tuple>{{0}}));
    EXPECT_EQ(s.relation("c1").tuples(), (std::vector<Tuple>{{1}}));
    EXPECT_EQ(add_singletons(s), s);
}

TEST(Singletons, TriangleWithPointsIsRigid) {
    auto s = add_singletons(fixtures::complete_graph(3));
    auto brute = oracle::all_homs(s, s);
    ASSERT_EQ(brute.size(), 1u);
    EXPECT_EQ(brute.front(), (std::vector<Element>{0, 1, 2}));
    auto r = find_homomorphism(s, s);
    ASSERT_TRUE(r.found());
    EXPECT_EQ(r.witness->map, brute.front());
}
