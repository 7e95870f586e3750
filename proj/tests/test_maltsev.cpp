#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "polyclone/fixtures.hpp"
#include "polyclone/maltsev.hpp"

using namespace polyclone;

namespace {

RelStructure affine_points() { return add_singletons(RelStructure(2, {{"xor0", fixtures::xor0_relation()}})); }
CloneGenSet majority_clone() { return CloneGenSet(2, {ops::majority()}); }

// Ternary members as raw tables on {0,1}, from an independent source.
std::vector<std::vector<Element>> ternary_members(const CloneSource& src) {
    if (const auto* a = std::get_if<RelStructure>(&src)) return oracle::all_polymorphisms(*a, 3);
    auto r = generate_to_arity(std::get<CloneGenSet>(src), 3);
    std::vector<std::vector<Element>> out;
    for (const auto& f : *r.witness) out.push_back(f.table());
    return out;
}

// Shortest Hagemann-Mitschke chain length n (<= cap), by breadth-first search over binary minors.
std::optional<std::size_t> shortest_chain(const std::vector<std::vector<Element>>& members, std::size_t cap) {
    auto xyy = [](const std::vector<Element>& t) {
        std::vector<Element> b;
        for (Element x = 0; x < 2; ++x)
            for (Element y = 0; y < 2; ++y) b.push_back(oracle::apply(t, 2, {x, y, y}));
        return b;
    };
    auto xxy = [](const std::vector<Element>& t) {
        std::vector<Element> b;
        for (Element x = 0; x < 2; ++x)
            for (Element y = 0; y < 2; ++y) b.push_back(oracle::apply(t, 2, {x, x, y}));
        return b;
    };
    const std::vector<Element> first{0, 0, 1, 1}, second{0, 1, 0, 1};
    std::set<std::vector<Element>> frontier{first};
    for (std::size_t n = 2; n <= cap; ++n) {
        std::set<std::vector<Element>> next;
        for (const auto& t : members)
            if (frontier.count(xyy(t))) next.insert(xxy(t));
        if (next.count(second)) return n;
        frontier = std::move(next);
    }
    return std::nullopt;
}

RelStructure relabel(const RelStructure& b, const std::vector<Element>& perm) {
    std::vector<std::pair<std::string, Relation>> rels;
    for (std::size_t r = 0; r < b.relation_count(); ++r) {
        std::vector<Element> flat;
        for (Element x : b.relation(r).flat()) flat.push_back(perm[x]);
        rels.emplace_back(b.name(r), Relation(b.size(), b.relation(r).arity(), flat));
    }
    return RelStructure(b.size(), std::move(rels));
}

std::vector<CloneSource> corpus() {
    return {fixtures::projection_clone(), fixtures::minority_clone(), fixtures::minmax_clone(), majority_clone(),
            fixtures::boolean_order(), affine_points()};
}

} // namespace

TEST(HagemannMitschke, MinorityIsMaltsev) {
    auto r = find_hagemann_mitschke(fixtures::minority_clone(), 2);
    ASSERT_TRUE(r.found());
    EXPECT_TRUE(is_hm_chain(*r.witness));
    EXPECT_EQ(r.witness->ops.front(), ops::minority());
    EXPECT_TRUE(find_hagemann_mitschke(affine_points(), 2).found());
}

TEST(HagemannMitschke, ProjectionsAndLatticesHaveNoChain) {
    for (std::size_t n = 2; n <= 4; ++n) {
        EXPECT_EQ(find_hagemann_mitschke(fixtures::projection_clone(), n).outcome, Outcome::none) << n;
        EXPECT_EQ(find_hagemann_mitschke(fixtures::minmax_clone(), n).outcome, Outcome::none) << n;
        EXPECT_EQ(find_hagemann_mitschke(fixtures::boolean_order(), n).outcome, Outcome::none) << n;
    }
    EXPECT_THROW(find_hagemann_mitschke(fixtures::minority_clone(), 1), ValidationError);
}

TEST(HagemannMitschke, AgreesWithBreadthFirstOracle) {
    for (const auto& src : corpus()) {
        const auto expect = shortest_chain(ternary_members(src), 4);
        for (std::size_t n = 2; n <= 4; ++n) {
            auto r = find_hagemann_mitschke(src, n);
            ASSERT_NE(r.outcome, Outcome::budget_exceeded);
            // chains can always be padded with a trailing projection, so existence is monotone in n
            EXPECT_EQ(r.found(), expect && *expect <= n) << "n = " << n;
        }
    }
}

TEST(HagemannMitschke, ChainValidation) {
    HMChain bad{3, {ops::minority(), ops::minority()}};
    EXPECT_FALSE(is_hm_chain(bad));
    HMChain padded{3, {ops::minority(), projection(2, 3, 3)}};
    EXPECT_TRUE(is_hm_chain(padded));
}

TEST(Permutability, Fixtures) {
    auto minority = is_n_permutable_somewhere(fixtures::minority_clone());
    EXPECT_EQ(minority.outcome, Outcome::found);
    ASSERT_TRUE(minority.chain);
    EXPECT_EQ(minority.chain->n, 2u);
    EXPECT_FALSE(minority.refutation_digest.empty());

    auto proj = is_n_permutable_somewhere(fixtures::projection_clone());
    EXPECT_EQ(proj.outcome, Outcome::none);
    ASSERT_TRUE(proj.coloring);
    EXPECT_EQ(proj.coloring->map.size(), 2u);

    EXPECT_EQ(is_n_permutable_somewhere(fixtures::minmax_clone()).outcome, Outcome::none);
    EXPECT_EQ(is_n_permutable_somewhere(majority_clone()).outcome, Outcome::none);
    EXPECT_EQ(is_n_permutable_somewhere(fixtures::boolean_order()).outcome, Outcome::none);
    EXPECT_EQ(is_n_permutable_somewhere(affine_points()).outcome, Outcome::found);
}

TEST(Modularity, Fixtures) {
    EXPECT_EQ(is_congruence_modular(fixtures::minority_clone()).outcome, Outcome::found);
    auto proj = is_congruence_modular(fixtures::projection_clone());
    EXPECT_EQ(proj.outcome, Outcome::none);
    ASSERT_TRUE(proj.coloring);
    EXPECT_EQ(is_congruence_modular(fixtures::minmax_clone()).outcome, Outcome::found);
    EXPECT_EQ(is_congruence_modular(majority_clone()).outcome, Outcome::found);
}

TEST(Modularity, DigestIsStable) {
    auto a = is_congruence_modular(fixtures::minority_clone());
    auto b = is_congruence_modular(fixtures::minority_clone());
    EXPECT_EQ(a.refutation_digest, b.refutation_digest);
    EXPECT_EQ(a.refutation_digest.size(), 16u);
}

TEST(Consistency, ChainsImplyPermutabilityAndMaltsevImpliesModularity) {
    for (const auto& src : corpus()) {
        auto perm = is_n_permutable_somewhere(src);
        ASSERT_NE(perm.outcome, Outcome::budget_exceeded);
        bool any_chain = false;
        for (std::size_t n = 2; n <= 4; ++n) any_chain = any_chain || find_hagemann_mitschke(src, n).found();
        if (any_chain) {
            EXPECT_EQ(perm.outcome, Outcome::found);
        }
        if (find_hagemann_mitschke(src, 2).found()) {
            EXPECT_EQ(is_congruence_modular(src).outcome, Outcome::found);
        }
    }
}

TEST(Consistency, StrongColoringIsInvariantUnderRelabelling) {
    std::vector<Element> perm{0, 1, 2, 3};
    const std::vector<CloneSource> cheap{fixtures::projection_clone(), fixtures::minority_clone(), majority_clone()};
    for (const auto& src : cheap) {
        auto fs0 = free_structure(src, fixtures::day_structure());
        ASSERT_TRUE(fs0.found());
        const bool base = find_coloring(*fs0.witness, true).found();
        int tried = 0;
        do {
            if (tried++ % 5 != 0) continue;
            auto fs = free_structure(src, relabel(fixtures::day_structure(), perm));
            ASSERT_TRUE(fs.found());
            EXPECT_EQ(find_coloring(*fs.witness, true).found(), base);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    for (const auto& src : corpus()) {
        auto fs0 = free_structure(src, fixtures::le2());
        auto fs1 = free_structure(src, relabel(fixtures::le2(), {1, 0}));
        ASSERT_TRUE(fs0.found());
        ASSERT_TRUE(fs1.found());
        EXPECT_EQ(find_coloring(*fs0.witness, true).found(), find_coloring(*fs1.witness, true).found());
    }
}
