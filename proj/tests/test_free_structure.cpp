#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "polyclone/fixtures.hpp"
#include "polyclone/free_structure.hpp"

using namespace polyclone;

namespace {

using TupleSet = std::set<std::vector<Element>>;

// The lifted relation from scratch: every m-ary member t (m = |R|) applied to the generator tuples of R.
TupleSet lifted_oracle(const std::vector<std::vector<Element>>& members_of_arity_r, const Relation& r,
                       const FreeStructure& fs) {
    const std::size_t d = fs.domain_size, n = fs.target.size(), m = r.size(), k = r.arity();
    TupleSet out;
    for (const auto& t : members_of_arity_r) {
        std::vector<Element> row;
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<Element> table;
            for (TupleOdometer x(d, n); !x.done(); x.next()) {
                Tuple args;
                for (std::size_t i = 0; i < m; ++i) args.push_back(x.current()[r.tuple(i)[j]]);
                table.push_back(oracle::apply(t, d, args));
            }
            auto idx = fs.find(OperationTable(d, n, table));
            EXPECT_TRUE(idx.has_value());
            row.push_back(static_cast<Element>(idx.value_or(0)));
        }
        out.insert(row);
    }
    return out;
}

TupleSet as_set(const Relation& r) {
    TupleSet s;
    for (const auto& t : r.tuples()) s.insert(t);
    return s;
}

RelStructure affine_points() { return add_singletons(RelStructure(2, {{"xor0", fixtures::xor0_relation()}})); }

} // namespace

TEST(FreeStructure, ProjectionCloneOverOrder) {
    auto r = free_structure(fixtures::projection_clone(), fixtures::le2());
    ASSERT_TRUE(r.found());
    const auto& fs = *r.witness;
    ASSERT_EQ(fs.carrier.size(), 2u);
    const Element p0 = static_cast<Element>(fs.generator_index[0]), p1 = static_cast<Element>(fs.generator_index[1]);
    EXPECT_EQ(as_set(fs.lifted.relation("le")), (TupleSet{{p0, p0}, {p0, p1}, {p1, p1}}));
}

TEST(FreeStructure, MinorityCloneOverOrder) {
    auto r = free_structure(fixtures::minority_clone(), fixtures::le2());
    ASSERT_TRUE(r.found());
    const auto& fs = *r.witness;
    ASSERT_EQ(fs.carrier.size(), 2u);
    const Element p0 = static_cast<Element>(fs.generator_index[0]), p1 = static_cast<Element>(fs.generator_index[1]);
    EXPECT_EQ(as_set(fs.lifted.relation("le")), (TupleSet{{p0, p0}, {p0, p1}, {p1, p0}, {p1, p1}}));
}

TEST(FreeStructure, AllOperationsGiveAllTables) {
    auto r = free_structure(RelStructure(2, {}), fixtures::le2());
    ASSERT_TRUE(r.found());
    EXPECT_EQ(r.witness->carrier.size(), 16u);
    auto g = free_structure(CloneGenSet(2, {OperationTable(2, 2, {1, 1, 1, 0})}), fixtures::le2());
    ASSERT_TRUE(g.found());
    EXPECT_EQ(g.witness->carrier.size(), 16u);
}

TEST(FreeStructure, LiftedRelationsMatchDefinition) {
    const std::vector<std::pair<CloneSource, RelStructure>> cases{
        {fixtures::minmax_clone(), fixtures::le2()},
        {fixtures::minority_clone(), fixtures::le2()},
        {CloneGenSet(2, {ops::majority()}), fixtures::le2()},
        {fixtures::boolean_order(), fixtures::le2()},
        {affine_points(), fixtures::le2()},
        {fixtures::minmax_clone(), RelStructure(3, {{"E", Relation(3, 2, std::vector<Element>{0, 1, 1, 2, 2, 0})}})},
    };
    for (const auto& [src, b] : cases) {
        auto r = free_structure(src, b);
        ASSERT_TRUE(r.found());
        const auto& fs = *r.witness;
        for (std::size_t i = 0; i < b.relation_count(); ++i) {
            const Relation& rel = b.relation(i);
            std::vector<std::vector<Element>> members;
            if (const auto* g = std::get_if<CloneGenSet>(&src)) {
                auto gen = generate_to_arity(*g, rel.size());
                for (const auto& f : *gen.witness) members.push_back(f.table());
            } else {
                members = oracle::all_polymorphisms(std::get<RelStructure>(src), rel.size());
            }
            EXPECT_EQ(as_set(fs.lifted.relation(i)), lifted_oracle(members, rel, fs));
        }
    }
}

TEST(FreeStructure, PolymorphismCarrierMatchesBruteForce) {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t d = 2 + trial % 2, nb = d == 2 ? 2 + trial % 2 : 2;
        auto a = add_singletons(oracle::random_structure(rng, d, {2}, 0.5));
        auto b = oracle::random_structure(rng, nb, {2}, 0.5);
        auto r = free_structure(a, b);
        ASSERT_TRUE(r.found());
        std::vector<std::vector<Element>> carrier;
        for (const auto& f : r.witness->carrier) carrier.push_back(f.table());
        EXPECT_EQ(carrier, oracle::all_polymorphisms(a, nb));
    }
}

TEST(FreeStructure, LiftedRelationsAreClosedUnderGenerators) {
    for (const auto& clone : {fixtures::minmax_clone(), fixtures::minority_clone(), CloneGenSet(2, {ops::majority()})}) {
        for (const auto& b : {fixtures::le2(), fixtures::day_structure()}) {
            if (b.size() > 2 && clone.generators.front().arity() == 3 && clone.generators.size() == 1 &&
                clone.generators.front() == ops::majority())
                continue;
            auto r = free_structure(clone, b);
            ASSERT_TRUE(r.found());
            const auto& fs = *r.witness;
            for (std::size_t i = 0; i < b.relation_count(); ++i) {
                const Relation& lifted = fs.lifted.relation(i);
                std::mt19937 rng(static_cast<unsigned>(i));
                std::uniform_int_distribution<std::size_t> pick(0, lifted.size() - 1);
                for (const auto& g : clone.generators)
                    for (int sample = 0; sample < 300; ++sample) {
                        std::vector<Element> image;
                        std::vector<std::size_t> rows;
                        for (std::size_t a = 0; a < g.arity(); ++a) rows.push_back(pick(rng));
                        for (std::size_t j = 0; j < lifted.arity(); ++j) {
                            std::vector<OperationTable> args;
                            for (auto row : rows) args.push_back(fs.carrier[lifted.tuple(row)[j]]);
                            auto idx = fs.find(compose(g, args));
                            ASSERT_TRUE(idx);
                            image.push_back(static_cast<Element>(*idx));
                        }
                        EXPECT_TRUE(lifted.contains(image));
                    }
            }
        }
    }
}

TEST(FreeStructure, PolymorphismAndGeneratorRoutesAgree) {
    // Pol of the order with both points is generated by min and max; affine with points by minority.
    const std::vector<std::pair<RelStructure, CloneGenSet>> pairs{{fixtures::boolean_order(), fixtures::minmax_clone()},
                                                                  {affine_points(), fixtures::minority_clone()}};
    for (const auto& [a, gen] : pairs)
        for (const auto& b : {fixtures::le2(), fixtures::projection_test_structure()}) {
            auto x = free_structure(a, b), y = free_structure(gen, b);
            ASSERT_TRUE(x.found());
            ASSERT_TRUE(y.found());
            EXPECT_EQ(x.witness->carrier, y.witness->carrier);
            EXPECT_EQ(x.witness->generator_index, y.witness->generator_index);
            EXPECT_EQ(x.witness->lifted, y.witness->lifted);
            EXPECT_EQ(free_structure_to_json(*x.witness).dump(), free_structure_to_json(*y.witness).dump());
        }
}

TEST(FreeStructure, CapacityAndBudget) {
    EXPECT_THROW(free_structure(fixtures::projection_clone(4), fixtures::complete_graph(11)), CapacityError);
    SearchBudget tiny;
    tiny.node_limit = 1;
    EXPECT_EQ(free_structure(fixtures::minmax_clone(), fixtures::day_structure(), tiny).outcome, Outcome::budget_exceeded);
}

TEST(Coloring, ReflexiveElementGivesConstantColoring) {
    auto b = RelStructure(2, {{"le", fixtures::le_relation()}});
    auto fs = free_structure(fixtures::minority_clone(), b);
    ASSERT_TRUE(fs.found());
    Coloring constant{std::vector<Element>(fs.witness->carrier.size(), 1), false};
    EXPECT_TRUE(is_coloring(*fs.witness, constant));
    EXPECT_TRUE(find_coloring(*fs.witness, false).found());
}

TEST(Coloring, ProjectionCloneIsStronglyColorableByAnything) {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        auto b = oracle::random_structure(rng, 2 + trial % 3, {2, 1}, 0.4);
        auto fs = free_structure(fixtures::projection_clone(3), b);
        ASSERT_TRUE(fs.found());
        auto c = find_coloring(*fs.witness, true);
        ASSERT_TRUE(c.found());
        for (std::size_t x = 0; x < b.size(); ++x) EXPECT_EQ(c.witness->map[fs.witness->generator_index[x]], x);
    }
}

TEST(Coloring, MinorityHasNoStrongOrderColoring) {
    auto fs = free_structure(fixtures::minority_clone(), fixtures::le2());
    ASSERT_TRUE(fs.found());
    EXPECT_EQ(find_coloring(*fs.witness, true).outcome, Outcome::none);
}

TEST(Coloring, StrongImpliesPlain) {
    for (const CloneSource& src : std::vector<CloneSource>{fixtures::minmax_clone(), fixtures::minority_clone(),
                                                           fixtures::projection_clone(), CloneGenSet(2, {ops::majority()})})
        for (const auto& b : {fixtures::le2(), fixtures::complete_graph(2), fixtures::day_structure()}) {
            auto fs = free_structure(src, b);
            ASSERT_TRUE(fs.found());
            auto strong = find_coloring(*fs.witness, true), plain = find_coloring(*fs.witness, false);
            if (strong.found()) {
                EXPECT_TRUE(plain.found());
            }
            if (plain.outcome == Outcome::none) {
                EXPECT_EQ(strong.outcome, Outcome::none);
            }
        }
}

TEST(Coloring, InducedOperationsArePolymorphisms) {
    for (const CloneSource& src : std::vector<CloneSource>{fixtures::minmax_clone(), fixtures::projection_clone(),
                                                           fixtures::boolean_order()})
        for (const auto& b : {fixtures::le2(), fixtures::day_structure()}) {
            auto fs = free_structure(src, b);
            ASSERT_TRUE(fs.found());
            auto c = find_coloring(*fs.witness, true);
            if (!c.found()) continue;
            auto check = check_induced_operations(src, *fs.witness, *c.witness, 3);
            EXPECT_TRUE(check.all_preserve);
            EXPECT_GT(check.operations_checked, 0u);
            for (const auto& g : check.induced) EXPECT_TRUE(is_polymorphism(g, b));
        }
}

TEST(Coloring, InducedOperationOfProjectionIsProjection) {
    auto fs = free_structure(fixtures::minmax_clone(), fixtures::le2());
    ASSERT_TRUE(fs.found());
    auto c = find_coloring(*fs.witness, true);
    ASSERT_TRUE(c.found());
    for (std::size_t i = 1; i <= 3; ++i)
        EXPECT_EQ(induced_operation(*fs.witness, *c.witness, projection(2, 3, i)), projection(2, 3, i));
    EXPECT_THROW(induced_operation(*fs.witness, *c.witness, OperationTable(2, 2, {0, 1, 1, 0})), ValidationError);
}

TEST(H1Homomorphism, Cases) {
    auto k3 = add_singletons(fixtures::complete_graph(3));
    auto self = h1_homomorphism_exists(fixtures::boolean_order(), fixtures::boolean_order());
    EXPECT_EQ(self.outcome, Outcome::found);
    ASSERT_TRUE(self.induced);
    EXPECT_TRUE(self.induced->all_preserve);
    EXPECT_EQ(h1_homomorphism_exists(k3, validated_projection_structure()).outcome, Outcome::found);
    EXPECT_EQ(h1_homomorphism_exists(fixtures::boolean_order(), validated_projection_structure()).outcome, Outcome::none);
}

TEST(ProjectionStructure, IsValidatedByBruteForce) {
    EXPECT_NO_THROW(validated_projection_structure());
    EXPECT_TRUE(only_projections_up_to(fixtures::projection_test_structure(), 2));
    EXPECT_FALSE(only_projections_up_to(fixtures::boolean_order(), 2));
}

TEST(H1ToProjections, Cases) {
    auto k3 = h1_to_projections(add_singletons(fixtures::complete_graph(3)));
    EXPECT_EQ(k3.outcome, Outcome::found);
    EXPECT_EQ(k3.siggers_outcome, Outcome::none);
    auto aff = h1_to_projections(affine_points());
    EXPECT_EQ(aff.outcome, Outcome::none);
    ASSERT_TRUE(aff.siggers);
    auto one = h1_to_projections(RelStructure(1, {{"U", Relation(1, 1, std::vector<Element>{0})}}));
    EXPECT_EQ(one.outcome, Outcome::none);
}

TEST(H1ToProjections, BooleanCorpusTriangle) {
    for (const auto& [name, a] : fixtures::boolean_corpus()) {
        auto proj = h1_to_projections(a);
        auto sig = has_siggers(a);
        auto cyc = has_cyclic(a, 3);
        ASSERT_NE(proj.outcome, Outcome::budget_exceeded) << name;
        EXPECT_EQ(proj.outcome == Outcome::none, sig.found()) << name;
        EXPECT_EQ(sig.found(), cyc.found()) << name;
        EXPECT_EQ(proj.coloring_outcome, proj.outcome) << name;
    }
}
