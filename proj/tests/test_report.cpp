#include <gtest/gtest.h>

#include "report_cases.hpp"

using namespace polyclone;

TEST(Report, ClassifyExitCodes) {
    RunConfig cfg;
    auto hard = cmd_classify(add_singletons(fixtures::complete_graph(3)), cfg);
    EXPECT_EQ(hard.exit_code, kExitNegative);
    EXPECT_EQ(hard.json.at("verdict"), "hardness");
    EXPECT_TRUE(hard.json.at("certificates").contains("projection_coloring"));
    auto easy = cmd_classify(cases::affine_points(), cfg);
    EXPECT_EQ(easy.exit_code, kExitPositive);
    EXPECT_TRUE(easy.json.at("certificates").contains("siggers"));
    cfg.budget.node_limit = 1;
    auto tiny = cmd_classify(fixtures::boolean_order(), cfg);
    EXPECT_EQ(tiny.exit_code, kExitInconclusive);
    EXPECT_EQ(tiny.json.at("verdict"), "inconclusive");
}

TEST(Report, CommandResults) {
    RunConfig cfg;
    auto core = cmd_core(fixtures::path3(), cfg);
    EXPECT_EQ(core.json.at("certificates").at("retraction"), Json({0, 1, 0}));
    auto poly = cmd_poly(fixtures::boolean_order(), cfg);
    EXPECT_EQ(poly.json.at("certificates").at("count"), 4);
    cfg.strong = true;
    auto color = cmd_color(fixtures::minority_clone(), fixtures::le2(), cfg);
    EXPECT_EQ(color.exit_code, kExitNegative);
    EXPECT_TRUE(color.json.at("certificates").contains("refutation_digest"));
    EXPECT_NE(color.text.find("no strong coloring"), std::string::npos);
}

TEST(Report, ConfigRoundTrip) {
    RunConfig cfg;
    cfg.budget.node_limit = 77;
    cfg.test = "modular";
    cfg.bounds.max_atoms = 5;
    EXPECT_EQ(RunConfig::from_json(cfg.to_json()).to_json(), cfg.to_json());
}

TEST(Report, StatsOnlyWhenNotDeterministic) {
    RunConfig cfg;
    EXPECT_FALSE(cmd_hom(fixtures::path3(), fixtures::complete_graph(2), cfg).json.contains("stats"));
    cfg.deterministic = false;
    EXPECT_TRUE(cmd_hom(fixtures::path3(), fixtures::complete_graph(2), cfg).json.contains("stats"));
}

TEST(Report, EveryCaseIsDeterministicAndVerifies) {
    for (const auto& c : cases::report_cases()) {
        auto first = c.run();
        auto second = c.run();
        EXPECT_EQ(first.json.dump(), second.json.dump()) << c.name;
        EXPECT_NO_THROW(checked(first)) << c.name;
        auto v = verify_report(first.json);
        EXPECT_EQ(v.exit_code, kExitPositive) << c.name << ": " << v.text;
        EXPECT_TRUE(v.json.at("accepted").get<bool>()) << c.name;
    }
}

TEST(Report, VerifyRejectsTamperedReports) {
    RunConfig cfg;
    auto hom = cmd_hom(fixtures::path3(), fixtures::complete_graph(2), cfg).json;
    auto bad_map = hom;
    bad_map["certificates"]["map"] = Json({0, 0, 0});
    EXPECT_EQ(verify_report(bad_map).exit_code, kExitInternal);

    auto bad_digest = hom;
    bad_digest["inputs"]["target"] = structure_to_json(fixtures::complete_graph(3));
    EXPECT_EQ(verify_report(bad_digest).exit_code, kExitInternal);

    auto neg = cmd_hom(fixtures::complete_graph(3), fixtures::complete_graph(2), cfg).json;
    auto flipped = neg;
    flipped["inputs"]["target"] = structure_to_json(fixtures::complete_graph(3));
    flipped["input_digest"] =
        hex_digest(fnv1a64(flipped.at("inputs").dump(), fnv1a64(flipped.at("command").get<std::string>())));
    auto v = verify_report(flipped);
    EXPECT_EQ(v.exit_code, kExitInternal);
    EXPECT_FALSE(v.json.at("problems").empty());

    auto col = cmd_color(fixtures::projection_clone(), fixtures::le2(), cfg).json;
    auto bad_col = col;
    bad_col["certificates"]["coloring"]["map"] = Json({1, 0});
    EXPECT_EQ(verify_report(bad_col).exit_code, kExitInternal);
}

TEST(Report, CloneSourceParsing) {
    auto gen = parse_clone_source(clone_to_json(fixtures::minmax_clone()).dump());
    ASSERT_TRUE(std::holds_alternative<CloneGenSet>(gen));
    auto pol = parse_clone_source("size 2; le/2 = {(0,0),(0,1),(1,1)};");
    ASSERT_TRUE(std::holds_alternative<RelStructure>(pol));
    auto back = clone_source_from_json(clone_source_to_json(fixtures::boolean_order()));
    EXPECT_EQ(std::get<RelStructure>(back), fixtures::boolean_order());
}
