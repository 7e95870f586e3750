#pragma once

// One report per command over the fixture corpus; shared by the report tests and the acceptance run.

#include <functional>
#include <string>
#include <vector>

#include "polyclone/fixtures.hpp"
#include "polyclone/report.hpp"

namespace cases {

using namespace polyclone;

struct ReportCase {
    std::string name;
    std::function<Report()> run;
};

inline RelStructure affine_points() { return add_singletons(RelStructure(2, {{"xor0", fixtures::xor0_relation()}})); }

inline PPPowerSpec hepp_reduct_spec() {
    return parse_pp_power_spec("R0(x,y,z) := R00(x,y,z); R1(x,y,z) := R10(x,y,z); c0(x) := c0(x); c1(x) := c2(x);");
}

inline std::vector<ReportCase> report_cases() {
    RunConfig cfg;
    RunConfig strong = cfg;
    strong.strong = true;
    RunConfig modular = cfg;
    modular.test = "modular";
    RunConfig chain = cfg;
    chain.test = "hm-chain";
    chain.arity = 2;
    RunConfig search = cfg;
    search.search = true;
    search.bounds = {1, 0, 1};
    RunConfig ternary = cfg;
    ternary.arity = 3;
    const auto k3 = add_singletons(fixtures::complete_graph(3));
    const auto unary = [](std::vector<Element> xs) { return RelStructure(4, {{"U", Relation(4, 1, std::move(xs))}}); };
    return {
        {"classify triangle", [=] { return cmd_classify(k3, cfg); }},
        {"classify affine", [=] { return cmd_classify(affine_points(), cfg); }},
        {"classify order", [=] { return cmd_classify(fixtures::boolean_order(), cfg); }},
        {"hom path to edge", [=] { return cmd_hom(fixtures::path3(), fixtures::complete_graph(2), cfg); }},
        {"hom triangle to edge", [=] { return cmd_hom(fixtures::complete_graph(3), fixtures::complete_graph(2), cfg); }},
        {"core path", [=] { return cmd_core(fixtures::path3(), cfg); }},
        {"core hepp reduct", [=] { return cmd_core(fixtures::hepp_a_prime(), cfg); }},
        {"homeq hepp", [=] { return cmd_homeq(fixtures::hepp_a_prime(), fixtures::hepp_b(), cfg); }},
        {"homeq triangle edge", [=] { return cmd_homeq(fixtures::complete_graph(3), fixtures::complete_graph(2), cfg); }},
        {"poly order binary", [=] { return cmd_poly(fixtures::boolean_order(), cfg); }},
        {"poly order ternary", [=] { return cmd_poly(fixtures::boolean_order(), ternary); }},
        {"pp power", [=] { return cmd_pp(fixtures::hepp_a(), hepp_reduct_spec(), std::nullopt, cfg); }},
        {"pp check", [=] { return cmd_pp(fixtures::hepp_a(), hepp_reduct_spec(), fixtures::hepp_b(), cfg); }},
        {"pp search", [=] { return cmd_pp(fixtures::hepp_a(), PPPowerSpec{}, fixtures::hepp_b(), search); }},
        {"ppdef singleton", [=] { return cmd_ppdef(fixtures::hepp_a(), unary({2}), cfg); }},
        {"ppdef pair", [=] { return cmd_ppdef(fixtures::hepp_a(), unary({0, 3}), cfg); }},
        {"color projection strong", [=] { return cmd_color(fixtures::projection_clone(), fixtures::le2(), strong); }},
        {"color minmax strong", [=] { return cmd_color(fixtures::minmax_clone(), fixtures::le2(), strong); }},
        {"color minority strong", [=] { return cmd_color(fixtures::minority_clone(), fixtures::le2(), strong); }},
        {"color minority plain", [=] { return cmd_color(fixtures::minority_clone(), fixtures::le2(), cfg); }},
        {"h1 triangle", [=] { return cmd_h1(k3, validated_projection_structure(), cfg); }},
        {"h1 order", [=] { return cmd_h1(fixtures::boolean_order(), validated_projection_structure(), cfg); }},
        {"maltsev minority n-perm", [=] { return cmd_maltsev(fixtures::minority_clone(), cfg); }},
        {"maltsev projection n-perm", [=] { return cmd_maltsev(fixtures::projection_clone(), cfg); }},
        {"maltsev minority modular", [=] { return cmd_maltsev(fixtures::minority_clone(), modular); }},
        {"maltsev projection modular", [=] { return cmd_maltsev(fixtures::projection_clone(), modular); }},
        {"maltsev minority chain", [=] { return cmd_maltsev(fixtures::minority_clone(), chain); }},
        {"maltsev projection chain", [=] { return cmd_maltsev(fixtures::projection_clone(), chain); }},
        {"maltsev affine structure", [=] { return cmd_maltsev(affine_points(), cfg); }},
    };
}

} // namespace cases
