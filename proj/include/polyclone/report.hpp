#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "clone.hpp"
#include "constructions.hpp"
#include "digest.hpp"
#include "fixtures.hpp"
#include "free_structure.hpp"
#include "hom.hpp"
#include "maltsev.hpp"
#include "polymorphism.hpp"
#include "pp_formula.hpp"
#include "structure_io.hpp"

namespace polyclone {

inline constexpr const char* kToolName = "polyclone";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitPositive = 0,
    kExitUsage = 1,
    kExitCapacity = 2,
    kExitNegative = 3,
    kExitInconclusive = 4,
    kExitInternal = 5,
};

struct RunConfig {
    SearchBudget budget;
    bool deterministic = true;
    std::size_t arity = 2;              // poly; chain length for maltsev hm-chain
    std::size_t arity_cap = kDefaultDefinabilityArityCap;
    bool strong = false;
    std::string test = "n-perm";
    bool search = false;
    PPSearchBounds bounds;

    Json to_json() const {
        Json j;
        j["budget_nodes"] = budget.node_limit;
        j["budget_ms"] = budget.time_limit.count();
        j["parallel"] = budget.parallel_width;
        j["deterministic"] = deterministic;
        j["arity"] = arity;
        j["arity_cap"] = arity_cap;
        j["strong"] = strong;
        j["test"] = test;
        j["search"] = search;
        j["max_dimension"] = bounds.max_dimension;
        j["max_existentials"] = bounds.max_existentials;
        j["max_atoms"] = bounds.max_atoms;
        return j;
    }

    static RunConfig from_json(const Json& j) {
        RunConfig c;
        c.budget.node_limit = j.at("budget_nodes").get<std::uint64_t>();
        c.budget.time_limit = std::chrono::milliseconds(j.at("budget_ms").get<std::int64_t>());
        c.budget.parallel_width = j.at("parallel").get<unsigned>();
        c.deterministic = j.at("deterministic").get<bool>();
        c.arity = j.at("arity").get<std::size_t>();
        c.arity_cap = j.at("arity_cap").get<std::size_t>();
        c.strong = j.at("strong").get<bool>();
        c.test = j.at("test").get<std::string>();
        c.search = j.at("search").get<bool>();
        c.bounds.max_dimension = j.at("max_dimension").get<std::size_t>();
        c.bounds.max_existentials = j.at("max_existentials").get<std::size_t>();
        c.bounds.max_atoms = j.at("max_atoms").get<std::size_t>();
        return c;
    }
};

struct Report {
    Json json;
    int exit_code = kExitPositive;
    std::string text;
};

inline Json clone_source_to_json(const CloneSource& src) {
    Json j;
    if (const auto* g = std::get_if<CloneGenSet>(&src)) {
        j["kind"] = "generators";
        j["clone"] = clone_to_json(*g);
    } else {
        j["kind"] = "polymorphisms";
        j["structure"] = structure_to_json(std::get<RelStructure>(src));
    }
    return j;
}

inline CloneSource clone_source_from_json(const Json& j) {
    if (j.at("kind") == "generators") return clone_from_json(j.at("clone"));
    return structure_from_json(j.at("structure"));
}

/// A clone file is either generator JSON ({"domain_size", "generators"}) or a structure, read as Pol(A).
inline CloneSource parse_clone_source(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i < text.size() && text[i] == '{') {
        try {
            Json j = detail::parse_json_text(text);
            if (j.is_object() && j.contains("generators")) return clone_from_json(j);
        } catch (const ParseError&) {
        }
    }
    return parse_structure(text);
}

namespace report_detail {

inline Json ops_to_json(const std::vector<OperationTable>& ops) {
    Json a = Json::array();
    for (const auto& f : ops) a.push_back(operation_to_json(f));
    return a;
}

inline std::vector<OperationTable> ops_from_json(const Json& j) {
    std::vector<OperationTable> out;
    for (const auto& f : j) out.push_back(operation_from_json(f));
    return out;
}

inline std::string free_digest(const FreeStructure& f) { return hex_digest(fnv1a64(free_structure_to_json(f).dump())); }

inline Json coloring_to_json(const Coloring& c, const FreeStructure& f) {
    Json j;
    j["strong"] = c.strong;
    j["carrier_size"] = f.carrier.size();
    j["free_structure_digest"] = free_digest(f);
    j["map"] = c.map;
    return j;
}

class Builder {
public:
    Builder(std::string command, const RunConfig& cfg, Json inputs)
        : cfg_(cfg), start_(std::chrono::steady_clock::now()) {
        json_["tool"] = kToolName;
        json_["version"] = kToolVersion;
        json_["command"] = std::move(command);
        json_["config"] = cfg.to_json();
        json_["input_digest"] = hex_digest(fnv1a64(inputs.dump(), fnv1a64(json_["command"].get<std::string>())));
        json_["inputs"] = std::move(inputs);
        certs_ = Json::object();
    }

    Json& certs() { return certs_; }

    Report finish(const std::string& verdict, int exit_code, std::uint64_t nodes, std::string text) {
        json_["verdict"] = verdict;
        json_["exit_code"] = exit_code;
        json_["certificates"] = std::move(certs_);
        if (!cfg_.deterministic) {
            Json stats;
            stats["nodes"] = nodes;
            stats["elapsed_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                      std::chrono::steady_clock::now() - start_)
                                      .count();
            json_["stats"] = std::move(stats);
        }
        return Report{std::move(json_), exit_code, std::move(text)};
    }

private:
    const RunConfig& cfg_;
    std::chrono::steady_clock::time_point start_;
    Json json_;
    Json certs_;
};

inline int outcome_exit(Outcome o) {
    switch (o) {
    case Outcome::found: return kExitPositive;
    case Outcome::none: return kExitNegative;
    case Outcome::budget_exceeded: return kExitInconclusive;
    }
    return kExitInternal;
}

inline std::string outcome_verdict(Outcome o) { return to_string(o); }

} // namespace report_detail

// ---- commands ----------------------------------------------------------------------------

inline Report cmd_classify(const RelStructure& a, const RunConfig& cfg) {
    Json in;
    in["structure"] = structure_to_json(a);
    report_detail::Builder b("classify", cfg, std::move(in));
    auto r = h1_to_projections(a, cfg.budget);
    b.certs()["siggers_search"] = to_string(r.siggers_outcome);
    b.certs()["projection_coloring_search"] = to_string(r.coloring_outcome);
    if (r.siggers) b.certs()["siggers"] = operation_to_json(*r.siggers);
    if (r.coloring) {
        auto fs = free_structure(CloneSource(a), validated_projection_structure());
        b.certs()["projection_coloring"] = report_detail::coloring_to_json(*r.coloring, *fs.witness);
    }
    switch (r.outcome) {
    case Outcome::found:
        return b.finish("hardness", kExitNegative, r.stats.nodes,
                        "hardness: Pol(A) maps to the projection clone by an h1 clone homomorphism");
    case Outcome::none:
        return b.finish("taylor", kExitPositive, r.stats.nodes,
                        "taylor: Siggers polymorphism found (conjectured tractable side)");
    default:
        return b.finish("inconclusive", kExitInconclusive, r.stats.nodes, "inconclusive: search budget exhausted");
    }
}

inline Report cmd_hom(const RelStructure& c, const RelStructure& a, const RunConfig& cfg) {
    Json in;
    in["source"] = structure_to_json(c);
    in["target"] = structure_to_json(a);
    report_detail::Builder b("hom", cfg, std::move(in));
    auto r = find_homomorphism(c, a, cfg.budget);
    if (r.witness) b.certs()["map"] = r.witness->map;
    std::string text = std::string("hom: ") + to_string(r.outcome);
    return b.finish(to_string(r.outcome), report_detail::outcome_exit(r.outcome), r.stats.nodes, text);
}

inline Report cmd_core(const RelStructure& a, const RunConfig& cfg) {
    Json in;
    in["structure"] = structure_to_json(a);
    report_detail::Builder b("core", cfg, std::move(in));
    auto r = core_of(a, cfg.budget);
    std::string text = "core: " + std::string(to_string(r.outcome));
    if (r.witness) {
        b.certs()["subset"] = r.witness->subset;
        b.certs()["retraction"] = r.witness->retraction.map;
        b.certs()["core"] = structure_to_json(r.witness->structure);
        text += ", size " + std::to_string(r.witness->subset.size()) + ": " +
                serialize_structure_text(r.witness->structure) + " retraction " + Json(r.witness->retraction.map).dump();
    }
    return b.finish(to_string(r.outcome), r.found() ? kExitPositive : kExitInconclusive, r.stats.nodes, text);
}

inline Report cmd_homeq(const RelStructure& x, const RelStructure& y, const RunConfig& cfg) {
    Json in;
    in["source"] = structure_to_json(x);
    in["target"] = structure_to_json(y);
    report_detail::Builder b("homeq", cfg, std::move(in));
    auto r = hom_equivalent(x, y, cfg.budget);
    if (r.witness) {
        b.certs()["forward"] = r.witness->forward.map;
        b.certs()["backward"] = r.witness->backward.map;
    }
    return b.finish(to_string(r.outcome), report_detail::outcome_exit(r.outcome), r.stats.nodes,
                    "homeq: " + std::string(to_string(r.outcome)));
}

inline Report cmd_poly(const RelStructure& a, const RunConfig& cfg) {
    Json in;
    in["structure"] = structure_to_json(a);
    in["arity"] = cfg.arity;
    report_detail::Builder b("poly", cfg, std::move(in));
    auto r = polymorphisms(a, cfg.arity, cfg.budget);
    b.certs()["count"] = r.witness->size();
    b.certs()["operations"] = report_detail::ops_to_json(*r.witness);
    const bool done = r.found();
    std::string text = "poly: " + std::to_string(r.witness->size()) + " polymorphisms of arity " +
                       std::to_string(cfg.arity) + (done ? "" : " (incomplete: budget exhausted)");
    return b.finish(done ? "complete" : "budget_exceeded", done ? kExitPositive : kExitInconclusive, r.stats.nodes,
                    text);
}

inline Report cmd_pp(const RelStructure& a, const PPPowerSpec& spec, const std::optional<RelStructure>& target,
                     const RunConfig& cfg) {
    Json in;
    in["structure"] = structure_to_json(a);
    if (!cfg.search) in["spec"] = spec.to_string();
    if (target) in["target"] = structure_to_json(*target);
    report_detail::Builder b("pp", cfg, std::move(in));
    if (cfg.search) {
        if (!target) throw ValidationError("pp search needs a target structure");
        auto r = bounded_pp_search(a, *target, cfg.bounds, cfg.budget);
        if (r.spec) {
            b.certs()["spec"] = r.spec->to_string();
            b.certs()["power"] = structure_to_json(r.construction->power);
            b.certs()["forward"] = r.construction->homs.forward.map;
            b.certs()["backward"] = r.construction->homs.backward.map;
            return b.finish("found", kExitPositive, r.stats.nodes, "pp: found spec\n" + r.spec->to_string());
        }
        if (r.outcome == Outcome::none)
            return b.finish("none_within_bounds", kExitInconclusive, r.stats.nodes,
                            "pp: nothing found within the bounds (not a refutation)");
        return b.finish("budget_exceeded", kExitInconclusive, r.stats.nodes, "pp: budget exhausted");
    }
    if (!target) {
        RelStructure power = pp_power(a, spec);
        b.certs()["power"] = structure_to_json(power);
        return b.finish("constructed", kExitPositive, 0, "pp: " + serialize_structure_text(power));
    }
    auto r = check_pp_constructible(a, *target, spec, cfg.budget);
    if (r.witness) {
        b.certs()["power"] = structure_to_json(r.witness->power);
        b.certs()["forward"] = r.witness->homs.forward.map;
        b.certs()["backward"] = r.witness->homs.backward.map;
    }
    return b.finish(to_string(r.outcome), report_detail::outcome_exit(r.outcome), r.stats.nodes,
                    "pp: " + std::string(to_string(r.outcome)));
}

/// The candidate is given as a structure on A's domain with exactly one relation.
inline Report cmd_ppdef(const RelStructure& a, const RelStructure& candidate, const RunConfig& cfg) {
    if (candidate.relation_count() != 1 || candidate.size() != a.size())
        throw ValidationError("candidate must be one relation over the same domain");
    Json in;
    in["structure"] = structure_to_json(a);
    in["candidate"] = structure_to_json(candidate);
    report_detail::Builder b("ppdef", cfg, std::move(in));
    auto r = is_pp_definable(a, candidate.relation(0), cfg.budget, cfg.arity_cap);
    b.certs()["complete"] = r.complete;
    b.certs()["checked_arity"] = r.checked_arity;
    if (r.violator) {
        b.certs()["violator"] = operation_to_json(*r.violator);
        b.certs()["rows"] = r.rows;
    }
    switch (r.verdict) {
    case Definability::not_definable:
        return b.finish("not_definable", kExitNegative, r.stats.nodes, "ppdef: not definable (violating polymorphism)");
    case Definability::definable:
        return b.finish("definable", kExitPositive, r.stats.nodes,
                        std::string("ppdef: definable") + (r.complete ? "" : " up to the arity cap"));
    default:
        return b.finish("budget_exceeded", kExitInconclusive, r.stats.nodes, "ppdef: budget exhausted");
    }
}

inline Report cmd_color(const CloneSource& src, const RelStructure& target, const RunConfig& cfg) {
    Json in;
    in["clone"] = clone_source_to_json(src);
    in["target"] = structure_to_json(target);
    report_detail::Builder b("color", cfg, std::move(in));
    BudgetMeter meter(cfg.budget);
    auto fs = free_structure(src, target, meter.remaining());
    meter.charge(fs.stats.nodes);
    if (!fs.found()) return b.finish("budget_exceeded", kExitInconclusive, meter.used(), "color: budget exhausted");
    auto c = find_coloring(*fs.witness, cfg.strong, meter.remaining());
    meter.charge(c.stats.nodes);
    const std::string kind = cfg.strong ? "strong coloring" : "coloring";
    b.certs()["carrier_size"] = fs.witness->carrier.size();
    if (c.witness) {
        b.certs()["coloring"] = report_detail::coloring_to_json(*c.witness, *fs.witness);
        return b.finish("found", kExitPositive, meter.used(), "color: " + kind + " found");
    }
    if (c.outcome == Outcome::none) {
        std::uint64_t h = fnv1a64(free_structure_to_json(*fs.witness).dump());
        b.certs()["refutation_digest"] = hex_digest(fnv1a64(std::to_string(c.stats.nodes), h));
        return b.finish("none", kExitNegative, meter.used(),
                        "color: no " + kind + " (refutation digest " + b.certs()["refutation_digest"].get<std::string>() +
                            ")");
    }
    return b.finish("budget_exceeded", kExitInconclusive, meter.used(), "color: budget exhausted");
}

inline Report cmd_h1(const RelStructure& a, const RelStructure& target, const RunConfig& cfg) {
    Json in;
    in["source"] = structure_to_json(a);
    in["target"] = structure_to_json(target);
    report_detail::Builder b("h1", cfg, std::move(in));
    auto r = h1_homomorphism_exists(a, target, cfg.budget);
    b.certs()["carrier_size"] = r.carrier_size;
    if (r.coloring) {
        auto fs = free_structure(CloneSource(a), target);
        b.certs()["coloring"] = report_detail::coloring_to_json(*r.coloring, *fs.witness);
        b.certs()["induced_checked"] = r.induced->operations_checked;
        b.certs()["induced_complete"] = r.induced->complete;
        b.certs()["induced"] = report_detail::ops_to_json(r.induced->induced);
    }
    std::string text = r.outcome == Outcome::found  ? "h1: an h1 clone homomorphism exists"
                       : r.outcome == Outcome::none ? "h1: no h1 clone homomorphism"
                                                    : "h1: budget exhausted";
    return b.finish(to_string(r.outcome), report_detail::outcome_exit(r.outcome), r.stats.nodes, text);
}

inline Report cmd_maltsev(const CloneSource& src, const RunConfig& cfg) {
    Json in;
    in["clone"] = clone_source_to_json(src);
    report_detail::Builder b("maltsev", cfg, std::move(in));
    if (cfg.test == "hm-chain") {
        auto r = find_hagemann_mitschke(src, cfg.arity, cfg.budget);
        if (r.witness) b.certs()["chain"] = report_detail::ops_to_json(r.witness->ops);
        return b.finish(to_string(r.outcome), report_detail::outcome_exit(r.outcome), r.stats.nodes,
                        "maltsev hm-chain n=" + std::to_string(cfg.arity) + ": " + to_string(r.outcome));
    }
    MaltsevResult r;
    std::string yes, no;
    if (cfg.test == "n-perm") {
        r = is_n_permutable_somewhere(src, cfg.budget);
        yes = "n_permutable";
        no = "not_n_permutable";
    } else if (cfg.test == "modular") {
        r = is_congruence_modular(src, cfg.budget);
        yes = "modular";
        no = "not_modular";
    } else {
        throw ValidationError("unknown maltsev test '" + cfg.test + "'");
    }
    b.certs()["carrier_size"] = r.carrier_size;
    if (r.coloring) {
        auto fs = free_structure(src, cfg.test == "n-perm" ? fixtures::le2() : fixtures::day_structure());
        b.certs()["coloring"] = report_detail::coloring_to_json(*r.coloring, *fs.witness);
    }
    if (r.chain) {
        b.certs()["chain_length"] = r.chain->n;
        b.certs()["chain"] = report_detail::ops_to_json(r.chain->ops);
    }
    if (!r.refutation_digest.empty()) b.certs()["refutation_digest"] = r.refutation_digest;
    switch (r.outcome) {
    case Outcome::found: return b.finish(yes, kExitPositive, r.stats.nodes, "maltsev " + cfg.test + ": " + yes);
    case Outcome::none: return b.finish(no, kExitNegative, r.stats.nodes, "maltsev " + cfg.test + ": " + no);
    default:
        return b.finish("inconclusive", kExitInconclusive, r.stats.nodes, "maltsev " + cfg.test + ": inconclusive");
    }
}

// ---- verification ------------------------------------------------------------------------

/// Re-runs the command recorded in a report from its embedded inputs and configuration.
inline Report rerun_report(const Json& report) {
    const std::string cmd = report.at("command").get<std::string>();
    const RunConfig cfg = RunConfig::from_json(report.at("config"));
    const Json& in = report.at("inputs");
    auto structure = [&](const char* key) { return structure_from_json(in.at(key)); };
    if (cmd == "classify") return cmd_classify(structure("structure"), cfg);
    if (cmd == "hom") return cmd_hom(structure("source"), structure("target"), cfg);
    if (cmd == "core") return cmd_core(structure("structure"), cfg);
    if (cmd == "homeq") return cmd_homeq(structure("source"), structure("target"), cfg);
    if (cmd == "poly") return cmd_poly(structure("structure"), cfg);
    if (cmd == "pp") {
        std::optional<RelStructure> target;
        if (in.contains("target")) target = structure("target");
        PPPowerSpec spec = in.contains("spec") ? parse_pp_power_spec(in.at("spec").get<std::string>()) : PPPowerSpec{};
        return cmd_pp(structure("structure"), spec, target, cfg);
    }
    if (cmd == "ppdef") return cmd_ppdef(structure("structure"), structure("candidate"), cfg);
    if (cmd == "color") return cmd_color(clone_source_from_json(in.at("clone")), structure("target"), cfg);
    if (cmd == "h1") return cmd_h1(structure("source"), structure("target"), cfg);
    if (cmd == "maltsev") return cmd_maltsev(clone_source_from_json(in.at("clone")), cfg);
    throw ValidationError("report has an unknown command '" + cmd + "'");
}

namespace report_detail {

struct Checker {
    std::vector<std::string> problems;
    void require(bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    }
};

inline HomMap map_from(const Json& j, std::size_t from, std::size_t to) {
    return HomMap{from, to, j.get<std::vector<Element>>()};
}

inline void check_coloring(Checker& ck, const CloneSource& src, const RelStructure& target, const Json& cert,
                           bool strong) {
    auto fs = free_structure(src, target);
    ck.require(fs.found(), "free structure could not be rebuilt");
    if (!fs.found()) return;
    ck.require(cert.at("free_structure_digest").get<std::string>() == free_digest(*fs.witness),
               "free structure digest differs");
    Coloring c{cert.at("map").get<std::vector<Element>>(), cert.at("strong").get<bool>()};
    ck.require(c.strong == strong, "coloring strength does not match the claim");
    ck.require(is_coloring(*fs.witness, c), "coloring certificate is not a coloring");
}

/// Independent checks of the positive certificates embedded in a report.
inline Checker check_certificates(const Json& report) {
    Checker ck;
    const std::string cmd = report.at("command").get<std::string>();
    const std::string verdict = report.at("verdict").get<std::string>();
    const RunConfig cfg = RunConfig::from_json(report.at("config"));
    const Json& in = report.at("inputs");
    const Json& cert = report.at("certificates");
    auto structure = [&](const char* key) { return structure_from_json(in.at(key)); };

    if (cmd == "classify") {
        const RelStructure a = structure("structure");
        if (cert.contains("siggers")) {
            OperationTable t = operation_from_json(cert.at("siggers"));
            ck.require(is_polymorphism(t, a), "Siggers table is not a polymorphism");
            ck.require(satisfies(siggers_system(), a.size(), {t}), "Siggers table violates the identity");
        }
        if (cert.contains("projection_coloring"))
            check_coloring(ck, CloneSource(a), validated_projection_structure(), cert.at("projection_coloring"), false);
        if (verdict == "taylor") ck.require(cert.contains("siggers"), "taylor verdict without a Siggers table");
        if (verdict == "hardness")
            ck.require(cert.contains("projection_coloring") || cert.at("siggers_search") == "none",
                       "hardness verdict without a certificate");
    } else if (cmd == "hom") {
        if (verdict == "found") {
            const RelStructure c = structure("source"), a = structure("target");
            ck.require(is_hom(map_from(cert.at("map"), c.size(), a.size()), c, a), "map is not a homomorphism");
        }
    } else if (cmd == "core") {
        if (verdict == "found") {
            const RelStructure a = structure("structure");
            const auto subset = cert.at("subset").get<std::vector<Element>>();
            const RelStructure core = structure_from_json(cert.at("core"));
            ck.require(induced_substructure(a, subset) == core, "core is not the induced substructure");
            const HomMap ret = map_from(cert.at("retraction"), a.size(), core.size());
            ck.require(is_hom(ret, a, core), "retraction is not a homomorphism");
            for (std::size_t i = 0; i < subset.size(); ++i)
                ck.require(ret.map.at(subset[i]) == i, "retraction is not the identity on the core");
            auto again = core_of(core, cfg.budget);
            ck.require(again.found() && again.witness->subset.size() == core.size(), "core has a proper retract");
        }
    } else if (cmd == "homeq" || (cmd == "pp" && cert.contains("forward"))) {
        if (verdict == "found") {
            const RelStructure x = cmd == "pp" ? structure_from_json(cert.at("power")) : structure("source");
            const RelStructure y = structure("target");
            ck.require(is_hom(map_from(cert.at("forward"), x.size(), y.size()), x, y), "forward map is not a homomorphism");
            ck.require(is_hom(map_from(cert.at("backward"), y.size(), x.size()), y, x), "backward map is not a homomorphism");
            if (cmd == "pp") {
                const std::string spec_text =
                    cert.contains("spec") ? cert.at("spec").get<std::string>() : in.at("spec").get<std::string>();
                ck.require(pp_power(structure("structure"), parse_pp_power_spec(spec_text)) == x,
                           "pp-power does not match its spec");
            }
        }
    } else if (cmd == "pp") {
        if (verdict == "constructed")
            ck.require(pp_power(structure("structure"), parse_pp_power_spec(in.at("spec").get<std::string>())) ==
                           structure_from_json(cert.at("power")),
                       "pp-power does not match its spec");
    } else if (cmd == "poly") {
        const RelStructure a = structure("structure");
        const auto ops = ops_from_json(cert.at("operations"));
        ck.require(ops.size() == cert.at("count").get<std::size_t>(), "operation count mismatch");
        for (std::size_t i = 0; i < ops.size(); ++i) {
            ck.require(ops[i].arity() == cfg.arity && is_polymorphism(ops[i], a), "listed operation is not a polymorphism");
            if (i > 0) ck.require(ops[i - 1] < ops[i], "operations are not strictly sorted");
        }
    } else if (cmd == "ppdef") {
        if (cert.contains("violator")) {
            const RelStructure a = structure("structure");
            const RelStructure cand = structure("candidate");
            OperationTable f = operation_from_json(cert.at("violator"));
            ck.require(is_polymorphism(f, a), "violator is not a polymorphism");
            ck.require(!preserves(f, cand.relation(0)), "violator preserves the candidate");
        }
    } else if (cmd == "color") {
        if (cert.contains("coloring"))
            check_coloring(ck, clone_source_from_json(in.at("clone")), structure("target"), cert.at("coloring"),
                           cfg.strong);
    } else if (cmd == "h1") {
        if (cert.contains("coloring")) {
            const RelStructure a = structure("source"), t = structure("target");
            check_coloring(ck, CloneSource(a), t, cert.at("coloring"), false);
            for (const auto& f : ops_from_json(cert.at("induced")))
                ck.require(is_polymorphism(f, t), "induced operation is not a polymorphism of the target");
        }
    } else if (cmd == "maltsev") {
        const CloneSource src = clone_source_from_json(in.at("clone"));
        if (cert.contains("chain")) {
            const auto ops = ops_from_json(cert.at("chain"));
            HMChain chain{ops.size() + 1, ops};
            ck.require(is_hm_chain(chain), "chain violates the Hagemann-Mitschke identities");
            if (const auto* a = std::get_if<RelStructure>(&src)) {
                for (const auto& p : ops) ck.require(is_polymorphism(p, *a), "chain member is not a polymorphism");
            } else {
                auto members = generate_to_arity(std::get<CloneGenSet>(src), 3, cfg.budget);
                for (const auto& p : ops)
                    ck.require(members.found() && std::binary_search(members.witness->begin(), members.witness->end(), p),
                               "chain member is not in the clone");
            }
        }
        if (cert.contains("coloring"))
            check_coloring(ck, src, cfg.test == "n-perm" ? fixtures::le2() : fixtures::day_structure(),
                           cert.at("coloring"), true);
    } else {
        ck.require(false, "unknown command");
    }
    return ck;
}

/// Verdicts that claim a search came back empty; these are re-derived on verification.
inline bool is_negative_verdict(const std::string& cmd, const std::string& v) {
    if (v == "none" || v == "not_definable" || v == "hardness" || v == "none_within_bounds") return true;
    if (cmd == "ppdef" && v == "definable") return true;
    if (cmd == "poly" && v == "complete") return true;
    if (cmd == "maltsev" && (v == "n_permutable" || v == "modular" || v == "not_n_permutable" || v == "not_modular"))
        return true;
    return false;
}

} // namespace report_detail

/// Runs the certificate checks on a freshly produced report; a failure is an internal error.
inline Report checked(Report r) {
    auto ck = report_detail::check_certificates(r.json);
    if (!ck.problems.empty()) throw CrossCheckError("report certificate failed re-verification: " + ck.problems.front());
    return r;
}

/// Checks a report from its own content: certificates independently, negative answers by re-running.
inline Report verify_report(const Json& report) {
    Json out;
    out["tool"] = kToolName;
    out["version"] = kToolVersion;
    out["command"] = "verify";
    out["verified_command"] = report.at("command");
    out["verified_digest"] = report.at("input_digest");
    auto ck = report_detail::check_certificates(report);
    const std::string cmd = report.at("command").get<std::string>();
    const std::string verdict = report.at("verdict").get<std::string>();
    ck.require(hex_digest(fnv1a64(report.at("inputs").dump(), fnv1a64(cmd))) == report.at("input_digest"),
               "input digest does not match the inputs");
    if (report_detail::is_negative_verdict(cmd, verdict)) {
        Report again = rerun_report(report);
        ck.require(again.json.at("verdict") == report.at("verdict"), "re-run gives verdict " +
                                                                         again.json.at("verdict").get<std::string>());
        if (cmd == "poly")
            ck.require(again.json.at("certificates").at("operations") == report.at("certificates").at("operations"),
                       "re-run lists different polymorphisms");
    }
    const bool ok = ck.problems.empty();
    out["accepted"] = ok;
    out["problems"] = ck.problems;
    std::string text = ok ? "verify: accepted (" + cmd + ", " + verdict + ")" : "verify: REJECTED";
    for (const auto& p : ck.problems) text += "\n  " + p;
    return Report{std::move(out), ok ? kExitPositive : kExitInternal, std::move(text)};
}

} // namespace polyclone
