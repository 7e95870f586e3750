#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "polyclone/report.hpp"

namespace {

using namespace polyclone;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RelStructure load_structure(const std::string& path) {
    try {
        return parse_structure(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

struct Options {
    std::string json_path;
    std::uint64_t budget_nodes = SearchBudget{}.node_limit;
    std::int64_t budget_ms = SearchBudget{}.time_limit.count();
    unsigned parallel = 1;
    bool deterministic = true;
    std::size_t arity = 2;
    std::size_t arity_cap = kDefaultDefinabilityArityCap;
    bool strong = false;
    std::string target;
    std::string spec;
    std::string test = "n-perm";
    bool search = false;
    PPSearchBounds bounds;
    std::vector<std::string> files;

    RunConfig config() const {
        RunConfig c;
        c.budget.node_limit = budget_nodes;
        c.budget.time_limit = std::chrono::milliseconds(budget_ms);
        c.budget.parallel_width = parallel;
        c.budget.validate();
        c.deterministic = deterministic;
        c.arity = arity;
        c.arity_cap = arity_cap;
        c.strong = strong;
        c.test = test;
        c.search = search;
        c.bounds = bounds;
        return c;
    }
};

int emit(const Report& r, const Options& o) {
    const std::string json = r.json.dump(2) + "\n";
    if (o.json_path == "-") {
        std::cout << json;
    } else {
        std::cout << r.text << "\n";
        if (!o.json_path.empty()) {
            std::ofstream out(o.json_path, std::ios::binary);
            if (!out) throw ParseError("cannot write '" + o.json_path + "'");
            out << json;
        }
    }
    return r.exit_code;
}

void need_files(const Options& o, std::size_t n, const char* usage) {
    if (o.files.size() != n) throw ValidationError(std::string("usage: ") + usage);
}

std::string need_target(const Options& o) {
    if (o.target.empty()) throw ValidationError("--target is required");
    return o.target;
}

int run(const std::string& cmd, const Options& o) {
    const RunConfig cfg = o.config();
    if (cmd == "classify") {
        need_files(o, 1, "classify STRUCTURE");
        return emit(checked(cmd_classify(load_structure(o.files[0]), cfg)), o);
    }
    if (cmd == "hom") {
        need_files(o, 2, "hom SOURCE TARGET");
        return emit(checked(cmd_hom(load_structure(o.files[0]), load_structure(o.files[1]), cfg)), o);
    }
    if (cmd == "core") {
        need_files(o, 1, "core STRUCTURE");
        return emit(checked(cmd_core(load_structure(o.files[0]), cfg)), o);
    }
    if (cmd == "homeq") {
        need_files(o, 2, "homeq A B");
        return emit(checked(cmd_homeq(load_structure(o.files[0]), load_structure(o.files[1]), cfg)), o);
    }
    if (cmd == "poly") {
        need_files(o, 1, "poly --arity N STRUCTURE");
        return emit(checked(cmd_poly(load_structure(o.files[0]), cfg)), o);
    }
    if (cmd == "pp") {
        need_files(o, 1, "pp --spec SPEC STRUCTURE [--target B] | pp --search --target B STRUCTURE");
        std::optional<RelStructure> target;
        if (!o.target.empty()) target = load_structure(o.target);
        PPPowerSpec spec;
        if (!o.search) {
            if (o.spec.empty()) throw ValidationError("--spec is required unless --search is given");
            spec = parse_pp_power_spec(read_file(o.spec));
        }
        return emit(checked(cmd_pp(load_structure(o.files[0]), spec, target, cfg)), o);
    }
    if (cmd == "ppdef") {
        need_files(o, 1, "ppdef --target CANDIDATE STRUCTURE");
        return emit(checked(cmd_ppdef(load_structure(o.files[0]), load_structure(need_target(o)), cfg)), o);
    }
    if (cmd == "color") {
        need_files(o, 1, "color --target B [--strong] CLONE");
        return emit(checked(cmd_color(parse_clone_source(read_file(o.files[0])), load_structure(need_target(o)), cfg)),
                    o);
    }
    if (cmd == "h1") {
        need_files(o, 1, "h1 --target B STRUCTURE");
        return emit(checked(cmd_h1(load_structure(o.files[0]), load_structure(need_target(o)), cfg)), o);
    }
    if (cmd == "maltsev") {
        need_files(o, 1, "maltsev --test n-perm|modular|hm-chain CLONE");
        return emit(checked(cmd_maltsev(parse_clone_source(read_file(o.files[0])), cfg)), o);
    }
    if (cmd == "verify") {
        need_files(o, 1, "verify REPORT");
        return emit(verify_report(detail::parse_json_text(read_file(o.files[0]))), o);
    }
    throw ValidationError("unknown command " + cmd);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Polymorphism clones, h1 clone homomorphisms and Maltsev conditions for finite structures"};
    app.set_config("--config", "", "key=value file with default option values");
    app.require_subcommand(1);
    Options o;
    app.add_option("--json", o.json_path, "write the JSON report to PATH ('-' prints it instead of the summary)");
    app.add_option("--budget-nodes", o.budget_nodes, "search node limit");
    app.add_option("--budget-ms", o.budget_ms, "search time limit in milliseconds");
    app.add_option("--parallel", o.parallel, "worker threads for search and closure");
    app.add_option("--deterministic", o.deterministic, "omit timings and node counts from reports (default true)");
    app.add_option("--arity", o.arity, "polymorphism arity (poly) or chain length (maltsev hm-chain)");
    app.add_option("--arity-cap", o.arity_cap, "largest polymorphism arity tried by ppdef");
    app.add_flag("--strong", o.strong, "require c(pi_b) = b (color)");
    app.add_option("--target", o.target, "target structure file");
    app.add_option("--spec", o.spec, "pp-power spec file (pp)");
    app.add_option("--test", o.test, "maltsev test")->check(CLI::IsMember({"n-perm", "modular", "hm-chain"}));
    app.add_flag("--search", o.search, "search for a pp-power spec within bounds (pp)");
    app.add_option("--max-dimension", o.bounds.max_dimension, "pp search: largest dimension");
    app.add_option("--max-existentials", o.bounds.max_existentials, "pp search: existential variables per formula");
    app.add_option("--max-atoms", o.bounds.max_atoms, "pp search: atoms per formula");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"classify", "h1 clone homomorphism to projections vs. Siggers polymorphism"},
        {"hom", "find a homomorphism SOURCE -> TARGET"},
        {"core", "compute the core and a retraction"},
        {"homeq", "homomorphic equivalence of two structures"},
        {"poly", "list the polymorphisms of a given arity"},
        {"pp", "pp-power of a structure, optionally checked against or searched for a target"},
        {"ppdef", "pp-definability of a candidate relation"},
        {"color", "(strong) coloring of a clone by a target structure"},
        {"h1", "h1 clone homomorphism Pol(A) -> Pol(B)"},
        {"maltsev", "n-permutability, congruence modularity, Hagemann-Mitschke chains"},
        {"verify", "re-check a JSON report"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->add_option("files", o.files, "input files");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        return run(cmd, o);
    } catch (const CapacityError& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const CrossCheckError& e) {
        std::cerr << "internal cross-check failure: " << e.what() << "\n";
        return kExitInternal;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed report: " << e.what() << "\n";
        return kExitUsage;
    }
}
