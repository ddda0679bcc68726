#include "fifth/cli.hpp"

#include "fifth/error.hpp"
#include "fifth/hierarchy.hpp"
#include "fifth/search.hpp"
#include "fifth/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace fifth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::vector<std::string> inputs;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> depth, steps, nodes;
    std::optional<double> precision;
    std::string oracle = "uniform";
    std::string model;
    bool trace = false;
    std::string out;
    bool gc = false;
    bool self_test = false;
    bool inject_fault = false;
};

class UsageError : public Error {
public:
    using Error::Error;
};

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const RunConfig& cfg, const json& j, std::ostream& out)
{
    std::string text = j.dump(2) + "\n";
    if (cfg.out.empty()) {
        out << text;
        return;
    }
    std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot write " + cfg.out);
    f << text;
}

fs::path resolve_corpus(const std::string& arg, const fs::path& fallback)
{
    if (arg.empty()) return corpus_root() / fallback;
    fs::path p(arg);
    if (p.is_relative() && !fs::exists(p)) {
        fs::path under = corpus_root() / p;
        if (fs::exists(under)) return under;
    }
    return p;
}

struct Loaded {
    std::shared_ptr<const Program> program;
    Query query;
};

Loaded load_program(const fs::path& path, const RunConfig& cfg)
{
    auto program = std::make_shared<const Program>(parse(read_file(path)));
    Query q = make_query(*program);
    if (cfg.depth) q.budgets.depth = *cfg.depth;
    if (cfg.steps) q.budgets.steps = *cfg.steps;
    if (cfg.nodes) q.budgets.nodes = *cfg.nodes;
    if (cfg.precision) q.precision = *cfg.precision;
    return {program, q};
}

SolutionSet run_query(const Loaded& l, BranchOracle& oracle, const SearchOptions& opt)
{
    return l.query.minimize ? optimize(l.program, l.query, oracle, opt) : solve(l.program, l.query, oracle, opt);
}

int exit_for(const SolutionSet& s)
{
    if (!s.stats.complete) return kExitIncomplete;
    return s.solutions.empty() ? kExitUnsatisfiable : kExitOk;
}

AugmentationTree load_model(const std::string& path)
{
    if (path.empty()) throw UsageError("--oracle learned needs --model PATH");
    if (!fs::exists(fs::path(path) / "manifest.json")) throw UsageError("no model bundle at " + path);
    return AugmentationTree::load(path);
}

// Captures the frame and spine structure of the first solution state.
class StructureCapture : public SearchObserver {
public:
    void on_solution(const Instance& inst, const Solution&) override
    {
        if (dump.empty()) dump = AugmentationTree().dump_structure(inst);
    }
    std::string dump;
};

int cmd_solve(const RunConfig& cfg, bool optimizing, std::ostream& out)
{
    if (cfg.inputs.size() != 1) throw UsageError("expected one program file");
    Loaded l = load_program(cfg.inputs.front(), cfg);
    if (optimizing && !l.query.minimize) throw UsageError("optimize needs a query with (minimize cell)");
    std::optional<AugmentationTree> tree;
    UniformOracle uniform;
    std::unique_ptr<LearnedOracle> learned;
    BranchOracle* oracle = &uniform;
    if (cfg.oracle == "learned") {
        tree = load_model(cfg.model);
        learned = std::make_unique<LearnedOracle>(*tree);
        oracle = learned.get();
    }
    StructureCapture capture;
    SearchOptions opt;
    opt.collect_garbage = cfg.gc;
    if (cfg.trace) opt.observer = &capture;
    SolutionSet set = run_query(l, *oracle, opt);
    json j = json::parse(solution_json(set));
    if (cfg.gc) j["stats"]["summarized"] = set.stats.summarized;
    if (l.query.minimize) {
        json bounds = json::array();
        for (const auto& b : set.bound_trace) bounds.push_back({{"node", b.node}, {"incumbent", b.incumbent}});
        j["bound_trace"] = bounds;
        j["objective"] = nullptr;
        if (!set.solutions.empty() && set.solutions.front().objective) {
            const auto& obj = *set.solutions.front().objective;
            auto b = bounds_of(obj);
            j["objective"] = b && b->integral && b->lo == b->hi ? json(static_cast<std::int64_t>(b->lo)) : json(render(obj));
        }
        j["stats"]["proven_optimal"] = set.stats.complete && !set.solutions.empty();
    }
    if (cfg.trace) j["trace"] = capture.dump.empty() ? json(nullptr) : json::parse(capture.dump);
    emit(cfg, j, out);
    return exit_for(set);
}

json encoder_reports(const std::vector<EncoderReport>& list)
{
    json a = json::array();
    for (const auto& e : list)
        a.push_back({{"name", e.name},
                     {"samples", e.samples},
                     {"batches", e.batches},
                     {"initial_loss", e.initial_loss},
                     {"final_loss", e.final_loss},
                     {"effective_dim", e.effective_dim}});
    return a;
}

struct Trained {
    AugmentationTree tree;
    json report;
};

Trained train_on(const fs::path& dir, const RunConfig& cfg)
{
    auto files = program_files(dir);
    if (files.empty()) throw UsageError("no instances in " + dir.string());
    Trained t{AugmentationTree(HierarchyConfig{}, cfg.seed), json::object()};
    TraceSet traces;
    TraceCollector collector(traces);
    UniformOracle uniform;
    SearchOptions opt;
    opt.observer = &collector;
    std::size_t solved = 0;
    for (const auto& f : files) solved += !run_query(load_program(f, cfg), uniform, opt).solutions.empty();
    HierarchyReport r = t.tree.train_from_traces(traces, cfg.seed);
    for (const auto* group : {&r.encoders, &r.bridges, &r.spines})
        for (const auto& e : *group)
            if (!std::isfinite(e.final_loss)) throw NumericError("training produced a non-finite loss for " + e.name);
    t.report = {{"instances", files.size()},
                {"solved", solved},
                {"seed", cfg.seed},
                {"batches", r.batches},
                {"encoders", encoder_reports(r.encoders)},
                {"bridges", encoder_reports(r.bridges)},
                {"spines", encoder_reports(r.spines)},
                {"memory", {{"success", r.success_codes}, {"deadend", r.deadend_codes}}}};
    return t;
}

int cmd_train(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.inputs.size() > 1) throw UsageError("expected at most one corpus directory");
    if (cfg.model.empty()) throw UsageError("train needs --model PATH for the bundle");
    fs::path dir = resolve_corpus(cfg.inputs.empty() ? "" : cfg.inputs.front(), "csp/train");
    Trained t = train_on(dir, cfg);
    t.tree.save(cfg.model);
    emit(cfg, t.report, out);
    return kExitOk;
}

// Search nodes visited up to the first solution. Full enumeration visits the
// same tree under any value order, so this is where ordering shows.
class FirstSolutionProbe : public SearchObserver {
public:
    void on_node(const Instance&) override { visit(); }
    void on_deadend(const Instance&) override { visit(); }
    void on_solution(const Instance&, const Solution&) override { found = true; }
    std::uint64_t nodes = 0;
    bool found = false;

private:
    void visit()
    {
        if (!found) ++nodes;
    }
};

std::set<std::vector<std::string>> rendered(const SolutionSet& s)
{
    std::set<std::vector<std::string>> out;
    for (const auto& sol : s.solutions) {
        std::vector<std::string> row;
        for (const auto& [name, value] : sol.cells) row.push_back(name + "=" + render(value));
        out.insert(row);
    }
    return out;
}

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_measure(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.inputs.size() > 2) throw UsageError("expected train and eval directories");
    fs::path train_dir = resolve_corpus(cfg.inputs.size() > 0 ? cfg.inputs[0] : "", "csp/train");
    fs::path eval_dir = resolve_corpus(cfg.inputs.size() > 1 ? cfg.inputs[1] : "", "csp/eval");
    if (cfg.oracle != "learned" && cfg.oracle != "uniform") throw UsageError("unknown oracle " + cfg.oracle);

    std::optional<AugmentationTree> tree;
    std::string model_source;
    if (!cfg.model.empty()) {
        tree = load_model(cfg.model);
        model_source = "bundle";
    } else {
        tree = train_on(train_dir, cfg).tree;
        model_source = "trained";
    }
    auto files = program_files(eval_dir);
    if (files.empty()) throw UsageError("no instances in " + eval_dir.string());

    UniformOracle uniform;
    LearnedOracle learned(*tree);
    BranchOracle& other = cfg.oracle == "learned" ? static_cast<BranchOracle&>(learned) : uniform;
    json rows = json::array();
    std::vector<double> nu, nl, fu, fl;
    bool all_equal = true;
    for (const auto& f : files) {
        Loaded l = load_program(f, cfg);
        FirstSolutionProbe pa, pb;
        SearchOptions oa, ob;
        oa.observer = &pa;
        ob.observer = &pb;
        SolutionSet a = run_query(l, uniform, oa);
        SolutionSet b = run_query(l, other, ob);
        bool equal;
        if (l.query.minimize) {
            auto objective = [](const SolutionSet& s) {
                return s.solutions.empty() ? std::string("none") : render(*s.solutions.front().objective);
            };
            equal = objective(a) == objective(b);
        } else {
            equal = rendered(a) == rendered(b);
        }
        all_equal = all_equal && equal;
        nu.push_back(static_cast<double>(a.stats.nodes));
        nl.push_back(static_cast<double>(b.stats.nodes));
        fu.push_back(static_cast<double>(pa.nodes));
        fl.push_back(static_cast<double>(pb.nodes));
        rows.push_back({{"name", fs::relative(f, eval_dir).generic_string()},
                        {"nodes_uniform", a.stats.nodes},
                        {"nodes_learned", b.stats.nodes},
                        {"first_solution_uniform", pa.nodes},
                        {"first_solution_learned", pb.nodes},
                        {"solutions", a.solutions.size()},
                        {"complete", a.stats.complete && b.stats.complete},
                        {"solutions_equal", equal}});
    }
    json report = {{"oracle", cfg.oracle},
                   {"model", model_source},
                   {"seed", cfg.seed},
                   {"instances", rows},
                   {"aggregate",
                    {{"count", files.size()},
                     {"median_nodes_uniform", median(nu)},
                     {"median_nodes_learned", median(nl)},
                     {"median_first_solution_uniform", median(fu)},
                     {"median_first_solution_learned", median(fl)},
                     {"all_solutions_equal", all_equal}}}};
    emit(cfg, report, out);
    return all_equal ? kExitOk : kExitGuidanceMismatch;
}

int cmd_check(const RunConfig& cfg, std::ostream& out)
{
    if (!cfg.self_test) throw UsageError("check needs --self-test");
    SelfTestOptions opt;
    opt.seed = cfg.seed;
    opt.inject_merge_fault = cfg.inject_fault;
    bool ok = true;
    for (const auto& r : run_self_test(opt)) {
        out << r.name << ": " << (r.passed ? "pass" : "FAIL");
        if (!r.detail.empty()) out << " (" << r.detail << ")";
        out << "\n";
        ok = ok && r.passed;
    }
    return ok ? kExitOk : kExitUsage;
}

void add_budget_flags(CLI::App* sub, RunConfig& cfg)
{
    sub->add_option("--depth", cfg.depth, "Expansion depth budget");
    sub->add_option("--steps", cfg.steps, "Propagation step budget");
    sub->add_option("--nodes", cfg.nodes, "Search node budget");
    sub->add_option("--precision", cfg.precision, "Widest acceptable target interval");
}

}  // namespace

fs::path corpus_root()
{
    const char* env = std::getenv("FIFTH_CORPUS");
    return env && *env ? fs::path(env) : fs::path("corpus");
}

std::vector<fs::path> program_files(const fs::path& dir)
{
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".5th") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"FIFTH: propagator networks with lazy recursion and learned search guidance", "fifth"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* solve_cmd = app.add_subcommand("solve", "Find every solution (or the optimum when the query minimizes)");
    auto* opt_cmd = app.add_subcommand("optimize", "Branch-and-bound minimization of the query objective");
    for (auto* sub : {solve_cmd, opt_cmd}) {
        sub->add_option("program", cfg.inputs, "Program file (.5th)")->required();
        add_budget_flags(sub, cfg);
        sub->add_option("--seed", cfg.seed, "Seed");
        sub->add_option("--oracle", cfg.oracle, "Value ordering")->check(CLI::IsMember({"uniform", "learned"}));
        sub->add_option("--model", cfg.model, "Model bundle directory for --oracle learned");
        sub->add_flag("--trace", cfg.trace, "Include the frame and spine trees of the first solution");
        sub->add_flag("--gc", cfg.gc, "Summarize decided frames during search");
        sub->add_option("--out", cfg.out, "Write the report here instead of stdout");
    }

    auto* train_cmd = app.add_subcommand("train", "Solve a corpus with tracing and train the hierarchy");
    train_cmd->add_option("corpus", cfg.inputs, "Corpus directory (default <corpus root>/csp/train)");
    train_cmd->add_option("--model", cfg.model, "Output bundle directory")->required();

    auto* measure_cmd = app.add_subcommand("measure", "Compare learned and uniform value ordering");
    measure_cmd->add_option("dirs", cfg.inputs, "Train and eval directories");
    measure_cmd->add_option("--model", cfg.model, "Trained bundle; trained from the train directory when omitted");
    measure_cmd->add_option("--oracle", cfg.oracle, "Oracle compared against uniform")
        ->check(CLI::IsMember({"uniform", "learned"}))
        ->default_str("learned");
    for (auto* sub : {train_cmd, measure_cmd}) {
        add_budget_flags(sub, cfg);
        sub->add_option("--seed", cfg.seed, "Seed");
        sub->add_option("--out", cfg.out, "Write the report here instead of stdout");
    }

    auto* check_cmd = app.add_subcommand("check", "Run the built-in law checks");
    check_cmd->add_flag("--self-test", cfg.self_test, "Lattice laws, confluence sample, gradient check");
    check_cmd->add_option("--seed", cfg.seed, "Seed");
    check_cmd->add_flag("--inject-merge-fault", cfg.inject_fault, "Break merge on purpose (the checks must fail)")
        ->group("");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "fifth: " << e.what() << "\n";
        return kExitUsage;
    }
    if (measure_cmd->parsed() && measure_cmd->count("--oracle") == 0) cfg.oracle = "learned";

    try {
        if (solve_cmd->parsed()) return cmd_solve(cfg, false, out);
        if (opt_cmd->parsed()) return cmd_solve(cfg, true, out);
        if (train_cmd->parsed()) return cmd_train(cfg, out);
        if (measure_cmd->parsed()) return cmd_measure(cfg, out);
        if (check_cmd->parsed()) return cmd_check(cfg, out);
    } catch (const ParseError& e) {
        err << "fifth: parse error at " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "fifth: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "fifth: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace fifth
