// One line per acceptance criterion; exit status is nonzero if any fails.
// Expects FIFTH_CORPUS to point at the corpus directory.

#include "fifth/autoenc.hpp"
#include "fifth/cli.hpp"
#include "fifth/hierarchy.hpp"
#include "fifth/planning.hpp"
#include "fifth/search.hpp"
#include "fifth/selftest.hpp"

#include "corpus_gen.hpp"
#include "oracles/brute.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace fifth;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 2)
{
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << x;
    return ss.str();
}

std::shared_ptr<const Program> load(const std::string& text)
{
    return std::make_shared<const Program>(parse(text));
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SolutionSet run(const std::shared_ptr<const Program>& p, const Query& q, bool gc = false)
{
    UniformOracle u;
    SearchOptions opt;
    opt.collect_garbage = gc;
    return q.minimize ? optimize(p, q, u, opt) : solve(p, q, u, opt);
}

std::int64_t exact_int(const PartialInfo& v)
{
    auto b = bounds_of(v);
    if (!b || !b->integral || b->lo != b->hi) throw std::runtime_error("not an exact integer: " + render(v));
    return static_cast<std::int64_t>(b->lo);
}

std::set<std::vector<std::int64_t>> int_rows(const SolutionSet& s)
{
    std::set<std::vector<std::int64_t>> out;
    for (const auto& sol : s.solutions) {
        std::vector<std::int64_t> row;
        for (const auto& [name, v] : sol.cells) row.push_back(exact_int(v));
        out.insert(row);
    }
    return out;
}

// The rendered answer a corpus program must keep under any search option:
// the solution set, or the optimum for minimizing queries.
std::string answer(const SolutionSet& s, bool minimizing)
{
    std::ostringstream os;
    os << (s.stats.complete ? "complete" : "incomplete") << ":";
    if (minimizing) {
        os << (s.solutions.empty() ? "none" : render(*s.solutions.front().objective));
        return os.str();
    }
    std::set<std::string> rows;
    for (const auto& sol : s.solutions) {
        std::string r;
        for (const auto& [n, v] : sol.cells) r += n + "=" + render(v) + " ";
        rows.insert(r);
    }
    for (const auto& r : rows) os << r << "|";
    return os.str();
}

Instance quiesced(const std::string& text)
{
    auto p = load(text);
    Query q = make_query(*p);
    Instance inst = Instance::instantiate(p, q.entry, q.bindings);
    Targets t;
    for (const auto& name : q.show) t.cells.push_back(inst.root_cell(name));
    demand_loop(inst, t, DemandOptions{});
    return inst;
}

struct Cli {
    int code;
    std::string out, err;
};

Cli cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

Verdict lattice_laws()
{
    auto t0 = Clock::now();
    LawReport r = check_lattice_laws(10'000, 1);
    double s = seconds_since(t0);
    bool ok = r.failures == 0 && r.checked >= 10'000 && s < 5.0;
    return {ok, std::to_string(r.checked) + " triples, " + std::to_string(r.failures) + " failures, " + fmt(s) + " s" +
                    (r.failures ? "; " + r.first_failure : "")};
}

Verdict confluence()
{
    auto t0 = Clock::now();
    LawReport r = check_confluence(200, 20, 1);
    double s = seconds_since(t0);
    bool ok = r.failures == 0 && r.checked == 200 * 20 && s < 60.0;
    return {ok, "200 networks x 20 orders, " + std::to_string(r.checked) + " comparisons, " + std::to_string(r.failures) + " failures, " +
                    fmt(s) + " s" + (r.failures ? "; " + r.first_failure : "")};
}

Verdict oracle_equivalence()
{
    auto t0 = Clock::now();
    std::vector<std::string> bad;
    const std::map<int, std::size_t> counts{{4, 2}, {5, 10}, {6, 4}, {8, 92}};
    for (auto [n, count] : counts) {
        auto p = load(emit_queens_program(n));
        auto got = int_rows(run(p, make_query(*p)));
        std::set<std::vector<std::int64_t>> want;
        for (const auto& q : oracle::queens(n)) want.emplace(q.begin(), q.end());
        if (got != want || got.size() != count) bad.push_back("queens " + std::to_string(n));
    }
    {
        auto p = load(emit_sendmore_program());
        auto got = int_rows(run(p, make_query(*p)));
        std::set<std::vector<std::int64_t>> want;
        for (const auto& s : oracle::sendmore()) want.emplace(s.begin(), s.end());
        bool send = got.size() == 1 && std::vector<std::int64_t>(got.begin()->begin(), got.begin()->begin() + 4) ==
                                           std::vector<std::int64_t>{9, 5, 6, 7};
        if (got != want || !send) bad.push_back("send+more");
    }
    std::size_t csps = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed, ++csps) {
        CspInstance c = generate_random_csp(6, 4, 0.4, seed);
        auto p = load(c.text);
        auto got = int_rows(run(p, make_query(*p)));
        std::set<std::vector<std::int64_t>> want;
        for (const auto& x : oracle::csp(c)) want.emplace(x.begin(), x.end());
        if (got != want) bad.push_back("csp seed " + std::to_string(seed));
    }
    double s = seconds_since(t0);
    std::string detail = "queens 4/5/6/8, send+more, " + std::to_string(csps) + " CSPs; " + fmt(s) + " s";
    if (!bad.empty()) detail += "; mismatch: " + bad.front();
    return {bad.empty() && s < 300.0, detail};
}

Verdict recursion()
{
    std::vector<std::string> notes;
    bool ok = true;
    for (auto [n, r] : std::vector<std::pair<int, std::int64_t>>{{0, 1}, {6, 720}, {10, 3628800}}) {
        auto p = load(emit_fact_program(n));
        auto s = run(p, make_query(*p));
        bool good = s.stats.complete && s.solutions.size() == 1 &&
                    s.solutions.front().cells.front().second == PartialInfo::exact(r) &&
                    s.stats.expansions == static_cast<std::uint64_t>(n);
        ok = ok && good;
        notes.push_back("fact(" + std::to_string(n) + ")=" + (s.solutions.empty() ? "?" : render(s.solutions.front().cells.front().second)) +
                        " in " + std::to_string(s.stats.expansions) + " expansions");
    }
    auto p = load(emit_fact_program(10));
    Query q = make_query(*p);
    q.budgets.depth = 3;
    auto starved = run(p, q);
    ok = ok && !starved.stats.complete;
    notes.push_back(std::string("depth 3: ") + (starved.stats.complete ? "complete" : "incomplete"));
    std::string d;
    for (const auto& n : notes) d += (d.empty() ? "" : ", ") + n;
    return {ok, d};
}

Verdict log_hops()
{
    auto t0 = Clock::now();
    AugmentationTree tree(HierarchyConfig{}, 1);
    bool ok = true;
    std::string d;
    for (auto [depth, bound] : std::vector<std::pair<int, int>>{{64, 7}, {256, 9}, {1024, 11}}) {
        Instance inst = quiesced(emit_countdown_program(depth));
        FrameId leaf = 0;
        for (const auto& f : inst.frames())
            if (f.state == ExpansionState::Expanded && f.depth > inst.frame(leaf).depth) leaf = f.id;
        auto c = tree.compose_path(inst, leaf);
        ok = ok && c.frames == depth && c.hops <= bound;
        d += (d.empty() ? "" : ", ") + ("d=" + std::to_string(depth) + " hops " + std::to_string(c.hops) + "<=" + std::to_string(bound));
    }
    double s = seconds_since(t0);
    return {ok && s < 10.0, d + "; " + fmt(s) + " s"};
}

int plane_dim(double sparsity)
{
    Mat data = plane_dataset(10, 2, 256, 7);
    AutoencoderConfig cfg;
    cfg.inputs = 10;
    cfg.sparsity = sparsity;
    Autoencoder ae(cfg, 7);
    train(ae, data, TrainOptions{200, 7, true});
    return ae.effective_dim(data);
}

Verdict autoencoder()
{
    GradientSurvey g = survey_gradients(20, 1);
    int dim = plane_dim(0.05);
    int d0 = plane_dim(0.0), d1 = plane_dim(0.01), d2 = plane_dim(0.1);
    bool ok = g.configurations == 20 && g.max_relative_error < 1e-4 && (dim == 2 || dim == 3) && d0 >= d1 && d1 >= d2;
    std::ostringstream os;
    os << "gradient error " << std::scientific << g.max_relative_error << " over " << g.configurations
       << " configs, plane dim " << dim << ", dims at 0/0.01/0.1: " << d0 << "/" << d1 << "/" << d2;
    return {ok, os.str()};
}

Verdict guidance()
{
    auto r = cli({"measure", "csp/train", "csp/eval", "--seed", "1"});
    if (r.out.empty()) return {false, "measure failed: " + r.err};
    json j = json::parse(r.out);
    std::size_t equal = 0, total = j["instances"].size();
    for (const auto& row : j["instances"]) equal += row["solutions_equal"].get<bool>();
    const auto& a = j["aggregate"];
    bool ok = r.code == kExitOk && total == 20 && equal == total;
    return {ok, std::to_string(equal) + "/" + std::to_string(total) + " solutions equal; median nodes uniform " +
                    fmt(a["median_nodes_uniform"].get<double>(), 1) + ", learned " +
                    fmt(a["median_nodes_learned"].get<double>(), 1) + "; median nodes to first solution uniform " +
                    fmt(a["median_first_solution_uniform"].get<double>(), 1) + ", learned " +
                    fmt(a["median_first_solution_learned"].get<double>(), 1)};
}

Verdict gc_preservation()
{
    auto files = program_files(corpus_root());
    std::size_t same = 0;
    std::string first_bad;
    for (const auto& f : files) {
        auto p = load(slurp(f));
        Query q = make_query(*p);
        bool minimizing = q.minimize.has_value();
        if (answer(run(p, q, false), minimizing) == answer(run(p, q, true), minimizing))
            ++same;
        else if (first_bad.empty())
            first_bad = f.filename().string();
    }
    auto p = load(emit_fact_program(10));
    auto fact = run(p, make_query(*p), true);
    bool ok = !files.empty() && same == files.size() && fact.stats.summarized > 0;
    return {ok, std::to_string(same) + "/" + std::to_string(files.size()) + " corpus answers unchanged; fact(10) summarized " +
                    std::to_string(fact.stats.summarized) + " frames" + (first_bad.empty() ? "" : "; differs: " + first_bad)};
}

Verdict scheduling()
{
    JobShopInstance js = jobshop_3x3_a();
    auto p = load(emit_jobshop_program(js));
    auto s = run(p, make_query(*p));
    std::int64_t want = oracle::jobshop_optimum(js);
    std::int64_t got = s.solutions.empty() ? -1 : exact_int(*s.solutions.front().objective);

    auto line = corpus::line4();
    auto h = load(emit_horizon_program(line));
    auto plan = run(h, make_query(*h));
    std::int64_t reward = plan.solutions.empty() ? 0 : -exact_int(*plan.solutions.front().objective);
    bool ok = s.stats.complete && got == want && plan.stats.complete && reward == 6 && reward == oracle::line_world_best(line);
    return {ok, "js-3x3-a makespan " + std::to_string(got) + " (enumeration " + std::to_string(want) + "), line world H=4 reward " +
                    std::to_string(reward)};
}

Verdict determinism()
{
    fs::path tmp = fs::temp_directory_path() / "fifth-acceptance";
    fs::remove_all(tmp);
    std::vector<std::vector<std::string>> commands = {
        {"solve", (corpus_root() / "queens/q6.5th").string(), "--seed", "3"},
        {"optimize", (corpus_root() / "jobshop/js-3x3-a.5th").string(), "--seed", "3", "--trace"},
        {"solve", (corpus_root() / "fact/fact10.5th").string(), "--gc", "--trace"},
        {"check", "--self-test", "--seed", "3"},
    };
    for (const auto& c : commands) {
        auto a = cli(c), b = cli(c);
        if (a.code != b.code || a.out != b.out) return {false, "output differs for " + c.front()};
    }
    auto m1 = cli({"train", "csp/train", "--model", (tmp / "a").string(), "--seed", "9"});
    auto m2 = cli({"train", "csp/train", "--model", (tmp / "b").string(), "--seed", "9"});
    if (m1.code != kExitOk || m1.out != m2.out) return {false, "train report differs: " + m1.err};
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(tmp / "a")) {
        ++files;
        if (slurp(e.path()) != slurp(tmp / "b" / e.path().filename()))
            return {false, "bundle file differs: " + e.path().filename().string()};
    }
    auto r1 = cli({"measure", "--model", (tmp / "a").string()});
    auto r2 = cli({"measure", "--model", (tmp / "a").string()});
    if (r1.code != r2.code || r1.out != r2.out) return {false, "measure report differs"};
    fs::remove_all(tmp);
    return {true, std::to_string(commands.size() + 2) + " commands repeated, " + std::to_string(files) +
                      " bundle files bit-identical"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"lattice laws", lattice_laws},
        {"confluence", confluence},
        {"oracle equivalence", oracle_equivalence},
        {"unbounded recursion", recursion},
        {"logarithmic communication", log_hops},
        {"autoencoder correctness", autoencoder},
        {"guidance soundness", guidance},
        {"GC preservation", gc_preservation},
        {"scheduling", scheduling},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failed += !v.pass;
        std::cout << "criterion " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
                  << v.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
    return failed ? 1 : 0;
}
