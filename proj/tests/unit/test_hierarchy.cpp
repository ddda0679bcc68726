#include "fifth/error.hpp"
#include "fifth/hierarchy.hpp"
#include "fifth/planning.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace fifth;

namespace {

std::shared_ptr<const Program> load(const std::string& text)
{
    return std::make_shared<const Program>(parse(text));
}

Instance solved(const std::string& text)
{
    auto p = load(text);
    Query q = make_query(*p);
    Instance inst = Instance::instantiate(p, q.entry, q.bindings);
    Targets t;
    for (const auto& name : q.show) t.cells.push_back(inst.root_cell(name));
    demand_loop(inst, t, DemandOptions{});
    return inst;
}

FrameId deepest_expanded(const Instance& inst)
{
    FrameId best = 0;
    for (const auto& f : inst.frames())
        if (f.state == ExpansionState::Expanded && f.depth > inst.frame(best).depth) best = f.id;
    return best;
}

std::optional<FrameId> frame_with(const Instance& inst, const std::string& param, std::int64_t value)
{
    for (const auto& f : inst.frames()) {
        if (f.state != ExpansionState::Expanded) continue;
        if (inst.network().content(inst.cell(f.id, param)) == PartialInfo::exact(value)) return f.id;
    }
    return std::nullopt;
}

int log_bound(std::size_t d)
{
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(d)))) + 1;
}

std::set<std::vector<std::string>> rendered(const SolutionSet& s)
{
    std::set<std::vector<std::string>> out;
    for (const auto& sol : s.solutions) {
        std::vector<std::string> row;
        for (const auto& [n, v] : sol.cells) row.push_back(render(v));
        out.insert(row);
    }
    return out;
}

TraceSet traces_for(const std::vector<std::string>& programs, std::size_t* solved_count = nullptr)
{
    TraceSet traces;
    TraceCollector collector(traces);
    UniformOracle u;
    SearchOptions opt;
    opt.observer = &collector;
    std::size_t n = 0;
    for (const auto& text : programs) {
        auto p = load(text);
        n += !solve(p, make_query(*p), u, opt).solutions.empty();
    }
    if (solved_count) *solved_count = n;
    return traces;
}

std::vector<std::string> csp_corpus(int count, std::uint64_t seed)
{
    std::vector<std::string> out;
    SplitMix64 rng(seed);
    for (int i = 0; i < count; ++i) out.push_back(generate_random_csp(6, 4, 0.4, rng.next()).text);
    return out;
}

}  // namespace

TEST_CASE("featurize examples")
{
    auto fact = load(emit_fact_program(3));
    Instance open = Instance::instantiate(fact, "fact");
    open.network().run_to_quiescence(1000);
    REQUIRE(open.frames().size() == 2);
    Vec fresh = featurize(open, 1);
    REQUIRE(fresh.size() == kFeatureCount);
    CHECK(fresh[kFeatureCount - 1] == doctest::Approx(1.0 / 1024));
    CHECK(fresh.head(kFeatureCount - 1).isZero());

    Instance done = solved(emit_fact_program(3));
    for (const auto& f : done.frames()) {
        if (f.state != ExpansionState::Expanded) continue;
        Vec v = featurize(done, f.id);
        CHECK(v[0] == 1.0);
        CHECK(v[5] == 1.0);
        CHECK(v[1] == 1.0);
    }
    CHECK(featurize(done, 2) == featurize(done, 2));

    auto wide = load("(def (main a b c d e) (const a 1) (const b 2) (const c 3) (const d 4) (int e 0 3))");
    Instance w = Instance::instantiate(wide, "main");
    w.network().run_to_quiescence(100);
    Vec v = featurize(w, 0);
    CHECK(v[10] == doctest::Approx(2.0 / 3.0));  // c and d decided, e not
    CHECK(v[14] == 0.0);
    CHECK(v.maxCoeff() <= 1.0);
    CHECK(v.minCoeff() >= -1.0);
}

TEST_CASE("featurize_with simulates a refinement without writing")
{
    auto p = load(emit_queens_program(5));
    Instance inst = Instance::instantiate(p, "main");
    inst.network().run_to_quiescence(10'000);
    CellId q1 = inst.root_cell("q1");
    PartialInfo before = inst.network().content(q1);
    Vec base = featurize(inst, 0);
    Vec hyp = featurize_with(inst, 0, q1, PartialInfo::exact(3));
    CHECK(hyp[0] == 1.0);
    CHECK(base[0] == 0.0);
    CHECK(inst.network().content(q1) == before);
    CHECK(featurize_with(inst, 0, inst.root_cell("u1"), PartialInfo::exact(4)) == base);
}

TEST_CASE("encode_frame examples")
{
    AugmentationTree tree(HierarchyConfig{}, 3);
    Instance a = solved(emit_fact_program(5));
    Instance b = solved(emit_fact_program(5));
    tree.attach(a);
    CHECK(tree.encode_frame(a, 2) == tree.encode_frame(b, 2));
    CHECK(tree.encode_frame(a, 3).size() == tree.config().code);
    CHECK(tree.codes().size() == 2);

    auto enc = tree.encoder("fact");
    CHECK(enc == tree.encoder("fact"));
    enc->set_parameters(Vec::Zero(static_cast<Eigen::Index>(enc->parameter_count())));
    CHECK(tree.encode_frame(a, 2).isZero());
}

TEST_CASE("attach creates one shared encoder per definition")
{
    AugmentationTree tree(HierarchyConfig{}, 1);
    auto p = load(emit_fact_program(6));
    Instance inst = Instance::instantiate(p, "fact", {{"n", PartialInfo::exact(6)}});
    tree.attach(inst);
    CHECK(tree.encoders().size() == 1);
    demand_loop(inst, Targets{{inst.root_cell("r")}, 0.0}, DemandOptions{});
    CHECK(tree.encoders().size() == 1);
    CHECK(tree.encoders().count("fact") == 1);
}

TEST_CASE("compose_path examples")
{
    AugmentationTree tree(HierarchyConfig{}, 2);
    Instance one = solved(emit_countdown_program(1));
    auto c1 = tree.compose_path(one, 0);
    CHECK(c1.hops == 0);
    CHECK(c1.frames == 1);
    CHECK(c1.code == tree.encode_frame(one, 0));

    for (int d : {64, 256, 1024}) {
        Instance inst = solved(emit_countdown_program(d));
        FrameId leaf = deepest_expanded(inst);
        auto c = tree.compose_path(inst, leaf);
        CHECK(c.frames == d);
        CHECK(c.hops <= log_bound(static_cast<std::size_t>(d)));
        CHECK(c.code.size() == tree.config().code);
    }
}

TEST_CASE("property: spine height stays logarithmic up to 4096 frames")
{
    SpineTree spine;
    for (std::size_t d = 1; d <= 4096; ++d) {
        spine.push();
        REQUIRE(spine.size() == d);
        int bound = log_bound(d);
        CHECK(spine.height() <= bound);
        if (d <= 300 || d % 97 == 0)
            for (std::size_t leaf = 0; leaf < d; ++leaf) REQUIRE(spine.hops(leaf) <= bound);
    }
    CHECK(spine.structural_changes() <= 2 * 4096);
    CHECK(spine.nodes()[static_cast<std::size_t>(spine.root())].parent == -1);
}

TEST_CASE("property: compose_path depends only on the path's codes")
{
    AugmentationTree tree(HierarchyConfig{}, 4);
    Instance a = solved(emit_countdown_program(40));
    Instance b = solved(emit_countdown_program(40));
    auto ca = tree.compose_path(a, deepest_expanded(a));
    auto cb = tree.compose_path(b, deepest_expanded(b));
    CHECK(ca.code == cb.code);
    CHECK(tree.compose_path(a, deepest_expanded(a)).code == ca.code);
    Instance c = solved(emit_countdown_program(41));
    CHECK(tree.compose_path(c, deepest_expanded(c)).code != ca.code);
}

TEST_CASE("similarity examples")
{
    AugmentationTree tree(HierarchyConfig{}, 5);
    Instance inst = solved(emit_fact_program(6));
    CHECK(tree.similarity(inst, 2, 2) == 0.0);
    CHECK(tree.similarity(inst, 2, 4) == tree.similarity(inst, 4, 2));
    CHECK(tree.similarity(inst, 2, 4) >= 0.0);

    std::vector<std::string> programs;
    for (int n = 0; n <= 9; ++n) programs.push_back(emit_fact_program(n));
    TraceSet traces = traces_for(programs);
    tree.train_from_traces(traces, 5);
    Instance five = solved(emit_fact_program(5));
    Instance eight = solved(emit_fact_program(8));
    auto a = frame_with(five, "n", 3), b = frame_with(eight, "n", 3), c = frame_with(eight, "n", 6);
    REQUIRE(a);
    REQUIRE(b);
    REQUIRE(c);
    auto enc = tree.encoder("fact");
    auto mask = enc->active_mask();
    auto dist = [&](const Vec& x, const Vec& y) {
        double s = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (mask[static_cast<std::size_t>(i)]) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    };
    Vec ca = tree.encode_frame(five, *a), cb = tree.encode_frame(eight, *b), cc = tree.encode_frame(eight, *c);
    MESSAGE("same state " << dist(ca, cb) << ", different state " << dist(ca, cc));
    CHECK(dist(ca, cb) < dist(ca, cc));
}

TEST_CASE("train_from_traces examples")
{
    AugmentationTree tree(HierarchyConfig{}, 6);
    auto before = tree.encoder("main")->parameters();
    auto empty = tree.train_from_traces(TraceSet{}, 1);
    CHECK(empty.batches == 0);
    CHECK(empty.encoders.empty());
    CHECK(tree.encoder("main")->parameters() == before);

    std::size_t solved_count = 0;
    TraceSet traces = traces_for(csp_corpus(30, 41), &solved_count);
    REQUIRE(solved_count > 0);
    auto report = tree.train_from_traces(traces, 9);
    CHECK(report.batches > 0);
    REQUIRE(report.encoders.size() == 1);
    CHECK(std::isfinite(report.encoders[0].final_loss));
    CHECK(report.encoders[0].final_loss <= report.encoders[0].initial_loss);
    CHECK(report.success_codes >= solved_count);
    std::size_t successes = 0;
    for (const auto& e : tree.memory().at("main")) successes += e.label == Outcome::Success;
    CHECK(successes >= solved_count);

    AugmentationTree twin(HierarchyConfig{}, 6);
    twin.train_from_traces(traces, 9);
    CHECK(*twin.encoder("main") == *tree.encoder("main"));
    REQUIRE(twin.memory_size() == tree.memory_size());
    for (std::size_t i = 0; i < tree.memory().at("main").size(); ++i)
        CHECK(twin.memory().at("main")[i].code == tree.memory().at("main")[i].code);
}

TEST_CASE("train_from_traces trains bridges on recursive traces")
{
    AugmentationTree tree(HierarchyConfig{}, 8);
    std::vector<std::string> programs;
    for (int n = 1; n <= 8; ++n) programs.push_back(emit_fact_program(n));
    auto report = tree.train_from_traces(traces_for(programs), 2);
    REQUIRE(report.bridges.size() == 1);
    CHECK(report.bridges[0].name == "fact/fact");
    REQUIRE(report.spines.size() == 1);
    CHECK(std::isfinite(report.spines[0].final_loss));
}

TEST_CASE("property: retraining the shared encoder changes every frame's code")
{
    AugmentationTree tree(HierarchyConfig{}, 12);
    Instance inst = solved(emit_fact_program(6));
    std::vector<Vec> before;
    for (const auto& f : inst.frames())
        if (f.state == ExpansionState::Expanded) before.push_back(tree.encode_frame(inst, f.id));
    std::vector<std::string> programs{emit_fact_program(4), emit_fact_program(7)};
    tree.train_from_traces(traces_for(programs), 3);
    std::size_t i = 0;
    for (const auto& f : inst.frames())
        if (f.state == ExpansionState::Expanded) CHECK(tree.encode_frame(inst, f.id) != before[i++]);
}

TEST_CASE("oracle scores examples")
{
    auto p = load("(def (main x y) (choose x 0 1 2 3) (choose y 0 1 2 3) (lesseq x y))");
    Instance inst = Instance::instantiate(p, "main");
    inst.network().run_to_quiescence(100);
    CellId x = inst.root_cell("x");
    std::vector<BranchCandidate> cands;
    for (std::int64_t v = 0; v < 4; ++v) cands.push_back({x, v, 0});

    AugmentationTree tree(HierarchyConfig{}, 13);
    CHECK(tree.scores(inst, cands, 0) == std::vector<double>(4, 0.0));

    Vec target = tree.encoder("main")->encode(featurize_with(inst, 0, x, PartialInfo::exact(2)));
    tree.record_outcome("main", target, Outcome::Success);
    std::vector<PartialInfo> contents;
    for (CellId c = 0; c < inst.network().cell_count(); ++c) contents.push_back(inst.network().content(c));
    auto s = tree.scores(inst, cands, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(std::isfinite(s[i]));
        if (i != 2) CHECK(s[i] < s[2]);
    }
    for (CellId c = 0; c < inst.network().cell_count(); ++c) CHECK(inst.network().content(c) == contents[c]);

    tree.record_outcome("main", tree.encoder("main")->encode(featurize_with(inst, 0, x, PartialInfo::exact(0))),
                        Outcome::Deadend);
    auto t = tree.scores(inst, cands, 0);
    CHECK(t[2] > t[0]);
}

TEST_CASE("property: learned guidance never changes the solution set")
{
    AugmentationTree tree(HierarchyConfig{}, 21);
    tree.train_from_traces(traces_for(csp_corpus(10, 3)), 21);
    LearnedOracle learned(tree);
    UniformOracle uniform;
    std::vector<std::string> problems = csp_corpus(15, 77);
    problems.push_back(emit_queens_program(6));
    problems.push_back(emit_sendmore_program());
    problems.push_back(emit_fact_program(5));
    for (const auto& text : problems) {
        auto p = load(text);
        Query q = make_query(*p);
        CHECK(rendered(solve(p, q, learned)) == rendered(solve(p, q, uniform)));
    }
}

TEST_CASE("dump_structure shows both tree dimensions")
{
    AugmentationTree tree(HierarchyConfig{}, 1);
    Instance inst = solved(emit_countdown_program(9));
    auto j = nlohmann::json::parse(tree.dump_structure(inst));
    CHECK(j["frames"].size() == inst.frames().size());
    REQUIRE(j["spines"].size() == 1);
    CHECK(j["spines"][0]["path"].size() == 9);
    CHECK(j["spines"][0]["hops"].get<int>() <= log_bound(9));
    CHECK(j["frames"][1]["parent"] == 0);
}

TEST_CASE("model bundle round trip")
{
    AugmentationTree tree(HierarchyConfig{}, 17);
    std::vector<std::string> programs = csp_corpus(5, 8);
    programs.push_back(emit_fact_program(5));
    tree.train_from_traces(traces_for(programs), 4);
    auto dir = std::filesystem::temp_directory_path() / "fifth_test_bundle";
    std::filesystem::remove_all(dir);
    tree.save(dir);
    AugmentationTree back = AugmentationTree::load(dir);
    CHECK(back.seed() == 17);
    REQUIRE(back.encoders().size() == tree.encoders().size());
    for (const auto& [def, ae] : tree.encoders()) CHECK(*back.encoders().at(def) == *ae);
    CHECK(back.bridges().size() == tree.bridges().size());
    CHECK(back.memory_size() == tree.memory_size());

    auto slurp = [](const std::filesystem::path& f) {
        std::ifstream in(f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto dir2 = std::filesystem::temp_directory_path() / "fifth_test_bundle2";
    std::filesystem::remove_all(dir2);
    back.save(dir2);
    CHECK(slurp(dir / "manifest.json") == slurp(dir2 / "manifest.json"));

    auto p = load(csp_corpus(1, 99).front());
    Instance inst = Instance::instantiate(p, "main");
    inst.network().run_to_quiescence(1000);
    std::vector<BranchCandidate> cands{{inst.root_cell("x0"), 1, 0}, {inst.root_cell("x0"), 2, 0}};
    CHECK(back.scores(inst, cands, 0) == tree.scores(inst, cands, 0));

    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
    CHECK_THROWS_AS(AugmentationTree::load(dir), Error);
}
