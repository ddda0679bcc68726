#include "fifth/planning.hpp"
#include "fifth/rng.hpp"
#include "fifth/search.hpp"

#include "oracles/brute.hpp"

#include <doctest.h>

#include <map>
#include <stdexcept>

using namespace fifth;

namespace {

std::shared_ptr<const Program> load(const std::string& text)
{
    return std::make_shared<const Program>(parse(text));
}

std::int64_t int_of(const PartialInfo& p)
{
    REQUIRE(p.is_exact());
    return *p.as<Exact>().value.integral();
}

std::int64_t shown(const Solution& s, const std::string& name)
{
    for (const auto& [n, v] : s.cells)
        if (n == name) return int_of(v);
    FAIL("no shown cell " << name);
    return 0;
}

SolutionSet run_optimize(const std::string& text)
{
    auto p = load(text);
    UniformOracle u;
    return optimize(p, make_query(*p), u);
}

// Best total reward is the negated optimum.
std::int64_t plan_reward(const HorizonProblem& h)
{
    auto best = run_optimize(emit_horizon_program(h));
    CHECK(best.stats.complete);
    REQUIRE(best.solutions.size() == 1);
    return -shown(best.solutions[0], "result");
}

std::int64_t makespan(const JobShopInstance& js)
{
    auto best = run_optimize(emit_jobshop_program(js));
    CHECK(best.stats.complete);
    REQUIRE(best.solutions.size() == 1);
    return shown(best.solutions[0], "makespan");
}

std::size_t count_of(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_CASE("emit_horizon_program examples")
{
    HorizonProblem one{1, 0, 5, {1}, -1, 10};
    auto text = emit_horizon_program(one);
    CHECK(count_of(text, "(call ") == 1);
    auto best = run_optimize(text);
    REQUIRE(best.solutions.size() == 1);
    CHECK(best.stats.expansions == 1);
    CHECK(shown(best.solutions[0], "result") == 1);

    HorizonProblem line{4, 0, 3, {-1, 1}, -1, 10};
    CHECK(oracle::line_world_best(line) == 6);
    CHECK(plan_reward(line) == 6);
    auto p = load(emit_horizon_program(line));
    UniformOracle u;
    auto plan = optimize(p, make_query(*p), u);
    REQUIRE(plan.solutions.size() == 1);
    // The first three moves are forced to +1; the fourth is either.
    std::map<std::size_t, std::int64_t> by_depth;
    for (const auto& d : plan.solutions[0].decisions)
        if (d.name == "a") by_depth[d.frame_path.size()] = d.value;
    REQUIRE(by_depth.size() == 4);
    CHECK(by_depth[0] == 1);
    CHECK(by_depth[1] == 1);
    CHECK(by_depth[2] == 1);

    CHECK_THROWS_AS(emit_horizon_program(HorizonProblem{0, 0, 3, {-1, 1}, -1, 10}), std::invalid_argument);
    CHECK_THROWS_AS(emit_horizon_program(HorizonProblem{2, 0, 3, {}, -1, 10}), std::invalid_argument);
}

TEST_CASE("emit_jobshop_program examples")
{
    CHECK(makespan(JobShopInstance{"one", 1, {{{0, 5}}}}) == 5);
    CHECK(makespan(JobShopInstance{"two", 1, {{{0, 3}}, {{0, 4}}}}) == 7);
    auto js = jobshop_3x3_a();
    CHECK(makespan(js) == oracle::jobshop_optimum(js));

    CHECK_THROWS_AS(emit_jobshop_program(JobShopInstance{"bad", 1, {{{0, 0}}}}), std::invalid_argument);
    CHECK_THROWS_AS(emit_jobshop_program(JobShopInstance{"bad", 1, {{{1, 2}}}}), std::invalid_argument);
    CHECK_THROWS_AS(emit_jobshop_program(JobShopInstance{"bad", 2, {{{0, 2}, {0, 3}}}}), std::invalid_argument);
    CHECK_THROWS_AS(emit_jobshop_program(JobShopInstance{"bad", 2, {}}), std::invalid_argument);
}

TEST_CASE("generate_random_csp examples")
{
    CHECK(generate_random_csp(5, 4, 0.5, 9).text == generate_random_csp(5, 4, 0.5, 9).text);
    CHECK(generate_random_csp(5, 4, 0.5, 9).text != generate_random_csp(5, 4, 0.5, 10).text);

    auto free = generate_random_csp(3, 2, 0.0, 1);
    CHECK(free.constraints.empty());
    auto p = load(free.text);
    UniformOracle u;
    CHECK(solve(p, make_query(*p), u).solutions.size() == 8);

    SplitMix64 rng(31);
    for (int i = 0; i < 50; ++i) {
        auto csp = generate_random_csp(6, 4, 0.4, rng.next());
        auto q = load(csp.text);
        auto got = solve(q, make_query(*q), u);
        CHECK(got.stats.complete);
        CHECK(got.solutions.size() == oracle::csp(csp).size());
    }

    CHECK_THROWS_AS(generate_random_csp(11, 4, 0.4, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_random_csp(4, 7, 0.4, 1), std::invalid_argument);
}

TEST_CASE("property: horizon programs are temporally local")
{
    for (int h : {1, 2, 3, 5}) {
        HorizonProblem prob{h, 0, 2, {-1, 0, 1}, -1, 10};
        auto p = load(emit_horizon_program(prob));
        REQUIRE(p->definitions.size() == 1);
        Query q = make_query(*p);
        Instance inst = Instance::instantiate(p, q.entry, q.bindings);
        Targets t{{inst.root_cell("result")}, 0.0};
        demand_loop(inst, t, DemandOptions{});
        std::map<CellId, int> depth_of;
        for (const auto& f : inst.frames())
            for (const auto& [name, c] : f.cells) depth_of.emplace(c, f.depth);
        for (const auto& f : inst.frames()) {
            for (PropId pid : f.propagators) {
                for (CellId c : inst.network().propagator(pid).cells) {
                    REQUIRE(depth_of.count(c));
                    CHECK(std::abs(depth_of[c] - f.depth) <= 1);
                }
            }
        }
    }
}

TEST_CASE("property: horizon plans match brute force")
{
    SplitMix64 rng(8);
    for (int i = 0; i < 12; ++i) {
        HorizonProblem prob;
        prob.horizon = static_cast<int>(rng.uniform_int(1, 6));
        prob.start = rng.uniform_int(-2, 2);
        prob.goal = rng.uniform_int(-4, 4);
        prob.actions = rng.bernoulli(0.5) ? std::vector<std::int64_t>{-1, 1} : std::vector<std::int64_t>{-1, 0, 2};
        prob.goal_reward = rng.uniform_int(1, 12);
        INFO("H=" << prob.horizon << " start=" << prob.start << " goal=" << prob.goal);
        CHECK(plan_reward(prob) == oracle::line_world_best(prob));
    }
}

TEST_CASE("property: schedules respect precedence and machine exclusion")
{
    SplitMix64 rng(19);
    std::vector<JobShopInstance> cases{jobshop_3x3_a()};
    for (int i = 0; i < 5; ++i) {
        JobShopInstance js{"random", 2, {}};
        for (int j = 0; j < 3; ++j) {
            bool flip = rng.bernoulli(0.5);
            std::vector<std::pair<int, int>> ops{{flip ? 1 : 0, static_cast<int>(rng.uniform_int(1, 4))},
                                                 {flip ? 0 : 1, static_cast<int>(rng.uniform_int(1, 4))}};
            js.jobs.push_back(ops);
        }
        cases.push_back(js);
    }
    for (const auto& js : cases) {
        auto best = run_optimize(emit_jobshop_program(js));
        REQUIRE(best.solutions.size() == 1);
        const Solution& s = best.solutions[0];
        std::int64_t span = shown(s, "makespan");
        CHECK(span == oracle::jobshop_optimum(js));
        struct Slot {
            int machine;
            std::int64_t start, end;
        };
        std::vector<Slot> slots;
        for (std::size_t j = 0; j < js.jobs.size(); ++j) {
            std::int64_t prev_end = 0;
            for (std::size_t k = 0; k < js.jobs[j].size(); ++k) {
                std::int64_t st = shown(s, "s" + std::to_string(j) + "_" + std::to_string(k));
                CHECK(st >= prev_end);
                prev_end = st + js.jobs[j][k].second;
                slots.push_back({js.jobs[j][k].first, st, prev_end});
            }
            CHECK(prev_end <= span);
        }
        for (std::size_t a = 0; a < slots.size(); ++a)
            for (std::size_t b = a + 1; b < slots.size(); ++b)
                if (slots[a].machine == slots[b].machine)
                    CHECK((slots[a].end <= slots[b].start || slots[b].end <= slots[a].start));
        auto p = load(emit_jobshop_program(js));
        CHECK(replay(p, make_query(*p), s));
    }
}

TEST_CASE("emitted benchmark programs parse and solve")
{
    UniformOracle u;
    for (const auto& text : {emit_queens_program(5), emit_sendmore_program(), emit_fact_program(5), emit_countdown_program(6)}) {
        auto p = load(text);
        auto set = solve(p, make_query(*p), u);
        CHECK(set.stats.complete);
        CHECK_FALSE(set.solutions.empty());
    }
    auto c = load(emit_countdown_program(6));
    auto set = solve(c, make_query(*c), u);
    CHECK(set.stats.expansions == 5);
    CHECK_THROWS_AS(emit_countdown_program(0), std::invalid_argument);
    CHECK_THROWS_AS(emit_queens_program(0), std::invalid_argument);
}
