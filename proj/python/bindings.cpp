#include "fifth/cli.hpp"
#include "fifth/error.hpp"
#include "fifth/planning.hpp"
#include "fifth/search.hpp"
#include "fifth/selftest.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace fifth;

namespace {

std::string run_text(const std::string& text, bool optimizing, std::optional<std::uint64_t> nodes,
                     std::optional<std::uint64_t> steps, std::optional<std::uint64_t> depth, bool gc)
{
    auto program = std::make_shared<const Program>(parse(text));
    Query q = make_query(*program);
    if (nodes) q.budgets.nodes = *nodes;
    if (steps) q.budgets.steps = *steps;
    if (depth) q.budgets.depth = *depth;
    UniformOracle oracle;
    SearchOptions opt;
    opt.collect_garbage = gc;
    py::gil_scoped_release release;
    SolutionSet set = optimizing ? optimize(program, q, oracle, opt) : solve(program, q, oracle, opt);
    return solution_json(set);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Native core of the fifth constraint engine";

    // Translators run last-registered first, so the base goes in first.
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<StructuralError>(m, "StructuralError", base);
    py::register_exception<ParseError>(m, "ParseError", base);

    m.def(
        "solve_json",
        [](const std::string& text, std::optional<std::uint64_t> nodes, std::optional<std::uint64_t> steps,
           std::optional<std::uint64_t> depth, bool gc) { return run_text(text, false, nodes, steps, depth, gc); },
        py::arg("text"), py::kw_only(), py::arg("nodes") = py::none(), py::arg("steps") = py::none(),
        py::arg("depth") = py::none(), py::arg("gc") = false);
    m.def(
        "optimize_json",
        [](const std::string& text, std::optional<std::uint64_t> nodes, std::optional<std::uint64_t> steps,
           std::optional<std::uint64_t> depth, bool gc) { return run_text(text, true, nodes, steps, depth, gc); },
        py::arg("text"), py::kw_only(), py::arg("nodes") = py::none(), py::arg("steps") = py::none(),
        py::arg("depth") = py::none(), py::arg("gc") = false);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = fifth::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));

    m.def("emit_queens_program", &emit_queens_program, py::arg("n"));
    m.def("emit_sendmore_program", &emit_sendmore_program);
    m.def("emit_fact_program", &emit_fact_program, py::arg("n"));
    m.def("emit_countdown_program", &emit_countdown_program, py::arg("depth"));
    m.def(
        "emit_horizon_program",
        [](int horizon, std::int64_t start, std::int64_t goal, std::vector<std::int64_t> actions, std::int64_t step_reward,
           std::int64_t goal_reward) {
            return emit_horizon_program(HorizonProblem{horizon, start, goal, std::move(actions), step_reward, goal_reward});
        },
        py::arg("horizon"), py::arg("start"), py::arg("goal"), py::arg("actions"), py::arg("step_reward") = -1,
        py::arg("goal_reward") = 10);
    m.def(
        "emit_jobshop_program",
        [](const std::string& name, int machines, std::vector<std::vector<std::pair<int, int>>> jobs) {
            return emit_jobshop_program(JobShopInstance{name, machines, std::move(jobs)});
        },
        py::arg("name"), py::arg("machines"), py::arg("jobs"));
    m.def(
        "generate_random_csp",
        [](int vars, int domain, double density, std::uint64_t seed) {
            CspInstance c = generate_random_csp(vars, domain, density, seed);
            py::list constraints;
            for (const auto& k : c.constraints) {
                const char* rel = k.relation == CspRelation::NotEqual    ? "ne"
                                  : k.relation == CspRelation::LessEqual ? "le"
                                                                         : "sum_le";
                constraints.append(py::make_tuple(rel, k.a, k.b, k.bound));
            }
            py::dict d;
            d["vars"] = c.vars;
            d["domain"] = c.domain;
            d["constraints"] = constraints;
            d["text"] = c.text;
            return d;
        },
        py::arg("vars"), py::arg("domain"), py::arg("density"), py::arg("seed"));

    m.def(
        "self_test",
        [](std::uint64_t seed) {
            py::list out;
            for (const auto& r : run_self_test(SelfTestOptions{seed, false})) out.append(py::make_tuple(r.name, r.passed, r.detail));
            return out;
        },
        py::arg("seed") = 1);
}
