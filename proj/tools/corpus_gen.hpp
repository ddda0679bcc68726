#pragma once

// The benchmark corpus: program text plus independently computed expected
// answers. Expected answers come from the brute-force oracles, never from
// the engine.

#include "fifth/planning.hpp"
#include "oracles/brute.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace corpus {

struct Entry {
    std::string path;  // relative, without extension
    std::string program;
    nlohmann::json expected;
};

inline nlohmann::json all_solutions(const std::vector<std::string>& show, const std::vector<std::vector<std::int64_t>>& rows)
{
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    return {{"kind", "solve"}, {"show", show}, {"count", sorted.size()}, {"solutions", sorted}};
}

inline nlohmann::json optimum(const std::string& cell, std::int64_t value)
{
    return {{"kind", "optimize"}, {"objective_cell", cell}, {"objective", value}};
}

// One key per line and one solution row per line, so diffs stay readable.
inline std::string render_expected(const nlohmann::json& e)
{
    std::string out = "{";
    bool first = true;
    for (const auto& [key, value] : e.items()) {
        out += first ? "\n" : ",\n";
        first = false;
        out += "  " + nlohmann::json(key).dump() + ": ";
        if (key == "solutions") {
            out += "[";
            for (std::size_t i = 0; i < value.size(); ++i) out += (i ? ",\n    " : "\n    ") + value[i].dump();
            out += value.empty() ? "]" : "\n  ]";
        } else {
            out += value.dump();
        }
    }
    return out + "\n}\n";
}

inline std::vector<std::string> names(const std::string& prefix, int n, int first)
{
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(first + i));
    return out;
}

// Seeds and sizes of the random CSP splits.
inline fifth::CspInstance corpus_csp(std::uint64_t seed)
{
    int vars = 6 + static_cast<int>(seed % 3);
    int domain = 4 + static_cast<int>(seed % 2);
    return fifth::generate_random_csp(vars, domain, 0.6, seed);
}

inline constexpr std::uint64_t kTrainSeed = 100;
inline constexpr std::uint64_t kEvalSeed = 500;
inline constexpr int kTrainCount = 30;
inline constexpr int kEvalCount = 20;

inline fifth::HorizonProblem line4() { return {4, 0, 3, {-1, 1}, -1, 10}; }

inline std::vector<Entry> build()
{
    std::vector<Entry> out;
    for (int n : {4, 5, 6, 8}) {
        std::vector<std::vector<std::int64_t>> rows;
        for (const auto& q : oracle::queens(n)) rows.emplace_back(q.begin(), q.end());
        out.push_back({"queens/q" + std::to_string(n), fifth::emit_queens_program(n),
                       all_solutions(names("q", n, 1), rows)});
    }
    {
        std::vector<std::vector<std::int64_t>> rows;
        for (const auto& s : oracle::sendmore()) rows.emplace_back(s.begin(), s.end());
        out.push_back({"crypt/sendmore", fifth::emit_sendmore_program(),
                       all_solutions({"S", "E", "N", "D", "M", "O", "R", "Y"}, rows)});
    }
    for (int n : {0, 6, 10}) {
        std::int64_t f = 1;
        for (int i = 2; i <= n; ++i) f *= i;
        auto e = all_solutions({"r"}, {{f}});
        e["expansions"] = n;
        out.push_back({"fact/fact" + std::to_string(n), fifth::emit_fact_program(n), e});
    }
    {
        auto p = line4();
        auto e = optimum("result", -oracle::line_world_best(p));
        e["reward"] = oracle::line_world_best(p);
        out.push_back({"horizon/line4", fifth::emit_horizon_program(p), e});
    }
    for (const auto& js : {fifth::jobshop_3x3_a(), fifth::JobShopInstance{"js-1x1", 1, {{{0, 5}}}},
                           fifth::JobShopInstance{"js-2x1", 1, {{{0, 3}}, {{0, 4}}}}})
        out.push_back({"jobshop/" + js.name, fifth::emit_jobshop_program(js),
                       optimum("makespan", oracle::jobshop_optimum(js))});
    auto csp_split = [&](const std::string& dir, std::uint64_t first, int count) {
        for (int i = 0; i < count; ++i) {
            std::uint64_t seed = first + static_cast<std::uint64_t>(i);
            auto c = corpus_csp(seed);
            std::vector<std::vector<std::int64_t>> rows;
            for (const auto& x : oracle::csp(c)) rows.emplace_back(x.begin(), x.end());
            auto e = all_solutions(names("x", c.vars, 0), rows);
            e["seed"] = seed;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%03d", i);
            out.push_back({dir + "/csp-" + buf, c.text, e});
        }
    };
    csp_split("csp/train", kTrainSeed, kTrainCount);
    csp_split("csp/eval", kEvalSeed, kEvalCount);
    return out;
}

}  // namespace corpus
