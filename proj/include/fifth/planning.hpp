#pragma once

// Emitters for planning, scheduling and benchmark programs in the
// constraint language.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fifth {

/// Deterministic line world: the state is a position, each step moves by
/// one of `actions`, every step earns `step_reward` and landing on `goal`
/// earns `goal_reward` on top.
struct HorizonProblem {
    int horizon = 1;
    std::int64_t start = 0;
    std::int64_t goal = 0;
    std::vector<std::int64_t> actions{-1, 1};
    std::int64_t step_reward = -1;
    std::int64_t goal_reward = 10;
};

/// One recursive definition `step(t s cost result)` whose call is gated on
/// t < H. `cost` accumulates negated reward; the query minimizes `result`,
/// so the best total reward is -result. Throws std::invalid_argument for
/// H < 1 or an empty action set.
std::string emit_horizon_program(const HorizonProblem& problem);

struct JobShopInstance {
    std::string name;
    int machines = 1;
    std::vector<std::vector<std::pair<int, int>>> jobs;  // per job: (machine, duration) in order
};

/// Sum of all durations: every feasible optimal schedule fits below it.
std::int64_t horizon_bound(const JobShopInstance& instance);

/// Start cells `s<j>_<k>` typed [0, bound], precedence via sum + lesseq,
/// pairwise machine exclusion via a 0/1 choice per pair, makespan via a
/// lesseq from each job's last end. Shows makespan and all starts; minimizes
/// makespan. Throws std::invalid_argument on invalid instances.
std::string emit_jobshop_program(const JobShopInstance& instance);

/// The fixed 3x3 corpus instance.
JobShopInstance jobshop_3x3_a();

enum class CspRelation { NotEqual, LessEqual, SumAtMost };

struct CspConstraint {
    CspRelation relation;
    int a;
    int b;
    int bound = 0;  // SumAtMost: x_a + x_b <= bound
};

struct CspInstance {
    int vars = 0;
    int domain = 0;
    std::vector<CspConstraint> constraints;
    std::string text;
};

/// Each variable pair is constrained with probability `density`; the
/// relation and bound come from `seed`. Throws std::invalid_argument for
/// vars > 10 or domain > 6.
CspInstance generate_random_csp(int vars, int domain, double density, std::uint64_t seed);

/// n-queens with one `choose` per column and alldiff over rows and both
/// diagonals. Shows q1..qn.
std::string emit_queens_program(int n);

/// SEND + MORE = MONEY with column carries. Shows the eight letters.
std::string emit_sendmore_program();

/// n! by gated recursion, queried at `n`.
std::string emit_fact_program(int n);

/// A chain of `depth` frames: countdown(k) recurses while k != 0.
std::string emit_countdown_program(int depth);

}  // namespace fifth
