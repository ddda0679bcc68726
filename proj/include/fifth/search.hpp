#pragma once

// Depth-first search over `choose` cells with copying snapshots,
// branch-and-bound optimization and query-rooted storage management.

#include "fifth/language.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fifth {

struct Budgets {
    std::uint64_t depth = 10'000;
    std::uint64_t steps = 1'000'000;
    std::uint64_t nodes = 100'000;
};

struct Query {
    std::string entry;
    std::vector<std::pair<std::string, PartialInfo>> bindings;
    std::vector<std::string> show;
    double precision = 0.0;
    Budgets budgets;
    std::optional<std::string> minimize;
};

/// The program's query form, or its entry definition showing every
/// parameter when there is none. Throws StructuralError without either.
Query make_query(const Program& program);

/// What the search may write next: `value` into `cell`, a choice made
/// inside `frame`.
struct BranchCandidate {
    CellId cell;
    std::int64_t value;
    FrameId frame;
};

/// Orders values only; never affects which solutions exist.
class BranchOracle {
public:
    virtual ~BranchOracle() = default;
    virtual std::vector<double> scores(const Instance& instance, std::span<const BranchCandidate> candidates,
                                       FrameId context) = 0;
};

class UniformOracle : public BranchOracle {
public:
    std::vector<double> scores(const Instance&, std::span<const BranchCandidate> candidates, FrameId) override
    {
        return std::vector<double>(candidates.size(), 0.0);
    }
};

/// One branching decision, addressed so it can be replayed into a fresh
/// instantiation of the same program.
struct Decision {
    std::vector<int> frame_path;
    std::string name;
    std::int64_t value;

    bool operator==(const Decision&) const = default;
};

struct Solution {
    std::vector<std::pair<std::string, PartialInfo>> cells;  // the query's show cells, in order
    std::vector<Decision> decisions;
    std::optional<PartialInfo> objective;
};

struct SearchStats {
    std::uint64_t nodes = 0;
    std::uint64_t steps = 0;
    std::uint64_t expansions = 0;
    std::uint64_t summarized = 0;
    bool complete = true;
};

struct BoundEvent {
    std::uint64_t node;
    std::int64_t incumbent;
};

struct SolutionSet {
    std::vector<Solution> solutions;
    SearchStats stats;
    std::vector<BoundEvent> bound_trace;  // incumbent improvements (optimize only)
};

/// Hooks for collecting training traces. The instance is the search node's
/// state; none of the hooks may mutate it.
class SearchObserver {
public:
    virtual ~SearchObserver() = default;
    /// A node reached quiescence without contradiction.
    virtual void on_node(const Instance&) {}
    /// A node whose propagation ended in contradiction.
    virtual void on_deadend(const Instance&) {}
    virtual void on_solution(const Instance&, const Solution&) {}
    /// After exploring the subtree below `parent` + (cell := value).
    virtual void on_branch(const Instance& /*parent*/, const BranchCandidate&, bool /*found_solution*/) {}
};

struct SearchOptions {
    bool collect_garbage = false;
    SearchObserver* observer = nullptr;
};

/// All solutions within budgets. Variables: smallest domain first, ties to
/// the lowest cell id; values by descending oracle score, ties ascending.
SolutionSet solve(std::shared_ptr<const Program> program, const Query& query, BranchOracle& oracle,
                  const SearchOptions& options = {});

/// Branch-and-bound minimization of query.minimize. Returns at most one
/// solution, proven optimal when stats.complete.
SolutionSet optimize(std::shared_ptr<const Program> program, const Query& query, BranchOracle& oracle,
                     const SearchOptions& options = {});

/// Replays the decisions into a fresh instantiation; true when it reaches
/// quiescence without contradiction and the shown cells match.
bool replay(std::shared_ptr<const Program> program, const Query& query, const Solution& solution);

/// Copy-based snapshot store.
class SnapshotStore {
public:
    using Id = std::uint64_t;
    Id snapshot(const Instance& instance);
    /// Throws StructuralError for unknown ids.
    Instance restore(Id id) const;
    void release(Id id);
    std::size_t size() const { return snapshots_.size(); }

private:
    std::map<Id, Instance> snapshots_;
    Id next_ = 0;
};

struct SummarizationReport {
    std::uint64_t frames = 0;
    std::uint64_t cells_dropped = 0;
    std::uint64_t propagators_detached = 0;
};

/// Summarize every non-root expanded frame whose boundary is decided, whose
/// subtree holds no live unexpanded frame and whose propagators can no
/// longer act (all their cells decided or their gate closed).
SummarizationReport collect_garbage(Instance& instance);

/// {"solutions":[{"cells":{...}}],"stats":{...}}; exact integers become
/// JSON numbers, everything else its rendering.
std::string solution_json(const SolutionSet& set);

}  // namespace fifth
