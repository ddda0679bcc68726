#pragma once

// Randomized law checks shared by `fifth check --self-test`, the property
// tests and the acceptance suite.

#include "fifth/network.hpp"
#include "fifth/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fifth {

/// Random lattice value. Reals are drawn from a quarter-unit grid so the
/// equality tolerance never decides a comparison.
PartialInfo random_info(SplitMix64& rng, bool allow_contradiction = true);

/// A value at least as informative as `a`.
PartialInfo random_refinement(SplitMix64& rng, const PartialInfo& a);

struct LawReport {
    std::size_t checked = 0;
    std::size_t failures = 0;
    std::string first_failure;
};

/// Idempotence, commutativity, associativity and the upper-bound property
/// of merge over `triples` random triples.
LawReport check_lattice_laws(std::size_t triples, std::uint64_t seed);

/// Every catalog transfer function is monotone over `trials` random
/// input refinements per kind.
LawReport check_transfer_monotonicity(std::size_t trials, std::uint64_t seed);

struct RandomNetworkSpec {
    std::size_t max_cells = 40;
    std::size_t max_propagators = 60;
};

struct NetworkRecipe {
    struct Prop {
        PropKind kind;
        std::vector<CellId> cells;
        PartialInfo payload;
        std::vector<Guard> guards;
    };
    std::size_t cells = 0;
    std::vector<Prop> props;
    std::vector<std::pair<CellId, PartialInfo>> writes;

    Network build() const;
};

NetworkRecipe random_network(SplitMix64& rng, const RandomNetworkSpec& spec = {});

/// Runs each random network under FIFO and under `permutations` random
/// dequeue orders and compares the quiescent contents.
LawReport check_confluence(std::size_t networks, std::size_t permutations, std::uint64_t seed);

struct SuiteResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SelfTestOptions {
    std::uint64_t seed = 1;
    bool inject_merge_fault = false;
};

std::vector<SuiteResult> run_self_test(const SelfTestOptions& options);

}  // namespace fifth
