#pragma once

// Autoencoders attached along the frame tree: per-definition frame encoders
// with shared weights, bridge encoders between adjacent frames, a spine tree
// over each recursion path, a success/deadend memory and the learned
// branch oracle built on it.

#include "fifth/autoenc.hpp"
#include "fifth/search.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fifth {

inline constexpr int kFeatureCount = 16;
inline constexpr int kFeatureSchema = 1;
inline constexpr int kBoundarySlots = 3;
inline constexpr double kReferenceWidth = 1024.0;

/// 3 boundary slots of [decided, info_bits/64, lo, hi, contradiction], then
/// depth/1024 clamped to 1. Bounds are squashed by sign(x) log2(1+|x|)/63.
/// Boundary cells past the second share the third slot by mean.
Vec featurize(const Instance& instance, FrameId frame);

/// Features as if `cell` held merge(content, refinement); the network is not
/// touched. Cells outside the frame's boundary leave the features unchanged.
Vec featurize_with(const Instance& instance, FrameId frame, CellId cell, const PartialInfo& refinement);

/// Balanced binary tree over the frames of one recursion path, keyed by
/// depth index. Leaves form a forest of perfect subtrees (a binary counter);
/// the root folds the forest from the smallest tree up. Appending a leaf
/// merges equal-height trees, so structural change is O(1) amortized and the
/// height stays within ceil(log2 d) + 1.
class SpineTree {
public:
    struct Node {
        int left = -1;
        int right = -1;
        int parent = -1;
        int leaf = -1;  // depth index for leaves
        int height = 0;
    };

    void push();
    std::size_t size() const { return leaf_nodes_.size(); }
    /// -1 while empty.
    int root() const;
    int height() const;
    /// Edges from the leaf to the root: the bridge applications on its path.
    int hops(std::size_t leaf) const;
    const std::vector<Node>& nodes() const { return nodes_; }
    int leaf_node(std::size_t leaf) const { return leaf_nodes_.at(leaf); }
    /// Nodes created or relinked so far, for the amortized-cost audit.
    std::uint64_t structural_changes() const { return changes_; }

private:
    void refold();

    std::vector<Node> nodes_;  // perfect-subtree nodes first, fold nodes after perfect_
    std::size_t perfect_ = 0;
    std::vector<int> forest_;  // perfect subtree roots, tallest first
    std::vector<int> leaf_nodes_;
    std::uint64_t changes_ = 0;
};

enum class Outcome { Success, Deadend };

struct MemoryEntry {
    Vec code;
    Outcome label;
};

struct ComposedPath {
    Vec code;
    int hops = 0;
    int frames = 0;
};

struct HierarchyConfig {
    int code = 8;
    int hidden = 24;
    double learning_rate = 0.01;
    double sparsity = 0.05;
    double decay = 1e-4;
    double prune = 0.05;
    int epochs = 30;
    std::size_t memory_limit = 2048;  // per definition and label
};

/// Featurized observations gathered from solver runs.
struct TraceSet {
    struct Sample {
        std::string definition;
        Vec features;
    };
    struct Labeled {
        std::string definition;
        Vec features;
        Outcome label;
    };
    struct Pair {
        std::string parent, child;
        Vec parent_features, child_features;
    };
    struct Path {
        std::string definition;  // of the leaf
        std::vector<std::pair<std::string, Vec>> frames;  // root first
    };
    std::vector<Sample> states;
    std::vector<Labeled> outcomes;
    std::vector<Pair> pairs;
    std::vector<Path> paths;

    bool empty() const { return states.empty() && outcomes.empty(); }
};

/// SearchObserver that featurizes frame states as the search runs.
/// Success: candidate refinements below which a solution was found and
/// frames of solution states. Deadend: refinements whose subtree failed and
/// frames holding a contradicted cell.
class TraceCollector : public SearchObserver {
public:
    explicit TraceCollector(TraceSet& out) : out_(out) {}
    void on_node(const Instance& instance) override;
    void on_deadend(const Instance& instance) override;
    void on_solution(const Instance& instance, const Solution& solution) override;
    void on_branch(const Instance& parent, const BranchCandidate& candidate, bool found) override;

private:
    TraceSet& out_;
};

struct EncoderReport {
    std::string name;
    std::size_t samples = 0;
    std::size_t batches = 0;
    double initial_loss = 0;
    double final_loss = 0;
    int effective_dim = 0;
};

struct HierarchyReport {
    std::vector<EncoderReport> encoders;
    std::vector<EncoderReport> bridges;
    std::vector<EncoderReport> spines;
    std::size_t batches = 0;
    std::size_t success_codes = 0;
    std::size_t deadend_codes = 0;
};

class AugmentationTree {
public:
    explicit AugmentationTree(HierarchyConfig config = {}, std::uint64_t seed = 0);

    const HierarchyConfig& config() const { return config_; }
    std::uint64_t seed() const { return seed_; }

    /// The definition's shared frame encoder, created from the seed on first
    /// use. Every frame of the definition gets the same object.
    std::shared_ptr<Autoencoder> encoder(const std::string& definition);
    std::shared_ptr<const Autoencoder> find_encoder(const std::string& definition) const;
    std::shared_ptr<Autoencoder> bridge(const std::string& parent, const std::string& child);
    std::shared_ptr<Autoencoder> spine_bridge(const std::string& definition);

    /// Creates encoders for every frame already expanded and for each frame
    /// as it expands later. The listener keeps a pointer to this tree.
    void attach(Instance& instance);

    /// Encodes the frame's current features and stores the code.
    Vec encode_frame(const Instance& instance, FrameId frame);
    const std::map<FrameId, Vec>& codes() const { return codes_; }
    void clear_codes() { codes_.clear(); }

    /// Bridge code of a frame and its parent: bridge(concat(parent, child)).
    Vec pair_code(const Instance& instance, FrameId child);

    /// Folds the codes of the root-to-leaf path through the spine tree.
    ComposedPath compose_path(const Instance& instance, FrameId leaf);

    /// Distance between stored codes over the units both encoders keep
    /// active. Encodes frames that have no stored code yet.
    double similarity(const Instance& instance, FrameId a, FrameId b);

    void record_outcome(const std::string& definition, const Vec& code, Outcome label);
    const std::map<std::string, std::vector<MemoryEntry>>& memory() const { return memory_; }
    std::size_t memory_size() const;

    /// Trains frame encoders on all observed states, then bridges on
    /// adjacent-frame codes, then rebuilds the memory from the labeled
    /// outcomes. No-op on an empty trace set.
    HierarchyReport train_from_traces(const TraceSet& traces, std::uint64_t seed);

    /// Memory-based preference: distance to the nearest deadend code minus
    /// distance to the nearest success code. Zero without memory.
    std::vector<double> scores(const Instance& instance, std::span<const BranchCandidate> candidates,
                               FrameId context) const;

    /// Frame tree plus the spine tree over every leaf path, as JSON text.
    std::string dump_structure(const Instance& instance) const;

    /// Directory of checkpoints plus manifest.json.
    void save(const std::filesystem::path& dir) const;
    static AugmentationTree load(const std::filesystem::path& dir);

    const std::map<std::string, std::shared_ptr<Autoencoder>>& encoders() const { return encoders_; }
    const std::map<std::pair<std::string, std::string>, std::shared_ptr<Autoencoder>>& bridges() const
    {
        return bridges_;
    }
    const std::map<std::string, std::shared_ptr<Autoencoder>>& spines() const { return spines_; }

private:
    AutoencoderConfig encoder_config(int inputs) const;
    std::uint64_t derive_seed(const std::string& key) const;
    Vec code_of(const Instance& instance, FrameId frame);

    HierarchyConfig config_;
    std::uint64_t seed_;
    std::map<std::string, std::shared_ptr<Autoencoder>> encoders_;
    std::map<std::pair<std::string, std::string>, std::shared_ptr<Autoencoder>> bridges_;
    std::map<std::string, std::shared_ptr<Autoencoder>> spines_;
    std::map<FrameId, Vec> codes_;
    std::map<std::string, std::vector<MemoryEntry>> memory_;
};

/// BranchOracle backed by a tree's memory.
class LearnedOracle : public BranchOracle {
public:
    explicit LearnedOracle(const AugmentationTree& tree) : tree_(tree) {}
    std::vector<double> scores(const Instance& instance, std::span<const BranchCandidate> candidates,
                               FrameId context) override
    {
        return tree_.scores(instance, candidates, context);
    }

private:
    const AugmentationTree& tree_;
};

/// Root-to-frame chain of frame ids.
std::vector<FrameId> path_to(const Instance& instance, FrameId frame);

}  // namespace fifth
