#include "fifth/hierarchy.hpp"

#include "fifth/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace fifth {

namespace {

constexpr int kSlotWidth = 5;

double squash(long double x)
{
    if (std::isinf(x)) return x > 0 ? 1.0 : -1.0;
    double m = std::log2(1.0 + std::fabs(static_cast<double>(x))) / 63.0;
    return std::clamp(x < 0 ? -m : m, -1.0, 1.0);
}

void slot_features(const PartialInfo& p, double* out)
{
    out[0] = p.is_exact() ? 1.0 : 0.0;
    out[1] = info_bits(p, kReferenceWidth) / 64.0;
    if (auto b = bounds_of(p)) {
        out[2] = squash(b->lo);
        out[3] = squash(b->hi);
    } else {
        out[2] = out[3] = 0.0;
    }
    out[4] = p.is_contradiction() ? 1.0 : 0.0;
}

Vec featurize_impl(const Instance& inst, FrameId id, const std::optional<std::pair<CellId, PartialInfo>>& override_)
{
    const Frame& f = inst.frame(id);
    const Network& net = inst.network();
    Vec v = Vec::Zero(kFeatureCount);
    const std::size_t n = f.boundary.size();
    const std::size_t tail = static_cast<std::size_t>(kBoundarySlots - 1);
    double slot[kSlotWidth];
    for (std::size_t i = 0; i < n; ++i) {
        CellId c = f.boundary[i];
        PartialInfo p = net.content(c);
        if (override_ && override_->first == c) p = merge(p, override_->second);
        slot_features(p, slot);
        std::size_t s = std::min(i, tail);
        double weight = i < tail ? 1.0 : 1.0 / static_cast<double>(n - tail);
        for (int k = 0; k < kSlotWidth; ++k) v[static_cast<Eigen::Index>(s * kSlotWidth + k)] += weight * slot[k];
    }
    v[kFeatureCount - 1] = std::min(1.0, f.depth / 1024.0);
    return v;
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

Vec concat(const Vec& a, const Vec& b)
{
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

// Squared distance over the units set in `mask`.
double masked_distance(const Vec& a, const Vec& b, const std::vector<char>& mask)
{
    double s = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (mask[static_cast<std::size_t>(i)]) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Columns in first-seen order with exact duplicates removed, then at most
// `limit` of them chosen by a seeded shuffle.
Mat distinct_columns(const std::vector<Vec>& cols, std::size_t limit, std::uint64_t seed)
{
    std::set<std::vector<double>> seen;
    std::vector<const Vec*> keep;
    for (const auto& c : cols)
        if (seen.insert(std::vector<double>(c.data(), c.data() + c.size())).second) keep.push_back(&c);
    if (keep.size() > limit) {
        SplitMix64 rng(seed);
        rng.shuffle(keep);
        keep.resize(limit);
    }
    Mat m(keep.empty() ? 0 : keep.front()->size(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = *keep[i];
    return m;
}

constexpr std::size_t kTrainingLimit = 4096;

EncoderReport fit(Autoencoder& ae, const std::string& name, const Mat& data, int epochs, std::uint64_t seed)
{
    EncoderReport r;
    r.name = name;
    r.samples = static_cast<std::size_t>(data.cols());
    TrainReport t = train(ae, data, TrainOptions{epochs, seed, true});
    r.batches = t.batches;
    r.initial_loss = t.initial_loss;
    r.final_loss = t.trace.empty() ? t.initial_loss : t.trace.back();
    r.effective_dim = ae.effective_dim(data);
    return r;
}

std::vector<CellId> contradicted_cells(const Network& net)
{
    std::vector<CellId> out;
    for (CellId c = 0; c < net.cell_count(); ++c)
        if (!net.cell(c).dropped && net.content(c).is_contradiction()) out.push_back(c);
    return out;
}

}  // namespace

Vec featurize(const Instance& instance, FrameId frame)
{
    return featurize_impl(instance, frame, std::nullopt);
}

Vec featurize_with(const Instance& instance, FrameId frame, CellId cell, const PartialInfo& refinement)
{
    return featurize_impl(instance, frame, std::make_pair(cell, refinement));
}

std::vector<FrameId> path_to(const Instance& instance, FrameId frame)
{
    std::vector<FrameId> path;
    for (std::optional<FrameId> f = frame; f; f = instance.frame(*f).parent) path.push_back(*f);
    std::reverse(path.begin(), path.end());
    return path;
}

// ---------------------------------------------------------------- spine tree

void SpineTree::push()
{
    nodes_.resize(perfect_);
    for (int r : forest_) nodes_[static_cast<std::size_t>(r)].parent = -1;

    Node leaf;
    leaf.leaf = static_cast<int>(leaf_nodes_.size());
    nodes_.push_back(leaf);
    int id = static_cast<int>(perfect_++);
    leaf_nodes_.push_back(id);
    forest_.push_back(id);
    ++changes_;
    while (forest_.size() >= 2) {
        int b = forest_.back();
        int a = forest_[forest_.size() - 2];
        if (nodes_[static_cast<std::size_t>(a)].height != nodes_[static_cast<std::size_t>(b)].height) break;
        Node up;
        up.left = a;
        up.right = b;
        up.height = nodes_[static_cast<std::size_t>(a)].height + 1;
        nodes_.push_back(up);
        int u = static_cast<int>(perfect_++);
        nodes_[static_cast<std::size_t>(a)].parent = u;
        nodes_[static_cast<std::size_t>(b)].parent = u;
        forest_.pop_back();
        forest_.back() = u;
        ++changes_;
    }
    refold();
}

void SpineTree::refold()
{
    if (forest_.size() < 2) return;
    int cur = forest_.back();
    for (std::size_t i = forest_.size() - 1; i-- > 0;) {
        Node up;
        up.left = forest_[i];
        up.right = cur;
        up.height = std::max(nodes_[static_cast<std::size_t>(forest_[i])].height,
                             nodes_[static_cast<std::size_t>(cur)].height) +
                    1;
        nodes_.push_back(up);
        int u = static_cast<int>(nodes_.size() - 1);
        nodes_[static_cast<std::size_t>(forest_[i])].parent = u;
        nodes_[static_cast<std::size_t>(cur)].parent = u;
        cur = u;
    }
}

int SpineTree::root() const
{
    if (forest_.empty()) return -1;
    if (forest_.size() == 1) return forest_.front();
    return static_cast<int>(nodes_.size() - 1);
}

int SpineTree::height() const
{
    int r = root();
    return r < 0 ? 0 : nodes_[static_cast<std::size_t>(r)].height;
}

int SpineTree::hops(std::size_t leaf) const
{
    int h = 0;
    for (int n = nodes_[static_cast<std::size_t>(leaf_nodes_.at(leaf))].parent; n >= 0;
         n = nodes_[static_cast<std::size_t>(n)].parent)
        ++h;
    return h;
}

// ---------------------------------------------------------------- collection

void TraceCollector::on_node(const Instance& inst)
{
    for (const Frame& f : inst.frames()) {
        if (f.state != ExpansionState::Expanded) continue;
        Vec feats = featurize(inst, f.id);
        out_.states.push_back({f.definition, feats});
        if (f.parent)
            out_.pairs.push_back({inst.frame(*f.parent).definition, f.definition, featurize(inst, *f.parent), feats});
        bool leaf = std::none_of(f.children.begin(), f.children.end(), [&](FrameId c) {
            return inst.frame(c).state == ExpansionState::Expanded;
        });
        if (leaf && f.depth > 0) {
            TraceSet::Path path{f.definition, {}};
            for (FrameId p : path_to(inst, f.id)) path.frames.emplace_back(inst.frame(p).definition, featurize(inst, p));
            out_.paths.push_back(std::move(path));
        }
    }
}

void TraceCollector::on_deadend(const Instance& inst)
{
    std::set<FrameId> frames;
    for (CellId c : contradicted_cells(inst.network())) {
        FrameId f = inst.network().cell(c).origin.frame;
        if (f != kNoFrame && frames.insert(f).second)
            out_.outcomes.push_back({inst.frame(f).definition, featurize(inst, f), Outcome::Deadend});
    }
}

void TraceCollector::on_solution(const Instance& inst, const Solution&)
{
    for (const Frame& f : inst.frames())
        if (f.state == ExpansionState::Expanded)
            out_.outcomes.push_back({f.definition, featurize(inst, f.id), Outcome::Success});
}

void TraceCollector::on_branch(const Instance& parent, const BranchCandidate& c, bool found)
{
    out_.outcomes.push_back({parent.frame(c.frame).definition,
                             featurize_with(parent, c.frame, c.cell, PartialInfo::exact(c.value)),
                             found ? Outcome::Success : Outcome::Deadend});
}

// ---------------------------------------------------------------- tree

AugmentationTree::AugmentationTree(HierarchyConfig config, std::uint64_t seed) : config_(config), seed_(seed) {}

AutoencoderConfig AugmentationTree::encoder_config(int inputs) const
{
    AutoencoderConfig c;
    c.inputs = inputs;
    c.hidden = config_.hidden;
    c.code = config_.code;
    c.learning_rate = config_.learning_rate;
    c.sparsity = config_.sparsity;
    c.decay = config_.decay;
    c.prune = config_.prune;
    return c;
}

std::uint64_t AugmentationTree::derive_seed(const std::string& key) const
{
    return SplitMix64(seed_ ^ fnv1a(key)).next();
}

std::shared_ptr<Autoencoder> AugmentationTree::encoder(const std::string& def)
{
    auto& slot = encoders_[def];
    if (!slot) slot = std::make_shared<Autoencoder>(encoder_config(kFeatureCount), derive_seed("frame:" + def));
    return slot;
}

std::shared_ptr<const Autoencoder> AugmentationTree::find_encoder(const std::string& def) const
{
    auto it = encoders_.find(def);
    return it == encoders_.end() ? nullptr : it->second;
}

std::shared_ptr<Autoencoder> AugmentationTree::bridge(const std::string& parent, const std::string& child)
{
    auto& slot = bridges_[{parent, child}];
    if (!slot)
        slot = std::make_shared<Autoencoder>(encoder_config(2 * config_.code), derive_seed("bridge:" + parent + "/" + child));
    return slot;
}

std::shared_ptr<Autoencoder> AugmentationTree::spine_bridge(const std::string& def)
{
    auto& slot = spines_[def];
    if (!slot) slot = std::make_shared<Autoencoder>(encoder_config(2 * config_.code), derive_seed("spine:" + def));
    return slot;
}

void AugmentationTree::attach(Instance& instance)
{
    for (const Frame& f : instance.frames())
        if (f.state != ExpansionState::Unexpanded) encoder(f.definition);
    instance.set_expansion_listener([this](const Instance& inst, FrameId f) { encoder(inst.frame(f).definition); });
}

Vec AugmentationTree::encode_frame(const Instance& instance, FrameId frame)
{
    Vec code = encoder(instance.frame(frame).definition)->encode(featurize(instance, frame));
    codes_[frame] = code;
    return code;
}

Vec AugmentationTree::code_of(const Instance& instance, FrameId frame)
{
    if (instance.frame(frame).state == ExpansionState::Summarized) {
        auto it = codes_.find(frame);
        if (it != codes_.end()) return it->second;
    }
    return encode_frame(instance, frame);
}

Vec AugmentationTree::pair_code(const Instance& instance, FrameId child)
{
    const Frame& c = instance.frame(child);
    if (!c.parent) throw StructuralError("the root frame has no parent to bridge to");
    const Frame& p = instance.frame(*c.parent);
    return bridge(p.definition, c.definition)->encode(concat(code_of(instance, p.id), code_of(instance, child)));
}

ComposedPath AugmentationTree::compose_path(const Instance& instance, FrameId leaf)
{
    std::vector<FrameId> path = path_to(instance, leaf);
    SpineTree spine;
    for (std::size_t i = 0; i < path.size(); ++i) spine.push();
    const auto& nodes = spine.nodes();
    std::vector<Vec> code(nodes.size());
    std::vector<FrameId> leftmost(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        const auto& node = nodes[n];
        if (node.leaf >= 0) {
            leftmost[n] = path[static_cast<std::size_t>(node.leaf)];
            code[n] = code_of(instance, leftmost[n]);
        } else {
            auto l = static_cast<std::size_t>(node.left), r = static_cast<std::size_t>(node.right);
            leftmost[n] = leftmost[l];
            code[n] = spine_bridge(instance.frame(leftmost[n]).definition)->encode(concat(code[l], code[r]));
        }
    }
    ComposedPath out;
    out.code = code[static_cast<std::size_t>(spine.root())];
    out.hops = spine.hops(path.size() - 1);
    out.frames = static_cast<int>(path.size());
    return out;
}

double AugmentationTree::similarity(const Instance& instance, FrameId a, FrameId b)
{
    auto find_code = [&](FrameId f) {
        auto it = codes_.find(f);
        return it != codes_.end() ? it->second : encode_frame(instance, f);
    };
    Vec ca = find_code(a), cb = find_code(b);
    auto ma = encoder(instance.frame(a).definition)->active_mask();
    auto mb = encoder(instance.frame(b).definition)->active_mask();
    for (std::size_t i = 0; i < ma.size(); ++i) ma[i] = ma[i] && mb[i];
    return masked_distance(ca, cb, ma);
}

void AugmentationTree::record_outcome(const std::string& def, const Vec& code, Outcome label)
{
    auto& list = memory_[def];
    auto count = std::count_if(list.begin(), list.end(), [&](const MemoryEntry& e) { return e.label == label; });
    if (static_cast<std::size_t>(count) < config_.memory_limit) list.push_back({code, label});
}

std::size_t AugmentationTree::memory_size() const
{
    std::size_t n = 0;
    for (const auto& [def, list] : memory_) n += list.size();
    return n;
}

HierarchyReport AugmentationTree::train_from_traces(const TraceSet& traces, std::uint64_t seed)
{
    HierarchyReport report;
    if (traces.empty()) return report;
    auto sub_seed = [&](const std::string& key) { return SplitMix64(seed ^ fnv1a(key)).next(); };

    std::map<std::string, std::vector<Vec>> states;
    for (const auto& s : traces.states) states[s.definition].push_back(s.features);
    for (const auto& o : traces.outcomes) states[o.definition].push_back(o.features);
    for (const auto& [def, cols] : states) {
        Mat data = distinct_columns(cols, kTrainingLimit, sub_seed("sample:" + def));
        report.encoders.push_back(fit(*encoder(def), def, data, config_.epochs, sub_seed("frame:" + def)));
    }

    std::map<std::pair<std::string, std::string>, std::vector<Vec>> pairs;
    for (const auto& p : traces.pairs)
        pairs[{p.parent, p.child}].push_back(
            concat(encoder(p.parent)->encode(p.parent_features), encoder(p.child)->encode(p.child_features)));
    for (const auto& [key, cols] : pairs) {
        std::string name = key.first + "/" + key.second;
        Mat data = distinct_columns(cols, kTrainingLimit, sub_seed("sample-bridge:" + name));
        report.bridges.push_back(fit(*bridge(key.first, key.second), name, data, config_.epochs, sub_seed("bridge:" + name)));
    }

    std::map<std::string, std::vector<Vec>> spine_pairs;
    for (const auto& path : traces.paths) {
        for (std::size_t i = 0; i + 1 < path.frames.size(); ++i) {
            const auto& [da, fa] = path.frames[i];
            const auto& [db, fb] = path.frames[i + 1];
            spine_pairs[da].push_back(concat(encoder(da)->encode(fa), encoder(db)->encode(fb)));
        }
    }
    for (const auto& [def, cols] : spine_pairs) {
        Mat data = distinct_columns(cols, kTrainingLimit, sub_seed("sample-spine:" + def));
        report.spines.push_back(fit(*spine_bridge(def), def, data, config_.epochs, sub_seed("spine:" + def)));
    }

    memory_.clear();
    // Reservoir-sample each (definition, label) stream down to the limit.
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> streams;
    for (std::size_t i = 0; i < traces.outcomes.size(); ++i)
        streams[{traces.outcomes[i].definition, static_cast<int>(traces.outcomes[i].label)}].push_back(i);
    std::vector<std::size_t> chosen;
    for (auto& [key, idx] : streams) {
        if (idx.size() > config_.memory_limit) {
            SplitMix64 rng(sub_seed("memory:" + key.first + std::to_string(key.second)));
            std::vector<std::size_t> keep(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(config_.memory_limit));
            for (std::size_t i = config_.memory_limit; i < idx.size(); ++i) {
                auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
                if (j < keep.size()) keep[j] = idx[i];
            }
            std::sort(keep.begin(), keep.end());
            idx = keep;
        }
        chosen.insert(chosen.end(), idx.begin(), idx.end());
    }
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) {
        const auto& o = traces.outcomes[i];
        record_outcome(o.definition, encoder(o.definition)->encode(o.features), o.label);
        ++(o.label == Outcome::Success ? report.success_codes : report.deadend_codes);
    }

    for (const auto* group : {&report.encoders, &report.bridges, &report.spines})
        for (const auto& e : *group) report.batches += e.batches;
    codes_.clear();
    return report;
}

std::vector<double> AugmentationTree::scores(const Instance& instance, std::span<const BranchCandidate> candidates,
                                             FrameId context) const
{
    std::vector<double> out(candidates.size(), 0.0);
    const std::string& def = instance.frame(context).definition;
    auto mem = memory_.find(def);
    auto enc = find_encoder(def);
    if (mem == memory_.end() || mem->second.empty() || !enc) return out;
    auto mask = enc->active_mask();
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto& c = candidates[i];
        Vec code = enc->encode(featurize_with(instance, context, c.cell, PartialInfo::exact(c.value)));
        double success = inf, deadend = inf;
        for (const auto& e : mem->second) {
            double d = masked_distance(code, e.code, mask);
            double& best = e.label == Outcome::Success ? success : deadend;
            best = std::min(best, d);
        }
        double s = 0;
        if (std::isfinite(success) && std::isfinite(deadend))
            s = deadend - success;
        else if (std::isfinite(success))
            s = -success;
        else if (std::isfinite(deadend))
            s = deadend;
        out[i] = std::isfinite(s) ? s : 0.0;
    }
    return out;
}

std::string AugmentationTree::dump_structure(const Instance& instance) const
{
    using nlohmann::json;
    auto state_name = [](ExpansionState s) {
        switch (s) {
        case ExpansionState::Unexpanded:
            return "unexpanded";
        case ExpansionState::Expanded:
            return "expanded";
        case ExpansionState::Summarized:
            return "summarized";
        }
        return "";
    };
    json frames = json::array();
    json spines = json::array();
    for (const Frame& f : instance.frames()) {
        frames.push_back({{"id", f.id},
                          {"definition", f.definition},
                          {"parent", f.parent ? json(*f.parent) : json(nullptr)},
                          {"depth", f.depth},
                          {"state", state_name(f.state)},
                          {"children", f.children}});
        if (f.state == ExpansionState::Unexpanded) continue;
        bool leaf = std::none_of(f.children.begin(), f.children.end(), [&](FrameId c) {
            return instance.frame(c).state != ExpansionState::Unexpanded;
        });
        if (!leaf) continue;
        auto path = path_to(instance, f.id);
        SpineTree spine;
        for (std::size_t i = 0; i < path.size(); ++i) spine.push();
        json nodes = json::array();
        for (const auto& n : spine.nodes())
            nodes.push_back({{"left", n.left}, {"right", n.right}, {"leaf", n.leaf}, {"height", n.height}});
        spines.push_back({{"leaf", f.id},
                          {"path", path},
                          {"nodes", nodes},
                          {"root", spine.root()},
                          {"height", spine.height()},
                          {"hops", spine.hops(path.size() - 1)}});
    }
    return json{{"frames", frames}, {"spines", spines}}.dump();
}

// ---------------------------------------------------------------- bundle

void AugmentationTree::save(const std::filesystem::path& dir) const
{
    using nlohmann::json;
    std::filesystem::create_directories(dir);
    json enc = json::array(), br = json::array(), sp = json::array(), mem = json::array();
    std::vector<std::string> defs;
    int k = 0;
    for (const auto& [def, ae] : encoders_) {
        std::string file = "frame-" + std::to_string(k++) + ".ae";
        save_checkpoint(*ae, dir / file);
        enc.push_back({{"definition", def}, {"file", file}});
        defs.push_back(def);
    }
    k = 0;
    for (const auto& [key, ae] : bridges_) {
        std::string file = "bridge-" + std::to_string(k++) + ".ae";
        save_checkpoint(*ae, dir / file);
        br.push_back({{"parent", key.first}, {"child", key.second}, {"file", file}});
    }
    k = 0;
    for (const auto& [def, ae] : spines_) {
        std::string file = "spine-" + std::to_string(k++) + ".ae";
        save_checkpoint(*ae, dir / file);
        sp.push_back({{"definition", def}, {"file", file}});
    }
    for (const auto& [def, list] : memory_)
        for (const auto& e : list)
            mem.push_back({{"definition", def},
                           {"label", e.label == Outcome::Success ? "success" : "deadend"},
                           {"code", std::vector<double>(e.code.data(), e.code.data() + e.code.size())}});
    json manifest = {{"format", "fifth-model"},
                     {"version", 1},
                     {"feature_schema", kFeatureSchema},
                     {"features", kFeatureCount},
                     {"K", config_.code},
                     {"seed", seed_},
                     {"config",
                      {{"hidden", config_.hidden},
                       {"learning_rate", config_.learning_rate},
                       {"sparsity", config_.sparsity},
                       {"decay", config_.decay},
                       {"prune", config_.prune},
                       {"epochs", config_.epochs},
                       {"memory_limit", config_.memory_limit}}},
                     {"definitions", defs},
                     {"encoders", enc},
                     {"bridges", br},
                     {"spines", sp},
                     {"memory", mem}};
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

AugmentationTree AugmentationTree::load(const std::filesystem::path& dir)
{
    using nlohmann::json;
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw Error("no model manifest in " + dir.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw Error((dir / "manifest.json").string() + ": " + e.what());
    }
    if (m.value("format", "") != "fifth-model") throw Error(dir.string() + ": not a model bundle");
    if (m.value("feature_schema", 0) != kFeatureSchema)
        throw Error(dir.string() + ": feature schema " + std::to_string(m.value("feature_schema", 0)) + " is not supported");
    try {
        HierarchyConfig c;
        c.code = m.at("K");
        const json& cfg = m.at("config");
        c.hidden = cfg.at("hidden");
        c.learning_rate = cfg.at("learning_rate");
        c.sparsity = cfg.at("sparsity");
        c.decay = cfg.at("decay");
        c.prune = cfg.at("prune");
        c.epochs = cfg.at("epochs");
        c.memory_limit = cfg.at("memory_limit");
        AugmentationTree t(c, m.at("seed").get<std::uint64_t>());
        auto read = [&](const json& entry) {
            return std::make_shared<Autoencoder>(load_checkpoint(dir / entry.at("file").get<std::string>()));
        };
        for (const auto& e : m.at("encoders")) t.encoders_[e.at("definition")] = read(e);
        for (const auto& e : m.at("bridges")) t.bridges_[{e.at("parent"), e.at("child")}] = read(e);
        for (const auto& e : m.at("spines")) t.spines_[e.at("definition")] = read(e);
        for (const auto& e : m.at("memory")) {
            auto v = e.at("code").get<std::vector<double>>();
            if (static_cast<int>(v.size()) != c.code) throw Error(dir.string() + ": memory code has wrong length");
            t.memory_[e.at("definition")].push_back(
                {Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())),
                 e.at("label") == "success" ? Outcome::Success : Outcome::Deadend});
        }
        return t;
    } catch (const json::exception& e) {
        throw Error((dir / "manifest.json").string() + ": " + e.what());
    }
}

}  // namespace fifth
