#include "fifth/search.hpp"

#include "fifth/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>

namespace fifth {

Query make_query(const Program& program)
{
    Query q;
    if (program.query) {
        const QuerySpec& s = *program.query;
        q.entry = s.entry;
        for (const auto& [name, value] : s.bindings) q.bindings.emplace_back(name, PartialInfo::exact(value));
        q.show = s.show;
        if (s.precision) q.precision = *s.precision;
        if (s.depth) q.budgets.depth = *s.depth;
        if (s.steps) q.budgets.steps = *s.steps;
        if (s.nodes) q.budgets.nodes = *s.nodes;
        q.minimize = s.minimize;
        return q;
    }
    if (program.definitions.count("main"))
        q.entry = "main";
    else if (program.definitions.size() == 1)
        q.entry = program.order.front();
    else
        throw StructuralError("no query form and no definition named 'main'");
    q.show = program.definition(q.entry).params;
    return q;
}

SnapshotStore::Id SnapshotStore::snapshot(const Instance& instance)
{
    snapshots_.emplace(next_, instance);
    return next_++;
}

Instance SnapshotStore::restore(Id id) const
{
    auto it = snapshots_.find(id);
    if (it == snapshots_.end()) throw StructuralError("unknown snapshot id " + std::to_string(id));
    return it->second;
}

void SnapshotStore::release(Id id)
{
    snapshots_.erase(id);
}

namespace {

std::optional<std::size_t> domain_size(const PartialInfo& p)
{
    if (const auto* d = p.get_if<FiniteDomain>()) return d->elements.size();
    if (const auto* i = p.get_if<IntInterval>()) {
        if (i->lo <= -kIntSaturation || i->hi >= kIntSaturation) return std::nullopt;
        auto span = static_cast<std::uint64_t>(i->hi - i->lo);
        if (span >= 4096) return std::nullopt;
        return static_cast<std::size_t>(span + 1);
    }
    return std::nullopt;
}

bool live(const Network& net, CellId c)
{
    return !net.cell(c).dropped;
}

bool undecided(const PartialInfo& p)
{
    return !p.is_exact() && !p.is_contradiction();
}

struct Variable {
    CellId cell;
    FrameId frame;
    std::string name;
};

// Smallest enumerable domain first, ties to the lowest cell id.
std::optional<Variable> pick(const Network& net, const std::vector<Variable>& pool)
{
    std::optional<Variable> best;
    std::size_t best_size = 0;
    for (const auto& v : pool) {
        const PartialInfo& p = net.content(v.cell);
        if (!undecided(p)) continue;
        auto size = domain_size(p);
        if (!size) continue;
        if (!best || *size < best_size || (*size == best_size && v.cell < best->cell)) {
            best = v;
            best_size = *size;
        }
    }
    return best;
}

class Searcher {
public:
    Searcher(std::shared_ptr<const Program> program, const Query& query, BranchOracle& oracle,
             const SearchOptions& options, bool optimizing)
        : program_(std::move(program)), query_(query), oracle_(oracle), options_(options), optimizing_(optimizing)
    {
        if (optimizing_ && !query_.minimize) throw StructuralError("optimize needs a query with (minimize cell)");
    }

    SolutionSet run()
    {
        Instance root = Instance::instantiate(program_, query_.entry, query_.bindings);
        for (const auto& name : query_.show) targets_.cells.push_back(root.root_cell(name));
        targets_.precision = query_.precision;
        if (optimizing_) objective_ = root.root_cell(*query_.minimize);
        explore(root);
        return std::move(out_);
    }

private:
    std::vector<Variable> active_choices(const Instance& inst) const
    {
        const Network& net = inst.network();
        std::vector<Variable> pool;
        for (const auto& cp : inst.choices()) {
            if (!live(net, cp.cell) || net.gate_state(cp.gate) != GateState::Open) continue;
            pool.push_back(Variable{cp.cell, cp.frame, cp.name});
        }
        return pool;
    }

    bool has_undecided(const Network& net, const std::vector<Variable>& pool) const
    {
        return std::any_of(pool.begin(), pool.end(), [&](const Variable& v) { return undecided(net.content(v.cell)); });
    }

    // Runs demand to quiescence. False when the search must stop.
    bool propagate(Instance& inst, DemandReport& rep)
    {
        SearchStats& st = out_.stats;
        DemandOptions opt;
        opt.depth_budget = query_.budgets.depth;
        opt.step_budget = query_.budgets.steps - st.steps;
        opt.speculate = false;
        rep = demand_loop(inst, targets_, opt);
        st.steps += rep.steps_used;
        st.expansions += rep.expansions;
        if (!rep.contradiction && rep.quiescent && !rep.targets_met &&
            !has_undecided(inst.network(), active_choices(inst))) {
            opt.step_budget = query_.budgets.steps - st.steps;
            opt.speculate = true;
            DemandReport more = demand_loop(inst, targets_, opt);
            st.steps += more.steps_used;
            st.expansions += more.expansions;
            more.expansions += rep.expansions;
            rep = more;
        }
        if (!rep.contradiction && !rep.quiescent) {
            st.complete = false;
            stop_ = true;
            return false;
        }
        return true;
    }

    bool explore(const Instance& start)
    {
        if (stop_) return false;
        SearchStats& st = out_.stats;
        if (st.nodes >= query_.budgets.nodes) {
            st.complete = false;
            stop_ = true;
            return false;
        }
        ++st.nodes;
        Instance inst = start;
        DemandReport rep;
        if (!propagate(inst, rep)) return false;
        if (rep.contradiction) {
            if (options_.observer) options_.observer->on_deadend(inst);
            return false;
        }
        if (rep.exhausted) st.complete = false;  // blocked by the depth budget
        if (options_.observer) options_.observer->on_node(inst);
        if (options_.collect_garbage) st.summarized += collect_garbage(inst).frames;

        const Network& net = inst.network();
        if (optimizing_ && incumbent_) {
            auto b = bounds_of(net.content(*objective_));
            if (b && b->lo >= static_cast<long double>(*incumbent_)) return false;
        }

        std::optional<Variable> var = pick(net, active_choices(inst));
        if (!var && optimizing_ && undecided(net.content(*objective_))) {
            var = Variable{*objective_, 0, *query_.minimize};
            if (!domain_size(net.content(*objective_))) {
                st.complete = false;
                return false;
            }
        }
        if (!var && !rep.targets_met) {
            std::vector<Variable> targets;
            for (std::size_t i = 0; i < targets_.cells.size(); ++i)
                targets.push_back(Variable{targets_.cells[i], 0, query_.show[i]});
            var = pick(net, targets);
            if (!var) {
                // Nothing left to branch on and the targets are still too wide.
                st.complete = false;
                return false;
            }
        }
        if (!var) return record(inst);
        return branch(inst, *var);
    }

    bool branch(const Instance& inst, const Variable& var)
    {
        auto values = *inst.network().content(var.cell).enumerate();
        std::vector<BranchCandidate> cands;
        for (auto v : values) cands.push_back(BranchCandidate{var.cell, v, var.frame});
        std::vector<double> scores = oracle_.scores(inst, cands, var.frame);
        std::vector<std::size_t> order(cands.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return cands[a].value < cands[b].value;
        });

        auto snap = store_.snapshot(inst);
        std::vector<int> frame_path = inst.frame_path(var.frame);
        bool found = false;
        for (std::size_t k : order) {
            if (stop_) break;
            Instance child = store_.restore(snap);
            child.network().write(var.cell, PartialInfo::exact(cands[k].value));
            decisions_.push_back(Decision{frame_path, var.name, cands[k].value});
            bool sub = explore(child);
            decisions_.pop_back();
            if (options_.observer) options_.observer->on_branch(inst, cands[k], sub);
            found = found || sub;
        }
        store_.release(snap);
        return found;
    }

    bool record(const Instance& inst)
    {
        const Network& net = inst.network();
        Solution s;
        for (std::size_t i = 0; i < targets_.cells.size(); ++i)
            s.cells.emplace_back(query_.show[i], net.content(targets_.cells[i]));
        s.decisions = decisions_;
        if (optimizing_) {
            s.objective = net.content(*objective_);
            auto v = s.objective->as<Exact>().value.integral();
            if (!v) {
                out_.stats.complete = false;
                return false;
            }
            incumbent_ = *v;
            out_.bound_trace.push_back(BoundEvent{out_.stats.nodes, *v});
            out_.solutions.assign(1, s);
        } else {
            out_.solutions.push_back(s);
        }
        if (options_.observer) options_.observer->on_solution(inst, s);
        return true;
    }

    std::shared_ptr<const Program> program_;
    const Query& query_;
    BranchOracle& oracle_;
    const SearchOptions& options_;
    bool optimizing_;
    Targets targets_;
    std::optional<CellId> objective_;
    std::optional<std::int64_t> incumbent_;
    std::vector<Decision> decisions_;
    SnapshotStore store_;
    SolutionSet out_;
    bool stop_ = false;
};

}  // namespace

SolutionSet solve(std::shared_ptr<const Program> program, const Query& query, BranchOracle& oracle,
                  const SearchOptions& options)
{
    return Searcher(std::move(program), query, oracle, options, false).run();
}

SolutionSet optimize(std::shared_ptr<const Program> program, const Query& query, BranchOracle& oracle,
                     const SearchOptions& options)
{
    return Searcher(std::move(program), query, oracle, options, true).run();
}

bool replay(std::shared_ptr<const Program> program, const Query& query, const Solution& solution)
{
    Instance inst = Instance::instantiate(program, query.entry, query.bindings);
    Targets targets;
    for (const auto& name : query.show) targets.cells.push_back(inst.root_cell(name));
    targets.precision = query.precision;
    DemandOptions opt;
    opt.depth_budget = query.budgets.depth;
    opt.step_budget = query.budgets.steps;
    opt.speculate = false;

    std::vector<Decision> pending = solution.decisions;
    while (true) {
        DemandReport rep = demand_loop(inst, targets, opt);
        if (rep.contradiction || !rep.quiescent) return false;
        if (pending.empty()) break;
        std::size_t before = pending.size();
        std::erase_if(pending, [&](const Decision& d) {
            auto f = inst.find_frame(d.frame_path);
            if (!f || !inst.frame(*f).cells.count(d.name)) return false;
            inst.network().write(inst.cell(*f, d.name), PartialInfo::exact(d.value));
            return true;
        });
        if (pending.size() == before) return false;
    }
    opt.speculate = true;
    DemandReport rep = demand_loop(inst, targets, opt);
    if (rep.contradiction || !rep.quiescent || !rep.targets_met) return false;
    for (const auto& [name, value] : solution.cells)
        if (!equivalent(inst.network().content(inst.root_cell(name)), value)) return false;
    return true;
}

SummarizationReport collect_garbage(Instance& inst)
{
    SummarizationReport report;
    const Network& net = inst.network();
    const auto& frames = inst.frames();
    // live[f]: f's subtree holds an unexpanded frame whose gate is not refuted
    std::vector<char> live(frames.size(), 0);
    for (std::size_t i = frames.size(); i-- > 0;) {
        const Frame& f = frames[i];
        if (f.state == ExpansionState::Unexpanded && net.gate_state(f.gate) != GateState::Closed) live[i] = 1;
        if (live[i] && f.parent) live[*f.parent] = 1;
    }
    auto decided = [&](CellId c) { return net.cell(c).dropped || net.content(c).is_exact(); };
    std::vector<FrameId> eligible;
    for (const Frame& f : frames) {
        if (!f.parent || f.state != ExpansionState::Expanded || live[f.id]) continue;
        if (!std::all_of(f.boundary.begin(), f.boundary.end(), decided)) continue;
        bool inert = std::all_of(f.propagators.begin(), f.propagators.end(), [&](PropId p) {
            const Propagator& prop = net.propagator(p);
            if (!prop.alive || net.gate_state(prop.gate) == GateState::Closed) return true;
            return std::all_of(prop.cells.begin(), prop.cells.end(), decided);
        });
        if (inert) eligible.push_back(f.id);
    }
    for (FrameId id : eligible) {
        const Frame& f = inst.frame(id);
        report.cells_dropped += f.interior.size();
        report.propagators_detached += static_cast<std::uint64_t>(
            std::count_if(f.propagators.begin(), f.propagators.end(), [&](PropId p) { return net.propagator(p).alive; }));
        inst.summarize(id);
        ++report.frames;
    }
    return report;
}

namespace {

nlohmann::json value_json(const PartialInfo& p)
{
    if (p.is_exact()) {
        const Number& n = p.as<Exact>().value;
        if (n.is_int()) return n.as_int();
    }
    return render(p);
}

}  // namespace

std::string solution_json(const SolutionSet& set)
{
    nlohmann::json sols = nlohmann::json::array();
    for (const auto& s : set.solutions) {
        nlohmann::json cells = nlohmann::json::object();
        for (const auto& [name, value] : s.cells) cells[name] = value_json(value);
        sols.push_back({{"cells", cells}});
    }
    nlohmann::json j = {{"solutions", sols},
                        {"stats",
                         {{"nodes", set.stats.nodes},
                          {"steps", set.stats.steps},
                          {"expansions", set.stats.expansions},
                          {"complete", set.stats.complete}}}};
    return j.dump();
}

}  // namespace fifth
