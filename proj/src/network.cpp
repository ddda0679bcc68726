#include "fifth/network.hpp"

#include "fifth/error.hpp"

#include <algorithm>
#include <iterator>

namespace fifth {

namespace {

enum class GuardState { Holds, Refuted, Undecided };

GuardState check_guard(const PartialInfo& content, bool expect)
{
    auto t = truth(content);
    if (!t) return GuardState::Undecided;
    return *t == expect ? GuardState::Holds : GuardState::Refuted;
}

}  // namespace

Network::Network()
{
    Gate root;
    root.memo = GateState::Open;
    gates_.push_back(std::move(root));
}

CellId Network::add_cell(CellOrigin origin)
{
    Cell c;
    c.origin = std::move(origin);
    cells_.push_back(std::move(c));
    return static_cast<CellId>(cells_.size() - 1);
}

const Cell& Network::cell(CellId id) const
{
    if (id >= cells_.size()) throw StructuralError("unknown cell id " + std::to_string(id));
    return cells_[id];
}

const Propagator& Network::propagator(PropId id) const
{
    if (id >= props_.size()) throw StructuralError("unknown propagator id " + std::to_string(id));
    return props_[id];
}

WriteResult Network::write(CellId id, const PartialInfo& info)
{
    return write(id, info, write_counter_);
}

WriteResult Network::write(CellId id, const PartialInfo& info, WriteId write_id)
{
    cell(id);
    write_counter_ = std::max(write_counter_, write_id + 1);
    return apply(id, info, write_id, kExternalWrite, false);
}

WriteResult Network::apply(CellId id, const PartialInfo& info, WriteId write_id, PropId source, bool saturated)
{
    Cell& c = cells_[id];
    if (c.dropped) return WriteResult::Unchanged;
    PartialInfo next = merge(c.content, info);
    if (next == c.content) return WriteResult::Unchanged;

    WriteResult result = WriteResult::Refined;
    if (next.is_contradiction()) {
        std::vector<WriteId> ids = c.contributors;
        ids.push_back(write_id);
        const auto& existing = next.as<Contradiction>().provenance;
        ids.insert(ids.end(), existing.begin(), existing.end());
        next = PartialInfo::contradiction(std::move(ids));
        contradiction_ = id;
        result = WriteResult::ContradictionRaised;
    }

    if (trace_) {
        TraceEvent ev{steps_total_, id, &c.origin, &c.content, &next, source, saturated};
        trace_(ev);
    }
    c.content = std::move(next);
    c.contributors.push_back(write_id);
    c.saturated = c.saturated || saturated;
    WriteRecord rec{write_id, id, source, steps_total_};
    if (writes_.empty() || writes_.back().id < write_id) {
        writes_.push_back(rec);
    } else {
        auto at = std::lower_bound(writes_.begin(), writes_.end(), write_id,
                                   [](const WriteRecord& r, WriteId v) { return r.id < v; });
        writes_.insert(at, rec);
    }

    if (result == WriteResult::Refined) {
        for (PropId w : c.watchers) enqueue(w);
        wake(id);
    }
    return result;
}

std::optional<WriteRecord> Network::write_record(WriteId id) const
{
    auto it = std::lower_bound(writes_.begin(), writes_.end(), id,
                               [](const WriteRecord& r, WriteId v) { return r.id < v; });
    if (it == writes_.end() || it->id != id) return std::nullopt;
    return *it;
}

GateId Network::add_gate(GateId parent, std::vector<Guard> guards)
{
    if (parent >= gates_.size()) throw StructuralError("unknown gate id " + std::to_string(parent));
    for (const auto& g : guards) cell(g.cell);
    auto id = static_cast<GateId>(gates_.size());
    for (const auto& g : guards) {
        auto& gw = cells_[g.cell].gate_watchers;
        if (std::find(gw.begin(), gw.end(), id) == gw.end()) gw.push_back(id);
    }
    Gate gate;
    gate.parent = parent;
    gate.guards = std::move(guards);
    gates_.push_back(std::move(gate));
    return id;
}

GateState Network::gate_state(GateId gate) const
{
    if (gate >= gates_.size()) throw StructuralError("unknown gate id " + std::to_string(gate));
    GateState acc = GateState::Open;
    for (GateId g = gate;; g = gates_[g].parent) {
        const Gate& node = gates_[g];
        if (node.memo == GateState::Closed) return GateState::Closed;
        if (node.memo == GateState::Open) return acc;
        for (const auto& guard : node.guards) {
            auto s = check_guard(cells_[guard.cell].content, guard.expect);
            if (s == GuardState::Refuted) return GateState::Closed;
            if (s == GuardState::Undecided) acc = GateState::Pending;
        }
        if (g == kOpenGate) return acc;
    }
}

GateState Network::resolve_gate(GateId gate, GateId* park_at)
{
    // Collect the chain up to the nearest memoized ancestor, then settle it
    // top-down so Open/Closed results are memoized permanently.
    std::vector<GateId> chain;
    GateId g = gate;
    while (gates_[g].memo == GateState::Pending) {
        chain.push_back(g);
        g = gates_[g].parent;
    }
    if (gates_[g].memo == GateState::Closed) {
        for (GateId c : chain) gates_[c].memo = GateState::Closed;
        return GateState::Closed;
    }
    bool parent_open = true;
    std::optional<GateId> first_pending;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        Gate& node = gates_[*it];
        bool all_hold = true;
        for (const auto& guard : node.guards) {
            auto s = check_guard(cells_[guard.cell].content, guard.expect);
            if (s == GuardState::Refuted) {
                node.memo = GateState::Closed;
                return GateState::Closed;
            }
            if (s == GuardState::Undecided) all_hold = false;
        }
        if (parent_open && all_hold) {
            node.memo = GateState::Open;
        } else {
            parent_open = false;
            if (!first_pending) first_pending = *it;
        }
    }
    if (!first_pending) return GateState::Open;
    *park_at = *first_pending;
    return GateState::Pending;
}

PropId Network::attach(PropKind kind, std::vector<CellId> cells, PartialInfo payload, GateId gate, FrameId frame)
{
    for (CellId c : cells) cell(c);
    if (gate >= gates_.size()) throw StructuralError("unknown gate id " + std::to_string(gate));
    auto id = static_cast<PropId>(props_.size());
    for (CellId c : cells) {
        auto& w = cells_[c].watchers;
        if (std::find(w.begin(), w.end(), id) == w.end()) w.push_back(id);
    }
    props_.push_back(Propagator{kind, std::move(cells), std::move(payload), gate, frame});
    in_queue_.push_back(0);
    enqueue(id);
    return id;
}

void Network::detach(PropId id)
{
    Propagator& p = props_.at(id);
    if (!p.alive) return;
    p.alive = false;
    for (CellId c : p.cells) std::erase(cells_[c].watchers, id);
}

void Network::drop_cell(CellId id)
{
    cell(id);
    Cell& mc = cells_[id];
    mc.dropped = true;
    mc.content = PartialInfo::nothing();
    mc.watchers.clear();
    mc.watchers.shrink_to_fit();
    mc.contributors.clear();
    mc.contributors.shrink_to_fit();
}

void Network::enqueue(PropId id)
{
    if (in_queue_[id] || !props_[id].alive) return;
    in_queue_[id] = 1;
    queue_.push_back(id);
}

void Network::wake(CellId id)
{
    for (GateId g : cells_[id].gate_watchers) {
        auto parked = std::move(gates_[g].parked);
        gates_[g].parked.clear();
        for (PropId p : parked) {
            props_[p].parked = false;
            enqueue(p);
        }
    }
}

QuiescenceReport Network::run_to_quiescence(std::uint64_t step_budget)
{
    QuiescenceReport report;
    std::vector<PartialInfo> args;
    std::vector<char> saturated;
    while (!queue_.empty() && !contradiction_ && report.steps_used < step_budget) {
        std::size_t pick = dequeue_order_ ? std::min(dequeue_order_(queue_.size()), queue_.size() - 1) : 0;
        PropId id = queue_[pick];
        queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(pick));
        in_queue_[id] = 0;
        ++report.steps_used;
        ++steps_total_;

        Propagator& p = props_[id];
        if (!p.alive) continue;
        GateId park_at = kOpenGate;
        GateState state = resolve_gate(p.gate, &park_at);
        if (state == GateState::Closed) continue;
        if (state == GateState::Pending) {
            if (!p.parked) {
                p.parked = true;
                gates_[park_at].parked.push_back(id);
            }
            continue;
        }

        args.clear();
        for (CellId c : p.cells) args.push_back(cells_[c].content);
        auto out = transfer(p.kind, p.payload, args, &saturated);
        // Copy the cell list: writes may grow props_ via callbacks.
        const std::vector<CellId> targets = props_[id].cells;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (out[i].is_nothing()) continue;
            apply(targets[i], out[i], write_counter_++, id, saturated[i] != 0);
            if (contradiction_) break;
        }
    }
    if (contradiction_) {
        for (PropId p : queue_) in_queue_[p] = 0;
        queue_.clear();
    }
    report.quiescent = queue_.empty();
    report.contradiction = contradiction_;
    return report;
}

}  // namespace fifth
