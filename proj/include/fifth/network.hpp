#pragma once

// Cells, monotone propagators and the run-to-quiescence scheduler.

#include "fifth/lattice.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fifth {

using CellId = std::uint32_t;
using PropId = std::uint32_t;
using GateId = std::uint32_t;
using FrameId = std::uint32_t;

inline constexpr FrameId kNoFrame = std::numeric_limits<FrameId>::max();
inline constexpr PropId kExternalWrite = std::numeric_limits<PropId>::max();
inline constexpr GateId kOpenGate = 0;

struct CellOrigin {
    FrameId frame = kNoFrame;
    std::string name;
};

struct Cell {
    PartialInfo content;
    std::vector<PropId> watchers;
    std::vector<GateId> gate_watchers;
    CellOrigin origin;
    std::vector<WriteId> contributors;  // writes that refined this cell
    bool saturated = false;
    bool dropped = false;
};

enum class PropKind { Sum, Product, Equal, LessEqual, ElementOf, AllDifferent, Switch, Constant };

const char* to_string(PropKind kind);

/// Argument layout per kind:
///   Sum/Product (a, b, c) for a+b=c / a*b=c; Equal (a, b); LessEqual (a, b)
///   for a <= b; ElementOf (a) and Constant (a) write `payload`;
///   AllDifferent (x1..xn); Switch (cond, then, else, out).
/// All arguments are both inputs and outputs.
struct Propagator {
    PropKind kind;
    std::vector<CellId> cells;
    PartialInfo payload;
    GateId gate = kOpenGate;
    FrameId frame = kNoFrame;
    bool alive = true;
    bool parked = false;
};

/// Pure transfer function: the information each argument must have given
/// the current contents of all arguments. Nothing means no conclusion.
/// `saturated`, when given, is set per argument whose bounds were clamped.
std::vector<PartialInfo> transfer(PropKind kind, const PartialInfo& payload, std::span<const PartialInfo> args,
                                  std::vector<char>* saturated = nullptr);

/// A condition cell must be truthy (nonzero) or falsy for the guard to hold.
struct Guard {
    CellId cell;
    bool expect;
};

enum class GateState { Open, Pending, Closed };

/// Gates form a tree. A gate is open when all its guards hold and its
/// parent is open; propagators behind a pending gate wait, behind a closed
/// gate they never run.
struct Gate {
    GateId parent = kOpenGate;
    std::vector<Guard> guards;
    GateState memo = GateState::Pending;
    std::vector<PropId> parked;
};

enum class WriteResult { Unchanged, Refined, ContradictionRaised };

struct QuiescenceReport {
    std::uint64_t steps_used = 0;
    bool quiescent = false;
    std::optional<CellId> contradiction;
};

struct WriteRecord {
    WriteId id;
    CellId cell;
    PropId propagator;  // kExternalWrite for writes from outside the network
    std::uint64_t step;
};

struct TraceEvent {
    std::uint64_t step;
    CellId cell;
    const CellOrigin* origin;
    const PartialInfo* old_content;
    const PartialInfo* new_content;
    PropId propagator;
    bool saturated;
};

class Network {
public:
    Network();

    CellId add_cell(CellOrigin origin = {});
    std::size_t cell_count() const { return cells_.size(); }
    const Cell& cell(CellId id) const;
    const PartialInfo& content(CellId id) const { return cell(id).content; }

    /// Merge `info` into the cell; allocates the next write id.
    WriteResult write(CellId id, const PartialInfo& info);
    WriteResult write(CellId id, const PartialInfo& info, WriteId write_id);

    GateId add_gate(GateId parent, std::vector<Guard> guards);
    GateState gate_state(GateId gate) const;
    std::size_t gate_count() const { return gates_.size(); }

    /// Register a propagator, make it watch its cells and enqueue it once.
    /// Throws StructuralError on unknown cell or gate ids.
    PropId attach(PropKind kind, std::vector<CellId> cells, PartialInfo payload = {}, GateId gate = kOpenGate,
                  FrameId frame = kNoFrame);
    std::size_t propagator_count() const { return props_.size(); }
    const Propagator& propagator(PropId id) const;

    /// Remove a propagator from the graph (storage management).
    void detach(PropId id);
    /// Forget a cell's content and connections. The id stays reserved.
    void drop_cell(CellId id);

    QuiescenceReport run_to_quiescence(std::uint64_t step_budget);

    bool quiescent() const { return queue_.empty(); }
    std::size_t pending() const { return queue_.size(); }
    bool is_pending(PropId id) const { return id < in_queue_.size() && in_queue_[id]; }
    std::optional<CellId> contradiction() const { return contradiction_; }
    WriteId write_counter() const { return write_counter_; }
    std::uint64_t steps_total() const { return steps_total_; }

    std::optional<WriteRecord> write_record(WriteId id) const;

    /// Test hook: picks which queued propagator runs next (argument is the
    /// queue length). FIFO when unset.
    void set_dequeue_order(std::function<std::size_t(std::size_t)> order) { dequeue_order_ = std::move(order); }
    void set_trace_sink(std::function<void(const TraceEvent&)> sink) { trace_ = std::move(sink); }

private:
    void enqueue(PropId id);
    void wake(CellId id);
    GateState resolve_gate(GateId gate, GateId* park_at);
    WriteResult apply(CellId id, const PartialInfo& info, WriteId write_id, PropId source, bool saturated);

    std::vector<Cell> cells_;
    std::vector<Propagator> props_;
    std::vector<Gate> gates_;
    std::deque<PropId> queue_;
    std::vector<char> in_queue_;
    std::vector<WriteRecord> writes_;
    WriteId write_counter_ = 0;
    std::uint64_t steps_total_ = 0;
    std::optional<CellId> contradiction_;
    std::function<std::size_t(std::size_t)> dequeue_order_;
    std::function<void(const TraceEvent&)> trace_;
};

}  // namespace fifth
