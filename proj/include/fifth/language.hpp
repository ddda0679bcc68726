#pragma once

// The s-expression constraint language: parsing, elaboration of definitions
// into network fragments, and lazy gate-driven expansion of recursive calls.

#include "fifth/network.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fifth {

enum class StmtKind { Cell, Int, Const, Sum, Product, Equal, LessEq, AllDiff, Choose, If, Call };

struct Statement {
    StmtKind kind;
    int line = 0;
    int column = 0;
    std::vector<std::string> names;  // operand names; for If the condition, for Call the arguments
    std::vector<Number> numbers;     // literal operands (int bounds, const value, choice values)
    std::string target;              // callee for Call
    std::vector<Statement> then_body;
    std::vector<Statement> else_body;
};

struct Definition {
    std::string name;
    std::vector<std::string> params;
    std::vector<Statement> body;
    std::vector<std::string> locals;  // declared non-parameter names, in declaration order
    int line = 0;

    bool declares(const std::string& n) const;
};

struct QuerySpec {
    std::string entry;
    std::vector<std::pair<std::string, Number>> bindings;
    std::vector<std::string> show;
    std::optional<std::uint64_t> depth;
    std::optional<std::uint64_t> steps;
    std::optional<std::uint64_t> nodes;
    std::optional<double> precision;
    std::optional<std::string> minimize;
};

struct Program {
    std::map<std::string, Definition> definitions;
    std::vector<std::string> order;  // definitions in source order
    std::optional<QuerySpec> query;

    const Definition& definition(const std::string& name) const;
    std::optional<std::string> main() const;
};

/// Parse and validate program text. Throws ParseError with line/column.
Program parse(const std::string& text);

enum class ExpansionState { Unexpanded, Expanded, Summarized };

struct Frame {
    FrameId id = 0;
    std::string definition;
    std::optional<FrameId> parent;
    int depth = 0;
    int call_site = 0;  // index of the call among the parent's call sites
    std::map<std::string, CellId> cells;
    ExpansionState state = ExpansionState::Unexpanded;
    GateId gate = kOpenGate;
    std::vector<CellId> boundary;  // parameter cells, in declaration order
    std::vector<CellId> interior;
    std::vector<PropId> propagators;
    std::vector<FrameId> children;
};

/// A `choose` site: the search branches on these cells.
struct ChoicePoint {
    CellId cell;
    FrameId frame;
    std::string name;
    GateId gate;
};

/// Network plus the frame tree that produced it. Copying an Instance is a
/// full snapshot.
class Instance {
public:
    using ExpansionListener = std::function<void(const Instance&, FrameId)>;

    /// Root frame expanded, bindings written into its cells by name.
    /// Throws StructuralError for undefined entries or unknown binding names.
    static Instance instantiate(std::shared_ptr<const Program> program, const std::string& name,
                                const std::vector<std::pair<std::string, PartialInfo>>& bindings = {});
    /// Positional form: one value per parameter (Nothing to leave unbound).
    static Instance instantiate(std::shared_ptr<const Program> program, const std::string& name,
                                const std::vector<PartialInfo>& args);

    const Program& program() const { return *program_; }
    std::shared_ptr<const Program> program_ptr() const { return program_; }
    Network& network() { return net_; }
    const Network& network() const { return net_; }

    const std::vector<Frame>& frames() const { return frames_; }
    const Frame& frame(FrameId id) const;
    const Frame& root() const { return frames_.front(); }
    CellId cell(FrameId frame, const std::string& name) const;
    CellId root_cell(const std::string& name) const { return cell(0, name); }

    GateState frame_gate(FrameId id) const { return net_.gate_state(frame(id).gate); }

    /// Attach the body of an unexpanded frame. No-op while the call-site gate
    /// is refuted. Throws StructuralError for expanded or summarized frames.
    const Frame& expand(FrameId id);

    /// Drop interior cells and propagators; the frame keeps its boundary.
    void summarize(FrameId id);

    const std::vector<ChoicePoint>& choices() const { return choices_; }
    std::uint64_t expansions() const { return expansions_; }

    /// Call-site indices from the root down to the frame; stable across
    /// instantiations of the same program.
    std::vector<int> frame_path(FrameId id) const;
    std::optional<FrameId> find_frame(const std::vector<int>& path) const;

    void set_expansion_listener(ExpansionListener listener) { listener_ = std::move(listener); }

private:
    Instance() = default;
    FrameId add_frame(const std::string& def, std::optional<FrameId> parent, int call_site, GateId gate);
    void elaborate(Frame& frame, const std::vector<Statement>& body, GateId gate, int& call_index);

    std::shared_ptr<const Program> program_;
    Network net_;
    std::vector<Frame> frames_;
    std::vector<ChoicePoint> choices_;
    std::uint64_t expansions_ = 0;
    ExpansionListener listener_;
};

struct Targets {
    std::vector<CellId> cells;
    double precision = 0.0;
};

/// True when every target is within `precision` width (Exact when 0).
bool targets_met(const Network& net, const Targets& targets);

struct DemandReport {
    std::uint64_t steps_used = 0;
    std::uint64_t expansions = 0;
    bool quiescent = false;
    std::optional<CellId> contradiction;
    bool targets_met = false;
    bool exhausted = false;  // stopped by the step or depth budget
};

struct DemandOptions {
    std::uint64_t depth_budget = 10'000;
    std::uint64_t step_budget = 1'000'000;
    bool speculate = true;  // expand frames behind undecided gates
};

/// Alternate quiescence with expansion. Frames behind open gates are always
/// expanded (within the depth budget); once none remain and targets are
/// unmet, the undecided frame whose boundary carries the most information is
/// expanded speculatively.
DemandReport demand_loop(Instance& instance, const Targets& targets, const DemandOptions& options);

}  // namespace fifth
