#include "fifth/error.hpp"
#include "fifth/language.hpp"

#include <algorithm>

namespace fifth {

namespace {

PartialInfo literal(const Number& n)
{
    return PartialInfo::exact(n);
}

}  // namespace

Instance Instance::instantiate(std::shared_ptr<const Program> program, const std::string& name,
                               const std::vector<std::pair<std::string, PartialInfo>>& bindings)
{
    const Definition& def = program->definition(name);
    for (const auto& [n, v] : bindings)
        if (!def.declares(n)) throw StructuralError("'" + name + "' has no cell named '" + n + "'");

    Instance inst;
    inst.program_ = std::move(program);
    FrameId root = inst.add_frame(name, std::nullopt, 0, kOpenGate);
    inst.expand(root);
    inst.expansions_ = 0;
    for (const auto& [n, v] : bindings) inst.net_.write(inst.cell(root, n), v);
    return inst;
}

Instance Instance::instantiate(std::shared_ptr<const Program> program, const std::string& name,
                               const std::vector<PartialInfo>& args)
{
    const Definition& def = program->definition(name);
    if (args.size() != def.params.size())
        throw StructuralError("arity mismatch: '" + name + "' takes " + std::to_string(def.params.size()) +
                              " arguments, got " + std::to_string(args.size()));
    std::vector<std::pair<std::string, PartialInfo>> named;
    for (std::size_t i = 0; i < args.size(); ++i)
        if (!args[i].is_nothing()) named.emplace_back(def.params[i], args[i]);
    return instantiate(std::move(program), name, named);
}

const Frame& Instance::frame(FrameId id) const
{
    if (id >= frames_.size()) throw StructuralError("unknown frame id " + std::to_string(id));
    return frames_[id];
}

CellId Instance::cell(FrameId f, const std::string& name) const
{
    const Frame& fr = frame(f);
    auto it = fr.cells.find(name);
    if (it == fr.cells.end())
        throw StructuralError("frame " + std::to_string(f) + " (" + fr.definition + ") has no live cell '" + name + "'");
    return it->second;
}

FrameId Instance::add_frame(const std::string& def_name, std::optional<FrameId> parent, int call_site, GateId gate)
{
    const Definition& def = program_->definition(def_name);
    Frame f;
    f.id = static_cast<FrameId>(frames_.size());
    f.definition = def_name;
    f.parent = parent;
    f.depth = parent ? frames_[*parent].depth + 1 : 0;
    f.call_site = call_site;
    f.gate = gate;
    for (const auto& p : def.params) {
        CellId c = net_.add_cell(CellOrigin{f.id, p});
        f.cells.emplace(p, c);
        f.boundary.push_back(c);
    }
    frames_.push_back(std::move(f));
    return frames_.back().id;
}

const Frame& Instance::expand(FrameId id)
{
    const Frame& check = frame(id);
    if (check.state == ExpansionState::Summarized)
        throw StructuralError("frame " + std::to_string(id) + " is summarized; its summary is still valid");
    if (check.state == ExpansionState::Expanded)
        throw StructuralError("frame " + std::to_string(id) + " is already expanded");
    if (net_.gate_state(check.gate) == GateState::Closed) return check;

    const Definition& def = program_->definition(check.definition);
    {
        Frame& f = frames_[id];
        for (const auto& local : def.locals) {
            CellId c = net_.add_cell(CellOrigin{id, local});
            f.cells.emplace(local, c);
            f.interior.push_back(c);
        }
    }
    int call_index = 0;
    // frames_ may reallocate while elaborating nested calls; elaborate
    // through a copy and store it back.
    Frame work = frames_[id];
    elaborate(work, def.body, work.gate, call_index);
    work.state = ExpansionState::Expanded;
    frames_[id] = std::move(work);
    if (frames_[id].parent) ++expansions_;
    if (listener_) listener_(*this, id);
    return frames_[id];
}

void Instance::elaborate(Frame& f, const std::vector<Statement>& body, GateId gate, int& call_index)
{
    auto c = [&](const std::string& n) { return f.cells.at(n); };
    auto attach = [&](PropKind kind, std::vector<CellId> cells, PartialInfo payload = {}) {
        f.propagators.push_back(net_.attach(kind, std::move(cells), std::move(payload), gate, f.id));
    };
    for (const auto& s : body) {
        switch (s.kind) {
        case StmtKind::Cell:
            break;
        case StmtKind::Int:
            attach(PropKind::Constant, {c(s.names[0])}, PartialInfo::int_interval(s.numbers[0].as_int(), s.numbers[1].as_int()));
            break;
        case StmtKind::Const:
            attach(PropKind::Constant, {c(s.names[0])}, literal(s.numbers[0]));
            break;
        case StmtKind::Sum:
            attach(PropKind::Sum, {c(s.names[0]), c(s.names[1]), c(s.names[2])});
            break;
        case StmtKind::Product:
            attach(PropKind::Product, {c(s.names[0]), c(s.names[1]), c(s.names[2])});
            break;
        case StmtKind::Equal:
            attach(PropKind::Equal, {c(s.names[0]), c(s.names[1])});
            break;
        case StmtKind::LessEq:
            attach(PropKind::LessEqual, {c(s.names[0]), c(s.names[1])});
            break;
        case StmtKind::AllDiff: {
            std::vector<CellId> cells;
            for (const auto& n : s.names) cells.push_back(c(n));
            attach(PropKind::AllDifferent, std::move(cells));
            break;
        }
        case StmtKind::Choose: {
            std::vector<std::int64_t> values;
            for (const auto& v : s.numbers) values.push_back(v.as_int());
            attach(PropKind::ElementOf, {c(s.names[0])}, PartialInfo::domain(std::move(values)));
            choices_.push_back(ChoicePoint{c(s.names[0]), f.id, s.names[0], gate});
            break;
        }
        case StmtKind::If: {
            CellId cond = c(s.names[0]);
            GateId then_gate = net_.add_gate(gate, {Guard{cond, true}});
            GateId else_gate = net_.add_gate(gate, {Guard{cond, false}});
            elaborate(f, s.then_body, then_gate, call_index);
            elaborate(f, s.else_body, else_gate, call_index);
            break;
        }
        case StmtKind::Call: {
            FrameId child = add_frame(s.target, f.id, call_index++, gate);
            f.children.push_back(child);
            const auto& boundary = frames_[child].boundary;
            for (std::size_t i = 0; i < s.names.size(); ++i) attach(PropKind::Equal, {c(s.names[i]), boundary[i]});
            break;
        }
        }
    }
}

void Instance::summarize(FrameId id)
{
    const Frame& check = frame(id);
    if (check.state != ExpansionState::Expanded) throw StructuralError("only expanded frames can be summarized");
    Frame& f = frames_[id];
    for (PropId p : f.propagators) net_.detach(p);
    for (CellId c : f.interior) {
        net_.drop_cell(c);
        f.cells.erase(net_.cell(c).origin.name);
    }
    f.propagators.clear();
    f.interior.clear();
    f.state = ExpansionState::Summarized;
}

std::vector<int> Instance::frame_path(FrameId id) const
{
    std::vector<int> path;
    for (const Frame* f = &frame(id); f->parent; f = &frames_[*f->parent]) path.push_back(f->call_site);
    std::reverse(path.begin(), path.end());
    return path;
}

std::optional<FrameId> Instance::find_frame(const std::vector<int>& path) const
{
    FrameId cur = 0;
    for (int site : path) {
        const auto& kids = frames_[cur].children;
        auto it = std::find_if(kids.begin(), kids.end(), [&](FrameId k) { return frames_[k].call_site == site; });
        if (it == kids.end()) return std::nullopt;
        cur = *it;
    }
    return cur;
}

bool targets_met(const Network& net, const Targets& targets)
{
    for (CellId c : targets.cells) {
        auto w = net.content(c).width();
        if (!w || net.content(c).is_contradiction()) return false;
        if (targets.precision == 0.0 ? !net.content(c).is_exact() : *w > targets.precision) return false;
    }
    return true;
}

DemandReport demand_loop(Instance& inst, const Targets& targets, const DemandOptions& options)
{
    DemandReport report;
    Network& net = inst.network();
    while (true) {
        auto q = net.run_to_quiescence(options.step_budget - report.steps_used);
        report.steps_used += q.steps_used;
        report.quiescent = q.quiescent;
        report.contradiction = q.contradiction;
        if (q.contradiction) return report;
        if (!q.quiescent) {
            report.exhausted = true;
            return report;
        }
        report.targets_met = targets_met(net, targets);

        std::optional<FrameId> open;
        std::optional<FrameId> speculative;
        double best_bits = -1;
        bool blocked = false;
        for (const auto& f : inst.frames()) {
            if (f.state != ExpansionState::Unexpanded) continue;
            GateState g = net.gate_state(f.gate);
            if (g == GateState::Closed) continue;
            if (static_cast<std::uint64_t>(f.depth) > options.depth_budget) {
                if (g == GateState::Open || !report.targets_met) blocked = true;
                continue;
            }
            if (g == GateState::Open) {
                open = f.id;
                break;
            }
            double bits = 0;
            for (CellId c : f.boundary) bits += info_bits(net.content(c), 1024.0);
            if (bits > best_bits) {
                best_bits = bits;
                speculative = f.id;
            }
        }
        std::optional<FrameId> next = open;
        if (!next && !report.targets_met && options.speculate) next = speculative;
        if (!next) {
            report.exhausted = blocked;
            return report;
        }
        inst.expand(*next);
        ++report.expansions;
    }
}

}  // namespace fifth
