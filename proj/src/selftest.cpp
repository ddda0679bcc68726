#include "fifth/selftest.hpp"

#include "fifth/autoenc.hpp"

#include <algorithm>
#include <sstream>

namespace fifth {

namespace {

double grid_real(SplitMix64& rng)
{
    return static_cast<double>(rng.uniform_int(-32, 32)) * 0.25;
}

std::string describe(std::initializer_list<const PartialInfo*> values)
{
    std::string s;
    for (const auto* v : values) {
        if (!s.empty()) s += ", ";
        s += render(*v);
    }
    return s;
}

void note_failure(LawReport& r, const std::string& what)
{
    if (r.failures++ == 0) r.first_failure = what;
}

std::size_t arity_of(PropKind kind, SplitMix64& rng)
{
    switch (kind) {
    case PropKind::Sum:
    case PropKind::Product:
        return 3;
    case PropKind::Equal:
    case PropKind::LessEqual:
        return 2;
    case PropKind::ElementOf:
    case PropKind::Constant:
        return 1;
    case PropKind::AllDifferent:
        return static_cast<std::size_t>(rng.uniform_int(2, 5));
    case PropKind::Switch:
        return 4;
    }
    return 1;
}

constexpr PropKind kCatalog[] = {PropKind::Sum,          PropKind::Product, PropKind::Equal,   PropKind::LessEqual,
                                 PropKind::ElementOf,    PropKind::AllDifferent, PropKind::Switch, PropKind::Constant};

PartialInfo random_int_info(SplitMix64& rng)
{
    // Ranges overlap around zero so that most networks stay consistent and
    // propagate for a while before settling.
    if (rng.bernoulli(0.3)) {
        std::vector<std::int64_t> e{0};
        auto n = rng.uniform_int(2, 12);
        for (int i = 0; i < n; ++i) e.push_back(rng.uniform_int(-12, 12));
        return PartialInfo::domain(std::move(e));
    }
    return PartialInfo::int_interval(rng.uniform_int(-20, -1), rng.uniform_int(1, 20));
}

}  // namespace

PartialInfo random_info(SplitMix64& rng, bool allow_contradiction)
{
    switch (rng.uniform_int(0, allow_contradiction ? 6 : 5)) {
    case 0:
        return PartialInfo::nothing();
    case 1: {
        if (rng.bernoulli(0.15)) return PartialInfo::int_interval(-kIntSaturation, rng.uniform_int(-8, 8));
        if (rng.bernoulli(0.15)) return PartialInfo::int_interval(rng.uniform_int(-8, 8), kIntSaturation);
        auto lo = rng.uniform_int(-8, 8);
        return PartialInfo::int_interval(lo, lo + rng.uniform_int(0, 10));
    }
    case 2: {
        double lo = grid_real(rng);
        return PartialInfo::real_interval(lo, lo + static_cast<double>(rng.uniform_int(0, 24)) * 0.25);
    }
    case 3: {
        std::vector<std::int64_t> e;
        auto n = rng.uniform_int(1, 6);
        for (int i = 0; i < n; ++i) e.push_back(rng.uniform_int(-8, 8));
        return PartialInfo::domain(std::move(e));
    }
    case 4:
        return PartialInfo::exact(rng.uniform_int(-8, 8));
    case 5:
        return PartialInfo::exact(static_cast<double>(rng.uniform_int(-16, 16)) * 0.5);
    default: {
        std::vector<WriteId> ids;
        auto n = rng.uniform_int(0, 3);
        for (int i = 0; i < n; ++i) ids.push_back(static_cast<WriteId>(rng.uniform_int(0, 6)));
        return PartialInfo::contradiction(std::move(ids));
    }
    }
}

PartialInfo random_refinement(SplitMix64& rng, const PartialInfo& a)
{
    if (rng.bernoulli(0.2)) return a;
    for (int attempt = 0; attempt < 12; ++attempt) {
        PartialInfo r = merge(a, random_info(rng, false));
        if (!r.is_contradiction()) return r;
    }
    return a;
}

LawReport check_lattice_laws(std::size_t triples, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    LawReport r;
    for (std::size_t i = 0; i < triples; ++i) {
        PartialInfo a = random_info(rng), b = random_info(rng), c = random_info(rng);
        ++r.checked;
        if (merge(a, a) != a) note_failure(r, "idempotence: " + describe({&a}));
        PartialInfo ab = merge(a, b);
        if (ab != merge(b, a)) note_failure(r, "commutativity: " + describe({&a, &b}));
        if (merge(ab, c) != merge(a, merge(b, c))) note_failure(r, "associativity: " + describe({&a, &b, &c}));
        if (!refines(a, ab) || !refines(b, ab)) note_failure(r, "upper bound: " + describe({&a, &b, &ab}));
    }
    return r;
}

LawReport check_transfer_monotonicity(std::size_t trials, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    LawReport r;
    for (PropKind kind : kCatalog) {
        for (std::size_t t = 0; t < trials; ++t) {
            std::size_t n = arity_of(kind, rng);
            std::vector<PartialInfo> args(n), refined(n);
            for (std::size_t i = 0; i < n; ++i) {
                args[i] = random_info(rng, false);
                refined[i] = random_refinement(rng, args[i]);
            }
            PartialInfo payload = random_info(rng, false);
            auto before = transfer(kind, payload, args);
            auto after = transfer(kind, payload, refined);
            ++r.checked;
            for (std::size_t i = 0; i < n; ++i) {
                if (!refines(before[i], after[i])) {
                    std::ostringstream os;
                    os << to_string(kind) << " output " << i << ": " << render(before[i]) << " -> " << render(after[i])
                       << " for args";
                    for (std::size_t k = 0; k < n; ++k) os << ' ' << render(args[k]) << "=>" << render(refined[k]);
                    note_failure(r, os.str());
                    break;
                }
            }
        }
    }
    return r;
}

Network NetworkRecipe::build() const
{
    Network net;
    for (std::size_t i = 0; i < cells; ++i) net.add_cell(CellOrigin{kNoFrame, "c" + std::to_string(i)});
    for (const auto& p : props) {
        GateId gate = p.guards.empty() ? kOpenGate : net.add_gate(kOpenGate, p.guards);
        net.attach(p.kind, p.cells, p.payload, gate);
    }
    for (const auto& [c, v] : writes) net.write(c, v);
    return net;
}

NetworkRecipe random_network(SplitMix64& rng, const RandomNetworkSpec& spec)
{
    NetworkRecipe recipe;
    recipe.cells = static_cast<std::size_t>(rng.uniform_int(3, static_cast<std::int64_t>(spec.max_cells)));
    auto n_props = rng.uniform_int(
        1, std::min(static_cast<std::int64_t>(spec.max_propagators), static_cast<std::int64_t>(recipe.cells * 3 / 2)));
    auto any_cell = [&] { return static_cast<CellId>(rng.uniform_int(0, static_cast<std::int64_t>(recipe.cells) - 1)); };
    // Every cell is typed with a bounded integer range, so descending
    // chains are finite and every run reaches quiescence.
    for (std::size_t c = 0; c < recipe.cells; ++c) recipe.writes.emplace_back(static_cast<CellId>(c), random_int_info(rng));
    for (std::int64_t i = 0; i < n_props; ++i) {
        NetworkRecipe::Prop p;
        p.kind = kCatalog[rng.uniform_int(0, 7)];
        std::size_t n = arity_of(p.kind, rng);
        for (std::size_t k = 0; k < n; ++k) p.cells.push_back(any_cell());
        if (p.kind == PropKind::Constant || p.kind == PropKind::ElementOf) p.payload = random_int_info(rng);
        if (rng.bernoulli(0.3)) {
            auto guards = rng.uniform_int(1, 2);
            for (int g = 0; g < guards; ++g) p.guards.push_back(Guard{any_cell(), rng.bernoulli(0.5)});
        }
        recipe.props.push_back(std::move(p));
    }
    return recipe;
}

LawReport check_confluence(std::size_t networks, std::size_t permutations, std::uint64_t seed)
{
    SplitMix64 rng(seed);
    LawReport r;
    constexpr std::uint64_t kBudget = 1'000'000;
    for (std::size_t n = 0; n < networks; ++n) {
        NetworkRecipe recipe = random_network(rng);
        Network reference = recipe.build();
        auto ref_report = reference.run_to_quiescence(kBudget);
        for (std::size_t p = 0; p < permutations; ++p) {
            Network net = recipe.build();
            SplitMix64 order(rng.next());
            net.set_dequeue_order([order](std::size_t len) mutable { return static_cast<std::size_t>(order.next() % len); });
            auto rep = net.run_to_quiescence(kBudget);
            ++r.checked;
            if (!rep.quiescent || !ref_report.quiescent) {
                note_failure(r, "network " + std::to_string(n) + " did not reach quiescence");
                continue;
            }
            bool ref_top = ref_report.contradiction.has_value();
            bool top = rep.contradiction.has_value();
            if (ref_top != top) {
                note_failure(r, "network " + std::to_string(n) + ": contradiction under one order only");
                continue;
            }
            if (top) continue;
            for (CellId c = 0; c < recipe.cells; ++c) {
                if (!equivalent(net.content(c), reference.content(c))) {
                    note_failure(r, "network " + std::to_string(n) + " cell " + std::to_string(c) + ": " +
                                        render(reference.content(c)) + " vs " + render(net.content(c)));
                    break;
                }
            }
        }
    }
    return r;
}

std::vector<SuiteResult> run_self_test(const SelfTestOptions& options)
{
    std::vector<SuiteResult> out;
    bool previous_fault = testing::merge_fault_injected();
    testing::inject_merge_fault(options.inject_merge_fault);
    auto law = [&](const std::string& name, const LawReport& r) {
        SuiteResult s{name, r.failures == 0, std::to_string(r.checked) + " checked, " + std::to_string(r.failures) + " failed"};
        if (r.failures) s.detail += "; first: " + r.first_failure;
        out.push_back(std::move(s));
    };
    law("lattice-laws", check_lattice_laws(2000, options.seed));
    law("transfer-monotonicity", check_transfer_monotonicity(200, options.seed + 1));
    law("confluence", check_confluence(20, 5, options.seed + 2));
    testing::inject_merge_fault(previous_fault);

    GradientSurvey g = survey_gradients(5, options.seed + 3);
    out.push_back(SuiteResult{"gradient-check", g.max_relative_error < 1e-4,
                              "max relative error " + std::to_string(g.max_relative_error) + " over " +
                                  std::to_string(g.configurations) + " configurations"});
    return out;
}

}  // namespace fifth
