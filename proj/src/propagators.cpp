#include "fifth/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace fifth {

namespace {

constexpr long double kInf = std::numeric_limits<long double>::infinity();

// Interval product with the 0·∞ = 0 convention.
long double mul(long double x, long double y)
{
    if (x == 0 || y == 0) return 0;
    return x * y;
}

struct Hull {
    long double lo = kInf;
    long double hi = -kInf;
    bool valid = true;

    void add(long double v)
    {
        if (std::isnan(v)) {
            valid = false;
            return;
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

bool excludes_zero(const Bounds& b)
{
    return b.lo > 0 || b.hi < 0;
}

class Outputs {
public:
    Outputs(std::size_t n, std::vector<char>* saturated) : out_(n), saturated_(saturated)
    {
        if (saturated_) saturated_->assign(n, 0);
    }

    void set(std::size_t i, PartialInfo info) { out_[i] = std::move(info); }

    void set_bounds(std::size_t i, const Bounds& b)
    {
        bool sat = false;
        out_[i] = from_bounds(b, &sat);
        if (sat && saturated_) (*saturated_)[i] = 1;
    }

    std::vector<PartialInfo> take() { return std::move(out_); }

private:
    std::vector<PartialInfo> out_;
    std::vector<char>* saturated_;
};

void sum_transfer(std::span<const PartialInfo> args, Outputs& out)
{
    auto a = bounds_of(args[0]);
    auto b = bounds_of(args[1]);
    auto c = bounds_of(args[2]);
    if (a && b) out.set_bounds(2, {a->integral && b->integral, a->lo + b->lo, a->hi + b->hi});
    if (c && b) out.set_bounds(0, {c->integral && b->integral, c->lo - b->hi, c->hi - b->lo});
    if (c && a) out.set_bounds(1, {c->integral && a->integral, c->lo - a->hi, c->hi - a->lo});
}

void quotient(std::span<const PartialInfo> args, std::size_t target, const Bounds& num, const Bounds& den, Outputs& out)
{
    if (!excludes_zero(den)) return;
    Hull h;
    for (auto n : {num.lo, num.hi})
        for (auto d : {den.lo, den.hi}) h.add(n / d);
    if (!h.valid) return;
    out.set_bounds(target, {args[target].integral(), h.lo, h.hi});
}

void product_transfer(std::span<const PartialInfo> args, Outputs& out)
{
    auto a = bounds_of(args[0]);
    auto b = bounds_of(args[1]);
    auto c = bounds_of(args[2]);
    if (a && b) {
        Hull h;
        for (auto x : {a->lo, a->hi})
            for (auto y : {b->lo, b->hi}) h.add(mul(x, y));
        out.set_bounds(2, {a->integral && b->integral, h.lo, h.hi});
    }
    if (c && b) quotient(args, 0, *c, *b, out);
    if (c && a) quotient(args, 1, *c, *a, out);
}

void less_equal_transfer(std::span<const PartialInfo> args, Outputs& out)
{
    auto a = bounds_of(args[0]);
    auto b = bounds_of(args[1]);
    if (b) out.set_bounds(0, {args[0].integral(), -kInf, b->hi});
    if (a) out.set_bounds(1, {args[1].integral(), a->lo, kInf});
}

void alldifferent_transfer(std::span<const PartialInfo> args, Outputs& out)
{
    std::vector<std::pair<std::int64_t, std::size_t>> fixed;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].is_exact()) continue;
        if (auto v = args[i].as<Exact>().value.integral()) fixed.emplace_back(*v, i);
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
        PartialInfo r = args[i];
        for (const auto& [v, j] : fixed)
            if (j != i) r = exclude(r, v);
        out.set(i, std::move(r));
    }
}

void switch_transfer(std::span<const PartialInfo> args, Outputs& out)
{
    auto t = truth(args[0]);
    if (!t) {
        out.set(3, hull(args[1], args[2]));
        return;
    }
    std::size_t branch = *t ? 1 : 2;
    out.set(3, args[branch]);
    out.set(branch, args[3]);
}

}  // namespace

const char* to_string(PropKind kind)
{
    switch (kind) {
    case PropKind::Sum: return "sum";
    case PropKind::Product: return "product";
    case PropKind::Equal: return "equal";
    case PropKind::LessEqual: return "less_equal";
    case PropKind::ElementOf: return "element_of";
    case PropKind::AllDifferent: return "alldifferent";
    case PropKind::Switch: return "switch";
    case PropKind::Constant: return "constant";
    }
    return "?";
}

std::vector<PartialInfo> transfer(PropKind kind, const PartialInfo& payload, std::span<const PartialInfo> args,
                                  std::vector<char>* saturated)
{
    Outputs out(args.size(), saturated);
    // ⊤ absorbs: keeps every transfer function monotone at the top element.
    for (const auto& a : args) {
        if (a.is_contradiction()) {
            for (std::size_t i = 0; i < args.size(); ++i) out.set(i, a);
            return out.take();
        }
    }
    switch (kind) {
    case PropKind::Sum:
        sum_transfer(args, out);
        break;
    case PropKind::Product:
        product_transfer(args, out);
        break;
    case PropKind::Equal:
        out.set(0, args[1]);
        out.set(1, args[0]);
        break;
    case PropKind::LessEqual:
        less_equal_transfer(args, out);
        break;
    case PropKind::ElementOf:
    case PropKind::Constant:
        out.set(0, payload);
        break;
    case PropKind::AllDifferent:
        alldifferent_transfer(args, out);
        break;
    case PropKind::Switch:
        switch_transfer(args, out);
        break;
    }
    return out.take();
}

}  // namespace fifth
