#include "fifth/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iterator>
#include <limits>

namespace fifth {

namespace {

std::atomic<bool> g_merge_fault{false};

constexpr long double kInf = std::numeric_limits<long double>::infinity();

std::int64_t clamp_int(std::int64_t v)
{
    return std::clamp(v, -kIntSaturation, kIntSaturation);
}

// Smallest integer >= x, tolerant of float noise just above an integer.
std::int64_t ceil_to_int(long double x)
{
    if (std::isnan(x) || x <= static_cast<long double>(-kIntSaturation)) return -kIntSaturation;
    if (x >= static_cast<long double>(kIntSaturation)) return kIntSaturation;
    return static_cast<std::int64_t>(std::ceil(x - kRealTolerance));
}

std::int64_t floor_to_int(long double x)
{
    if (std::isnan(x) || x >= static_cast<long double>(kIntSaturation)) return kIntSaturation;
    if (x <= static_cast<long double>(-kIntSaturation)) return -kIntSaturation;
    return static_cast<std::int64_t>(std::floor(x + kRealTolerance));
}

std::vector<WriteId> union_ids(const std::vector<WriteId>& a, const std::vector<WriteId>& b)
{
    std::vector<WriteId> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

template <class Pred>
PartialInfo filter_domain(const FiniteDomain& d, Pred keep)
{
    std::vector<std::int64_t> out;
    for (auto e : d.elements)
        if (keep(e)) out.push_back(e);
    return PartialInfo::domain(std::move(out));
}

bool in_real(const RealInterval& r, long double v)
{
    return v >= r.lo - kRealTolerance && v <= r.hi + kRealTolerance;
}

PartialInfo exact_in_int(const IntInterval& r, const Number& v)
{
    auto i = v.integral();
    if (i && *i >= r.lo && *i <= r.hi) return PartialInfo::exact(*i);
    return PartialInfo::contradiction();
}

PartialInfo exact_in_domain(const FiniteDomain& d, const Number& v)
{
    auto i = v.integral();
    if (i && std::binary_search(d.elements.begin(), d.elements.end(), *i)) return PartialInfo::exact(*i);
    return PartialInfo::contradiction();
}

// merge with a.kind() <= b.kind(), neither Nothing nor Contradiction.
PartialInfo merge_ordered(const PartialInfo& a, const PartialInfo& b)
{
    switch (a.kind()) {
    case InfoKind::IntInterval: {
        const auto& x = a.as<IntInterval>();
        switch (b.kind()) {
        case InfoKind::IntInterval: {
            const auto& y = b.as<IntInterval>();
            if (g_merge_fault.load(std::memory_order_relaxed))
                return PartialInfo::int_interval(std::min(x.lo, y.lo), std::max(x.hi, y.hi));
            return PartialInfo::int_interval(std::max(x.lo, y.lo), std::min(x.hi, y.hi));
        }
        case InfoKind::RealInterval: {
            const auto& y = b.as<RealInterval>();
            return PartialInfo::int_interval(std::max(x.lo, ceil_to_int(y.lo)), std::min(x.hi, floor_to_int(y.hi)));
        }
        case InfoKind::FiniteDomain:
            return filter_domain(b.as<FiniteDomain>(), [&](std::int64_t e) { return e >= x.lo && e <= x.hi; });
        case InfoKind::Exact:
            return exact_in_int(x, b.as<Exact>().value);
        default:
            break;
        }
        break;
    }
    case InfoKind::RealInterval: {
        const auto& x = a.as<RealInterval>();
        switch (b.kind()) {
        case InfoKind::RealInterval: {
            const auto& y = b.as<RealInterval>();
            return PartialInfo::real_interval(std::max(x.lo, y.lo), std::min(x.hi, y.hi));
        }
        case InfoKind::FiniteDomain:
            return filter_domain(b.as<FiniteDomain>(), [&](std::int64_t e) { return in_real(x, e); });
        case InfoKind::Exact: {
            const auto& v = b.as<Exact>().value;
            return in_real(x, v.as_real()) ? b : PartialInfo::contradiction();
        }
        default:
            break;
        }
        break;
    }
    case InfoKind::FiniteDomain: {
        const auto& x = a.as<FiniteDomain>();
        if (b.kind() == InfoKind::FiniteDomain) {
            const auto& y = b.as<FiniteDomain>();
            std::vector<std::int64_t> out;
            std::set_intersection(x.elements.begin(), x.elements.end(), y.elements.begin(), y.elements.end(),
                                  std::back_inserter(out));
            return PartialInfo::domain(std::move(out));
        }
        if (b.kind() == InfoKind::Exact) return exact_in_domain(x, b.as<Exact>().value);
        break;
    }
    case InfoKind::Exact: {
        const auto& x = a.as<Exact>().value;
        const auto& y = b.as<Exact>().value;
        if (!numbers_agree(x, y)) return PartialInfo::contradiction();
        if (x.is_int()) return a;
        if (y.is_int()) return b;
        return x.as_real() <= y.as_real() ? a : b;
    }
    default:
        break;
    }
    return PartialInfo::contradiction();
}

std::string render_bound(std::int64_t v)
{
    if (v <= -kIntSaturation) return "-inf";
    if (v >= kIntSaturation) return "inf";
    return std::to_string(v);
}

}  // namespace

double Number::as_real() const
{
    if (is_int()) return static_cast<double>(std::get<std::int64_t>(value_));
    return std::get<double>(value_);
}

bool Number::is_zero() const
{
    if (is_int()) return as_int() == 0;
    return std::abs(as_real()) <= kRealTolerance;
}

std::optional<std::int64_t> Number::integral() const
{
    if (is_int()) return as_int();
    double r = std::get<double>(value_);
    if (!std::isfinite(r) || std::abs(r) >= static_cast<double>(kIntSaturation)) return std::nullopt;
    double k = std::round(r);
    if (std::abs(r - k) > kRealTolerance) return std::nullopt;
    return static_cast<std::int64_t>(k);
}

bool numbers_agree(const Number& a, const Number& b)
{
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return std::abs(a.as_real() - b.as_real()) <= kRealTolerance;
}

std::string render(const Number& n)
{
    if (n.is_int()) return std::to_string(n.as_int());
    double r = n.as_real();
    if (std::isinf(r)) return r < 0 ? "-inf" : "inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, r);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

PartialInfo PartialInfo::int_interval(std::int64_t lo, std::int64_t hi)
{
    lo = clamp_int(lo);
    hi = clamp_int(hi);
    if (lo > hi) return contradiction();
    if (lo == hi) return exact(lo);
    return PartialInfo{IntInterval{lo, hi}};
}

PartialInfo PartialInfo::real_interval(double lo, double hi)
{
    if (std::isnan(lo)) lo = -std::numeric_limits<double>::infinity();
    if (std::isnan(hi)) hi = std::numeric_limits<double>::infinity();
    if (std::isinf(lo) && lo < 0 && std::isinf(hi) && hi > 0) return nothing();
    if (lo > hi + kRealTolerance) return contradiction();
    if (hi - lo <= kRealTolerance) return exact(lo == hi ? lo : lo + (hi - lo) / 2);
    return PartialInfo{RealInterval{lo, hi}};
}

PartialInfo PartialInfo::domain(std::vector<std::int64_t> elements)
{
    std::sort(elements.begin(), elements.end());
    elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
    if (elements.empty()) return contradiction();
    if (elements.size() == 1) return exact(elements.front());
    return PartialInfo{FiniteDomain{std::move(elements)}};
}

PartialInfo PartialInfo::contradiction(std::vector<WriteId> provenance)
{
    std::sort(provenance.begin(), provenance.end());
    provenance.erase(std::unique(provenance.begin(), provenance.end()), provenance.end());
    return PartialInfo{Contradiction{std::move(provenance)}};
}

bool PartialInfo::integral() const
{
    switch (kind()) {
    case InfoKind::IntInterval:
    case InfoKind::FiniteDomain:
        return true;
    case InfoKind::Exact:
        return as<Exact>().value.is_int();
    default:
        return false;
    }
}

std::optional<std::vector<std::int64_t>> PartialInfo::enumerate(std::size_t limit) const
{
    switch (kind()) {
    case InfoKind::Exact: {
        auto i = as<Exact>().value.integral();
        if (!i) return std::nullopt;
        return std::vector<std::int64_t>{*i};
    }
    case InfoKind::FiniteDomain:
        if (as<FiniteDomain>().elements.size() > limit) return std::nullopt;
        return as<FiniteDomain>().elements;
    case InfoKind::IntInterval: {
        const auto& r = as<IntInterval>();
        if (r.lo <= -kIntSaturation || r.hi >= kIntSaturation) return std::nullopt;
        if (static_cast<std::uint64_t>(r.hi - r.lo) >= limit) return std::nullopt;
        std::vector<std::int64_t> out;
        for (auto v = r.lo; v <= r.hi; ++v) out.push_back(v);
        return out;
    }
    default:
        return std::nullopt;
    }
}

std::optional<double> PartialInfo::width() const
{
    switch (kind()) {
    case InfoKind::IntInterval: {
        const auto& r = as<IntInterval>();
        if (r.lo <= -kIntSaturation || r.hi >= kIntSaturation) return std::numeric_limits<double>::infinity();
        return static_cast<double>(r.hi - r.lo);
    }
    case InfoKind::RealInterval:
        return as<RealInterval>().hi - as<RealInterval>().lo;
    case InfoKind::FiniteDomain:
        return static_cast<double>(as<FiniteDomain>().elements.back() - as<FiniteDomain>().elements.front());
    case InfoKind::Exact:
        return 0.0;
    default:
        return std::nullopt;
    }
}

std::optional<Bounds> bounds_of(const PartialInfo& a)
{
    auto lift = [](std::int64_t v) -> long double {
        if (v <= -kIntSaturation) return -kInf;
        if (v >= kIntSaturation) return kInf;
        return static_cast<long double>(v);
    };
    switch (a.kind()) {
    case InfoKind::IntInterval:
        return Bounds{true, lift(a.as<IntInterval>().lo), lift(a.as<IntInterval>().hi)};
    case InfoKind::RealInterval:
        return Bounds{false, a.as<RealInterval>().lo, a.as<RealInterval>().hi};
    case InfoKind::FiniteDomain: {
        const auto& e = a.as<FiniteDomain>().elements;
        return Bounds{true, lift(e.front()), lift(e.back())};
    }
    case InfoKind::Exact: {
        const auto& v = a.as<Exact>().value;
        if (v.is_int()) return Bounds{true, lift(v.as_int()), lift(v.as_int())};
        return Bounds{false, v.as_real(), v.as_real()};
    }
    default:
        return std::nullopt;
    }
}

PartialInfo from_bounds(const Bounds& b, bool* saturated)
{
    if (b.integral) {
        const auto sat = static_cast<long double>(kIntSaturation);
        if (saturated && ((std::isfinite(b.lo) && std::abs(b.lo) >= sat) || (std::isfinite(b.hi) && std::abs(b.hi) >= sat)))
            *saturated = true;
        return PartialInfo::int_interval(ceil_to_int(b.lo), floor_to_int(b.hi));
    }
    return PartialInfo::real_interval(static_cast<double>(b.lo), static_cast<double>(b.hi));
}

PartialInfo merge(const PartialInfo& a, const PartialInfo& b)
{
    const PartialInfo* x = &a;
    const PartialInfo* y = &b;
    if (x->kind() > y->kind()) std::swap(x, y);
    if (x->is_nothing()) return *y;
    if (y->is_contradiction()) {
        if (x->is_contradiction())
            return PartialInfo::contradiction(union_ids(x->as<Contradiction>().provenance, y->as<Contradiction>().provenance));
        return *y;
    }
    return merge_ordered(*x, *y);
}

bool equivalent(const PartialInfo& a, const PartialInfo& b)
{
    if (a == b) return true;
    if (a.is_exact() && b.is_exact()) return numbers_agree(a.as<Exact>().value, b.as<Exact>().value);
    // Otherwise the only two spellings of one set: an interval and a domain
    // listing every integer in it.
    const IntInterval* i = a.get_if<IntInterval>();
    const FiniteDomain* d = b.get_if<FiniteDomain>();
    if (!i) {
        i = b.get_if<IntInterval>();
        d = a.get_if<FiniteDomain>();
    }
    if (!i || !d) return false;
    return d->elements.front() == i->lo && d->elements.back() == i->hi &&
           static_cast<std::uint64_t>(i->hi - i->lo) + 1 == d->elements.size();
}

bool refines(const PartialInfo& a, const PartialInfo& b)
{
    return equivalent(merge(a, b), b);
}

PartialInfo hull(const PartialInfo& a, const PartialInfo& b)
{
    if (a.is_contradiction()) return b;
    if (b.is_contradiction()) return a;
    if (a.is_nothing() || b.is_nothing()) return PartialInfo::nothing();
    // Small integer sets are joined as sets whatever their spelling, so the
    // result depends only on the admitted values.
    auto sa = a.enumerate();
    auto sb = b.enumerate();
    if (sa && sb) {
        std::vector<std::int64_t> out;
        std::set_union(sa->begin(), sa->end(), sb->begin(), sb->end(), std::back_inserter(out));
        return PartialInfo::domain(std::move(out));
    }
    auto ba = *bounds_of(a);
    auto bb = *bounds_of(b);
    return from_bounds(Bounds{ba.integral && bb.integral, std::min(ba.lo, bb.lo), std::max(ba.hi, bb.hi)});
}

double info_bits(const PartialInfo& a, double reference_width)
{
    double size = 0;
    switch (a.kind()) {
    case InfoKind::Nothing:
        return 0.0;
    case InfoKind::Exact:
    case InfoKind::Contradiction:
        return 64.0;
    case InfoKind::IntInterval:
        size = *a.width() + 1.0;
        break;
    case InfoKind::RealInterval:
        size = *a.width();
        break;
    case InfoKind::FiniteDomain:
        size = static_cast<double>(a.as<FiniteDomain>().elements.size());
        break;
    }
    if (!(size > 0) || std::isinf(size)) return size > 0 ? 0.0 : 64.0;
    return std::clamp(std::log2(reference_width / size), 0.0, 64.0);
}

std::optional<bool> truth(const PartialInfo& a)
{
    switch (a.kind()) {
    case InfoKind::Exact:
        return !a.as<Exact>().value.is_zero();
    case InfoKind::IntInterval:
    case InfoKind::RealInterval: {
        auto b = *bounds_of(a);
        if (b.lo > 0 || b.hi < 0) return true;
        return std::nullopt;
    }
    case InfoKind::FiniteDomain: {
        const auto& e = a.as<FiniteDomain>().elements;
        if (!std::binary_search(e.begin(), e.end(), 0)) return true;
        return std::nullopt;
    }
    default:
        return std::nullopt;
    }
}

std::string render(const PartialInfo& a)
{
    switch (a.kind()) {
    case InfoKind::Nothing:
        return "⊥";
    case InfoKind::IntInterval:
        return "[" + render_bound(a.as<IntInterval>().lo) + "," + render_bound(a.as<IntInterval>().hi) + "]";
    case InfoKind::RealInterval:
        return "[" + render(Number{a.as<RealInterval>().lo}) + "," + render(Number{a.as<RealInterval>().hi}) + "]";
    case InfoKind::FiniteDomain: {
        std::string s = "{";
        const auto& e = a.as<FiniteDomain>().elements;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(e[i]);
        }
        return s + "}";
    }
    case InfoKind::Exact:
        return "=" + render(a.as<Exact>().value);
    case InfoKind::Contradiction: {
        std::string s = "⊤(";
        const auto& p = a.as<Contradiction>().provenance;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(p[i]);
        }
        return s + ")";
    }
    }
    return "?";
}

PartialInfo exclude(const PartialInfo& a, std::int64_t value)
{
    switch (a.kind()) {
    case InfoKind::FiniteDomain:
        return filter_domain(a.as<FiniteDomain>(), [&](std::int64_t e) { return e != value; });
    case InfoKind::Exact: {
        auto i = a.as<Exact>().value.integral();
        if (i && *i == value) return PartialInfo::contradiction();
        return a;
    }
    case InfoKind::IntInterval: {
        const auto& r = a.as<IntInterval>();
        if (value == r.lo) return PartialInfo::int_interval(r.lo + 1, r.hi);
        if (value == r.hi) return PartialInfo::int_interval(r.lo, r.hi - 1);
        if (value < r.lo || value > r.hi) return a;
        auto values = a.enumerate();
        if (!values) return a;
        std::erase(*values, value);
        return PartialInfo::domain(std::move(*values));
    }
    default:
        return a;
    }
}

namespace testing {
void inject_merge_fault(bool enabled)
{
    g_merge_fault.store(enabled);
}
bool merge_fault_injected()
{
    return g_merge_fault.load();
}
}  // namespace testing

}  // namespace fifth
