#pragma once

// Partial information about a single value. One lattice serves both as the
// "type" of a cell and as its current value: a declaration like (int x 0 9)
// is just another write into the same lattice.

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fifth {

using WriteId = std::uint64_t;

// Integer bounds at or beyond this magnitude are treated as unbounded.
inline constexpr std::int64_t kIntSaturation = std::int64_t{1} << 62;

// Tolerance for equality between exact real values.
inline constexpr double kRealTolerance = 1e-9;

class Number {
public:
    Number() = default;
    Number(std::int64_t v) : value_(v) {}
    Number(int v) : value_(static_cast<std::int64_t>(v)) {}
    Number(double v) : value_(v) {}

    bool is_int() const { return std::holds_alternative<std::int64_t>(value_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(value_); }
    double as_real() const;
    bool is_zero() const;

    // Integral value of an int, or of a real within tolerance of an integer.
    std::optional<std::int64_t> integral() const;

    friend bool operator==(const Number&, const Number&) = default;

private:
    std::variant<std::int64_t, double> value_{std::int64_t{0}};
};

// Tolerance-aware equality used by merge (ints compare exactly).
bool numbers_agree(const Number& a, const Number& b);

std::string render(const Number& n);

struct Nothing {
    friend bool operator==(const Nothing&, const Nothing&) = default;
};
struct IntInterval {
    std::int64_t lo, hi;
    friend bool operator==(const IntInterval&, const IntInterval&) = default;
};
struct RealInterval {
    double lo, hi;
    friend bool operator==(const RealInterval&, const RealInterval&) = default;
};
struct FiniteDomain {
    std::vector<std::int64_t> elements;  // sorted, distinct, size >= 2
    friend bool operator==(const FiniteDomain&, const FiniteDomain&) = default;
};
struct Exact {
    Number value;
    friend bool operator==(const Exact&, const Exact&) = default;
};
struct Contradiction {
    std::vector<WriteId> provenance;  // sorted, distinct
    friend bool operator==(const Contradiction&, const Contradiction&) = default;
};

enum class InfoKind { Nothing, IntInterval, RealInterval, FiniteDomain, Exact, Contradiction };

/// A lattice element. Always held in canonical form: the factory functions
/// normalize degenerate intervals and singleton domains to Exact, and empty
/// ranges or domains to Contradiction.
class PartialInfo {
public:
    using Variant = std::variant<Nothing, IntInterval, RealInterval, FiniteDomain, Exact, Contradiction>;

    PartialInfo() = default;

    static PartialInfo nothing() { return PartialInfo{}; }
    static PartialInfo int_interval(std::int64_t lo, std::int64_t hi);
    static PartialInfo real_interval(double lo, double hi);
    static PartialInfo domain(std::vector<std::int64_t> elements);
    static PartialInfo exact(Number value) { return PartialInfo{Exact{value}}; }
    static PartialInfo contradiction(std::vector<WriteId> provenance = {});

    InfoKind kind() const { return static_cast<InfoKind>(v_.index()); }
    bool is_nothing() const { return kind() == InfoKind::Nothing; }
    bool is_exact() const { return kind() == InfoKind::Exact; }
    bool is_contradiction() const { return kind() == InfoKind::Contradiction; }

    template <class T>
    const T& as() const { return std::get<T>(v_); }
    template <class T>
    const T* get_if() const { return std::get_if<T>(&v_); }

    const Variant& variant() const { return v_; }

    // True when every value this admits is an integer.
    bool integral() const;

    // Finite set of integer candidates, if this is an integer value with at
    // most `limit` candidates.
    std::optional<std::vector<std::int64_t>> enumerate(std::size_t limit = 4096) const;

    // Size of the admitted set (domain cardinality, int range size) or the
    // real width; nullopt for Nothing and Contradiction.
    std::optional<double> width() const;

    friend bool operator==(const PartialInfo&, const PartialInfo&) = default;

private:
    explicit PartialInfo(Variant v) : v_(std::move(v)) {}
    Variant v_{Nothing{}};
};

/// Numeric hull of a value. Integer sentinels map to infinities; long double
/// keeps every int64 exact.
struct Bounds {
    bool integral = false;
    long double lo = 0;
    long double hi = 0;
};

/// nullopt for Nothing and Contradiction.
std::optional<Bounds> bounds_of(const PartialInfo& a);

/// Inverse of bounds_of: rounds inward for integral bounds, saturating at
/// the sentinels. Sets *saturated when a finite bound had to be clamped.
PartialInfo from_bounds(const Bounds& b, bool* saturated = nullptr);

/// Least upper bound in the information order.
PartialInfo merge(const PartialInfo& a, const PartialInfo& b);

/// Same set of admitted values. Differs from == for an integer interval
/// and the domain listing all of it, and for agreeing int and real Exacts.
bool equivalent(const PartialInfo& a, const PartialInfo& b);

/// a ⊑ b, decided as merge(a, b) equivalent to b.
bool refines(const PartialInfo& a, const PartialInfo& b);

/// Greatest lower bound (the smallest description admitting both). Used by
/// propagators that must stay sound over two alternatives.
PartialInfo hull(const PartialInfo& a, const PartialInfo& b);

/// Information content relative to a reference width, clamped to [0, 64].
double info_bits(const PartialInfo& a, double reference_width);

/// Truth of a condition cell: nonzero is true. nullopt while undecided.
std::optional<bool> truth(const PartialInfo& a);

/// Trace rendering: ⊥, [lo,hi], {a,b}, =v, ⊤(ids).
std::string render(const PartialInfo& a);

/// Remove one integer from the admitted set, as precisely as the variants
/// allow (intervals wider than 4096 only lose the value at an endpoint).
PartialInfo exclude(const PartialInfo& a, std::int64_t value);

namespace testing {
// Flips the int-interval intersection when enabled; used to prove the
// self-test catches a broken merge.
void inject_merge_fault(bool enabled);
bool merge_fault_injected();
}  // namespace testing

}  // namespace fifth
