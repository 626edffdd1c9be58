#pragma once

// Q31.32 fixed-point state variables. Addition is exact integer addition, so
// any sequence of increments can be undone bit for bit; this is what makes the
// Verlet scheme globally reversible once velocities are negated.

#include <rsph/error.hpp>
#include <rsph/vec2.hpp>

#include <algorithm>
#include <bit>
#include <cfenv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rsph {

class FixedValue {
public:
    static constexpr int kFracBits = 32;
    static constexpr double kScale = 4294967296.0;    // 2^32
    static constexpr double kInvScale = 1.0 / kScale; // exact
    static constexpr double kLimit = 2147483648.0;    // 2^31, exclusive bound on |value|
    static constexpr std::int64_t kForbiddenRaw = std::numeric_limits<std::int64_t>::min();

    constexpr FixedValue() = default;

    static constexpr FixedValue from_raw(std::int64_t raw) {
        if (raw == kForbiddenRaw) {
            throw OverflowError("fixed-point raw value INT64_MIN is outside the valid domain");
        }
        return FixedValue(raw);
    }

    constexpr std::int64_t raw() const noexcept { return raw_; }

    /// Exact for |raw| < 2^53; beyond that the int->double conversion rounds
    /// to nearest-even, which is still sign-symmetric.
    double to_double() const noexcept { return static_cast<double>(raw_) * kInvScale; }

    friend FixedValue operator+(FixedValue a, FixedValue b) {
        std::int64_t out = 0;
        if (__builtin_add_overflow(a.raw_, b.raw_, &out) || out == kForbiddenRaw) {
            throw OverflowError("fixed-point addition overflow");
        }
        return FixedValue(out);
    }

    friend FixedValue operator-(FixedValue a, FixedValue b) { return a + (-b); }

    // raw_ is never INT64_MIN, so negation is total.
    friend constexpr FixedValue operator-(FixedValue a) noexcept { return FixedValue(-a.raw_); }

    FixedValue& operator+=(FixedValue o) { return *this = *this + o; }
    FixedValue& operator-=(FixedValue o) { return *this = *this - o; }

    friend constexpr auto operator<=>(const FixedValue&, const FixedValue&) = default;

private:
    constexpr explicit FixedValue(std::int64_t raw) noexcept : raw_(raw) {}

    std::int64_t raw_ = 0;
};

/// Nearest Q31.32 value, ties to even. Throws on NaN, infinity or |x| >= 2^31.
inline FixedValue encode(double x) {
    if (!std::isfinite(x)) {
        throw OverflowError("cannot encode non-finite value " + std::to_string(x));
    }
    if (!(std::fabs(x) < FixedValue::kLimit)) {
        throw OverflowError("value " + std::to_string(x) + " exceeds fixed-point range 2^31");
    }
    // Scaling by a power of two is exact; the only rounding is the one below.
    const double scaled = x * FixedValue::kScale;
    if (std::fegetround() != FE_TONEAREST) {
        throw ContractViolation("encode requires the FE_TONEAREST rounding mode");
    }
    return FixedValue::from_raw(std::llrint(scaled));
}

inline double decode(FixedValue v) noexcept { return v.to_double(); }

inline FixedValue fixed_add(FixedValue a, FixedValue b) { return a + b; }

struct FixedVector2 {
    FixedValue x;
    FixedValue y;

    friend FixedVector2 operator+(const FixedVector2& a, const FixedVector2& b) {
        return {a.x + b.x, a.y + b.y};
    }
    friend FixedVector2 operator-(const FixedVector2& a, const FixedVector2& b) {
        return {a.x - b.x, a.y - b.y};
    }
    friend constexpr FixedVector2 operator-(const FixedVector2& a) noexcept { return {-a.x, -a.y}; }
    friend constexpr bool operator==(const FixedVector2&, const FixedVector2&) = default;
};

inline FixedVector2 encode(const Vec2& v) { return {encode(v.x), encode(v.y)}; }

inline Vec2 decode(const FixedVector2& v) noexcept { return {decode(v.x), decode(v.y)}; }

/// Left-to-right floating-point sum in the given order.
inline double ordered_sum(std::span<const double> terms) noexcept {
    double s = 0.0;
    for (double t : terms) {
        s += t;
    }
    return s;
}

struct IndexedTerm {
    std::size_t index;
    double value;
};

/// Sum in ascending index order; the result depends only on the set of
/// (index, value) pairs, never on the order they were produced in.
inline double deterministic_sum(std::span<const IndexedTerm> terms) {
    std::vector<IndexedTerm> sorted(terms.begin(), terms.end());
    std::sort(sorted.begin(), sorted.end(), [](const IndexedTerm& a, const IndexedTerm& b) {
        if (a.index != b.index) {
            return a.index < b.index;
        }
        return std::bit_cast<std::uint64_t>(a.value) < std::bit_cast<std::uint64_t>(b.value);
    });
    double s = 0.0;
    for (const auto& t : sorted) {
        s += t.value;
    }
    return s;
}

} // namespace rsph
