#include <rsph/fixed_point.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

using namespace rsph;

namespace {

constexpr double kUlp = 1.0 / 4294967296.0; // 2^-32

TEST(FixedPoint, EncodesExactGridValues) {
    EXPECT_EQ(encode(0.0).raw(), 0);
    EXPECT_EQ(encode(1.0).raw(), std::int64_t{1} << 32);
    EXPECT_EQ(encode(-2.5).raw(), -(std::int64_t{5} << 31));
    EXPECT_EQ(encode(kUlp).raw(), 1);
    EXPECT_DOUBLE_EQ(decode(encode(0.75)), 0.75);
}

TEST(FixedPoint, RoundsHalfwayCasesToEven) {
    EXPECT_EQ(encode(0.5 * kUlp).raw(), 0);
    EXPECT_EQ(encode(1.5 * kUlp).raw(), 2);
    EXPECT_EQ(encode(2.5 * kUlp).raw(), 2);
    EXPECT_EQ(encode(-1.5 * kUlp).raw(), -2);
}

TEST(FixedPoint, EncodingIsOddSymmetric) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng);
        ASSERT_EQ(encode(-x).raw(), -encode(x).raw()) << x;
    }
    for (double x : {0.5 * kUlp, 1.5 * kUlp, 3.5 * kUlp, 12345.5 * kUlp}) {
        EXPECT_EQ(encode(-x).raw(), -encode(x).raw());
    }
}

TEST(FixedPoint, RoundTripErrorIsBelowHalfUlp) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 10000; ++i) {
        const double x = u(rng);
        ASSERT_LE(std::fabs(decode(encode(x)) - x), 0.5 * kUlp);
    }
}

TEST(FixedPoint, RejectsOutOfRangeAndNonFinite) {
    EXPECT_THROW(encode(std::ldexp(1.0, 31)), OverflowError);
    EXPECT_THROW(encode(-std::ldexp(1.0, 31)), OverflowError);
    EXPECT_THROW(encode(std::numeric_limits<double>::quiet_NaN()), OverflowError);
    EXPECT_THROW(encode(std::numeric_limits<double>::infinity()), OverflowError);
    EXPECT_NO_THROW(encode(std::ldexp(1.0, 31) - 1.0));
}

TEST(FixedPoint, ForbidsMinimumRaw) {
    EXPECT_THROW(FixedValue::from_raw(std::numeric_limits<std::int64_t>::min()), OverflowError);
    const FixedValue top = FixedValue::from_raw(std::numeric_limits<std::int64_t>::max());
    EXPECT_THROW(top + FixedValue::from_raw(1), OverflowError);
    const FixedValue bottom = FixedValue::from_raw(std::numeric_limits<std::int64_t>::min() + 1);
    EXPECT_THROW(bottom + FixedValue::from_raw(-1), OverflowError);
    EXPECT_EQ((-bottom).raw(), std::numeric_limits<std::int64_t>::max());
}

TEST(FixedPoint, RequiresRoundToNearest) {
    std::fesetround(FE_UPWARD);
    EXPECT_THROW(encode(0.1), ContractViolation);
    std::fesetround(FE_TONEAREST);
    EXPECT_NO_THROW(encode(0.1));
}

TEST(FixedPoint, AdditionIsAssociativeAndExact) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const FixedValue a = encode(u(rng)), b = encode(u(rng)), c = encode(u(rng));
        ASSERT_EQ(((a + b) + c).raw(), (a + (b + c)).raw());
        ASSERT_EQ(fixed_add(a, b).raw(), a.raw() + b.raw());
        ASSERT_EQ(((a + b) - b).raw(), a.raw());
    }
}

TEST(FixedPoint, FloatingAdditionIsNotAssociative) {
    // The classic counterexample; the fixed-point version is exact.
    EXPECT_NE((0.1 + 0.2) + 0.3, 0.1 + (0.2 + 0.3));
    EXPECT_EQ(((encode(0.1) + encode(0.2)) + encode(0.3)).raw(), (encode(0.1) + (encode(0.2) + encode(0.3))).raw());
}

TEST(FixedPoint, VectorOperationsAreComponentwise) {
    const FixedVector2 a = encode(Vec2{1.25, -3.5});
    const FixedVector2 b = encode(Vec2{-0.25, 0.5});
    EXPECT_EQ(decode(a + b), (Vec2{1.0, -3.0}));
    EXPECT_EQ(decode(a - b), (Vec2{1.5, -4.0}));
    EXPECT_EQ(decode(-a), (Vec2{-1.25, 3.5}));
}

TEST(DeterministicSum, IsIndependentOfPresentationOrder) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<IndexedTerm> terms;
    for (std::size_t i = 0; i < 500; ++i) terms.push_back({i, u(rng) * std::pow(10.0, static_cast<int>(i % 17) - 8)});
    const double ref = deterministic_sum(terms);
    for (int k = 0; k < 20; ++k) {
        std::shuffle(terms.begin(), terms.end(), rng);
        ASSERT_EQ(deterministic_sum(terms), ref);
    }
}

TEST(DeterministicSum, MatchesOrderedLeftFold) {
    const std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
    EXPECT_EQ(ordered_sum(xs), ((1e16 + 1.0) - 1e16) + 1.0);
    std::vector<IndexedTerm> t{{3, 1.0}, {1, 1.0}, {2, -1e16}, {0, 1e16}};
    EXPECT_EQ(deterministic_sum(t), ordered_sum(xs));
}

} // namespace

namespace {

TEST(DeterministicSum, EmptyIsZero) {
    EXPECT_EQ(deterministic_sum({}), 0.0);
    EXPECT_EQ(ordered_sum({}), 0.0);
}

TEST(DeterministicSum, RepeatedTenthsAreReproducible) {
    std::vector<IndexedTerm> t;
    for (std::size_t i = 0; i < 10; ++i) t.push_back({i, 0.1});
    const double a = deterministic_sum(t);
    const double b = deterministic_sum(t);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b));
}

TEST(FixedPoint, AddingZeroIsIdentity) {
    const FixedValue a = encode(-12.375);
    EXPECT_EQ(fixed_add(a, FixedValue{}).raw(), a.raw());
}

} // namespace
