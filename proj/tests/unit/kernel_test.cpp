#include <rsph/kernel.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace rsph;

namespace {

double integrate_2d(const Kernel& k) {
    auto f = [&](double r) { return 2.0 * std::numbers::pi * r * k.w(r); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, k.support_radius(), 15, 1e-14);
}

class KernelFamilies : public ::testing::TestWithParam<KernelFamily> {};

TEST_P(KernelFamilies, IntegratesToOne) {
    for (double h : {0.03, 1.0, 7.5}) {
        const Kernel k(GetParam(), h);
        EXPECT_NEAR(integrate_2d(k), 1.0, 1e-12) << "h = " << h;
    }
}

TEST_P(KernelFamilies, DerivativeMatchesCentralDifference) {
    const Kernel k(GetParam(), 0.3);
    for (int i = 1; i < 100; ++i) {
        const double r = 0.3 * i / 100.0;
        const double eps = 1e-6 * 0.3;
        const double fd = (k.w(r + eps) - k.w(r - eps)) / (2.0 * eps);
        EXPECT_NEAR(k.dw(r), fd, 1e-6 * std::fabs(k.w(0.0)) / 0.3) << "r = " << r;
    }
}

TEST_P(KernelFamilies, VanishesOutsideSupportAndIsFlatAtOrigin) {
    const Kernel k(GetParam(), 2.0);
    EXPECT_EQ(k.w(2.0), 0.0);
    EXPECT_EQ(k.w(2.5), 0.0);
    EXPECT_EQ(k.dw(2.0), 0.0);
    EXPECT_EQ(k.dw(0.0), 0.0);
    EXPECT_GT(k.w(0.0), k.w(0.5));
    EXPECT_LE(k.dw(1.0), 0.0);
    EXPECT_THROW((void)k.w(-0.1), ContractViolation);
}

INSTANTIATE_TEST_SUITE_P(All, KernelFamilies, ::testing::Values(KernelFamily::wendland2, KernelFamily::cubic_spline));

TEST(Kernel, WendlandCentralValue) {
    const Kernel k(KernelFamily::wendland2, 1.0);
    EXPECT_DOUBLE_EQ(k.w(0.0), 7.0 / std::numbers::pi);
    EXPECT_DOUBLE_EQ(k.normalization(), 7.0 / std::numbers::pi);
    EXPECT_DOUBLE_EQ(k.w(0.5), 7.0 / std::numbers::pi * 0.0625 * 3.0);
}

TEST(Kernel, CubicSplineCentralValue) {
    // sigma = 10 / (7 pi H^2) with H = h/2; w(0) = sigma.
    const Kernel k(KernelFamily::cubic_spline, 2.0);
    EXPECT_DOUBLE_EQ(k.w(0.0), 10.0 / (7.0 * std::numbers::pi));
}

TEST(Kernel, RejectsNonPositiveSupport) {
    EXPECT_THROW(Kernel(KernelFamily::wendland2, 0.0), ContractViolation);
    EXPECT_THROW(Kernel(KernelFamily::wendland2, -1.0), ContractViolation);
}

TEST(Kernel, AnticlumpKernelHasHalfSpacingSupport) {
    const Kernel k = make_anticlump_kernel(0.01);
    EXPECT_DOUBLE_EQ(k.support_radius(), 0.005);
    EXPECT_EQ(k.w(0.005), 0.0);
    EXPECT_GT(k.w(0.004), 0.0);
}

TEST(Kernel, ParsesFamilyNames) {
    EXPECT_EQ(parse_kernel_family("wendland2"), KernelFamily::wendland2);
    EXPECT_EQ(parse_kernel_family("cubic_spline"), KernelFamily::cubic_spline);
    EXPECT_THROW(parse_kernel_family("gauss"), std::invalid_argument);
}

} // namespace
