#include "csvm/core.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

using namespace csvm;

TEST(ShiftedHinge, DirectValues) {
    EXPECT_DOUBLE_EQ(shifted_hinge(0.0, 1.0), 0.0);
    EXPECT_NEAR(shifted_hinge(-0.2, 0.5), 0.3, 1e-15);
    EXPECT_DOUBLE_EQ(shifted_hinge(0.5, -1.0), 2.5);
}

TEST(ShiftedHinge, RejectsNonFinite) {
    EXPECT_THROW(shifted_hinge(std::numeric_limits<double>::quiet_NaN(), 0.0), std::invalid_argument);
    EXPECT_THROW(shifted_hinge(0.0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST(ShiftedHinge, DominatesIndicatorAndIsConvex) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> shift(-2.0, 2.0), margin(-5.0, 5.0), theta(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const double a = shift(rng);
        const double u1 = margin(rng), u2 = margin(rng), th = theta(rng);
        const double h1 = shifted_hinge(a, u1);
        EXPECT_GE(h1, 0.0);
        if (u1 < a) {
            EXPECT_GE(h1, 1.0);
        }
        const double mix = shifted_hinge(a, th * u1 + (1 - th) * u2);
        EXPECT_LE(mix, th * h1 + (1 - th) * shifted_hinge(a, u2) + 1e-12);
    }
}

TEST(ClassifyByMargin, Examples) {
    EXPECT_EQ(classify_by_margin(0.5, 0.2), SetLabel::PosOnly);
    EXPECT_EQ(classify_by_margin(0.0, 0.0), SetLabel::Both);
    EXPECT_EQ(classify_by_margin(-1.0, 0.2), SetLabel::NegOnly);
}

TEST(ClassifyByMargin, ClosedBandAndErrors) {
    EXPECT_EQ(classify_by_margin(0.2, 0.2), SetLabel::Both);
    EXPECT_EQ(classify_by_margin(-0.2, 0.2), SetLabel::Both);
    EXPECT_THROW(classify_by_margin(0.0, -0.1), std::invalid_argument);
}

TEST(ClassifyByMargin, PartitionsTheLine) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> f(-3.0, 3.0), e(0.0, 2.0);
    for (int t = 0; t < 1000; ++t) {
        const double v = f(rng), eps = e(rng);
        const SetLabel s = classify_by_margin(v, eps);
        const int hits = (v > eps) + (v < -eps) + (std::abs(v) <= eps);
        ASSERT_EQ(hits, 1);
        if (v > eps) EXPECT_EQ(s, SetLabel::PosOnly);
        else if (v < -eps) EXPECT_EQ(s, SetLabel::NegOnly);
        else EXPECT_EQ(s, SetLabel::Both);
    }
}

TEST(Dataset, CountsAndValidation) {
    Matrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    Dataset d(x, {1, -1, 1});
    EXPECT_EQ(d.size(), 3);
    EXPECT_EQ(d.count(1), 2);
    EXPECT_EQ(d.count(-1), 1);
    EXPECT_NO_THROW(d.require_both_classes("test"));

    EXPECT_THROW(Dataset(x, {1, 0, 1}), std::invalid_argument);
    EXPECT_THROW(Dataset(x, {1, -1}), std::invalid_argument);
    Matrix bad = x;
    bad(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Dataset(bad, {1, -1, 1}), std::invalid_argument);
    Dataset one_class(x, {1, 1, 1});
    EXPECT_THROW(one_class.require_both_classes("test"), std::invalid_argument);
}

TEST(NoncoverageTargets, Range) {
    EXPECT_NO_THROW(NoncoverageTargets(0.05, 1.0));
    EXPECT_THROW(NoncoverageTargets(0.0, 0.1), std::invalid_argument);
    EXPECT_THROW(NoncoverageTargets(0.1, 1.5), std::invalid_argument);
}
