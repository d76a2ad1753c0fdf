#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "riskdiff/errors.hpp"
#include "riskdiff/score_engine.hpp"

namespace riskdiff {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(RestrictedMle, MatchesGoldenSectionOracleOnSmallDesigns) {
    for (int nt = 1; nt <= 5; ++nt)
        for (int nc = 1; nc <= 5; ++nc) {
            const TrialDesign design(nt, nc);
            for (const auto& o : enumerate_outcomes(design))
                for (int k = -19; k <= 19; ++k) {
                    const double delta = k * 0.05;
                    const auto mle = restricted_mle(design, o, delta);
                    const double ref = static_cast<double>(oracle::restricted_p_c(design, o, delta));
                    ASSERT_NEAR(mle.p_c, ref, 1e-8) << nt << "," << nc << " (" << o.x_t << ","
                                                    << o.x_c << ") delta=" << delta;
                    ASSERT_NEAR(mle.p_t - mle.p_c, delta, 1e-15);
                }
        }
}

TEST(RestrictedMle, BoundaryCaseReference) {
    const TrialDesign design(6, 6);
    const auto mle = restricted_mle(design, {6, 0}, 0.99);
    EXPECT_NEAR(mle.p_c, 0.005, 1e-12);
    EXPECT_NEAR(mle.sigma, 0.04072263907623538749, 1e-12);
}

TEST(RestrictedMle, UnconstrainedOptimumRecovered) {
    const TrialDesign design(10, 8);
    const Outcome o{7, 3};
    const double d = unrestricted_estimate(design, o);
    const auto mle = restricted_mle(design, o, d);
    EXPECT_NEAR(mle.p_t, 0.7, 1e-10);
    EXPECT_NEAR(mle.p_c, 0.375, 1e-10);
}

TEST(RestrictedMle, RejectsClosedBoundary) {
    const TrialDesign design(3, 3);
    EXPECT_THROW(restricted_mle(design, {1, 1}, 1.0), DomainError);
    EXPECT_THROW(restricted_mle(design, {1, 1}, -1.0), DomainError);
    EXPECT_THROW(restricted_mle(design, {4, 1}, 0.0), DomainError);
}

TEST(ZMee, ReferenceValues) {
    const TrialDesign design(6, 6);
    EXPECT_NEAR(z_mee(design, {6, 0}, 0.99).value, 0.245563652721017412, 1e-11);
    EXPECT_NEAR(z_mee(design, {6, 0}, -0.05).value, 3.6418618720013039651, 1e-11);
    EXPECT_NEAR(p_asy(design, {6, 0}, -0.05), 1.3533665126200516878e-4, 1e-15);
}

TEST(ZMee, StrictlyDecreasingInDelta) {
    for (int nt = 1; nt <= 6; ++nt)
        for (int nc = 1; nc <= 6; ++nc) {
            const TrialDesign design(nt, nc);
            for (const auto& o : enumerate_outcomes(design)) {
                double prev = kInf;
                for (int k = -99; k <= 99; ++k) {
                    const auto z = z_mee(design, o, k * 0.01);
                    if (z.degenerate) continue;
                    ASSERT_LT(z.value, prev) << nt << "," << nc << " (" << o.x_t << "," << o.x_c
                                             << ") delta=" << k * 0.01;
                    prev = z.value;
                }
            }
        }
}

TEST(ZMee, ZeroAtObservedDifference) {
    const TrialDesign design(9, 7);
    const Outcome o{4, 5};
    EXPECT_NEAR(z_mee(design, o, unrestricted_estimate(design, o)).value, 0.0, 1e-14);
}

TEST(ZMn, ScalingIdentityRandomSweep) {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> size(1, 60);
    std::uniform_real_distribution<double> delta(-0.999, 0.999);
    for (int i = 0; i < 1000; ++i) {
        const TrialDesign design(size(rng), size(rng));
        const Outcome o{std::uniform_int_distribution<int>(0, design.n_t)(rng),
                        std::uniform_int_distribution<int>(0, design.n_c)(rng)};
        const double d = delta(rng);
        const auto mee = z_mee(design, o, d);
        const auto mn = z_mn(design, o, d);
        const double factor = std::sqrt(static_cast<double>(design.total()) / (design.total() - 1));
        if (mee.degenerate) {
            EXPECT_EQ(mn.value, mee.value);
            continue;
        }
        ASSERT_NEAR(mn.value, factor * mee.value, 1e-12 * std::max(1.0, std::fabs(mn.value)));
    }
}

TEST(ZWald, ReferenceValue) {
    const TrialDesign design(10, 10);
    EXPECT_NEAR(z_wald(design, {7, 5}, 0.0).value, 0.93250480824031376564, 1e-13);
}

TEST(ZWald, DegenerateWhenBothArmsPure) {
    const TrialDesign design(5, 5);
    const auto z = z_wald(design, {5, 0}, 0.3);
    EXPECT_TRUE(z.degenerate);
    EXPECT_EQ(z.value, kInf);
    const auto at = z_wald(design, {5, 0}, 1.0 - 0.0);
    EXPECT_TRUE(at.degenerate);
    EXPECT_EQ(at.value, 0.0);
}

TEST(PAsy, SymmetricOutcomeAtZeroIsHalf) {
    const TrialDesign design(8, 8);
    EXPECT_NEAR(p_asy(design, {3, 3}, 0.0), 0.5, 1e-15);
}

TEST(Ordering, TiesAreMutualTailMembers) {
    const OrderKey a{1.0, 0.2};
    const OrderKey b{1.0 + 1e-12, 0.2};
    EXPECT_TRUE(in_tail(a, b, TailSide::large_z));
    EXPECT_TRUE(in_tail(b, a, TailSide::large_z));
    EXPECT_FALSE(more_extreme(a, b, TailSide::large_z) && more_extreme(b, a, TailSide::large_z));
}

TEST(Ordering, InfinitiesSplitByEstimate) {
    const OrderKey big{kInf, 1.0};
    const OrderKey smaller{kInf, 0.5};
    EXPECT_TRUE(in_tail(big, smaller, TailSide::large_z));
    EXPECT_FALSE(in_tail(smaller, big, TailSide::large_z));
    EXPECT_TRUE(in_tail(OrderKey{-kInf, -1.0}, OrderKey{-2.0, 0.0}, TailSide::small_z));
}

TEST(Ordering, SidesAreMirrorImages) {
    const OrderKey a{0.5, 0.1};
    const OrderKey b{-0.5, -0.1};
    EXPECT_TRUE(in_tail(a, b, TailSide::large_z));
    EXPECT_FALSE(in_tail(a, b, TailSide::small_z));
    EXPECT_TRUE(in_tail(b, a, TailSide::small_z));
}

}  // namespace
}  // namespace riskdiff
