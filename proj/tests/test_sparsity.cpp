#include <gtest/gtest.h>

#include <random>

#include "sasc/sparsity.hpp"
#include "support/dense.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace sasc;
using sasc::test::random_image;

FeatureMaps scalar_maps(double v) { return FeatureMaps(std::vector<Image>{Image(1, 1, v)}); }

/// argmin_z (c - z)^2 + lambda |z - m| by dense grid search plus refinement.
double grid_argmin(double c, double m, double lambda)
{
    auto f = [&](double z) { return (c - z) * (c - z) + lambda * std::abs(z - m); };
    const double lo = std::min(c, m) - 1.0, hi = std::max(c, m) + 1.0;
    double best = lo, fb = f(lo);
    const int n = 20000;
    for (int i = 1; i <= n; ++i) {
        const double z = lo + (hi - lo) * i / n;
        if (f(z) < fb) fb = f(z), best = z;
    }
    // golden-section polish within one grid cell either side (resolution ~sqrt(eps))
    double a = best - (hi - lo) / n, b = best + (hi - lo) / n;
    for (int it = 0; it < 100; ++it) {
        const double m1 = b - 0.618033988749895 * (b - a), m2 = a + 0.618033988749895 * (b - a);
        if (f(m1) < f(m2)) b = m2;
        else a = m1;
    }
    const double z = 0.5 * (a + b);
    return f(m) <= f(z) ? m : z; // the kink at m is a candidate minimizer
}

TEST(SoftThreshold, Examples)
{
    EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_EQ(soft_threshold(-3.0, 1.0), -2.0);
    EXPECT_EQ(soft_threshold(0.5, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(-1.0, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(0.25, 0.0), 0.25);
}

TEST(SoftThreshold, IsOddAndOneLipschitz)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 5), t(0, 3);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = u(rng), tau = t(rng);
        EXPECT_EQ(soft_threshold(-a, tau), -soft_threshold(a, tau));
        EXPECT_LE(std::abs(soft_threshold(a, tau) - soft_threshold(b, tau)), std::abs(a - b) + 1e-15);
        EXPECT_LE(std::abs(soft_threshold(a, tau)), std::abs(a));
    }
}

TEST(UpdateFeatures, ScalarExamples)
{
    // c = 1, mu = 0, lambda = 1: shrink by 0.5
    EXPECT_DOUBLE_EQ(update_features(scalar_maps(1.0), scalar_maps(0.0), 1.0)[0](0, 0), 0.5);
    // inside the dead zone the prior wins
    EXPECT_DOUBLE_EQ(update_features(scalar_maps(0.3), scalar_maps(0.1), 1.0)[0](0, 0), 0.1);
    // lambda = 0 returns the responses
    EXPECT_DOUBLE_EQ(update_features(scalar_maps(0.3), scalar_maps(0.1), 0.0)[0](0, 0), 0.3);
    // c = 2, mu = 0.5, lambda = 1.4 matches a direct grid search
    EXPECT_NEAR(update_features(scalar_maps(2.0), scalar_maps(0.5), 1.4)[0](0, 0), grid_argmin(2.0, 0.5, 1.4), 1e-6);
    EXPECT_NEAR(update_features(scalar_maps(2.0), scalar_maps(0.5), 1.4)[0](0, 0), 1.3, 1e-15);
}

TEST(UpdateFeatures, MatchesGridSearchOnRandomTriples)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-2, 2), l(0, 2);
    for (int i = 0; i < 1000; ++i) {
        const double c = u(rng), m = u(rng), lambda = l(rng);
        const double z = update_features(scalar_maps(c), scalar_maps(m), lambda)[0](0, 0);
        EXPECT_NEAR(z, grid_argmin(c, m, lambda), 1e-6) << c << " " << m << " " << lambda;
    }
}

TEST(UpdateFeatures, ErrorsOnBadInput)
{
    EXPECT_THROW(update_features(scalar_maps(1), scalar_maps(0), -0.1), error);
    EXPECT_THROW(update_features(FeatureMaps(2, 3, 3), FeatureMaps(1, 3, 3), 0.1), error);
    EXPECT_THROW(ThresholdVector(std::vector<double>{0.1, -0.2}), error);
}

TEST(ShrinkToward, UsesPerFilterThresholds)
{
    const FeatureMaps wx(std::vector<Image>{Image(1, 2, 1.0), Image(1, 2, 1.0)});
    const FeatureMaps mu(2, 1, 2);
    const FeatureMaps z = shrink_toward(wx, mu, ThresholdVector(std::vector<double>{0.25, 2.0}));
    EXPECT_EQ(z[0](0, 1), 0.75);
    EXPECT_EQ(z[1](0, 1), 0.0);
}

TEST(MixPrior, Examples)
{
    const FeatureMaps a = scalar_maps(1.0), b = scalar_maps(3.0);
    EXPECT_EQ(mix_prior(a, b, 1.0)[0](0, 0), 1.0);
    EXPECT_EQ(mix_prior(a, b, 0.0)[0](0, 0), 3.0);
    EXPECT_DOUBLE_EQ(mix_prior(a, b, 0.25)[0](0, 0), 2.5);
    EXPECT_THROW(mix_prior(a, b, 1.5), error);
    EXPECT_THROW(mix_prior(a, b, -0.1), error);
    EXPECT_THROW(mix_prior(a, FeatureMaps(2, 1, 1), 0.5), error);
}

TEST(Objective, ZeroAtExactFit)
{
    const FilterBank bank = make_dct_bank(3);
    const auto op = DegradationOp::blur(make_gaussian_kernel(1.0), {12, 12});
    const Image x = random_image(12, 12, 3);
    const Image y = apply_h(op, x);
    const FeatureMaps z = conv(bank, x);
    EXPECT_NEAR(objective(y, x, op, bank, z, z, 0.3, 0.5), 0.0, 1e-20);
}

TEST(Objective, MatchesHandComputedTerms)
{
    const FilterBank bank = make_dct_bank(2);
    const auto op = DegradationOp::identity({5, 5});
    const Image x = random_image(5, 5, 4), y = random_image(5, 5, 5);
    FeatureMaps z = conv(bank, x);
    const FeatureMaps mu = z;
    const double eps = 0.01;
    z[0](2, 3) += eps;
    // ||y-x||^2 + eta*(eps^2 + lambda*eps)
    const double expect = squared_norm(y - x) + 0.4 * (eps * eps + 0.7 * eps);
    EXPECT_NEAR(objective(y, x, op, bank, z, mu, 0.4, 0.7), expect, 1e-13);
}

TEST(Objective, InvariantUnderFilterPermutation)
{
    const FilterBank bank = sasc::test::random_bank(4, 3, 6);
    std::vector<Kernel> perm{bank[2], bank[0], bank[3], bank[1]};
    const FilterBank pbank(perm);
    const auto op = DegradationOp::identity({8, 8});
    const Image x = random_image(8, 8, 7), y = random_image(8, 8, 8);
    std::vector<Image> zs, ms;
    for (int k = 0; k < 4; ++k) zs.push_back(random_image(8, 8, 10 + k)), ms.push_back(random_image(8, 8, 20 + k));
    const FeatureMaps z(zs), mu(ms);
    const FeatureMaps pz(std::vector<Image>{zs[2], zs[0], zs[3], zs[1]});
    const FeatureMaps pmu(std::vector<Image>{ms[2], ms[0], ms[3], ms[1]});
    const double a = objective(y, x, op, bank, z, mu, 0.5, 0.3);
    const double b = objective(y, x, op, pbank, pz, pmu, 0.5, 0.3);
    EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Objective, FeatureUpdateNeverIncreasesIt)
{
    const FilterBank bank = make_dct_bank(3);
    const auto op = DegradationOp::identity({10, 10});
    for (int trial = 0; trial < 50; ++trial) {
        const Image x = random_image(10, 10, 100 + trial), y = random_image(10, 10, 200 + trial);
        std::vector<Image> zs, ms;
        for (int k = 0; k < bank.count(); ++k)
            zs.push_back(random_image(10, 10, 1000 + 10 * trial + k, -1, 1)), ms.push_back(random_image(10, 10, 5000 + 10 * trial + k, -1, 1));
        const FeatureMaps z(zs), mu(ms);
        const double lambda = 0.05 * (trial % 7);
        const FeatureMaps zn = update_features(conv(bank, x), mu, lambda);
        EXPECT_LE(objective(y, x, op, bank, zn, mu, 0.3, lambda), objective(y, x, op, bank, z, mu, 0.3, lambda) + 1e-12);
        // and the updated z is optimal against small perturbations
        FeatureMaps zp = zn;
        zp[trial % bank.count()](trial % 10, (3 * trial) % 10) += 1e-3;
        EXPECT_LE(objective(y, x, op, bank, zn, mu, 0.3, lambda), objective(y, x, op, bank, zp, mu, 0.3, lambda) + 1e-15);
    }
}

} // namespace
