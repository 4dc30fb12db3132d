#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "sasc/nonlocal.hpp"
#include "sasc/noise.hpp"
#include "support/dense.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace sasc;
using sasc::test::random_image;

NonlocalParams params(int side, int stride, int l, int window, double h)
{
    NonlocalParams p;
    p.patch_side = side;
    p.stride = stride;
    p.group_size = l;
    p.window = window;
    p.bandwidth = h;
    return p;
}

TEST(GroupIndex, ConstantImageGivesUniformWeights)
{
    const auto idx = build_group_index(Image(16, 16, 0.4), params(4, 2, 5, 9, 0.1));
    ASSERT_FALSE(idx.groups.empty());
    for (const auto& g : idx.groups) {
        ASSERT_EQ(g.members.size(), 5u);
        for (double d : g.distances) EXPECT_EQ(d, 0.0);
        for (double w : g.weights) EXPECT_DOUBLE_EQ(w, 0.2);
    }
}

TEST(GroupIndex, LatticeCoversTheBorder)
{
    const auto idx = build_group_index(random_image(14, 11, 1), params(4, 3, 2, 7, 0.1));
    std::set<int> rows, cols;
    for (const auto& g : idx.groups) rows.insert(g.exemplar.row), cols.insert(g.exemplar.col);
    EXPECT_EQ(rows, (std::set<int>{0, 3, 6, 9, 10}));
    EXPECT_EQ(cols, (std::set<int>{0, 3, 6, 7}));
}

TEST(GroupIndex, StripesMatchAtTheirPeriod)
{
    Image img(16, 16);
    for (int r = 0; r < 16; ++r)
        for (int c = 0; c < 16; ++c) img(r, c) = (c % 4) * 0.25;
    const auto idx = build_group_index(img, params(3, 3, 10, 9, 0.1));
    for (const auto& g : idx.groups)
        for (std::size_t l = 0; l < g.members.size(); ++l) {
            EXPECT_EQ(g.distances[l], 0.0);
            EXPECT_EQ(wrap(g.members[l].col - g.exemplar.col, 4), 0);
        }
}

TEST(GroupIndex, MatchesBruteForceSearch)
{
    const int n = 16, side = 4, l = 3, window = 9;
    const Image img = random_image(n, n, 2);
    const auto idx = build_group_index(img, params(side, 2, l, window, 0.2));
    for (const auto& g : idx.groups) {
        std::vector<std::pair<double, int>> all;
        std::set<int> seen;
        for (int dr = -4; dr <= 4; ++dr)
            for (int dc = -4; dc <= 4; ++dc) {
                const int r = sasc::test::mod(g.exemplar.row + dr, n), c = sasc::test::mod(g.exemplar.col + dc, n);
                if ((r == g.exemplar.row && c == g.exemplar.col) || !seen.insert(r * n + c).second) continue;
                double s = 0.0;
                for (int i = 0; i < side; ++i)
                    for (int j = 0; j < side; ++j) {
                        const double d = img((g.exemplar.row + i) % n, (g.exemplar.col + j) % n) - img((r + i) % n, (c + j) % n);
                        s += d * d;
                    }
                all.emplace_back(std::sqrt(s), r * n + c);
            }
        std::sort(all.begin(), all.end());
        ASSERT_EQ(g.members.front(), g.exemplar);
        for (int k = 1; k < l; ++k) {
            EXPECT_EQ(g.members[static_cast<std::size_t>(k)].row * n + g.members[static_cast<std::size_t>(k)].col, all[static_cast<std::size_t>(k - 1)].second);
            EXPECT_NEAR(g.distances[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(k - 1)].first, 1e-12);
        }
    }
}

TEST(GroupIndex, WeightsArePositiveNormalizedAndOrdered)
{
    const auto idx = build_group_index(random_image(24, 24, 3), params(5, 3, 8, 11, 0.5));
    for (const auto& g : idx.groups) {
        double s = 0.0;
        for (std::size_t l = 0; l < g.weights.size(); ++l) {
            EXPECT_GT(g.weights[l], 0.0);
            s += g.weights[l];
            if (l > 0) {
                EXPECT_LE(g.weights[l], g.weights[l - 1]);
                EXPECT_GE(g.distances[l], g.distances[l - 1]);
                EXPECT_NEAR(g.weights[l] / g.weights[0], std::exp(-g.distances[l] / 0.5), 1e-12);
            }
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(GroupIndex, IsDeterministic)
{
    const Image img = random_image(20, 20, 4);
    const auto a = build_group_index(img, params(4, 2, 6, 9, 0.3));
    const auto b = build_group_index(img, params(4, 2, 6, 9, 0.3));
    ASSERT_EQ(a.groups.size(), b.groups.size());
    for (std::size_t i = 0; i < a.groups.size(); ++i) {
        EXPECT_EQ(a.groups[i].members, b.groups[i].members);
        EXPECT_EQ(a.groups[i].weights, b.groups[i].weights);
    }
}

TEST(GroupIndex, RejectsBadParameters)
{
    const Image img = random_image(16, 16, 5);
    EXPECT_THROW(build_group_index(img, params(4, 5, 3, 9, 0.1)), error);  // stride > side
    EXPECT_THROW(build_group_index(img, params(4, 2, 3, 9, 0.0)), error);  // h = 0
    EXPECT_THROW(build_group_index(img, params(17, 2, 3, 19, 0.1)), error); // side > image
    EXPECT_THROW(build_group_index(img, params(3, 2, 20, 3, 0.1)), error); // window too small for L
}

TEST(Reweight, KeepsMembershipsAndRecomputesWeights)
{
    const Image a = random_image(16, 16, 6), b = random_image(16, 16, 7);
    const auto idx = build_group_index(a, params(4, 2, 5, 9, 0.3));
    const auto re = reweight_group_index(idx, b);
    ASSERT_EQ(re.groups.size(), idx.groups.size());
    for (std::size_t i = 0; i < idx.groups.size(); ++i) {
        EXPECT_EQ(re.groups[i].members, idx.groups[i].members);
        for (std::size_t l = 0; l < re.groups[i].members.size(); ++l)
            EXPECT_NEAR(re.groups[i].distances[l], detail::patch_distance(b, re.groups[i].exemplar, re.groups[i].members[l], 4), 1e-15);
    }
    EXPECT_THROW(reweight_group_index(idx, Image(8, 8)), error);
}

TEST(NonlocalImage, ConstantStaysConstant)
{
    const Image img(12, 12, 0.6);
    const auto idx = build_group_index(random_image(12, 12, 8), params(4, 2, 4, 7, 0.2));
    for (double v : nonlocal_image(img, idx).pixels()) EXPECT_NEAR(v, 0.6, 1e-15);
}

TEST(NonlocalImage, SingleMemberGroupsReproduceTheGuide)
{
    const Image img = random_image(13, 15, 9);
    const auto idx = build_group_index(img, params(4, 3, 1, 7, 0.2));
    EXPECT_LT(sasc::test::max_abs_diff(nonlocal_image(img, idx), img), 1e-15);
}

TEST(NonlocalImage, IsLinearInTheGuideForAFixedIndex)
{
    const auto idx = build_group_index(random_image(16, 16, 10), params(4, 2, 5, 9, 0.2));
    const Image a = random_image(16, 16, 11), b = random_image(16, 16, 12);
    const Image lhs = nonlocal_image(a + 2.0 * b, idx);
    const Image rhs = nonlocal_image(a, idx) + 2.0 * nonlocal_image(b, idx);
    EXPECT_LT(sasc::test::max_abs_diff(lhs, rhs), 1e-13);
}

TEST(NonlocalImage, ReducesNoiseVariance)
{
    const int n = 32, draws = 20, l = 10;
    const double sigma = 0.1;
    const Image clean(n, n, 0.5);
    const auto idx = build_group_index(clean, params(6, 4, l, 15, 0.2));
    std::vector<double> sum(n * n, 0.0), sq(n * n, 0.0);
    GaussianNoise noise(13);
    for (int d = 0; d < draws; ++d) {
        const Image est = nonlocal_image(noise.add_to(clean, sigma), idx);
        for (std::size_t i = 0; i < est.size(); ++i) sum[i] += est.pixels()[i], sq[i] += est.pixels()[i] * est.pixels()[i];
    }
    double var = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i) var += (sq[i] - sum[i] * sum[i] / draws) / (draws - 1);
    var /= static_cast<double>(sum.size());
    EXPECT_LT(var, 2.0 * sigma * sigma / l);
}

TEST(NonlocalFeatures, DeltaBankGivesTheImageEstimate)
{
    const Image img = random_image(16, 16, 14);
    const auto idx = build_group_index(img, params(4, 2, 5, 9, 0.2));
    const FeatureMaps f = nonlocal_features(img, idx, FilterBank(std::vector<Kernel>{make_delta_kernel(3)}));
    EXPECT_EQ(f[0], nonlocal_image(img, idx));
}

TEST(NonlocalFeatures, ZeroMeanFiltersGiveZeroOnConstants)
{
    const Image img(16, 16, 0.3);
    const auto idx = build_group_index(img, params(4, 2, 5, 9, 0.2));
    for (const auto& m : nonlocal_features(img, idx, make_dct_bank(3)))
        for (double v : m.pixels()) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(NonlocalFeatures, MatchesFilteringTheNonlocalImage)
{
    const Image img = random_image(16, 16, 15);
    const auto idx = build_group_index(img, params(4, 2, 5, 9, 0.2));
    const FilterBank bank = sasc::test::random_bank(3, 3, 16);
    const FeatureMaps f = nonlocal_features(img, idx, bank);
    const Image est = nonlocal_image(img, idx);
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd v = sasc::test::conv_matrix(bank[k], 16, 16) * sasc::test::to_vec(est);
        EXPECT_LT(sasc::test::max_abs_diff(f[k], sasc::test::from_vec(v, 16, 16)), 1e-12);
    }
}

} // namespace
