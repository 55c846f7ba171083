#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "faircut/necklace1d.hpp"

using namespace faircut;

namespace {

BoxMeasure uniform(double lo, double hi) { return BoxMeasure::uniform(Box{{lo}, {hi}}); }

BoxMeasure random_measure(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(-2.0, 2.0), len(0.05, 1.0), w(0.1, 1.0);
    std::uniform_int_distribution<int> count(1, 4);
    std::vector<std::pair<Box, double>> atoms;
    const int c = count(rng);
    for (int i = 0; i < c; ++i) {
        const double lo = pos(rng);
        atoms.push_back({Box{{lo}, {lo + len(rng)}}, w(rng)});
    }
    return BoxMeasure::from_boxes(1, atoms);
}

} // namespace

TEST(SplitPrime, MedianTwoThieves) {
    std::vector<BoxMeasure> ms{uniform(0, 1)};
    NecklaceSplit s = split_prime(ms, 2);
    ASSERT_EQ(s.cuts.size(), 1u);
    EXPECT_NEAR(s.cuts[0], 0.5, 1e-9);
    EXPECT_NE(s.labels[0], s.labels[1]);
}

TEST(SplitPrime, ThirdsThreeThieves) {
    std::vector<BoxMeasure> ms{uniform(0, 1)};
    NecklaceSplit s = split_prime(ms, 3);
    ASSERT_EQ(s.cuts.size(), 2u);
    EXPECT_NEAR(s.cuts[0], 1.0 / 3, 1e-9);
    EXPECT_NEAR(s.cuts[1], 2.0 / 3, 1e-9);
    std::vector<int> l = s.labels;
    std::sort(l.begin(), l.end());
    EXPECT_EQ(l, (std::vector<int>{0, 1, 2}));
}

TEST(SplitPrime, TwoOverlappingIntervals) {
    std::vector<BoxMeasure> ms{uniform(0, 1), uniform(0.5, 1.5)};
    NecklaceSplit s = split_prime(ms, 2);
    EXPECT_LE(s.cuts.size(), 2u);
    for (const auto& row : s.shares)
        for (double v : row) EXPECT_NEAR(v, 0.5, 1e-9);
}

TEST(SplitPrime, RejectsComposite) {
    std::vector<BoxMeasure> ms{uniform(0, 1)};
    EXPECT_THROW(split_prime(ms, 4), InputError);
}

TEST(SplitPrime, RejectsPlanarMeasure) {
    std::vector<BoxMeasure> ms{BoxMeasure::uniform(Box{{0, 0}, {1, 1}})};
    EXPECT_THROW(split_necklace(ms, 2), DimensionError);
}

TEST(SplitComposite, Quarters) {
    std::vector<BoxMeasure> ms{uniform(0, 1)};
    NecklaceSplit s = split_necklace(ms, 4);
    EXPECT_TRUE(s.composite);
    ASSERT_EQ(s.cuts.size(), 3u);
    EXPECT_NEAR(s.cuts[0], 0.25, 1e-9);
    EXPECT_NEAR(s.cuts[1], 0.5, 1e-9);
    EXPECT_NEAR(s.cuts[2], 0.75, 1e-9);
    std::vector<int> l = s.labels;
    std::sort(l.begin(), l.end());
    EXPECT_EQ(l, (std::vector<int>{0, 1, 2, 3}));
}

TEST(SplitComposite, SixThievesOneMeasure) {
    std::vector<BoxMeasure> ms{BoxMeasure::from_boxes(1, {{Box{{0}, {1}}, 1.0}, {Box{{2}, {2.5}}, 3.0}})};
    NecklaceSplit s = split_necklace(ms, 6);
    EXPECT_LE(s.cuts.size(), 5u);
    EXPECT_LE(s.residual, 1e-9);
    // one measure, five cuts: the cuts are the sextiles
    ASSERT_EQ(s.cuts.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        const double q = (i + 1) / 6.0;
        const double expected = q <= 0.25 ? 4.0 * q : 2.0 + 0.5 * (q - 0.25) / 0.75;
        EXPECT_NEAR(s.cuts[i], expected, 1e-8);
    }
}

TEST(SplitComposite, CutBoundTwoMeasuresFourThieves) {
    std::vector<BoxMeasure> ms{uniform(0, 1), uniform(0.3, 2.0)};
    NecklaceSplit s = split_necklace(ms, 4);
    EXPECT_LE(s.cuts.size(), 6u);
    EXPECT_LE(s.residual, 1e-9);
}

TEST(SplitComposite, AgreesWithTwoPrimeSplits) {
    std::vector<BoxMeasure> ms{uniform(0, 1), uniform(0.2, 0.9)};
    NecklaceSplit four = split_necklace(ms, 4);
    const std::vector<int> primes{2, 2};
    NecklaceSplit twice = split_composite(ms, primes);
    for (std::size_t l = 0; l < 4; ++l)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(four.shares[l][j], twice.shares[l][j], 2e-9);
}

class NecklaceProperties : public ::testing::TestWithParam<int> {};

TEST_P(NecklaceProperties, FairAndWithinCutBound) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()));
    const int ks[] = {2, 3, 4, 5, 6};
    for (int trial = 0; trial < 4; ++trial) {
        const std::size_t t = 1 + static_cast<std::size_t>(rng() % 3);
        int k = ks[rng() % 5];
        if (k == 5 && t > 1) k = 3;  // 5^(4t) labelings: too many beyond t = 1
        std::vector<BoxMeasure> ms;
        for (std::size_t j = 0; j < t; ++j) ms.push_back(random_measure(rng));
        NecklaceSplit s = split_necklace(ms, k);
        EXPECT_LE(s.cuts.size(), t * static_cast<std::size_t>(k - 1));
        EXPECT_TRUE(std::is_sorted(s.cuts.begin(), s.cuts.end()));
        EXPECT_EQ(s.labels.size(), s.cuts.size() + 1);
        for (std::size_t i = 1; i < s.labels.size(); ++i) EXPECT_NE(s.labels[i], s.labels[i - 1]);
        const auto shares = necklace_shares(ms, s.cuts, s.labels, k);
        EXPECT_LE(share_residual(shares, k), 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, NecklaceProperties, ::testing::Range(1, 6));

TEST(DiscreteSplit, AlternatingNeedsOneCut) {
    // ab | ab already gives each thief one bead of each type
    DiscreteSplit s = discrete_split(BeadString::parse("ab ab"), 2);
    EXPECT_EQ(s.cuts, (std::vector<int>{2}));
    EXPECT_EQ(s.labels, (std::vector<int>{0, 1}));
}

TEST(DiscreteSplit, Blocks) {
    DiscreteSplit s = discrete_split(BeadString::parse("aabb"), 2);
    EXPECT_EQ(s.cuts, (std::vector<int>{1, 3}));
    EXPECT_EQ(s.labels, (std::vector<int>{0, 1, 0}));
}

TEST(DiscreteSplit, Pair) {
    DiscreteSplit s = discrete_split(BeadString::parse("aa"), 2);
    EXPECT_EQ(s.cuts, (std::vector<int>{1}));
}

TEST(DiscreteSplit, Errors) {
    EXPECT_THROW(discrete_split(BeadString::parse("aab"), 2), InputError);
    EXPECT_THROW(discrete_split(BeadString::parse(std::string(26, 'a')), 2), InstanceTooLarge);
}

TEST(DiscreteSplit, SeparatedTypesNeedFullBound) {
    // each type in one block forces k-1 cuts per type
    DiscreteSplit s = discrete_split(BeadString::parse("aaabbbccc"), 3);
    EXPECT_EQ(s.cuts.size(), 6u);
}
