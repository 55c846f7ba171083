#include <gtest/gtest.h>

#include <cstdint>
#include <random>
#include <vector>

#include "faircut/chessboard.hpp"

using namespace faircut;

namespace {

BoxMeasure square(double x, double y, double side = 1.0) {
    return BoxMeasure::uniform(Box{{x, y}, {x + side, y + side}});
}

// Multinomial parity from Pascal's triangle values, independent of the
// bitwise criterion.
bool multinomial_odd(const std::vector<int>& counts) {
    static const auto pascal = [] {
        std::vector<std::vector<std::uint64_t>> c(64, std::vector<std::uint64_t>(64, 0));
        for (int n = 0; n < 64; ++n) {
            c[n][0] = 1;
            for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k < n ? c[n - 1][k] : 0);
        }
        return c;
    }();
    int s = 0;
    bool odd = true;
    for (int n : counts) {
        s += n;
        odd = odd && (pascal[s][n] % 2 == 1);
    }
    return odd;
}

void tuples(int left, std::vector<int>& cur, const std::function<void(const std::vector<int>&)>& f) {
    if (!cur.empty()) f(cur);
    for (int n = 1; n <= left; ++n) {
        cur.push_back(n);
        tuples(left - n, cur, f);
        cur.pop_back();
    }
}

} // namespace

TEST(Admissible, Examples) {
    EXPECT_FALSE(admissible(std::vector<int>{1, 1}));
    EXPECT_TRUE(admissible(std::vector<int>{1, 2}));
    EXPECT_TRUE(admissible(std::vector<int>{1}));
    EXPECT_FALSE(admissible(std::vector<int>{3, 1}));
    EXPECT_TRUE(admissible(std::vector<int>{4, 2, 1}));
    EXPECT_THROW(admissible(std::vector<int>{0}), InputError);
}

TEST(Admissible, MatchesMultinomialParityUpTo20) {
    std::vector<int> cur;
    std::size_t checked = 0;
    tuples(20, cur, [&](const std::vector<int>& c) {
        ++checked;
        ASSERT_EQ(admissible(c), multinomial_odd(c));
    });
    EXPECT_GT(checked, 500000u);
}

TEST(ColourOf, NoOffsetsIsAllA) {
    ChessboardColouring c{{{1.0, 0.0}}, {{kInf}}, 0};
    EXPECT_EQ(colour_of(c, std::vector<double>{5.0, -3.0}), Colour::A);
}

TEST(ColourOf, OneVerticalLine) {
    ChessboardColouring c{{{1.0, 0.0}}, {{0.0}}, 0};
    EXPECT_EQ(colour_of(c, std::vector<double>{-1.0, 0.0}), Colour::A);
    EXPECT_EQ(colour_of(c, std::vector<double>{1.0, 0.0}), Colour::B);
    EXPECT_EQ(colour_of(c, std::vector<double>{0.0, 7.0}), Colour::OnBoundary);
}

TEST(ColourOf, QuadrantChessboard) {
    ChessboardColouring c{{{1.0, 0.0}, {0.0, 1.0}}, {{0.0}, {0.0}}, 0};
    auto at = [&](double x, double y) { return colour_of(c, std::vector<double>{x, y}); };
    EXPECT_EQ(at(1, 1), at(-1, -1));
    EXPECT_EQ(at(1, -1), at(-1, 1));
    EXPECT_NE(at(1, 1), at(1, -1));
}

TEST(ColourCells, AgreeWithColourOf) {
    ChessboardColouring c{{{1.0, 0.0}, {0.6, 0.8}}, {{0.0, 1.0}, {0.3, kInf}}, 1};
    const auto a = colour_cells(c, Colour::A), b = colour_cells(c, Colour::B);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int s = 0; s < 2000; ++s) {
        const std::vector<double> x{u(rng), u(rng)};
        const Colour col = colour_of(c, x);
        int in_a = 0, in_b = 0;
        for (const auto& r : a) in_a += r.contains(x);
        for (const auto& r : b) in_b += r.contains(x);
        EXPECT_EQ(in_a + in_b, 1);
        EXPECT_EQ(in_a == 1, col == Colour::A);
    }
}

TEST(ColourOf, AdjacentCellsDiffer) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    ChessboardColouring c{{{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}}, {{-0.5, 0.7}, {0.1}, {-1.0, 0.0, 1.2}}, 0};
    for (int s = 0; s < 500; ++s) {
        const std::size_t i = rng() % 3;
        const auto& offs = c.offsets[i];
        const double o = offs[rng() % offs.size()];
        // step across the hyperplane v_i . x = o along v_i
        std::vector<double> x{u(rng), u(rng)};
        const double p = inner(c.directions[i], x);
        const double eps = 1e-7;
        std::vector<double> lo = x, hi = x;
        for (std::size_t a = 0; a < 2; ++a) {
            lo[a] += (o - eps - p) * c.directions[i][a];
            hi[a] += (o + eps - p) * c.directions[i][a];
        }
        const Colour cl = colour_of(c, lo), ch = colour_of(c, hi);
        if (cl == Colour::OnBoundary || ch == Colour::OnBoundary) continue;
        bool other_between = false;  // another hyperplane inside the step
        for (std::size_t j = 0; j < 3; ++j) {
            for (double q : c.offsets[j]) {
                if (j == i && q == o) continue;
                const double a = inner(c.directions[j], lo), b = inner(c.directions[j], hi);
                if ((a - q) * (b - q) <= 0.0) other_between = true;
            }
        }
        if (!other_between) {
            EXPECT_NE(cl, ch);
        }
    }
}

TEST(ColourOf, FlippingOneFactorSwapsColours) {
    ChessboardSpec spec{{1, 2}, {{1.0, 0.0}, {0.0, 1.0}}};
    spec.validate();
    const std::vector<BoxMeasure> ms{square(0, 0), square(2, 1), square(-1, 3)};
    const BoxMeasure ref = reference_measure(ms);
    const std::vector<double> y{0.3, -0.7, 0.2, -0.5, 0.3};
    std::vector<double> flipped = y;
    for (std::size_t j = 2; j < 5; ++j) flipped[j] = -flipped[j];
    const auto c = detail::colouring_from_blocks(y, spec, ref);
    const auto f = detail::colouring_from_blocks(flipped, spec, ref);
    EXPECT_EQ(c.offsets, f.offsets);
    EXPECT_NE(c.parity, f.parity);
    for (const BoxMeasure& m : ms) EXPECT_NEAR(colour_share(m, c) + colour_share(m, f), 1.0, 1e-12);
}

TEST(SolveChessboard, SingleHyperplaneAtMedian) {
    const std::vector<BoxMeasure> ms{BoxMeasure::from_boxes(2, {{Box{{0, 0}, {1, 1}}, 1.0}, {Box{{1, 0}, {3, 1}}, 3.0}})};
    const auto sol = solve_chessboard(ms, ChessboardSpec{{1}, {{1.0, 0.0}}});
    ASSERT_EQ(sol.colouring.offsets[0].size(), 1u);
    // mass left of c: 1/4 + 3/4 (c-1)/2 = 1/2
    EXPECT_NEAR(sol.colouring.offsets[0][0], 1.0 + 2.0 / 3.0, 1e-5);
    EXPECT_LE(sol.residual, 1e-6);
}

TEST(SolveChessboard, ThreeSquaresOneVerticalTwoHorizontal) {
    const std::vector<BoxMeasure> ms{square(0, 0), square(2, 0.5), square(4, 2)};
    const auto sol = solve_chessboard(ms, ChessboardSpec{{1, 2}, {{1.0, 0.0}, {0.0, 1.0}}});
    EXPECT_LE(sol.colouring.offsets[0].size(), 1u);
    EXPECT_LE(sol.colouring.offsets[1].size(), 2u);
    for (const BoxMeasure& m : ms) EXPECT_NEAR(colour_share(m, sol.colouring), 0.5, 1e-6);
}

TEST(SolveChessboard, RejectsInadmissibleAndBadShapes) {
    const std::vector<BoxMeasure> two{square(0, 0), square(2, 2)};
    EXPECT_THROW(solve_chessboard(two, ChessboardSpec{{1, 1}, {{1.0, 0.0}, {0.0, 1.0}}}), InputError);
    EXPECT_THROW(solve_chessboard(two, ChessboardSpec{{1}, {{1.0, 0.0}}}), InputError);
    EXPECT_THROW(solve_chessboard(two, ChessboardSpec{{1, 2}, {{1.0, 0.0}}}), InputError);
    const std::vector<BoxMeasure> seven(7, square(0, 0));
    EXPECT_THROW(solve_chessboard(seven, ChessboardSpec{{1, 2, 4}, {{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}}),
                 InstanceTooLarge);
    EXPECT_THROW(solve_chessboard_prescribed(two, ChessboardSpec{{1, 1}, {{1.0, 0.0}, {0.0, 1.0}}}, {{1, 0}}),
                 Unsupported);
}

TEST(SolveChessboard, MergedCountsSucceedWhereOriginalDoes) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(-3.0, 3.0);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<BoxMeasure> ms;
        for (int j = 0; j < 3; ++j) ms.push_back(square(pos(rng), pos(rng), 0.5 + 0.3 * j));
        const auto orig = solve_chessboard(ms, ChessboardSpec{{1, 2}, {{1.0, 0.0}, {0.0, 1.0}}});
        ASSERT_LE(orig.residual, 1e-6);
        ASSERT_TRUE(admissible(std::vector<int>{3}));
        const auto merged = solve_chessboard(ms, ChessboardSpec{{3}, {{1.0, 0.0}}});
        EXPECT_LE(merged.residual, 1e-6);
    }
}

TEST(SolveChessboard, RandomInstancesProperty) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> pos(-3.0, 3.0), len(0.3, 1.5);
    const std::vector<std::vector<int>> shapes{{1}, {2}, {1, 2}, {3}, {1, 4}};
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> counts = shapes[static_cast<std::size_t>(trial) % shapes.size()];
        int S = 0;
        for (int n : counts) S += n;
        std::vector<BoxMeasure> ms;
        for (int j = 0; j < S; ++j) {
            const double x = pos(rng), y = pos(rng);
            ms.push_back(BoxMeasure::uniform(Box{{x, y}, {x + len(rng), y + len(rng)}}));
        }
        std::vector<std::vector<double>> dirs;
        for (std::size_t i = 0; i < counts.size(); ++i) dirs.push_back({std::cos(0.7 * i + 0.1), std::sin(0.7 * i + 0.1)});
        const auto sol = solve_chessboard(ms, ChessboardSpec{counts, dirs});
        for (const BoxMeasure& m : ms) EXPECT_NEAR(colour_share(m, sol.colouring), 0.5, 1e-6) << "trial " << trial;
    }
}
