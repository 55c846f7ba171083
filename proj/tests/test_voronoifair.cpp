#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "faircut/necklace1d.hpp"
#include "faircut/voronoifair.hpp"

using namespace faircut;

namespace {

const Box unit1{{0.0}, {1.0}};

VoronoiDomain line_domain(const CellFunctions& f, const Box& b = unit1) { return VoronoiDomain::for_functions(f, b); }

CellFunctions triangle() { return CellFunctions::simplex({{0.0, 0.0}, {4.0, 0.0}, {0.0, 4.0}}); }

std::vector<double> point(double x) { return {x}; }

// endpoints of the nonempty 1D cells, sorted
std::vector<double> interior_breaks(const std::vector<ConvexRegion>& cs, const Box& b) {
    std::vector<double> out;
    for (const auto& r : cs) {
        if (r.trivially_empty()) continue;
        double lo = b.lo[0], hi = b.hi[0];
        for (const Halfspace& h : r.halfspaces) {
            if (h.normal[0] > 0) hi = std::min(hi, h.offset / h.normal[0]);
            if (h.normal[0] < 0) lo = std::max(lo, h.offset / h.normal[0]);
        }
        if (hi <= lo) continue;
        if (lo > b.lo[0]) out.push_back(lo);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(CellFunctions, Validation) {
    EXPECT_THROW(CellFunctions::linear({{1.0}}), InputError);
    EXPECT_THROW(CellFunctions::linear({{1.0}, {1.0}}), InputError);
    EXPECT_THROW(CellFunctions::linear({{1.0}, {1.0, 2.0}}), DimensionError);
    EXPECT_THROW(CellFunctions::simplex({{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}}), InputError);
    EXPECT_THROW(CellFunctions::simplex({{0.0}, {1.0}, {2.0}}), DimensionError);
}

TEST(CellFunctions, FacetDistancesOfTheTriangle) {
    const CellFunctions f = triangle();
    const std::vector<double> x{1.0, 1.0};
    // facet 0 is the hypotenuse x + y = 4, facet 1 is x = 0, facet 2 is y = 0
    EXPECT_NEAR(f.facet_distance(0, x), 2.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(f.facet_distance(1, x), 1.0, 1e-12);
    EXPECT_NEAR(f.facet_distance(2, x), 1.0, 1e-12);
    EXPECT_NEAR(f.value(1, x), 0.0, 1e-12);
}

TEST(Cells, SymmetricPairSplitsAtZero) {
    const CellFunctions f = CellFunctions::linear({{0.5}, {-0.5}});
    const Box b{{-1.0}, {1.0}};
    const auto cs = cells(f, std::vector<double>{0.0, 0.0}, line_domain(f, b));
    EXPECT_TRUE(cs[0].contains(point(0.5)));
    EXPECT_FALSE(cs[0].contains(point(-0.5)));
    EXPECT_TRUE(cs[1].contains(point(-0.5)));
    EXPECT_EQ(interior_breaks(cs, b), std::vector<double>{0.0});
}

TEST(Cells, DistinctSlopesGiveIntervalsOrderedBySlope) {
    // upper envelope of x, 2x - 1, 3x - 3 has breaks at 1 and 2
    const CellFunctions f = CellFunctions::linear({{1.0}, {2.0}, {3.0}});
    const Box b{{-5.0}, {5.0}};
    const auto cs = cells(f, std::vector<double>{0.0, -1.0, -3.0}, line_domain(f, b));
    const auto br = interior_breaks(cs, b);
    ASSERT_EQ(br.size(), 2u);
    EXPECT_NEAR(br[0], 1.0, 1e-12);
    EXPECT_NEAR(br[1], 2.0, 1e-12);
    EXPECT_TRUE(cs[0].contains(point(0.0)));
    EXPECT_TRUE(cs[1].contains(point(1.5)));
    EXPECT_TRUE(cs[2].contains(point(3.0)));
}

TEST(Cells, MinusInfinityEmptiesTheCell) {
    const CellFunctions f = CellFunctions::linear({{0.5}, {-0.5}});
    const auto cs = cells(f, std::vector<double>{-kInf, 0.0}, line_domain(f));
    EXPECT_TRUE(cs[0].trivially_empty());
    EXPECT_TRUE(cs[1].contains(point(0.3)));
    EXPECT_THROW(cells(f, std::vector<double>{-kInf, -kInf}, line_domain(f)), InputError);
}

TEST(Capacities, Examples) {
    const CellFunctions f = CellFunctions::linear({{0.5}, {-0.5}});
    const Box b{{-1.0}, {1.0}};
    const VoronoiDomain dom = line_domain(f, b);
    const auto w = capacities(f, std::vector<double>{0.0, 0.0}, dom.uniform(), dom);
    EXPECT_NEAR(w[0], 0.5, 1e-12);
    EXPECT_NEAR(w[1], 0.5, 1e-12);
    const auto v = capacities(f, std::vector<double>{-kInf, 0.0}, dom.uniform(), dom);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_NEAR(v[1], 1.0, 1e-12);
}

TEST(Capacities, ThreeLinearFunctionsInThirds) {
    // slopes 0, 1, 2 on [0,1]: breaks at 1/3 and 2/3 need c = (0, -1/3, -1)
    const CellFunctions f = CellFunctions::linear({{0.0}, {1.0}, {2.0}});
    const VoronoiDomain dom = line_domain(f);
    const auto w = capacities(f, std::vector<double>{0.0, -1.0 / 3.0, -1.0}, dom.uniform(), dom);
    for (double x : w) EXPECT_NEAR(x, 1.0 / 3.0, 1e-12);
}

TEST(WeightsFromCapacities, UniformTargetOnSymmetricInstance) {
    const CellFunctions f = CellFunctions::linear({{0.5}, {-0.5}});
    const Box b{{-1.0}, {1.0}};
    const VoronoiDomain dom = line_domain(f, b);
    const auto c = weights_from_capacities(f, std::vector<double>{0.5, 0.5}, dom.uniform(), dom);
    EXPECT_NEAR(c[0] - c[1], 0.0, 1e-9);
}

TEST(WeightsFromCapacities, VertexTargetGivesMinusInfinity) {
    const CellFunctions f = CellFunctions::linear({{0.0}, {1.0}, {2.0}});
    const VoronoiDomain dom = line_domain(f);
    const auto c = weights_from_capacities(f, std::vector<double>{1.0, 0.0, 0.0}, dom.uniform(), dom);
    EXPECT_TRUE(std::isfinite(c[0]));
    EXPECT_EQ(c[1], -kInf);
    EXPECT_EQ(c[2], -kInf);
}

TEST(WeightsFromCapacities, ReproducesNecklaceCuts) {
    // uniform on [0,1]; a split at 0.2 and 0.7 means capacities (0.2, 0.5, 0.3)
    const CellFunctions f = CellFunctions::linear({{0.0}, {1.0}, {2.0}});
    const VoronoiDomain dom = line_domain(f);
    const auto c = weights_from_capacities(f, std::vector<double>{0.2, 0.5, 0.3}, dom.uniform(), dom);
    const auto br = interior_breaks(cells(f, c, dom), unit1);
    ASSERT_EQ(br.size(), 2u);
    EXPECT_NEAR(br[0], 0.2, 1e-9);
    EXPECT_NEAR(br[1], 0.7, 1e-9);
    // analytic inverse: c_1 - c_0 = -0.2, c_2 - c_1 = -0.7
    EXPECT_NEAR(c[1] - c[0], -0.2, 1e-9);
    EXPECT_NEAR(c[2] - c[1], -0.7, 1e-9);
}

TEST(WeightsFromCapacities, RoundTripOnRandomInstances) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 10; ++trial) {
        const bool conical = trial % 2 == 1;
        CellFunctions f = conical ? CellFunctions::simplex({{0.0, 0.0}, {3.0, 0.2}, {0.5, 2.5}})
                                  : CellFunctions::linear({{g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}, {g(rng), g(rng)}});
        const VoronoiDomain dom = conical ? VoronoiDomain::for_functions(f, f.simplex_box())
                                          : VoronoiDomain::for_functions(f, Box{{-1.0, -1.0}, {2.0, 1.0}});
        const BoxMeasure mu = dom.uniform();
        std::vector<double> c(f.n());
        for (double& v : c) v = 0.3 * g(rng);
        const auto w = capacities(f, c, mu, dom);
        const auto c2 = weights_from_capacities(f, w, mu, dom);
        const auto w2 = capacities(f, c2, mu, dom);
        for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w2[i], w[i], 1e-6) << "trial " << trial;
    }
}

TEST(Capacities, MonotoneInOwnWeight) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const CellFunctions f = CellFunctions::linear({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -0.5}});
    const VoronoiDomain dom = VoronoiDomain::for_functions(f, Box{{-1.0, -1.0}, {1.0, 1.0}});
    const BoxMeasure mu = dom.uniform();
    for (int s = 0; s < 50; ++s) {
        std::vector<double> c{g(rng), g(rng), g(rng)};
        const std::size_t i = rng() % 3;
        const auto w = capacities(f, c, mu, dom);
        c[i] += std::abs(g(rng));
        EXPECT_GE(capacities(f, c, mu, dom)[i], w[i] - 1e-15);
    }
}

TEST(Capacities, ShiftInvariance) {
    const CellFunctions f = CellFunctions::linear({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -0.5}});
    const VoronoiDomain dom = VoronoiDomain::for_functions(f, Box{{-1.0, -1.0}, {1.0, 1.0}});
    const std::vector<double> c{0.1, -0.2, 0.4}, d{1.1, 0.8, 1.4};
    const auto a = cells(f, c, dom), b = cells(f, d, dom);
    const BoxMeasure mu = dom.uniform();
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(mass_of_region(mu, a[i]), mass_of_region(mu, b[i]), 1e-15);
}

TEST(Cells, CoverAndDisjointness) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const CellFunctions f = triangle();
    const VoronoiDomain dom = VoronoiDomain::for_functions(f, f.simplex_box());
    const std::vector<double> c{0.3, -0.1, 0.2};
    const auto cs = cells(f, c, dom);
    const BoxMeasure mu = dom.uniform();
    double total = 0.0;
    for (const auto& r : cs) total += mass_of_region(mu, r);
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j) EXPECT_LE(mass_of_region(mu, cs[i].intersect(cs[j])), 1e-9);
    for (int s = 0; s < 1000; ++s) {
        double a = u(rng), b = u(rng);
        if (a + b > 1.0) { a = 1.0 - a; b = 1.0 - b; }
        const std::vector<double> x{4.0 * a, 4.0 * b};
        int in = 0;
        for (const auto& r : cs) in += r.contains(x);
        EXPECT_GE(in, 1);
    }
}

TEST(Cells, ConicalBoundaryLaw) {
    const CellFunctions f = triangle();
    const std::vector<double> c{0.4, -0.3, 0.1};
    const auto alpha = conical_alphas(c);
    // walk along the wall between cells 1 and 2 (it passes through vertex 0)
    const auto h = f.wall(1, 2, c);
    ASSERT_TRUE(h.has_value());
    const std::vector<double> n = h->normal;
    const std::vector<double> dir{-n[1], n[0]};
    std::vector<double> x0(2);
    const double nn = n[0] * n[0] + n[1] * n[1];
    for (int q = 0; q < 2; ++q) x0[q] = h->offset * n[q] / nn;
    for (double s : {-3.0, -1.0, 0.5, 2.0}) {
        const std::vector<double> x{x0[0] + s * dir[0], x0[1] + s * dir[1]};
        if (f.facet_distance(1, x) <= 0 || f.facet_distance(2, x) <= 0) continue;
        EXPECT_NEAR(f.facet_distance(1, x) / f.facet_distance(2, x), alpha[1][2], 1e-6);
    }
}

TEST(SolveFair, OneMeasureTwoCells) {
    const CellFunctions f = CellFunctions::linear({{1.0}, {-1.0}});
    const std::vector<BoxMeasure> ms{BoxMeasure::uniform(unit1)};
    const auto sol = solve_fair(f, ms, 2);
    EXPECT_NE(sol.labels[0], sol.labels[1]);
    EXPECT_NEAR(sol.capacities[0], 0.5, 1e-6);
    EXPECT_LE(sol.residual, 1e-6);
}

TEST(SolveFair, OneDimensionalMatchesNecklace) {
    const std::vector<BoxMeasure> ms{
        BoxMeasure::from_boxes(1, {{Box{{0.0}, {1.0}}, 1.0}, {Box{{0.5}, {2.0}}, 2.0}}),
        BoxMeasure::from_boxes(1, {{Box{{0.2}, {1.2}}, 1.0}, {Box{{1.5}, {2.0}}, 1.0}})};
    const CellFunctions f = CellFunctions::linear({{-1.0}, {0.0}, {1.0}});
    FairOptions o;
    o.tol = 1e-9;
    const auto sol = solve_fair(f, ms, 2, o);
    const auto neck = split_necklace(ms, 2);
    for (int l = 0; l < 2; ++l)
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_NEAR(sol.shares[static_cast<std::size_t>(l)][j], neck.shares[static_cast<std::size_t>(l)][j], 2e-9);
}

TEST(SolveFair, TriangleConicalTwoThieves) {
    const CellFunctions f = triangle();
    const std::vector<BoxMeasure> ms{BoxMeasure::uniform(Box{{0.5, 0.5}, {1.5, 1.5}}),
                                     BoxMeasure::uniform(Box{{0.3, 1.8}, {1.0, 2.6}})};
    const auto sol = solve_fair(f, ms, 2);
    for (int l = 0; l < 2; ++l)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(sol.shares[static_cast<std::size_t>(l)][j], 0.5, 1e-6);
    EXPECT_EQ(sol.technical_condition.rfind("verified", 0), 0u);
    MonteCarloOptions mc;
    mc.samples_per_atom = 1u << 20;
    const auto mcs = shares_monte_carlo(ms, sol.cells, sol.labels, 2, mc);
    for (int l = 0; l < 2; ++l)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(mcs[static_cast<std::size_t>(l)][j], 0.5, 3e-3);
}

TEST(SolveFair, Preconditions) {
    const std::vector<BoxMeasure> ms{BoxMeasure::uniform(unit1)};
    EXPECT_THROW(solve_fair(CellFunctions::linear({{1.0}, {-1.0}, {0.0}}), ms, 2), InputError);
    EXPECT_THROW(solve_fair(CellFunctions::linear({{1.0}, {-1.0}, {0.0}, {2.0}}), ms, 4), InputError);
    const std::vector<BoxMeasure> outside{BoxMeasure::uniform(Box{{3.0, 3.0}, {5.0, 5.0}}),
                                          BoxMeasure::uniform(Box{{0.5, 0.5}, {1.0, 1.0}})};
    EXPECT_THROW(solve_fair(triangle(), outside, 2), InputError);
}
