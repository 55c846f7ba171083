#include <gtest/gtest.h>

#include <vector>

#include "faircut/busolver.hpp"

using namespace faircut;

TEST(AntipodalZero, RejectsDimensionMismatch) {
    auto id = [](const OctahedralPoint& x) { return x.coords(); };
    EXPECT_THROW(antipodal_zero(id, 1, 2), DimensionError);
}

TEST(AntipodalZero, CircleCoordinate) {
    auto f = [](const OctahedralPoint& x) { return std::vector<double>{x[0]}; };
    auto z = antipodal_zero(f, 1, 1);
    EXPECT_LE(std::abs(z.point[0]), 1e-9);
    EXPECT_NEAR(std::abs(z.point[1]), 1.0, 1e-9);
}

TEST(AntipodalZero, LinearSystemOnTwoSphere) {
    auto f = [](const OctahedralPoint& x) {
        return std::vector<double>{x[0] + 0.3 * x[1], x[1] - 0.1 * x[2]};
    };
    auto z = antipodal_zero(f, 2, 2);
    EXPECT_LE(z.residual, 1e-9);
    // kernel direction (-0.03, 0.1, 1), L1 norm 1.13
    const double s = z.point[2] > 0 ? 1.0 : -1.0;
    EXPECT_NEAR(z.point[0], s * -0.03 / 1.13, 1e-8);
    EXPECT_NEAR(z.point[1], s * 0.1 / 1.13, 1e-8);
    EXPECT_NEAR(z.point[2], s * 1.0 / 1.13, 1e-8);
}

TEST(AntipodalZero, AuditCatchesNonOddMap) {
    auto f = [](const OctahedralPoint& x) { return std::vector<double>{x[0] * x[0] + 0.1}; };
    EXPECT_THROW(antipodal_zero(f, 1, 1), ContractError);
}

TEST(AntipodalZero, NoZeroWhenAuditDisabled) {
    // not odd: 0.5 + |x0| never vanishes
    auto f = [](const OctahedralPoint& x) { return std::vector<double>{0.5 + std::abs(x[0])}; };
    SolverOptions o;
    o.audit = false;
    try {
        antipodal_zero(f, 1, 1, o);
        FAIL() << "expected NoZeroFound";
    } catch (const NoZeroFound& e) {
        EXPECT_NEAR(e.best_residual(), 0.5, 1e-9);
    }
}

TEST(AntipodalZero, Deterministic) {
    auto f = [](const OctahedralPoint& x) {
        return std::vector<double>{std::sin(x[0]) + x[1] * x[2] * x[3], x[1] - 0.4 * x[3] + x[0] * x[0] * x[0],
                                   x[2] + 0.2 * x[0]};
    };
    auto a = antipodal_zero(f, 3, 3);
    auto b = antipodal_zero(f, 3, 3);
    EXPECT_EQ(a.point.coords(), b.point.coords());
    EXPECT_LE(a.residual, 1e-9);
}

namespace {

// necklace test map of the uniform measure on [0,1]: part i is
// [w_0 + ... + w_{i-1}, w_0 + ... + w_i]
std::vector<double> uniform_parts(const std::vector<double>& w) { return w; }

std::vector<double> necklace_map(const JoinPoint& x, int k) {
    std::vector<double> out(static_cast<std::size_t>(k), -1.0 / k);
    for (std::size_t i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(x.labels[i])] += x.barycentric[i];
    return out;
}

} // namespace

TEST(JoinZero, RejectsCompositeK) {
    EXPECT_THROW(join_zero_masses(uniform_parts, 3, 1, 4), InputError);
}

TEST(JoinZero, MedianForTwoThieves) {
    auto z = join_zero_masses(uniform_parts, 2, 1, 2);
    EXPECT_LE(z.residual, 1e-9);
    EXPECT_NEAR(z.point.barycentric[0], 0.5, 1e-9);
    EXPECT_NE(z.point.labels[0], z.point.labels[1]);
}

TEST(JoinZero, ThirdsForThreeThieves) {
    auto f = [](const JoinPoint& x) { return necklace_map(x, 3); };
    auto z = join_zero(f, 3, 3);
    EXPECT_LE(z.residual, 1e-9);
    EXPECT_NEAR(z.point.barycentric[0], 1.0 / 3, 1e-9);
    EXPECT_NEAR(z.point.barycentric[0] + z.point.barycentric[1], 2.0 / 3, 1e-9);
    std::vector<int> l = z.point.labels;
    std::sort(l.begin(), l.end());
    EXPECT_EQ(l, (std::vector<int>{0, 1, 2}));
}

TEST(JoinZero, StructuredAndGenericAgree) {
    auto f = [](const JoinPoint& x) { return necklace_map(x, 3); };
    auto a = join_zero(f, 3, 3);
    auto b = join_zero_masses(uniform_parts, 3, 1, 3);
    EXPECT_LE(b.residual, 1e-9);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a.point.barycentric[i], b.point.barycentric[i], 1e-8);
}

TEST(JoinZero, EquivarianceAudit) {
    // label 0 weighted differently from the others
    auto f = [](const JoinPoint& x) {
        auto v = necklace_map(x, 3);
        v[0] *= 2.0;
        return v;
    };
    EXPECT_THROW(join_zero(f, 3, 3), ContractError);
}

TEST(JoinZero, TwoLabelsMatchAntipodalPath) {
    // the same test map seen on [2]^{*3} and on S^2
    auto parts = [](const std::vector<double>& w) {
        // two measures: uniform [0,1] and uniform [0.5,1.5], both cut at the
        // same points; the line is mapped affinely onto [0,1.5]
        std::vector<double> m(6, 0.0);
        double a = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            const double lo = 1.5 * a, hi = 1.5 * (a + w[i]);
            m[i] = std::max(0.0, std::min(hi, 1.0) - std::max(lo, 0.0));
            m[3 + i] = std::max(0.0, std::min(hi, 1.5) - std::max(lo, 0.5));
            a += w[i];
        }
        return m;
    };
    auto jz = join_zero_masses(parts, 3, 2, 2);
    auto odd = [&](const OctahedralPoint& x) {
        const JoinPoint p = from_octahedral(x);
        const auto m = parts(p.barycentric);
        std::vector<double> out(2, 0.0);
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t i = 0; i < 3; ++i) out[j] += (p.labels[i] == 0 ? 0.5 : -0.5) * m[j * 3 + i];
        return out;
    };
    auto az = antipodal_zero(odd, 2, 2);
    EXPECT_LE(jz.residual, 1e-9);
    EXPECT_LE(az.residual, 1e-9);
    EXPECT_LE(inf_norm(odd(to_octahedral(jz.point))), 1e-9);
}

TEST(JoinPoint, EqualityIgnoresDeadLabels) {
    JoinPoint a{{0.5, 0.0, 0.5}, {0, 1, 2}};
    JoinPoint b{{0.5, 0.0, 0.5}, {0, 2, 2}};
    JoinPoint c{{0.5, 0.0, 0.5}, {1, 1, 2}};
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
    EXPECT_EQ(a.relabeled(1, 3).labels, (std::vector<int>{1, 2, 0}));
}
