#ifndef FAIRCUT_STAIRPATH_HPP
#define FAIRCUT_STAIRPATH_HPP

// Two-colour plane partitions built from horizontal strips, and the
// stair-like paths that separate their colours.
//
// A cut vector M = (m_1..m_n) describes n strips stacked bottom to top.
// Strip i is monochrome when m_i = 0 and split by a vertical line x_i when
// m_i = 1. Such partitions are parametrized by the octahedral sphere of
// dimension n + w(M) - 1: strip i owns one coordinate (m_i = 0) or two
// (m_i = 1), listed bottom strip first, and the L1 norm of its group is the
// strip's height in compactified y.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "faircut/busolver.hpp"
#include "faircut/errors.hpp"
#include "faircut/measures.hpp"

namespace faircut {

struct CutVector {
    std::vector<int> entries;

    static CutVector ones(std::size_t s) { return CutVector{std::vector<int>(s, 1)}; }

    /// s ones followed by one zero.
    static CutVector ones_then_zero(std::size_t s) {
        CutVector m = ones(s);
        m.entries.push_back(0);
        return m;
    }

    std::size_t n() const { return entries.size(); }
    std::size_t weight() const { return static_cast<std::size_t>(std::count(entries.begin(), entries.end(), 1)); }
    /// n + w(M); the partitions form a sphere of dimension capacity() - 1.
    std::size_t capacity() const { return n() + weight(); }

    void validate() const {
        if (entries.empty()) throw InputError("cut vector must be nonempty");
        for (int e : entries)
            if (e != 0 && e != 1) throw InputError("cut vector entries must be 0 or 1");
    }
};

/// One strip. Monochrome strips (cut == false) have colour left_is_a.
struct Strip {
    bool cut = false;
    double x = 0.0;
    bool left_is_a = true;
};

struct StairPartition {
    CutVector M;
    std::vector<double> y_breaks;  // n - 1 non-decreasing extended reals
    std::vector<Strip> strips;     // bottom to top

    double strip_lo(std::size_t i) const { return i == 0 ? -kInf : y_breaks[i - 1]; }
    double strip_hi(std::size_t i) const { return i + 1 == strips.size() ? kInf : y_breaks[i]; }

    /// Colour of a point; strips are lower-closed, cuts left-closed.
    bool in_a(double x, double y) const {
        for (std::size_t i = 0; i < strips.size(); ++i) {
            if (!(y >= strip_lo(i) && (y < strip_hi(i) || strip_hi(i) == kInf))) continue;
            const Strip& s = strips[i];
            if (!s.cut) return s.left_is_a;
            return (x < s.x) == s.left_is_a;
        }
        return strips.back().cut ? ((x < strips.back().x) == strips.back().left_is_a) : strips.back().left_is_a;
    }

    /// The antipodal partition (B, A).
    StairPartition swapped() const {
        StairPartition p = *this;
        for (Strip& s : p.strips) s.left_is_a = !s.left_is_a;
        return p;
    }

    /// Convex pieces of colour A (or B) as regions.
    std::vector<ConvexRegion> regions(bool side_a) const {
        std::vector<ConvexRegion> out;
        for (std::size_t i = 0; i < strips.size(); ++i) {
            const double lo = strip_lo(i), hi = strip_hi(i);
            if (!(lo < hi)) continue;
            ConvexRegion band = ConvexRegion::whole(2);
            if (lo > -kInf) band.add(halfspace_ge({0.0, 1.0}, lo));
            if (hi < kInf) band.add(halfspace_le({0.0, 1.0}, hi, false));
            const Strip& s = strips[i];
            if (!s.cut) {
                if (s.left_is_a == side_a) out.push_back(band);
                continue;
            }
            ConvexRegion part = band;
            if (s.left_is_a == side_a) {
                if (s.x == -kInf) continue;
                if (s.x < kInf) part.add(halfspace_le({1.0, 0.0}, s.x, false));
            } else {
                if (s.x == kInf) continue;
                if (s.x > -kInf) part.add(halfspace_ge({1.0, 0.0}, s.x));
            }
            out.push_back(part);
        }
        return out;
    }
};

/// Identifications of the extended axes with [0, 1].
struct StairFrame {
    AxisCompactification x = AxisCompactification::standard();
    AxisCompactification y = AxisCompactification::standard();

    static StairFrame standard() { return {}; }

    /// Quantiles of the reference measure of `measures`.
    static StairFrame for_measures(std::span<const BoxMeasure> measures) {
        const BoxMeasure ref = reference_measure(measures);
        return StairFrame{AxisCompactification::from_marginal(ref, 0), AxisCompactification::from_marginal(ref, 1)};
    }
};

/// Sphere point to partition. Coordinates are grouped per strip, bottom
/// strip first. For a cut strip with group (a, b) and height s = |a| + |b|:
/// a >= 0 puts A on the left of x = X((1 + b/s)/2), a < 0 puts B on the left
/// of x = X((1 - b/s)/2). Empty strips get the canonical cut X(1/2).
inline StairPartition sphere_to_partition(const OctahedralPoint& p, const CutVector& M,
                                          const StairFrame& frame = StairFrame::standard()) {
    M.validate();
    if (p.coords().size() != M.capacity())
        throw DimensionError("sphere point has " + std::to_string(p.coords().size()) + " coordinates; cut vector needs " +
                             std::to_string(M.capacity()));
    StairPartition out;
    out.M = M;
    std::size_t c = 0;
    double cum = 0.0;
    for (std::size_t i = 0; i < M.n(); ++i) {
        Strip s;
        double height;
        if (M.entries[i] == 0) {
            const double a = p[c++];
            height = std::abs(a);
            s.cut = false;
            s.left_is_a = a >= 0.0;
        } else {
            const double a = p[c], b = p[c + 1];
            c += 2;
            height = std::abs(a) + std::abs(b);
            s.cut = true;
            if (height > 0.0) {
                s.left_is_a = a >= 0.0;
                const double u = s.left_is_a ? 0.5 * (1.0 + b / height) : 0.5 * (1.0 - b / height);
                s.x = frame.x.to_real(u);
            } else {
                s.left_is_a = true;
                s.x = frame.x.to_real(0.5);
            }
        }
        out.strips.push_back(s);
        cum += height;
        if (i + 1 < M.n()) out.y_breaks.push_back(frame.y.to_real(std::min(cum, 1.0)));
    }
    return out;
}

/// Mass of colour A by axis-aligned windows.
inline double mass_a(const BoxMeasure& m, const StairPartition& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.strips.size(); ++i) {
        const double lo = p.strip_lo(i), hi = p.strip_hi(i);
        if (!(lo < hi)) continue;
        const Strip& st = p.strips[i];
        if (!st.cut) {
            if (st.left_is_a) s += mass_of_box(m, Box{{-kInf, lo}, {kInf, hi}});
            continue;
        }
        if (st.left_is_a) {
            if (st.x > -kInf) s += mass_of_box(m, Box{{-kInf, lo}, {st.x, hi}});
        } else if (st.x < kInf) {
            s += mass_of_box(m, Box{{st.x, lo}, {kInf, hi}});
        }
    }
    return s / m.total_mass();
}

/// Colour-A masses by polygon clipping of the partition's regions.
inline std::vector<double> verified_masses(std::span<const BoxMeasure> measures, const StairPartition& p) {
    const std::vector<ConvexRegion> a = p.regions(true);
    std::vector<double> out;
    for (const BoxMeasure& m : measures) out.push_back(mass_of_union(m, a) / m.total_mass());
    return out;
}

struct StairOptions {
    double tol = 1e-6;
    std::uint64_t seed = 1;
    int grid = 0;
};

struct Equipartition {
    StairPartition partition;
    OctahedralPoint point;
    std::vector<double> masses;  // colour-A share per measure
    double residual = 0.0;
};

namespace detail {

inline void check_planar(std::span<const BoxMeasure> measures) {
    for (const BoxMeasure& m : measures)
        if (m.dim() != 2) throw DimensionError("stair partitions need planar measures");
}

} // namespace detail

/// Partition in C_M giving every measure half to each colour. Needs exactly
/// capacity(M) - 1 measures.
inline Equipartition solve_equipartition(std::span<const BoxMeasure> measures, const CutVector& M,
                                         const StairOptions& opts = {}) {
    M.validate();
    detail::check_planar(measures);
    if (measures.size() + 1 != M.capacity())
        throw DimensionError("cut vector with n + w(M) = " + std::to_string(M.capacity()) + " splits " +
                             std::to_string(M.capacity() - 1) + " measures, got " + std::to_string(measures.size()));
    Equipartition eq;
    if (measures.empty()) {
        eq.point = OctahedralPoint::from_direction({1.0});
        eq.partition = sphere_to_partition(eq.point, M);
        return eq;
    }
    const StairFrame frame = StairFrame::for_measures(measures);
    auto f = [&](const OctahedralPoint& x) {
        const StairPartition p = sphere_to_partition(x, M, frame);
        std::vector<double> out;
        for (const BoxMeasure& m : measures) out.push_back(mass_a(m, p) - 0.5);
        return out;
    };
    SolverOptions so;
    so.tol = std::min(opts.tol / 4.0, 1e-11);
    so.seed = opts.seed;
    so.grid = opts.grid;
    const auto z = antipodal_zero(f, M.capacity() - 1, measures.size(), so);
    eq.point = z.point;
    eq.partition = sphere_to_partition(z.point, M, frame);
    eq.masses = verified_masses(measures, eq.partition);
    for (double v : eq.masses) eq.residual = std::max(eq.residual, std::abs(v - 0.5));
    if (eq.residual > opts.tol)
        throw PrecisionError("stair equipartition misses the tolerance after verification", eq.residual);
    return eq;
}

struct PathVertex {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const PathVertex&, const PathVertex&) = default;
};

/// Polyline from bottom to top, possibly with coordinates at infinity.
/// Segment i joins vertices i and i+1; a horizontal segment flagged
/// through_infinity leaves its start point away from its end point, wraps
/// around through infinity and comes back to the end point.
struct StairPath {
    std::vector<PathVertex> vertices;
    std::vector<bool> through_infinity;  // one flag per segment
    int turns = 0;
    int turn_bound = 0;
    StairPartition partition;  // colours on either side

    bool y_monotone() const {
        for (std::size_t i = 1; i < vertices.size(); ++i)
            if (vertices[i].y < vertices[i - 1].y) return false;
        return true;
    }

    bool axis_parallel() const {
        for (std::size_t i = 1; i < vertices.size(); ++i)
            if (vertices[i].x != vertices[i - 1].x && vertices[i].y != vertices[i - 1].y) return false;
        return true;
    }
};

/// Converts a partition with M = 1_s or 1_s * 0 to its separating path.
/// Neighbouring strips with the same left colour are joined by a direct
/// horizontal segment; a colour flip joins them through infinity. Each join
/// costs at most two turns and a trailing monochrome strip one.
inline StairPath to_path(const StairPartition& p) {
    const CutVector& M = p.M;
    const std::size_t n = M.n();
    bool shape_ok = n >= 1 && M.entries[0] == 1;
    for (std::size_t i = 0; i < n; ++i)
        if (M.entries[i] != 1 && i + 1 != n) shape_ok = false;
    if (!shape_ok) throw UnsupportedShape("to_path needs M = 1_s or 1_s * 0");
    const std::size_t s = M.weight();
    StairPath path;
    path.partition = p;
    path.turn_bound = M.entries.back() == 1 ? static_cast<int>(2 * s - 2) : static_cast<int>(2 * s - 1);

    // nonempty strips as (x, left colour) with x in (-inf, +inf]; x = +inf
    // is a monochrome strip
    struct Run {
        double lo, hi, x;
        bool left_a;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = p.strip_lo(i), hi = p.strip_hi(i);
        if (!(lo < hi)) continue;
        const Strip& st = p.strips[i];
        Run r{lo, hi, st.cut ? st.x : kInf, st.left_is_a};
        if (r.x == -kInf) {
            r.x = kInf;
            r.left_a = !r.left_a;
        }
        if (!runs.empty() && runs.back().x == r.x && runs.back().left_a == r.left_a) {
            runs.back().hi = hi;
            continue;
        }
        runs.push_back(r);
    }

    struct Segment {
        PathVertex a, b;
        bool vertical, wrap;
    };
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        segs.push_back({{runs[i].x, runs[i].lo}, {runs[i].x, runs[i].hi}, true, false});
        if (i + 1 < runs.size()) {
            const double y = runs[i].hi;
            segs.push_back({{runs[i].x, y}, {runs[i + 1].x, y}, false, runs[i].left_a != runs[i + 1].left_a});
        }
    }
    // vertical pieces at infinity at either end are not part of the path
    while (!segs.empty() && segs.front().vertical && std::isinf(segs.front().a.x)) segs.erase(segs.begin());
    while (!segs.empty() && segs.back().vertical && std::isinf(segs.back().a.x)) segs.pop_back();
    if (segs.empty()) return path;

    for (const Segment& g : segs) {
        if (path.vertices.empty() || !(path.vertices.back() == g.a)) {
            if (!path.vertices.empty()) {
                // consecutive segments always share endpoints
                throw Error("internal: disconnected stair path");
            }
            path.vertices.push_back(g.a);
        }
        path.vertices.push_back(g.b);
        path.through_infinity.push_back(g.wrap);
    }
    path.turns = static_cast<int>(segs.size()) - 1;
    if (path.turns > path.turn_bound) throw Error("internal: stair path exceeds its turn bound");
    return path;
}

/// Cut vector used to halve t measures: 1_s for t = 2s - 1, 1_s * 0 for t = 2s.
inline CutVector path_cut_vector(std::size_t t) {
    if (t == 0) throw InputError("need at least one measure");
    return t % 2 == 1 ? CutVector::ones((t + 1) / 2) : CutVector::ones_then_zero(t / 2);
}

struct HalvingPath {
    StairPath path;
    Equipartition equipartition;
};

/// Stair-like path with at most t - 1 turns halving all t measures.
inline HalvingPath halve_with_path(std::span<const BoxMeasure> measures, const StairOptions& opts = {}) {
    const CutVector M = path_cut_vector(measures.size());
    HalvingPath h;
    h.equipartition = solve_equipartition(measures, M, opts);
    h.path = to_path(h.equipartition.partition);
    if (h.path.turns > static_cast<int>(measures.size()) - 1) throw Error("internal: path turn bound violated");
    return h;
}

} // namespace faircut

#endif // FAIRCUT_STAIRPATH_HPP
