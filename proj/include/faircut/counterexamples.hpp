#ifndef FAIRCUT_COUNTEREXAMPLES_HPP
#define FAIRCUT_COUNTEREXAMPLES_HPP

// Numerical non-existence certificates.
//
// Both certificates scan a finite family of candidate partitions on a grid,
// take delta = min over the grid of max_j |mu_j(A) - 1/2|, and extend the
// bound to the continuum with a Lipschitz constant L of that residual in the
// grid coordinates: every candidate is within step/2 per coordinate of a
// node, so the true minimum is at least delta - L*step/2. The certificate
// asks for the stronger L*step < delta/2.
//
// one-one: a vertical and a horizontal line, given by their intersection
// point (a, b); A is the pair of opposite quadrants. Lines at infinity are
// covered because the residual is constant outside the support box.
//
// orthant: corner p and sign pattern s; A = {x : s_i (x_i - p_i) >= 0}.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "faircut/busolver.hpp"
#include "faircut/errors.hpp"
#include "faircut/geometry.hpp"
#include "faircut/measures.hpp"

namespace faircut {

struct NonExistenceCertificate {
    std::string claim;                       // "one-one" or "orthant"
    double step = 0.0;                       // requested grid step
    std::vector<std::size_t> resolution;     // nodes per axis
    std::size_t candidates = 0;              // nodes x orientations
    double delta = 0.0;                      // grid minimum of the max residual
    double lipschitz = 0.0;
    double slack = 0.0;                      // lipschitz * step
    std::vector<double> witness;             // grid argmin
    std::vector<int> orientation;            // its orientation
    std::vector<double> orientation_minima;  // grid minimum per orientation
    std::size_t revalidated = 0;
    double revalidation_min = 0.0;

    bool holds() const {
        return delta > 0.0 && slack < delta / 2.0 && revalidation_min >= delta / 2.0;
    }
};

/// Grid minimum of a scan and where it was attained.
struct ScanResult {
    double min = std::numeric_limits<double>::infinity();
    std::vector<double> witness;
    std::vector<int> orientation;
    std::vector<double> orientation_minima;
    std::vector<std::size_t> resolution;
    std::size_t candidates = 0;
    double lipschitz = 0.0;
    Box box;
};

namespace detail {

/// Nodes lo, ..., hi with spacing at most `step`.
inline std::vector<double> grid_axis(double lo, double hi, double step) {
    const std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-12)) + 1;
    std::vector<double> x(std::max<std::size_t>(n, 2));
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(x.size() - 1);
    return x;
}

inline Box support_box(std::span<const BoxMeasure> measures) {
    const std::size_t d = measures.front().dim();
    Box b;
    b.lo.assign(d, std::numeric_limits<double>::infinity());
    b.hi.assign(d, -std::numeric_limits<double>::infinity());
    for (const BoxMeasure& m : measures)
        for (const BoxAtom& a : m.atoms())
            for (std::size_t i = 0; i < d; ++i) {
                b.lo[i] = std::min(b.lo[i], a.box.lo[i]);
                b.hi[i] = std::max(b.hi[i], a.box.hi[i]);
            }
    return b;
}

/// Longest chord of a convex polygon parallel to `axis`. Chord length is
/// concave along the other axis, so it peaks at a vertex coordinate.
inline double max_chord(const geometry::Polygon2& poly, int axis) {
    const int other = 1 - axis;
    double best = 0.0;
    const std::size_t n = poly.size();
    for (const geometry::Vec2& v : poly) {
        const double t = v[other];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t e = 0; e < n; ++e) {
            const geometry::Vec2& p = poly[e];
            const geometry::Vec2& q = poly[(e + 1) % n];
            const double a = p[other], b = q[other];
            if ((a - t) * (b - t) > 0.0) continue;
            if (a == b) {
                lo = std::min({lo, p[axis], q[axis]});
                hi = std::max({hi, p[axis], q[axis]});
            } else {
                const double s = (t - a) / (b - a);
                const double y = p[axis] + s * (q[axis] - p[axis]);
                lo = std::min(lo, y);
                hi = std::max(hi, y);
            }
        }
        if (hi > lo) best = std::max(best, hi - lo);
    }
    return best;
}

struct WeightedPolygon {
    geometry::Polygon2 poly;
    double density = 0.0;  // weight / area
};

inline std::vector<WeightedPolygon> polygons_of(const BoxMeasure& m) {
    std::vector<WeightedPolygon> out;
    for (const BoxAtom& a : m.atoms()) {
        geometry::Polygon2 p = geometry::clipped_polygon(a.box, a.clip);
        if (p.empty()) continue;
        out.push_back({std::move(p), a.weight / a.support_volume});
    }
    return out;
}

/// Bound on |d mu(A)/da| + |d mu(A)/db|-type coefficients: the marginal
/// density along each axis, density times longest chord, maximized over
/// measures and summed over atoms.
inline double one_one_lipschitz(std::span<const std::vector<WeightedPolygon>> polys) {
    double lx = 0.0, ly = 0.0;
    for (const auto& m : polys) {
        double mx = 0.0, my = 0.0;
        for (const WeightedPolygon& w : m) {
            mx += w.density * max_chord(w.poly, 1);
            my += w.density * max_chord(w.poly, 0);
        }
        lx = std::max(lx, mx);
        ly = std::max(ly, my);
    }
    return lx + ly;
}

inline double opposite_quadrant_mass(const BoxMeasure& m, double a, double b) {
    ConvexRegion pp{2, {halfspace_ge({1.0, 0.0}, a), halfspace_ge({0.0, 1.0}, b)}};
    ConvexRegion mm{2, {halfspace_le({1.0, 0.0}, a, false), halfspace_le({0.0, 1.0}, b, false)}};
    return mass_of_region(m, pp) + mass_of_region(m, mm);
}

inline double orthant_mass(const BoxMeasure& m, std::span<const double> p, std::span<const int> s) {
    ConvexRegion r{m.dim(), {}};
    for (std::size_t i = 0; i < m.dim(); ++i) {
        const std::vector<double> e = unit_axis(m.dim(), i);
        if (s[i] > 0) r.add(halfspace_ge(e, p[i]));
        else r.add(halfspace_le(e, p[i]));
    }
    return mass_of_region(m, r);
}

/// Fraction of [lo, hi] on the signed side of p.
inline double side_fraction(double lo, double hi, double p, int s) {
    const double f = std::clamp((p - lo) / (hi - lo), 0.0, 1.0);
    return s > 0 ? 1.0 - f : f;
}

} // namespace detail

/// Opposite-quadrant residual max_j |mu_j(A(a, b)) - 1/2| via the measures module.
inline double one_one_residual(std::span<const BoxMeasure> measures, double a, double b) {
    double r = 0.0;
    for (const BoxMeasure& m : measures) r = std::max(r, std::abs(detail::opposite_quadrant_mass(m, a, b) - 0.5));
    return r;
}

/// Grid scan of line intersections (a, b) for planar measures.
inline ScanResult scan_one_one(std::span<const BoxMeasure> measures, double step) {
    if (measures.empty()) throw InputError("scan_one_one needs at least one measure");
    if (!(step > 0.0)) throw InputError("grid step must be positive");
    for (const BoxMeasure& m : measures)
        if (m.dim() != 2) throw DimensionError("the (1,1) scan is planar");
    std::vector<std::vector<detail::WeightedPolygon>> polys;
    for (const BoxMeasure& m : measures) polys.push_back(detail::polygons_of(m));

    ScanResult out;
    out.box = detail::support_box(measures);
    const std::vector<double> xs = detail::grid_axis(out.box.lo[0], out.box.hi[0], step);
    const std::vector<double> ys = detail::grid_axis(out.box.lo[1], out.box.hi[1], step);
    out.resolution = {xs.size(), ys.size()};
    out.candidates = xs.size() * ys.size() * 2;
    out.lipschitz = detail::one_one_lipschitz(polys);

    // mu(A+) = 1 - Fx(a) - Fy(b) + 2 C(a, b); A- is the complement, so both
    // orientations share one residual.
    const std::size_t nm = measures.size();
    std::vector<std::vector<double>> fy(nm, std::vector<double>(ys.size(), 0.0));
    for (std::size_t j = 0; j < nm; ++j)
        for (const auto& w : polys[j])
            for (std::size_t iy = 0; iy < ys.size(); ++iy)
                fy[j][iy] += w.density * geometry::area(geometry::clip(w.poly, {0.0, 1.0}, ys[iy]));

    std::vector<std::vector<geometry::Polygon2>> left(nm);
    std::vector<double> fx(nm);
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
        for (std::size_t j = 0; j < nm; ++j) {
            left[j].clear();
            fx[j] = 0.0;
            for (const auto& w : polys[j]) {
                left[j].push_back(geometry::clip(w.poly, {1.0, 0.0}, xs[ix]));
                fx[j] += w.density * geometry::area(left[j].back());
            }
        }
        for (std::size_t iy = 0; iy < ys.size(); ++iy) {
            double r = 0.0;
            for (std::size_t j = 0; j < nm; ++j) {
                double c = 0.0;
                for (std::size_t a = 0; a < polys[j].size(); ++a)
                    if (!left[j][a].empty())
                        c += polys[j][a].density * geometry::area(geometry::clip(left[j][a], {0.0, 1.0}, ys[iy]));
                r = std::max(r, std::abs(0.5 - fx[j] - fy[j][iy] + 2.0 * c));
            }
            if (r < out.min) {
                out.min = r;
                out.witness = {xs[ix], ys[iy]};
                out.orientation = {1};
            }
        }
    }
    out.orientation_minima = {out.min, out.min};
    return out;
}

struct OneOneOptions {
    double slope = 1.0;
    double length = 1.0;
    double width = 1e-3;
    double offset = 0.05;  // orthogonal translation of the second segment
    double step = 1e-3;
    std::size_t revalidate = 1000;
    std::uint64_t seed = 1;
};

/// Uniform measures on thin rectangles around a positive-slope segment from
/// the origin and its translate by `offset` along the left normal.
inline std::vector<BoxMeasure> segment_measures(const OneOneOptions& o) {
    if (!(o.slope > 0.0) || !std::isfinite(o.slope)) throw InputError("segment slope must be positive");
    if (!(o.length > 0.0) || !(o.width > 0.0)) throw InputError("segment length and width must be positive");
    const double s = std::hypot(1.0, o.slope);
    const std::vector<double> u{1.0 / s, o.slope / s};
    const std::vector<double> n{-u[1], u[0]};
    std::vector<BoxMeasure> out;
    for (double shift : {0.0, o.offset}) {
        ConvexRegion r{2, {}};
        r.add(halfspace_ge(u, 0.0)).add(halfspace_le(u, o.length));
        r.add(halfspace_ge(n, shift - o.width / 2.0)).add(halfspace_le(n, shift + o.width / 2.0));
        Box b;
        b.lo.assign(2, std::numeric_limits<double>::infinity());
        b.hi.assign(2, -std::numeric_limits<double>::infinity());
        for (double t : {0.0, o.length})
            for (double w : {-o.width / 2.0, o.width / 2.0})
                for (int i = 0; i < 2; ++i) {
                    const double x = t * u[i] + (shift + w) * n[i];
                    b.lo[i] = std::min(b.lo[i], x);
                    b.hi[i] = std::max(b.hi[i], x);
                }
        out.push_back(BoxMeasure::uniform_on(b, r));
    }
    return out;
}

namespace detail {

template <class Residual>
void revalidate(NonExistenceCertificate& c, const Box& box, std::size_t orientations, std::size_t count,
                std::uint64_t seed, Residual&& residual) {
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> coord;
    for (std::size_t i = 0; i < box.dim(); ++i) coord.emplace_back(box.lo[i], box.hi[i]);
    std::uniform_int_distribution<std::size_t> pick(0, orientations - 1);
    c.revalidated = count;
    c.revalidation_min = std::numeric_limits<double>::infinity();
    std::vector<double> p(box.dim());
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = coord[i](rng);
        c.revalidation_min = std::min(c.revalidation_min, residual(p, pick(rng)));
    }
}

inline NonExistenceCertificate certify(const std::string& claim, double step, const ScanResult& s) {
    NonExistenceCertificate c;
    c.claim = claim;
    c.step = step;
    c.resolution = s.resolution;
    c.candidates = s.candidates;
    c.delta = s.min;
    c.lipschitz = s.lipschitz;
    c.slack = s.lipschitz * step;
    c.witness = s.witness;
    c.orientation = s.orientation;
    c.orientation_minima = s.orientation_minima;
    if (!(c.slack < c.delta / 2.0))
        throw CertificateFailed(claim + ": grid minimum " + std::to_string(c.delta) +
                                    " does not exceed twice the Lipschitz slack " + std::to_string(c.slack),
                                c.delta, c.slack);
    return c;
}

} // namespace detail

/// Certificate that the two segment measures admit no (1,1) chessboard split.
inline NonExistenceCertificate refute_one_one(const OneOneOptions& o = {}) {
    const std::vector<BoxMeasure> ms = segment_measures(o);
    const ScanResult s = scan_one_one(ms, o.step);
    NonExistenceCertificate c = detail::certify("one-one", o.step, s);
    detail::revalidate(c, s.box, 2, o.revalidate, o.seed,
                       [&](const std::vector<double>& p, std::size_t) { return one_one_residual(ms, p[0], p[1]); });
    if (!c.holds())
        throw CertificateFailed("one-one: off-grid revalidation fell below delta/2", c.revalidation_min, c.slack);
    return c;
}

/// max_j |mu_j(orthant(p, s)) - 1/2| via the measures module.
inline double orthant_residual(std::span<const BoxMeasure> measures, std::span<const double> p,
                               std::span<const int> s) {
    double r = 0.0;
    for (const BoxMeasure& m : measures) r = std::max(r, std::abs(detail::orthant_mass(m, p, s) - 0.5));
    return r;
}

/// Sign pattern number `k` (bit i set means s_i = -1).
inline std::vector<int> sign_pattern(std::size_t d, std::size_t k) {
    std::vector<int> s(d);
    for (std::size_t i = 0; i < d; ++i) s[i] = (k >> i) & 1u ? -1 : 1;
    return s;
}

/// Grid scan of orthant corners and all 2^d sign patterns. Measures must be
/// plain (unclipped) box mixtures so the mass factors per axis.
inline ScanResult scan_orthant(std::span<const BoxMeasure> measures, double step,
                               std::size_t max_nodes = 200'000'000) {
    if (measures.empty()) throw InputError("scan_orthant needs at least one measure");
    if (!(step > 0.0)) throw InputError("grid step must be positive");
    const std::size_t d = measures.front().dim();
    if (d < 2 || d > 3) throw UnsupportedDimension("orthant scans support d in {2, 3}");
    for (const BoxMeasure& m : measures) {
        if (m.dim() != d) throw DimensionError("measures must share a dimension");
        for (const BoxAtom& a : m.atoms())
            if (!a.clip.empty()) throw InputError("orthant scans need unclipped boxes");
    }
    ScanResult out;
    out.box = detail::support_box(measures);
    std::vector<std::vector<double>> axes;
    std::size_t nodes = 1;
    for (std::size_t i = 0; i < d; ++i) {
        axes.push_back(detail::grid_axis(out.box.lo[i], out.box.hi[i], step));
        out.resolution.push_back(axes.back().size());
        nodes *= axes.back().size();
    }
    if (nodes > max_nodes) throw BudgetExceeded("orthant grid has " + std::to_string(nodes) + " nodes");
    const std::size_t patterns = std::size_t{1} << d;
    out.candidates = nodes * patterns;
    for (std::size_t i = 0; i < d; ++i) {
        double li = 0.0;
        for (const BoxMeasure& m : measures) li = std::max(li, m.marginal_density_bound(i));
        out.lipschitz += li;
    }
    out.orientation_minima.assign(patterns, std::numeric_limits<double>::infinity());

    // table[j][a][i][side][node]: fraction of atom a of measure j on the side.
    struct AtomTables {
        double weight;
        std::vector<std::array<std::vector<double>, 2>> axis;
    };
    std::vector<std::vector<AtomTables>> tables(measures.size());
    for (std::size_t j = 0; j < measures.size(); ++j)
        for (const BoxAtom& a : measures[j].atoms()) {
            AtomTables t{a.weight, std::vector<std::array<std::vector<double>, 2>>(d)};
            for (std::size_t i = 0; i < d; ++i)
                for (int side = 0; side < 2; ++side)
                    for (double p : axes[i])
                        t.axis[i][side].push_back(detail::side_fraction(a.box.lo[i], a.box.hi[i], p, side == 0 ? 1 : -1));
            tables[j].push_back(std::move(t));
        }

    std::vector<std::size_t> idx(d, 0);
    for (std::size_t node = 0; node < nodes; ++node) {
        std::size_t rest = node;
        for (std::size_t i = 0; i < d; ++i) {
            idx[i] = rest % axes[i].size();
            rest /= axes[i].size();
        }
        for (std::size_t k = 0; k < patterns; ++k) {
            double r = 0.0;
            for (const auto& mt : tables) {
                double mass = 0.0;
                for (const AtomTables& t : mt) {
                    double f = t.weight;
                    for (std::size_t i = 0; i < d; ++i) f *= t.axis[i][(k >> i) & 1u][idx[i]];
                    mass += f;
                }
                r = std::max(r, std::abs(mass - 0.5));
            }
            out.orientation_minima[k] = std::min(out.orientation_minima[k], r);
            if (r < out.min) {
                out.min = r;
                out.witness.resize(d);
                for (std::size_t i = 0; i < d; ++i) out.witness[i] = axes[i][idx[i]];
                out.orientation = sign_pattern(d, k);
            }
        }
    }
    return out;
}

/// Polishes a scan witness with Levenberg-Marquardt on mu_j - 1/2, keeping
/// the sign pattern. Returns the corner and its residual.
inline std::pair<std::vector<double>, double> refine_orthant(std::span<const BoxMeasure> measures,
                                                             const ScanResult& s, double tol = 1e-12) {
    auto f = [&](const std::vector<double>& p) {
        std::vector<double> r;
        for (const BoxMeasure& m : measures) r.push_back(detail::orthant_mass(m, p, s.orientation) - 0.5);
        return r;
    };
    std::size_t evals = 0;
    detail::LmResult lm = detail::levenberg_marquardt(f, s.witness, tol, 100, [](std::vector<double>&) {}, evals);
    const double r = orthant_residual(measures, lm.y, s.orientation);
    return {lm.y, r};
}

struct OrthantOptions {
    std::size_t dim = 2;
    std::vector<double> v;  // empty: (1, 0.618) or (1, 0.618, 0.382)
    double radius = 0.01;
    double step = 1e-3;
    std::size_t count = 3;  // measures at v, 2v, ..., count*v
    std::size_t revalidate = 1000;
    std::uint64_t seed = 1;
};

inline std::vector<double> orthant_direction(const OrthantOptions& o) {
    if (!o.v.empty()) return o.v;
    std::vector<double> v{1.0, 0.618, 0.382};
    v.resize(o.dim);
    return v;
}

/// Cubes of half-side r centred at v, 2v, ..., count*v.
inline std::vector<BoxMeasure> orthant_measures(const OrthantOptions& o) {
    if (o.dim < 2 || o.dim > 3) throw UnsupportedDimension("refute_orthant supports d in {2, 3}");
    const std::vector<double> v = orthant_direction(o);
    if (v.size() != o.dim) throw DimensionError("direction length must equal d");
    std::size_t nonzero = 0;
    for (double x : v) {
        if (!std::isfinite(x)) throw InputError("direction must be finite");
        if (x != 0.0) ++nonzero;
    }
    if (nonzero < 2) throw InputError("direction must not be parallel to a coordinate axis");
    if (!(o.radius > 0.0)) throw InputError("radius must be positive");
    if (o.count < 1) throw InputError("need at least one measure");
    std::vector<BoxMeasure> out;
    for (std::size_t k = 1; k <= o.count; ++k) {
        Box b;
        for (double x : v) {
            b.lo.push_back(static_cast<double>(k) * x - o.radius);
            b.hi.push_back(static_cast<double>(k) * x + o.radius);
        }
        out.push_back(BoxMeasure::uniform(b));
    }
    return out;
}

/// Certificate that the cubes near v, 2v, 3v admit no halving orthant.
inline NonExistenceCertificate refute_orthant(const OrthantOptions& o = {}) {
    const std::vector<BoxMeasure> ms = orthant_measures(o);
    const std::vector<double> v = orthant_direction(o);
    // Neighbouring cubes must have disjoint projections on every axis;
    // otherwise one coordinate hyperplane can cut two of them.
    for (double x : v)
        if (!(std::abs(x) > 2.0 * o.radius))
            throw CertificateFailed("orthant: insufficient separation, radius " + std::to_string(o.radius) +
                                        " against coordinate " + std::to_string(x),
                                    0.0, std::numeric_limits<double>::infinity());
    const ScanResult s = scan_orthant(ms, o.step);
    NonExistenceCertificate c = detail::certify("orthant", o.step, s);
    detail::revalidate(c, s.box, std::size_t{1} << o.dim, o.revalidate, o.seed,
                       [&](const std::vector<double>& p, std::size_t k) {
                           return orthant_residual(ms, p, sign_pattern(o.dim, k));
                       });
    if (!c.holds())
        throw CertificateFailed("orthant: off-grid revalidation fell below delta/2", c.revalidation_min, c.slack);
    return c;
}

} // namespace faircut

#endif // FAIRCUT_COUNTEREXAMPLES_HPP
