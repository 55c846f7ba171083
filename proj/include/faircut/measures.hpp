#ifndef FAIRCUT_MEASURES_HPP
#define FAIRCUT_MEASURES_HPP

// Measures as weighted unions of uniform boxes, convex regions as
// intersections of halfspaces, and mass evaluation between the two.
//
// Mass is exact for d <= 3 (polytope clipping) and stratified Monte Carlo
// with a reported standard error above that.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/rational.hpp>

#include "faircut/errors.hpp"
#include "faircut/geometry.hpp"

namespace faircut {

/// {x : v.x <= c}
inline Halfspace halfspace_le(std::vector<double> v, double c, bool closed = true) {
    return Halfspace{std::move(v), c, closed};
}

/// {x : v.x >= c}
inline Halfspace halfspace_ge(const std::vector<double>& v, double c, bool closed = true) {
    std::vector<double> n(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) n[i] = -v[i];
    return Halfspace{std::move(n), -c, closed};
}

inline std::vector<double> unit_axis(std::size_t dim, std::size_t axis) {
    std::vector<double> e(dim, 0.0);
    e[axis] = 1.0;
    return e;
}

/// Intersection of halfspaces. No halfspaces means the whole space.
struct ConvexRegion {
    std::size_t dim = 0;
    std::vector<Halfspace> halfspaces;

    static ConvexRegion whole(std::size_t d) { return ConvexRegion{d, {}}; }

    static ConvexRegion empty_set(std::size_t d) {
        return ConvexRegion{d, {Halfspace{std::vector<double>(d, 0.0), -1.0, true}}};
    }

    ConvexRegion& add(Halfspace h) {
        halfspaces.push_back(std::move(h));
        return *this;
    }

    ConvexRegion intersect(const ConvexRegion& other) const {
        ConvexRegion r = *this;
        r.halfspaces.insert(r.halfspaces.end(), other.halfspaces.begin(), other.halfspaces.end());
        return r;
    }

    bool contains(std::span<const double> x) const {
        for (const Halfspace& h : halfspaces) {
            if (h.offset == kInf) continue;
            if (h.offset == -kInf || !h.contains(x)) return false;
        }
        return true;
    }

    /// Detects emptiness that is visible without solving an LP.
    bool trivially_empty() const {
        for (const Halfspace& h : halfspaces) {
            if (h.offset == -kInf) return true;
            bool zero = std::all_of(h.normal.begin(), h.normal.end(), [](double c) { return c == 0.0; });
            if (zero && h.offset < 0.0) return true;
        }
        return false;
    }
};

/// One uniform component: density weight / vol(box & clip) on box & clip.
struct BoxAtom {
    Box box;
    double weight = 0.0;
    std::vector<Halfspace> clip;  // empty for a plain box
    double support_volume = 0.0;  // vol(box & clip)
};

struct MassEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = true;
};

struct MonteCarloOptions {
    std::uint64_t seed = 0x5eed;
    std::size_t samples_per_atom = 1u << 14;
};

class BoxMeasure {
public:
    BoxMeasure() = default;

    /// Builds a measure from weighted boxes. Weights are normalized to total
    /// mass one unless `normalize` is false; the factor is kept.
    static BoxMeasure from_boxes(std::size_t dim, const std::vector<std::pair<Box, double>>& atoms,
                                 bool normalize = true) {
        if (dim == 0) throw DimensionError("measure dimension must be at least 1");
        BoxMeasure m;
        m.dim_ = dim;
        double total = 0.0;
        for (const auto& [box, weight] : atoms) {
            if (box.dim() != dim || box.hi.size() != dim)
                throw DimensionError("box dimension does not match measure dimension");
            for (std::size_t i = 0; i < dim; ++i) {
                if (!std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i]) || !(box.lo[i] < box.hi[i]))
                    throw InputError("box bounds must be finite with lo < hi");
            }
            if (!(weight > 0.0) || !std::isfinite(weight)) throw InputError("atom weights must be positive");
            m.atoms_.push_back(BoxAtom{box, weight, {}, box.volume()});
            total += weight;
        }
        m.normalization_ = total;
        if (normalize && total > 0.0)
            for (BoxAtom& a : m.atoms_) a.weight /= total;
        return m;
    }

    /// Uniform probability measure on a single box.
    static BoxMeasure uniform(const Box& box) { return from_boxes(box.dim(), {{box, 1.0}}); }

    /// Uniform probability measure on box & region (region must meet the box).
    static BoxMeasure uniform_on(const Box& box, const ConvexRegion& region);

    std::size_t dim() const { return dim_; }
    const std::vector<BoxAtom>& atoms() const { return atoms_; }
    double normalization() const { return normalization_; }

    double total_mass() const {
        double s = 0.0;
        for (const BoxAtom& a : atoms_) s += a.weight;
        return s;
    }

    bool clipped() const {
        return std::any_of(atoms_.begin(), atoms_.end(), [](const BoxAtom& a) { return !a.clip.empty(); });
    }

    Box bounding_box() const {
        Box b{std::vector<double>(dim_, kInf), std::vector<double>(dim_, -kInf)};
        for (const BoxAtom& a : atoms_)
            for (std::size_t i = 0; i < dim_; ++i) {
                b.lo[i] = std::min(b.lo[i], a.box.lo[i]);
                b.hi[i] = std::max(b.hi[i], a.box.hi[i]);
            }
        return b;
    }

    /// Upper bound on the density of the projection onto `axis`.
    double marginal_density_bound(std::size_t axis) const {
        // sweep over breakpoints of the piecewise-constant bound
        std::vector<std::pair<double, double>> events;
        for (const BoxAtom& a : atoms_) {
            const double width = a.box.hi[axis] - a.box.lo[axis];
            double level = a.weight / width;
            if (!a.clip.empty() && a.support_volume > 0.0)
                level = a.weight * (a.box.volume() / width) / a.support_volume;
            events.emplace_back(a.box.lo[axis], level);
            events.emplace_back(a.box.hi[axis], -level);
        }
        std::sort(events.begin(), events.end(), [](const auto& l, const auto& r) {
            return l.first < r.first || (l.first == r.first && l.second < r.second);
        });
        double cur = 0.0, best = 0.0;
        for (const auto& [x, delta] : events) {
            cur += delta;
            best = std::max(best, cur);
        }
        return best;
    }

    /// Scaled copy: every weight multiplied by `factor`.
    BoxMeasure scaled(double factor) const {
        BoxMeasure m = *this;
        for (BoxAtom& a : m.atoms_) a.weight *= factor;
        return m;
    }

    BoxMeasure translated(std::span<const double> shift) const {
        BoxMeasure m = *this;
        for (BoxAtom& a : m.atoms_) {
            for (std::size_t i = 0; i < dim_; ++i) {
                a.box.lo[i] += shift[i];
                a.box.hi[i] += shift[i];
            }
            for (Halfspace& h : a.clip) {
                double s = 0.0;
                for (std::size_t i = 0; i < dim_; ++i) s += h.normal[i] * shift[i];
                h.offset += s;
            }
        }
        return m;
    }

    /// Adds an atom whose support is box & clip; `weight` is its total mass.
    void add_atom(BoxAtom atom) {
        if (atom.box.dim() != dim_) throw DimensionError("atom dimension mismatch");
        atoms_.push_back(std::move(atom));
    }

    void set_dim(std::size_t d) { dim_ = d; }

private:
    std::size_t dim_ = 0;
    std::vector<BoxAtom> atoms_;
    double normalization_ = 1.0;
};

namespace detail {

inline double exact_fraction(const BoxAtom& atom, const ConvexRegion& r) {
    if (atom.clip.empty()) return geometry::clipped_volume(atom.box, r.halfspaces) / atom.support_volume;
    std::vector<Halfspace> hs;
    hs.reserve(atom.clip.size() + r.halfspaces.size());
    hs.insert(hs.end(), atom.clip.begin(), atom.clip.end());
    hs.insert(hs.end(), r.halfspaces.begin(), r.halfspaces.end());
    return geometry::clipped_volume(atom.box, hs) / atom.support_volume;
}

inline bool in_all(const std::vector<Halfspace>& hs, std::span<const double> x) {
    for (const Halfspace& h : hs) {
        if (h.offset == kInf) continue;
        if (h.offset == -kInf || !h.contains(x)) return false;
    }
    return true;
}

/// Stratified estimate of P(x in r | x in atom support): 2 strata per axis.
inline std::pair<double, double> mc_fraction(const BoxAtom& atom, const ConvexRegion& r,
                                             std::mt19937_64& rng, std::size_t samples) {
    const std::size_t d = atom.box.dim();
    const std::size_t strata = std::size_t{1} << std::min<std::size_t>(d, 10);
    const std::size_t per = std::max<std::size_t>(2, samples / strata);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> x(d);
    double hits_total = 0.0, support_total = 0.0, var = 0.0;
    for (std::size_t s = 0; s < strata; ++s) {
        double hits = 0.0, support = 0.0;
        for (std::size_t k = 0; k < per; ++k) {
            for (std::size_t i = 0; i < d; ++i) {
                const double half = 0.5 * (atom.box.hi[i] - atom.box.lo[i]);
                const double base = atom.box.lo[i] + (((s >> i) & 1u) ? half : 0.0);
                x[i] = base + half * unit(rng);
            }
            if (!in_all(atom.clip, x)) continue;
            support += 1.0;
            if (r.contains(x)) hits += 1.0;
        }
        const double p = hits / static_cast<double>(per);
        var += p * (1.0 - p) / static_cast<double>(per - 1);
        hits_total += hits;
        support_total += support;
    }
    if (support_total == 0.0) return {0.0, 0.0};
    const double frac = hits_total / support_total;
    const double se = std::sqrt(var) / static_cast<double>(strata) *
                      (static_cast<double>(strata * per) / support_total);
    return {frac, se};
}

} // namespace detail

/// Mass of `r` with the error estimate of the evaluation path used.
inline MassEstimate mass_estimate(const BoxMeasure& m, const ConvexRegion& r,
                                  const MonteCarloOptions& mc = {}) {
    if (m.dim() != r.dim) throw DimensionError("measure and region dimensions differ");
    if (r.trivially_empty()) return {0.0, 0.0, true};
    if (m.dim() <= 3) {
        double s = 0.0;
        for (const BoxAtom& a : m.atoms()) s += a.weight * detail::exact_fraction(a, r);
        return {s, 0.0, true};
    }
    std::mt19937_64 rng(mc.seed);
    double s = 0.0, var = 0.0;
    for (const BoxAtom& a : m.atoms()) {
        const auto [frac, se] = detail::mc_fraction(a, r, rng, mc.samples_per_atom);
        s += a.weight * frac;
        var += a.weight * a.weight * se * se;
    }
    return {s, std::sqrt(var), false};
}

/// Monte Carlo estimate regardless of dimension; an independent check of the
/// exact path.
inline MassEstimate mass_estimate_mc(const BoxMeasure& m, const ConvexRegion& r,
                                     const MonteCarloOptions& mc = {}) {
    if (m.dim() != r.dim) throw DimensionError("measure and region dimensions differ");
    std::mt19937_64 rng(mc.seed);
    double s = 0.0, var = 0.0;
    for (const BoxAtom& a : m.atoms()) {
        const auto [frac, se] = detail::mc_fraction(a, r, rng, mc.samples_per_atom);
        s += a.weight * frac;
        var += a.weight * a.weight * se * se;
    }
    return {s, std::sqrt(var), false};
}

inline double mass_of_region(const BoxMeasure& m, const ConvexRegion& r) {
    return mass_estimate(m, r).value;
}

/// Sum of masses; the regions are assumed interior-disjoint.
inline double mass_of_union(const BoxMeasure& m, std::span<const ConvexRegion> rs) {
    double s = 0.0;
    for (const ConvexRegion& r : rs) s += mass_of_region(m, r);
    return s;
}

/// Mass of the axis-aligned (possibly unbounded) rectangle `window`.
inline double mass_of_box(const BoxMeasure& m, const Box& window) {
    if (m.clipped()) {
        ConvexRegion r = ConvexRegion::whole(m.dim());
        for (std::size_t i = 0; i < m.dim(); ++i) {
            if (window.lo[i] > -kInf) r.add(halfspace_ge(unit_axis(m.dim(), i), window.lo[i]));
            if (window.hi[i] < kInf) r.add(halfspace_le(unit_axis(m.dim(), i), window.hi[i]));
        }
        return mass_of_region(m, r);
    }
    double s = 0.0;
    for (const BoxAtom& a : m.atoms()) {
        double f = a.weight;
        for (std::size_t i = 0; i < m.dim() && f > 0.0; ++i) {
            const double lo = std::max(a.box.lo[i], window.lo[i]);
            const double hi = std::min(a.box.hi[i], window.hi[i]);
            f = hi > lo ? f * (hi - lo) / (a.box.hi[i] - a.box.lo[i]) : 0.0;
        }
        s += f;
    }
    return s;
}

inline BoxMeasure BoxMeasure::uniform_on(const Box& box, const ConvexRegion& region) {
    BoxMeasure m;
    m.dim_ = box.dim();
    BoxAtom a{box, 1.0, region.halfspaces, 0.0};
    a.support_volume = m.dim_ <= 3 ? geometry::clipped_volume(box, region.halfspaces) : box.volume();
    if (!(a.support_volume > 0.0)) throw InputError("uniform_on: region misses the box");
    m.atoms_.push_back(std::move(a));
    m.normalization_ = 1.0;
    return m;
}

/// Restriction of a measure: the normalized restricted measure plus the mass
/// it had before normalization.
struct Restriction {
    BoxMeasure measure;
    double mass = 0.0;
    double error = 0.0;  // total-variation bound of the approximation
};

/// Exact restriction to a union of interior-disjoint convex regions: atoms
/// keep their boxes and gain the region's halfspaces as clips.
inline Restriction restrict_exact(const BoxMeasure& m, std::span<const ConvexRegion> regions) {
    BoxMeasure out;
    out.set_dim(m.dim());
    double total = 0.0;
    for (const ConvexRegion& r : regions) {
        if (r.dim != m.dim()) throw DimensionError("measure and region dimensions differ");
        if (r.trivially_empty()) continue;
        for (const BoxAtom& a : m.atoms()) {
            const double frac = detail::exact_fraction(a, r);
            if (!(frac > 0.0)) continue;
            BoxAtom b = a;
            b.clip.insert(b.clip.end(), r.halfspaces.begin(), r.halfspaces.end());
            b.support_volume = a.support_volume * frac;
            b.weight = a.weight * frac;
            total += b.weight;
            out.add_atom(std::move(b));
        }
    }
    Restriction res{total > 0.0 ? out.scaled(1.0 / total) : out, total, 0.0};
    return res;
}

inline Restriction restrict_exact(const BoxMeasure& m, const ConvexRegion& r) {
    return restrict_exact(m, std::span<const ConvexRegion>(&r, 1));
}

struct RestrictOptions {
    double rtol = 1e-9;
    std::size_t max_atoms = std::size_t{1} << 21;
};

namespace detail {

inline std::vector<Halfspace> joined(const BoxAtom& a, const ConvexRegion& r) {
    std::vector<Halfspace> hs = a.clip;
    hs.insert(hs.end(), r.halfspaces.begin(), r.halfspaces.end());
    return hs;
}

} // namespace detail

namespace detail {

struct PileBuilder {
    std::vector<std::pair<Box, double>> boxes;
    double mass = 0.0;
    double error = 0.0;
};

/// 2D: slice the support into strips along the better axis; each strip
/// becomes one mass-preserving box. The error of a strip is the exact
/// total-variation distance 2 rho (A - |Q & box|).
inline void pile_2d(const Box& cell, const std::vector<Halfspace>& hs, double density, double budget,
                    std::size_t max_atoms, PileBuilder& out) {
    const geometry::Polygon2 support = geometry::clipped_polygon(cell, hs);
    if (support.empty()) return;
    const double total_area = geometry::area(support);
    if (!(total_area > 0.0)) return;
    Box tight{{kInf, kInf}, {-kInf, -kInf}};
    for (const auto& p : support)
        for (int i = 0; i < 2; ++i) {
            tight.lo[i] = std::min(tight.lo[i], p[i]);
            tight.hi[i] = std::max(tight.hi[i], p[i]);
        }
    if (total_area >= tight.volume() * (1.0 - 1e-13)) {
        out.boxes.emplace_back(tight, density * total_area);
        out.mass += density * total_area;
        return;
    }

    auto build = [&](std::size_t axis, std::size_t strips, std::vector<std::pair<Box, double>>* sink) {
        const std::size_t other = 1 - axis;
        const double w = (tight.hi[axis] - tight.lo[axis]) / static_cast<double>(strips);
        double err = 0.0;
        for (std::size_t s = 0; s < strips; ++s) {
            const double a = tight.lo[axis] + w * static_cast<double>(s);
            const double b = s + 1 == strips ? tight.hi[axis] : a + w;
            geometry::Vec2 na{0.0, 0.0};
            na[axis] = -1.0;
            geometry::Vec2 nb{0.0, 0.0};
            nb[axis] = 1.0;
            geometry::Polygon2 q = geometry::clip(geometry::clip(support, na, -a), nb, b);
            if (q.empty()) continue;
            const double area = geometry::area(q);
            if (!(area > 0.0)) continue;
            double lo = kInf, hi = -kInf;
            for (const auto& p : q) {
                lo = std::min(lo, p[other]);
                hi = std::max(hi, p[other]);
            }
            const double height = area / (b - a);
            // centre the box on the middle of the strip's extent
            const double centre = 0.5 * (lo + hi);
            const double y0 = std::max(lo, centre - 0.5 * height);
            const double y1 = std::min(hi, y0 + height);
            Box box{{0.0, 0.0}, {0.0, 0.0}};
            box.lo[axis] = a;
            box.hi[axis] = b;
            box.lo[other] = y0;
            box.hi[other] = y1 > y0 ? y1 : y0 + height;
            geometry::Vec2 lo_n{0.0, 0.0}, hi_n{0.0, 0.0};
            lo_n[other] = -1.0;
            hi_n[other] = 1.0;
            const geometry::Polygon2 overlap = geometry::clip(geometry::clip(q, lo_n, -box.lo[other]), hi_n, box.hi[other]);
            const double shared = overlap.empty() ? 0.0 : geometry::area(overlap);
            err += 2.0 * density * std::max(0.0, area - shared);
            if (sink) sink->emplace_back(std::move(box), density * area);
        }
        return err;
    };

    std::size_t axis = build(0, 64, nullptr) <= build(1, 64, nullptr) ? 0 : 1;
    std::size_t strips = 16;
    double err = build(axis, strips, nullptr);
    while (err >= budget) {
        strips *= 2;
        if (out.boxes.size() + strips > max_atoms)
            throw PrecisionError("restrict: atom budget exhausted before reaching rtol", err);
        err = build(axis, strips, nullptr);
    }
    build(axis, strips, &out.boxes);
    out.mass += density * total_area;
    out.error += err;
}

/// Any dimension <= 3: kd-subdivision, boundary leaves keep their exact mass
/// spread over the leaf; leaf error 2 q f (1 - f).
inline void pile_kd(const Box& cell, const std::vector<Halfspace>& hs, double density, double budget,
                    std::size_t max_atoms, PileBuilder& out) {
    struct Leaf {
        Box box;
        double mass;
        double error;
    };
    auto cmp = [](const Leaf& a, const Leaf& b) { return a.error < b.error; };
    std::priority_queue<Leaf, std::vector<Leaf>, decltype(cmp)> open(cmp);
    double err = 0.0;
    auto push = [&](const Box& c) {
        const geometry::AxisReduction red = geometry::reduce_axis_aligned(c, hs);
        if (red.empty) return;
        const double inside = geometry::clipped_volume(red.box, hs);
        if (!(inside > 0.0)) return;
        const double vol = red.box.volume();
        const double f = std::min(1.0, inside / vol);
        if (f >= 1.0 - 1e-13) {
            out.boxes.emplace_back(red.box, density * inside);
            out.mass += density * inside;
            return;
        }
        Leaf leaf{red.box, density * inside, 2.0 * density * vol * f * (1.0 - f)};
        err += leaf.error;
        open.push(std::move(leaf));
    };
    push(cell);
    while (!open.empty() && err >= budget) {
        if (out.boxes.size() + open.size() >= max_atoms)
            throw PrecisionError("restrict: atom budget exhausted before reaching rtol", err);
        Leaf leaf = open.top();
        open.pop();
        err -= leaf.error;
        std::size_t axis = 0;
        for (std::size_t i = 1; i < leaf.box.dim(); ++i)
            if (leaf.box.hi[i] - leaf.box.lo[i] > leaf.box.hi[axis] - leaf.box.lo[axis]) axis = i;
        const double mid = 0.5 * (leaf.box.lo[axis] + leaf.box.hi[axis]);
        Box left = leaf.box, right = leaf.box;
        left.hi[axis] = mid;
        right.lo[axis] = mid;
        push(left);
        push(right);
    }
    while (!open.empty()) {
        out.boxes.emplace_back(open.top().box, open.top().mass);
        out.mass += open.top().mass;
        open.pop();
    }
    out.error += std::max(0.0, err);
}

} // namespace detail

/// Box-pile approximation of m restricted to r. Each piece keeps its exact
/// mass; refinement continues until the total-variation distance to the true
/// restriction is below rtol, or throws PrecisionError with the achieved error.
inline Restriction restrict_measure(const BoxMeasure& m, const ConvexRegion& r,
                                    const RestrictOptions& opts = {}) {
    if (m.dim() != r.dim) throw DimensionError("measure and region dimensions differ");
    if (m.dim() > 3) throw UnsupportedDimension("restrict requires d <= 3");
    const double total = m.total_mass();
    detail::PileBuilder pile;
    for (const BoxAtom& a : m.atoms()) {
        const std::vector<Halfspace> hs = detail::joined(a, r);
        const double density = a.weight / a.support_volume;
        const double budget = opts.rtol * a.weight / total;
        if (m.dim() == 2)
            detail::pile_2d(a.box, hs, density, budget, opts.max_atoms, pile);
        else
            detail::pile_kd(a.box, hs, density, budget, opts.max_atoms, pile);
    }
    Restriction res;
    res.mass = pile.mass;
    res.error = pile.error;
    if (pile.boxes.empty()) {
        res.measure.set_dim(m.dim());
        return res;
    }
    res.measure = BoxMeasure::from_boxes(m.dim(), pile.boxes, true);
    return res;
}

/// Mass of region & {dir . x <= c}.
inline double halfspace_mass(const BoxMeasure& m, const ConvexRegion& region,
                             const std::vector<double>& dir, double c) {
    ConvexRegion r = region;
    r.add(halfspace_le(dir, c));
    return mass_of_region(m, r);
}

/// Range of dir . x over a box.
inline std::pair<double, double> projection_range(const Box& box, const std::vector<double>& dir) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) {
        const double a = dir[i] * box.lo[i], b = dir[i] * box.hi[i];
        lo += std::min(a, b);
        hi += std::max(a, b);
    }
    return {lo, hi};
}

/// Offset c such that mass(region & {dir.x >= c}) == upper_mass.
/// upper_mass must lie strictly between 0 and mass(region).
inline double upper_quantile(const BoxMeasure& m, const ConvexRegion& region, const std::vector<double>& dir,
                             double upper_mass, double region_mass) {
    const auto [lo, hi] = projection_range(m.bounding_box(), dir);
    const double span = hi - lo;
    auto g = [&](double c) {
        ConvexRegion r = region;
        r.add(halfspace_ge(dir, c));
        return mass_of_region(m, r) - upper_mass;
    };
    double a = lo, b = hi;
    double ga = region_mass - upper_mass, gb = -upper_mass;
    if (!(ga > 0.0) || !(gb < 0.0)) throw QuantileError("quantile target outside the region mass");
    boost::uintmax_t iters = 200;
    auto tol = [span](double x, double y) { return std::abs(x - y) <= 4e-16 * (std::abs(x) + std::abs(y) + span); };
    try {
        const auto [r0, r1] = boost::math::tools::toms748_solve(g, a, b, ga, gb, tol, iters);
        return 0.5 * (r0 + r1);
    } catch (const std::exception& e) {
        throw QuantileError(std::string("quantile inversion failed: ") + e.what());
    }
}

/// Monotone identification of [0,1] with the extended line [-inf, +inf].
class AxisCompactification {
public:
    /// u -> tan(pi (u - 1/2)), the same for every axis.
    static AxisCompactification standard() {
        AxisCompactification c;
        c.standard_ = true;
        return c;
    }

    /// Quantile function of the marginal of a plain box measure along `axis`.
    static AxisCompactification from_marginal(const BoxMeasure& ref, std::size_t axis) {
        if (ref.clipped()) throw InputError("compactification needs a plain box measure");
        std::vector<double> xs;
        for (const BoxAtom& a : ref.atoms()) {
            xs.push_back(a.box.lo[axis]);
            xs.push_back(a.box.hi[axis]);
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        AxisCompactification c;
        c.knots_ = xs;
        c.cdf_.assign(xs.size(), 0.0);
        const double total = ref.total_mass();
        for (std::size_t k = 0; k < xs.size(); ++k) {
            double s = 0.0;
            for (const BoxAtom& a : ref.atoms()) {
                const double lo = a.box.lo[axis], hi = a.box.hi[axis];
                if (xs[k] >= hi)
                    s += a.weight;
                else if (xs[k] > lo)
                    s += a.weight * (xs[k] - lo) / (hi - lo);
            }
            c.cdf_[k] = s / total;
        }
        c.cdf_.front() = 0.0;
        c.cdf_.back() = 1.0;
        return c;
    }

    double to_real(double u) const {
        if (u <= 0.0) return -kInf;
        if (u >= 1.0) return kInf;
        if (standard_) return std::tan(M_PI * (u - 0.5));
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        const auto k = static_cast<std::size_t>(it - cdf_.begin());
        if (k == 0) return knots_.front();
        const double f0 = cdf_[k - 1], f1 = cdf_[k];
        const double t = f1 > f0 ? (u - f0) / (f1 - f0) : 1.0;
        return knots_[k - 1] + t * (knots_[k] - knots_[k - 1]);
    }

    double to_unit(double x) const {
        if (x == -kInf) return 0.0;
        if (x == kInf) return 1.0;
        if (standard_) return std::atan(x) / M_PI + 0.5;
        if (x <= knots_.front()) return 0.0;
        if (x >= knots_.back()) return 1.0;
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        const auto k = static_cast<std::size_t>(it - knots_.begin());
        const double t = (x - knots_[k - 1]) / (knots_[k] - knots_[k - 1]);
        return cdf_[k - 1] + t * (cdf_[k] - cdf_[k - 1]);
    }

private:
    bool standard_ = false;
    std::vector<double> knots_;
    std::vector<double> cdf_;
};

/// Average of the measures, mixed with a uniform floor on their common
/// bounding box so that every open subset of the box has positive mass.
inline BoxMeasure reference_measure(std::span<const BoxMeasure> measures, double floor_weight = 0.05) {
    if (measures.empty()) throw InputError("reference measure needs at least one measure");
    const std::size_t d = measures.front().dim();
    BoxMeasure ref;
    ref.set_dim(d);
    Box bb{std::vector<double>(d, kInf), std::vector<double>(d, -kInf)};
    const double share = (1.0 - floor_weight) / static_cast<double>(measures.size());
    for (const BoxMeasure& m : measures) {
        if (m.dim() != d) throw DimensionError("measures of different dimensions");
        const double total = m.total_mass();
        for (const BoxAtom& a : m.atoms()) {
            BoxAtom b = a;
            b.weight = a.weight / total * share;
            ref.add_atom(std::move(b));
            for (std::size_t i = 0; i < d; ++i) {
                bb.lo[i] = std::min(bb.lo[i], a.box.lo[i]);
                bb.hi[i] = std::max(bb.hi[i], a.box.hi[i]);
            }
        }
    }
    ref.add_atom(BoxAtom{bb, floor_weight, {}, bb.volume()});
    return ref;
}

/// Exact weighted point set; an oracle stand-in for measures concentrated
/// near points. Never handed to the continuous solvers.
class PointMeasure {
public:
    using Rational = boost::rational<std::int64_t>;

    struct Atom {
        std::vector<double> point;
        Rational weight;
    };

    static PointMeasure from_points(std::size_t dim, std::vector<Atom> atoms) {
        PointMeasure m;
        m.dim_ = dim;
        Rational total(0);
        for (const Atom& a : atoms) {
            if (a.point.size() != dim) throw DimensionError("point dimension mismatch");
            if (a.weight <= Rational(0)) throw InputError("point weights must be positive");
            total += a.weight;
        }
        if (total == Rational(0)) throw InputError("point measure has no atoms");
        for (Atom& a : atoms) a.weight /= total;
        m.atoms_ = std::move(atoms);
        return m;
    }

    std::size_t dim() const { return dim_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

private:
    std::size_t dim_ = 0;
    std::vector<Atom> atoms_;
};

/// Exact mass of a region under a point measure, honouring closed/open
/// halfspace flags.
inline PointMeasure::Rational mass_of_region(const PointMeasure& m, const ConvexRegion& r) {
    if (m.dim() != r.dim) throw DimensionError("measure and region dimensions differ");
    PointMeasure::Rational s(0);
    for (const auto& a : m.atoms())
        if (r.contains(a.point)) s += a.weight;
    return s;
}

} // namespace faircut

#endif // FAIRCUT_MEASURES_HPP
