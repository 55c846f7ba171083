#ifndef FAIRCUT_NESTED_HPP
#define FAIRCUT_NESTED_HPP

// Nested hyperplane partitions with prescribed directions.
//
// A scheme is a binary tree whose internal nodes carry directions. A node
// with direction v and offset c splits its region into H+ = {v.x >= c}
// (handed to the left subtree) and H- = {v.x < c} (right subtree). Leaves
// are the parts, listed left subtree first. Offsets are parametrized by
// reference-measure mass: barycentric weight i is the mass of part i, and
// each offset is the quantile that gives the left subtree its total weight.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "faircut/busolver.hpp"
#include "faircut/errors.hpp"
#include "faircut/measures.hpp"

namespace faircut {

class SchemeTree {
public:
    struct Node {
        std::vector<double> dir;
        int left = -1;   // -1: leaf
        int right = -1;
    };

    static SchemeTree leaf(std::size_t dim) {
        if (dim == 0) throw DimensionError("scheme dimension must be positive");
        SchemeTree s;
        s.dim_ = dim;
        return s;
    }

    static SchemeTree node(std::vector<double> dir, const SchemeTree& left, const SchemeTree& right) {
        if (left.dim_ != right.dim_ || dir.size() != left.dim_)
            throw DimensionError("scheme direction dimensions disagree");
        double norm = 0.0;
        for (double v : dir) norm += v * v;
        norm = std::sqrt(norm);
        if (!(norm > 0.0) || !std::isfinite(norm)) throw InputError("scheme directions must be nonzero");
        for (double& v : dir) v /= norm;
        SchemeTree s;
        s.dim_ = left.dim_;
        s.nodes_.push_back(Node{std::move(dir), -1, -1});
        const int lo = 1, ro = 1 + static_cast<int>(left.nodes_.size());
        if (!left.nodes_.empty()) s.nodes_[0].left = lo;
        for (Node n : left.nodes_) {
            if (n.left >= 0) n.left += lo;
            if (n.right >= 0) n.right += lo;
            s.nodes_.push_back(std::move(n));
        }
        if (!right.nodes_.empty()) s.nodes_[0].right = ro;
        for (Node n : right.nodes_) {
            if (n.left >= 0) n.left += ro;
            if (n.right >= 0) n.right += ro;
            s.nodes_.push_back(std::move(n));
        }
        return s;
    }

    /// Each node hands its H+ side to the next one: parallel directions give
    /// slabs.
    static SchemeTree chain(std::span<const std::vector<double>> dirs, std::size_t dim) {
        SchemeTree s = leaf(dim);
        for (std::size_t i = dirs.size(); i-- > 0;) s = node(dirs[i], s, leaf(dim));
        return s;
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return nodes_.size(); }
    std::size_t leaves() const { return nodes_.size() + 1; }
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return nodes_.empty() ? -1 : 0; }

    std::size_t leaves_of(int node) const {
        if (node < 0) return 1;
        const Node& n = nodes_[static_cast<std::size_t>(node)];
        return leaves_of(n.left) + leaves_of(n.right);
    }

private:
    std::size_t dim_ = 0;
    std::vector<Node> nodes_;
};

struct NestedPartition {
    SchemeTree scheme;
    std::vector<double> offsets;  // one per node, extended reals
    std::vector<int> labels;      // one per part

    /// Parts in leaf order; empty parts included.
    std::vector<ConvexRegion> parts() const {
        std::vector<ConvexRegion> out;
        std::function<void(int, const ConvexRegion&)> visit = [&](int node, const ConvexRegion& r) {
            if (node < 0) {
                out.push_back(r);
                return;
            }
            const auto& n = scheme.nodes()[static_cast<std::size_t>(node)];
            const double c = offsets[static_cast<std::size_t>(node)];
            ConvexRegion plus = r, minus = r;
            plus.add(halfspace_ge(n.dir, c));
            minus.add(halfspace_le(n.dir, c, false));
            visit(n.left, plus);
            visit(n.right, minus);
        };
        visit(scheme.root(), ConvexRegion::whole(scheme.dim()));
        return out;
    }
};

/// Offsets from barycentric part masses under `ref` (nested quantiles);
/// labels are copied.
inline NestedPartition join_to_partition(const JoinPoint& x, const SchemeTree& scheme, const BoxMeasure& ref) {
    if (x.size() != scheme.leaves())
        throw DimensionError("join point has " + std::to_string(x.size()) + " coordinates; scheme has " +
                             std::to_string(scheme.leaves()) + " parts");
    if (ref.dim() != scheme.dim()) throw DimensionError("reference measure and scheme dimensions differ");
    NestedPartition p;
    p.scheme = scheme;
    p.labels = x.labels;
    p.offsets.assign(scheme.size(), 0.0);
    const double total = ref.total_mass();
    std::function<void(int, std::size_t, const ConvexRegion&, double)> visit = [&](int node, std::size_t first,
                                                                                  const ConvexRegion& r, double mass) {
        if (node < 0) return;
        const auto& n = scheme.nodes()[static_cast<std::size_t>(node)];
        const std::size_t nl = scheme.leaves_of(n.left), nr = scheme.leaves_of(n.right);
        double wl = 0.0, wr = 0.0;
        for (std::size_t i = first; i < first + nl; ++i) wl += x.barycentric[i];
        for (std::size_t i = first + nl; i < first + nl + nr; ++i) wr += x.barycentric[i];
        double c;
        if (!(wl > 0.0) || !(mass > 0.0))
            c = kInf;
        else if (!(wr > 0.0))
            c = -kInf;
        else
            c = upper_quantile(ref, r, n.dir, mass * wl / (wl + wr), mass);
        p.offsets[static_cast<std::size_t>(node)] = c;
        ConvexRegion plus = r, minus = r;
        plus.add(halfspace_ge(n.dir, c));
        minus.add(halfspace_le(n.dir, c, false));
        const double mp = c == kInf ? 0.0 : (c == -kInf ? mass : mass_of_region(ref, plus));
        visit(n.left, first, plus, mp);
        visit(n.right, first + nl, minus, std::max(mass - mp, 0.0));
    };
    visit(scheme.root(), 0, ConvexRegion::whole(scheme.dim()), total);
    return p;
}

/// shares[label][measure] for a labeled list of regions.
inline std::vector<std::vector<double>> label_shares(std::span<const BoxMeasure> measures,
                                                     const std::vector<ConvexRegion>& parts,
                                                     const std::vector<int>& labels, int k) {
    std::vector<std::vector<double>> s(static_cast<std::size_t>(k), std::vector<double>(measures.size(), 0.0));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].trivially_empty()) continue;
        for (std::size_t j = 0; j < measures.size(); ++j)
            s[static_cast<std::size_t>(labels[i])][j] += mass_of_region(measures[j], parts[i]) / measures[j].total_mass();
    }
    return s;
}

inline double max_share_error(const std::vector<std::vector<double>>& shares, int k) {
    double r = 0.0;
    for (const auto& row : shares)
        for (double v : row) r = std::max(r, std::abs(v - 1.0 / k));
    return r;
}

struct NestedOptions {
    double tol = 1e-6;
    std::uint64_t seed = 1;
    int grid = 0;
    std::size_t grid_budget = 4000;
    std::size_t max_scheme = 8;
};

struct NestedSolution {
    NestedPartition partition;
    std::vector<std::vector<double>> shares;  // shares[label][measure]
    double residual = 0.0;
};

namespace detail {

inline void check_nested_measures(std::span<const BoxMeasure> measures, std::size_t dim) {
    if (measures.empty()) throw InputError("need at least one measure");
    for (const BoxMeasure& m : measures)
        if (m.dim() != dim) throw DimensionError("measure and scheme dimensions differ");
    if (dim > 3) throw UnsupportedDimension("nested solver needs d <= 3 for exact masses");
}

} // namespace detail

/// Fair split among k (prime) thieves along a scheme of size t(k-1).
inline NestedSolution solve_nested(std::span<const BoxMeasure> measures, const SchemeTree& scheme, int k,
                                   const NestedOptions& opts = {}) {
    detail::check_nested_measures(measures, scheme.dim());
    if (!is_prime(k)) throw InputError("solve_nested: k = " + std::to_string(k) + " is not prime");
    const std::size_t t = measures.size();
    if (scheme.size() != t * static_cast<std::size_t>(k - 1))
        throw InputError("scheme size " + std::to_string(scheme.size()) + " differs from t(k-1) = " +
                         std::to_string(t * static_cast<std::size_t>(k - 1)));
    if (scheme.size() > opts.max_scheme)
        throw InstanceTooLarge("scheme size above " + std::to_string(opts.max_scheme));
    const BoxMeasure ref = reference_measure(measures);
    const std::size_t n = scheme.leaves();
    auto part_masses = [&](const std::vector<double>& w) {
        const NestedPartition p = join_to_partition(JoinPoint{w, std::vector<int>(n, 0)}, scheme, ref);
        const std::vector<ConvexRegion> parts = p.parts();
        std::vector<double> out(t * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(w[i] > 0.0)) continue;  // empty part
            for (std::size_t j = 0; j < t; ++j)
                out[j * n + i] = mass_of_region(measures[j], parts[i]) / measures[j].total_mass();
        }
        return out;
    };
    SolverOptions so;
    so.tol = std::min(opts.tol / 4.0, 1e-10);
    so.seed = opts.seed;
    so.grid = opts.grid;
    so.grid_budget = opts.grid_budget;
    so.starts = 200;
    const auto z = join_zero_masses(part_masses, n, t, k, so);

    NestedSolution sol;
    sol.partition = join_to_partition(z.point, scheme, ref);
    sol.shares = label_shares(measures, sol.partition.parts(), sol.partition.labels, k);
    sol.residual = max_share_error(sol.shares, k);
    if (sol.residual > opts.tol)
        throw PrecisionError("nested split misses the tolerance after verification", sol.residual);
    return sol;
}

/// Composite split: an outer prime split, then a split of every class with
/// the measures restricted to it. Labels of a class-i inner part are
/// i * inner_k + (inner label).
struct NestedForest {
    NestedPartition outer;
    int k = 0;
    int outer_k = 0;
    std::vector<NestedForest> inner;  // one per outer class; empty when k is prime
    std::vector<std::vector<double>> shares;
    double residual = 0.0;

    int inner_k() const { return inner.empty() ? 1 : k / outer_k; }

    std::size_t hyperplanes() const {
        std::size_t h = outer.scheme.size();
        for (const NestedForest& f : inner) h += f.hyperplanes();
        return h;
    }

    /// Final labeled parts (intersections of outer and inner parts).
    std::vector<std::pair<ConvexRegion, int>> labeled_parts() const {
        std::vector<std::pair<ConvexRegion, int>> out;
        const std::vector<ConvexRegion> parts = outer.parts();
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const int c = outer.labels[i];
            if (inner.empty()) {
                out.push_back({parts[i], c});
                continue;
            }
            for (const auto& [q, l] : inner[static_cast<std::size_t>(c)].labeled_parts()) {
                ConvexRegion r = parts[i].intersect(q);
                if (!r.trivially_empty()) out.push_back({std::move(r), c * inner_k() + l});
            }
        }
        return out;
    }
};

inline std::vector<std::vector<double>> forest_shares(std::span<const BoxMeasure> measures, const NestedForest& f) {
    std::vector<ConvexRegion> parts;
    std::vector<int> labels;
    for (auto& [r, l] : f.labeled_parts()) {
        parts.push_back(r);
        labels.push_back(l);
    }
    return label_shares(measures, parts, labels, f.k);
}

/// Split among k thieves using hyperplanes orthogonal to the given
/// directions, t(k-1) of them, consumed in order: the outer split takes the
/// first t(p-1), then each class takes t(k/p - 1).
inline NestedForest solve_nested_composite(std::span<const BoxMeasure> measures,
                                           std::span<const std::vector<double>> directions, int k,
                                           const NestedOptions& opts = {}) {
    if (measures.empty()) throw InputError("need at least one measure");
    const std::size_t d = measures.front().dim();
    detail::check_nested_measures(measures, d);
    if (k < 2) throw InputError("need at least two thieves");
    const std::size_t t = measures.size();
    if (directions.size() != t * static_cast<std::size_t>(k - 1))
        throw InputError("need t(k-1) = " + std::to_string(t * static_cast<std::size_t>(k - 1)) + " directions");
    const std::vector<int> primes = [&] {
        std::vector<int> out;
        int r = k;
        for (int p = 2; p * p <= r; ++p)
            while (r % p == 0) {
                out.push_back(p);
                r /= p;
            }
        if (r > 1) out.push_back(r);
        return out;
    }();
    const int m = primes.front();
    const std::size_t outer_n = t * static_cast<std::size_t>(m - 1);
    NestedOptions child = opts;
    if (primes.size() > 1) child.tol = opts.tol / 2.0;
    NestedForest f;
    f.k = k;
    f.outer_k = m;
    const NestedSolution outer =
        solve_nested(measures, SchemeTree::chain(directions.subspan(0, outer_n), d), m, child);
    f.outer = outer.partition;
    if (primes.size() > 1) {
        const int l = k / m;
        const std::size_t inner_n = t * static_cast<std::size_t>(l - 1);
        const std::vector<ConvexRegion> parts = f.outer.parts();
        for (int c = 0; c < m; ++c) {
            std::vector<ConvexRegion> cls;
            for (std::size_t i = 0; i < parts.size(); ++i)
                if (f.outer.labels[i] == c && !parts[i].trivially_empty()) cls.push_back(parts[i]);
            std::vector<BoxMeasure> restricted;
            for (const BoxMeasure& mu : measures) {
                Restriction r = restrict_exact(mu, cls);
                if (!(r.mass > 0.0)) throw PrecisionError("composite split: a class received no mass", 1.0);
                restricted.push_back(std::move(r.measure));
            }
            const auto dirs = directions.subspan(outer_n + static_cast<std::size_t>(c) * inner_n, inner_n);
            f.inner.push_back(solve_nested_composite(restricted, dirs, l, child));
        }
    }
    f.shares = forest_shares(measures, f);
    f.residual = max_share_error(f.shares, k);
    if (f.residual > opts.tol)
        throw PrecisionError("composite nested split misses the tolerance after verification", f.residual);
    return f;
}

/// True when two labeled partitions agree (label for label) at `samples`
/// random points of `box`, ignoring empty parts. Distinct descriptions of
/// the same geometry are kept as distinct solutions; this reports them.
inline bool same_geometry(const NestedPartition& a, const NestedPartition& b, const Box& box,
                          std::size_t samples = 4096, std::uint64_t seed = 3) {
    const auto pa = a.parts(), pb = b.parts();
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> u;
    for (std::size_t i = 0; i < box.dim(); ++i) u.emplace_back(box.lo[i], box.hi[i]);
    std::vector<double> x(box.dim());
    auto label_at = [&](const std::vector<ConvexRegion>& parts, const std::vector<int>& labels) {
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (parts[i].contains(x)) return labels[i];
        return -1;
    };
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = u[i](rng);
        if (label_at(pa, a.labels) != label_at(pb, b.labels)) return false;
    }
    return true;
}

} // namespace faircut

#endif // FAIRCUT_NESTED_HPP
