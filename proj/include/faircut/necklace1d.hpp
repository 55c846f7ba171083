#ifndef FAIRCUT_NECKLACE1D_HPP
#define FAIRCUT_NECKLACE1D_HPP

// Necklace splitting on the line.
//
// Continuous: t measures on R, k thieves. For prime k the join solver finds
// a labeled partition into t(k-1)+1 intervals; composite k is handled by
// splitting into p classes, restricting every measure to each class and
// splitting again. Discrete: exhaustive search over cut sets for small bead
// strings.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "faircut/busolver.hpp"
#include "faircut/errors.hpp"
#include "faircut/measures.hpp"

namespace faircut {

/// Cuts plus one 0-based label per interval. Interval 0 is (-inf, cuts[0]).
struct NecklaceSplit {
    std::vector<double> cuts;
    std::vector<int> labels;
    int thieves = 0;
    std::vector<std::vector<double>> shares;  // shares[label][measure]
    double residual = 0.0;                    // max |share - 1/k|
    bool composite = false;
};

struct NecklaceOptions {
    double tol = 1e-9;
    std::uint64_t seed = 1;
    int grid = 0;
};

inline std::vector<int> prime_factors(int k) {
    if (k < 1) throw InputError("number of thieves must be positive");
    std::vector<int> out;
    for (int p = 2; p * p <= k; ++p)
        while (k % p == 0) {
            out.push_back(p);
            k /= p;
        }
    if (k > 1) out.push_back(k);
    return out;
}

namespace detail {

struct Interval {
    double lo, hi, weight;
};

/// Plain intervals of a 1-dimensional measure (clip halfspaces applied).
inline std::vector<Interval> intervals_1d(const BoxMeasure& m) {
    if (m.dim() != 1) throw DimensionError("necklace measures must be 1-dimensional");
    std::vector<Interval> out;
    for (const BoxAtom& a : m.atoms()) {
        double lo = a.box.lo[0], hi = a.box.hi[0];
        for (const Halfspace& h : a.clip) {
            const double n = h.normal[0];
            if (n > 0.0)
                hi = std::min(hi, h.offset / n);
            else if (n < 0.0)
                lo = std::max(lo, h.offset / n);
            else if (h.offset < 0.0)
                hi = lo;
        }
        if (lo < hi && a.weight > 0.0) out.push_back({lo, hi, a.weight});
    }
    return out;
}

inline double cdf_1d(const std::vector<Interval>& iv, double x) {
    double s = 0.0;
    for (const Interval& i : iv) {
        if (x >= i.hi)
            s += i.weight;
        else if (x > i.lo)
            s += i.weight * (x - i.lo) / (i.hi - i.lo);
    }
    return s;
}

inline BoxMeasure plain_measure(const std::vector<Interval>& iv) {
    std::vector<std::pair<Box, double>> boxes;
    for (const Interval& i : iv) boxes.push_back({Box{{i.lo}, {i.hi}}, i.weight});
    return BoxMeasure::from_boxes(1, boxes, true);
}

/// Drops empty intervals and cuts at infinity, merges equal neighbours.
inline void normalize_split(std::vector<double>& cuts, std::vector<int>& labels) {
    std::vector<double> c;
    std::vector<int> l;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double lo = i > 0 ? cuts[i - 1] : -kInf;
        const double hi = i < cuts.size() ? cuts[i] : kInf;
        if (!(lo < hi)) continue;
        if (!l.empty() && l.back() == labels[i]) {
            c.back() = hi;
            continue;
        }
        l.push_back(labels[i]);
        c.push_back(hi);
    }
    c.pop_back();  // the last interval ends at +inf
    cuts = std::move(c);
    labels = std::move(l);
}

inline int label_at(const std::vector<double>& cuts, const std::vector<int>& labels, double x) {
    const auto it = std::upper_bound(cuts.begin(), cuts.end(), x);
    return labels[static_cast<std::size_t>(it - cuts.begin())];
}

} // namespace detail

/// shares[l][j] = mass of measure j on the intervals labeled l, evaluated by
/// halfspace clipping (independent of the solver's quantile path).
inline std::vector<std::vector<double>> necklace_shares(std::span<const BoxMeasure> measures,
                                                        const std::vector<double>& cuts,
                                                        const std::vector<int>& labels, int k) {
    std::vector<std::vector<double>> shares(static_cast<std::size_t>(k), std::vector<double>(measures.size(), 0.0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ConvexRegion r = ConvexRegion::whole(1);
        if (i > 0) r.add(halfspace_ge({1.0}, cuts[i - 1]));
        if (i < cuts.size()) r.add(halfspace_le({1.0}, cuts[i], false));
        for (std::size_t j = 0; j < measures.size(); ++j)
            shares[static_cast<std::size_t>(labels[i])][j] += mass_of_region(measures[j], r) / measures[j].total_mass();
    }
    return shares;
}

inline double share_residual(const std::vector<std::vector<double>>& shares, int k) {
    double r = 0.0;
    for (const auto& row : shares)
        for (double s : row) r = std::max(r, std::abs(s - 1.0 / k));
    return r;
}

inline void finish_split(NecklaceSplit& s, std::span<const BoxMeasure> measures, int k, double tol) {
    detail::normalize_split(s.cuts, s.labels);
    s.thieves = k;
    s.shares = necklace_shares(measures, s.cuts, s.labels, k);
    s.residual = share_residual(s.shares, k);
    if (s.residual > tol)
        throw PrecisionError("necklace split misses the tolerance after verification", s.residual);
}

/// Split for prime k with at most t(k-1) cuts.
inline NecklaceSplit split_prime(std::span<const BoxMeasure> measures, int k, const NecklaceOptions& opts = {}) {
    if (measures.empty()) throw InputError("necklace needs at least one measure");
    if (!is_prime(k)) throw InputError("split_prime: k = " + std::to_string(k) + " is not prime");
    const std::size_t t = measures.size();
    std::vector<std::vector<detail::Interval>> iv;
    std::vector<BoxMeasure> plain;
    for (const BoxMeasure& m : measures) {
        iv.push_back(detail::intervals_1d(m));
        plain.push_back(detail::plain_measure(iv.back()));
        double total = 0.0;
        for (const auto& i : iv.back()) total += i.weight;
        for (auto& i : iv.back()) i.weight /= total;
    }
    const AxisCompactification Q = AxisCompactification::from_marginal(reference_measure(plain), 0);
    const std::size_t n = t * static_cast<std::size_t>(k - 1) + 1;

    auto positions = [&](const std::vector<double>& w) {
        std::vector<double> cut(n - 1);
        double u = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            u += w[i];
            cut[i] = Q.to_real(u);
        }
        return cut;
    };
    auto part_masses = [&](const std::vector<double>& w) {
        const std::vector<double> cut = positions(w);
        std::vector<double> out(t * n);
        for (std::size_t j = 0; j < t; ++j) {
            double prev = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double F = i + 1 < n ? detail::cdf_1d(iv[j], cut[i]) : 1.0;
                out[j * n + i] = F - prev;
                prev = F;
            }
        }
        return out;
    };
    SolverOptions so;
    so.tol = std::min(opts.tol / 4.0, 1e-10);
    so.seed = opts.seed;
    so.grid = opts.grid;
    const auto z = join_zero_masses(part_masses, n, t, k, so);

    NecklaceSplit s;
    s.cuts = positions(z.point.barycentric);
    s.labels = z.point.labels;
    finish_split(s, measures, k, opts.tol);
    return s;
}

namespace detail {

/// Restriction of a 1-dimensional measure to the intervals labeled `label`.
inline BoxMeasure restrict_to_label(const BoxMeasure& m, const std::vector<double>& cuts,
                                    const std::vector<int>& labels, int label) {
    std::vector<std::pair<Box, double>> boxes;
    for (const Interval& a : intervals_1d(m)) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != label) continue;
            const double lo = std::max(a.lo, i > 0 ? cuts[i - 1] : -kInf);
            const double hi = std::min(a.hi, i < cuts.size() ? cuts[i] : kInf);
            if (lo < hi) boxes.push_back({Box{{lo}, {hi}}, a.weight * (hi - lo) / (a.hi - a.lo)});
        }
    }
    if (boxes.empty()) throw PrecisionError("composite split: a class received no mass", 1.0);
    return BoxMeasure::from_boxes(1, boxes, true);
}

} // namespace detail

/// Split for k = product of `primes`: split by primes[0], then split each
/// class by the remaining factors. Cuts stay within t(k-1).
inline NecklaceSplit split_composite(std::span<const BoxMeasure> measures, std::span<const int> primes,
                                     const NecklaceOptions& opts = {}) {
    if (primes.empty()) throw InputError("split_composite needs a factorization");
    if (primes.size() == 1) return split_prime(measures, primes[0], opts);
    int k = 1;
    for (int p : primes) k *= p;
    NecklaceOptions child = opts;
    child.tol = opts.tol / 2.0;
    const int m = primes[0];
    const int l = k / m;
    const NecklaceSplit outer = split_prime(measures, m, child);
    std::vector<NecklaceSplit> inner;
    for (int p = 0; p < m; ++p) {
        std::vector<BoxMeasure> restricted;
        for (const BoxMeasure& mu : measures) restricted.push_back(detail::restrict_to_label(mu, outer.cuts, outer.labels, p));
        inner.push_back(split_composite(restricted, primes.subspan(1), child));
    }
    std::vector<double> pts = outer.cuts;
    for (const NecklaceSplit& s : inner) pts.insert(pts.end(), s.cuts.begin(), s.cuts.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    NecklaceSplit s;
    s.cuts = pts;
    for (std::size_t i = 0; i <= pts.size(); ++i) {
        double x;
        if (pts.empty())
            x = 0.0;
        else if (i == 0)
            x = pts.front() - 1.0;
        else if (i == pts.size())
            x = pts.back() + 1.0;
        else
            x = 0.5 * (pts[i - 1] + pts[i]);
        const int p = detail::label_at(outer.cuts, outer.labels, x);
        const int c = detail::label_at(inner[static_cast<std::size_t>(p)].cuts, inner[static_cast<std::size_t>(p)].labels, x);
        s.labels.push_back(p * l + c);
    }
    s.composite = true;
    finish_split(s, measures, k, opts.tol);
    return s;
}

/// Dispatches on k: prime k through the join solver, composite k through
/// composition over its prime factors.
inline NecklaceSplit split_necklace(std::span<const BoxMeasure> measures, int k, const NecklaceOptions& opts = {}) {
    if (measures.empty()) throw InputError("necklace needs at least one measure");
    for (const BoxMeasure& m : measures)
        if (m.dim() != 1) throw DimensionError("necklace measures must be 1-dimensional");
    if (k < 1) throw InputError("number of thieves must be positive");
    if (k == 1) {
        NecklaceSplit s;
        s.labels = {0};
        finish_split(s, measures, 1, opts.tol);
        return s;
    }
    const std::vector<int> primes = prime_factors(k);
    if (primes.size() == 1) return split_prime(measures, k, opts);
    return split_composite(measures, primes, opts);
}

/// Beads over an arbitrary alphabet; whitespace is ignored.
struct BeadString {
    std::string beads;

    static BeadString parse(const std::string& text) {
        BeadString b;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) b.beads.push_back(c);
        return b;
    }

    std::size_t size() const { return beads.size(); }

    /// Distinct bead types in order of first appearance.
    std::string types() const {
        std::string t;
        for (char c : beads)
            if (t.find(c) == std::string::npos) t.push_back(c);
        return t;
    }

    std::map<char, int> counts() const {
        std::map<char, int> c;
        for (char b : beads) ++c[b];
        return c;
    }
};

/// Cuts are gap positions: cut g separates bead g-1 from bead g (1-based
/// "after position g"). labels has cuts.size()+1 entries.
struct DiscreteSplit {
    std::vector<int> cuts;
    std::vector<int> labels;
};

inline constexpr std::size_t kMaxDiscreteBeads = 24;

/// Fair split with the minimum number of cuts; among those, the
/// lexicographically smallest cut set and labeling in first-use order.
inline DiscreteSplit discrete_split(const BeadString& beads, int k) {
    if (k < 1) throw InputError("number of thieves must be positive");
    if (beads.size() > kMaxDiscreteBeads)
        throw InstanceTooLarge("discrete necklace limited to " + std::to_string(kMaxDiscreteBeads) + " beads");
    const std::string types = beads.types();
    const std::size_t t = types.size(), n = beads.size();
    std::vector<int> type_of(n), target(t);
    for (std::size_t i = 0; i < n; ++i) type_of[i] = static_cast<int>(types.find(beads.beads[i]));
    for (const auto& [c, cnt] : beads.counts()) {
        if (cnt % k != 0)
            throw InputError(std::string("bead type '") + c + "' count " + std::to_string(cnt) +
                             " is not divisible by " + std::to_string(k));
        target[types.find(c)] = cnt / k;
    }
    if (n == 0) return DiscreteSplit{{}, {0}};

    std::vector<int> cuts;
    std::vector<int> labels;
    std::vector<std::vector<int>> got;       // got[thief][type]
    std::vector<std::vector<int>> content;   // content[interval][type]

    std::function<bool(std::size_t, int)> assign = [&](std::size_t idx, int used) -> bool {
        if (idx == content.size()) return true;
        for (int l = 0; l < std::min(k, used + 1); ++l) {
            if (idx > 0 && labels[idx - 1] == l) continue;
            bool fits = true;
            for (std::size_t ty = 0; ty < t; ++ty)
                if (got[static_cast<std::size_t>(l)][ty] + content[idx][ty] > target[ty]) fits = false;
            if (!fits) continue;
            for (std::size_t ty = 0; ty < t; ++ty) got[static_cast<std::size_t>(l)][ty] += content[idx][ty];
            labels[idx] = l;
            if (assign(idx + 1, std::max(used, l + 1))) return true;
            for (std::size_t ty = 0; ty < t; ++ty) got[static_cast<std::size_t>(l)][ty] -= content[idx][ty];
        }
        return false;
    };

    auto try_cuts = [&]() {
        content.assign(cuts.size() + 1, std::vector<int>(t, 0));
        std::size_t seg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (seg < cuts.size() && static_cast<int>(i) == cuts[seg]) ++seg;
            ++content[seg][static_cast<std::size_t>(type_of[i])];
        }
        labels.assign(content.size(), -1);
        got.assign(static_cast<std::size_t>(k), std::vector<int>(t, 0));
        return assign(0, 0);
    };

    for (std::size_t c = 0; c < n; ++c) {
        // combinations of c gaps out of 1..n-1 in lexicographic order
        cuts.resize(c);
        for (std::size_t i = 0; i < c; ++i) cuts[i] = static_cast<int>(i) + 1;
        while (true) {
            if (try_cuts()) return DiscreteSplit{cuts, labels};
            std::size_t i = c;
            while (i > 0 && cuts[i - 1] == static_cast<int>(n - 1 - (c - i))) --i;
            if (i == 0) break;
            ++cuts[i - 1];
            for (std::size_t j = i; j < c; ++j) cuts[j] = cuts[j - 1] + 1;
        }
    }
    throw InputError("no fair discrete split exists");  // unreachable for divisible counts
}

} // namespace faircut

#endif // FAIRCUT_NECKLACE1D_HPP
