#ifndef FAIRCUT_ORACLE_HPP
#define FAIRCUT_ORACLE_HPP

// Brute-force verifiers. Nothing here calls a solver: the necklace oracle
// enumerates every cut set and every labeling, the grid oracle evaluates
// masses with the measures module on every grid node.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "faircut/errors.hpp"
#include "faircut/measures.hpp"
#include "faircut/necklace1d.hpp"
#include "faircut/stairpath.hpp"

namespace faircut {

struct OracleReport {
    std::string instance;
    std::uint64_t space_size = 0;  // candidates enumerated
    bool feasible = false;
    double best = std::numeric_limits<double>::infinity();  // min cuts, or grid-best residual
    std::vector<double> witness;  // cut gaps, or grid parameters
    std::vector<int> labels;      // thief per interval, or variant
};

inline constexpr std::size_t kOracleMaxBeads = 24;
inline constexpr std::uint64_t kOracleMaxLabelings = 1ull << 26;
inline constexpr std::uint64_t kOracleMaxCandidates = 10'000'000;

/// Minimal number of cuts for a fair k-split of a bead string, trying every
/// gap subset of size <= max_cuts (increasing size) and every labeling.
/// max_cuts < 0 means t(k-1) with t the number of bead types.
inline OracleReport oracle_necklace(const BeadString& beads, int k, int max_cuts = -1) {
    if (k < 1) throw InputError("number of thieves must be positive");
    const std::size_t n = beads.size();
    if (n > kOracleMaxBeads) throw InstanceTooLarge("oracle_necklace is limited to 24 beads");
    const std::string types = beads.types();
    const std::size_t t = types.size();
    if (max_cuts < 0) max_cuts = static_cast<int>(t) * (k - 1);
    OracleReport rep;
    rep.instance = "necklace \"" + beads.beads + "\" k=" + std::to_string(k);

    std::vector<int> type_of(n), total(t, 0);
    for (std::size_t i = 0; i < n; ++i) {
        type_of[i] = static_cast<int>(types.find(beads.beads[i]));
        ++total[static_cast<std::size_t>(type_of[i])];
    }
    for (int c : total)
        if (c % k != 0) {
            rep.feasible = false;
            return rep;
        }
    if (n == 0) {
        rep.feasible = true;
        rep.best = 0;
        rep.labels = {0};
        return rep;
    }
    const std::uint32_t gaps = static_cast<std::uint32_t>(n - 1);
    std::vector<std::vector<int>> got(static_cast<std::size_t>(k), std::vector<int>(t));
    for (int c = 0; c <= std::min<int>(max_cuts, static_cast<int>(gaps)); ++c) {
        std::uint64_t labelings = 1;
        for (int i = 0; i <= c; ++i) {
            labelings *= static_cast<std::uint64_t>(k);
            if (labelings > kOracleMaxLabelings) throw BudgetExceeded("oracle_necklace labeling space too large");
        }
        bool found = false;
        for (std::uint32_t mask = 0; mask < (1u << gaps); ++mask) {
            if (std::popcount(mask) != c) continue;
            // interval of every bead under this cut set
            std::vector<int> seg(n, 0);
            for (std::size_t i = 1; i < n; ++i) seg[i] = seg[i - 1] + static_cast<int>((mask >> (i - 1)) & 1u);
            std::vector<int> lab(static_cast<std::size_t>(c) + 1, 0);
            for (std::uint64_t code = 0; code < labelings; ++code) {
                std::uint64_t x = code;
                for (int& l : lab) {
                    l = static_cast<int>(x % static_cast<std::uint64_t>(k));
                    x /= static_cast<std::uint64_t>(k);
                }
                ++rep.space_size;
                for (auto& g : got) std::fill(g.begin(), g.end(), 0);
                for (std::size_t i = 0; i < n; ++i)
                    ++got[static_cast<std::size_t>(lab[static_cast<std::size_t>(seg[i])])][static_cast<std::size_t>(type_of[i])];
                bool fair = true;
                for (const auto& g : got)
                    for (std::size_t ty = 0; ty < t; ++ty)
                        if (g[ty] * k != total[ty]) fair = false;
                if (fair && !found) {
                    found = true;
                    rep.feasible = true;
                    rep.best = c;
                    rep.witness.clear();
                    for (std::uint32_t g = 0; g < gaps; ++g)
                        if ((mask >> g) & 1u) rep.witness.push_back(g + 1);
                    rep.labels = lab;
                }
            }
        }
        if (found) return rep;
    }
    return rep;
}

/// A finitely parametrized family of two-part partitions. masses(p, v)
/// returns mu_j(A) for every measure.
struct PartitionFamily {
    std::string name;
    std::vector<double> lo, hi;  // parameter box
    std::size_t variants = 1;    // discrete choices such as colourings
    std::function<std::vector<double>(std::span<const double>, std::size_t)> masses;
};

/// Grid-best max_j |mu_j(A) - 1/2| over the family.
inline OracleReport oracle_grid_equipartition(const PartitionFamily& fam, double step) {
    if (!(step > 0.0)) throw InputError("grid step must be positive");
    if (fam.lo.size() != fam.hi.size()) throw DimensionError("parameter box bounds differ in length");
    std::vector<std::size_t> nodes;
    double candidates = static_cast<double>(fam.variants);
    for (std::size_t i = 0; i < fam.lo.size(); ++i) {
        if (!(fam.lo[i] <= fam.hi[i])) throw InputError("empty parameter box");
        nodes.push_back(static_cast<std::size_t>(std::ceil((fam.hi[i] - fam.lo[i]) / step - 1e-12)) + 1);
        candidates *= static_cast<double>(nodes.back());
    }
    if (candidates > static_cast<double>(kOracleMaxCandidates))
        throw BudgetExceeded(fam.name + ": " + std::to_string(static_cast<std::uint64_t>(candidates)) +
                             " grid candidates exceed the 1e7 cap");
    OracleReport rep;
    rep.instance = fam.name;
    std::size_t total = 1;
    for (std::size_t n : nodes) total *= n;
    std::vector<double> p(nodes.size());
    for (std::size_t node = 0; node < total; ++node) {
        std::size_t rest = node;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const std::size_t k = rest % nodes[i];
            rest /= nodes[i];
            p[i] = nodes[i] == 1 ? fam.lo[i] : std::min(fam.hi[i], fam.lo[i] + static_cast<double>(k) * step);
        }
        for (std::size_t v = 0; v < fam.variants; ++v) {
            ++rep.space_size;
            double r = 0.0;
            for (double m : fam.masses(p, v)) r = std::max(r, std::abs(m - 0.5));
            if (r < rep.best) {
                rep.best = r;
                rep.witness = p;
                rep.labels = {static_cast<int>(v)};
            }
        }
    }
    rep.feasible = true;
    return rep;
}

namespace detail {

inline Box oracle_support(std::span<const BoxMeasure> measures) {
    Box b;
    const std::size_t d = measures.front().dim();
    b.lo.assign(d, kInf);
    b.hi.assign(d, -kInf);
    for (const BoxMeasure& m : measures)
        for (const BoxAtom& a : m.atoms())
            for (std::size_t i = 0; i < d; ++i) {
                b.lo[i] = std::min(b.lo[i], a.box.lo[i]);
                b.hi[i] = std::max(b.hi[i], a.box.hi[i]);
            }
    return b;
}

} // namespace detail

/// Stair partitions with cut vector M: parameters are the n-1 strip breaks
/// (sorted before use) followed by one x per cut strip; variants are the
/// 2^n strip colourings.
inline PartitionFamily stair_family(std::vector<BoxMeasure> measures, const CutVector& M) {
    M.validate();
    if (measures.empty()) throw InputError("stair family needs measures");
    const Box b = detail::oracle_support(measures);
    const std::size_t n = M.n();
    PartitionFamily f;
    f.name = "stair partitions";
    f.lo.assign(n - 1, b.lo[1]);
    f.hi.assign(n - 1, b.hi[1]);
    for (std::size_t i = 0; i < M.weight(); ++i) {
        f.lo.push_back(b.lo[0]);
        f.hi.push_back(b.hi[0]);
    }
    f.variants = std::size_t{1} << n;
    f.masses = [ms = std::move(measures), M, n](std::span<const double> p, std::size_t v) {
        StairPartition sp;
        sp.M = M;
        sp.y_breaks.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n - 1));
        std::sort(sp.y_breaks.begin(), sp.y_breaks.end());
        std::size_t xi = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            Strip s;
            s.cut = M.entries[i] == 1;
            if (s.cut) s.x = p[xi++];
            s.left_is_a = ((v >> i) & 1u) == 0;
            sp.strips.push_back(s);
        }
        const std::vector<ConvexRegion> a = sp.regions(true);
        std::vector<double> out;
        for (const BoxMeasure& m : ms) out.push_back(mass_of_union(m, a));
        return out;
    };
    return f;
}

/// One vertical and one horizontal line meeting at (a, b); A is the pair of
/// opposite quadrants x >= a, y >= b and x < a, y < b, or its complement.
inline PartitionFamily one_one_family(std::vector<BoxMeasure> measures) {
    if (measures.empty()) throw InputError("chessboard family needs measures");
    for (const BoxMeasure& m : measures)
        if (m.dim() != 2) throw DimensionError("the (1,1) family is planar");
    const Box b = detail::oracle_support(measures);
    PartitionFamily f;
    f.name = "(1,1) chessboards";
    f.lo = b.lo;
    f.hi = b.hi;
    f.variants = 2;
    f.masses = [ms = std::move(measures)](std::span<const double> p, std::size_t v) {
        ConvexRegion pp{2, {halfspace_ge({1.0, 0.0}, p[0]), halfspace_ge({0.0, 1.0}, p[1])}};
        ConvexRegion mm{2, {halfspace_le({1.0, 0.0}, p[0], false), halfspace_le({0.0, 1.0}, p[1], false)}};
        std::vector<double> out;
        for (const BoxMeasure& m : ms) {
            const double a = mass_of_region(m, pp) + mass_of_region(m, mm);
            out.push_back(v == 0 ? a : 1.0 - a);
        }
        return out;
    };
    return f;
}

/// Two-thief necklace splits with `cuts` cuts on the line; variants are the
/// 2^(cuts+1) interval labelings (bit i set: interval i goes to thief 1).
inline PartitionFamily necklace_family(std::vector<BoxMeasure> measures, std::size_t cuts) {
    if (measures.empty()) throw InputError("necklace family needs measures");
    for (const BoxMeasure& m : measures)
        if (m.dim() != 1) throw DimensionError("necklace measures live on the line");
    const Box b = detail::oracle_support(measures);
    PartitionFamily f;
    f.name = "necklace splits";
    f.lo.assign(cuts, b.lo[0]);
    f.hi.assign(cuts, b.hi[0]);
    f.variants = std::size_t{1} << (cuts + 1);
    f.masses = [ms = std::move(measures)](std::span<const double> p, std::size_t v) {
        std::vector<double> c(p.begin(), p.end());
        std::sort(c.begin(), c.end());
        std::vector<double> out;
        for (const BoxMeasure& m : ms) {
            double a = 0.0;
            for (std::size_t i = 0; i <= c.size(); ++i) {
                if ((v >> i) & 1u) continue;
                ConvexRegion r{1, {}};
                if (i > 0) r.add(halfspace_ge({1.0}, c[i - 1]));
                if (i < c.size()) r.add(halfspace_le({1.0}, c[i], false));
                a += mass_of_region(m, r);
            }
            out.push_back(a);
        }
        return out;
    };
    return f;
}

} // namespace faircut

#endif // FAIRCUT_ORACLE_HPP
