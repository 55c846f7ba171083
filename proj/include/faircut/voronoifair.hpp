#ifndef FAIRCUT_VORONOIFAIR_HPP
#define FAIRCUT_VORONOIFAIR_HPP

// Fair distribution of generalized Voronoi cells
//   V_i(c) = {x : f_i(x) + c_i >= f_j(x) + c_j for all j != i}
// for two kinds of functions: linear (f_i = g_i . x on a working box) and
// conical (f_i = log dist(x, F_i) on the interior of a simplex). In both
// kinds the walls are hyperplanes, so cells are convex and masses are exact
// for d <= 3. Weights are reached through capacities w_i = mu(V_i(c)) under
// a full-support reference mu, which turns the weight space into a simplex.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faircut/busolver.hpp"
#include "faircut/errors.hpp"
#include "faircut/measures.hpp"

namespace faircut {

class CellFunctions {
public:
    enum class Kind { Linear, SimplexConical };

    static CellFunctions linear(std::vector<std::vector<double>> gradients) {
        if (gradients.size() < 2) throw InputError("need at least two cell functions");
        const std::size_t d = gradients.front().size();
        if (d == 0) throw DimensionError("gradients must be nonempty vectors");
        for (const auto& g : gradients) {
            if (g.size() != d) throw DimensionError("gradients have different dimensions");
            for (double v : g)
                if (!std::isfinite(v)) throw InputError("gradients must be finite");
        }
        for (std::size_t i = 0; i < gradients.size(); ++i)
            for (std::size_t j = i + 1; j < gradients.size(); ++j)
                if (gradients[i] == gradients[j])
                    throw InputError("gradients must be pairwise distinct (cell walls would not be hyperplanes)");
        CellFunctions f;
        f.kind_ = Kind::Linear;
        f.dim_ = d;
        f.gradients_ = std::move(gradients);
        return f;
    }

    /// n vertices of a full-dimensional simplex in R^(n-1); f_i is the log
    /// distance to the facet opposite vertex i.
    static CellFunctions simplex(std::vector<std::vector<double>> vertices) {
        const std::size_t n = vertices.size();
        if (n < 2) throw InputError("a simplex needs at least two vertices");
        const std::size_t d = n - 1;
        for (const auto& v : vertices)
            if (v.size() != d) throw DimensionError("simplex with n vertices must live in R^(n-1)");
        Eigen::MatrixXd E(d, d);
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c) E(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = vertices[r + 1][c] - vertices[0][c];
        const double scale = std::max(E.cwiseAbs().maxCoeff(), 1e-300);
        if (std::abs(E.determinant()) <= 1e-12 * std::pow(scale, static_cast<double>(d)))
            throw InputError("degenerate simplex");
        CellFunctions f;
        f.kind_ = Kind::SimplexConical;
        f.dim_ = d;
        f.vertices_ = std::move(vertices);
        // facet i: the hyperplane through all vertices but i, normal pointing
        // towards vertex i
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> others;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) others.push_back(j);
            Eigen::VectorXd normal(static_cast<Eigen::Index>(d));
            if (d == 1) {
                normal(0) = 1.0;
            } else {
                Eigen::MatrixXd D(d - 1, d);
                for (std::size_t r = 0; r + 1 < d; ++r)
                    for (std::size_t c = 0; c < d; ++c)
                        D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                            f.vertices_[others[r + 1]][c] - f.vertices_[others[0]][c];
                Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
                normal = lu.kernel().col(0);
            }
            normal.normalize();
            std::vector<double> u(normal.data(), normal.data() + d);
            double o = 0.0, at_vertex = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                o += u[c] * f.vertices_[others[0]][c];
                at_vertex += u[c] * f.vertices_[i][c];
            }
            if (at_vertex < o) {
                for (double& v : u) v = -v;
                o = -o;
            }
            f.normals_.push_back(std::move(u));
            f.offsets_.push_back(o);
        }
        return f;
    }

    Kind kind() const { return kind_; }
    std::size_t n() const { return kind_ == Kind::Linear ? gradients_.size() : vertices_.size(); }
    std::size_t dim() const { return dim_; }
    const std::vector<std::vector<double>>& gradients() const { return gradients_; }
    const std::vector<std::vector<double>>& vertices() const { return vertices_; }

    /// Distance from x to the hyperplane of facet i (positive inside).
    double facet_distance(std::size_t i, std::span<const double> x) const {
        double s = -offsets_[i];
        for (std::size_t c = 0; c < dim_; ++c) s += normals_[i][c] * x[c];
        return s;
    }

    double value(std::size_t i, std::span<const double> x) const {
        if (kind_ == Kind::Linear) {
            double s = 0.0;
            for (std::size_t c = 0; c < dim_; ++c) s += gradients_[i][c] * x[c];
            return s;
        }
        return std::log(facet_distance(i, x));
    }

    /// The closed simplex for the conical kind; everything for linear.
    ConvexRegion simplex_region() const {
        ConvexRegion r = ConvexRegion::whole(dim_);
        if (kind_ == Kind::SimplexConical)
            for (std::size_t i = 0; i < normals_.size(); ++i) r.add(halfspace_ge(normals_[i], offsets_[i]));
        return r;
    }

    Box simplex_box() const {
        Box b{std::vector<double>(dim_, kInf), std::vector<double>(dim_, -kInf)};
        for (const auto& v : vertices_)
            for (std::size_t c = 0; c < dim_; ++c) {
                b.lo[c] = std::min(b.lo[c], v[c]);
                b.hi[c] = std::max(b.hi[c], v[c]);
            }
        return b;
    }

    /// Wall between cells i and j as {h : normal . x <= offset}, the side
    /// where cell i wins. Requires finite c_i; c_j = -inf gives no wall.
    std::optional<Halfspace> wall(std::size_t i, std::size_t j, std::span<const double> c) const {
        if (c[j] == -kInf) return std::nullopt;
        if (kind_ == Kind::Linear) {
            std::vector<double> a(dim_);
            for (std::size_t q = 0; q < dim_; ++q) a[q] = gradients_[j][q] - gradients_[i][q];
            return halfspace_le(std::move(a), c[i] - c[j]);
        }
        // e^{c_i} d_i(x) >= e^{c_j} d_j(x), scaled by e^{-max}
        const double m = std::max(c[i], c[j]);
        const double ei = std::exp(c[i] - m), ej = std::exp(c[j] - m);
        std::vector<double> a(dim_);
        for (std::size_t q = 0; q < dim_; ++q) a[q] = ej * normals_[j][q] - ei * normals_[i][q];
        return halfspace_le(std::move(a), ej * offsets_[j] - ei * offsets_[i]);
    }

private:
    Kind kind_ = Kind::Linear;
    std::size_t dim_ = 0;
    std::vector<std::vector<double>> gradients_;
    std::vector<std::vector<double>> vertices_;
    std::vector<std::vector<double>> normals_;
    std::vector<double> offsets_;
};

/// Where the cells live: a box for linear functions, the simplex otherwise.
struct VoronoiDomain {
    Box box;
    ConvexRegion region;

    static VoronoiDomain for_functions(const CellFunctions& f, const Box& box) {
        if (f.kind() == CellFunctions::Kind::SimplexConical) return {f.simplex_box(), f.simplex_region()};
        ConvexRegion r = ConvexRegion::whole(box.dim());
        for (std::size_t a = 0; a < box.dim(); ++a) {
            r.add(halfspace_ge(unit_axis(box.dim(), a), box.lo[a]));
            r.add(halfspace_le(unit_axis(box.dim(), a), box.hi[a]));
        }
        return {box, r};
    }

    static VoronoiDomain for_measures(const CellFunctions& f, std::span<const BoxMeasure> measures) {
        if (measures.empty()) throw InputError("need at least one measure");
        Box bb{std::vector<double>(f.dim(), kInf), std::vector<double>(f.dim(), -kInf)};
        for (const BoxMeasure& m : measures) {
            if (m.dim() != f.dim()) throw DimensionError("measure and cell function dimensions differ");
            const Box b = m.bounding_box();
            for (std::size_t a = 0; a < f.dim(); ++a) {
                bb.lo[a] = std::min(bb.lo[a], b.lo[a]);
                bb.hi[a] = std::max(bb.hi[a], b.hi[a]);
            }
        }
        return for_functions(f, bb);
    }

    /// Uniform measure on the domain: the default reference.
    BoxMeasure uniform() const { return BoxMeasure::uniform_on(box, region); }
};

/// Cell i clipped to the domain; empty when c_i = -inf.
inline ConvexRegion cell(const CellFunctions& f, std::span<const double> c, std::size_t i,
                         const VoronoiDomain& dom) {
    if (c[i] == -kInf) return ConvexRegion::empty_set(f.dim());
    ConvexRegion r = dom.region;
    for (std::size_t j = 0; j < f.n(); ++j)
        if (j != i)
            if (auto h = f.wall(i, j, c)) r.add(*h);
    return r;
}

inline void check_weights(const CellFunctions& f, std::span<const double> c) {
    if (c.size() != f.n()) throw DimensionError("weight vector length differs from the number of functions");
    bool finite = false;
    for (double v : c) {
        if (std::isnan(v) || v == kInf) throw InputError("weights must be reals or -inf");
        finite = finite || std::isfinite(v);
    }
    if (!finite) throw InputError("at least one weight must be finite");
}

inline std::vector<ConvexRegion> cells(const CellFunctions& f, std::span<const double> c, const VoronoiDomain& dom) {
    check_weights(f, c);
    std::vector<ConvexRegion> out;
    for (std::size_t i = 0; i < f.n(); ++i) out.push_back(cell(f, c, i, dom));
    return out;
}

/// alpha[i][j] = exp(c_j - c_i): on the wall between i and j,
/// dist(x, F_i) = alpha_ij dist(x, F_j).
inline std::vector<std::vector<double>> conical_alphas(std::span<const double> c) {
    std::vector<std::vector<double>> a(c.size(), std::vector<double>(c.size(), 0.0));
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
            a[i][j] = (c[i] == -kInf && c[j] == -kInf) ? 0.0 : std::exp(c[j] - c[i]);
    return a;
}

/// w_i = mu(V_i(c)) / mu(domain).
inline std::vector<double> capacities(const CellFunctions& f, std::span<const double> c, const BoxMeasure& mu,
                                      const VoronoiDomain& dom) {
    check_weights(f, c);
    const double total = mass_of_region(mu, dom.region);
    if (!(total > 0.0)) throw InputError("reference measure misses the domain");
    std::vector<double> w(f.n());
    for (std::size_t i = 0; i < f.n(); ++i) w[i] = mass_of_region(mu, cell(f, c, i, dom)) / total;
    return w;
}

struct WeightOptions {
    double tol = 1e-12;
    int max_rounds = 20;
    int sweeps_per_round = 5;
    int max_iter = 100;
    double accept = 0.0;  // return the best weights instead of throwing when within this
};

/// Weights whose capacities are `target`, with zero targets mapped to -inf
/// and the first positive coordinate pinned to 0. Gauss-Seidel bisection
/// sweeps (capacity i is monotone in c_i) followed by Levenberg-Marquardt
/// polishing. `init` warm-starts the finite coordinates.
inline std::vector<double> weights_from_capacities(const CellFunctions& f, std::span<const double> target,
                                                   const BoxMeasure& mu, const VoronoiDomain& dom,
                                                   const WeightOptions& opts = {},
                                                   const std::vector<double>* init = nullptr) {
    const std::size_t n = f.n();
    if (target.size() != n) throw DimensionError("capacity vector length differs from the number of functions");
    double s = 0.0;
    for (double v : target) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("capacities must be non-negative");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InputError("capacities must sum to 1");
    std::vector<std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i)
        if (target[i] > 0.0) pos.push_back(i);
    std::vector<double> c(n, -kInf);
    for (std::size_t i : pos) c[i] = (init && std::isfinite((*init)[i])) ? (*init)[i] : 0.0;
    if (pos.size() == 1) {
        c[pos[0]] = 0.0;
        return c;
    }
    const double anchor = c[pos[0]];
    for (std::size_t i : pos) c[i] -= anchor;
    const double total = mass_of_region(mu, dom.region);
    auto cap = [&](std::size_t i) { return mass_of_region(mu, cell(f, c, i, dom)) / total; };
    auto residual = [&] {
        double r = 0.0;
        for (std::size_t i : pos) r = std::max(r, std::abs(cap(i) - target[i]));
        return r;
    };
    auto sweep = [&] {
        for (std::size_t q = 1; q < pos.size(); ++q) {
            const std::size_t i = pos[q];
            const double keep = c[i];
            auto g = [&](double v) {
                c[i] = v;
                return cap(i) - target[i];
            };
            double lo = keep - 1.0, hi = keep + 1.0, step = 1.0;
            int guard = 0;
            while (g(lo) > 0.0 && guard++ < 80) lo -= (step *= 2.0);
            step = 1.0;
            guard = 0;
            while (g(hi) < 0.0 && guard++ < 80) hi += (step *= 2.0);
            for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (g(mid) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            c[i] = 0.5 * (lo + hi);
        }
    };
    // Newton-type polish on the free coordinates
    auto polish = [&] {
        std::vector<double> y;
        for (std::size_t q = 1; q < pos.size(); ++q) y.push_back(c[pos[q]]);
        auto r = [&](const std::vector<double>& z) {
            for (std::size_t q = 1; q < pos.size(); ++q) c[pos[q]] = z[q - 1];
            std::vector<double> out;
            for (std::size_t q = 1; q < pos.size(); ++q) out.push_back(cap(pos[q]) - target[pos[q]]);
            return out;
        };
        std::size_t evals = 0;
        auto lm = detail::levenberg_marquardt(r, y, opts.tol / 2.0, opts.max_iter, [](std::vector<double>&) {}, evals);
        for (std::size_t q = 1; q < pos.size(); ++q) c[pos[q]] = lm.y[q - 1];
    };
    double best = kInf;
    std::vector<double> best_c = c;
    for (int round = 0; round < opts.max_rounds; ++round) {
        if (!(init && round == 0))
            for (int s2 = 0; s2 < opts.sweeps_per_round; ++s2) sweep();
        polish();
        const double r = residual();
        if (r < best) {
            best = r;
            best_c = c;
        }
        if (best <= opts.tol) return best_c;
    }
    if (best <= opts.accept) return best_c;
    throw NonConvergence("weights_from_capacities: residual " + std::to_string(best), best);
}

struct FairOptions {
    double tol = 1e-6;
    std::uint64_t seed = 1;
    std::size_t grid_budget = 2000;
    int starts = 200;
};

struct FairSolution {
    std::vector<double> weights;     // c
    std::vector<double> capacities;  // w
    std::vector<int> labels;         // per cell, in [0, k)
    std::vector<ConvexRegion> cells;
    std::vector<std::vector<double>> shares;  // shares[label][measure]
    double residual = 0.0;
    std::string technical_condition;
};

inline std::string technical_condition(const CellFunctions& f, std::span<const BoxMeasure> measures) {
    // walls are hyperplanes in both kinds; box atoms have positive volume
    for (const BoxMeasure& m : measures)
        for (const BoxAtom& a : m.atoms())
            if (!(a.support_volume > 0.0)) return "unverifiable: a measure has an atom of zero volume";
    (void)f;
    return "verified: cell walls are hyperplanes and every measure has a density";
}

/// Weights and a labeling giving each of k thieves 1/k of every measure,
/// for n = t(k-1)+1 functions and prime k.
inline FairSolution solve_fair(const CellFunctions& f, std::span<const BoxMeasure> measures, int k,
                               const FairOptions& opts = {}) {
    if (measures.empty()) throw InputError("need at least one measure");
    if (!is_prime(k)) throw InputError("solve_fair: k = " + std::to_string(k) + " is not prime");
    const std::size_t t = measures.size(), n = f.n();
    if (n != t * static_cast<std::size_t>(k - 1) + 1)
        throw InputError("need n = t(k-1)+1 = " + std::to_string(t * static_cast<std::size_t>(k - 1) + 1) +
                         " cell functions, got " + std::to_string(n));
    const VoronoiDomain dom = VoronoiDomain::for_measures(f, measures);
    for (const BoxMeasure& m : measures)
        if (std::abs(mass_of_region(m, dom.region) - m.total_mass()) > 1e-12 * m.total_mass())
            throw InputError("measures must be supported inside the simplex");
    const BoxMeasure mu = dom.uniform();
    std::vector<double> warm;
    auto weights_of = [&](const std::vector<double>& w) {
        WeightOptions wo;
        wo.accept = 1e-9;  // only the Jacobian sees this; shares are verified from the final c
        std::vector<double> c = weights_from_capacities(f, w, mu, dom, wo, warm.empty() ? nullptr : &warm);
        warm = c;
        return c;
    };
    auto part_masses = [&](const std::vector<double>& w) {
        const std::vector<double> c = weights_of(w);
        std::vector<double> out(t * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(w[i] > 0.0)) continue;
            const ConvexRegion r = cell(f, c, i, dom);
            for (std::size_t j = 0; j < t; ++j) out[j * n + i] = mass_of_region(measures[j], r) / measures[j].total_mass();
        }
        return out;
    };
    SolverOptions so;
    so.tol = std::min(opts.tol / 4.0, 1e-10);
    so.seed = opts.seed;
    so.grid_budget = opts.grid_budget;
    so.starts = opts.starts;
    const auto z = join_zero_masses(part_masses, n, t, k, so);

    FairSolution sol;
    sol.capacities = z.point.barycentric;
    sol.weights = weights_of(sol.capacities);
    sol.labels = z.point.labels;
    sol.cells = cells(f, sol.weights, dom);
    sol.shares.assign(static_cast<std::size_t>(k), std::vector<double>(t, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < t; ++j)
            sol.shares[static_cast<std::size_t>(sol.labels[i])][j] +=
                mass_of_region(measures[j], sol.cells[i]) / measures[j].total_mass();
    for (const auto& row : sol.shares)
        for (double v : row) sol.residual = std::max(sol.residual, std::abs(v - 1.0 / k));
    sol.technical_condition = technical_condition(f, measures);
    if (sol.residual > opts.tol)
        throw PrecisionError("fair Voronoi split misses the tolerance after verification", sol.residual);
    return sol;
}

/// Monte Carlo shares of a labeled cell list (an independent check of the
/// exact masses).
inline std::vector<std::vector<double>> shares_monte_carlo(std::span<const BoxMeasure> measures,
                                                           const std::vector<ConvexRegion>& cells,
                                                           const std::vector<int>& labels, int k,
                                                           const MonteCarloOptions& mc = {}) {
    std::vector<std::vector<double>> s(static_cast<std::size_t>(k), std::vector<double>(measures.size(), 0.0));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].trivially_empty()) continue;
        for (std::size_t j = 0; j < measures.size(); ++j)
            s[static_cast<std::size_t>(labels[i])][j] +=
                mass_estimate_mc(measures[j], cells[i], mc).value / measures[j].total_mass();
    }
    return s;
}

} // namespace faircut

#endif // FAIRCUT_VORONOIFAIR_HPP
