#ifndef FAIRCUT_BUSOLVER_HPP
#define FAIRCUT_BUSOLVER_HPP

// Zero finding for equivariant maps.
//
// antipodal_zero: f : S^m -> R^m with f(-x) = -f(x), S^m the boundary of the
// (m+1)-dimensional octahedron {sum |x_i| = 1}.
//
// join_zero: maps on the join [k] * ... * [k] (n factors), i.e. barycentric
// coordinates plus one label in [0, k) per coordinate, equivariant under the
// cyclic relabeling l -> l + 1 mod k. Test maps return t blocks of k values;
// the relabeling rotates every block.
//
// Both searches scan a grid, rank the candidates by residual (ties broken by
// grid order, so results are deterministic) and polish the best ones with a
// Levenberg-Marquardt iteration. Callbacks may be invoked many times and must
// be pure; they are called from one thread only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "faircut/errors.hpp"

namespace faircut {

/// Point of the octahedral sphere: coordinates with unit L1 norm.
class OctahedralPoint {
public:
    OctahedralPoint() = default;

    /// Radial projection of any nonzero vector.
    static OctahedralPoint from_direction(std::vector<double> y) {
        double s = 0.0;
        for (double v : y) s += std::abs(v);
        if (!(s > 0.0)) throw InputError("cannot project the zero vector onto the sphere");
        for (double& v : y) v /= s;
        OctahedralPoint p;
        p.coords_ = std::move(y);
        return p;
    }

    const std::vector<double>& coords() const { return coords_; }
    std::size_t sphere_dim() const { return coords_.empty() ? 0 : coords_.size() - 1; }
    double operator[](std::size_t i) const { return coords_[i]; }

    OctahedralPoint antipode() const {
        OctahedralPoint p = *this;
        for (double& v : p.coords_) v = -v;
        return p;
    }

private:
    std::vector<double> coords_;
};

/// Point of the n-fold join of [k]: barycentric weights plus labels. Labels
/// on zero weights carry no information.
struct JoinPoint {
    std::vector<double> barycentric;
    std::vector<int> labels;

    std::size_t size() const { return barycentric.size(); }

    /// Applies the cyclic relabeling `shift` times.
    JoinPoint relabeled(int shift, int k) const {
        JoinPoint p = *this;
        for (int& l : p.labels) l = ((l + shift) % k + k) % k;
        return p;
    }

    friend bool operator==(const JoinPoint& a, const JoinPoint& b) {
        if (a.barycentric != b.barycentric) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a.barycentric[i] > 0.0 && a.labels[i] != b.labels[i]) return false;
        return true;
    }
};

struct SolverOptions {
    double tol = 1e-9;
    std::uint64_t seed = 1;
    int grid = 0;            // 0: pick from grid_budget
    std::size_t grid_budget = 20000;
    int starts = 1000;       // polished candidates per round, best first
    int rounds = 3;          // grid refinements, each doubling the resolution
    int max_iter = 200;
    bool audit = true;
    std::size_t max_labelings = 1u << 20;
};

template <class P>
struct ZeroResult {
    P point;
    double residual = 0.0;
    std::size_t evaluations = 0;
};

inline double inf_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline bool is_prime(int k) {
    if (k < 2) return false;
    for (int p = 2; p * p <= k; ++p)
        if (k % p == 0) return false;
    return true;
}

namespace detail {

struct LmResult {
    std::vector<double> y;
    std::vector<double> r;
    double norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Levenberg-Marquardt on r = f(y) with forward-difference Jacobians and
/// Nielsen damping updates. `project` maps an iterate back onto the
/// parameter manifold after every accepted step.
template <class F, class Project>
LmResult levenberg_marquardt(F&& f, std::vector<double> y, double tol, int max_iter, Project&& project,
                             std::size_t& evaluations) {
    project(y);
    LmResult res;
    std::vector<double> r = f(y);
    ++evaluations;
    const std::size_t n = y.size(), m = r.size();
    double cost = 0.0;
    for (double v : r) cost += v * v;
    double mu = -1.0, nu = 2.0;
    Eigen::MatrixXd J(m, n);
    int it = 0;
    for (; it < max_iter && inf_norm(r) > tol; ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> yp = y;
            const double h = 1e-7 * std::max(1.0, std::abs(y[j]));
            yp[j] += h;
            const std::vector<double> rp = f(yp);
            ++evaluations;
            for (std::size_t i = 0; i < m; ++i) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (rp[i] - r[i]) / h;
        }
        Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(m));
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * rv;
        if (mu < 0.0) mu = 1e-6 * std::max(A.diagonal().maxCoeff(), 1e-12);
        bool accepted = false;
        while (!accepted) {
            Eigen::MatrixXd M = A;
            M.diagonal().array() += mu;
            const Eigen::VectorXd step = M.ldlt().solve(-g);
            std::vector<double> yn = y;
            for (std::size_t j = 0; j < n; ++j) yn[j] += step[static_cast<Eigen::Index>(j)];
            project(yn);
            const std::vector<double> rn = f(yn);
            ++evaluations;
            double cn = 0.0;
            for (double v : rn) cn += v * v;
            const double predicted = -(step.dot(g) + 0.5 * step.dot(A * step));
            const double rho = predicted > 0.0 ? (cost - cn) / predicted : -1.0;
            if (cn < cost && std::isfinite(cn)) {
                y = std::move(yn);
                r = rn;
                cost = cn;
                mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * std::max(rho, 0.0) - 1.0, 3));
                nu = 2.0;
                accepted = true;
            } else {
                mu *= nu;
                nu *= 2.0;
                if (mu > 1e20 || !std::isfinite(mu)) break;
            }
        }
        if (!accepted) break;
    }
    res.y = std::move(y);
    res.r = std::move(r);
    res.norm = inf_norm(res.r);
    res.iterations = it;
    return res;
}

/// All compositions of `total` into `parts` non-negative integers, in
/// lexicographic order.
inline std::vector<std::vector<int>> compositions(int total, std::size_t parts) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(parts, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == parts) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (int a = left; a >= 0; --a) {
            cur[i] = a;
            rec(i + 1, left - a);
        }
    };
    if (parts == 0) return out;
    rec(0, total);
    return out;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Largest resolution whose grid on a simplex with `parts` vertices stays
/// within `budget` points (times `multiplicity`), at least 2.
inline int grid_resolution(std::size_t parts, std::size_t budget, double multiplicity) {
    int N = 2;
    while (N < 64 &&
           binomial(N + 1 + static_cast<int>(parts) - 1, static_cast<int>(parts) - 1) * multiplicity <=
               static_cast<double>(budget))
        ++N;
    return N;
}

inline void project_l1(std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += std::abs(v);
    if (s > 0.0)
        for (double& v : y) v /= s;
}

inline std::vector<double> abs_l1(const std::vector<double>& y) {
    std::vector<double> b(y.size());
    double s = 0.0;
    for (double v : y) s += std::abs(v);
    for (std::size_t i = 0; i < y.size(); ++i) b[i] = std::abs(y[i]) / s;
    return b;
}

} // namespace detail

/// Checks f(-x) = -f(x) at `samples` random points; throws ContractError.
template <class F>
void audit_antipodality(F&& f, std::size_t sphere_dim, std::uint64_t seed, int samples = 100,
                        double tol = 1e-9) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> y(sphere_dim + 1);
        for (double& v : y) v = gauss(rng);
        const OctahedralPoint x = OctahedralPoint::from_direction(y);
        const std::vector<double> a = f(x);
        const std::vector<double> b = f(x.antipode());
        if (a.size() != b.size()) throw ContractError("test map output size varies");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(a[i] + b[i]) > tol)
                throw ContractError("test map is not antipodal: |f(x) + f(-x)| = " +
                                    std::to_string(std::abs(a[i] + b[i])));
    }
}

/// Finds x on S^m with |f(x)|_inf <= tol for an antipodal f : S^m -> R^m.
/// Throws NoZeroFound (precision or broken preconditions, never
/// nonexistence) when the budget runs out.
template <class F>
ZeroResult<OctahedralPoint> antipodal_zero(F&& f, std::size_t sphere_dim, std::size_t target_dim,
                                           const SolverOptions& opts = {}) {
    if (sphere_dim == 0) throw DimensionError("sphere dimension must be at least 1");
    if (target_dim != sphere_dim)
        throw DimensionError("antipodal_zero needs a map S^m -> R^m; got m = " + std::to_string(sphere_dim) +
                             " and target dimension " + std::to_string(target_dim));
    if (opts.audit) audit_antipodality(f, sphere_dim, opts.seed);

    const std::size_t coords = sphere_dim + 1;
    std::size_t evaluations = 0;
    auto eval = [&](const std::vector<double>& y) {
        ++evaluations;
        return f(OctahedralPoint::from_direction(y));
    };
    ZeroResult<OctahedralPoint> best;
    best.residual = std::numeric_limits<double>::infinity();

    int N = opts.grid > 0
                ? opts.grid
                : detail::grid_resolution(coords, opts.grid_budget, std::pow(2.0, static_cast<double>(sphere_dim)));
    for (int round = 0; round < opts.rounds; ++round, N *= 2) {
        // grid on the half sphere whose first nonzero coordinate is positive
        struct Candidate {
            double residual;
            std::vector<double> x;
        };
        std::vector<Candidate> cands;
        for (const std::vector<int>& a : detail::compositions(N, coords)) {
            std::vector<std::size_t> nz;
            for (std::size_t i = 0; i < coords; ++i)
                if (a[i] > 0) nz.push_back(i);
            const std::size_t free_signs = nz.size() - 1;
            for (std::size_t mask = 0; mask < (std::size_t{1} << free_signs); ++mask) {
                std::vector<double> x(coords, 0.0);
                for (std::size_t j = 0; j < nz.size(); ++j) {
                    const double sgn = j == 0 ? 1.0 : (((mask >> (j - 1)) & 1u) ? -1.0 : 1.0);
                    x[nz[j]] = sgn * a[nz[j]] / static_cast<double>(N);
                }
                const double res = inf_norm(eval(x));
                cands.push_back({res, std::move(x)});
            }
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& l, const Candidate& r) { return l.residual < r.residual; });
        const std::size_t starts = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(opts.starts));
        for (std::size_t s = 0; s < starts; ++s) {
            auto lm = detail::levenberg_marquardt(eval, cands[s].x, opts.tol, opts.max_iter, detail::project_l1,
                                                  evaluations);
            if (lm.norm < best.residual) {
                best.point = OctahedralPoint::from_direction(lm.y);
                best.residual = lm.norm;
            }
            if (lm.norm <= opts.tol) {
                // independent re-check of the claimed residual
                const double check = inf_norm(f(best.point));
                if (check <= opts.tol) {
                    best.residual = check;
                    best.evaluations = evaluations;
                    return best;
                }
            }
        }
    }
    throw NoZeroFound("antipodal_zero: budget exhausted; best residual " + std::to_string(best.residual),
                      best.residual);
}

namespace detail {

/// Enumerates labelings with first label 0 (one per cyclic orbit).
inline std::vector<std::vector<int>> canonical_labelings(std::size_t n, int k, std::size_t cap) {
    double count = std::pow(static_cast<double>(k), static_cast<double>(n - 1));
    if (count > static_cast<double>(cap))
        throw InstanceTooLarge("join_zero: " + std::to_string(static_cast<long long>(count)) +
                               " labelings exceed the exhaustive cap");
    std::vector<std::vector<int>> out;
    std::vector<int> cur(n, 0);
    while (true) {
        out.push_back(cur);
        std::size_t i = n;
        while (i > 1) {
            --i;
            if (++cur[i] < k) break;
            cur[i] = 0;
            if (i == 1) return out;
        }
        if (n <= 1) return out;
    }
}

inline void check_join_args(std::size_t n, int k) {
    if (n == 0) throw InputError("join_zero: need at least one join factor");
    if (!is_prime(k)) throw InputError("join_zero: k = " + std::to_string(k) + " is not prime");
}

} // namespace detail

/// Checks f(sigma x) = sigma f(x) for the cyclic relabeling at random points.
template <class F>
void audit_cyclic_equivariance(F&& f, std::size_t n, int k, std::uint64_t seed, int samples = 100,
                               double tol = 1e-9) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, k - 1);
    for (int s = 0; s < samples; ++s) {
        JoinPoint x;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x.barycentric.push_back(-std::log(1.0 - unit(rng)));
            total += x.barycentric.back();
            x.labels.push_back(label(rng));
        }
        for (double& b : x.barycentric) b /= total;
        const std::vector<double> a = f(x);
        const std::vector<double> b = f(x.relabeled(1, k));
        if (a.size() != b.size() || a.size() % static_cast<std::size_t>(k) != 0)
            throw ContractError("join test map must return blocks of k values");
        const std::size_t blocks = a.size() / static_cast<std::size_t>(k);
        for (std::size_t j = 0; j < blocks; ++j)
            for (int l = 0; l < k; ++l) {
                const double lhs = b[j * k + static_cast<std::size_t>((l + 1) % k)];
                const double rhs = a[j * k + static_cast<std::size_t>(l)];
                if (std::abs(lhs - rhs) > tol) throw ContractError("test map is not Z_k-equivariant");
            }
    }
}

/// Generic join search: every labeling (up to the cyclic action) gets a grid
/// scan of its simplex; labelings are then polished in order of their best
/// grid residual. f(JoinPoint) returns t blocks of k values.
template <class F>
ZeroResult<JoinPoint> join_zero(F&& f, std::size_t n, int k, const SolverOptions& opts = {}) {
    detail::check_join_args(n, k);
    if (opts.audit) audit_cyclic_equivariance(f, n, k, opts.seed);
    const auto labelings = detail::canonical_labelings(n, k, opts.max_labelings);
    std::size_t evaluations = 0;
    ZeroResult<JoinPoint> best;
    best.residual = std::numeric_limits<double>::infinity();
    std::vector<double> per_labeling(labelings.size(), std::numeric_limits<double>::infinity());

    int N = opts.grid > 0 ? opts.grid
                          : detail::grid_resolution(n, opts.grid_budget, static_cast<double>(labelings.size()));
    for (int round = 0; round < opts.rounds; ++round, N *= 2) {
        const auto grid = detail::compositions(N, n);
        struct Ranked {
            double residual;
            std::size_t labeling;
            std::size_t point;
        };
        std::vector<Ranked> ranked;
        for (std::size_t li = 0; li < labelings.size(); ++li) {
            Ranked r{std::numeric_limits<double>::infinity(), li, 0};
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                JoinPoint x;
                for (int a : grid[gi]) x.barycentric.push_back(a / static_cast<double>(N));
                x.labels = labelings[li];
                ++evaluations;
                const double res = inf_norm(f(x));
                if (res < r.residual) r = {res, li, gi};
            }
            ranked.push_back(r);
        }
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const Ranked& a, const Ranked& b) { return a.residual < b.residual; });
        const std::size_t starts = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(opts.starts));
        for (std::size_t s = 0; s < starts; ++s) {
            const std::vector<int>& labels = labelings[ranked[s].labeling];
            auto eval = [&](const std::vector<double>& y) {
                return f(JoinPoint{detail::abs_l1(y), labels});
            };
            std::vector<double> y0;
            for (int a : grid[ranked[s].point]) y0.push_back(a / static_cast<double>(N));
            auto lm = detail::levenberg_marquardt(eval, y0, opts.tol, opts.max_iter, detail::project_l1, evaluations);
            per_labeling[ranked[s].labeling] = std::min(per_labeling[ranked[s].labeling], lm.norm);
            if (lm.norm < best.residual) {
                best.point = JoinPoint{detail::abs_l1(lm.y), labels};
                best.residual = lm.norm;
            }
            if (lm.norm <= opts.tol) {
                const double check = inf_norm(f(best.point));
                if (check <= opts.tol) {
                    best.residual = check;
                    best.evaluations = evaluations;
                    return best;
                }
            }
        }
    }
    throw NoZeroFound("join_zero: no labeling reached the tolerance; best residual " + std::to_string(best.residual),
                      best.residual, per_labeling);
}

/// Join search for the standard fair-division test map. `part_masses(w)`
/// returns the t x n row-major matrix of measure j's mass in part i for
/// barycentric weights w; the test map is
///   phi_{l,j} = sum_{i : label_i = l} masses(j, i) - 1/k.
/// Geometry is evaluated once per grid point and shared by all labelings.
template <class G>
ZeroResult<JoinPoint> join_zero_masses(G&& part_masses, std::size_t n, std::size_t t, int k,
                                       const SolverOptions& opts = {}) {
    detail::check_join_args(n, k);
    const auto labelings = detail::canonical_labelings(n, k, opts.max_labelings);
    const double share = 1.0 / k;
    std::size_t evaluations = 0;

    auto test_map = [&](const std::vector<double>& masses, const std::vector<int>& labels) {
        std::vector<double> out(t * static_cast<std::size_t>(k), -share);
        for (std::size_t j = 0; j < t; ++j)
            for (std::size_t i = 0; i < n; ++i)
                out[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(labels[i])] += masses[j * n + i];
        return out;
    };

    ZeroResult<JoinPoint> best;
    best.residual = std::numeric_limits<double>::infinity();
    std::vector<double> per_labeling(labelings.size(), std::numeric_limits<double>::infinity());

    const double per_point_cost = static_cast<double>(labelings.size()) * static_cast<double>(t * n) / 200.0;
    int N = opts.grid > 0 ? opts.grid
                          : detail::grid_resolution(n, opts.grid_budget, std::max(1.0, per_point_cost));
    for (int round = 0; round < opts.rounds; ++round, N *= 2) {
        const auto grid = detail::compositions(N, n);
        // residual of every (grid point, labeling) pair, kept when affordable
        const bool keep_all = grid.size() * labelings.size() <= (std::size_t{1} << 24);
        std::vector<double> res_all(keep_all ? grid.size() * labelings.size() : 0);
        std::vector<double> best_res(labelings.size(), std::numeric_limits<double>::infinity());
        std::vector<std::size_t> best_pt(labelings.size(), 0);
        std::vector<double> sums(t * static_cast<std::size_t>(k));
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            std::vector<double> w;
            for (int a : grid[gi]) w.push_back(a / static_cast<double>(N));
            const std::vector<double> masses = part_masses(w);
            ++evaluations;
            for (std::size_t li = 0; li < labelings.size(); ++li) {
                const std::vector<int>& labels = labelings[li];
                std::fill(sums.begin(), sums.end(), -share);
                for (std::size_t j = 0; j < t; ++j)
                    for (std::size_t i = 0; i < n; ++i)
                        sums[j * static_cast<std::size_t>(k) + static_cast<std::size_t>(labels[i])] +=
                            masses[j * n + i];
                const double res = inf_norm(sums);
                if (keep_all) res_all[gi * labelings.size() + li] = res;
                if (res < best_res[li]) {
                    best_res[li] = res;
                    best_pt[li] = gi;
                }
            }
        }
        // Starting points: grid local minima of every labeling (no grid
        // neighbour is better), best first. The single best point per
        // labeling can sit in a basin without a zero.
        struct Start {
            double res;
            std::size_t li, gi;
        };
        std::vector<Start> cands;
        if (keep_all) {
            std::map<std::vector<int>, std::size_t> index;
            for (std::size_t gi = 0; gi < grid.size(); ++gi) index.emplace(grid[gi], gi);
            for (std::size_t gi = 0; gi < grid.size(); ++gi) {
                std::vector<std::size_t> nbrs;
                std::vector<int> a = grid[gi];
                for (std::size_t i = 0; i < n; ++i) {
                    if (a[i] == 0) continue;
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        --a[i];
                        ++a[j];
                        nbrs.push_back(index.at(a));
                        ++a[i];
                        --a[j];
                    }
                }
                for (std::size_t li = 0; li < labelings.size(); ++li) {
                    const double r = res_all[gi * labelings.size() + li];
                    bool local_min = true;
                    for (std::size_t nb : nbrs)
                        if (res_all[nb * labelings.size() + li] < r) {
                            local_min = false;
                            break;
                        }
                    if (local_min) cands.push_back({r, li, gi});
                }
            }
        } else {
            for (std::size_t li = 0; li < labelings.size(); ++li) cands.push_back({best_res[li], li, best_pt[li]});
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Start& a, const Start& b) { return a.res < b.res; });
        const std::size_t starts = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(opts.starts));
        for (std::size_t s = 0; s < starts; ++s) {
            const std::size_t li = cands[s].li;
            const std::vector<int>& labels = labelings[li];
            auto eval = [&](const std::vector<double>& y) { return test_map(part_masses(detail::abs_l1(y)), labels); };
            std::vector<double> y0;
            for (int a : grid[cands[s].gi]) y0.push_back(a / static_cast<double>(N));
            auto lm = detail::levenberg_marquardt(eval, y0, opts.tol, opts.max_iter, detail::project_l1, evaluations);
            per_labeling[li] = std::min(per_labeling[li], lm.norm);
            if (lm.norm < best.residual) {
                best.point = JoinPoint{detail::abs_l1(lm.y), labels};
                best.residual = lm.norm;
            }
            if (lm.norm <= opts.tol) {
                const double check = inf_norm(test_map(part_masses(best.point.barycentric), labels));
                if (check <= opts.tol) {
                    best.residual = check;
                    best.evaluations = evaluations;
                    return best;
                }
            }
        }
    }
    throw NoZeroFound("join_zero: no labeling reached the tolerance; best residual " + std::to_string(best.residual),
                      best.residual, per_labeling);
}

/// The identification [2]^{*n} = S^{n-1}: label 0 is the positive sign.
inline OctahedralPoint to_octahedral(const JoinPoint& x) {
    std::vector<double> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = x.labels[i] == 0 ? x.barycentric[i] : -x.barycentric[i];
    return OctahedralPoint::from_direction(c);
}

inline JoinPoint from_octahedral(const OctahedralPoint& x) {
    JoinPoint p;
    for (double v : x.coords()) {
        p.barycentric.push_back(std::abs(v));
        p.labels.push_back(v < 0.0 ? 1 : 0);
    }
    return p;
}

} // namespace faircut

#endif // FAIRCUT_BUSOLVER_HPP
