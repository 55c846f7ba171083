#ifndef FAIRCUT_GEOMETRY_HPP
#define FAIRCUT_GEOMETRY_HPP

// Exact clipping kernels: volume of an axis-aligned box intersected with a
// finite family of halfspaces, for d <= 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "faircut/errors.hpp"

namespace faircut {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// The set {x : normal . x <= offset} (or < when !closed).
struct Halfspace {
    std::vector<double> normal;
    double offset = 0.0;
    bool closed = true;

    bool contains(std::span<const double> x) const {
        double s = 0.0;
        for (std::size_t i = 0; i < normal.size(); ++i) s += normal[i] * x[i];
        return closed ? s <= offset : s < offset;
    }
};

/// Axis-aligned box with lo[i] < hi[i]. Bounds may be infinite when used as
/// a clipping window.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }

    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    bool contains(std::span<const double> x) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
};

namespace geometry {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Polygon2 = std::vector<Vec2>;
using Polygon3 = std::vector<Vec3>;

/// Index of the single nonzero coordinate of `normal`, or -1.
inline int axis_of(std::span<const double> normal) {
    int axis = -1;
    for (std::size_t i = 0; i < normal.size(); ++i) {
        if (normal[i] != 0.0) {
            if (axis >= 0) return -1;
            axis = static_cast<int>(i);
        }
    }
    return axis;
}

/// Sutherland-Hodgman step: keep the part of `poly` with a.x <= b.
inline Polygon2 clip(const Polygon2& poly, const Vec2& a, double b) {
    Polygon2 out;
    const std::size_t n = poly.size();
    if (n == 0) return out;
    out.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double sp = a[0] * p[0] + a[1] * p[1] - b;
        const double sq = a[0] * q[0] + a[1] * q[1] - b;
        if (sp <= 0.0) out.push_back(p);
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
            const double t = sp / (sp - sq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    if (out.size() < 3) out.clear();
    return out;
}

inline double area(const Polygon2& poly) {
    double s = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * std::abs(s);
}

inline Polygon2 rectangle(double x0, double x1, double y0, double y1) {
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

/// Convex polyhedron stored as its list of planar faces.
struct Polyhedron {
    std::vector<Polygon3> faces;
};

inline Polyhedron cuboid(const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
    const Vec3 v[8] = {{lo[0], lo[1], lo[2]}, {hi[0], lo[1], lo[2]}, {hi[0], hi[1], lo[2]},
                       {lo[0], hi[1], lo[2]}, {lo[0], lo[1], hi[2]}, {hi[0], lo[1], hi[2]},
                       {hi[0], hi[1], hi[2]}, {lo[0], hi[1], hi[2]}};
    Polyhedron p;
    p.faces = {{v[0], v[3], v[2], v[1]}, {v[4], v[5], v[6], v[7]}, {v[0], v[1], v[5], v[4]},
               {v[2], v[3], v[7], v[6]}, {v[1], v[2], v[6], v[5]}, {v[0], v[4], v[7], v[3]}};
    return p;
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

/// Vector area (normal times area) of a planar polygon.
inline Vec3 vector_area(const Polygon3& f) {
    Vec3 s{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Vec3 c = cross(f[i], f[(i + 1) % f.size()]);
        s[0] += c[0];
        s[1] += c[1];
        s[2] += c[2];
    }
    return {0.5 * s[0], 0.5 * s[1], 0.5 * s[2]};
}

/// Keep the part of `poly` with a.x <= b; the new cap face is appended.
inline Polyhedron clip(const Polyhedron& poly, const Vec3& a, double b) {
    Polyhedron out;
    Polygon3 cap;
    const double scale = std::sqrt(dot(a, a));
    const double eps = 1e-14 * (scale + std::abs(b));
    for (const Polygon3& face : poly.faces) {
        Polygon3 kept;
        const std::size_t n = face.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3& p = face[i];
            const Vec3& q = face[(i + 1) % n];
            const double sp = dot(a, p) - b;
            const double sq = dot(a, q) - b;
            if (sp <= 0.0) {
                kept.push_back(p);
                if (sp >= -eps) cap.push_back(p);
            }
            if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
                const double t = sp / (sp - sq);
                const Vec3 r{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]),
                             p[2] + t * (q[2] - p[2])};
                kept.push_back(r);
                cap.push_back(r);
            }
        }
        if (kept.size() >= 3) out.faces.push_back(std::move(kept));
    }
    if (out.faces.empty()) return out;
    if (cap.size() >= 3) {
        Vec3 c{0.0, 0.0, 0.0};
        for (const Vec3& p : cap)
            for (int k = 0; k < 3; ++k) c[k] += p[k] / static_cast<double>(cap.size());
        // orthonormal basis (u, v) of the cutting plane
        const Vec3 n{a[0] / scale, a[1] / scale, a[2] / scale};
        const Vec3 helper = std::abs(n[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
        Vec3 u = cross(n, helper);
        const double un = std::sqrt(dot(u, u));
        u = {u[0] / un, u[1] / un, u[2] / un};
        const Vec3 v = cross(n, u);
        std::vector<std::pair<double, Vec3>> ordered;
        ordered.reserve(cap.size());
        for (const Vec3& p : cap) {
            const Vec3 d = sub(p, c);
            ordered.emplace_back(std::atan2(dot(d, v), dot(d, u)), p);
        }
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        Polygon3 face;
        face.reserve(ordered.size());
        for (const auto& [angle, p] : ordered) face.push_back(p);
        out.faces.push_back(std::move(face));
    }
    return out;
}

inline double volume(const Polyhedron& poly) {
    if (poly.faces.empty()) return 0.0;
    Vec3 c{0.0, 0.0, 0.0};
    std::size_t count = 0;
    for (const Polygon3& f : poly.faces)
        for (const Vec3& p : f) {
            for (int k = 0; k < 3; ++k) c[k] += p[k];
            ++count;
        }
    for (int k = 0; k < 3; ++k) c[k] /= static_cast<double>(count);
    double vol = 0.0;
    for (const Polygon3& f : poly.faces) {
        const Vec3 va = vector_area(f);
        // pyramid over face f with apex c: |va . (f0 - c)| / 3
        vol += std::abs(dot(va, sub(f[0], c))) / 3.0;
    }
    return vol;
}

/// Result of shrinking a box by the axis-aligned members of a halfspace list.
struct AxisReduction {
    Box box;
    std::vector<const Halfspace*> general;
    bool empty = false;
};

inline AxisReduction reduce_axis_aligned(const Box& box, std::span<const Halfspace> hs) {
    AxisReduction r{box, {}, false};
    for (const Halfspace& h : hs) {
        if (h.offset == kInf) continue;
        if (h.offset == -kInf) {
            r.empty = true;
            return r;
        }
        const int axis = axis_of(h.normal);
        if (axis < 0) {
            bool zero = true;
            for (double c : h.normal) zero = zero && c == 0.0;
            if (zero) {
                if (h.offset < 0.0 || (!h.closed && h.offset == 0.0)) {
                    r.empty = true;
                    return r;
                }
                continue;
            }
            r.general.push_back(&h);
            continue;
        }
        const double a = h.normal[static_cast<std::size_t>(axis)];
        const double bound = h.offset / a;
        auto i = static_cast<std::size_t>(axis);
        if (a > 0.0)
            r.box.hi[i] = std::min(r.box.hi[i], bound);
        else
            r.box.lo[i] = std::max(r.box.lo[i], bound);
        if (!(r.box.lo[i] < r.box.hi[i])) {
            r.empty = true;
            return r;
        }
    }
    return r;
}

/// Volume of box intersected with the halfspaces; exact for d <= 3.
inline double clipped_volume(const Box& box, std::span<const Halfspace> hs) {
    const AxisReduction r = reduce_axis_aligned(box, hs);
    if (r.empty) return 0.0;
    if (r.general.empty()) return r.box.volume();
    const std::size_t d = box.dim();
    if (d == 2) {
        Polygon2 poly = rectangle(r.box.lo[0], r.box.hi[0], r.box.lo[1], r.box.hi[1]);
        for (const Halfspace* h : r.general) {
            poly = clip(poly, Vec2{h->normal[0], h->normal[1]}, h->offset);
            if (poly.empty()) return 0.0;
        }
        return area(poly);
    }
    if (d == 3) {
        Polyhedron poly = cuboid({r.box.lo[0], r.box.lo[1], r.box.lo[2]},
                                 {r.box.hi[0], r.box.hi[1], r.box.hi[2]});
        for (const Halfspace* h : r.general) {
            poly = clip(poly, Vec3{h->normal[0], h->normal[1], h->normal[2]}, h->offset);
            if (poly.faces.empty()) return 0.0;
        }
        return volume(poly);
    }
    throw UnsupportedDimension("exact clipping is limited to d <= 3");
}

/// Polygon of a (finite) rectangle clipped by halfspaces; used for rendering.
inline Polygon2 clipped_polygon(const Box& box, std::span<const Halfspace> hs) {
    Polygon2 poly = rectangle(box.lo[0], box.hi[0], box.lo[1], box.hi[1]);
    for (const Halfspace& h : hs) {
        if (h.offset == kInf) continue;
        if (h.offset == -kInf) return {};
        poly = clip(poly, Vec2{h.normal[0], h.normal[1]}, h.offset);
        if (poly.empty()) return {};
    }
    return poly;
}

} // namespace geometry
} // namespace faircut

#endif // FAIRCUT_GEOMETRY_HPP
