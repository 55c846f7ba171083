#ifndef FAIRCUT_SVG_HPP
#define FAIRCUT_SVG_HPP

// Deterministic SVG drawings of planar partitions and stair paths. The view
// is the measures' bounding box plus a 10% margin; world y points up.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "faircut/chessboard.hpp"
#include "faircut/errors.hpp"
#include "faircut/geometry.hpp"
#include "faircut/io.hpp"
#include "faircut/measures.hpp"
#include "faircut/stairpath.hpp"

namespace faircut::svg {

using Point = std::array<double, 2>;

struct Stroke {
    std::vector<Point> points;
    bool dashed = false;
    bool closed = false;
};

struct Annotation {
    Point at;
    std::string text;
};

struct Scene {
    Box view;
    std::vector<BoxMeasure> measures;
    std::vector<Stroke> strokes;
    std::vector<Annotation> labels;
};

inline Box view_box(std::span<const BoxMeasure> measures) {
    if (measures.empty()) return Box{{0.0, 0.0}, {1.0, 1.0}};
    Box b{{kInf, kInf}, {-kInf, -kInf}};
    for (const BoxMeasure& m : measures) {
        if (m.dim() != 2) throw UnsupportedDimension("SVG output is planar only");
        const Box mb = m.bounding_box();
        for (int i = 0; i < 2; ++i) {
            b.lo[i] = std::min(b.lo[i], mb.lo[i]);
            b.hi[i] = std::max(b.hi[i], mb.hi[i]);
        }
    }
    for (int i = 0; i < 2; ++i) {
        const double margin = 0.1 * std::max(b.hi[i] - b.lo[i], 1e-9);
        b.lo[i] -= margin;
        b.hi[i] += margin;
    }
    return b;
}

inline Scene empty_scene(std::span<const BoxMeasure> measures) {
    Scene s;
    s.view = view_box(measures);
    s.measures.assign(measures.begin(), measures.end());
    return s;
}

/// The line {n.x = c} clipped to the view, if it crosses it.
inline void add_line(Scene& s, std::span<const double> n, double c) {
    if (!std::isfinite(c)) return;
    const geometry::Polygon2 box = geometry::rectangle(s.view.lo[0], s.view.hi[0], s.view.lo[1], s.view.hi[1]);
    // walk the box boundary and collect crossings of the line
    std::vector<Point> hits;
    for (std::size_t e = 0; e < box.size(); ++e) {
        const auto& p = box[e];
        const auto& q = box[(e + 1) % box.size()];
        const double sp = n[0] * p[0] + n[1] * p[1] - c;
        const double sq = n[0] * q[0] + n[1] * q[1] - c;
        if (sp == 0.0) hits.push_back({p[0], p[1]});
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
            const double t = sp / (sp - sq);
            hits.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    if (hits.size() < 2) return;
    s.strokes.push_back(Stroke{{hits.front(), hits.back()}, false, false});
}

/// Outlines of labeled convex parts, each annotated at its centroid.
inline void add_parts(Scene& s, const std::vector<ConvexRegion>& parts, const std::vector<std::string>& names) {
    const Box window{s.view.lo, s.view.hi};
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const geometry::Polygon2 poly = geometry::clipped_polygon(window, parts[i].halfspaces);
        if (poly.empty()) continue;
        Stroke st;
        double cx = 0.0, cy = 0.0;
        for (const auto& v : poly) {
            st.points.push_back({v[0], v[1]});
            cx += v[0];
            cy += v[1];
        }
        st.closed = true;
        s.strokes.push_back(std::move(st));
        const double n = static_cast<double>(poly.size());
        s.labels.push_back(Annotation{{cx / n, cy / n}, names[i]});
    }
}

inline double clamp_to(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

/// A stair path: solid runs as polylines, wraps through infinity dashed
/// out to the view edge on both sides.
inline void add_path(Scene& s, const StairPath& path) {
    const Box& v = s.view;
    auto at = [&](const PathVertex& p) -> Point {
        return {clamp_to(p.x, v.lo[0], v.hi[0]), clamp_to(p.y, v.lo[1], v.hi[1])};
    };
    Stroke run;
    for (std::size_t i = 0; i + 1 < path.vertices.size(); ++i) {
        const PathVertex& a = path.vertices[i];
        const PathVertex& b = path.vertices[i + 1];
        const bool wrap = i < path.through_infinity.size() && path.through_infinity[i];
        if (!wrap) {
            if (run.points.empty()) run.points.push_back(at(a));
            run.points.push_back(at(b));
            continue;
        }
        if (run.points.size() >= 2) s.strokes.push_back(run);
        run.points.clear();
        const double away = b.x > a.x ? v.lo[0] : v.hi[0];
        const double back = b.x > a.x ? v.hi[0] : v.lo[0];
        const double y = clamp_to(a.y, v.lo[1], v.hi[1]);
        s.strokes.push_back(Stroke{{at(a), {away, y}}, true, false});
        s.strokes.push_back(Stroke{{{back, y}, at(b)}, true, false});
    }
    if (run.points.size() >= 2) s.strokes.push_back(run);
}

inline void add_chessboard(Scene& s, const ChessboardColouring& c) {
    for (std::size_t i = 0; i < c.directions.size(); ++i)
        for (double o : c.offsets[i]) add_line(s, c.directions[i], o);
    const std::vector<ConvexRegion> a = colour_cells(c, Colour::A), b = colour_cells(c, Colour::B);
    Scene tmp = s;
    tmp.strokes.clear();
    tmp.labels.clear();
    add_parts(tmp, a, std::vector<std::string>(a.size(), "A"));
    add_parts(tmp, b, std::vector<std::string>(b.size(), "B"));
    s.labels.insert(s.labels.end(), tmp.labels.begin(), tmp.labels.end());
}

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    std::string s = buf;
    return s == "-0.000" ? "0.000" : s;
}

inline std::string render_svg(const Scene& s) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    const double w = s.view.hi[0] - s.view.lo[0], h = s.view.hi[1] - s.view.lo[1];
    const double scale = 800.0 / std::max(w, h);
    auto px = [&](const Point& p) {
        return fmt((p[0] - s.view.lo[0]) * scale) + "," + fmt((s.view.hi[1] - p[1]) * scale);
    };
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w * scale) + "\" height=\"" + fmt(h * scale) +
           "\" viewBox=\"0 0 " + fmt(w * scale) + " " + fmt(h * scale) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(w * scale) + "\" height=\"" + fmt(h * scale) + "\" fill=\"white\"/>\n";
    for (std::size_t j = 0; j < s.measures.size(); ++j) {
        const BoxMeasure& m = s.measures[j];
        if (m.dim() != 2) throw UnsupportedDimension("SVG output is planar only");
        out += "<g class=\"measure\" fill=\"" + std::string(palette[j % 6]) + "\" fill-opacity=\"0.35\">\n";
        for (const BoxAtom& a : m.atoms()) {
            const geometry::Polygon2 poly = geometry::clipped_polygon(a.box, a.clip);
            if (poly.empty()) continue;
            out += "<polygon points=\"";
            for (std::size_t i = 0; i < poly.size(); ++i) out += (i ? " " : "") + px({poly[i][0], poly[i][1]});
            out += "\"/>\n";
        }
        out += "</g>\n";
    }
    for (const Stroke& st : s.strokes) {
        out += st.closed ? "<polygon fill=\"none\"" : "<polyline fill=\"none\"";
        out += " stroke=\"black\" stroke-width=\"2\"";
        if (st.dashed) out += " stroke-dasharray=\"6,4\"";
        out += " points=\"";
        for (std::size_t i = 0; i < st.points.size(); ++i) out += (i ? " " : "") + px(st.points[i]);
        out += "\"/>\n";
    }
    for (const Annotation& a : s.labels) {
        const std::string p = px(a.at);
        const std::size_t comma = p.find(',');
        out += "<text x=\"" + p.substr(0, comma) + "\" y=\"" + p.substr(comma + 1) +
               "\" font-size=\"14\" text-anchor=\"middle\">" + a.text + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

/// Scene for a result JSON of any planar kind.
inline Scene scene_for_result(const io::json& result, std::span<const BoxMeasure> measures) {
    Scene s = empty_scene(measures);
    const std::string kind = io::field(result, "kind").get<std::string>();
    if (kind == "stairpath") {
        const StairPartition p = io::stair_partition_from_json(io::field(result, "partition"));
        add_path(s, to_path(p));
    } else if (kind == "chessboard") {
        add_chessboard(s, io::colouring_from_json(io::field(result, "colouring")));
    } else if (kind == "nested" || kind == "voronoi") {
        const io::LabeledParts lp = io::labeled_parts_from_json(result);
        if (!lp.parts.empty() && lp.parts.front().dim != 2) throw UnsupportedDimension("SVG output is planar only");
        std::vector<std::string> names;
        for (int l : lp.labels) names.push_back(std::to_string(l + 1));
        add_parts(s, lp.parts, names);
    } else {
        throw UnsupportedDimension("result kind \"" + kind + "\" has no planar drawing");
    }
    return s;
}

} // namespace faircut::svg

#endif // FAIRCUT_SVG_HPP
