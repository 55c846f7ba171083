#ifndef FAIRCUT_IO_HPP
#define FAIRCUT_IO_HPP

// JSON reading and writing for measures, schemes, cell functions and every
// result kind. Infinite offsets are written as the strings "+inf"/"-inf";
// thief labels are 1-based in files and 0-based in memory.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "faircut/chessboard.hpp"
#include "faircut/counterexamples.hpp"
#include "faircut/errors.hpp"
#include "faircut/measures.hpp"
#include "faircut/necklace1d.hpp"
#include "faircut/nested.hpp"
#include "faircut/oracle.hpp"
#include "faircut/stairpath.hpp"
#include "faircut/voronoifair.hpp"

namespace faircut::io {

using json = nlohmann::ordered_json;

inline json num(double x) {
    if (x == kInf) return "+inf";
    if (x == -kInf) return "-inf";
    if (std::isnan(x)) return nullptr;
    return x;
}

inline json nums(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline json matrix(const std::vector<std::vector<double>>& m) {
    json a = json::array();
    for (const auto& row : m) a.push_back(nums(row));
    return a;
}

inline double to_num(const json& j, const std::string& what = "number") {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "+inf" || s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw InputError(what + " must be a number or \"+inf\"/\"-inf\"");
}

inline std::vector<double> to_nums(const json& j, const std::string& what = "vector") {
    if (!j.is_array()) throw InputError(what + " must be an array");
    std::vector<double> v;
    for (const json& x : j) v.push_back(to_num(x, what + " entry"));
    return v;
}

inline std::vector<std::vector<double>> to_matrix(const json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + " must be an array of arrays");
    std::vector<std::vector<double>> m;
    for (const json& row : j) m.push_back(to_nums(row, what));
    return m;
}

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
    return j.at(key);
}

inline std::vector<int> labels_to_json_base(const std::vector<int>& l) {
    std::vector<int> out;
    for (int x : l) out.push_back(x + 1);
    return out;
}

inline std::vector<int> labels_from_json(const json& j, int k) {
    if (!j.is_array()) throw InputError("labels must be an array");
    std::vector<int> out;
    for (const json& x : j) {
        if (!x.is_number_integer()) throw InputError("labels must be integers");
        const int l = x.get<int>();
        if (l < 1 || (k > 0 && l > k)) throw InputError("label " + std::to_string(l) + " outside 1..k");
        out.push_back(l - 1);
    }
    return out;
}

/// Parses JSON text; errors carry 1-based line and column.
inline json parse_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
    }
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline json read_file(const std::string& path) { return parse_text(read_text(path), path); }

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << text;
}

// ---- measures ----

inline Box box_from_json(const json& j, std::size_t dim) {
    if (!j.is_array() || j.size() != dim) throw InputError("box must list [lo, hi] for every axis");
    Box b;
    for (const json& axis : j) {
        const std::vector<double> lh = to_nums(axis, "box axis");
        if (lh.size() != 2) throw InputError("box axis must be [lo, hi]");
        b.lo.push_back(lh[0]);
        b.hi.push_back(lh[1]);
    }
    return b;
}

inline json to_json(const Halfspace& h) {
    return json{{"normal", nums(h.normal)}, {"offset", num(h.offset)}, {"closed", h.closed}};
}

inline Halfspace halfspace_from_json(const json& j) {
    Halfspace h;
    h.normal = to_nums(field(j, "normal"), "normal");
    h.offset = to_num(field(j, "offset"), "offset");
    h.closed = j.value("closed", true);
    return h;
}

inline json to_json(const ConvexRegion& r) {
    json hs = json::array();
    for (const Halfspace& h : r.halfspaces) hs.push_back(to_json(h));
    return json{{"halfspaces", hs}};
}

inline ConvexRegion region_from_json(const json& j, std::size_t dim) {
    ConvexRegion r{dim, {}};
    for (const json& h : field(j, "halfspaces")) {
        Halfspace x = halfspace_from_json(h);
        if (x.normal.size() != dim) throw DimensionError("halfspace normal has the wrong dimension");
        r.add(std::move(x));
    }
    return r;
}

/// One box measure object {"dim", "kind": "boxes", "atoms": [...]}. Atoms
/// may carry "clip" halfspaces; their weights then spread uniformly over
/// box & clip.
inline BoxMeasure measure_from_json(const json& j) {
    const json& d = field(j, "dim");
    if (!d.is_number_integer() || d.get<int>() < 1) throw InputError("dim must be a positive integer");
    const std::size_t dim = d.get<std::size_t>();
    const std::string kind = j.value("kind", std::string("boxes"));
    if (kind == "points") throw InputError("point measures are only accepted by the oracles");
    if (kind != "boxes") throw InputError("unknown measure kind \"" + kind + "\"");
    const json& atoms = field(j, "atoms");
    if (!atoms.is_array() || atoms.empty()) throw InputError("a measure needs at least one atom");
    bool clipped = false;
    std::vector<std::pair<Box, double>> boxes;
    for (const json& a : atoms) {
        boxes.push_back({box_from_json(field(a, "box"), dim), to_num(field(a, "weight"), "weight")});
        if (a.contains("clip")) clipped = true;
    }
    if (!clipped) return BoxMeasure::from_boxes(dim, boxes);
    if (atoms.size() != 1) throw InputError("clipped measures must have a single atom");
    BoxMeasure m = BoxMeasure::uniform_on(boxes.front().first, region_from_json(json{{"halfspaces", atoms.front().at("clip")}}, dim));
    return m;
}

/// A single measure, an array of measures, or {"measures": [...]}.
inline std::vector<BoxMeasure> measures_from_json(const json& j) {
    std::vector<BoxMeasure> out;
    if (j.is_array()) {
        for (const json& m : j) out.push_back(measure_from_json(m));
    } else if (j.is_object() && j.contains("measures")) {
        for (const json& m : j.at("measures")) out.push_back(measure_from_json(m));
    } else {
        out.push_back(measure_from_json(j));
    }
    if (out.empty()) throw InputError("no measures given");
    for (const BoxMeasure& m : out)
        if (m.dim() != out.front().dim()) throw DimensionError("measures have different dimensions");
    return out;
}

inline PointMeasure point_measure_from_json(const json& j) {
    const std::size_t dim = field(j, "dim").get<std::size_t>();
    if (j.value("kind", std::string()) != "points") throw InputError("expected a \"points\" measure");
    std::vector<PointMeasure::Atom> atoms;
    for (const json& a : field(j, "atoms")) {
        const json& w = field(a, "weight");
        if (!w.is_number_integer()) throw InputError("point weights must be integers (exact arithmetic)");
        atoms.push_back({to_nums(field(a, "point"), "point"), PointMeasure::Rational(w.get<std::int64_t>())});
    }
    return PointMeasure::from_points(dim, std::move(atoms));
}

inline json to_json(const BoxMeasure& m) {
    json atoms = json::array();
    for (const BoxAtom& a : m.atoms()) {
        json box = json::array();
        for (std::size_t i = 0; i < m.dim(); ++i) box.push_back(json::array({num(a.box.lo[i]), num(a.box.hi[i])}));
        json atom{{"box", box}, {"weight", a.weight}};
        if (!a.clip.empty()) {
            json clip = json::array();
            for (const Halfspace& h : a.clip) clip.push_back(to_json(h));
            atom["clip"] = clip;
        }
        atoms.push_back(atom);
    }
    return json{{"dim", m.dim()}, {"kind", "boxes"}, {"atoms", atoms}};
}

inline json to_json(const std::vector<BoxMeasure>& ms) {
    json a = json::array();
    for (const BoxMeasure& m : ms) a.push_back(to_json(m));
    return json{{"measures", a}};
}

// ---- schemes, directions, functions ----

/// {"dir": [...], "left": scheme|null, "right": scheme|null}; null is a leaf.
inline SchemeTree scheme_from_json(const json& j, std::size_t dim) {
    if (j.is_null()) return SchemeTree::leaf(dim);
    if (!j.is_object()) throw InputError("scheme node must be an object or null");
    const std::vector<double> dir = to_nums(field(j, "dir"), "dir");
    const SchemeTree l = scheme_from_json(j.value("left", json()), dim);
    const SchemeTree r = scheme_from_json(j.value("right", json()), dim);
    return SchemeTree::node(dir, l, r);
}

inline json scheme_node_json(const SchemeTree& s, int node) {
    if (node < 0) return nullptr;
    const auto& n = s.nodes()[static_cast<std::size_t>(node)];
    return json{{"dir", nums(n.dir)}, {"left", scheme_node_json(s, n.left)}, {"right", scheme_node_json(s, n.right)}};
}

inline json to_json(const SchemeTree& s) { return scheme_node_json(s, s.root()); }

/// An array of vectors or {"directions": [...]}.
inline std::vector<std::vector<double>> directions_from_json(const json& j) {
    const json& a = j.is_object() ? field(j, "directions") : j;
    return to_matrix(a, "directions");
}

inline CellFunctions functions_from_json(const json& j) {
    const std::string kind = field(j, "kind").get<std::string>();
    if (kind == "linear") return CellFunctions::linear(to_matrix(field(j, "gradients"), "gradients"));
    if (kind == "simplex") return CellFunctions::simplex(to_matrix(field(j, "vertices"), "vertices"));
    throw InputError("unknown function kind \"" + kind + "\" (expected linear or simplex)");
}

// ---- results ----

inline json share_json(const std::vector<std::vector<double>>& shares) { return matrix(shares); }

/// Per-measure max |share - 1/k| and overall max.
inline json residuals_json(const std::vector<std::vector<double>>& shares, int k) {
    std::vector<double> per(shares.empty() ? 0 : shares.front().size(), 0.0);
    double mx = 0.0;
    for (const auto& row : shares)
        for (std::size_t j = 0; j < row.size(); ++j) {
            per[j] = std::max(per[j], std::abs(row[j] - 1.0 / k));
            mx = std::max(mx, per[j]);
        }
    return json{{"max", mx}, {"per_measure", per}};
}

inline json half_residuals_json(const std::vector<double>& masses) {
    std::vector<double> per;
    double mx = 0.0;
    for (double m : masses) {
        per.push_back(std::abs(m - 0.5));
        mx = std::max(mx, per.back());
    }
    return json{{"max", mx}, {"per_measure", per}};
}

inline json to_json(const NecklaceSplit& s) {
    return json{{"kind", "necklace"},  {"thieves", s.thieves},
                {"cuts", nums(s.cuts)}, {"labels", labels_to_json_base(s.labels)},
                {"shares", share_json(s.shares)}, {"composite", s.composite}};
}

inline json to_json(const DiscreteSplit& s, const BeadString& beads, int k) {
    const std::string types = beads.types();
    std::vector<std::vector<int>> counts(static_cast<std::size_t>(k), std::vector<int>(types.size(), 0));
    std::size_t seg = 0;
    for (std::size_t i = 0; i < beads.size(); ++i) {
        if (seg < s.cuts.size() && static_cast<int>(i) == s.cuts[seg]) ++seg;
        counts[static_cast<std::size_t>(s.labels[seg])][types.find(beads.beads[i])] += 1;
    }
    return json{{"kind", "necklace-discrete"}, {"beads", beads.beads}, {"types", types},
                {"thieves", k},                {"cuts", s.cuts},       {"labels", labels_to_json_base(s.labels)},
                {"counts", counts}};
}

inline json to_json(const StairPartition& p) {
    json strips = json::array();
    for (const Strip& s : p.strips)
        strips.push_back(json{{"cut", s.cut}, {"x", num(s.x)}, {"left", s.left_is_a ? "A" : "B"}});
    return json{{"cut_vector", p.M.entries}, {"y_breaks", nums(p.y_breaks)}, {"strips", strips}};
}

inline StairPartition stair_partition_from_json(const json& j) {
    StairPartition p;
    for (const json& e : field(j, "cut_vector")) p.M.entries.push_back(e.get<int>());
    p.M.validate();
    p.y_breaks = to_nums(field(j, "y_breaks"), "y_breaks");
    for (const json& s : field(j, "strips")) {
        Strip st;
        st.cut = field(s, "cut").get<bool>();
        st.x = to_num(s.value("x", json(0.0)), "x");
        st.left_is_a = field(s, "left").get<std::string>() == "A";
        p.strips.push_back(st);
    }
    if (p.strips.size() != p.M.n() || p.y_breaks.size() + 1 != p.M.n())
        throw InputError("stair partition shape does not match its cut vector");
    return p;
}

inline json to_json(const StairPath& path) {
    json v = json::array();
    for (const PathVertex& p : path.vertices) v.push_back(json::array({num(p.x), num(p.y)}));
    json wraps = json::array();
    for (bool b : path.through_infinity) wraps.push_back(b);
    return json{{"vertices", v}, {"through_infinity", wraps}, {"turns", path.turns}, {"turn_bound", path.turn_bound}};
}

inline json to_json(const HalvingPath& h) {
    return json{{"kind", "stairpath"},
                {"partition", to_json(h.equipartition.partition)},
                {"path", to_json(h.path)},
                {"masses", h.equipartition.masses}};
}

inline json parts_json(const std::vector<ConvexRegion>& parts) {
    json a = json::array();
    for (const ConvexRegion& r : parts) a.push_back(to_json(r));
    return a;
}

inline json to_json(const NestedPartition& p) {
    return json{{"scheme", to_json(p.scheme)}, {"offsets", nums(p.offsets)}, {"labels", labels_to_json_base(p.labels)}};
}

inline json to_json(const NestedSolution& s, int k) {
    return json{{"kind", "nested"},
                {"thieves", k},
                {"dim", s.partition.scheme.dim()},
                {"partition", to_json(s.partition)},
                {"parts", parts_json(s.partition.parts())},
                {"labels", labels_to_json_base(s.partition.labels)},
                {"shares", share_json(s.shares)}};
}

inline json forest_json(const NestedForest& f) {
    json inner = json::array();
    for (const NestedForest& c : f.inner) inner.push_back(forest_json(c));
    return json{{"thieves", f.k}, {"outer_thieves", f.outer_k}, {"outer", to_json(f.outer)}, {"inner", inner}};
}

inline json to_json(const NestedForest& f) {
    std::vector<ConvexRegion> parts;
    std::vector<int> labels;
    for (auto& [r, l] : f.labeled_parts()) {
        parts.push_back(r);
        labels.push_back(l);
    }
    return json{{"kind", "nested"},
                {"thieves", f.k},
                {"dim", f.outer.scheme.dim()},
                {"forest", forest_json(f)},
                {"hyperplanes", f.hyperplanes()},
                {"parts", parts_json(parts)},
                {"labels", labels_to_json_base(labels)},
                {"shares", share_json(f.shares)}};
}

inline json to_json(const ChessboardColouring& c) {
    return json{{"directions", matrix(c.directions)}, {"offsets", matrix(c.offsets)}, {"parity", c.parity}};
}

inline ChessboardColouring colouring_from_json(const json& j) {
    ChessboardColouring c;
    c.directions = to_matrix(field(j, "directions"), "directions");
    c.offsets = to_matrix(field(j, "offsets"), "offsets");
    c.parity = field(j, "parity").get<int>();
    if (c.offsets.size() != c.directions.size()) throw InputError("one offset list per direction expected");
    return c;
}

inline json to_json(const ChessboardSolution& s, const ChessboardSpec& spec) {
    return json{{"kind", "chessboard"},
                {"counts", spec.counts},
                {"colouring", to_json(s.colouring)},
                {"shares", s.shares}};
}

inline json to_json(const FairSolution& s, int k) {
    return json{{"kind", "voronoi"},
                {"thieves", k},
                {"dim", s.cells.empty() ? 0 : s.cells.front().dim},
                {"weights", nums(s.weights)},
                {"capacities", s.capacities},
                {"labels", labels_to_json_base(s.labels)},
                {"parts", parts_json(s.cells)},
                {"shares", share_json(s.shares)},
                {"technical_condition", s.technical_condition}};
}

inline json to_json(const NonExistenceCertificate& c) {
    return json{{"kind", "certificate"},
                {"claim", c.claim},
                {"step", c.step},
                {"resolution", c.resolution},
                {"candidates", c.candidates},
                {"delta", c.delta},
                {"lipschitz", c.lipschitz},
                {"slack", c.slack},
                {"witness", c.witness},
                {"orientation", c.orientation},
                {"orientation_minima", c.orientation_minima},
                {"revalidated", c.revalidated},
                {"revalidation_min", c.revalidation_min},
                {"holds", c.holds()}};
}

inline json to_json(const OracleReport& r) {
    return json{{"kind", "oracle"},   {"instance", r.instance}, {"space_size", r.space_size},
                {"feasible", r.feasible}, {"best", num(r.best)}, {"witness", nums(r.witness)},
                {"labels", r.labels}};
}

/// Labeled parts of a nested or Voronoi result.
struct LabeledParts {
    std::vector<ConvexRegion> parts;
    std::vector<int> labels;  // 0-based
    int k = 0;
};

inline LabeledParts labeled_parts_from_json(const json& result) {
    LabeledParts lp;
    lp.k = field(result, "thieves").get<int>();
    const std::size_t dim = field(result, "dim").get<std::size_t>();
    for (const json& p : field(result, "parts")) lp.parts.push_back(region_from_json(p, dim));
    lp.labels = labels_from_json(field(result, "labels"), lp.k);
    if (lp.labels.size() != lp.parts.size()) throw InputError("one label per part expected");
    return lp;
}

/// Shares recomputed from a result JSON with the measures module only.
/// Returns (shares[label][measure], k); for two-colour kinds k = 2 and
/// row 0 is colour A.
inline std::pair<std::vector<std::vector<double>>, int> recompute_shares(const json& result,
                                                                        std::span<const BoxMeasure> ms) {
    const std::string kind = field(result, "kind").get<std::string>();
    const std::size_t t = ms.size();
    if (kind == "necklace") {
        const int k = field(result, "thieves").get<int>();
        const std::vector<double> cuts = to_nums(field(result, "cuts"), "cuts");
        const std::vector<int> labels = labels_from_json(field(result, "labels"), k);
        if (labels.size() != cuts.size() + 1) throw InputError("necklace needs one label per interval");
        std::vector<std::vector<double>> s(static_cast<std::size_t>(k), std::vector<double>(t, 0.0));
        for (std::size_t i = 0; i <= cuts.size(); ++i) {
            ConvexRegion r{1, {}};
            if (i > 0) r.add(halfspace_ge({1.0}, cuts[i - 1]));
            if (i < cuts.size()) r.add(halfspace_le({1.0}, cuts[i], false));
            for (std::size_t j = 0; j < t; ++j)
                s[static_cast<std::size_t>(labels[i])][j] += mass_of_region(ms[j], r) / ms[j].total_mass();
        }
        return {s, k};
    }
    if (kind == "nested" || kind == "voronoi") {
        const LabeledParts lp = labeled_parts_from_json(result);
        return {label_shares(ms, lp.parts, lp.labels, lp.k), lp.k};
    }
    std::vector<std::vector<double>> s(2, std::vector<double>(t, 0.0));
    if (kind == "stairpath") {
        const StairPartition p = stair_partition_from_json(field(result, "partition"));
        const std::vector<ConvexRegion> a = p.regions(true);
        for (std::size_t j = 0; j < t; ++j) s[0][j] = mass_of_union(ms[j], a) / ms[j].total_mass();
    } else if (kind == "chessboard") {
        const ChessboardColouring c = colouring_from_json(field(result, "colouring"));
        for (std::size_t j = 0; j < t; ++j) s[0][j] = colour_share(ms[j], c);
    } else {
        throw InputError("cannot recompute shares for result kind \"" + kind + "\"");
    }
    for (std::size_t j = 0; j < t; ++j) s[1][j] = 1.0 - s[0][j];
    return {s, 2};
}

} // namespace faircut::io

#endif // FAIRCUT_IO_HPP
