#ifndef FAIRCUT_CLI_HPP
#define FAIRCUT_CLI_HPP

// The faircut command line. run() parses argv, dispatches to a subcommand
// and prints one JSON document on stdout:
//   {"status": "ok", "result": ..., "residuals": ...}        exit 0
//   {"status": "error", "error": {...}}                       exit 1 (input)
//                                                             exit 2 (numerical)

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "faircut/chessboard.hpp"
#include "faircut/counterexamples.hpp"
#include "faircut/io.hpp"
#include "faircut/necklace1d.hpp"
#include "faircut/nested.hpp"
#include "faircut/oracle.hpp"
#include "faircut/stairpath.hpp"
#include "faircut/svg.hpp"
#include "faircut/voronoifair.hpp"

namespace faircut::cli {

using io::json;

struct RunConfig {
    std::optional<double> tol;  // unset: 1e-9 for d = 1, 1e-6 otherwise
    std::uint64_t seed = 1;
    int grid = 0;
    std::string svg;     // --svg
    std::string output;  // --output, a copy of the stdout JSON

    double tol_for(std::size_t dim) const { return tol ? *tol : (dim == 1 ? 1e-9 : 1e-6); }

    /// FAIRCUT_TOL and FAIRCUT_SEED; flags parsed later override them.
    static RunConfig from_environment() {
        RunConfig c;
        if (const char* t = std::getenv("FAIRCUT_TOL")) {
            char* end = nullptr;
            const double v = std::strtod(t, &end);
            if (end == t || *end != '\0' || !(v > 0.0)) throw InputError("FAIRCUT_TOL must be a positive number");
            c.tol = v;
        }
        if (const char* s = std::getenv("FAIRCUT_SEED")) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(s, &end, 10);
            if (end == s || *end != '\0') throw InputError("FAIRCUT_SEED must be a non-negative integer");
            c.seed = v;
        }
        return c;
    }

    void validate() const {
        if (tol && !(*tol > 0.0)) throw InputError("tol must be positive");
        if (grid < 0) throw InputError("grid resolution must be non-negative");
    }
};

/// What a subcommand produced, plus the inputs verify needs.
struct Outcome {
    json result;
    json residuals;
    std::vector<BoxMeasure> measures;
    double tol = 0.0;
};

struct Args {
    std::string measures, scheme, directions, functions, beads, claim = "one-one", result;
    std::string counts;
    int thieves = 2;
    double step = 1e-3, radius = 0.01, offset = 0.05, width = 1e-3;
    int dim = 2;
};

inline std::vector<int> parse_counts(const std::string& s) {
    std::vector<int> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw InputError("counts must be comma-separated integers");
        }
    }
    if (out.empty()) throw InputError("counts must not be empty");
    return out;
}

inline std::vector<BoxMeasure> load_measures(const std::string& path) {
    if (path.empty()) throw InputError("--measures is required");
    return io::measures_from_json(io::read_file(path));
}

inline void write_svg(const RunConfig& cfg, const json& result, std::span<const BoxMeasure> ms) {
    if (cfg.svg.empty()) return;
    io::write_text(cfg.svg, svg::render_svg(svg::scene_for_result(result, ms)));
}

inline Outcome run_necklace(const Args& a, const RunConfig& cfg) {
    Outcome o;
    o.measures = load_measures(a.measures);
    NecklaceOptions opts;
    o.tol = opts.tol = cfg.tol_for(o.measures.front().dim());
    opts.seed = cfg.seed;
    opts.grid = cfg.grid;
    const NecklaceSplit s = split_necklace(o.measures, a.thieves, opts);
    o.result = io::to_json(s);
    for (std::size_t j = 0; j < o.measures.size(); ++j)
        o.result["normalization"].push_back(o.measures[j].normalization());
    o.residuals = io::residuals_json(s.shares, a.thieves);
    return o;
}

inline Outcome run_discrete(const Args& a, const RunConfig&) {
    Outcome o;
    const BeadString b = BeadString::parse(a.beads);
    const DiscreteSplit s = discrete_split(b, a.thieves);
    o.result = io::to_json(s, b, a.thieves);
    o.residuals = json{{"max", 0}, {"cuts", s.cuts.size()}, {"cut_bound", b.types().size() * static_cast<std::size_t>(a.thieves - 1)}};
    return o;
}

inline Outcome run_stairpath(const Args& a, const RunConfig& cfg) {
    Outcome o;
    o.measures = load_measures(a.measures);
    StairOptions opts;
    o.tol = opts.tol = cfg.tol_for(2);
    opts.seed = cfg.seed;
    opts.grid = cfg.grid;
    const HalvingPath h = halve_with_path(o.measures, opts);
    o.result = io::to_json(h);
    o.residuals = io::half_residuals_json(h.equipartition.masses);
    write_svg(cfg, o.result, o.measures);
    return o;
}

inline Outcome run_nested(const Args& a, const RunConfig& cfg) {
    Outcome o;
    o.measures = load_measures(a.measures);
    const std::size_t d = o.measures.front().dim();
    NestedOptions opts;
    o.tol = opts.tol = cfg.tol_for(d);
    opts.seed = cfg.seed;
    opts.grid = cfg.grid;
    if (!a.directions.empty()) {
        const auto dirs = io::directions_from_json(io::read_file(a.directions));
        const NestedForest f = solve_nested_composite(o.measures, dirs, a.thieves, opts);
        o.result = io::to_json(f);
        o.residuals = io::residuals_json(f.shares, a.thieves);
    } else {
        if (a.scheme.empty()) throw InputError("nested needs --scheme (prime k) or --directions");
        if (!is_prime(a.thieves)) throw InputError("composite k needs --directions (one per hyperplane)");
        const SchemeTree scheme = io::scheme_from_json(io::read_file(a.scheme), d);
        const NestedSolution s = solve_nested(o.measures, scheme, a.thieves, opts);
        o.result = io::to_json(s, a.thieves);
        o.residuals = io::residuals_json(s.shares, a.thieves);
    }
    if (d == 2) write_svg(cfg, o.result, o.measures);
    else if (!cfg.svg.empty()) throw UnsupportedDimension("SVG output is planar only");
    return o;
}

inline Outcome run_chessboard(const Args& a, const RunConfig& cfg) {
    ChessboardSpec spec;
    spec.counts = parse_counts(a.counts);
    if (!admissible(spec.counts)) {
        std::string list;
        for (int n : spec.counts) list += (list.empty() ? "" : ",") + std::to_string(n);
        throw InputError("inadmissible counts (" + list + ")");
    }
    Outcome o;
    o.measures = load_measures(a.measures);
    if (a.directions.empty()) throw InputError("chessboard needs --dirs");
    spec.directions = io::directions_from_json(io::read_file(a.directions));
    ChessboardOptions opts;
    o.tol = opts.tol = cfg.tol_for(2);
    opts.seed = cfg.seed;
    const ChessboardSolution s = solve_chessboard(o.measures, spec, opts);
    o.result = io::to_json(s, spec);
    o.residuals = io::half_residuals_json(s.shares);
    if (o.measures.front().dim() == 2) write_svg(cfg, o.result, o.measures);
    return o;
}

inline Outcome run_voronoi(const Args& a, const RunConfig& cfg) {
    Outcome o;
    o.measures = load_measures(a.measures);
    if (a.functions.empty()) throw InputError("voronoi needs --functions");
    const CellFunctions f = io::functions_from_json(io::read_file(a.functions));
    FairOptions opts;
    o.tol = opts.tol = cfg.tol_for(f.dim());
    opts.seed = cfg.seed;
    const FairSolution s = solve_fair(f, o.measures, a.thieves, opts);
    o.result = io::to_json(s, a.thieves);
    o.residuals = io::residuals_json(s.shares, a.thieves);
    if (f.dim() == 2) write_svg(cfg, o.result, o.measures);
    return o;
}

inline Outcome run_refute(const Args& a, const RunConfig& cfg) {
    Outcome o;
    NonExistenceCertificate c;
    if (a.claim == "one-one") {
        OneOneOptions opts;
        opts.step = a.step;
        opts.offset = a.offset;
        opts.width = a.width;
        opts.seed = cfg.seed;
        c = refute_one_one(opts);
    } else if (a.claim == "orthant") {
        OrthantOptions opts;
        opts.dim = static_cast<std::size_t>(a.dim);
        opts.step = a.step;
        opts.radius = a.radius;
        opts.seed = cfg.seed;
        c = refute_orthant(opts);
    } else {
        throw InputError("unknown claim \"" + a.claim + "\" (expected one-one or orthant)");
    }
    o.result = io::to_json(c);
    o.residuals = json{{"delta", c.delta}, {"slack", c.slack}, {"revalidation_min", c.revalidation_min}};
    return o;
}

/// Shares recomputed from the result JSON alone, compared with the report.
inline json recheck(const Outcome& o) {
    const auto [shares, k] = io::recompute_shares(o.result, o.measures);
    const json recomputed = io::residuals_json(shares, k);
    const double rep = o.residuals.at("max").get<double>(), got = recomputed.at("max").get<double>();
    return json{{"reported", rep}, {"recomputed", got}, {"agree", std::abs(rep - got) <= 1e-9}};
}

inline double max_marginal(std::span<const BoxMeasure> ms, std::size_t axis) {
    double l = 0.0;
    for (const BoxMeasure& m : ms) l = std::max(l, m.marginal_density_bound(axis) / m.total_mass());
    return l;
}

/// Grid oracle cross-check: oracle best <= solver residual + L * step / 2.
inline json oracle_check(const Outcome& o, double step) {
    const std::string kind = o.result.at("kind").get<std::string>();
    try {
        if (kind == "necklace-discrete") {
            const BeadString b = BeadString::parse(o.result.at("beads").get<std::string>());
            const int k = o.result.at("thieves").get<int>();
            const OracleReport r = oracle_necklace(b, k);
            const double cuts = static_cast<double>(o.result.at("cuts").size());
            return json{{"status", "checked"}, {"report", io::to_json(r)}, {"agree", r.feasible && r.best == cuts}};
        }
        std::optional<PartitionFamily> fam;
        double lipschitz = 0.0;
        const double solver = o.residuals.at("max").get<double>();
        if (kind == "necklace" && o.result.at("thieves").get<int>() == 2) {
            const std::size_t c = o.result.at("cuts").size();
            fam = necklace_family(o.measures, c);
            lipschitz = static_cast<double>(c) * max_marginal(o.measures, 0);
        } else if (kind == "stairpath") {
            const StairPartition p = io::stair_partition_from_json(o.result.at("partition"));
            fam = stair_family(o.measures, p.M);
            lipschitz = static_cast<double>(p.M.n() - 1) * max_marginal(o.measures, 1) +
                        static_cast<double>(p.M.weight()) * max_marginal(o.measures, 0);
        } else {
            return json{{"status", "skipped"}, {"reason", "no oracle family for result kind " + kind}};
        }
        const OracleReport r = oracle_grid_equipartition(*fam, step);
        const double bound = solver + lipschitz * step / 2.0;
        return json{{"status", "checked"}, {"report", io::to_json(r)}, {"bound", bound}, {"agree", r.best <= bound + 1e-12}};
    } catch (const BudgetExceeded& e) {
        return json{{"status", "skipped"}, {"reason", e.what()}};
    }
}

inline json error_json(const std::string& type, const std::string& message) {
    return json{{"status", "error"}, {"error", {{"type", type}, {"message", message}}}};
}

inline void emit(std::ostream& out, const RunConfig& cfg, const json& doc) {
    const std::string text = doc.dump(2) + "\n";
    out << text;
    if (!cfg.output.empty()) io::write_text(cfg.output, text);
}

/// Runs the command line; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = RunConfig::from_environment();
    } catch (const InputError& e) {
        out << error_json("InputError", e.what()).dump(2) << "\n";
        return 1;
    }
    Args args;
    double tol_flag = 0.0;
    std::uint64_t seed_flag = 0;
    CLI::App app{"faircut: fair mass partitions"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    app.add_option("--tol", tol_flag, "accuracy target (env FAIRCUT_TOL)");
    app.add_option("--seed", seed_flag, "random seed (env FAIRCUT_SEED)");
    app.add_option("--grid", cfg.grid, "grid resolution override (0: automatic)");
    app.add_option("-o,--output", cfg.output, "also write the JSON document to this file");

    auto measures_opt = [&](CLI::App* s) { s->add_option("--measures", args.measures, "measures JSON")->required(); };
    auto svg_opt = [&](CLI::App* s) { s->add_option("--svg", cfg.svg, "write an SVG drawing"); };
    auto thieves_opt = [&](CLI::App* s) { s->add_option("--thieves,-k", args.thieves, "number of thieves")->required(); };

    CLI::App* necklace = app.add_subcommand("necklace", "split measures on the line with t(k-1) cuts");
    measures_opt(necklace);
    thieves_opt(necklace);
    CLI::App* discrete = app.add_subcommand("necklace-discrete", "minimum-cut fair split of a bead string");
    discrete->add_option("--beads", args.beads, "bead string, one character per bead")->required();
    thieves_opt(discrete);
    CLI::App* stair = app.add_subcommand("stairpath", "halve t planar measures with a stair path of t-1 turns");
    measures_opt(stair);
    svg_opt(stair);
    CLI::App* nested = app.add_subcommand("nested", "nested hyperplane split among k thieves");
    measures_opt(nested);
    nested->add_option("--scheme", args.scheme, "scheme JSON (prime k)");
    nested->add_option("--directions", args.directions, "t(k-1) directions JSON (any k)");
    thieves_opt(nested);
    svg_opt(nested);
    CLI::App* chess = app.add_subcommand("chessboard", "chessboard colouring halving every measure");
    measures_opt(chess);
    chess->add_option("--counts", args.counts, "hyperplane counts, e.g. 1,2")->required();
    chess->add_option("--dirs", args.directions, "directions JSON")->required();
    svg_opt(chess);
    CLI::App* vor = app.add_subcommand("voronoi", "fair generalized Voronoi partition");
    measures_opt(vor);
    vor->add_option("--functions", args.functions, "cell functions JSON")->required();
    thieves_opt(vor);
    svg_opt(vor);
    CLI::App* refute = app.add_subcommand("refute", "non-existence certificates");
    refute->add_option("--claim", args.claim, "one-one or orthant")->required();
    refute->add_option("--step", args.step, "grid step");
    refute->add_option("--radius", args.radius, "orthant cube half-side");
    refute->add_option("--dim", args.dim, "orthant dimension (2 or 3)");
    refute->add_option("--offset", args.offset, "one-one segment translation");
    refute->add_option("--width", args.width, "one-one segment width");
    CLI::App* verify = app.add_subcommand("verify", "re-verify a result, optionally against an oracle");
    bool against_oracle = false;
    double oracle_step = 1e-2;
    verify->add_flag("--against-oracle", against_oracle, "also run the brute-force oracle");
    verify->add_option("--oracle-step", oracle_step, "oracle grid step");
    verify->add_option("--result", args.result, "saved result JSON (instead of a subcommand)");
    verify->add_option("--measures", args.measures, "measures JSON for --result");
    verify->prefix_command();
    verify->fallthrough(false);  // the inner command line is parsed separately
    CLI::App* render = app.add_subcommand("render", "draw a saved planar result");
    render->add_option("--result", args.result, "result JSON")->required();
    measures_opt(render);
    render->add_option("--svg", cfg.svg, "output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        out << error_json("UsageError", e.what()).dump(2) << "\n";
        return 1;
    }
    if (app.count("--tol")) cfg.tol = tol_flag;
    if (app.count("--seed")) cfg.seed = seed_flag;

    using Handler = std::function<Outcome(const Args&, const RunConfig&)>;
    const std::vector<std::pair<std::string, Handler>> handlers{
        {"necklace", run_necklace},   {"necklace-discrete", run_discrete}, {"stairpath", run_stairpath},
        {"nested", run_nested},       {"chessboard", run_chessboard},      {"voronoi", run_voronoi},
        {"refute", run_refute}};

    try {
        cfg.validate();
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "render") {
            json result = io::read_file(args.result);
            if (result.contains("status")) result = json(io::field(result, "result"));
            const std::vector<BoxMeasure> ms = load_measures(args.measures);
            io::write_text(cfg.svg, svg::render_svg(svg::scene_for_result(result, ms)));
            emit(out, cfg, json{{"status", "ok"}, {"result", {{"kind", "render"}, {"svg", cfg.svg}}}, {"residuals", nullptr}});
            return 0;
        }
        if (name == "verify") {
            Outcome o;
            if (!args.result.empty()) {
                o.result = io::read_file(args.result);
                if (o.result.contains("status")) {
                    o.residuals = o.result.at("residuals");
                    o.result = json(o.result.at("result"));
                } else {
                    throw InputError("--result must be a document written by faircut");
                }
                o.measures = load_measures(args.measures);
            } else {
                // re-parse the inner command line with the same options
                std::vector<std::string> rest = sub->remaining();
                if (rest.empty()) throw InputError("verify needs --result or a subcommand to run");
                std::vector<std::string> inner_argv{"faircut"};
                inner_argv.insert(inner_argv.end(), rest.begin(), rest.end());
                std::vector<const char*> ptrs;
                for (const std::string& s : inner_argv) ptrs.push_back(s.c_str());
                std::ostringstream inner_out, inner_err;
                const int code = run(static_cast<int>(ptrs.size()), ptrs.data(), inner_out, inner_err);
                if (code != 0) {
                    out << inner_out.str();
                    return code;
                }
                const json doc = io::parse_text(inner_out.str(), "inner result");
                o.result = doc.at("result");
                o.residuals = doc.at("residuals");
                const std::string kind = o.result.at("kind").get<std::string>();
                if (kind != "necklace-discrete" && kind != "certificate") {
                    auto it = std::find(rest.begin(), rest.end(), "--measures");
                    if (it == rest.end() || it + 1 == rest.end()) throw InputError("inner command has no --measures");
                    o.measures = load_measures(*(it + 1));
                }
            }
            const std::string kind = o.result.at("kind").get<std::string>();
            json report{{"kind", "verification"}, {"of", kind}};
            bool ok = true;
            if (kind == "certificate") {
                report["recheck"] = json{{"holds", o.result.at("holds")}};
                ok = o.result.at("holds").get<bool>();
            } else if (kind != "necklace-discrete") {
                report["recheck"] = recheck(o);
                ok = report["recheck"]["agree"].get<bool>();
            }
            if (against_oracle) {
                report["oracle"] = oracle_check(o, oracle_step);
                if (report["oracle"].contains("agree")) ok = ok && report["oracle"]["agree"].get<bool>();
            }
            report["verified"] = ok;
            emit(out, cfg, json{{"status", ok ? "ok" : "verification_failed"}, {"result", report}, {"residuals", o.residuals}});
            return ok ? 0 : 2;
        }
        for (const auto& [hname, h] : handlers)
            if (hname == name) {
                const Outcome o = h(args, cfg);
                emit(out, cfg, json{{"status", "ok"}, {"result", o.result}, {"residuals", o.residuals}});
                return 0;
            }
        throw InputError("unknown subcommand " + name);
    } catch (const NoZeroFound& e) {
        json doc = error_json("NoZeroFound", e.what());
        doc["error"]["best_residual"] = e.best_residual();
        doc["error"]["per_labeling"] = e.per_labeling();
        out << doc.dump(2) << "\n";
        return 2;
    } catch (const CertificateFailed& e) {
        json doc = error_json("CertificateFailed", e.what());
        doc["error"]["delta"] = io::num(e.delta());
        doc["error"]["slack"] = io::num(e.slack());
        out << doc.dump(2) << "\n";
        return 2;
    } catch (const PrecisionError& e) {
        json doc = error_json("PrecisionError", e.what());
        doc["error"]["achieved"] = e.achieved();
        out << doc.dump(2) << "\n";
        return 2;
    } catch (const NonConvergence& e) {
        json doc = error_json("NonConvergence", e.what());
        doc["error"]["residual"] = e.residual();
        out << doc.dump(2) << "\n";
        return 2;
    } catch (const InputError& e) {
        out << error_json("InputError", e.what()).dump(2) << "\n";
        return 1;
    } catch (const json::exception& e) {
        out << error_json("InputError", std::string("bad JSON content: ") + e.what()).dump(2) << "\n";
        return 1;
    } catch (const Error& e) {
        out << error_json("Error", e.what()).dump(2) << "\n";
        return 2;
    }
}

} // namespace faircut::cli

#endif // FAIRCUT_CLI_HPP
