#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "faircut/cli.hpp"

using namespace faircut;
using io::json;

namespace {

const std::string kSamples = FAIRCUT_SAMPLES_DIR;
const std::string kGolden = FAIRCUT_GOLDEN_DIR;

std::string sample(const std::string& name) { return kSamples + "/" + name; }

struct CliRun {
    int code;
    std::string out;
    json doc() const { return io::parse_text(out, "stdout"); }
};

CliRun faircut_run(std::vector<std::string> args) {
    args.insert(args.begin(), "faircut");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str()};
}

std::string tmp(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("faircut_test_" + name)).string();
}

std::size_t count(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
    return n;
}

} // namespace

TEST(Json, InfinitiesRoundTrip) {
    EXPECT_EQ(io::num(kInf), json("+inf"));
    EXPECT_EQ(io::num(-kInf), json("-inf"));
    EXPECT_EQ(io::to_num(json("+inf")), kInf);
    EXPECT_EQ(io::to_num(json("-inf")), -kInf);
    EXPECT_EQ(io::to_num(json(0.25)), 0.25);
    EXPECT_THROW(io::to_num(json("inf!")), InputError);
}

TEST(Json, LabelsAreOneBased) {
    EXPECT_EQ(io::labels_to_json_base({0, 2, 1}), (std::vector<int>{1, 3, 2}));
    EXPECT_EQ(io::labels_from_json(json::array({1, 3, 2}), 3), (std::vector<int>{0, 2, 1}));
    EXPECT_THROW(io::labels_from_json(json::array({0}), 3), InputError);
    EXPECT_THROW(io::labels_from_json(json::array({4}), 3), InputError);
}

TEST(Json, MalformedReportsLineAndColumn) {
    try {
        io::parse_text("{\n  \"dim\": ,\n}", "in.json");
        FAIL() << "no error";
    } catch (const InputError& e) {
        EXPECT_EQ(std::string(e.what()), "in.json:2:10: malformed JSON");
    }
}

TEST(Json, MeasuresRoundTrip) {
    const std::vector<BoxMeasure> ms = io::measures_from_json(io::read_file(sample("mixture.json")));
    const std::vector<BoxMeasure> back = io::measures_from_json(io::to_json(ms));
    ASSERT_EQ(back.size(), ms.size());
    const ConvexRegion half{ms.front().dim(), {halfspace_le(std::vector<double>(ms.front().dim(), 1.0), 0.7)}};
    for (std::size_t j = 0; j < ms.size(); ++j) {
        EXPECT_EQ(io::to_json(back[j]), io::to_json(ms[j]));
        EXPECT_NEAR(mass_of_region(back[j], half), mass_of_region(ms[j], half), 1e-15);
    }
    EXPECT_THROW(io::measures_from_json(json::parse(R"({"dim":1,"kind":"points","atoms":[]})")), InputError);
    EXPECT_THROW(io::measures_from_json(json::parse(R"({"dim":1,"atoms":[]})")), InputError);
}

TEST(Json, ClippedMeasureRoundTrip) {
    const BoxMeasure m = BoxMeasure::uniform_on(Box{{0.0, 0.0}, {1.0, 1.0}},
                                                ConvexRegion{2, {halfspace_le({1.0, 1.0}, 1.0)}});
    const BoxMeasure back = io::measure_from_json(io::to_json(m));
    const ConvexRegion left{2, {halfspace_le({1.0, 0.0}, 0.5)}};
    EXPECT_NEAR(mass_of_region(back, left), mass_of_region(m, left), 1e-15);
    EXPECT_NEAR(mass_of_region(back, left) / back.total_mass(), 0.75, 1e-12);
}

TEST(Json, SchemeRoundTrip) {
    const json j = io::read_file(sample("scheme-xy.json"));
    const SchemeTree s = io::scheme_from_json(j, 2);
    EXPECT_EQ(io::to_json(s), io::to_json(io::scheme_from_json(io::to_json(s), 2)));
    EXPECT_EQ(io::to_json(io::scheme_from_json(json(), 2)), json());
}

TEST(Json, ResultsRecomputeTheirShares) {
    const std::vector<BoxMeasure> ms = io::measures_from_json(io::read_file(sample("two-squares.json")));
    const HalvingPath h = halve_with_path(ms);
    const json j = io::to_json(h);
    const auto [s, k] = io::recompute_shares(j, ms);
    ASSERT_EQ(k, 2);
    for (std::size_t i = 0; i < ms.size(); ++i) EXPECT_NEAR(s[0][i], h.equipartition.masses[i], 1e-12);
    // the partition parses back to the same JSON
    EXPECT_EQ(io::to_json(io::stair_partition_from_json(j.at("partition"))), j.at("partition"));
}

TEST(Cli, NecklaceUniformHalves) {
    const CliRun r = faircut_run({"necklace", "--measures", sample("u01.json"), "--thieves", "2"});
    ASSERT_EQ(r.code, 0) << r.out;
    const json d = r.doc();
    EXPECT_EQ(d.at("status"), "ok");
    ASSERT_EQ(d.at("result").at("cuts").size(), 1u);
    EXPECT_NEAR(d.at("result").at("cuts")[0].get<double>(), 0.5, 1e-9);
    EXPECT_LE(d.at("residuals").at("max").get<double>(), 1e-9);
}

TEST(Cli, ExitCodes) {
    const CliRun bad_counts = faircut_run({"chessboard", "--measures", sample("three-squares.json"), "--counts", "1,1",
                                        "--dirs", sample("dirs-xy.json")});
    EXPECT_EQ(bad_counts.code, 1);
    EXPECT_NE(bad_counts.out.find("inadmissible counts (1,1)"), std::string::npos);

    EXPECT_EQ(faircut_run({"necklace", "--measures", "/nonexistent.json", "--thieves", "2"}).code, 1);
    EXPECT_EQ(faircut_run({"necklace", "--measures", sample("u01.json")}).code, 1);
    EXPECT_EQ(faircut_run({"frobnicate"}).code, 1);
    EXPECT_EQ(faircut_run({"necklace-discrete", "--beads", "aab", "--thieves", "2"}).code, 1);

    const std::string bad = tmp("bad.json");
    io::write_text(bad, "{\n  \"dim\": 1,\n  \"atoms\": [}\n");
    const CliRun malformed = faircut_run({"necklace", "--measures", bad, "--thieves", "2"});
    EXPECT_EQ(malformed.code, 1);
    EXPECT_NE(malformed.out.find(bad + ":3:13: malformed JSON"), std::string::npos) << malformed.out;

    // separation fails: numerical, not input
    const CliRun refute = faircut_run({"refute", "--claim", "orthant", "--radius", "0.4"});
    EXPECT_EQ(refute.code, 2) << refute.out;
    EXPECT_EQ(refute.doc().at("error").at("type"), "CertificateFailed");
}

TEST(Cli, GlobalOptionsAfterSubcommand) {
    const std::string o = tmp("copy.json");
    const CliRun r = faircut_run({"necklace", "--measures", sample("u01.json"), "--thieves", "3", "--tol", "1e-10", "-o", o});
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(io::read_text(o), r.out);
    EXPECT_EQ(faircut_run({"--tol", "-1", "necklace", "--measures", sample("u01.json"), "--thieves", "2"}).code, 1);
}

TEST(Cli, DiscreteCounts) {
    const CliRun r = faircut_run({"necklace-discrete", "--beads", "aabbab ab", "--thieves", "2"});
    ASSERT_EQ(r.code, 0) << r.out;
    const json d = r.doc().at("result");
    EXPECT_LE(d.at("cuts").size(), 2u);
    for (const json& row : d.at("counts")) EXPECT_EQ(row, d.at("counts")[0]);
}

TEST(Cli, VerifyRoundTrip) {
    const std::string saved = tmp("nested.json");
    const CliRun r = faircut_run({"nested", "--measures", sample("overlapping-squares.json"), "--scheme",
                               sample("scheme-xy.json"), "--thieves", "2", "-o", saved});
    ASSERT_EQ(r.code, 0) << r.out;
    const CliRun v = faircut_run({"verify", "--result", saved, "--measures", sample("overlapping-squares.json")});
    ASSERT_EQ(v.code, 0) << v.out;
    EXPECT_TRUE(v.doc().at("result").at("verified").get<bool>());

    // a tampered offset no longer verifies
    json doc = io::read_file(saved);
    doc["result"]["parts"][2]["halfspaces"][0]["offset"] = 0.9;
    io::write_text(saved, doc.dump(2));
    const CliRun t = faircut_run({"verify", "--result", saved, "--measures", sample("overlapping-squares.json")});
    EXPECT_EQ(t.code, 2) << t.out;
    EXPECT_EQ(t.doc().at("status"), "verification_failed");
}

TEST(Cli, VerifyAgainstOracle) {
    for (const std::vector<std::string>& inner :
         {std::vector<std::string>{"necklace", "--measures", sample("two-intervals.json"), "--thieves", "2"},
          std::vector<std::string>{"necklace-discrete", "--beads", "abbaabab", "--thieves", "2"},
          std::vector<std::string>{"stairpath", "--measures", sample("two-squares.json")}}) {
        std::vector<std::string> args{"verify", "--against-oracle"};
        args.insert(args.end(), inner.begin(), inner.end());
        const CliRun v = faircut_run(args);
        ASSERT_EQ(v.code, 0) << v.out;
        EXPECT_TRUE(v.doc().at("result").at("oracle").at("agree").get<bool>()) << inner[0];
    }
}

TEST(Svg, EmptyPartitionDrawsMeasuresOnly) {
    const std::vector<BoxMeasure> ms = io::measures_from_json(io::read_file(sample("two-squares.json")));
    const std::string s = svg::render_svg(svg::empty_scene(ms));
    EXPECT_EQ(count(s, "<polygon points="), 2u);
    EXPECT_EQ(count(s, "stroke=\"black\""), 0u);
}

TEST(Svg, VerticalLineIsOneSegment) {
    const std::vector<BoxMeasure> ms{BoxMeasure::uniform(Box{{0.0, 0.0}, {1.0, 1.0}})};
    svg::Scene sc = svg::empty_scene(ms);
    const std::vector<double> n{1.0, 0.0};
    svg::add_line(sc, n, 0.5);
    ASSERT_EQ(sc.strokes.size(), 1u);
    EXPECT_EQ(sc.strokes[0].points.size(), 2u);
    EXPECT_DOUBLE_EQ(sc.strokes[0].points[0][0], 0.5);
    EXPECT_DOUBLE_EQ(sc.strokes[0].points[1][0], 0.5);
    const std::string s = svg::render_svg(sc);
    EXPECT_EQ(count(s, "<polyline"), 1u);
    EXPECT_NE(s.find("points=\"400.000,800.000 400.000,0.000\""), std::string::npos) << s;
}

TEST(Svg, OneTurnStairIsPolylineWithOneCorner) {
    const std::vector<BoxMeasure> ms = io::measures_from_json(io::read_file(sample("two-squares.json")));
    const HalvingPath h = halve_with_path(ms);
    ASSERT_EQ(h.path.turns, 1);
    const std::string s = svg::render_svg(svg::scene_for_result(io::to_json(h), ms));
    ASSERT_EQ(count(s, "<polyline"), 1u);
    const std::size_t p = s.find("<polyline");
    const std::string pts = s.substr(s.find("points=\"", p) + 8);
    EXPECT_EQ(count(pts.substr(0, pts.find('"')), " "), 2u);  // three vertices
}

TEST(Svg, RejectsOtherDimensions) {
    const std::vector<BoxMeasure> line{BoxMeasure::uniform(Box{{0.0}, {1.0}})};
    EXPECT_THROW(svg::empty_scene(line), UnsupportedDimension);
    const CliRun r = faircut_run({"necklace", "--measures", sample("u01.json"), "--thieves", "2", "-o", tmp("u.json")});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(faircut_run({"render", "--result", tmp("u.json"), "--measures", sample("u01.json"), "--svg", tmp("u.svg")}).code, 1);
}

TEST(Determinism, ByteIdenticalRuns) {
    const std::vector<std::vector<std::string>> cmds{
        {"stairpath", "--measures", sample("two-squares.json"), "--svg", tmp("a.svg")},
        {"nested", "--measures", sample("overlapping-squares.json"), "--scheme", sample("scheme-xy.json"), "--thieves",
         "2", "--svg", tmp("a.svg")},
        {"chessboard", "--measures", sample("three-squares.json"), "--counts", "1,2", "--dirs", sample("dirs-xy.json"),
         "--svg", tmp("a.svg")},
        {"voronoi", "--measures", sample("triangle-measures.json"), "--functions", sample("triangle.json"),
         "--thieves", "2", "--svg", tmp("a.svg")}};
    for (const auto& cmd : cmds) {
        const CliRun a = faircut_run(cmd);
        ASSERT_EQ(a.code, 0) << cmd[0] << a.out;
        const std::string svg_a = io::read_text(tmp("a.svg"));
        const CliRun b = faircut_run(cmd);
        EXPECT_EQ(a.out, b.out) << cmd[0];
        EXPECT_EQ(svg_a, io::read_text(tmp("a.svg"))) << cmd[0];
    }
}

TEST(Determinism, GoldenFiles) {
    const CliRun r = faircut_run({"stairpath", "--measures", sample("two-squares.json"), "--svg", tmp("g.svg")});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, io::read_text(kGolden + "/stairpath-two-squares.json"));
    EXPECT_EQ(io::read_text(tmp("g.svg")), io::read_text(kGolden + "/stairpath-two-squares.svg"));
    const CliRun d = faircut_run({"necklace-discrete", "--beads", "aabbabba", "--thieves", "2"});
    EXPECT_EQ(d.out, io::read_text(kGolden + "/discrete-aabbabba.json"));
}
