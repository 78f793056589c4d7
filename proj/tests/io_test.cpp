#include "bdt/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <unistd.h>

#include "bdt/error.hpp"
#include "bdt/geometry.hpp"

namespace bdt::io {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1))
    ++n;
  return n;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("bdt_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"({"model": {"kind": "beta", "d": 3, "beta": 0}})";

TEST(ParseConfig, MinimalBetaConfigFillsDefaults) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.command, Command::kSample);
  EXPECT_EQ(c.model, ModelParams::beta(3, 0.0));
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.out, "out");
  EXPECT_FALSE(c.points);
  EXPECT_FALSE(c.window);
  EXPECT_EQ(c.experiment, ExperimentBlock{});
  EXPECT_EQ(c.growth, GrowthOptions{});
  EXPECT_EQ(c.oracle_cap, 60u);
}

TEST(ParseConfig, BetaAtMinusOneCitesAdmissibleRange) {
  const auto msg = message_of(R"({"model": {"kind": "beta", "d": 3, "beta": -1}})");
  EXPECT_NE(msg.find("β > −1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("model.beta"), std::string::npos) << msg;
  const auto bp = message_of(R"({"model": {"kind": "beta_prime", "d": 3, "beta": 2}})");
  EXPECT_NE(bp.find("β > (d+1)/2"), std::string::npos) << bp;
}

TEST(ParseConfig, UnknownKeysRejectedWithPath) {
  EXPECT_NE(message_of(R"({"model": {"kind": "gaussian", "d": 3}, "sed": 4})").find("sed: unknown key"),
            std::string::npos);
  EXPECT_NE(message_of(R"({"model": {"kind": "gaussian", "d": 3, "beta": 1}})")
                .find("model.beta: unknown key"),
            std::string::npos);
  EXPECT_NE(message_of(R"({"model": {"kind": "beta", "d": 3, "beta": 0},
                           "experiment": {"replicate": 10}})")
                .find("experiment.replicate: unknown key"),
            std::string::npos);
}

TEST(ParseConfig, MalformedJsonReportsLine) {
  const auto msg = message_of("{\n  \"model\": {\"kind\": \"beta\",\n  \"d\": 3,,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ParseConfig, TypeAndRangeErrors) {
  const std::string m = R"("model": {"kind": "beta", "d": 3, "beta": 0})";
  const std::map<std::string, std::string> cases = {
      {"{" + m + R"(, "seed": -3})", "seed"},
      {"{" + m + R"(, "seed": 1.5})", "seed"},
      {R"({"model": {"kind": "beta", "d": 9, "beta": 0}})", "model.d"},
      {R"({"model": {"kind": "delta", "d": 3}})", "model.kind"},
      {"{" + m + R"(, "command": "plot"})", "command"},
      {"{" + m + R"(, "experiment": {"replicates": 1}})", "experiment.replicates"},
      {"{" + m + R"(, "experiment": {"windows": [4, 2]}})", "experiment.windows[1]"},
      {"{" + m + R"(, "experiment": {"statistics": ["X3"]}})", "experiment.statistics[0]"},
      {"{" + m + R"(, "experiment": {"campaign": "mixing"}})", "experiment.campaign"},
      {"{" + m + R"(, "window": {"region": "ball", "radius": 1}})", "window"},
      {"{" + m + R"(, "points": [[0, 0]]})", "points[0]"},
      {"{" + m + R"(, "truncation": {"R": 1, "delta": 2}})", "truncation.delta"},
      {"{" + m + R"(, "view": {"lo": [1, 0], "hi": [0, 1]}})", "view"},
      {"{" + m + R"(, "style": {"stroke": "<b>"}})", "style"},
      {R"({"command": "render", "model": {"kind": "beta", "d": 4, "beta": 0}})", "model.d"},
      {"[1, 2]", "<root>"},
  };
  for (const auto& [text, key] : cases) {
    const auto msg = message_of(text);
    EXPECT_NE(msg.find("config: " + key), std::string::npos) << text << " -> " << msg;
  }
}

TEST(ParseConfig, BetaWindowWithInfiniteTopIsDivergent) {
  const auto msg = message_of(R"({"model": {"kind": "beta", "d": 3, "beta": 0},
      "window": {"region": "ball", "radius": 1, "height_lo": 0, "height_hi": null}})");
  EXPECT_NE(msg.find("config: window"), std::string::npos) << msg;
}

RunConfig full_config() {
  RunConfig c;
  c.command = Command::kExperiment;
  c.model = ModelParams::beta_prime(4, 3.25);
  c.seed = 18446744073709551557ULL;
  c.out = "results/run";
  c.points = std::vector<SpacePoint>{{Vec{0.1, 0.2, 1.0 / 3}, -0.7}, {Vec{-1, 2, 3}, -1e-300}};
  c.certified_radius = 2.5;
  c.window = ball_window(3, -4, -0.125);
  c.truncation = TruncationRequest{1.5, 1e-4, 0.3};
  c.verify = true;
  c.oracle_cap = 20;
  c.style.fill = true;
  c.style.stroke_width = 0.1 + 0.2;
  c.experiment.campaign = Campaign::kTail;
  c.experiment.replicates = 17;
  c.experiment.statistics = {Statistic::parse("Y2"), Statistic::parse("X1")};
  c.experiment.windows = {1, 2.5};
  c.experiment.radii = {0.5, 1};
  c.experiment.sup_levels = {{-1, -0.5}};
  c.experiment.inf_levels = {{-2}, {-3, -1}};
  c.experiment.r_grid = {0, 0.1, 7};
  c.experiment.b_grid = {2.5, 3};
  c.experiment.independent_null = true;
  c.growth.initial_height = -0.25;
  c.growth.max_points = 123456789;
  return c;
}

TEST(SerializeConfig, RoundTrips) {
  for (const RunConfig& c : {parse_config(kMinimal), full_config()}) {
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text);
    EXPECT_EQ(back, c) << text;
    EXPECT_EQ(serialize_config(back), text);
  }
  RunConfig planar;
  planar.command = Command::kRender;
  planar.view = WindowBox{Vec{-1, -2}, Vec{3, 0.5}};
  planar.window = box_window(Vec{-1, -1}, Vec{1, 1}, 0, 2);
  EXPECT_EQ(parse_config(serialize_config(planar)), planar);
}

TEST(ConfigHash, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(ConfigHash, BindsInputsButNotOutputDirectory) {
  RunConfig a = full_config(), b = full_config();
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.out = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.experiment.replicates += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

ResultRecord sample_record(std::uint64_t k, double x) {
  ResultRecord r;
  r.config_hash = 0x0123456789abcdefULL;
  r.record.campaign = "clt";
  r.record.replicate = k;
  r.record.seed = 1000 + k;
  r.record.values = {{"X0[n=4]", x}, {"Y1[n=4]", 2 * x + 0.1}};
  return r;
}

TEST(ResultRecords, JsonLineRoundTrip) {
  ResultRecord r = sample_record(3, 1.0 / 3);
  r.record.values.emplace_back("sup[A=1]", std::numeric_limits<double>::infinity());
  r.record.values.emplace_back("inf[A=1]", -std::numeric_limits<double>::infinity());
  const std::string line = record_to_json_line(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_NE(line.find("\"config_hash\":\"0123456789abcdef\""), std::string::npos);
  EXPECT_EQ(record_from_json_line(line), r);

  ResultRecord n = sample_record(0, std::numeric_limits<double>::quiet_NaN());
  EXPECT_TRUE(std::isnan(record_from_json_line(record_to_json_line(n)).record.values[0].second));
  EXPECT_THROW(record_from_json_line("{}"), IoError);
  EXPECT_THROW(record_from_json_line("not json"), IoError);
}

TEST(WriteResults, ZeroRecordsGiveHeaderOnlyCsv) {
  TempDir dir;
  const auto files = write_results({}, dir.path());
  EXPECT_EQ(slurp(files.jsonl), "");
  EXPECT_EQ(slurp(files.csv), "schema_version,campaign,quantity,count,mean,variance,ks_normal\n");
}

TEST(WriteResults, MixedSchemaVersionsRejected) {
  TempDir dir;
  auto a = sample_record(0, 1), b = sample_record(1, 2);
  b.schema_version = 2;
  EXPECT_THROW(write_results({a, b}, dir.path()), IoError);

  write_results({a}, dir.path());
  EXPECT_THROW(write_results({b}, dir.path(), true), IoError);
  EXPECT_NO_THROW(write_results({b}, dir.path(), false));
}

// Parses summary.csv into (campaign, quantity) -> mean.
std::map<std::pair<std::string, std::string>, double> csv_means(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::map<std::pair<std::string, std::string>, double> out;
  while (std::getline(f, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    out[{cols.at(1), cols.at(2)}] = std::stod(cols.at(4));
  }
  return out;
}

TEST(WriteResults, CsvMeansMatchRecomputationFromJsonl) {
  TempDir dir;
  std::vector<ResultRecord> records;
  for (std::uint64_t k = 0; k < 97; ++k) records.push_back(sample_record(k, std::sin(k * 1.7) * 1e3));
  auto extra = sample_record(0, 5);
  extra.record.campaign = "variance";
  records.push_back(extra);
  const auto files = write_results(records, dir.path());

  std::map<std::pair<std::string, std::string>, std::pair<double, int>> sums;
  std::ifstream f(files.jsonl);
  std::string line;
  int lines = 0;
  while (std::getline(f, line)) {
    ++lines;
    const auto r = record_from_json_line(line);
    for (const auto& [key, value] : r.record.values) {
      auto& [s, n] = sums[{r.record.campaign, key}];
      s += value;
      ++n;
    }
  }
  EXPECT_EQ(lines, 98);
  const auto means = csv_means(files.csv);
  ASSERT_EQ(means.size(), sums.size());
  for (const auto& [id, sn] : sums) {
    const double expect = sn.first / sn.second;
    EXPECT_NEAR(means.at(id), expect, 1e-12 * std::max(1.0, std::fabs(expect)));
  }
}

TEST(WriteResults, AppendExtendsStreamAndSummary) {
  TempDir dir;
  write_results({sample_record(0, 1), sample_record(1, 3)}, dir.path());
  const auto files = write_results({sample_record(2, 8)}, dir.path(), true);
  const auto all = read_results(files.jsonl);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2], sample_record(2, 8));
  EXPECT_DOUBLE_EQ(csv_means(files.csv).at({"clt", "X0[n=4]"}), 4.0);
}

TEST(WriteResults, UnwritableDirectoryIsIoError) {
  TempDir dir;
  const fs::path blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  try {
    write_results({}, blocker / "sub");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("file"), std::string::npos);
  }
}

Tessellation triangle(Vec a, Vec b, Vec c) {
  const std::vector<SpacePoint> pts = {{a, 0}, {b, 0}, {c, 0}};
  return make_tessellation(2, pts, {IndexTuple{0, 1, 2}});
}

TEST(RenderSvg, EmptyTessellationDrawsOnlyTheFrame) {
  Tessellation t;
  t.spatial_dim = 2;
  const auto svg = render_svg(t, WindowBox::cube(2, 1));
  EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
  EXPECT_NE(svg.find("viewBox=\"-1 -1 2 2\""), std::string::npos);
  EXPECT_EQ(count(svg, "<line"), 0u);
  EXPECT_EQ(count(svg, "<rect"), 1u);
  EXPECT_EQ(svg.substr(svg.size() - 7), "</svg>\n");
}

TEST(RenderSvg, SingleTriangleHasThreeLines) {
  const auto t = triangle(Vec{0, 0}, Vec{1, 0}, Vec{0, 1});
  const auto svg = render_svg(t, WindowBox{Vec{-0.5, -0.5}, Vec{2, 2}});
  EXPECT_EQ(count(svg, "<line"), 3u);
  EXPECT_NE(svg.find("viewBox=\"-0.5 -0.5 2.5 2.5\""), std::string::npos);
  // y is mirrored inside the view: y = 0 maps to -0.5 + 2 - 0 = 1.5.
  EXPECT_NE(svg.find("<line x1=\"0\" y1=\"1.5\" x2=\"1\" y2=\"1.5\"/>"), std::string::npos) << svg;
  EXPECT_EQ(svg, render_svg(t, WindowBox{Vec{-0.5, -0.5}, Vec{2, 2}}));
}

TEST(RenderSvg, EdgesAreClippedToTheView) {
  const auto t = triangle(Vec{-2, 0}, Vec{2, 0}, Vec{0, 5});
  const auto svg = render_svg(t, WindowBox::cube(2, 1));
  // Only the base crosses the view, from x = -1 to x = 1 at y = 0.
  EXPECT_EQ(count(svg, "<line"), 1u) << svg;
  EXPECT_NE(svg.find("x1=\"-1\" y1=\"0\" x2=\"1\" y2=\"0\""), std::string::npos) << svg;
}

TEST(RenderSvg, FillDrawsClippedPolygons) {
  const auto t = triangle(Vec{-2, -2}, Vec{2, -2}, Vec{0, 2});
  RenderStyle style;
  style.fill = true;
  const auto svg = render_svg(t, WindowBox::cube(2, 1), style);
  EXPECT_EQ(count(svg, "<polygon"), 1u);
}

TEST(RenderSvg, RejectsNonPlanar) {
  Tessellation t;
  t.spatial_dim = 3;
  EXPECT_THROW(render_svg(t, WindowBox::cube(2, 1)), DomainError);
}

RunConfig with_out(RunConfig c, const fs::path& out) {
  c.out = out.string();
  return c;
}

TEST(RunCommand, SampleIsDeterministic) {
  TempDir dir;
  auto c = parse_config(R"({"model": {"kind": "gaussian", "d": 3},
      "window": {"region": "ball", "radius": 2, "height_lo": -3, "height_hi": 1}, "seed": 5})");
  const auto a = run_command(with_out(c, dir.path() / "a"));
  const auto b = run_command(with_out(c, dir.path() / "b"));
  ASSERT_EQ(a.exit_code, 0) << a.message;
  ASSERT_EQ(b.exit_code, 0);
  EXPECT_EQ(slurp(dir.path() / "a" / "points.json"), slurp(dir.path() / "b" / "points.json"));
  c.seed = 6;
  run_command(with_out(c, dir.path() / "c"));
  EXPECT_NE(slurp(dir.path() / "a" / "points.json"), slurp(dir.path() / "c" / "points.json"));
}

TEST(RunCommand, TessellateThreePointsGivesOneCell) {
  TempDir dir;
  auto c = parse_config(R"({"command": "tessellate", "model": {"kind": "beta", "d": 3, "beta": 0},
      "points": [[0, 0, 0.5], [1, 0, 0.25], [0, 1, 1]], "verify": true})");
  const auto out = run_command(with_out(c, dir.path()));
  ASSERT_EQ(out.exit_code, 0) << out.message;
  EXPECT_NE(out.message.find("oracle agrees"), std::string::npos);
  const auto t = tessellation_from_json(slurp(dir.path() / "tessellation.json"));
  ASSERT_EQ(t.num_cells(), 1u);
  EXPECT_EQ(t.vertices.size(), 3u);
}

TEST(RunCommand, ExitCodes) {
  TempDir dir;
  // No point source: configuration error.
  auto c = parse_config(kMinimal);
  EXPECT_EQ(run_command(with_out(c, dir.path() / "a")).exit_code, 1);

  // Margin r^{-0.2} <= delta/2 needs r far beyond the cap.
  c = parse_config(R"({"model": {"kind": "beta_prime", "d": 3, "beta": 2.1},
      "truncation": {"R": 1, "delta": 0.001}})");
  EXPECT_EQ(run_command(with_out(c, dir.path() / "b")).exit_code, 2);

  c = parse_config(R"({"command": "tessellate", "model": {"kind": "beta", "d": 3, "beta": 0},
      "window": {"region": "ball", "radius": 4, "height_lo": 0, "height_hi": 4},
      "verify": true, "oracle_cap": 5})");
  const auto capped = run_command(with_out(c, dir.path() / "c"));
  EXPECT_EQ(capped.exit_code, 3) << capped.message;

  const fs::path blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  c = parse_config(R"({"model": {"kind": "beta", "d": 3, "beta": 0}, "points": []})");
  EXPECT_EQ(run_command(with_out(c, blocker / "sub")).exit_code, 4);
}

TEST(RunCommand, ExperimentRerunIsByteIdentical) {
  TempDir dir;
  const auto c = parse_config(R"({"command": "experiment", "model": {"kind": "beta", "d": 3, "beta": 0},
      "seed": 3, "experiment": {"campaign": "clt", "replicates": 12, "windows": [1.5],
                                "statistics": ["X0", "Y1"]}})");
  const auto a = run_command(with_out(c, dir.path() / "a"));
  ASSERT_EQ(a.exit_code, 0) << a.message;
  setenv("BDT_WORKERS", "3", 1);
  const auto b = run_command(with_out(c, dir.path() / "b"));
  unsetenv("BDT_WORKERS");
  ASSERT_EQ(b.exit_code, 0);
  const auto ja = slurp(dir.path() / "a" / "records.jsonl");
  EXPECT_EQ(ja, slurp(dir.path() / "b" / "records.jsonl"));
  EXPECT_EQ(slurp(dir.path() / "a" / "summary.csv"), slurp(dir.path() / "b" / "summary.csv"));
  EXPECT_EQ(slurp(dir.path() / "a" / "report.json"), slurp(dir.path() / "b" / "report.json"));
  EXPECT_EQ(count(ja, "\n"), 12u);
  const auto records = read_results(dir.path() / "a" / "records.jsonl");
  for (const auto& r : records) EXPECT_EQ(r.config_hash, config_hash(c));
  EXPECT_NE(slurp(dir.path() / "a" / "report.json").find("\"verdict\""), std::string::npos);
}

TEST(RunCommand, DemoRenderMatchesGoldenFile) {
  TempDir dir;
  const fs::path data = BDT_TEST_DATA_DIR;
  auto c = load_config(data / "demo_render.json");
  const auto out = run_command(with_out(c, dir.path()));
  ASSERT_EQ(out.exit_code, 0) << out.message;
  EXPECT_TRUE(slurp(dir.path() / "tessellation.svg") == slurp(data / "demo_render.svg"));
}

}  // namespace
}  // namespace bdt::io
