#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bdt/experiments.hpp"
#include "bdt/model.hpp"
#include "bdt/realization.hpp"
#include "bdt/stats.hpp"
#include "bdt/tessellation.hpp"

namespace bdt::io {

// Version stamped on every result record and on the summary CSV.
inline constexpr int kSchemaVersion = 1;

enum class Command { kSample, kTessellate, kRender, kExperiment };
enum class Campaign { kClt, kVariance, kStabilization, kTail, kDecorrelation };

std::string to_string(Command c);
std::string to_string(Campaign c);
Command command_from_string(const std::string& name);
Campaign campaign_from_string(const std::string& name);

// Sampling window picked by choose_truncation for B_R and failure budget delta.
struct TruncationRequest {
  double R = 1;
  double delta = 1e-3;
  double height_share = 0.5;
  friend bool operator==(const TruncationRequest&, const TruncationRequest&) = default;
};

struct RenderStyle {
  double stroke_width = 0.01;
  std::string stroke = "#000000";
  bool fill = false;
  std::string fill_color = "#e8e8e8";
  friend bool operator==(const RenderStyle&, const RenderStyle&) = default;
};

// Parameters of an `experiment` run. Only the fields of the selected
// campaign are used.
struct ExperimentBlock {
  Campaign campaign = Campaign::kClt;
  int replicates = 300;

  // clt, variance
  std::vector<Statistic> statistics = {Statistic{}};
  std::vector<double> windows = {8};
  double ks_slack = 0.15;
  double variance_band = 0.25;
  double confidence = 0.95;
  int bootstrap_resamples = 1000;
  bool allow_beta_prime = false;

  // stabilization
  double R = 0.5;
  std::vector<double> r_grid = {0, 0.5, 1, 1.5, 2, 3};

  // tail
  std::vector<double> radii = {1};
  std::vector<std::vector<double>> sup_levels;
  std::vector<std::vector<double>> inf_levels;
  double grid_step = 0.05;

  // decorrelation
  double a = 2;
  std::vector<double> b_grid = {2, 3, 4, 6};
  bool independent_null = false;

  friend bool operator==(const ExperimentBlock&, const ExperimentBlock&) = default;
};

// Validated contents of a config file. The point source of the sample,
// tessellate and render commands is, in order of precedence: explicit
// `points`, `certified_radius`, `window`, `truncation`.
struct RunConfig {
  Command command = Command::kSample;
  ModelParams model = ModelParams::beta(3, 0.0);
  std::uint64_t seed = 1;
  std::string out = "out";

  std::optional<std::vector<SpacePoint>> points;
  std::optional<double> certified_radius;
  std::optional<SamplingWindow> window;
  std::optional<TruncationRequest> truncation;

  bool verify = false;  // compare with the brute-force oracle
  std::size_t oracle_cap = 60;

  std::optional<WindowBox> view;  // render; defaults to the certified square
  RenderStyle style;

  ExperimentBlock experiment;
  GrowthOptions growth;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Throws ConfigError naming the offending key (or line and column for
// malformed JSON). Unknown keys are rejected.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical JSON with every field written out.
std::string serialize_config(const RunConfig& config);

// 64-bit FNV-1a of the canonical JSON, with the output directory left out.
std::uint64_t config_hash(const RunConfig& config);
std::uint64_t fnv1a64(const std::string& bytes);

struct ResultRecord {
  int schema_version = kSchemaVersion;
  std::uint64_t config_hash = 0;
  ReplicationRecord record;
  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

// One JSON object per line; non-finite values are written as strings.
std::string record_to_json_line(const ResultRecord& r);
ResultRecord record_from_json_line(const std::string& line);

// Per campaign and value key: count, mean, unbiased variance and the KS
// distance of the standardized values to the standard normal (NaN when the
// variance vanishes).
struct SummaryRow {
  std::string campaign;
  std::string quantity;
  std::size_t count = 0;
  double mean = 0;
  double variance = 0;
  double ks_normal = 0;
};
std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records);

struct ResultFiles {
  std::filesystem::path jsonl;
  std::filesystem::path csv;
};

// Writes records.jsonl and summary.csv into `dir`. With `append`, the records
// are added to an existing stream, which must carry the same schema version;
// the CSV always summarizes the whole stream. Throws IoError with the path.
ResultFiles write_results(const std::vector<ResultRecord>& records,
                          const std::filesystem::path& dir, bool append = false);
std::vector<ResultRecord> read_results(const std::filesystem::path& jsonl);

// Edges of a planar tessellation clipped to `view`, y axis pointing up.
// The viewBox is the view rectangle itself.
std::string render_svg(const Tessellation& t, const WindowBox& view,
                       const RenderStyle& style = {});

std::string points_to_json(const PointSample& sample);

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::vector<std::filesystem::path> artifacts;
};

// Exit status for an exception: the error's code for library errors, 4 for
// filesystem failures, 1 otherwise.
int exit_code_for(const std::exception& e);

// Runs the configured command, writing artifacts below config.out. Never
// throws; failures are reported through exit_code and message.
RunOutcome run_command(const RunConfig& config);

}  // namespace bdt::io
