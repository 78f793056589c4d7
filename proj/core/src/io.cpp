#include "bdt/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "bdt/error.hpp"
#include "bdt/geometry.hpp"
#include "bdt/point_process.hpp"
#include "json_codec.hpp"

namespace bdt::io {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string join(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Typed accessors over one JSON object; every key must be claimed before
// finish() or it is reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) fail(join(path_, key), "missing required key");
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) { return as_number(raw(key), path(key)); }
  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::optional<double> nullable_number(const std::string& key) {
    if (!has(key) || j_.at(key).is_null()) return std::nullopt;
    return number(key);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(path(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    return as_numbers(j_.at(key), path(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) fail(join(path_, key), "unknown key");
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  static std::vector<double> as_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], join(path, i)));
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Library validation errors become config errors at the given key.
template <class F>
auto at_key(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    fail(path, e.what());
  } catch (const DivergenceError& e) {
    fail(path, e.what());
  }
}

ModelParams read_model(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind_name = r.string("kind");
  const ModelKind kind = at_key(r.path("kind"), [&] { return model_kind_from_string(kind_name); });
  const auto d = r.integer("d", 3);
  if (d < 2 || d > kMaxModelDim) {
    fail(r.path("d"), "dimension d = " + std::to_string(d) + " outside supported range 2 <= d <= " +
                          std::to_string(kMaxModelDim));
  }
  ModelParams m = ModelParams::gaussian(static_cast<int>(d));
  if (kind != ModelKind::kGaussian) {
    const double beta = r.number("beta");
    m = at_key(r.path("beta"), [&] {
      return kind == ModelKind::kBeta ? ModelParams::beta(static_cast<int>(d), beta)
                                      : ModelParams::beta_prime(static_cast<int>(d), beta);
    });
  }
  r.finish();
  return m;
}

Vec read_vec(const json& j, const std::string& path, int dim) {
  const auto xs = ObjectReader::as_numbers(j, path);
  if (static_cast<int>(xs.size()) != dim)
    fail(path, "expected " + std::to_string(dim) + " coordinates");
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = xs[i];
  return v;
}

SamplingWindow read_window(const json& j, const std::string& path, const ModelParams& model) {
  ObjectReader r(j, path);
  SamplingWindow w;
  const std::string region = r.string("region");
  const int D = model.spatial_dim();
  if (region == "ball") {
    w.spatial = BallRegion{r.number("radius")};
  } else if (region == "paraboloid") {
    w.spatial = ParaboloidRegion{r.number("radius")};
  } else if (region == "box") {
    w.spatial = BoxRegion{read_vec(r.raw("lo"), r.path("lo"), D), read_vec(r.raw("hi"), r.path("hi"), D)};
  } else {
    fail(r.path("region"), "expected ball, box or paraboloid");
  }
  w.height_lo = r.nullable_number("height_lo").value_or(-kInf);
  w.height_hi = r.nullable_number("height_hi").value_or(kInf);
  r.finish();
  at_key(path, [&] {
    validate_window(model, w);
    return 0;
  });
  return w;
}

WindowBox read_box(const json& j, const std::string& path, int dim) {
  ObjectReader r(j, path);
  WindowBox b{read_vec(r.raw("lo"), r.path("lo"), dim), read_vec(r.raw("hi"), r.path("hi"), dim)};
  r.finish();
  for (int i = 0; i < dim; ++i)
    if (!(b.lo[i] < b.hi[i])) fail(path, "view requires lo < hi in every coordinate");
  return b;
}

void check_positive(double x, const std::string& path) {
  if (!(x > 0) || !std::isfinite(x)) fail(path, "must be positive and finite");
}

void check_increasing(const std::vector<double>& xs, const std::string& path, bool allow_zero) {
  if (xs.empty()) fail(path, "must not be empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || xs[i] < 0 || (!allow_zero && xs[i] == 0))
      fail(join(path, i), allow_zero ? "must be nonnegative" : "must be positive");
    if (i > 0 && !(xs[i] > xs[i - 1])) fail(join(path, i), "values must be strictly increasing");
  }
}

ExperimentBlock read_experiment(const json& j, const std::string& path, const ModelParams& model) {
  ObjectReader r(j, path);
  ExperimentBlock e;
  if (r.has("campaign")) {
    const std::string name = r.string("campaign");
    e.campaign = at_key(r.path("campaign"), [&] { return campaign_from_string(name); });
  }
  const auto M = r.integer("replicates", e.replicates);
  if (M < 2 || M > 100'000'000) fail(r.path("replicates"), "must lie in [2, 1e8]");
  e.replicates = static_cast<int>(M);

  if (r.has("statistics")) {
    const json& s = r.raw("statistics");
    if (!s.is_array() || s.empty()) fail(r.path("statistics"), "expected a nonempty array");
    e.statistics.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!s[i].is_string()) fail(join(r.path("statistics"), i), "expected a name like X0 or Y1");
      const auto st = at_key(join(r.path("statistics"), i),
                             [&] { return Statistic::parse(s[i].get<std::string>()); });
      if (st.k > model.spatial_dim())
        fail(join(r.path("statistics"), i), "k must not exceed d-1");
      e.statistics.push_back(st);
    }
  }
  e.windows = r.numbers("windows", e.windows);
  check_increasing(e.windows, r.path("windows"), false);
  e.ks_slack = r.number("ks_slack", e.ks_slack);
  if (!(e.ks_slack >= 0)) fail(r.path("ks_slack"), "must be nonnegative");
  e.variance_band = r.number("variance_band", e.variance_band);
  check_positive(e.variance_band, r.path("variance_band"));
  e.confidence = r.number("confidence", e.confidence);
  if (!(e.confidence > 0 && e.confidence < 1)) fail(r.path("confidence"), "must lie in (0, 1)");
  const auto B = r.integer("bootstrap_resamples", e.bootstrap_resamples);
  if (B < 10 || B > 1'000'000) fail(r.path("bootstrap_resamples"), "must lie in [10, 1e6]");
  e.bootstrap_resamples = static_cast<int>(B);
  e.allow_beta_prime = r.boolean("allow_beta_prime", e.allow_beta_prime);

  e.R = r.number("R", e.R);
  check_positive(e.R, r.path("R"));
  e.r_grid = r.numbers("r_grid", e.r_grid);
  check_increasing(e.r_grid, r.path("r_grid"), true);

  e.radii = r.numbers("radii", e.radii);
  check_increasing(e.radii, r.path("radii"), false);
  for (const char* key : {"sup_levels", "inf_levels"}) {
    if (!r.has(key)) continue;
    const json& v = r.raw(key);
    if (!v.is_array() || v.size() > e.radii.size())
      fail(r.path(key), "expected one array of levels per radius");
    auto& dst = std::string(key) == "sup_levels" ? e.sup_levels : e.inf_levels;
    for (std::size_t i = 0; i < v.size(); ++i)
      dst.push_back(ObjectReader::as_numbers(v[i], join(r.path(key), i)));
  }
  e.grid_step = r.number("grid_step", e.grid_step);
  check_positive(e.grid_step, r.path("grid_step"));

  e.a = r.number("a", e.a);
  check_positive(e.a, r.path("a"));
  e.b_grid = r.numbers("b_grid", e.b_grid);
  check_increasing(e.b_grid, r.path("b_grid"), false);
  if (e.b_grid.front() < e.a) fail(r.path("b_grid"), "every b must be at least a");
  e.independent_null = r.boolean("independent_null", e.independent_null);
  r.finish();
  return e;
}

GrowthOptions read_growth(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  GrowthOptions g;
  g.initial_margin = r.number("initial_margin", g.initial_margin);
  if (!(g.initial_margin >= 0)) fail(r.path("initial_margin"), "must be nonnegative");
  g.initial_height = r.nullable_number("initial_height");
  const auto rounds = r.integer("max_rounds", g.max_rounds);
  if (rounds < 1 || rounds > 10'000) fail(r.path("max_rounds"), "must lie in [1, 10000]");
  g.max_rounds = static_cast<int>(rounds);
  g.max_points = r.unsigned_integer("max_points", g.max_points);
  if (g.max_points == 0) fail(r.path("max_points"), "must be positive");
  r.finish();
  return g;
}

std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json encode_vec(const Vec& v) { return codec::encode(v); }

json encode_window(const SamplingWindow& w) { return codec::encode(w); }

json config_json(const RunConfig& c, bool with_out) {
  json j;
  j["command"] = to_string(c.command);
  j["model"] = codec::encode(c.model);
  j["seed"] = c.seed;
  if (with_out) j["out"] = c.out;
  if (c.points) {
    json pts = json::array();
    for (const auto& p : *c.points) {
      json row = encode_vec(p.v);
      row.push_back(p.h);
      pts.push_back(std::move(row));
    }
    j["points"] = std::move(pts);
  }
  if (c.certified_radius) j["certified_radius"] = *c.certified_radius;
  if (c.window) j["window"] = encode_window(*c.window);
  if (c.truncation) {
    j["truncation"] = {{"R", c.truncation->R},
                       {"delta", c.truncation->delta},
                       {"height_share", c.truncation->height_share}};
  }
  j["verify"] = c.verify;
  j["oracle_cap"] = c.oracle_cap;
  if (c.view) j["view"] = {{"lo", encode_vec(c.view->lo)}, {"hi", encode_vec(c.view->hi)}};
  j["style"] = {{"stroke_width", c.style.stroke_width},
                {"stroke", c.style.stroke},
                {"fill", c.style.fill},
                {"fill_color", c.style.fill_color}};
  const auto& e = c.experiment;
  json stats = json::array();
  for (const auto& s : e.statistics) stats.push_back(s.name());
  j["experiment"] = {{"campaign", to_string(e.campaign)},
                     {"replicates", e.replicates},
                     {"statistics", stats},
                     {"windows", e.windows},
                     {"ks_slack", e.ks_slack},
                     {"variance_band", e.variance_band},
                     {"confidence", e.confidence},
                     {"bootstrap_resamples", e.bootstrap_resamples},
                     {"allow_beta_prime", e.allow_beta_prime},
                     {"R", e.R},
                     {"r_grid", e.r_grid},
                     {"radii", e.radii},
                     {"sup_levels", e.sup_levels},
                     {"inf_levels", e.inf_levels},
                     {"grid_step", e.grid_step},
                     {"a", e.a},
                     {"b_grid", e.b_grid},
                     {"independent_null", e.independent_null}};
  j["growth"] = {{"initial_margin", c.growth.initial_margin},
                 {"initial_height", c.growth.initial_height ? json(*c.growth.initial_height)
                                                            : json(nullptr)},
                 {"max_rounds", c.growth.max_rounds},
                 {"max_points", c.growth.max_points}};
  return j;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

// Shortest-round-trip text for finite doubles, names for the others.
std::string number_text(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return json(x).dump();
}

ordered_json encode_value(double x) {
  if (std::isfinite(x)) return x;
  return number_text(x);
}

double decode_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IoError("result record: value must be a number, \"inf\", \"-inf\" or \"nan\"");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content,
                std::ios::openmode mode = std::ios::trunc) {
  std::ofstream f(path, std::ios::binary | std::ios::out | mode);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << content;
  f.flush();
  if (!f) throw IoError("write failed for " + path.string());
}

std::string csv_text(const std::vector<SummaryRow>& rows) {
  std::string out = "schema_version,campaign,quantity,count,mean,variance,ks_normal\n";
  for (const auto& r : rows) {
    out += std::to_string(kSchemaVersion) + "," + csv_field(r.campaign) + "," +
           csv_field(r.quantity) + "," + std::to_string(r.count) + "," + number_text(r.mean) +
           "," + number_text(r.variance) + "," + number_text(r.ks_normal) + "\n";
  }
  return out;
}

// ---- command dispatch ----

struct Source {
  PointSample sample;
  std::optional<Tessellation> certified;
};

Source point_source(const RunConfig& c) {
  Source s;
  if (c.points) {
    s.sample.points = *c.points;
    s.sample.model = c.model;
    s.sample.seed = c.seed;
    return s;
  }
  if (c.certified_radius) {
    auto real = certified_realization(c.model, *c.certified_radius, c.seed, c.growth);
    s.sample.points = std::move(real.points);
    s.sample.model = c.model;
    s.sample.seed = c.seed;
    if (real.tessellation.window) s.sample.window = *real.tessellation.window;
    s.certified = std::move(real.tessellation);
    return s;
  }
  if (c.window) {
    s.sample = sample_process(c.model, *c.window, c.seed);
    return s;
  }
  if (c.truncation) {
    TruncationOptions opt;
    opt.height_share = c.truncation->height_share;
    const auto tr = choose_truncation(c.model, c.truncation->R, c.truncation->delta, opt);
    s.sample = sample_process(c.model, tr.window, c.seed);
    return s;
  }
  throw ConfigError(
      "config: no point source; give one of points, certified_radius, window, truncation");
}

Tessellation build_tessellation(const RunConfig& c, Source& src, std::string& note) {
  Tessellation t = src.certified ? *src.certified : regular_triangulation(src.sample);
  if (!src.certified) {
    t.model = c.model;
    t.seed = c.seed;
  }
  if (c.verify) {
    const Tessellation oracle = brute_force_tessellation(src.sample, c.oracle_cap);
    if (oracle.cells_by_source() != t.cells_by_source())
      throw DegeneracyError("brute-force oracle disagrees with the regular triangulation");
    note = "; oracle agrees";
  }
  return t;
}

WindowBox default_view(const RunConfig& c, const Tessellation& t) {
  if (c.view) return *c.view;
  if (t.certificate) return WindowBox::cube(2, t.certificate->radius / std::sqrt(2.0));
  WindowBox b{Vec{-1, -1}, Vec{1, 1}};
  if (t.vertices.empty()) return b;
  b.lo = b.hi = t.vertices.front().v;
  for (const auto& p : t.vertices) {
    for (int i = 0; i < 2; ++i) {
      b.lo[i] = std::min(b.lo[i], p.v[i]);
      b.hi[i] = std::max(b.hi[i], p.v[i]);
    }
  }
  for (int i = 0; i < 2; ++i) {
    const double pad = 0.05 * std::max(b.hi[i] - b.lo[i], 1e-9);
    b.lo[i] -= pad;
    b.hi[i] += pad;
  }
  return b;
}

ordered_json encode_number(double x) { return encode_value(x); }

ordered_json clt_report(const CltReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"statistic", row.statistic.name()},
                    {"n", row.n},
                    {"mean", encode_number(row.mean)},
                    {"variance", encode_number(row.variance)},
                    {"normalized_variance", encode_number(row.normalized_variance)},
                    {"ks", encode_number(row.ks)},
                    {"ks_threshold", row.ks_threshold},
                    {"pass", row.pass}});
  }
  ordered_json j = {{"verdict", r.verdict}, {"pass", r.pass}, {"rows", rows}};
  if (r.unsupported) j["note"] = "no central limit theorem is known for this model";
  return j;
}

ordered_json variance_report(const VarianceReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"statistic", row.statistic.name()},
                    {"n", row.n},
                    {"normalized_variance", encode_number(row.normalized_variance)},
                    {"ci_lo", encode_number(row.ci_lo)},
                    {"ci_hi", encode_number(row.ci_hi)},
                    {"ratio_to_previous", row.ratio_to_previous
                                              ? encode_number(*row.ratio_to_previous)
                                              : ordered_json(nullptr)},
                    {"positive", row.positive},
                    {"ratio_ok", row.ratio_ok}});
  }
  return {{"positivity", r.positivity},
          {"stabilization", r.stabilization},
          {"pass", r.pass},
          {"rows", rows}};
}

ordered_json stabilization_report(const StabilizationReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"r", row.r},
                    {"p_hat", row.p_hat},
                    {"wilson_lo", row.wilson_lo},
                    {"wilson_hi", row.wilson_hi},
                    {"raw_p_hat", row.raw_p_hat}});
  }
  return {{"monotone", r.monotone},
          {"fit", r.fit},
          {"fit_nodes", r.fit_nodes},
          {"fitted_slope", r.fitted_slope ? encode_number(*r.fitted_slope) : ordered_json(nullptr)},
          {"reference_slope", r.reference_slope},
          {"undetermined", r.undetermined},
          {"rows", rows}};
}

ordered_json tail_report(const BoundCheckReport& r) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : r.nodes) {
    nodes.push_back({{"A", n.A},
                     {"event", n.upper ? "sup > level" : "inf < level"},
                     {"level", n.level},
                     {"frequency", n.frequency},
                     {"standard_error", n.standard_error},
                     {"bound", n.bound},
                     {"pass", n.pass}});
  }
  return {{"pass", r.pass}, {"undetermined", r.undetermined}, {"nodes", nodes}};
}

ordered_json decorrelation_report(const DecorrelationReport& r) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"b", row.b},
                    {"correlation", encode_number(row.correlation)},
                    {"threshold", row.threshold},
                    {"indistinguishable", row.indistinguishable}});
  }
  return {{"rows", rows}};
}

std::vector<ReplicationRecord> run_campaign(const RunConfig& c, ordered_json& report,
                                            std::string& verdict) {
  const auto& e = c.experiment;
  switch (e.campaign) {
    case Campaign::kClt:
    case Campaign::kVariance: {
      ExperimentConfig x;
      x.model = c.model;
      x.statistics = e.statistics;
      x.windows = e.windows;
      x.replicates = e.replicates;
      x.seed = c.seed;
      x.ks_slack = e.ks_slack;
      x.variance_band = e.variance_band;
      x.bootstrap_resamples = e.bootstrap_resamples;
      x.confidence = e.confidence;
      x.allow_beta_prime = e.allow_beta_prime;
      x.growth = c.growth;
      if (e.campaign == Campaign::kClt) {
        auto r = run_clt(x);
        report = clt_report(r);
        verdict = r.verdict;
        return std::move(r.records);
      }
      auto r = estimate_variance_scaling(x);
      report = variance_report(r);
      verdict = r.pass ? "pass" : "fail";
      return std::move(r.records);
    }
    case Campaign::kStabilization: {
      StabilizationConfig x;
      x.model = c.model;
      x.R = e.R;
      x.r_grid = e.r_grid;
      x.replicates = e.replicates;
      x.seed = c.seed;
      x.growth = c.growth;
      auto r = run_stabilization_probe(x);
      report = stabilization_report(r);
      verdict = r.monotone ? "monotone" : "not monotone";
      return std::move(r.records);
    }
    case Campaign::kTail: {
      TailCheckConfig x;
      x.model = c.model;
      x.radii = e.radii;
      x.sup_levels = e.sup_levels;
      x.inf_levels = e.inf_levels;
      x.replicates = e.replicates;
      x.seed = c.seed;
      x.grid_step = e.grid_step;
      auto r = run_tail_bound_check(x);
      report = tail_report(r);
      verdict = r.pass ? "pass" : "fail";
      return std::move(r.records);
    }
    case Campaign::kDecorrelation: {
      DecorrelationConfig x;
      x.model = c.model;
      x.a = e.a;
      x.b_grid = e.b_grid;
      x.replicates = e.replicates;
      x.seed = c.seed;
      x.independent_null = e.independent_null;
      x.growth = c.growth;
      auto r = run_decorrelation_probe(x);
      report = decorrelation_report(r);
      verdict = "done";
      return std::move(r.records);
    }
  }
  return {};
}

}  // namespace

std::string to_string(Command c) {
  switch (c) {
    case Command::kSample:
      return "sample";
    case Command::kTessellate:
      return "tessellate";
    case Command::kRender:
      return "render";
    case Command::kExperiment:
      return "experiment";
  }
  return "sample";
}

std::string to_string(Campaign c) {
  switch (c) {
    case Campaign::kClt:
      return "clt";
    case Campaign::kVariance:
      return "variance";
    case Campaign::kStabilization:
      return "stabilization";
    case Campaign::kTail:
      return "tail";
    case Campaign::kDecorrelation:
      return "decorrelation";
  }
  return "clt";
}

Command command_from_string(const std::string& name) {
  for (auto c : {Command::kSample, Command::kTessellate, Command::kRender, Command::kExperiment})
    if (to_string(c) == name) return c;
  throw DomainError("unknown command '" + name + "' (expected sample, tessellate, render or experiment)");
}

Campaign campaign_from_string(const std::string& name) {
  for (auto c : {Campaign::kClt, Campaign::kVariance, Campaign::kStabilization, Campaign::kTail,
                 Campaign::kDecorrelation})
    if (to_string(c) == name) return c;
  throw DomainError("unknown campaign '" + name +
                    "' (expected clt, variance, stabilization, tail or decorrelation)");
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError("config: line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": malformed JSON");
  }
  ObjectReader r(j, "");
  RunConfig c;
  if (r.has("command")) {
    const std::string name = r.string("command");
    c.command = at_key("command", [&] { return command_from_string(name); });
  }
  c.model = read_model(r.raw("model"), "model");
  const int D = c.model.spatial_dim();
  c.seed = r.unsigned_integer("seed", c.seed);
  c.out = r.string("out", c.out);
  if (c.out.empty()) fail("out", "must not be empty");

  if (r.has("points")) {
    const json& pts = r.raw("points");
    if (!pts.is_array()) fail("points", "expected an array of [v..., h] rows");
    std::vector<SpacePoint> v;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto row = ObjectReader::as_numbers(pts[i], join("points", i));
      if (static_cast<int>(row.size()) != D + 1)
        fail(join("points", i), "expected " + std::to_string(D + 1) + " numbers (v..., h)");
      SpacePoint p;
      p.v = Vec(D);
      for (int k = 0; k < D; ++k) p.v[k] = row[k];
      p.h = row[D];
      for (double x : row)
        if (!std::isfinite(x)) fail(join("points", i), "coordinates must be finite");
      v.push_back(p);
    }
    c.points = std::move(v);
  }
  if (r.has("certified_radius")) {
    c.certified_radius = r.number("certified_radius");
    check_positive(*c.certified_radius, "certified_radius");
  }
  if (r.has("window")) c.window = read_window(r.raw("window"), "window", c.model);
  if (r.has("truncation")) {
    ObjectReader t(r.raw("truncation"), "truncation");
    TruncationRequest q;
    q.R = t.number("R");
    check_positive(q.R, "truncation.R");
    q.delta = t.number("delta", q.delta);
    if (!(q.delta > 0 && q.delta < 1)) fail("truncation.delta", "must lie in (0, 1)");
    q.height_share = t.number("height_share", q.height_share);
    if (!(q.height_share > 0 && q.height_share < 1))
      fail("truncation.height_share", "must lie in (0, 1)");
    t.finish();
    c.truncation = q;
  }
  c.verify = r.boolean("verify", c.verify);
  c.oracle_cap = r.unsigned_integer("oracle_cap", c.oracle_cap);
  if (r.has("view")) {
    if (D != 2) fail("view", "views exist only for planar tessellations (d = 3)");
    c.view = read_box(r.raw("view"), "view", D);
  }
  if (r.has("style")) {
    ObjectReader s(r.raw("style"), "style");
    c.style.stroke_width = s.number("stroke_width", c.style.stroke_width);
    check_positive(c.style.stroke_width, "style.stroke_width");
    c.style.stroke = s.string("stroke", c.style.stroke);
    c.style.fill = s.boolean("fill", c.style.fill);
    c.style.fill_color = s.string("fill_color", c.style.fill_color);
    for (const auto* color : {&c.style.stroke, &c.style.fill_color})
      if (color->find_first_of("<>&\"'") != std::string::npos)
        fail("style", "colors must not contain markup characters");
    s.finish();
  }
  if (r.has("experiment")) c.experiment = read_experiment(r.raw("experiment"), "experiment", c.model);
  if (r.has("growth")) c.growth = read_growth(r.raw("growth"), "growth");
  r.finish();

  if (c.command == Command::kRender && c.model.d() != 3)
    fail("model.d", "render supports planar tessellations only (d = 3)");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& config) { return config_json(config, true).dump(2) + "\n"; }

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(config_json(config, false).dump()); }

std::string record_to_json_line(const ResultRecord& r) {
  ordered_json j;
  j["schema_version"] = r.schema_version;
  j["config_hash"] = hex64(r.config_hash);
  j["campaign"] = r.record.campaign;
  j["replicate"] = r.record.replicate;
  j["seed"] = r.record.seed;
  ordered_json values = ordered_json::object();
  for (const auto& [key, value] : r.record.values) values[key] = encode_value(value);
  j["values"] = std::move(values);
  return j.dump();
}

ResultRecord record_from_json_line(const std::string& line) {
  try {
    const ordered_json j = ordered_json::parse(line);
    ResultRecord r;
    r.schema_version = j.at("schema_version").get<int>();
    const std::string h = j.at("config_hash").get<std::string>();
    std::size_t used = 0;
    r.config_hash = std::stoull(h, &used, 16);
    if (used != h.size()) throw IoError("result record: malformed config_hash");
    r.record.campaign = j.at("campaign").get<std::string>();
    r.record.replicate = j.at("replicate").get<std::uint64_t>();
    r.record.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [key, value] : j.at("values").items())
      r.record.values.emplace_back(key, decode_value(value));
    return r;
  } catch (const ordered_json::exception& e) {
    throw IoError(std::string("result record: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw IoError("result record: malformed config_hash");
  } catch (const std::out_of_range&) {
    throw IoError("result record: malformed config_hash");
  }
}

std::vector<SummaryRow> summarize(const std::vector<ResultRecord>& records) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : records) {
    for (const auto& [key, value] : r.record.values) {
      const auto id = std::make_pair(r.record.campaign, key);
      auto [it, inserted] = groups.try_emplace(id);
      if (inserted) order.push_back(id);
      it->second.push_back(value);
    }
  }
  std::vector<SummaryRow> rows;
  for (const auto& id : order) {
    const auto& x = groups[id];
    SummaryRow row;
    row.campaign = id.first;
    row.quantity = id.second;
    row.count = x.size();
    double s = 0;
    for (double v : x) s += v;
    row.mean = s / static_cast<double>(x.size());
    double ss = 0;
    for (double v : x) ss += (v - row.mean) * (v - row.mean);
    row.variance = x.size() > 1 ? ss / static_cast<double>(x.size() - 1) : 0.0;
    row.ks_normal = std::numeric_limits<double>::quiet_NaN();
    if (x.size() > 1 && row.variance > 0 && std::isfinite(row.variance)) {
      const double sd = std::sqrt(row.variance);
      std::vector<double> z;
      for (double v : x) z.push_back((v - row.mean) / sd);
      row.ks_normal = ks_distance(std::move(z), standard_normal_cdf);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRecord> read_results(const std::filesystem::path& jsonl) {
  std::ifstream f(jsonl, std::ios::binary);
  if (!f) throw IoError("cannot read " + jsonl.string());
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json_line(line));
    } catch (const IoError& e) {
      throw IoError(jsonl.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

ResultFiles write_results(const std::vector<ResultRecord>& records,
                          const std::filesystem::path& dir, bool append) {
  for (const auto& r : records)
    if (r.schema_version != records.front().schema_version)
      throw IoError("refusing to write records with mixed schema versions");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  ResultFiles files{dir / "records.jsonl", dir / "summary.csv"};

  std::vector<ResultRecord> all;
  if (append && std::filesystem::exists(files.jsonl)) {
    all = read_results(files.jsonl);
    if (!all.empty() && !records.empty() &&
        all.front().schema_version != records.front().schema_version)
      throw IoError("refusing to append schema version " +
                    std::to_string(records.front().schema_version) + " to " +
                    files.jsonl.string() + " (schema version " +
                    std::to_string(all.front().schema_version) + ")");
  } else {
    append = false;
  }
  std::string lines;
  for (const auto& r : records) lines += record_to_json_line(r) + "\n";
  write_file(files.jsonl, lines, append ? std::ios::app : std::ios::trunc);
  all.insert(all.end(), records.begin(), records.end());
  write_file(files.csv, csv_text(summarize(all)));
  return files;
}

std::string points_to_json(const PointSample& sample) {
  json j;
  j["format"] = "bdt-points";
  j["version"] = 1;
  j["model"] = codec::encode(sample.model);
  j["window"] = encode_window(sample.window);
  j["seed"] = sample.seed;
  json pts = json::array();
  for (const auto& p : sample.points) {
    json row = encode_vec(p.v);
    row.push_back(p.h);
    pts.push_back(std::move(row));
  }
  j["points"] = std::move(pts);
  return j.dump(1) + "\n";
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->code());
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e))
    return static_cast<int>(ErrorCode::kIo);
  return static_cast<int>(ErrorCode::kConfig);
}

RunOutcome run_command(const RunConfig& config) {
  RunOutcome outcome;
  try {
    const std::filesystem::path dir(config.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    switch (config.command) {
      case Command::kSample: {
        const Source src = point_source(config);
        const auto path = dir / "points.json";
        write_file(path, points_to_json(src.sample));
        outcome.artifacts.push_back(path);
        outcome.message = std::to_string(src.sample.size()) + " points";
        break;
      }
      case Command::kTessellate:
      case Command::kRender: {
        Source src = point_source(config);
        std::string note;
        const Tessellation t = build_tessellation(config, src, note);
        const auto json_path = dir / "tessellation.json";
        write_file(json_path, tessellation_to_json(t) + "\n");
        outcome.artifacts.push_back(json_path);
        outcome.message = std::to_string(t.num_cells()) + " cells" + note;
        if (config.command == Command::kRender) {
          const auto svg_path = dir / "tessellation.svg";
          write_file(svg_path, render_svg(t, default_view(config, t), config.style));
          outcome.artifacts.push_back(svg_path);
        }
        break;
      }
      case Command::kExperiment: {
        ordered_json report;
        std::string verdict;
        const auto records = run_campaign(config, report, verdict);
        const std::uint64_t hash = config_hash(config);
        std::vector<ResultRecord> results;
        results.reserve(records.size());
        for (const auto& rec : records) results.push_back({kSchemaVersion, hash, rec});
        const auto files = write_results(results, dir);
        ordered_json head;
        head["schema_version"] = kSchemaVersion;
        head["config_hash"] = hex64(hash);
        head["campaign"] = to_string(config.experiment.campaign);
        head["model"] = config.model.describe();
        head["seed"] = config.seed;
        head["replicates"] = records.size();
        head["verdict"] = verdict;
        head.update(report);
        const auto report_path = dir / "report.json";
        write_file(report_path, head.dump(2) + "\n");
        outcome.artifacts = {files.jsonl, files.csv, report_path};
        outcome.message = to_string(config.experiment.campaign) + ": " + verdict;
        break;
      }
    }
  } catch (const std::exception& e) {
    outcome.exit_code = exit_code_for(e);
    outcome.message = e.what();
  }
  return outcome;
}

}  // namespace bdt::io
