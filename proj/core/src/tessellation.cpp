#include "bdt/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bdt/error.hpp"
#include "json_codec.hpp"

namespace bdt {

namespace codec {

json encode(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec decode_vec(const json& j) {
  if (!j.is_array() || j.size() > static_cast<std::size_t>(kMaxSpatialDim))
    throw DomainError("expected a coordinate array of length <= " + std::to_string(kMaxSpatialDim));
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

json encode(const ModelParams& m) {
  json j = {{"kind", to_string(m.kind())}, {"d", m.d()}};
  if (m.kind() != ModelKind::kGaussian) j["beta"] = m.beta();
  return j;
}

ModelParams decode_model(const json& j) {
  const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
  const int d = j.at("d").get<int>();
  switch (kind) {
    case ModelKind::kBeta:
      return ModelParams::beta(d, j.at("beta").get<double>());
    case ModelKind::kBetaPrime:
      return ModelParams::beta_prime(d, j.at("beta").get<double>());
    case ModelKind::kGaussian:
      break;
  }
  return ModelParams::gaussian(d);
}

namespace {
json encode_height(double h) { return std::isfinite(h) ? json(h) : json(nullptr); }
}  // namespace

double decode_height(const json& j, double if_null) {
  return j.is_null() ? if_null : j.get<double>();
}

json encode(const SamplingWindow& w) {
  json j;
  if (const auto* b = std::get_if<BallRegion>(&w.spatial)) {
    j["region"] = "ball";
    j["radius"] = b->radius;
  } else if (const auto* x = std::get_if<BoxRegion>(&w.spatial)) {
    j["region"] = "box";
    j["lo"] = encode(x->lo);
    j["hi"] = encode(x->hi);
  } else {
    j["region"] = "paraboloid";
    j["radius"] = std::get<ParaboloidRegion>(w.spatial).radius;
  }
  j["height_lo"] = encode_height(w.height_lo);
  j["height_hi"] = encode_height(w.height_hi);
  return j;
}

SamplingWindow decode_window(const json& j) {
  SamplingWindow w;
  const std::string region = j.at("region").get<std::string>();
  if (region == "ball") {
    w.spatial = BallRegion{j.at("radius").get<double>()};
  } else if (region == "box") {
    w.spatial = BoxRegion{decode_vec(j.at("lo")), decode_vec(j.at("hi"))};
  } else if (region == "paraboloid") {
    w.spatial = ParaboloidRegion{j.at("radius").get<double>()};
  } else {
    throw DomainError("unknown window region '" + region + "'");
  }
  const double inf = std::numeric_limits<double>::infinity();
  w.height_lo = j.contains("height_lo") ? decode_height(j["height_lo"], -inf) : -inf;
  w.height_hi = j.contains("height_hi") ? decode_height(j["height_hi"], inf) : inf;
  return w;
}

json encode(const StabilizationCertificate& c) {
  return {{"radius", c.radius},
          {"window_radius", c.window_radius},
          {"window_height", c.window_height},
          {"rounds", c.rounds},
          {"sampled_points", c.sampled_points}};
}

StabilizationCertificate decode_certificate(const json& j) {
  StabilizationCertificate c;
  c.radius = j.at("radius").get<double>();
  c.window_radius = j.at("window_radius").get<double>();
  c.window_height = j.at("window_height").get<double>();
  c.rounds = j.at("rounds").get<int>();
  c.sampled_points = j.at("sampled_points").get<std::size_t>();
  return c;
}

}  // namespace codec

std::vector<IndexTuple> Tessellation::cells_by_source() const {
  std::vector<IndexTuple> out;
  out.reserve(cells.size());
  const int n = cell_size();
  for (const auto& c : cells) {
    IndexTuple t{};
    for (int i = 0; i < n; ++i) t[i] = source_index[c[i]];
    std::sort(t.begin(), t.begin() + n);
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tessellation make_tessellation(int spatial_dim, std::span<const SpacePoint> sample,
                               std::vector<IndexTuple> cells) {
  Tessellation t;
  t.spatial_dim = spatial_dim;
  const int n = spatial_dim + 1;
  std::vector<std::uint32_t> used;
  for (auto& c : cells) {
    std::fill(c.begin() + n, c.end(), 0u);
    std::sort(c.begin(), c.begin() + n);
    used.insert(used.end(), c.begin(), c.begin() + n);
  }
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  t.source_index = used;
  t.vertices.reserve(used.size());
  for (const std::uint32_t s : used) t.vertices.push_back(sample[s]);
  // Source indices are sorted, so relabelling preserves the order inside tuples.
  for (auto& c : cells)
    for (int i = 0; i < n; ++i)
      c[i] = static_cast<std::uint32_t>(std::lower_bound(used.begin(), used.end(), c[i]) -
                                        used.begin());
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  t.cells = std::move(cells);
  return t;
}

std::string tessellation_to_json(const Tessellation& t) {
  using codec::json;
  json j;
  j["format"] = "bdt-tessellation";
  j["version"] = 1;
  j["spatial_dim"] = t.spatial_dim;
  json verts = json::array();
  json heights = json::array();
  for (const auto& p : t.vertices) {
    verts.push_back(codec::encode(p.v));
    heights.push_back(p.h);
  }
  j["vertices"] = std::move(verts);
  j["heights"] = std::move(heights);
  j["source_index"] = t.source_index;
  json cells = json::array();
  for (std::size_t i = 0; i < t.num_cells(); ++i) {
    const auto c = t.cell(i);
    cells.push_back(std::vector<std::uint32_t>(c.begin(), c.end()));
  }
  j["cells"] = std::move(cells);
  j["seed"] = t.seed;
  if (t.model) j["model"] = codec::encode(*t.model);
  if (t.window) j["window"] = codec::encode(*t.window);
  if (t.certificate) j["certificate"] = codec::encode(*t.certificate);
  return j.dump(1);
}

Tessellation tessellation_from_json(const std::string& text) {
  using codec::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("tessellation JSON: ") + e.what());
  }
  try {
    Tessellation t;
    t.spatial_dim = j.at("spatial_dim").get<int>();
    if (t.spatial_dim < 1 || t.spatial_dim > kMaxSpatialDim)
      throw DomainError("tessellation JSON: unsupported spatial_dim");
    const auto& verts = j.at("vertices");
    const auto& heights = j.at("heights");
    if (verts.size() != heights.size())
      throw DomainError("tessellation JSON: vertices and heights differ in length");
    for (std::size_t i = 0; i < verts.size(); ++i) {
      SpacePoint p{codec::decode_vec(verts[i]), heights[i].get<double>()};
      if (p.v.size() != t.spatial_dim) throw DomainError("tessellation JSON: bad coordinate length");
      t.vertices.push_back(p);
    }
    t.source_index = j.at("source_index").get<std::vector<std::uint32_t>>();
    if (t.source_index.size() != t.vertices.size())
      throw DomainError("tessellation JSON: source_index length mismatch");
    for (const auto& c : j.at("cells")) {
      if (c.size() != static_cast<std::size_t>(t.cell_size()))
        throw DomainError("tessellation JSON: cell of wrong size");
      IndexTuple tup{};
      for (std::size_t i = 0; i < c.size(); ++i) {
        tup[i] = c[i].get<std::uint32_t>();
        if (tup[i] >= t.vertices.size()) throw DomainError("tessellation JSON: vertex index out of range");
      }
      t.cells.push_back(tup);
    }
    t.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("model")) t.model = codec::decode_model(j["model"]);
    if (j.contains("window")) t.window = codec::decode_window(j["window"]);
    if (j.contains("certificate")) t.certificate = codec::decode_certificate(j["certificate"]);
    return t;
  } catch (const json::exception& e) {
    throw DomainError(std::string("tessellation JSON: ") + e.what());
  }
}

}  // namespace bdt
