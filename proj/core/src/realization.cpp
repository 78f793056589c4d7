#include "bdt/realization.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "bdt/error.hpp"
#include "bdt/geometry.hpp"
#include "bdt/point_process.hpp"
#include "bdt/predicates.hpp"
#include "bdt/rng.hpp"

namespace bdt {

namespace {

double natural_floor(const ModelParams& model) {
  return model.kind() == ModelKind::kBeta ? 0.0 : -std::numeric_limits<double>::infinity();
}

// Exact test whether the origin lies in the closed simplex.
bool simplex_contains_origin(int D, const std::array<const SpacePoint*, kMaxModelDim>& verts) {
  SpacePoint origin{Vec(D), 0};
  const int o = predicates::orient(D, verts.data());
  if (o == 0) return false;
  for (int i = 0; i <= D; ++i) {
    auto swapped = verts;
    swapped[i] = &origin;
    if (predicates::orient(D, swapped.data()) == -o) return false;
  }
  return true;
}

}  // namespace

GrowingSample::GrowingSample(const ModelParams& model, double A, double t, std::uint64_t seed)
    : model_(model), A_(A), t_(t), seed_(seed) {
  points_ = sample_process(model, paraboloid_window(A, natural_floor(model), t),
                           derive_seed(seed, 1, 0))
                .points;
}

void GrowingSample::grow(double A, double t) {
  if (A < A_ || t < t_) throw DomainError("GrowingSample can only enlarge its region");
  ++rounds_;
  const SamplingWindow old = paraboloid_window(A_, natural_floor(model_), t_);
  const PointSample fresh = sample_process(model_, paraboloid_window(A, natural_floor(model_), t),
                                           derive_seed(seed_, 1, static_cast<std::uint64_t>(rounds_)));
  for (const auto& p : fresh.points)
    if (!old.contains(p)) points_.push_back(p);
  A_ = A;
  t_ = t;
}

Certification certify(const ModelParams& model, const std::vector<SpacePoint>& points, double A,
                      double t, double target) {
  Certification out;
  const int D = model.spatial_dim();
  try {
    out.tessellation = regular_triangulation(D, points);
  } catch (const DegeneracyError&) {
    out.tessellation = Tessellation{};
    out.tessellation.spatial_dim = D;
    out.needs_height = out.needs_space = true;
    return out;
  }
  Tessellation& tess = out.tessellation;
  tess.model = model;

  const double a_cert = A * (1 - 1e-9);
  const double t_cert = t - 1e-9 * (1 + std::fabs(t));
  const Vec origin(D);
  const std::size_t n = tess.num_cells();
  std::vector<char> certified(n, 0);
  bool origin_covered = false;
  std::array<SpacePoint, kMaxModelDim> def;
  std::array<Vec, kMaxModelDim> corners;
  std::array<const SpacePoint*, kMaxModelDim> ptrs;
  for (std::size_t c = 0; c < n; ++c) {
    const auto cell = tess.cell(c);
    for (int i = 0; i <= D; ++i) {
      def[i] = tess.vertices[cell[i]];
      corners[i] = def[i].v;
      ptrs[i] = &tess.vertices[cell[i]];
    }
    const ParaboloidApex apex = circumparaboloid_fast(std::span(def.data(), D + 1));
    const bool low = apex.h_apex <= t_cert;
    const bool central = std::sqrt(apex.v_apex.norm2()) <= a_cert;
    if (low && central) {
      certified[c] = 1;
      if (!origin_covered && simplex_contains_origin(D, ptrs)) origin_covered = true;
      continue;
    }
    if (distance_to_simplex(std::span<const Vec>(corners.data(), D + 1), origin) < target) {
      if (!low) out.needs_height = true;
      if (!central) out.needs_space = true;
    }
  }

  // Facets of the certified union that are not shared by two certified cells.
  struct FacetRef {
    IndexTuple key;
    std::uint32_t cell;
  };
  std::vector<FacetRef> facets;
  for (std::size_t c = 0; c < n; ++c) {
    if (!certified[c]) continue;
    const auto cell = tess.cell(c);
    for (int drop = 0; drop <= D; ++drop) {
      FacetRef f{{}, static_cast<std::uint32_t>(c)};
      int m = 0;
      for (int i = 0; i <= D; ++i)
        if (i != drop) f.key[m++] = cell[i];
      facets.push_back(f);
    }
  }
  std::sort(facets.begin(), facets.end(),
            [](const FacetRef& a, const FacetRef& b) { return a.key < b.key; });
  double radius = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < facets.size();) {
    std::size_t j = i;
    while (j < facets.size() && facets[j].key == facets[i].key) ++j;
    if (j - i == 1) {
      for (int k = 0; k < D && k < kMaxSpatialDim; ++k) corners[k] = tess.vertices[facets[i].key[k]].v;
      radius = std::min(radius, distance_to_simplex(std::span<const Vec>(corners.data(), D), origin));
    }
    i = j;
  }
  out.radius = origin_covered ? radius : 0.0;
  if (out.radius < target && !out.needs_height && !out.needs_space)
    out.needs_height = out.needs_space = true;

  StabilizationCertificate cert;
  cert.radius = out.radius;
  cert.window_radius = A;
  cert.window_height = t;
  cert.sampled_points = points.size();
  tess.certificate = cert;
  return out;
}

double reference_height(const ModelParams& model) {
  const double c = intensity_constant(model);
  switch (model.kind()) {
    case ModelKind::kBeta: {
      // The point count grows like t^{beta+2}; large beta needs a tight start.
      const double b = model.beta();
      return (1 + 2 / (b + 2)) * std::pow((b + 1) / c, 1 / (b + 2));
    }
    case ModelKind::kGaussian: {
      // Solve 2 c e^{s/2} s = 1 for s > 0.
      double lo = 0, hi = 1;
      while (2 * c * std::exp(hi / 2) * hi < 1) hi *= 2;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (2 * c * std::exp(mid / 2) * mid < 1 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi) + 4;
    }
    case ModelKind::kBetaPrime: {
      const double b = model.beta();
      return -std::pow((b - 1) / c, 1 / (2 - b)) / 3;
    }
  }
  return 1;
}

double grown_height(const ModelParams& model, double t) {
  switch (model.kind()) {
    case ModelKind::kBeta:
      return (1 + 1 / (model.beta() + 2)) * t;
    case ModelKind::kGaussian:
      return t + 2;
    case ModelKind::kBetaPrime:
      return t / 2;
  }
  return t;
}

CertifiedRealization certified_realization(const ModelParams& model, double R, std::uint64_t seed,
                                           const GrowthOptions& options) {
  if (!(R > 0)) throw DomainError("certified realization requires R > 0");
  GrowingSample sample(model, R + options.initial_margin,
                       options.initial_height.value_or(reference_height(model)), seed);
  while (true) {
    Certification c = certify(model, sample.points(), sample.radius(), sample.height(), R);
    if (c.radius >= R) {
      CertifiedRealization out;
      out.tessellation = std::move(c.tessellation);
      out.tessellation.certificate->rounds = sample.rounds();
      out.tessellation.seed = seed;
      out.tessellation.window = paraboloid_window(sample.radius(), natural_floor(model), sample.height());
      out.points = sample.points();
      return out;
    }
    if (sample.rounds() >= options.max_rounds || sample.points().size() > options.max_points) {
      throw StabilizationError("could not certify B_" + std::to_string(R) + " after " +
                               std::to_string(sample.rounds()) + " enlargements (" +
                               std::to_string(sample.points().size()) + " points)");
    }
    sample.grow(sample.radius() + (c.needs_space ? kRadiusStep : 0.0),
                c.needs_height ? grown_height(model, sample.height()) : sample.height());
  }
}

}  // namespace bdt
