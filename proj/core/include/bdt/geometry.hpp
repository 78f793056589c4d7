#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bdt/model.hpp"
#include "bdt/tessellation.hpp"

namespace bdt {

// (v, z) with z = h + |v|^2.
struct LiftedPoint {
  Vec v;
  double z = 0;
};

LiftedPoint lift(const SpacePoint& p);

// Apex (v', h') of the downward paraboloid h = h' - |v - v'|^2 through d points.
struct ParaboloidApex {
  Vec v_apex;
  double h_apex = 0;
};

enum class PredicateSign { kInside, kOnBoundary, kOutside };

// Exact rational solve of z_i = c + 2<v_i, v'>, rounded to double.
// Throws DegeneracyError when the spatial coordinates are affinely dependent.
ParaboloidApex circumparaboloid(std::span<const SpacePoint> pts);

// Floating-point variant for bulk use; no exactness guarantee.
ParaboloidApex circumparaboloid_fast(std::span<const SpacePoint> pts);

// Position of `query` relative to the open region below the circumparaboloid
// of `defining`. Exact for any double inputs.
PredicateSign paraboloid_side(std::span<const SpacePoint> defining, const SpacePoint& query);

// pow(w, (v, h)) = |v - w|^2 + h.
inline double power_distance(const Vec& w, const SpacePoint& p) { return dist2(p.v, w) + p.h; }

// Regular (weighted Delaunay) triangulation by incremental construction of
// the lower hull of the lifted points. Degeneracies are resolved by the
// symbolic perturbation of the predicates, keyed by sample index.
Tessellation regular_triangulation(const PointSample& sample);
Tessellation regular_triangulation(int spatial_dim, std::span<const SpacePoint> points);

inline constexpr std::size_t kDefaultOracleCap = 60;

// Enumerates all d-subsets and keeps those whose open circumparaboloid is
// empty. O(n^{d+1}); refuses inputs above `cap` points.
Tessellation brute_force_tessellation(const PointSample& sample,
                                      std::size_t cap = kDefaultOracleCap);
Tessellation brute_force_tessellation(int spatial_dim, std::span<const SpacePoint> points,
                                      std::size_t cap = kDefaultOracleCap);

// Lower boundary of the paraboloid growth process at w: min_i pow(w, x_i).
double growth_envelope(std::span<const SpacePoint> points, const Vec& w);
double growth_envelope(const PointSample& sample, const Vec& w);

struct EnvelopeExtremes {
  double sup_est = 0;
  double inf_est = 0;
  std::size_t evaluations = 0;
  double grid_step = 0;
};

// Sup and inf of the growth envelope over the closed ball B_A. The sup is
// taken over a grid of step `grid_step`, points of the sphere at the same
// resolution and the apexes of cells of the regular triangulation inside
// B_A (the local maxima of the envelope); it never exceeds the true sup. The
// inf is evaluated at the nearest point of B_A to every sample point, which
// makes it exact.
EnvelopeExtremes envelope_extremes(const PointSample& sample, double A, double grid_step);
EnvelopeExtremes envelope_extremes(int spatial_dim, std::span<const SpacePoint> points,
                                   const Tessellation& triangulation, double A, double grid_step);

// Euclidean distance from `p` to the simplex spanned by `vertices`.
double distance_to_simplex(std::span<const Vec> vertices, const Vec& p);

}  // namespace bdt
