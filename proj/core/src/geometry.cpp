#include "bdt/geometry.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bdt/error.hpp"
#include "bdt/predicates.hpp"
#include "geometry_internal.hpp"

namespace bdt {

namespace detail {

void require_full_dimension(int D, std::span<const SpacePoint> points) {
  if (points.size() < static_cast<std::size_t>(D + 1))
    throw DegeneracyError("need at least " + std::to_string(D + 1) + " points to span R^" +
                          std::to_string(D));
  // Incremental row echelon basis of v_i - v_0 over the rationals.
  std::vector<std::vector<mpq_class>> basis;
  std::vector<int> pivots;
  for (std::size_t i = 1; i < points.size() && static_cast<int>(basis.size()) < D; ++i) {
    std::vector<mpq_class> r(D);
    for (int j = 0; j < D; ++j) r[j] = mpq_class(points[i].v[j]) - mpq_class(points[0].v[j]);
    for (std::size_t b = 0; b < basis.size(); ++b) {
      const int p = pivots[b];
      if (sgn(r[p]) == 0) continue;
      const mpq_class f = r[p] / basis[b][p];
      for (int j = 0; j < D; ++j) r[j] -= f * basis[b][j];
    }
    int p = -1;
    for (int j = 0; j < D; ++j)
      if (sgn(r[j]) != 0) {
        p = j;
        break;
      }
    if (p < 0) continue;
    basis.push_back(std::move(r));
    pivots.push_back(p);
  }
  if (static_cast<int>(basis.size()) < D)
    throw DegeneracyError("spatial coordinates are affinely dependent");
}

}  // namespace detail

namespace {

void check_defining(std::span<const SpacePoint> pts) {
  if (pts.empty()) throw EmptyInputError("no defining points");
  const int D = pts[0].v.size();
  if (pts.size() != static_cast<std::size_t>(D + 1))
    throw DegeneracyError("need exactly d = " + std::to_string(D + 1) + " defining points");
}

}  // namespace

LiftedPoint lift(const SpacePoint& p) { return {p.v, p.h + p.v.norm2()}; }

ParaboloidApex circumparaboloid(std::span<const SpacePoint> pts) {
  check_defining(pts);
  const int D = pts[0].v.size();
  const int n = D + 1;
  // Unknowns (v'_0 .. v'_{D-1}, c): 2 <v_i, v'> + c = z_i.
  std::vector<std::vector<mpq_class>> m(n, std::vector<mpq_class>(n + 1));
  for (int i = 0; i < n; ++i) {
    mpq_class z = pts[i].h;
    for (int j = 0; j < D; ++j) {
      const mpq_class x = pts[i].v[j];
      m[i][j] = 2 * x;
      z += x * x;
    }
    m[i][D] = 1;
    m[i][n] = z;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    while (piv < n && sgn(m[piv][col]) == 0) ++piv;
    if (piv == n) throw DegeneracyError("defining points are spatially affinely dependent");
    std::swap(m[piv], m[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col || sgn(m[r][col]) == 0) continue;
      const mpq_class f = m[r][col] / m[col][col];
      for (int c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  ParaboloidApex apex{Vec(D), 0};
  mpq_class h = m[D][n] / m[D][D];
  for (int j = 0; j < D; ++j) {
    const mpq_class x = m[j][n] / m[j][j];
    apex.v_apex[j] = x.get_d();
    h += x * x;
  }
  apex.h_apex = h.get_d();
  return apex;
}

ParaboloidApex circumparaboloid_fast(std::span<const SpacePoint> pts) {
  check_defining(pts);
  const int D = pts[0].v.size();
  // Relative to x_0: 2 <a_i, w> = h_i - h_0 + |a_i|^2, a_i = v_i - v_0.
  std::array<std::array<double, kMaxSpatialDim + 1>, kMaxSpatialDim> m{};
  for (int i = 0; i < D; ++i) {
    double rhs = pts[i + 1].h - pts[0].h;
    for (int j = 0; j < D; ++j) {
      const double a = pts[i + 1].v[j] - pts[0].v[j];
      m[i][j] = 2 * a;
      rhs += a * a;
    }
    m[i][D] = rhs;
  }
  for (int col = 0; col < D; ++col) {
    int piv = col;
    for (int r = col + 1; r < D; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (m[piv][col] == 0) throw DegeneracyError("defining points are spatially affinely dependent");
    std::swap(m[piv], m[col]);
    for (int r = col + 1; r < D; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c <= D; ++c) m[r][c] -= f * m[col][c];
    }
  }
  Vec w(D);
  for (int i = D - 1; i >= 0; --i) {
    double s = m[i][D];
    for (int j = i + 1; j < D; ++j) s -= m[i][j] * w[j];
    w[i] = s / m[i][i];
  }
  ParaboloidApex apex{Vec(D), pts[0].h + w.norm2()};
  for (int j = 0; j < D; ++j) apex.v_apex[j] = pts[0].v[j] + w[j];
  return apex;
}

PredicateSign paraboloid_side(std::span<const SpacePoint> defining, const SpacePoint& query) {
  check_defining(defining);
  const int D = defining[0].v.size();
  std::array<const SpacePoint*, kMaxModelDim + 1> p{};
  for (int i = 0; i <= D; ++i) p[i] = &defining[i];
  const int o = predicates::orient(D, p.data());
  if (o == 0) throw DegeneracyError("defining points are spatially affinely dependent");
  p[D + 1] = &query;
  const int s = predicates::power(D, p.data());
  if (s == 0) return PredicateSign::kOnBoundary;
  return s * o > 0 ? PredicateSign::kInside : PredicateSign::kOutside;
}

Tessellation brute_force_tessellation(int D, std::span<const SpacePoint> points,
                                      std::size_t cap) {
  const std::size_t n = points.size();
  if (n > cap)
    throw OracleCapError("brute-force oracle refuses " + std::to_string(n) +
                         " points (cap " + std::to_string(cap) + ")");
  detail::require_full_dimension(D, points);
  const int d = D + 1;
  std::vector<IndexTuple> cells;
  std::array<std::uint32_t, kMaxModelDim + 1> idx{};
  for (int i = 0; i < d; ++i) idx[i] = static_cast<std::uint32_t>(i);
  std::array<const SpacePoint*, kMaxModelDim + 1> p{};
  while (true) {
    for (int i = 0; i < d; ++i) p[i] = &points[idx[i]];
    const int o = predicates::orient_perturbed(D, p.data(), idx.data());
    bool empty = true;
    for (std::size_t q = 0; q < n && empty; ++q) {
      if (std::find(idx.begin(), idx.begin() + d, q) != idx.begin() + d) continue;
      p[d] = &points[q];
      idx[d] = static_cast<std::uint32_t>(q);
      if (predicates::power_perturbed(D, p.data(), idx.data()) * o > 0) empty = false;
    }
    if (empty) {
      IndexTuple t{};
      std::copy(idx.begin(), idx.begin() + d, t.begin());
      cells.push_back(t);
    }
    // Next d-combination in lexicographic order.
    int i = d - 1;
    while (i >= 0 && idx[i] == n - d + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
  return make_tessellation(D, points, std::move(cells));
}

Tessellation brute_force_tessellation(const PointSample& sample, std::size_t cap) {
  Tessellation t = brute_force_tessellation(sample.model.spatial_dim(), sample.points, cap);
  t.model = sample.model;
  t.window = sample.window;
  t.seed = sample.seed;
  return t;
}

double growth_envelope(std::span<const SpacePoint> points, const Vec& w) {
  if (points.empty()) throw EmptyInputError("growth envelope of an empty sample");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) best = std::min(best, power_distance(w, p));
  return best;
}

double growth_envelope(const PointSample& sample, const Vec& w) {
  return growth_envelope(sample.points, w);
}

EnvelopeExtremes envelope_extremes(int D, std::span<const SpacePoint> points,
                                   const Tessellation& triangulation, double A,
                                   double grid_step) {
  if (!(A > 0)) throw DomainError("envelope_extremes needs A > 0");
  if (!(grid_step > 0)) throw DomainError("envelope_extremes needs grid_step > 0");
  if (points.empty()) throw EmptyInputError("envelope of an empty sample");

  EnvelopeExtremes out;
  out.grid_step = grid_step;
  out.sup_est = -std::numeric_limits<double>::infinity();
  auto eval_sup = [&](const Vec& w) {
    out.sup_est = std::max(out.sup_est, growth_envelope(points, w));
    ++out.evaluations;
  };

  // Grid points of step `grid_step` in B_A, plus the radial projection onto
  // the sphere of grid points in the shell of width one step around it.
  const int m = static_cast<int>(std::floor(A / grid_step)) + 1;
  std::array<int, kMaxSpatialDim> k{};
  k.fill(-m);
  const double A2 = A * A;
  while (true) {
    Vec w(D);
    for (int j = 0; j < D; ++j) w[j] = k[j] * grid_step;
    const double r2 = w.norm2();
    if (r2 <= A2) eval_sup(w);
    const double r = std::sqrt(r2);
    if (r > A - grid_step && r <= A + grid_step && r > 0) {
      Vec s(D);
      for (int j = 0; j < D; ++j) s[j] = w[j] * (A / r);
      eval_sup(s);
    }
    int j = 0;
    while (j < D && k[j] == m) k[j++] = -m;
    if (j == D) break;
    ++k[j];
  }

  // Apexes of cells are the local maxima of the envelope.
  std::array<SpacePoint, kMaxModelDim> defining;
  for (std::size_t c = 0; c < triangulation.num_cells(); ++c) {
    const auto cell = triangulation.cell(c);
    for (int i = 0; i <= D; ++i) defining[i] = triangulation.vertices[cell[i]];
    ParaboloidApex apex;
    try {
      apex = circumparaboloid_fast(std::span(defining.data(), D + 1));
    } catch (const DegeneracyError&) {
      continue;
    }
    if (apex.v_apex.norm2() <= A2) eval_sup(apex.v_apex);
  }

  // The envelope restricted to B_A is the minimum of the grains
  // h_i + |w - v_i|^2, each minimized over B_A at the point of B_A nearest v_i.
  out.inf_est = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double excess = std::max(0.0, std::sqrt(p.v.norm2()) - A);
    out.inf_est = std::min(out.inf_est, p.h + excess * excess);
    ++out.evaluations;
  }
  return out;
}

EnvelopeExtremes envelope_extremes(const PointSample& sample, double A, double grid_step) {
  const int D = sample.model.spatial_dim();
  Tessellation t;
  t.spatial_dim = D;
  try {
    t = regular_triangulation(D, sample.points);
  } catch (const DegeneracyError&) {
    // Too few points for a cell: the envelope has no interior maxima.
  }
  return envelope_extremes(D, sample.points, t, A, grid_step);
}

namespace {

double distance_to_simplex_impl(std::span<const Vec> vs, const Vec& p) {
  const int k = static_cast<int>(vs.size()) - 1;
  if (k == 0) return std::sqrt(dist2(vs[0], p));
  // Project onto the affine hull: Gram system over edges e_i = v_i - v_0.
  const int D = p.size();
  std::array<std::array<double, kMaxModelDim + 1>, kMaxModelDim> g{};
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double s = 0;
      for (int c = 0; c < D; ++c) s += (vs[i + 1][c] - vs[0][c]) * (vs[j + 1][c] - vs[0][c]);
      g[i][j] = s;
    }
    double b = 0;
    for (int c = 0; c < D; ++c) b += (vs[i + 1][c] - vs[0][c]) * (p[c] - vs[0][c]);
    g[i][k] = b;
  }
  bool singular = false;
  for (int col = 0; col < k && !singular; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r)
      if (std::fabs(g[r][col]) > std::fabs(g[piv][col])) piv = r;
    if (std::fabs(g[piv][col]) <= 1e-300) {
      singular = true;
      break;
    }
    std::swap(g[piv], g[col]);
    for (int r = col + 1; r < k; ++r) {
      const double f = g[r][col] / g[col][col];
      for (int c = col; c <= k; ++c) g[r][c] -= f * g[col][c];
    }
  }
  if (!singular) {
    std::array<double, kMaxModelDim> lam{};
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i][k];
      for (int j = i + 1; j < k; ++j) s -= g[i][j] * lam[j];
      lam[i] = s / g[i][i];
    }
    double lam0 = 1;
    bool inside = true;
    for (int i = 0; i < k; ++i) {
      lam0 -= lam[i];
      if (lam[i] < 0) inside = false;
    }
    if (lam0 < 0) inside = false;
    if (inside) {
      Vec q(D);
      for (int c = 0; c < D; ++c) {
        double x = vs[0][c];
        for (int i = 0; i < k; ++i) x += lam[i] * (vs[i + 1][c] - vs[0][c]);
        q[c] = x;
      }
      return std::sqrt(dist2(q, p));
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::array<Vec, kMaxModelDim> sub;
  for (int drop = 0; drop <= k; ++drop) {
    int m = 0;
    for (int i = 0; i <= k; ++i)
      if (i != drop) sub[m++] = vs[i];
    best = std::min(best, distance_to_simplex_impl(std::span<const Vec>(sub.data(), m), p));
  }
  return best;
}

}  // namespace

double distance_to_simplex(std::span<const Vec> vertices, const Vec& p) {
  if (vertices.empty()) throw EmptyInputError("simplex without vertices");
  return distance_to_simplex_impl(vertices, p);
}

}  // namespace bdt
