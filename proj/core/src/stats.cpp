#include "bdt/stats.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "bdt/error.hpp"
#include "bdt/geometry.hpp"

namespace bdt {

namespace {

constexpr double kSnap = 1e-12;

void check_k(const Tessellation& t, int k) {
  if (k < 0 || k > t.spatial_dim)
    throw DomainError("face dimension k=" + std::to_string(k) + " outside [0, " +
                      std::to_string(t.spatial_dim) + "]");
}

void check_window(const Tessellation& t, const WindowBox& w, WindowCheck check) {
  if (w.dim() != t.spatial_dim) throw DomainError("window dimension does not match tessellation");
  if (check == WindowCheck::kNone) return;
  const auto R = t.stabilized_radius();
  if (!R) throw StabilizationError("certified statistic on a tessellation without certificate");
  if (!(w.outer_radius() < *R)) {
    throw StabilizationError("window reaches radius " + std::to_string(w.outer_radius()) +
                             ", stabilized only up to " + std::to_string(*R));
  }
}

// Solves a x = b in place; false when the system is numerically singular.
bool solve_inplace(std::array<std::array<double, kMaxSpatialDim>, kMaxSpatialDim>& a,
                   std::array<double, kMaxSpatialDim>& b, int n, double scale) {
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    if (std::fabs(a[piv][c]) <= 1e-12 * scale) return false;
    std::swap(a[piv], a[c]);
    std::swap(b[piv], b[c]);
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (int j = c; j < n; ++j) a[r][j] -= f * a[c][j];
      b[r] -= f * b[c];
    }
  }
  for (int c = 0; c < n; ++c) b[c] /= a[c][c];
  return true;
}

double factorial(int k) {
  double f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// k-volume of a simplex in R^D: product of the Gram-Schmidt residual lengths
// of its edge vectors, which avoids squaring the condition number as the
// Gram determinant would.
double simplex_volume(std::span<const Vec> c) {
  const int k = static_cast<int>(c.size()) - 1;
  const int D = c[0].size();
  std::array<Vec, kMaxSpatialDim> q;
  double vol = 1;
  for (int i = 0; i < k; ++i) {
    q[i] = Vec(D);
    for (int j = 0; j < D; ++j) q[i][j] = c[i + 1][j] - c[0][j];
    for (int pass = 0; pass < 2; ++pass) {
      for (int m = 0; m < i; ++m) {
        const double p = dot(q[i], q[m]);
        for (int j = 0; j < D; ++j) q[i][j] -= p * q[m][j];
      }
    }
    const double len = std::sqrt(q[i].norm2());
    if (len == 0) return 0;
    vol *= len;
    for (int j = 0; j < D; ++j) q[i][j] /= len;
  }
  return vol / factorial(k);
}

}  // namespace

WindowBox WindowBox::cube(int dim, double n) {
  if (!(n > 0)) throw DomainError("window half-width must be positive");
  WindowBox w{Vec(dim), Vec(dim)};
  for (int j = 0; j < dim; ++j) {
    w.lo[j] = -n;
    w.hi[j] = n;
  }
  return w;
}

bool WindowBox::contains(const Vec& x) const {
  for (int j = 0; j < dim(); ++j)
    if (x[j] < lo[j] || x[j] > hi[j]) return false;
  return true;
}

double WindowBox::volume() const {
  double v = 1;
  for (int j = 0; j < dim(); ++j) v *= hi[j] - lo[j];
  return v;
}

double WindowBox::outer_radius() const {
  double s = 0;
  for (int j = 0; j < dim(); ++j) {
    const double m = std::max(std::fabs(lo[j]), std::fabs(hi[j]));
    s += m * m;
  }
  return std::sqrt(s);
}

std::vector<FaceKey> enumerate_k_faces(const Tessellation& t, int k) {
  check_k(t, k);
  const int n = t.cell_size();
  std::vector<FaceKey> out;
  // Subsets of the cell as bitmasks with k + 1 bits set; cell tuples are
  // ascending, so the chosen indices come out ascending too.
  std::vector<unsigned> masks;
  for (unsigned m = 0; m < (1u << n); ++m)
    if (std::popcount(m) == k + 1) masks.push_back(m);
  out.reserve(t.num_cells() * masks.size());
  for (std::size_t c = 0; c < t.num_cells(); ++c) {
    const auto cell = t.cell(c);
    for (unsigned m : masks) {
      FaceKey f;
      f.k = k;
      int p = 0;
      for (int i = 0; i < n; ++i)
        if (m >> i & 1u) f.v[p++] = cell[i];
      out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Vec face_center(const FaceKey& f, const Tessellation& t) {
  std::uint32_t best = f.v[0];
  for (int i = 1; i <= f.k; ++i) {
    const Vec& cand = t.vertices[f.v[i]].v;
    const Vec& cur = t.vertices[best].v;
    if (cand == cur) throw DegeneracyError("distinct vertices share spatial coordinates");
    if (cand < cur) best = f.v[i];
  }
  return t.vertices[best].v;
}

std::size_t count_faces_in_window(const Tessellation& t, int k, const WindowBox& w,
                                  WindowCheck check) {
  check_k(t, k);
  check_window(t, w, check);
  std::size_t n = 0;
  for (const auto& f : enumerate_k_faces(t, k))
    if (w.contains(face_center(f, t))) ++n;
  return n;
}

double clipped_simplex_volume(std::span<const Vec> input, const WindowBox& w) {
  const int k = static_cast<int>(input.size()) - 1;
  const int D = w.dim();
  std::array<Vec, kMaxModelDim> c;
  for (int i = 0; i <= k; ++i) {
    c[i] = input[i];
    for (int j = 0; j < D; ++j) {
      if (std::fabs(c[i][j] - w.lo[j]) <= kSnap) c[i][j] = w.lo[j];
      if (std::fabs(c[i][j] - w.hi[j]) <= kSnap) c[i][j] = w.hi[j];
    }
  }
  const std::span<const Vec> corners(c.data(), k + 1);
  if (k == 0) return w.contains(c[0]) ? 1.0 : 0.0;

  bool all_in = true;
  for (int i = 0; i <= k; ++i) all_in = all_in && w.contains(c[i]);
  if (all_in) return simplex_volume(corners);
  for (int j = 0; j < D; ++j) {
    bool below = true, above = true;
    for (int i = 0; i <= k; ++i) {
      below = below && c[i][j] <= w.lo[j];
      above = above && c[i][j] >= w.hi[j];
    }
    // A face lying in a box face still counts when it touches the box; the
    // clipping below handles that case, a strictly outside face is empty.
    bool strict_below = true, strict_above = true;
    for (int i = 0; i <= k; ++i) {
      strict_below = strict_below && c[i][j] < w.lo[j];
      strict_above = strict_above && c[i][j] > w.hi[j];
    }
    if (strict_below || strict_above) return 0;
    if ((below || above) && k == D) return 0;  // full-dimensional cell outside a face
  }

  // Orthonormal frame of the affine hull: rows q_i, coordinates y = Q (x - c0).
  std::array<Vec, kMaxSpatialDim> e, q;
  double scale = 0;
  for (int i = 0; i < k; ++i) {
    e[i] = Vec(D);
    for (int j = 0; j < D; ++j) e[i][j] = c[i + 1][j] - c[0][j];
    scale = std::max(scale, std::sqrt(e[i].norm2()));
  }
  if (scale == 0) return 0;
  for (int i = 0; i < k; ++i) {
    q[i] = e[i];
    for (int m = 0; m < i; ++m) {
      const double p = dot(q[i], q[m]);
      for (int j = 0; j < D; ++j) q[i][j] -= p * q[m][j];
    }
    const double len = std::sqrt(q[i].norm2());
    if (len <= 1e-12 * scale) return 0;  // flat face
    for (int j = 0; j < D; ++j) q[i][j] /= len;
  }

  // Constraints a . lambda <= b on barycentric-style coordinates lambda,
  // x = c0 + sum_i lambda_i e_i.
  struct Halfspace {
    std::array<double, kMaxSpatialDim> a{};
    double b = 0;
  };
  std::vector<Halfspace> hs;
  for (int i = 0; i < k; ++i) {
    Halfspace h;
    h.a[i] = -1;
    hs.push_back(h);
  }
  {
    Halfspace h;
    for (int i = 0; i < k; ++i) h.a[i] = 1;
    h.b = 1;
    hs.push_back(h);
  }
  const double box_scale = std::max(1.0, w.outer_radius());
  for (int j = 0; j < D; ++j) {
    Halfspace up, down;
    for (int i = 0; i < k; ++i) {
      up.a[i] = e[i][j];
      down.a[i] = -e[i][j];
    }
    up.b = w.hi[j] - c[0][j];
    down.b = c[0][j] - w.lo[j];
    hs.push_back(up);
    hs.push_back(down);
  }

  const int m = static_cast<int>(hs.size());
  std::vector<std::array<double, kMaxSpatialDim>> verts;
  std::array<int, kMaxSpatialDim> pick{};
  for (int i = 0; i < k; ++i) pick[i] = i;
  const double tol = 1e-11 * box_scale;
  while (true) {
    std::array<std::array<double, kMaxSpatialDim>, kMaxSpatialDim> a{};
    std::array<double, kMaxSpatialDim> b{};
    double row_scale = 0;
    for (int r = 0; r < k; ++r) {
      a[r] = hs[pick[r]].a;
      b[r] = hs[pick[r]].b;
      for (int i = 0; i < k; ++i) row_scale = std::max(row_scale, std::fabs(a[r][i]));
    }
    if (solve_inplace(a, b, k, row_scale)) {
      bool feasible = true;
      for (const auto& h : hs) {
        double s = 0;
        double mag = std::fabs(h.b);
        for (int i = 0; i < k; ++i) {
          s += h.a[i] * b[i];
          mag += std::fabs(h.a[i] * b[i]);
        }
        if (s > h.b + tol + 1e-12 * mag) {
          feasible = false;
          break;
        }
      }
      if (feasible) verts.push_back(b);
    }
    // Next k-subset of {0, ..., m - 1}.
    int i = k - 1;
    while (i >= 0 && pick[i] == m - k + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (static_cast<int>(verts.size()) < k + 1) return 0;

  // Map to frame coordinates and drop duplicates.
  std::vector<SpacePoint> pts;
  for (const auto& lam : verts) {
    Vec x(D);
    for (int j = 0; j < D; ++j) {
      x[j] = c[0][j];
      for (int i = 0; i < k; ++i) x[j] += lam[i] * e[i][j];
    }
    SpacePoint p{Vec(k), 0};
    for (int i = 0; i < k; ++i) {
      double s = 0;
      for (int j = 0; j < D; ++j) s += q[i][j] * (x[j] - c[0][j]);
      p.v[i] = s;
    }
    bool dup = false;
    for (const auto& o : pts)
      if (dist2(o.v, p.v) <= 1e-24 * scale * scale) {
        dup = true;
        break;
      }
    if (!dup) pts.push_back(p);
  }
  if (static_cast<int>(pts.size()) < k + 1) return 0;

  if (k == 1) {
    double lo = pts[0].v[0], hi = lo;
    for (const auto& p : pts) {
      lo = std::min(lo, p.v[0]);
      hi = std::max(hi, p.v[0]);
    }
    return hi - lo;
  }

  Tessellation hull;
  try {
    hull = regular_triangulation(k, pts);
  } catch (const DegeneracyError&) {
    return 0;  // clipped region has no k-dimensional interior
  }
  double vol = 0;
  std::array<Vec, kMaxModelDim> s;
  for (std::size_t cell = 0; cell < hull.num_cells(); ++cell) {
    const auto idx = hull.cell(cell);
    for (int i = 0; i <= k; ++i) s[i] = hull.vertices[idx[i]].v;
    vol += simplex_volume(std::span<const Vec>(s.data(), k + 1));
  }
  return vol;
}

double skeleton_volume_in_window(const Tessellation& t, int k, const WindowBox& w,
                                 WindowCheck check) {
  check_k(t, k);
  check_window(t, w, check);
  if (k == 0) {
    double n = 0;
    for (const auto& p : t.vertices)
      if (w.contains(p.v)) ++n;
    return n;
  }
  double vol = 0;
  std::array<Vec, kMaxModelDim> corners;
  for (const auto& f : enumerate_k_faces(t, k)) {
    for (int i = 0; i <= k && i < kMaxModelDim; ++i) corners[i] = t.vertices[f.v[i]].v;
    vol += clipped_simplex_volume(std::span<const Vec>(corners.data(), k + 1), w);
  }
  return vol;
}

Tessellation restrict_to_ball(const Tessellation& t, double R) {
  if (!(R > 0)) throw DomainError("restrict_to_ball requires R > 0");
  const int D = t.spatial_dim;
  const Vec origin(D);
  Tessellation out = t;
  out.vertices.clear();
  out.source_index.clear();
  out.cells.clear();
  std::vector<std::int64_t> remap(t.vertices.size(), -1);
  std::vector<IndexTuple> kept;
  std::array<Vec, kMaxModelDim> corners;
  for (std::size_t c = 0; c < t.num_cells(); ++c) {
    const auto cell = t.cell(c);
    for (int i = 0; i <= D; ++i) corners[i] = t.vertices[cell[i]].v;
    if (distance_to_simplex(std::span<const Vec>(corners.data(), D + 1), origin) < R)
      kept.push_back(t.cells[c]);
  }
  // Compact the vertex table, preserving the original vertex order.
  for (const auto& cell : kept)
    for (int i = 0; i <= D; ++i) remap[cell[i]] = 0;
  for (std::size_t i = 0; i < t.vertices.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<std::int64_t>(out.vertices.size());
    out.vertices.push_back(t.vertices[i]);
    if (i < t.source_index.size()) out.source_index.push_back(t.source_index[i]);
  }
  for (auto cell : kept) {
    for (int i = 0; i <= D; ++i) cell[i] = static_cast<std::uint32_t>(remap[cell[i]]);
    out.cells.push_back(cell);
  }
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

std::set<CellSignature> cell_signatures(const Tessellation& t) {
  std::set<CellSignature> out;
  const int D = t.spatial_dim;
  for (std::size_t c = 0; c < t.num_cells(); ++c) {
    const auto cell = t.cell(c);
    std::vector<std::vector<double>> verts;
    for (int i = 0; i <= D; ++i) {
      const SpacePoint& p = t.vertices[cell[i]];
      std::vector<double> x(p.v.data(), p.v.data() + D);
      x.push_back(p.h);
      verts.push_back(std::move(x));
    }
    std::sort(verts.begin(), verts.end());
    CellSignature sig;
    for (const auto& v : verts) sig.insert(sig.end(), v.begin(), v.end());
    out.insert(std::move(sig));
  }
  return out;
}

bool same_combinatorics(const Tessellation& a, const Tessellation& b) {
  return a.spatial_dim == b.spatial_dim && cell_signatures(a) == cell_signatures(b);
}

}  // namespace bdt
