#include "bdt/predicates.hpp"

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <vector>

namespace bdt::predicates {

namespace {

constexpr int kMaxN = kMaxModelDim + 1;
constexpr double kUnit = 0x1.0p-53;
// Absolute slack per operation; covers gradual underflow.
constexpr double kTiny = 0x1.0p-1020;

// A double together with a bound on its distance to the exact real value.
struct Approx {
  double x = 0;
  double e = 0;
};

inline Approx exact_value(double x) { return {x, 0}; }

inline Approx diff(double a, double b) {
  const double x = a - b;
  return {x, kUnit * std::fabs(x) + kTiny};
}

inline Approx operator+(Approx a, Approx b) {
  const double x = a.x + b.x;
  return {x, a.e + b.e + kUnit * std::fabs(x) + kTiny};
}

inline Approx operator-(Approx a, Approx b) {
  const double x = a.x - b.x;
  return {x, a.e + b.e + kUnit * std::fabs(x) + kTiny};
}

inline Approx operator*(Approx a, Approx b) {
  const double x = a.x * b.x;
  return {x, std::fabs(a.x) * b.e + std::fabs(b.x) * a.e + a.e * b.e + kUnit * std::fabs(x) + kTiny};
}

// Certified sign of an n x n determinant, or 0 if the error bound is too
// large. Laplace expansion along rows, memoized over column subsets.
int filtered_det_sign(const std::array<std::array<Approx, kMaxN>, kMaxN>& a, int n) {
  std::array<Approx, 1 << kMaxN> minor;
  minor[0] = {1.0, 0.0};
  const unsigned full = (1u << n) - 1;
  for (unsigned mask = 1; mask <= full; ++mask) {
    const int k = __builtin_popcount(mask);
    const int row = n - k;
    Approx acc{0.0, 0.0};
    int pos = 0;
    for (int j = 0; j < n; ++j) {
      if (!(mask & (1u << j))) continue;
      const Approx term = a[row][j] * minor[mask & ~(1u << j)];
      acc = (pos % 2 == 0) ? acc + term : acc - term;
      ++pos;
    }
    minor[mask] = acc;
  }
  const Approx det = minor[full];
  // The bound itself was accumulated in floating point; inflate it.
  const double bound = det.e * (1.0 + 1e-10) + kTiny;
  if (det.x > bound) return 1;
  if (det.x < -bound) return -1;
  return 0;
}

using QMatrix = std::vector<std::vector<mpq_class>>;

mpq_class det_exact(QMatrix m) {
  const int n = static_cast<int>(m.size());
  mpq_class det = 1;
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r) {
      if (sgn(m[r][col]) != 0) {
        piv = r;
        break;
      }
    }
    if (piv < 0) return 0;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < n; ++r) {
      if (sgn(m[r][col]) == 0) continue;
      const mpq_class f = m[r][col] / m[col][col];
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

// Sign of the lowest nonzero coefficient of det(m + eps * b). The degree is
// at most n, so n + 1 exact evaluations determine the polynomial.
int perturbed_sign(const QMatrix& m, const QMatrix& b) {
  const int n = static_cast<int>(m.size());
  std::vector<mpq_class> xs(n + 1), ys(n + 1);
  for (int k = 0; k <= n; ++k) {
    xs[k] = k;
    QMatrix mk = m;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) mk[r][c] += xs[k] * b[r][c];
    ys[k] = det_exact(std::move(mk));
  }
  // Newton divided differences, then expand to monomial coefficients.
  std::vector<mpq_class> dd = ys;
  for (int j = 1; j <= n; ++j)
    for (int i = n; i >= j; --i) dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j]);
  std::vector<mpq_class> coef(n + 1, mpq_class(0));
  for (int i = n; i >= 0; --i) {
    // coef = coef * (x - xs[i]) + dd[i]
    std::vector<mpq_class> next(n + 1, mpq_class(0));
    for (int p = 0; p <= n; ++p) {
      if (sgn(coef[p]) == 0) continue;
      if (p + 1 <= n) next[p + 1] += coef[p];
      next[p] -= coef[p] * xs[i];
    }
    next[0] += dd[i];
    coef = std::move(next);
  }
  for (const auto& c : coef) {
    if (sgn(c) != 0) return sgn(c);
  }
  return 0;
}

mpq_class lifted_height(int D, const SpacePoint& p) {
  mpq_class z = p.h;
  for (int j = 0; j < D; ++j) {
    const mpq_class c = p.v[j];
    z += c * c;
  }
  return z;
}

QMatrix homogeneous_orient(int D, const SpacePoint* const* pts) {
  QMatrix m(D + 1, std::vector<mpq_class>(D + 1));
  for (int i = 0; i <= D; ++i) {
    for (int j = 0; j < D; ++j) m[i][j] = pts[i]->v[j];
    m[i][D] = 1;
  }
  return m;
}

QMatrix homogeneous_power(int D, const SpacePoint* const* pts) {
  QMatrix m(D + 2, std::vector<mpq_class>(D + 2));
  for (int i = 0; i < D + 2; ++i) {
    for (int j = 0; j < D; ++j) m[i][j] = pts[i]->v[j];
    m[i][D] = lifted_height(D, *pts[i]);
    m[i][D + 1] = 1;
  }
  return m;
}

// Perturbation directions: column j < cols gets (id + 1)^(j + 1); the
// trailing homogeneous column is left alone.
QMatrix perturbation(int rows, int cols, const std::uint32_t* ids) {
  QMatrix b(rows, std::vector<mpq_class>(cols + 1, mpq_class(0)));
  for (int i = 0; i < rows; ++i) {
    const mpz_class x = static_cast<unsigned long>(ids[i]) + 1ul;
    mpz_class pw = x;
    for (int j = 0; j < cols; ++j) {
      b[i][j] = pw;
      pw *= x;
    }
  }
  return b;
}

int orient_filtered(int D, const SpacePoint* const* pts) {
  std::array<std::array<Approx, kMaxN>, kMaxN> a{};
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) a[i][j] = diff(pts[i + 1]->v[j], pts[0]->v[j]);
  const int s = filtered_det_sign(a, D);
  return (D % 2 == 0) ? s : -s;
}

int power_filtered(int D, const SpacePoint* const* pts) {
  const int d = D + 1;
  const SpacePoint& q = *pts[d];
  std::array<std::array<Approx, kMaxN>, kMaxN> a{};
  for (int i = 0; i < d; ++i) {
    Approx dz = diff(pts[i]->h, q.h);
    for (int j = 0; j < D; ++j) {
      const Approx dv = diff(pts[i]->v[j], q.v[j]);
      a[i][j] = dv;
      dz = dz + dv * dv;
    }
    a[i][D] = dz;
  }
  return filtered_det_sign(a, d);
}

}  // namespace

FilterStats& thread_filter_stats() {
  thread_local FilterStats stats;
  return stats;
}

int orient(int D, const SpacePoint* const* pts) {
  auto& st = thread_filter_stats();
  ++st.calls;
  if (const int s = orient_filtered(D, pts); s != 0) return s;
  ++st.exact_fallbacks;
  return sgn(det_exact(homogeneous_orient(D, pts)));
}

int orient_perturbed(int D, const SpacePoint* const* pts, const std::uint32_t* ids) {
  auto& st = thread_filter_stats();
  ++st.calls;
  if (const int s = orient_filtered(D, pts); s != 0) return s;
  ++st.exact_fallbacks;
  QMatrix m = homogeneous_orient(D, pts);
  if (const int s = sgn(det_exact(m)); s != 0) return s;
  ++st.perturbation_fallbacks;
  return perturbed_sign(m, perturbation(D + 1, D, ids));
}

int power(int D, const SpacePoint* const* pts) {
  auto& st = thread_filter_stats();
  ++st.calls;
  if (const int s = power_filtered(D, pts); s != 0) return s;
  ++st.exact_fallbacks;
  return sgn(det_exact(homogeneous_power(D, pts)));
}

int power_perturbed(int D, const SpacePoint* const* pts, const std::uint32_t* ids) {
  auto& st = thread_filter_stats();
  ++st.calls;
  if (const int s = power_filtered(D, pts); s != 0) return s;
  ++st.exact_fallbacks;
  QMatrix m = homogeneous_power(D, pts);
  if (const int s = sgn(det_exact(m)); s != 0) return s;
  ++st.perturbation_fallbacks;
  return perturbed_sign(m, perturbation(D + 2, D + 1, ids));
}

}  // namespace bdt::predicates
