#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace bdt {

// Tessellations live in R^{d-1}; predicates are implemented for d <= 6.
inline constexpr int kMaxModelDim = 6;
inline constexpr int kMaxSpatialDim = kMaxModelDim - 1;

// Fixed-capacity coordinate vector for points of R^{d-1}.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : n_(n) { assert(n >= 0 && n <= kMaxSpatialDim); }
  Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    assert(n_ <= kMaxSpatialDim);
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }

  int size() const noexcept { return n_; }
  double& operator[](int i) noexcept { return c_[i]; }
  double operator[](int i) const noexcept { return c_[i]; }
  const double* data() const noexcept { return c_.data(); }
  std::span<const double> span() const noexcept { return {c_.data(), static_cast<size_t>(n_)}; }

  double norm2() const noexcept {
    double s = 0;
    for (int i = 0; i < n_; ++i) s += c_[i] * c_[i];
    return s;
  }

  friend bool operator==(const Vec& a, const Vec& b) noexcept {
    if (a.n_ != b.n_) return false;
    for (int i = 0; i < a.n_; ++i)
      if (a.c_[i] != b.c_[i]) return false;
    return true;
  }
  // Lexicographic order on coordinates.
  friend bool operator<(const Vec& a, const Vec& b) noexcept {
    for (int i = 0; i < a.n_ && i < b.n_; ++i) {
      if (a.c_[i] < b.c_[i]) return true;
      if (b.c_[i] < a.c_[i]) return false;
    }
    return a.n_ < b.n_;
  }

 private:
  std::array<double, kMaxSpatialDim> c_{};
  int n_ = 0;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double dist2(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// A point (v, h) of R^{d-1} x R.
struct SpacePoint {
  Vec v;
  double h = 0;

  friend bool operator==(const SpacePoint&, const SpacePoint&) = default;
};

enum class ModelKind { kBeta, kBetaPrime, kGaussian };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// One of the three Poisson laws together with the ambient dimension d.
// Construction validates the admissible parameter range.
class ModelParams {
 public:
  static ModelParams beta(int d, double beta);
  static ModelParams beta_prime(int d, double beta);
  static ModelParams gaussian(int d);

  ModelKind kind() const noexcept { return kind_; }
  // Meaningless for the Gaussian model.
  double beta() const noexcept { return beta_; }
  int d() const noexcept { return d_; }
  int spatial_dim() const noexcept { return d_ - 1; }

  std::string describe() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  ModelParams(ModelKind kind, int d, double beta) : kind_(kind), d_(d), beta_(beta) {}
  ModelKind kind_;
  int d_;
  double beta_;
};

struct BallRegion {
  double radius = 1;
  friend bool operator==(const BallRegion&, const BallRegion&) = default;
};

struct BoxRegion {
  Vec lo;
  Vec hi;
  friend bool operator==(const BoxRegion&, const BoxRegion&) = default;
};

// The region K(A, t) = {(v, h) : h <= t, |v| <= A + sqrt(t - h)} with
// t = height_hi of the enclosing window. Every downward paraboloid with apex
// (v', h'), |v'| <= A, h' <= t lies inside it.
struct ParaboloidRegion {
  double radius = 1;
  friend bool operator==(const ParaboloidRegion&, const ParaboloidRegion&) = default;
};

using SpatialRegion = std::variant<BallRegion, BoxRegion, ParaboloidRegion>;

struct SamplingWindow {
  SpatialRegion spatial = BallRegion{};
  double height_lo = -std::numeric_limits<double>::infinity();
  double height_hi = std::numeric_limits<double>::infinity();

  bool contains(const SpacePoint& p) const;
  friend bool operator==(const SamplingWindow&, const SamplingWindow&) = default;
};

SamplingWindow ball_window(double radius, double height_lo, double height_hi);
SamplingWindow box_window(const Vec& lo, const Vec& hi, double height_lo, double height_hi);
SamplingWindow paraboloid_window(double radius, double height_lo, double t);

// Throws DomainError if the window is not admissible for the model.
void validate_window(const ModelParams& model, const SamplingWindow& window);

// Finite realization of one of the Poisson processes, in generation order.
struct PointSample {
  std::vector<SpacePoint> points;
  SamplingWindow window;
  ModelParams model = ModelParams::gaussian(3);
  std::uint64_t seed = 0;

  size_t size() const noexcept { return points.size(); }
};

}  // namespace bdt
