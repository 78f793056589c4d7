#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bdt/model.hpp"
#include "bdt/tessellation.hpp"

namespace bdt {

// Exact restriction of one realization of the infinite process to K(A, t).
// Enlarging the region superimposes an independent sample of the difference,
// so the points in any K(A', t') it has covered keep the law of the process.
class GrowingSample {
 public:
  GrowingSample(const ModelParams& model, double A, double t, std::uint64_t seed);

  // Requires A' >= A and t' >= t.
  void grow(double A, double t);

  const ModelParams& model() const noexcept { return model_; }
  const std::vector<SpacePoint>& points() const noexcept { return points_; }
  double radius() const noexcept { return A_; }
  double height() const noexcept { return t_; }
  int rounds() const noexcept { return rounds_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  ModelParams model_;
  double A_;
  double t_;
  std::uint64_t seed_;
  int rounds_ = 0;
  std::vector<SpacePoint> points_;
};

struct Certification {
  Tessellation tessellation;
  // Largest r such that the cells meeting B_r are cells of the tessellation
  // of the infinite process.
  double radius = 0;
  bool needs_height = false;
  bool needs_space = false;
};

// Triangulates points sampled on K(A, t) and certifies them. A cell whose
// circumparaboloid apex (v', h') has |v'| <= A and h' <= t has its open
// paraboloid inside K(A, t), so no point of the infinite process can
// invalidate it. The flags say which dimension of K(A, t) blocked reaching
// `target`.
Certification certify(const ModelParams& model, const std::vector<SpacePoint>& points, double A,
                      double t, double target);

// Starting apex height for K(A, t): a multiple of the height scale at which
// one point per unit area is expected.
double reference_height(const ModelParams& model);

// Window enlargement after a failed certification.
double grown_height(const ModelParams& model, double t);
inline constexpr double kRadiusStep = 1.0;

struct GrowthOptions {
  double initial_margin = 2.0;
  std::optional<double> initial_height;
  int max_rounds = 40;
  std::size_t max_points = 4'000'000;

  friend bool operator==(const GrowthOptions&, const GrowthOptions&) = default;
};

struct CertifiedRealization {
  std::vector<SpacePoint> points;  // the whole sample on the final K(A, t)
  Tessellation tessellation;       // with certificate radius >= R
};

// Samples and enlarges K(A, t) until every cell meeting B_R is certified.
// Throws StabilizationError when the caps are hit first.
CertifiedRealization certified_realization(const ModelParams& model, double R,
                                           std::uint64_t seed, const GrowthOptions& options = {});

}  // namespace bdt
