#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bdt/model.hpp"
#include "bdt/point_process.hpp"
#include "bdt/tessellation.hpp"

namespace bdt::testing {

// Ball window of radius 1 whose expected count is `mean`.
inline SamplingWindow window_with_mean(const ModelParams& model, double mean) {
  const double inf = std::numeric_limits<double>::infinity();
  auto make = [&](double x) {
    switch (model.kind()) {
      case ModelKind::kBeta:
        return ball_window(1.0, 0.0, x);
      case ModelKind::kBetaPrime:
        return ball_window(1.0, -inf, -1.0 / x);
      case ModelKind::kGaussian:
        break;
    }
    return ball_window(1.0, -inf, std::log(x));
  };
  double lo = 1e-6, hi = 1.0;
  while (expected_count(model, make(hi)) < mean) hi *= 2;
  for (int i = 0; i < 100; ++i) {
    const double mid = std::sqrt(lo * hi);
    (expected_count(model, make(mid)) < mean ? lo : hi) = mid;
  }
  return make(hi);
}

// Poisson sample with about `mean` points, cut to at most `cap` points.
inline PointSample small_sample(const ModelParams& model, double mean, std::uint64_t seed,
                                std::size_t cap) {
  PointSample s = sample_process(model, window_with_mean(model, mean), seed);
  if (s.points.size() > cap) s.points.resize(cap);
  return s;
}

inline std::vector<ModelParams> all_models(int d) {
  return {ModelParams::beta(d, 0.0), ModelParams::beta_prime(d, d + 1.0),
          ModelParams::gaussian(d)};
}

}  // namespace bdt::testing
