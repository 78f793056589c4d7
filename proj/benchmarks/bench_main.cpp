#include <benchmark/benchmark.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bdt/geometry.hpp"
#include "bdt/point_process.hpp"
#include "bdt/predicates.hpp"
#include "bdt/realization.hpp"
#include "bdt/stats.hpp"

namespace {

// Beta(d, 0) sample on the unit ball with roughly `mean` points.
bdt::PointSample beta_sample(int d, double mean, std::uint64_t seed) {
  const auto model = bdt::ModelParams::beta(d, 0.0);
  double lo = 1e-6, hi = 1.0;
  while (bdt::expected_count(model, bdt::ball_window(1.0, 0.0, hi)) < mean) hi *= 2;
  for (int i = 0; i < 80; ++i) {
    const double mid = std::sqrt(lo * hi);
    (bdt::expected_count(model, bdt::ball_window(1.0, 0.0, mid)) < mean ? lo : hi) = mid;
  }
  return bdt::sample_process(model, bdt::ball_window(1.0, 0.0, hi), seed);
}

void BM_RegularTriangulation(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto sample = beta_sample(d, static_cast<double>(state.range(1)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(bdt::regular_triangulation(sample));
  state.counters["points"] = static_cast<double>(sample.points.size());
}
BENCHMARK(BM_RegularTriangulation)
    ->ArgsProduct({{3, 4}, {100, 1000, 10000}})
    ->Unit(benchmark::kMillisecond);

void BM_BruteForce(benchmark::State& state) {
  auto sample = beta_sample(3, static_cast<double>(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(bdt::brute_force_tessellation(sample, 1000));
  state.counters["points"] = static_cast<double>(sample.points.size());
}
BENCHMARK(BM_BruteForce)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// Generic inputs: the floating-point filter decides almost every call.
void BM_PowerPredicate(benchmark::State& state) {
  const auto sample = beta_sample(3, 64, 3);
  const auto& p = sample.points;
  std::size_t i = 0;
  for (auto _ : state) {
    const bdt::SpacePoint* pts[4] = {&p[i % p.size()], &p[(i + 1) % p.size()],
                                     &p[(i + 2) % p.size()], &p[(i + 3) % p.size()]};
    benchmark::DoNotOptimize(bdt::predicates::power(2, pts));
    ++i;
  }
}
BENCHMARK(BM_PowerPredicate);

// Cocircular lattice points: every call falls through to exact arithmetic.
void BM_PowerPredicateDegenerate(benchmark::State& state) {
  const bdt::SpacePoint a{{1, 0}, 0}, b{{0, 1}, 0}, c{{-1, 0}, 0}, q{{0, -1}, 0};
  const bdt::SpacePoint* pts[4] = {&a, &b, &c, &q};
  const std::uint32_t ids[4] = {0, 1, 2, 3};
  for (auto _ : state) benchmark::DoNotOptimize(bdt::predicates::power_perturbed(2, pts, ids));
}
BENCHMARK(BM_PowerPredicateDegenerate);

void BM_SampleProcess(benchmark::State& state) {
  const auto model = bdt::ModelParams::gaussian(3);
  const auto window = bdt::ball_window(static_cast<double>(state.range(0)),
                                       -std::numeric_limits<double>::infinity(), 0.0);
  std::uint64_t seed = 0;
  std::size_t points = 0;
  for (auto _ : state) {
    const auto s = bdt::sample_process(model, window, ++seed);
    points += s.points.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(points));
}
BENCHMARK(BM_SampleProcess)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_CertifiedRealization(benchmark::State& state) {
  const auto model = bdt::ModelParams::beta(3, 0.0);
  const double R = static_cast<double>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(bdt::certified_realization(model, R, ++seed));
}
BENCHMARK(BM_CertifiedRealization)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_FaceCount(benchmark::State& state) {
  const auto sample = beta_sample(3, 5000, 5);
  const auto t = bdt::regular_triangulation(sample);
  const auto w = bdt::WindowBox::cube(2, 0.5);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bdt::count_faces_in_window(t, k, w));
}
BENCHMARK(BM_FaceCount)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
