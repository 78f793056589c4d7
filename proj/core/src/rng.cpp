#include "bdt/rng.hpp"

namespace bdt {

std::uint64_t Rng::poisson(double mean) {
  if (!(mean > 0)) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

}  // namespace bdt
