#pragma once

#include <cstdint>

#include "bdt/model.hpp"

// Exact sign predicates on points (v, h) of R^D x R and their lifts
// (v, h + |v|^2). Every predicate first runs a floating-point evaluation with
// a running error bound and only falls back to rational arithmetic when the
// bound does not certify the sign.
//
// The *_perturbed variants resolve zero determinants by a symbolic
// perturbation keyed by point ids: coordinate j of the lifted point with id i
// is moved by eps * (i + 1)^(j + 1), where the lifted height is coordinate D.
// The perturbed determinant is a polynomial in eps whose top coefficient is a
// Vandermonde determinant, so it never vanishes for distinct ids; its sign is
// the sign of the lowest nonzero coefficient.
namespace bdt::predicates {

// sign det [[v_i, 1]]_{i=0..D}. `pts` holds D+1 points.
int orient(int D, const SpacePoint* const* pts);
int orient_perturbed(int D, const SpacePoint* const* pts, const std::uint32_t* ids);

// sign det [[v_i, h_i + |v_i|^2, 1]]_{i=0..D+1}. The last of the D+2 points is
// the query. The query lies strictly inside the open downward paraboloid
// through the first D+1 points iff power(...) * orient(first D+1) > 0.
int power(int D, const SpacePoint* const* pts);
int power_perturbed(int D, const SpacePoint* const* pts, const std::uint32_t* ids);

struct FilterStats {
  std::uint64_t calls = 0;
  std::uint64_t exact_fallbacks = 0;
  std::uint64_t perturbation_fallbacks = 0;
};

// Per-thread counters, reset by the caller.
FilterStats& thread_filter_stats();

}  // namespace bdt::predicates
