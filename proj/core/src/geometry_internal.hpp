#pragma once

#include <span>

#include "bdt/model.hpp"

namespace bdt::detail {

// Throws DegeneracyError unless the spatial coordinates affinely span R^D.
// Exact.
void require_full_dimension(int D, std::span<const SpacePoint> points);

}  // namespace bdt::detail
