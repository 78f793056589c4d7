#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdt/model.hpp"

namespace bdt {

// Vertex indices of a simplex, ascending; only the first `size` entries are used.
using IndexTuple = std::array<std::uint32_t, kMaxModelDim>;

// Record of how far a realization is known to agree with the tessellation of
// the underlying infinite process.
struct StabilizationCertificate {
  double radius = 0;           // every cell meeting the open ball B_radius is final
  double window_radius = 0;    // radius A of the sampled region K(A, t)
  double window_height = 0;    // apex height t of the sampled region
  int rounds = 0;              // window enlargements performed
  std::size_t sampled_points = 0;
};

// Simplicial tessellation of R^D, D = d - 1. `vertices` holds only points
// that appear in some cell, sorted by their index in the originating sample
// (`source_index`). Cells are sorted ascending tuples, and the cell list is
// sorted, so equal tessellations compare equal member-wise.
struct Tessellation {
  int spatial_dim = 2;
  std::vector<SpacePoint> vertices;
  std::vector<std::uint32_t> source_index;
  std::vector<IndexTuple> cells;
  std::optional<StabilizationCertificate> certificate;

  // Provenance; absent for hand-built tessellations.
  std::optional<ModelParams> model;
  std::optional<SamplingWindow> window;
  std::uint64_t seed = 0;

  int cell_size() const noexcept { return spatial_dim + 1; }
  std::size_t num_cells() const noexcept { return cells.size(); }
  std::optional<double> stabilized_radius() const {
    if (certificate) return certificate->radius;
    return std::nullopt;
  }

  std::span<const std::uint32_t> cell(std::size_t i) const {
    return {cells[i].data(), static_cast<std::size_t>(cell_size())};
  }

  // Cells re-expressed through sample indices, sorted.
  std::vector<IndexTuple> cells_by_source() const;
};

// Builds a tessellation from cells given as tuples of sample indices.
// Unused sample points are dropped from the vertex table.
Tessellation make_tessellation(int spatial_dim, std::span<const SpacePoint> sample,
                               std::vector<IndexTuple> cells_by_sample_index);

// JSON document: vertex array, cell index array, provenance metadata and the
// stabilization certificate. Coordinates are written in the shortest decimal
// form that reads back to the identical double.
std::string tessellation_to_json(const Tessellation& t);
Tessellation tessellation_from_json(const std::string& text);

}  // namespace bdt
