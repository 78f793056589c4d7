#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "bdt/model.hpp"
#include "bdt/tessellation.hpp"

namespace bdt {

// A k-dimensional face: k + 1 strictly increasing vertex indices.
struct FaceKey {
  IndexTuple v{};
  int k = 0;

  std::span<const std::uint32_t> indices() const { return {v.data(), static_cast<std::size_t>(k + 1)}; }
  friend bool operator==(const FaceKey&, const FaceKey&) = default;
  friend auto operator<=>(const FaceKey&, const FaceKey&) = default;
};

// Closed axis-parallel box. cube(D, n) is I_n = [-n, n]^D.
struct WindowBox {
  Vec lo;
  Vec hi;

  static WindowBox cube(int dim, double n);
  int dim() const noexcept { return lo.size(); }
  bool contains(const Vec& x) const;
  double volume() const;
  // Largest distance from the origin to a point of the box.
  double outer_radius() const;

  friend bool operator==(const WindowBox&, const WindowBox&) = default;
};

// Certified mode refuses windows that reach outside the tessellation's
// stabilized ball, so no unfinished cell can leak into a statistic.
enum class WindowCheck { kNone, kCertified };

// All k-faces, deduplicated, in ascending order.
std::vector<FaceKey> enumerate_k_faces(const Tessellation& t, int k);

// Lexicographically smallest vertex of the face. Distinct vertices with equal
// coordinates throw DegeneracyError.
Vec face_center(const FaceKey& f, const Tessellation& t);

std::size_t count_faces_in_window(const Tessellation& t, int k, const WindowBox& w,
                                  WindowCheck check = WindowCheck::kNone);

// Total k-volume of the k-skeleton inside the box. Coordinates within 1e-12
// of a box face are snapped onto it before clipping.
double skeleton_volume_in_window(const Tessellation& t, int k, const WindowBox& w,
                                 WindowCheck check = WindowCheck::kNone);

// k-volume of the part of one simplex (given by k + 1 corners in R^D) inside
// the box.
double clipped_simplex_volume(std::span<const Vec> corners, const WindowBox& w);

// Sub-tessellation of the cells meeting the open ball B_R, with the vertex
// table compacted and all metadata kept.
Tessellation restrict_to_ball(const Tessellation& t, double R);

// A cell as the sorted multiset of its vertex coordinates (v then h).
using CellSignature = std::vector<double>;
std::set<CellSignature> cell_signatures(const Tessellation& t);

// Equal iff the two tessellations have the same cells as coordinate sets.
bool same_combinatorics(const Tessellation& a, const Tessellation& b);

}  // namespace bdt
