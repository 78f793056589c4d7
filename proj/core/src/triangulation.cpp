#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "bdt/error.hpp"
#include "bdt/geometry.hpp"
#include "bdt/predicates.hpp"
#include "bdt/rng.hpp"
#include "geometry_internal.hpp"

namespace bdt {

namespace {

constexpr std::int32_t kInfinite = -1;

// Incremental lower-hull construction over R^D plus a vertex at vertical
// infinity. Finite cells are lower facets of the lifted points; a cell holding
// the infinite vertex stands for a convex-hull facet of the spatial points.
class Builder {
 public:
  Builder(int D, std::span<const SpacePoint> pts) : D_(D), d_(D + 1), pts_(pts) {}

  void build(const std::vector<std::uint32_t>& order) {
    if (order.size() < static_cast<std::size_t>(d_)) return;
    init_simplex(std::span(order).first(d_));
    for (std::size_t k = d_; k < order.size(); ++k) insert(order[k]);
  }

  std::vector<IndexTuple> finite_cells() const {
    std::vector<IndexTuple> out;
    for (const Cell& c : cells_) {
      if (!c.alive || is_infinite(c)) continue;
      IndexTuple t{};
      for (int i = 0; i < d_; ++i) t[i] = static_cast<std::uint32_t>(c.v[i]);
      std::sort(t.begin(), t.begin() + d_);
      out.push_back(t);
    }
    return out;
  }

 private:
  struct Cell {
    std::array<std::int32_t, kMaxModelDim> v{};
    std::array<std::int32_t, kMaxModelDim> n{};
    std::int8_t orient = 0;
    bool alive = false;
  };

  bool is_infinite(const Cell& c) const {
    for (int i = 0; i < d_; ++i)
      if (c.v[i] == kInfinite) return true;
    return false;
  }

  int orient_of(const std::array<std::int32_t, kMaxModelDim>& v) const {
    std::array<const SpacePoint*, kMaxModelDim> p{};
    std::array<std::uint32_t, kMaxModelDim> ids{};
    for (int i = 0; i < d_; ++i) {
      p[i] = &pts_[v[i]];
      ids[i] = static_cast<std::uint32_t>(v[i]);
    }
    return predicates::orient_perturbed(D_, p.data(), ids.data());
  }

  bool conflicts(std::int32_t ci, std::int32_t q) const {
    const Cell& c = cells_[ci];
    int inf_slot = -1;
    for (int i = 0; i < d_; ++i)
      if (c.v[i] == kInfinite) inf_slot = i;
    if (inf_slot < 0) {
      std::array<const SpacePoint*, kMaxModelDim + 1> p{};
      std::array<std::uint32_t, kMaxModelDim + 1> ids{};
      for (int i = 0; i < d_; ++i) {
        p[i] = &pts_[c.v[i]];
        ids[i] = static_cast<std::uint32_t>(c.v[i]);
      }
      p[d_] = &pts_[q];
      ids[d_] = static_cast<std::uint32_t>(q);
      return predicates::power_perturbed(D_, p.data(), ids.data()) * c.orient > 0;
    }
    // q conflicts with a hull facet iff it lies strictly beyond it, i.e. on
    // the other side than the opposite vertex of the finite neighbour.
    const Cell& nb = cells_[c.n[inf_slot]];
    std::int32_t w = kInfinite;
    for (int i = 0; i < d_; ++i)
      if (nb.n[i] == ci) w = nb.v[i];
    auto with_q = c.v;
    with_q[inf_slot] = q;
    auto with_w = c.v;
    with_w[inf_slot] = w;
    return orient_of(with_q) == -orient_of(with_w);
  }

  std::int32_t new_cell() {
    if (!free_.empty()) {
      const std::int32_t id = free_.back();
      free_.pop_back();
      cells_[id] = Cell{};
      cells_[id].alive = true;
      return id;
    }
    cells_.push_back(Cell{});
    cells_.back().alive = true;
    mark_.push_back(0);
    return static_cast<std::int32_t>(cells_.size() - 1);
  }

  void init_simplex(std::span<const std::uint32_t> first) {
    const std::int32_t fc = new_cell();
    for (int i = 0; i < d_; ++i) cells_[fc].v[i] = static_cast<std::int32_t>(first[i]);
    cells_[fc].orient = static_cast<std::int8_t>(orient_of(cells_[fc].v));
    std::array<std::int32_t, kMaxModelDim> inf{};
    for (int i = 0; i < d_; ++i) {
      inf[i] = new_cell();
      cells_[inf[i]].v = cells_[fc].v;
      cells_[inf[i]].v[i] = kInfinite;
    }
    for (int i = 0; i < d_; ++i) {
      cells_[fc].n[i] = inf[i];
      for (int j = 0; j < d_; ++j) cells_[inf[i]].n[j] = (j == i) ? fc : inf[j];
    }
    last_ = fc;
  }

  enum class Located { kInside, kOutside, kNone };

  // Stochastic visibility walk from the last created finite cell.
  std::pair<Located, std::int32_t> locate(std::int32_t q) {
    std::int32_t c = last_;
    const std::size_t cap = 64 + 4 * cells_.size();
    for (std::size_t step = 0; step < cap; ++step) {
      const int offset = static_cast<int>(walk_rng_.next_u64() % static_cast<std::uint64_t>(d_));
      bool moved = false;
      for (int t = 0; t < d_; ++t) {
        const int i = (offset + t) % d_;
        auto v = cells_[c].v;
        v[i] = q;
        if (orient_of(v) == -cells_[c].orient) {
          const std::int32_t nb = cells_[c].n[i];
          if (is_infinite(cells_[nb])) return {Located::kOutside, nb};
          c = nb;
          moved = true;
          break;
        }
      }
      if (!moved) return {Located::kInside, c};
    }
    // The walk is randomized and terminates almost surely; fall back to a scan.
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const auto ci = static_cast<std::int32_t>(i);
      if (cells_[ci].alive && conflicts(ci, q)) return {Located::kOutside, ci};
    }
    return {Located::kNone, -1};
  }

  void insert(std::uint32_t qu) {
    const auto q = static_cast<std::int32_t>(qu);
    auto [where, start] = locate(q);
    if (where == Located::kNone) return;
    if (where == Located::kInside && !conflicts(start, q)) return;  // redundant point

    stamp_ += 2;
    const std::uint32_t in_conflict = stamp_;
    const std::uint32_t no_conflict = stamp_ + 1;
    conflict_.clear();
    boundary_.clear();
    conflict_.push_back(start);
    mark_[start] = in_conflict;
    for (std::size_t k = 0; k < conflict_.size(); ++k) {
      const std::int32_t c = conflict_[k];
      for (int i = 0; i < d_; ++i) {
        const std::int32_t nb = cells_[c].n[i];
        if (mark_[nb] == in_conflict) continue;
        if (mark_[nb] != no_conflict) {
          if (conflicts(nb, q)) {
            mark_[nb] = in_conflict;
            conflict_.push_back(nb);
            continue;
          }
          mark_[nb] = no_conflict;
        }
        boundary_.push_back({c, i});
      }
    }

    ridges_.clear();
    std::int32_t finite_created = -1;
    for (const auto& [c, i] : boundary_) {
      const std::int32_t nc = new_cell();
      Cell& cell = cells_[nc];
      cell.v = cells_[c].v;
      cell.v[i] = q;
      const std::int32_t nb = cells_[c].n[i];
      cell.n[i] = nb;
      for (int j = 0; j < d_; ++j)
        if (cells_[nb].n[j] == c) cells_[nb].n[j] = nc;
      if (!is_infinite(cell)) {
        cell.orient = static_cast<std::int8_t>(orient_of(cell.v));
        finite_created = nc;
      }
      for (int k = 0; k < d_; ++k) {
        if (k == i) continue;
        Ridge r{};
        int m = 0;
        for (int j = 0; j < d_; ++j)
          if (j != k && j != i) r.key[m++] = cell.v[j];
        std::sort(r.key.begin(), r.key.begin() + m);
        r.cell = nc;
        r.slot = k;
        ridges_.push_back(r);
      }
    }
    std::sort(ridges_.begin(), ridges_.end(),
              [](const Ridge& a, const Ridge& b) { return a.key < b.key; });
    for (std::size_t k = 0; k + 1 < ridges_.size(); k += 2) {
      const Ridge& a = ridges_[k];
      const Ridge& b = ridges_[k + 1];
      cells_[a.cell].n[a.slot] = b.cell;
      cells_[b.cell].n[b.slot] = a.cell;
    }
    for (const std::int32_t c : conflict_) {
      cells_[c].alive = false;
      free_.push_back(c);
    }
    if (finite_created >= 0) last_ = finite_created;
  }

  struct Ridge {
    std::array<std::int32_t, kMaxModelDim> key{};
    std::int32_t cell = 0;
    int slot = 0;
  };

  int D_;
  int d_;
  std::span<const SpacePoint> pts_;
  std::vector<Cell> cells_;
  std::vector<std::int32_t> free_;
  std::vector<std::uint32_t> mark_;
  std::uint32_t stamp_ = 0;
  std::int32_t last_ = -1;
  Rng walk_rng_{0x5eed};
  std::vector<std::int32_t> conflict_;
  std::vector<std::pair<std::int32_t, int>> boundary_;
  std::vector<Ridge> ridges_;
};

// Z-order of quantized coordinates; keeps consecutive insertions close.
std::vector<std::uint32_t> spatial_order(int D, std::span<const SpacePoint> pts) {
  const std::size_t n = pts.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (n < 2) return order;
  std::array<double, kMaxSpatialDim> lo{}, hi{};
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& p : pts)
    for (int j = 0; j < D; ++j) {
      lo[j] = std::min(lo[j], p.v[j]);
      hi[j] = std::max(hi[j], p.v[j]);
    }
  const int bits = 60 / D;
  const double cells = static_cast<double>((1ull << bits) - 1);
  std::vector<std::uint64_t> code(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint64_t, kMaxSpatialDim> q{};
    for (int j = 0; j < D; ++j) {
      const double span = hi[j] - lo[j];
      const double f = span > 0 ? (pts[i].v[j] - lo[j]) / span : 0.0;
      q[j] = static_cast<std::uint64_t>(f * cells);
    }
    std::uint64_t c = 0;
    for (int b = bits - 1; b >= 0; --b)
      for (int j = 0; j < D; ++j) c = (c << 1) | ((q[j] >> b) & 1u);
    code[i] = c;
  }
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return code[a] != code[b] ? code[a] < code[b] : a < b;
  });
  return order;
}

}  // namespace

Tessellation regular_triangulation(int D, std::span<const SpacePoint> points) {
  detail::require_full_dimension(D, points);
  Builder builder(D, points);
  builder.build(spatial_order(D, points));
  return make_tessellation(D, points, builder.finite_cells());
}

Tessellation regular_triangulation(const PointSample& sample) {
  Tessellation t = regular_triangulation(sample.model.spatial_dim(), sample.points);
  t.model = sample.model;
  t.window = sample.window;
  t.seed = sample.seed;
  return t;
}

}  // namespace bdt
