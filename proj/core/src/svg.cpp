#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bdt/error.hpp"
#include "bdt/io.hpp"
#include "bdt/stats.hpp"

namespace bdt::io {

namespace {

struct P2 {
  double x, y;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  std::string s = buf;
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

// Liang-Barsky; false when the segment misses the box.
bool clip_segment(P2& a, P2& b, const WindowBox& w) {
  double t0 = 0, t1 = 1;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.x - w.lo[0], w.hi[0] - a.x, a.y - w.lo[1], w.hi[1] - a.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0) {
      if (q[i] < 0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  const P2 a0 = a;
  a = {a0.x + t0 * dx, a0.y + t0 * dy};
  b = {a0.x + t1 * dx, a0.y + t1 * dy};
  return true;
}

// Sutherland-Hodgman against the four sides of the box.
std::vector<P2> clip_polygon(std::vector<P2> poly, const WindowBox& w) {
  for (int side = 0; side < 4 && !poly.empty(); ++side) {
    const int axis = side / 2;
    const bool upper = side % 2 == 1;
    const double bound = upper ? w.hi[axis] : w.lo[axis];
    auto inside = [&](const P2& p) {
      const double c = axis == 0 ? p.x : p.y;
      return upper ? c <= bound : c >= bound;
    };
    auto cross = [&](const P2& a, const P2& b) {
      const double ca = axis == 0 ? a.x : a.y, cb = axis == 0 ? b.x : b.y;
      const double t = (bound - ca) / (cb - ca);
      return P2{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    };
    std::vector<P2> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const P2& cur = poly[i];
      const P2& prev = poly[(i + poly.size() - 1) % poly.size()];
      if (inside(cur)) {
        if (!inside(prev)) out.push_back(cross(prev, cur));
        out.push_back(cur);
      } else if (inside(prev)) {
        out.push_back(cross(prev, cur));
      }
    }
    poly = std::move(out);
  }
  return poly;
}

}  // namespace

std::string render_svg(const Tessellation& t, const WindowBox& view, const RenderStyle& style) {
  if (t.spatial_dim != 2)
    throw DomainError("render_svg supports planar tessellations only (d = 3), got d = " +
                      std::to_string(t.spatial_dim + 1));
  if (view.dim() != 2 || !(view.lo[0] < view.hi[0]) || !(view.lo[1] < view.hi[1]))
    throw DomainError("render_svg needs a two-dimensional view with lo < hi");

  const double x0 = view.lo[0], y0 = view.lo[1];
  const double w = view.hi[0] - x0, h = view.hi[1] - y0;
  // SVG's y axis points down; mirror inside the view so the box maps to itself.
  auto flip = [&](double y) { return view.lo[1] + view.hi[1] - y; };
  auto point = [&](std::size_t i) { return P2{t.vertices[i].v[0], t.vertices[i].v[1]}; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + num(x0) + " " + num(y0) + " " +
       num(w) + " " + num(h) + "\">\n";
  if (style.fill) {
    s += "<g fill=\"" + style.fill_color + "\" stroke=\"none\">\n";
    for (std::size_t c = 0; c < t.num_cells(); ++c) {
      const auto cell = t.cell(c);
      auto poly = clip_polygon({point(cell[0]), point(cell[1]), point(cell[2])}, view);
      if (poly.size() < 3) continue;
      s += "<polygon points=\"";
      for (std::size_t i = 0; i < poly.size(); ++i)
        s += (i ? " " : "") + num(poly[i].x) + "," + num(flip(poly[i].y));
      s += "\"/>\n";
    }
    s += "</g>\n";
  }
  s += "<g stroke=\"" + style.stroke + "\" stroke-width=\"" + num(style.stroke_width) +
       "\" stroke-linecap=\"round\">\n";
  for (const auto& edge : enumerate_k_faces(t, 1)) {
    P2 a = point(edge.v[0]), b = point(edge.v[1]);
    if (!clip_segment(a, b, view)) continue;
    s += "<line x1=\"" + num(a.x) + "\" y1=\"" + num(flip(a.y)) + "\" x2=\"" + num(b.x) +
         "\" y2=\"" + num(flip(b.y)) + "\"/>\n";
  }
  s += "</g>\n";
  s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(w) + "\" height=\"" +
       num(h) + "\" fill=\"none\" stroke=\"" + style.stroke + "\" stroke-width=\"" +
       num(2 * style.stroke_width) + "\"/>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace bdt::io
