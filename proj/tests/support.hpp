#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "miss/contour.hpp"
#include "miss/geometry.hpp"
#include "miss/rng.hpp"

namespace miss::fixtures {

// Rows of '#' (foreground) and '.' (background).
inline BinaryMask mask_from_rows(const std::vector<std::string>& rows) {
  BinaryMask m(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) m.set(x, y, rows[y][x] == '#');
  return m;
}

inline BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m.set(x, y, true);
  return m;
}

inline BinaryMask ellipse_mask(int w, int h, double cx, double cy, double rx, double ry, double angle = 0.0) {
  BinaryMask m(w, h);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double dx = x - cx, dy = y - cy;
      const double u = (c * dx + s * dy) / rx, v = (-s * dx + c * dy) / ry;
      m.set(x, y, u * u + v * v <= 1.0);
    }
  return m;
}

inline BinaryMask random_ellipse(SeededRng& rng, int w, int h) {
  const double rx = rng.uniform(w * 0.12, w * 0.28), ry = rng.uniform(h * 0.12, h * 0.28);
  const double cx = rng.uniform(w * 0.35, w * 0.65), cy = rng.uniform(h * 0.35, h * 0.65);
  return ellipse_mask(w, h, cx, cy, rx, ry, rng.uniform(0.0, 3.14159));
}

inline BinaryMask shifted(const BinaryMask& m, int dx, int dy) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y) && out.in_frame(x + dx, y + dy)) out.set(x + dx, y + dy, true);
  return out;
}

// Boundary pixels by direct enumeration: foreground with a background or
// off-frame 4-neighbour.
inline std::vector<Pixel> brute_boundary(const BinaryMask& m) {
  std::vector<Pixel> out;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      if (!m.at(x, y)) continue;
      const bool edge = !m.get(x - 1, y) || !m.get(x + 1, y) || !m.get(x, y - 1) || !m.get(x, y + 1);
      if (edge) out.push_back({x, y});
    }
  return out;
}

struct BruteDistances {
  double hd = 0.0;
  double avd = 0.0;
};

// All-pairs directed distances between boundary pixel sets.
inline BruteDistances brute_hd_avd(const BinaryMask& a, const BinaryMask& b) {
  const auto pa = brute_boundary(a), pb = brute_boundary(b);
  auto directed = [](const std::vector<Pixel>& from, const std::vector<Pixel>& to) {
    double mx = 0.0, sum = 0.0;
    for (const auto& p : from) {
      double best = INFINITY;
      for (const auto& q : to) {
        const double dx = p.x - q.x, dy = p.y - q.y;
        best = std::min(best, dx * dx + dy * dy);
      }
      const double d = std::sqrt(best);
      mx = std::max(mx, d);
      sum += d;
    }
    return std::pair{mx, sum / static_cast<double>(from.size())};
  };
  const auto [h1, m1] = directed(pa, pb);
  const auto [h2, m2] = directed(pb, pa);
  return {std::max(h1, h2), std::max(m1, m2)};
}

}  // namespace miss::fixtures
