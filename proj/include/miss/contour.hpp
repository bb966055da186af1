#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "miss/error.hpp"
#include "miss/geometry.hpp"

namespace miss {

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Keeps only the largest 8-connected foreground component. Ties go to the
// component whose first pixel comes first in raster order.
inline BinaryMask largest_component(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> label(mask.size(), -1);
  std::vector<Pixel> stack;
  int best_label = -1;
  std::size_t best_size = 0;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!mask.at(x, y) || label[i] >= 0) continue;
      std::size_t size = 0;
      label[i] = next;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        ++size;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx, ny = p.y + dy;
            if (!mask.in_frame(nx, ny) || !mask.at(nx, ny)) continue;
            const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
            if (label[j] < 0) {
              label[j] = next;
              stack.push_back({nx, ny});
            }
          }
      }
      if (size > best_size) {
        best_size = size;
        best_label = next;
      }
      ++next;
    }
  }
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label[static_cast<std::size_t>(y) * w + x] == best_label && best_label >= 0) out.set(x, y);
  return out;
}

namespace detail {

// Moore neighbourhood, clockwise on screen (y down), starting west.
inline constexpr std::array<Pixel, 8> kMoore = {
    Pixel{-1, 0}, Pixel{-1, -1}, Pixel{0, -1}, Pixel{1, -1},
    Pixel{1, 0},  Pixel{1, 1},   Pixel{0, 1},  Pixel{-1, 1}};

inline int moore_index(Pixel d) {
  for (int i = 0; i < 8; ++i)
    if (kMoore[i] == d) return i;
  return -1;
}

}  // namespace detail

// Outer boundary of the largest 8-connected component by Moore-neighbour
// tracing with Jacob's stopping criterion. Starts at the first foreground
// pixel in raster order; points are pixel centres.
inline Contour extract_contour(const BinaryMask& mask) {
  if (mask.empty_frame() || !mask.any()) throw Error(ErrorKind::empty_mask, "empty mask", "extract_contour");
  const BinaryMask comp = largest_component(mask);
  const std::size_t n_pixels = comp.count();
  if (n_pixels < 3) {
    throw Error(ErrorKind::degenerate_contour,
                "foreground component of " + std::to_string(n_pixels) + " pixel(s) cannot form a closed contour",
                "extract_contour");
  }

  Pixel start{-1, -1};
  for (int y = 0; y < comp.height() && start.x < 0; ++y)
    for (int x = 0; x < comp.width(); ++x)
      if (comp.at(x, y)) {
        start = {x, y};
        break;
      }

  // The west neighbour of the raster-first pixel is always background.
  const Pixel start_back{start.x - 1, start.y};
  Pixel current = start;
  Pixel back = start_back;
  std::vector<Point> pts;
  pts.push_back({double(start.x), double(start.y)});

  const std::size_t guard = 4 * comp.size() + 16;
  for (std::size_t step = 0; step < guard; ++step) {
    const int b = detail::moore_index({back.x - current.x, back.y - current.y});
    Pixel found{};
    Pixel prev = back;
    bool ok = false;
    for (int k = 1; k <= 8; ++k) {
      const Pixel d = detail::kMoore[(b + k) % 8];
      const Pixel cand{current.x + d.x, current.y + d.y};
      if (comp.get(cand.x, cand.y)) {
        found = cand;
        ok = true;
        break;
      }
      prev = cand;
    }
    if (!ok) break;  // isolated pixel; excluded by the size check above
    back = prev;
    current = found;
    if (current == start && back == start_back) break;
    pts.push_back({double(current.x), double(current.y)});
  }

  Contour c;
  c.points = std::move(pts);
  c.orientation = signed_area(c.points) >= 0 ? Orientation::positive : Orientation::negative;
  return c;
}

// Foreground pixels with at least one 4-neighbour that is background or
// outside the frame. Covers every component and hole; raster order.
inline std::vector<Pixel> boundary_pixels(const BinaryMask& mask) {
  std::vector<Pixel> out;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (!mask.get(x - 1, y) || !mask.get(x + 1, y) || !mask.get(x, y - 1) || !mask.get(x, y + 1))
        out.push_back({x, y});
    }
  return out;
}

// Even-odd scanline fill sampled at pixel centres, plus every pixel the
// polygon edges pass through (nearest-centre stepping), clipped to the frame.
// Sub-pixel vertices are used as-is; rounding happens only here.
inline BinaryMask rasterize(const Contour& contour, int width, int height) {
  require_non_degenerate(contour, "rasterize");
  for (const auto& p : contour.points)
    if (!p.finite()) throw Error(ErrorKind::invalid_argument, "contour has non-finite point", "rasterize");
  BinaryMask out(width, height);
  const auto& pts = contour.points;
  const std::size_t n = pts.size();

  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    const double sy = y;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = pts[i];
      const Point& b = pts[(i + 1) % n];
      // Half-open in y so shared vertices count once.
      if ((a.y <= sy && sy < b.y) || (b.y <= sy && sy < a.y)) {
        xs.push_back(a.x + (sy - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double lo = std::max(std::ceil(xs[k]), 0.0);
      const double hi = std::min(std::floor(xs[k + 1]), double(width - 1));
      for (double x = lo; x <= hi; x += 1.0) out.set(static_cast<int>(x), y);
    }
  }

  auto mark = [&](double x, double y) {
    const double rx = std::floor(x + 0.5), ry = std::floor(y + 0.5);
    if (rx >= 0 && ry >= 0 && rx < width && ry < height) out.set(static_cast<int>(rx), static_cast<int>(ry));
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    const double span = std::max(std::abs(b.x - a.x), std::abs(b.y - a.y));
    // Skip edges that lie entirely outside the frame.
    if (std::max(a.x, b.x) < -1 || std::max(a.y, b.y) < -1 || std::min(a.x, b.x) > width ||
        std::min(a.y, b.y) > height)
      continue;
    const auto steps = static_cast<long>(std::ceil(span));
    for (long s = 0; s <= steps; ++s) {
      const double t = steps == 0 ? 0.0 : double(s) / double(steps);
      mark(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
    }
  }

  if (!out.any()) throw Error(ErrorKind::empty_mask, "contour lies entirely outside the frame", "rasterize");
  return out;
}

}  // namespace miss
