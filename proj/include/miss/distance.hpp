#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace miss {

// Exact squared Euclidean distance transform (Felzenszwalb & Huttenlocher
// lower-envelope method). `sites` is row-major, non-zero marks a site.
// Returns, per pixel, the squared distance to the nearest site, or +inf when
// there are no sites. All finite outputs are exact integers.
inline std::vector<double> squared_distance_transform(int width, int height, std::span<const std::uint8_t> sites) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t w = static_cast<std::size_t>(width), h = static_cast<std::size_t>(height);
  std::vector<double> grid(w * h);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = sites[i] ? 0.0 : inf;

  const std::size_t longest = std::max(w, h);
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<std::size_t> v(longest);

  auto pass = [&](std::size_t n) {
    // 1-D transform of f[0..n) into d[0..n).
    std::size_t k = 0;
    bool any = false;
    for (std::size_t q = 0; q < n; ++q) {
      if (f[q] == inf) continue;
      if (!any) {
        v[0] = q;
        z[0] = -inf;
        z[1] = inf;
        any = true;
        continue;
      }
      double s;
      while (true) {
        const double p = static_cast<double>(v[k]);
        const double qd = static_cast<double>(q);
        s = ((f[q] + qd * qd) - (f[v[k]] + p * p)) / (2.0 * qd - 2.0 * p);
        if (s <= z[k]) {  // z[0] = -inf, so this stops at k = 0
          --k;
        } else {
          break;
        }
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
    }
    if (!any) {
      for (std::size_t q = 0; q < n; ++q) d[q] = inf;
      return;
    }
    k = 0;
    for (std::size_t q = 0; q < n; ++q) {
      const double qd = static_cast<double>(q);
      while (z[k + 1] < qd) ++k;
      const double dq = qd - static_cast<double>(v[k]);
      d[q] = dq * dq + f[v[k]];
    }
  };

  for (std::size_t x = 0; x < w; ++x) {
    for (std::size_t y = 0; y < h; ++y) f[y] = grid[y * w + x];
    pass(h);
    for (std::size_t y = 0; y < h; ++y) grid[y * w + x] = d[y];
  }
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) f[x] = grid[y * w + x];
    pass(w);
    for (std::size_t x = 0; x < w; ++x) grid[y * w + x] = d[x];
  }
  return grid;
}

}  // namespace miss
