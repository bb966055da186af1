#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "miss/error.hpp"

namespace miss {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  Point operator+(const Point& o) const { return {x + o.x, y + o.y}; }
  Point operator-(const Point& o) const { return {x - o.x, y - o.y}; }
  Point operator*(double s) const { return {x * s, y * s}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Two-label raster. Row-major, one byte per pixel, 0 = background, 1 = foreground.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw Error(ErrorKind::invalid_argument,
                  "mask dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  }
  BinaryMask(int width, int height, std::vector<std::uint8_t> data) : BinaryMask(width, height) {
    if (data.size() != data_.size()) {
      throw Error(ErrorKind::invalid_argument, "mask data length does not match width*height");
    }
    for (std::size_t i = 0; i < data.size(); ++i) data_[i] = data[i] ? 1 : 0;
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty_frame() const { return data_.empty(); }

  bool in_frame(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool at(int x, int y) const { return data_[index(x, y)] != 0; }
  // Out-of-frame reads as background.
  bool get(int x, int y) const { return in_frame(x, y) && at(x, y); }
  void set(int x, int y, bool on = true) { data_[index(x, y)] = on ? 1 : 0; }

  std::span<const std::uint8_t> data() const { return data_; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data_) n += v;
    return n;
  }
  bool any() const {
    for (auto v : data_)
      if (v) return true;
    return false;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Adds `pad` background pixels on every side.
inline BinaryMask pad(const BinaryMask& mask, int pad) {
  if (pad < 0) throw Error(ErrorKind::invalid_argument, "padding must be non-negative");
  BinaryMask out(mask.width() + 2 * pad, mask.height() + 2 * pad);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) out.set(x + pad, y + pad);
  return out;
}

enum class Orientation {
  // Positive shoelace area over the raw (x, y) values. With y pointing down
  // this is the counter-clockwise sense of the image coordinate system.
  positive,
  negative,
};

// Closed polygon; the last point connects back to the first.
struct Contour {
  std::vector<Point> points;
  Orientation orientation = Orientation::positive;

  std::size_t size() const { return points.size(); }

  // Fewer than three distinct positions cannot bound a region.
  bool is_degenerate() const {
    if (points.size() < 3) return true;
    const Point* second = nullptr;
    for (const auto& p : points) {
      if (p == points.front()) continue;
      if (second == nullptr) {
        second = &p;
      } else if (!(p == *second)) {
        return false;
      }
    }
    return true;
  }
};

inline double signed_area(std::span<const Point> pts) {
  double twice = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % pts.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

inline void require_non_degenerate(const Contour& c, const char* stage) {
  if (c.is_degenerate()) {
    throw Error(ErrorKind::degenerate_contour,
                "contour has fewer than three distinct points (" + std::to_string(c.size()) + " points)",
                stage);
  }
}

// Mean of the contour vertices (not the area centroid).
inline Point centroid(const Contour& contour) {
  require_non_degenerate(contour, "centroid");
  double sx = 0.0, sy = 0.0;
  for (const auto& p : contour.points) {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(contour.points.size());
  return {sx / n, sy / n};
}

// Mean of the foreground pixel coordinates.
inline Point area_centroid(const BinaryMask& mask) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        sx += x;
        sy += y;
        ++n;
      }
  if (n == 0) throw Error(ErrorKind::empty_mask, "empty mask has no centroid");
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

inline Contour translate(const Contour& c, Point d) {
  Contour out = c;
  for (auto& p : out.points) p = p + d;
  return out;
}

}  // namespace miss
