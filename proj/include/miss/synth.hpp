#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "miss/contour.hpp"
#include "miss/error.hpp"
#include "miss/fourier.hpp"
#include "miss/geometry.hpp"
#include "miss/rng.hpp"

namespace miss {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

// [0, 2*pi)
inline double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Wrapped difference a - b in (-pi, pi].
inline double angle_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

// ---------------------------------------------------------------- affine

struct AffineParams {
  double resize_x = 1.0;
  double resize_y = 1.0;
  double shift_dx = 0.0;
  double shift_dy = 0.0;
  double rotate = 0.0;  // radians

  friend bool operator==(const AffineParams&, const AffineParams&) = default;
};

inline std::vector<std::string> validate(const AffineParams& p) {
  std::vector<std::string> bad;
  if (!(std::isfinite(p.resize_x) && p.resize_x > 0)) bad.push_back("affine.resize_x");
  if (!(std::isfinite(p.resize_y) && p.resize_y > 0)) bad.push_back("affine.resize_y");
  if (!std::isfinite(p.shift_dx)) bad.push_back("affine.shift_dx");
  if (!std::isfinite(p.shift_dy)) bad.push_back("affine.shift_dy");
  if (!std::isfinite(p.rotate)) bad.push_back("affine.rotate");
  return bad;
}

// Resize, then rotate, both about the vertex centroid; then shift.
inline Contour affine_transform(const Contour& contour, const AffineParams& params) {
  if (auto bad = validate(params); !bad.empty())
    throw Error(ErrorKind::invalid_argument, "invalid affine parameter: " + bad.front(), "affine");
  const Point c = centroid(contour);
  const bool linear = params.resize_x != 1.0 || params.resize_y != 1.0 || params.rotate != 0.0;
  const double cs = std::cos(params.rotate), sn = std::sin(params.rotate);
  Contour out = contour;
  for (auto& p : out.points) {
    if (linear) {
      const double dx = (p.x - c.x) * params.resize_x;
      const double dy = (p.y - c.y) * params.resize_y;
      p = {c.x + cs * dx - sn * dy, c.y + sn * dx + cs * dy};
    }
    p = {p.x + params.shift_dx, p.y + params.shift_dy};
  }
  out.orientation = signed_area(out.points) >= 0 ? Orientation::positive : Orientation::negative;
  return out;
}

// ---------------------------------------------------------------- polar / spiculation

struct PolarPoint {
  double rho = 0.0;  // distance to the vertex centroid
  double phi = 0.0;  // [0, 2*pi)
};

inline std::vector<PolarPoint> to_polar(const Contour& contour) {
  const Point c = centroid(contour);
  std::vector<PolarPoint> out;
  out.reserve(contour.size());
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const Point d = contour.points[i] - c;
    const double rho = std::hypot(d.x, d.y);
    if (rho == 0.0) {
      throw Error(ErrorKind::invalid_argument, "contour point " + std::to_string(i) + " coincides with the centroid",
                  "to_polar");
    }
    out.push_back({rho, normalize_angle(std::atan2(d.y, d.x))});
  }
  return out;
}

struct SpiculationParams {
  double center = 0.0;  // c, radians
  double height = 0.0;  // h, pixels; negative = inward
  double width = 0.1;   // w, radians

  friend bool operator==(const SpiculationParams&, const SpiculationParams&) = default;
};

inline std::vector<std::string> validate(const SpiculationParams& p, const std::string& prefix = "spiculation") {
  std::vector<std::string> bad;
  if (!std::isfinite(p.center)) bad.push_back(prefix + ".center");
  if (!std::isfinite(p.height)) bad.push_back(prefix + ".height");
  if (!(std::isfinite(p.width) && p.width > 0)) bad.push_back(prefix + ".width");
  return bad;
}

// G(phi) = h * exp(-(delta(phi, c) / w)^2)
inline double spiculation_gain(const SpiculationParams& p, double phi) {
  const double z = angle_difference(phi, normalize_angle(p.center)) / p.width;
  return p.height * std::exp(-z * z);
}

// Moves each point radially (about the vertex centroid) by G(phi_i). Point
// count and order are unchanged; no resampling, so non-star-shaped contours
// are handled point by point.
inline Contour add_spiculation(const Contour& contour, const SpiculationParams& params) {
  if (auto bad = validate(params); !bad.empty())
    throw Error(ErrorKind::invalid_argument, "invalid spiculation parameter: " + bad.front(), "spiculation");
  const Point c = centroid(contour);
  const auto polar = to_polar(contour);
  Contour out = contour;
  for (std::size_t i = 0; i < polar.size(); ++i) {
    const double g = spiculation_gain(params, polar[i].phi);
    if (polar[i].rho + g <= 0.0) {
      throw Error(ErrorKind::collapsed_contour,
                  "inward spiculation collapses point " + std::to_string(i) + " through the centroid",
                  "spiculation");
    }
    const Point d = contour.points[i] - c;
    const double k = g / polar[i].rho;
    out.points[i] = {contour.points[i].x + d.x * k, contour.points[i].y + d.y * k};
  }
  return out;
}

// ---------------------------------------------------------------- segmentor config

enum class SpiculationMode { none, outward, inward, mixture };

inline const char* to_string(SpiculationMode m) {
  switch (m) {
    case SpiculationMode::none: return "none";
    case SpiculationMode::outward: return "outward";
    case SpiculationMode::inward: return "inward";
    case SpiculationMode::mixture: return "mixture";
  }
  return "none";
}

enum class Stage { fourier, spiculation, affine };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::fourier: return "fourier";
    case Stage::spiculation: return "spiculation";
    case Stage::affine: return "affine";
  }
  return "?";
}

inline const std::vector<Stage>& default_stage_order() {
  static const std::vector<Stage> order{Stage::fourier, Stage::spiculation, Stage::affine};
  return order;
}

template <typename T>
struct Range {
  T lo{};
  T hi{};
  friend bool operator==(const Range&, const Range&) = default;
};

// One simulated segmentor. Ranges are sampled per synthesis call.
struct SegmentorConfig {
  std::string id;
  FdParams fd;
  double resize_x = 1.0;
  double resize_y = 1.0;
  double rotate = 0.0;                        // radians
  Range<double> shift{0.0, 0.0};              // pixels
  Range<int> spiculation_count{0, 0};
  Range<double> spiculation_center{0.0, 360.0};  // degrees, [lo, hi)
  Range<double> spiculation_height{0.0, 0.0};    // pixels, signed
  Range<double> spiculation_width{0.0, 0.0};     // degrees
  SpiculationMode spiculation_mode = SpiculationMode::none;
  std::vector<Stage> stage_order = default_stage_order();

  friend bool operator==(const SegmentorConfig&, const SegmentorConfig&) = default;
};

inline std::vector<std::string> validate(const SegmentorConfig& c) {
  std::vector<std::string> bad = validate(c.fd);
  if (!(std::isfinite(c.resize_x) && c.resize_x > 0)) bad.push_back("resize_x");
  if (!(std::isfinite(c.resize_y) && c.resize_y > 0)) bad.push_back("resize_y");
  if (!std::isfinite(c.rotate)) bad.push_back("rotate");
  if (!(c.shift.lo >= 0 && c.shift.lo <= c.shift.hi && std::isfinite(c.shift.hi))) bad.push_back("shift");
  if (!(c.spiculation_count.lo >= 0 && c.spiculation_count.lo <= c.spiculation_count.hi))
    bad.push_back("spiculation_count");
  const bool spiculated = c.spiculation_mode != SpiculationMode::none && c.spiculation_count.hi > 0;
  if (!(c.spiculation_center.lo <= c.spiculation_center.hi && std::isfinite(c.spiculation_center.hi)))
    bad.push_back("spiculation_center");
  if (!(c.spiculation_height.lo <= c.spiculation_height.hi && std::isfinite(c.spiculation_height.lo) &&
        std::isfinite(c.spiculation_height.hi)))
    bad.push_back("spiculation_height");
  if (spiculated) {
    if (!(c.spiculation_width.lo > 0 && c.spiculation_width.lo <= c.spiculation_width.hi))
      bad.push_back("spiculation_width");
    if (c.spiculation_mode == SpiculationMode::outward && c.spiculation_height.lo < 0)
      bad.push_back("spiculation_height");
    if (c.spiculation_mode == SpiculationMode::inward && c.spiculation_height.hi > 0)
      bad.push_back("spiculation_height");
  }
  if (c.stage_order.size() != 3) bad.push_back("stage_order");
  return bad;
}

// ---------------------------------------------------------------- pipeline

// Every value drawn or derived during one synthesis call.
struct Provenance {
  std::uint64_t seed = 0;
  std::string segmentor_id;
  std::vector<Stage> stage_order;
  std::size_t contour_points = 0;
  FdParams fd;
  FdCounts fd_counts;
  std::vector<FdDraw> fd_draws;
  std::vector<SpiculationParams> spiculations;  // radians / pixels
  AffineParams affine;
  double shift_length = 0.0;
  double shift_direction = 0.0;  // radians
};

// Fully resolved parameters: what the interactive preview supplies directly
// and what a SegmentorConfig resolves to after sampling.
struct ExplicitParams {
  FdParams fd;
  std::vector<SpiculationParams> spiculations;
  AffineParams affine;
  std::vector<Stage> stage_order = default_stage_order();
};

inline std::vector<std::string> validate(const ExplicitParams& p) {
  std::vector<std::string> bad = validate(p.fd);
  for (std::size_t i = 0; i < p.spiculations.size(); ++i) {
    auto b = validate(p.spiculations[i], "spiculations[" + std::to_string(i) + "]");
    bad.insert(bad.end(), b.begin(), b.end());
  }
  auto b = validate(p.affine);
  bad.insert(bad.end(), b.begin(), b.end());
  if (p.stage_order.size() != 3) bad.push_back("stage_order");
  return bad;
}

struct SynthesisResult {
  BinaryMask mask;
  Contour contour;
  Provenance provenance;
};

namespace detail {

template <typename F>
auto in_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

inline void check_stage_order(const std::vector<Stage>& order) {
  bool seen[3] = {false, false, false};
  for (Stage s : order) seen[static_cast<int>(s)] = true;
  if (order.size() != 3 || !seen[0] || !seen[1] || !seen[2])
    throw Error(ErrorKind::invalid_argument, "stage_order must list fourier, spiculation and affine once each");
}

}  // namespace detail

// Runs the engines on an already extracted truth contour. `rng` supplies the
// FD perturbation draws; spiculations and affine are taken as given.
inline SynthesisResult synthesize_explicit(const Contour& truth_contour, int width, int height,
                                           const ExplicitParams& params, SeededRng& rng) {
  if (auto bad = validate(params); !bad.empty())
    throw Error(ErrorKind::invalid_argument, "invalid parameter: " + bad.front());
  detail::check_stage_order(params.stage_order);
  SynthesisResult res;
  res.provenance.seed = rng.seed();
  res.provenance.stage_order = params.stage_order;
  res.provenance.contour_points = truth_contour.size();
  res.provenance.fd = params.fd;
  res.provenance.spiculations = params.spiculations;
  res.provenance.affine = params.affine;

  Contour c = truth_contour;
  for (Stage stage : params.stage_order) {
    switch (stage) {
      case Stage::fourier:
        c = detail::in_stage("fourier", [&] {
          const auto fds = to_fourier(c);
          auto mod = modify_fd_traced(fds, params.fd, rng);
          res.provenance.fd_counts = mod.counts;
          res.provenance.fd_draws = std::move(mod.draws);
          // Unchanged descriptors skip the inverse transform and its round-off.
          if (mod.descriptors.coefficients == fds.coefficients) return c;
          Contour out = from_fourier(mod.descriptors, c.size());
          require_non_degenerate(out, "fourier");
          return out;
        });
        break;
      case Stage::spiculation:
        c = detail::in_stage("spiculation", [&] {
          Contour out = c;
          for (const auto& s : params.spiculations) out = add_spiculation(out, s);
          return out;
        });
        break;
      case Stage::affine:
        c = detail::in_stage("affine", [&] { return affine_transform(c, params.affine); });
        break;
    }
  }
  res.mask = detail::in_stage("rasterize", [&] { return rasterize(c, width, height); });
  res.contour = std::move(c);
  return res;
}

// Samples a SegmentorConfig into concrete parameters. Draw order is fixed:
// spiculation count, then (center, width, height-or-sign+magnitude) per
// spiculation, then shift direction and length. FD draws come afterwards,
// from the same stream, inside the fourier stage.
struct SampledConfig {
  ExplicitParams params;
  double shift_length = 0.0;
  double shift_direction = 0.0;
};

inline SampledConfig sample_config(const SegmentorConfig& config, SeededRng& rng) {
  SampledConfig sampled;
  ExplicitParams& p = sampled.params;
  p.fd = config.fd;
  p.stage_order = config.stage_order;
  if (config.spiculation_mode != SpiculationMode::none && config.spiculation_count.hi > 0) {
    const auto k = rng.uniform_int(config.spiculation_count.lo, config.spiculation_count.hi);
    for (std::int64_t i = 0; i < k; ++i) {
      SpiculationParams s;
      s.center = normalize_angle(
          degrees_to_radians(rng.uniform(config.spiculation_center.lo, config.spiculation_center.hi)));
      s.width = degrees_to_radians(rng.uniform(config.spiculation_width.lo, config.spiculation_width.hi));
      if (config.spiculation_mode == SpiculationMode::mixture) {
        // Fair-coin sign; |h| uniform up to the largest magnitude in range.
        const double top = std::max(std::abs(config.spiculation_height.lo), std::abs(config.spiculation_height.hi));
        const bool outward = rng.coin();
        const double mag = rng.uniform(0.0, top);
        s.height = outward ? mag : -mag;
      } else {
        s.height = rng.uniform(config.spiculation_height.lo, config.spiculation_height.hi);
      }
      p.spiculations.push_back(s);
    }
  }
  p.affine.resize_x = config.resize_x;
  p.affine.resize_y = config.resize_y;
  p.affine.rotate = config.rotate;
  if (config.shift.hi > 0) {
    const double dir = rng.uniform(0.0, kTwoPi);
    const double len = rng.uniform(config.shift.lo, config.shift.hi);
    p.affine.shift_dx = len * std::cos(dir);
    p.affine.shift_dy = len * std::sin(dir);
    sampled.shift_length = len;
    sampled.shift_direction = dir;
  }
  return sampled;
}

// Full segmentor emulation on a truth mask. Identical (truth, config, seed)
// gives bit-identical output.
inline SynthesisResult synthesize(const BinaryMask& truth, const SegmentorConfig& config, std::uint64_t seed) {
  if (auto bad = validate(config); !bad.empty())
    throw Error(ErrorKind::invalid_argument, "invalid segmentor config field: " + bad.front(), "config");
  detail::check_stage_order(config.stage_order);
  const Contour truth_contour = detail::in_stage("extract_contour", [&] { return extract_contour(truth); });
  SeededRng rng(seed);
  const SampledConfig sampled = sample_config(config, rng);
  SynthesisResult res = synthesize_explicit(truth_contour, truth.width(), truth.height(), sampled.params, rng);
  res.provenance.seed = seed;
  res.provenance.segmentor_id = config.id;
  res.provenance.shift_length = sampled.shift_length;
  res.provenance.shift_direction = sampled.shift_direction;
  return res;
}

}  // namespace miss
