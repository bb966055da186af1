#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "miss/error.hpp"
#include "miss/geometry.hpp"
#include "miss/rng.hpp"

namespace miss {

using Complex = std::complex<double>;

// f(u) for u = 0..N-1, normalised by 1/N on the forward transform so that
// f(0) is the vertex centroid.
struct FourierDescriptors {
  std::vector<Complex> coefficients;

  std::size_t size() const { return coefficients.size(); }
};

namespace detail {

// exp(sign * i * 2*pi * j / n) for j in [0, n). Exponents are reduced modulo
// n before lookup so large u*k products keep full precision.
inline std::vector<Complex> twiddles(std::size_t n, double sign) {
  std::vector<Complex> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    w[j] = {std::cos(a), std::sin(a)};
  }
  return w;
}

}  // namespace detail

inline FourierDescriptors to_fourier(const Contour& contour) {
  require_non_degenerate(contour, "to_fourier");
  const std::size_t n = contour.size();
  const auto w = detail::twiddles(n, -1.0);
  FourierDescriptors fd;
  fd.coefficients.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    Complex acc{0.0, 0.0};
    std::size_t idx = 0;  // (u * k) mod n
    for (std::size_t k = 0; k < n; ++k) {
      acc += Complex(contour.points[k].x, contour.points[k].y) * w[idx];
      idx += u;
      if (idx >= n) idx -= n;
    }
    fd.coefficients[u] = acc / static_cast<double>(n);
  }
  return fd;
}

// Signed frequency of descriptor u: u for u <= N/2, u - N above.
inline long signed_frequency(std::size_t u, std::size_t n) {
  return u <= n / 2 ? static_cast<long>(u) : static_cast<long>(u) - static_cast<long>(n);
}

// Inverse transform sampled at `n_points` positions. With n_points == N this
// is the exact inverse of to_fourier; otherwise each descriptor keeps its
// signed frequency and the contour is resampled.
inline Contour from_fourier(const FourierDescriptors& fds, std::size_t n_points) {
  const std::size_t n = fds.size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "no descriptors", "from_fourier");
  if (n_points < 3) throw Error(ErrorKind::invalid_argument, "need at least 3 output points", "from_fourier");
  const auto w = detail::twiddles(n_points, +1.0);
  Contour out;
  out.points.resize(n_points);
  std::vector<std::size_t> step(n);
  for (std::size_t u = 0; u < n; ++u) {
    const long f = signed_frequency(u, n);
    const long m = static_cast<long>(n_points);
    step[u] = static_cast<std::size_t>(((f % m) + m) % m);
  }
  for (std::size_t k = 0; k < n_points; ++k) {
    Complex acc{0.0, 0.0};
    for (std::size_t u = 0; u < n; ++u) {
      if (fds.coefficients[u] == Complex{}) continue;
      const std::size_t idx = (step[u] * k) % n_points;
      acc += fds.coefficients[u] * w[idx];
    }
    out.points[k] = {acc.real(), acc.imag()};
  }
  out.orientation = signed_area(out.points) >= 0 ? Orientation::positive : Orientation::negative;
  return out;
}

inline Contour from_fourier(const FourierDescriptors& fds) { return from_fourier(fds, fds.size()); }

// Descriptor indices by increasing |frequency|: 0, 1, N-1, 2, N-2, ...
// The +u member of each pair comes first; for even N the Nyquist term N/2
// appears once, last.
inline std::vector<std::size_t> frequency_order(std::size_t n) {
  std::vector<std::size_t> order;
  order.reserve(n);
  if (n == 0) return order;
  order.push_back(0);
  for (std::size_t u = 1; order.size() < n; ++u) {
    order.push_back(u);
    if (order.size() < n && n - u != u) order.push_back(n - u);
  }
  return order;
}

struct FdParams {
  double detail = 1.0;     // fraction of descriptors kept non-zero, (0, 1]
  double range = 0.0;      // fraction of descriptors perturbed, [0, 1]
  double magnitude = 0.0;  // perturbation scale, >= 0

  friend bool operator==(const FdParams&, const FdParams&) = default;
};

inline std::vector<std::string> validate(const FdParams& p) {
  std::vector<std::string> bad;
  if (!(std::isfinite(p.detail) && p.detail > 0.0 && p.detail <= 1.0)) bad.push_back("fd.detail");
  if (!(std::isfinite(p.range) && p.range >= 0.0 && p.range <= 1.0)) bad.push_back("fd.range");
  if (!(std::isfinite(p.magnitude) && p.magnitude >= 0.0)) bad.push_back("fd.magnitude");
  return bad;
}

inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

struct FdCounts {
  std::size_t kept = 0;       // D
  std::size_t perturbed = 0;  // R
};

inline FdCounts fd_counts(std::size_t n, const FdParams& p) {
  const long d = std::max(1L, round_half_up(p.detail * static_cast<double>(n)));
  if (d < 3) {
    throw Error(ErrorKind::degenerate_contour,
                "detail keeps " + std::to_string(d) + " descriptor(s); at least 3 are required", "modify_fd");
  }
  const long r = std::clamp(round_half_up(p.range * static_cast<double>(n)), 0L, d - 1);
  return {static_cast<std::size_t>(d), static_cast<std::size_t>(r)};
}

// One perturbed descriptor and its two uniform draws.
struct FdDraw {
  std::size_t index = 0;
  double r = 0.0;
  double s = 0.0;
};

struct FdModification {
  FourierDescriptors descriptors;
  FdCounts counts;
  std::vector<FdDraw> draws;
};

// Keeps the D lowest-|frequency| descriptors, zeroes the rest, and adds
// (r*m, s*m) with r, s ~ U[-0.5, 0.5) to the R highest-|frequency| members of
// the kept set. DC is never perturbed since R <= D - 1.
inline FdModification modify_fd_traced(const FourierDescriptors& fds, const FdParams& params, SeededRng& rng) {
  if (auto bad = validate(params); !bad.empty())
    throw Error(ErrorKind::invalid_argument, "invalid FD parameter: " + bad.front(), "modify_fd");
  const std::size_t n = fds.size();
  FdModification out;
  out.counts = fd_counts(n, params);
  out.descriptors.coefficients.assign(n, Complex{});
  const auto order = frequency_order(n);
  const std::size_t d = out.counts.kept;
  for (std::size_t i = 0; i < d; ++i) out.descriptors.coefficients[order[i]] = fds.coefficients[order[i]];
  for (std::size_t i = d - out.counts.perturbed; i < d; ++i) {
    const std::size_t u = order[i];
    FdDraw draw{u, rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    auto& c = out.descriptors.coefficients[u];
    c = {c.real() + draw.r * params.magnitude, c.imag() + draw.s * params.magnitude};
    out.draws.push_back(draw);
  }
  return out;
}

inline FourierDescriptors modify_fd(const FourierDescriptors& fds, const FdParams& params, SeededRng& rng) {
  return modify_fd_traced(fds, params, rng).descriptors;
}

}  // namespace miss
