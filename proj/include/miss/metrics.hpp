#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "miss/contour.hpp"
#include "miss/distance.hpp"
#include "miss/error.hpp"
#include "miss/geometry.hpp"

namespace miss {

// Row order of the metric overview table; CSV columns follow it.
enum class Metric {
  DICE, JAC, MSI, TPR, TNR, FPR, PPV, ACC, AUC, VS,
  KAP, ARI, MI, VOI, GCE, ICC, PBD, MHD, HD, AVD,
};

inline constexpr std::size_t kMetricCount = 20;

inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {
    Metric::DICE, Metric::JAC, Metric::MSI, Metric::TPR, Metric::TNR, Metric::FPR, Metric::PPV,
    Metric::ACC,  Metric::AUC, Metric::VS,  Metric::KAP, Metric::ARI, Metric::MI,  Metric::VOI,
    Metric::GCE,  Metric::ICC, Metric::PBD, Metric::MHD, Metric::HD,  Metric::AVD};

inline constexpr std::array<std::string_view, kMetricCount> kMetricSymbols = {
    "DICE", "JAC", "MSI", "TPR", "TNR", "FPR", "PPV", "ACC", "AUC", "VS",
    "KAP",  "ARI", "MI",  "VOI", "GCE", "ICC", "PBD", "MHD", "HD",  "AVD"};

enum class Direction { higher_is_better, lower_is_better };

inline constexpr std::array<Direction, kMetricCount> kMetricDirections = [] {
  std::array<Direction, kMetricCount> d{};
  d.fill(Direction::higher_is_better);
  for (Metric m : {Metric::FPR, Metric::VOI, Metric::GCE, Metric::PBD, Metric::MHD, Metric::HD, Metric::AVD})
    d[static_cast<std::size_t>(m)] = Direction::lower_is_better;
  return d;
}();

inline std::string_view symbol(Metric m) { return kMetricSymbols[static_cast<std::size_t>(m)]; }
inline Direction direction(Metric m) { return kMetricDirections[static_cast<std::size_t>(m)]; }
inline char direction_sign(Metric m) { return direction(m) == Direction::higher_is_better ? '+' : '-'; }

inline std::optional<Metric> metric_from_symbol(std::string_view s) {
  for (std::size_t i = 0; i < kMetricCount; ++i)
    if (kMetricSymbols[i] == s) return kAllMetrics[i];
  return std::nullopt;
}

// A metric value, or the reason it could not be computed.
struct MetricValue {
  std::optional<double> value;
  std::string reason;

  static MetricValue of(double v) { return {v, {}}; }
  static MetricValue undefined(std::string why) { return {std::nullopt, std::move(why)}; }

  bool defined() const { return value.has_value(); }
  friend bool operator==(const MetricValue&, const MetricValue&) = default;
};

struct MetricReport {
  std::array<MetricValue, kMetricCount> values;

  MetricValue& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
  const MetricValue& operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }

  // Throws when the metric is undefined.
  double get(Metric m) const {
    const auto& v = (*this)[m];
    if (!v.value) throw Error(ErrorKind::invalid_argument, std::string(symbol(m)) + " is undefined: " + v.reason);
    return *v.value;
  }

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline void require_same_frame(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorKind::dimension_mismatch,
                "frame mismatch: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

inline ConfusionCounts confusion(const BinaryMask& truth, const BinaryMask& pred) {
  require_same_frame(truth, pred);
  ConfusionCounts c;
  const auto t = truth.data();
  const auto p = pred.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i]) {
      if (p[i]) ++c.tp; else ++c.fn;
    } else {
      if (p[i]) ++c.fp; else ++c.tn;
    }
  }
  return c;
}

namespace detail {

inline double plogp(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace detail

// Count-based metrics. Fills DICE, JAC, TPR, TNR, FPR, PPV, ACC, AUC, VS,
// KAP, ARI, MI, VOI, GCE, ICC and PBD; leaves MSI, MHD, HD, AVD untouched.
// Entropies are in bits.
inline void count_metrics(const ConfusionCounts& c, MetricReport& r) {
  if (c.total() == 0) throw Error(ErrorKind::invalid_argument, "all confusion counts are zero");
  const double tp = double(c.tp), fp = double(c.fp), fn = double(c.fn), tn = double(c.tn);
  const double n = double(c.total());

  auto ratio = [](double num, double den, const char* why) {
    return den > 0 ? MetricValue::of(num / den) : MetricValue::undefined(why);
  };

  r[Metric::DICE] = ratio(2 * tp, 2 * tp + fp + fn, "both masks empty");
  r[Metric::JAC] = ratio(tp, tp + fp + fn, "both masks empty");
  r[Metric::TPR] = ratio(tp, tp + fn, "truth mask empty");
  r[Metric::TNR] = ratio(tn, tn + fp, "truth has no background");
  r[Metric::FPR] = ratio(fp, fp + tn, "truth has no background");
  r[Metric::PPV] = ratio(tp, tp + fp, "prediction empty");
  r[Metric::ACC] = MetricValue::of((tp + tn) / n);
  if (tp + fn > 0 && tn + fp > 0) {
    r[Metric::AUC] = MetricValue::of(1.0 - (fp / (fp + tn) + fn / (fn + tp)) / 2.0);
  } else {
    r[Metric::AUC] = MetricValue::undefined("truth lacks a foreground or background class");
  }
  r[Metric::VS] = ratio(2 * tp + fp + fn - std::abs(fn - fp), 2 * tp + fp + fn, "both masks empty");

  // Cohen's kappa with chance agreement from the marginals.
  {
    const double fa = tp + tn;
    const double fc = ((tn + fn) * (tn + fp) + (fp + tp) * (fn + tp)) / n;
    r[Metric::KAP] = n - fc != 0 ? MetricValue::of((fa - fc) / (n - fc))
                                 : MetricValue::undefined("chance agreement is 1 (single-class frame)");
  }

  // Adjusted Rand index over the n(n-1)/2 pixel pairs.
  {
    const double a = 0.5 * (tp * (tp - 1) + fp * (fp - 1) + tn * (tn - 1) + fn * (fn - 1));
    const double sq = tp * tp + tn * tn + fp * fp + fn * fn;
    const double b = 0.5 * ((tp + fn) * (tp + fn) + (tn + fp) * (tn + fp) - sq);
    const double cc = 0.5 * ((tp + fp) * (tp + fp) + (tn + fn) * (tn + fn) - sq);
    const double d = n * (n - 1) / 2 - (a + b + cc);
    const double den = cc * cc + b * b + 2 * a * d + (a + d) * (cc + b);
    r[Metric::ARI] = den != 0 ? MetricValue::of(2 * (a * d - b * cc) / den)
                              : MetricValue::undefined("no pixel pairs to compare");
  }

  // Mutual information and variation of information.
  {
    using detail::plogp;
    const double h_truth = -(plogp((tp + fn) / n) + plogp((tn + fp) / n));
    const double h_pred = -(plogp((tp + fp) / n) + plogp((tn + fn) / n));
    const double h_joint = -(plogp(tp / n) + plogp(fn / n) + plogp(fp / n) + plogp(tn / n));
    r[Metric::MI] = MetricValue::of(std::max(0.0, h_truth + h_pred - h_joint));
    r[Metric::VOI] = MetricValue::of(std::max(0.0, 2 * h_joint - h_truth - h_pred));
  }

  // Global consistency error; 0/0 terms are 0.
  {
    auto term = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    const double e1 = term(fn * (fn + 2 * tp), tp + fn) + term(fp * (fp + 2 * tn), tn + fp);
    const double e2 = term(fp * (fp + 2 * tp), tp + fp) + term(fn * (fn + 2 * tn), tn + fn);
    r[Metric::GCE] = MetricValue::of(std::min(e1, e2) / n);
  }

  // One-way ICC over pixels with two raters. Squares are taken about zero
  // rather than the grand mean; see docs/metrics.md.
  {
    const double ms_between = 2.0 * (tp + (fp + fn) / 4.0) / (n > 1 ? n - 1 : 1);
    const double ms_within = (fp + fn) / (2.0 * n);
    r[Metric::ICC] = ms_between + ms_within > 0
                         ? MetricValue::of((ms_between - ms_within) / (ms_between + ms_within))
                         : MetricValue::undefined("both masks empty");
  }

  // Probabilistic distance; -1 by convention when the masks do not overlap.
  r[Metric::PBD] = tp > 0 ? MetricValue::of((fp + fn) / (2 * tp)) : MetricValue::of(-1.0);
}

inline MetricReport count_metrics(const ConfusionCounts& c) {
  MetricReport r;
  for (Metric m : {Metric::MSI, Metric::MHD, Metric::HD, Metric::AVD}) r[m] = MetricValue::undefined("not computed");
  count_metrics(c, r);
  return r;
}

struct BoundaryDistances {
  double hd = 0.0;
  double avd = 0.0;
};

namespace detail {

inline std::vector<std::uint8_t> boundary_sites(const BinaryMask& m) {
  std::vector<std::uint8_t> s(m.size(), 0);
  for (const auto& p : boundary_pixels(m)) s[static_cast<std::size_t>(p.y) * m.width() + p.x] = 1;
  return s;
}

// max and mean over `from` boundary pixels (raster order) of the distance to
// the nearest `to` boundary pixel.
inline std::pair<double, double> directed(const BinaryMask& from, const std::vector<double>& d2_to) {
  double mx = 0.0, sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : boundary_pixels(from)) {
    const double d = std::sqrt(d2_to[static_cast<std::size_t>(p.y) * from.width() + p.x]);
    mx = std::max(mx, d);
    sum += d;
    ++n;
  }
  return {mx, sum / static_cast<double>(n)};
}

}  // namespace detail

// Hausdorff distance and average Hausdorff distance (max of the two directed
// mean distances) between the boundary pixel sets of two non-empty masks.
inline BoundaryDistances boundary_distances(const BinaryMask& truth, const BinaryMask& pred) {
  require_same_frame(truth, pred);
  if (!truth.any() || !pred.any()) throw Error(ErrorKind::empty_mask, "boundary distances need non-empty masks");
  const auto d2_truth = squared_distance_transform(truth.width(), truth.height(), detail::boundary_sites(truth));
  const auto d2_pred = squared_distance_transform(pred.width(), pred.height(), detail::boundary_sites(pred));
  const auto [hd_tp, avd_tp] = detail::directed(truth, d2_pred);
  const auto [hd_pt, avd_pt] = detail::directed(pred, d2_truth);
  return {std::max(hd_tp, hd_pt), std::max(avd_tp, avd_pt)};
}

// Mahalanobis distance between the foreground pixel clouds, using the
// size-weighted pooled (population) covariance. Moments are accumulated in
// integers so the result is exactly translation invariant.
inline MetricValue mahalanobis(const BinaryMask& truth, const BinaryMask& pred) {
  require_same_frame(truth, pred);
  struct Moments {
    __int128 n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  };
  auto moments = [](const BinaryMask& m) {
    Moments mo;
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x)
        if (m.at(x, y)) {
          ++mo.n;
          mo.sx += x;
          mo.sy += y;
          mo.sxx += static_cast<__int128>(x) * x;
          mo.syy += static_cast<__int128>(y) * y;
          mo.sxy += static_cast<__int128>(x) * y;
        }
    return mo;
  };
  const Moments a = moments(truth), b = moments(pred);
  if (a.n == 0 || b.n == 0) return MetricValue::undefined("empty mask");

  // Mean difference: (sa*nb - sb*na) / (na*nb), exact numerators.
  const double nanb = double(a.n) * double(b.n);
  const double dx = double(a.sx * b.n - b.sx * a.n) / nanb;
  const double dy = double(a.sy * b.n - b.sy * a.n) / nanb;
  if (dx == 0.0 && dy == 0.0) return MetricValue::of(0.0);

  // n^2 * population covariance = n*sxy - sx*sy, exact.
  auto cov = [](const Moments& m, __int128 sxy, __int128 s1, __int128 s2) {
    return double(m.n * sxy - s1 * s2) / (double(m.n) * double(m.n));
  };
  const double w = double(a.n + b.n);
  const double sxx = (double(a.n) * cov(a, a.sxx, a.sx, a.sx) + double(b.n) * cov(b, b.sxx, b.sx, b.sx)) / w;
  const double syy = (double(a.n) * cov(a, a.syy, a.sy, a.sy) + double(b.n) * cov(b, b.syy, b.sy, b.sy)) / w;
  const double sxy = (double(a.n) * cov(a, a.sxy, a.sx, a.sy) + double(b.n) * cov(b, b.sxy, b.sx, b.sy)) / w;
  const double det = sxx * syy - sxy * sxy;
  if (!(det > 0.0)) return MetricValue::undefined("pooled covariance is singular");
  const double q = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / det;
  return MetricValue::of(std::sqrt(std::max(0.0, q)));
}

// Distance-weighted similarity: every misclassified pixel is weighted by how
// far it lies beyond `tolerance` from the truth boundary (FP: distance to the
// nearest truth foreground pixel; FN: distance to the nearest truth
// background pixel, with the outside of the frame counting as background).
// MSI = TP / (TP + sum(w) / 2), w = max(0, d - tolerance).
inline MetricValue msi(const BinaryMask& truth, const BinaryMask& pred, double tolerance = 0.0) {
  require_same_frame(truth, pred);
  if (!truth.any() || !pred.any()) return MetricValue::undefined("empty mask");
  if (!(tolerance >= 0.0)) throw Error(ErrorKind::invalid_argument, "MSI tolerance must be non-negative");
  // One-pixel background ring stands in for the outside of the frame.
  const int w = truth.width() + 2, h = truth.height() + 2;
  std::vector<std::uint8_t> fg(static_cast<std::size_t>(w) * h, 0), bg(fg.size(), 1);
  for (int y = 0; y < truth.height(); ++y)
    for (int x = 0; x < truth.width(); ++x)
      if (truth.at(x, y)) {
        fg[static_cast<std::size_t>(y + 1) * w + x + 1] = 1;
        bg[static_cast<std::size_t>(y + 1) * w + x + 1] = 0;
      }
  const auto d2_fg = squared_distance_transform(w, h, fg);
  const auto d2_bg = squared_distance_transform(w, h, bg);
  double tp = 0.0, penalty = 0.0;
  for (int y = 0; y < truth.height(); ++y)
    for (int x = 0; x < truth.width(); ++x) {
      const bool t = truth.at(x, y), p = pred.at(x, y);
      const std::size_t i = static_cast<std::size_t>(y + 1) * w + x + 1;
      if (t && p) {
        tp += 1.0;
      } else if (t != p) {
        const double d = std::sqrt(t ? d2_bg[i] : d2_fg[i]);
        penalty += std::max(0.0, d - tolerance);
      }
    }
  if (tp + penalty / 2 == 0.0) return MetricValue::of(0.0);
  return MetricValue::of(tp / (tp + penalty / 2));
}

inline MetricReport distance_metrics(const BinaryMask& truth, const BinaryMask& pred) {
  require_same_frame(truth, pred);
  MetricReport r;
  for (auto& v : r.values) v = MetricValue::undefined("not computed");
  if (!truth.any() || !pred.any()) {
    const std::string why = !truth.any() ? "truth mask empty" : "prediction empty";
    r[Metric::HD] = r[Metric::AVD] = r[Metric::MHD] = MetricValue::undefined(why);
    return r;
  }
  const auto bd = boundary_distances(truth, pred);
  r[Metric::HD] = MetricValue::of(bd.hd);
  r[Metric::AVD] = MetricValue::of(bd.avd);
  r[Metric::MHD] = mahalanobis(truth, pred);
  return r;
}

struct EvaluationOptions {
  double msi_tolerance = 0.0;
};

inline MetricReport evaluate_all(const BinaryMask& truth, const BinaryMask& pred, const EvaluationOptions& opt = {}) {
  require_same_frame(truth, pred);
  MetricReport r = distance_metrics(truth, pred);
  count_metrics(confusion(truth, pred), r);
  r[Metric::MSI] = msi(truth, pred, opt.msi_tolerance);
  if (!r[Metric::MSI].defined()) r[Metric::MSI].reason = !truth.any() ? "truth mask empty" : "prediction empty";
  return r;
}

}  // namespace miss
