#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "miss/error.hpp"
#include "miss/mask_io.hpp"
#include "miss/metrics.hpp"
#include "miss/synth.hpp"

namespace miss {

using nlohmann::json;

// ------------------------------------------------------------------ helpers

namespace detail {

[[noreturn]] inline void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::invalid_argument, "config field '" + field + "': " + why, "config");
}

inline double number(const json& j, const std::string& field) {
  if (!j.is_number()) bad_field(field, "expected a number");
  return j.get<double>();
}

// Accepts a number (lo == hi), a [lo, hi] pair, or null / absent (fallback).
inline Range<double> range(const json& parent, const char* key, const std::string& field, Range<double> fallback) {
  if (!parent.contains(key) || parent.at(key).is_null()) return fallback;
  const json& j = parent.at(key);
  if (j.is_number()) return {j.get<double>(), j.get<double>()};
  if (j.is_array() && j.size() == 2) {
    Range<double> r{number(j[0], field), number(j[1], field)};
    if (r.lo > r.hi) bad_field(field, "range lower bound exceeds upper bound");
    return r;
  }
  bad_field(field, "expected a number or a [lo, hi] pair");
}

inline json range_json(const Range<double>& r) {
  if (r.lo == r.hi) return r.lo;
  return json::array({r.lo, r.hi});
}

inline SpiculationMode parse_mode(const std::string& s) {
  if (s == "none") return SpiculationMode::none;
  if (s == "outward") return SpiculationMode::outward;
  if (s == "inward") return SpiculationMode::inward;
  if (s == "mixture") return SpiculationMode::mixture;
  bad_field("spiculation.mode", "unknown mode '" + s + "'");
}

inline Stage parse_stage(const std::string& s) {
  if (s == "fourier") return Stage::fourier;
  if (s == "spiculation") return Stage::spiculation;
  if (s == "affine") return Stage::affine;
  bad_field("stage_order", "unknown stage '" + s + "'");
}

inline json stage_list(const std::vector<Stage>& order) {
  json a = json::array();
  for (Stage s : order) a.push_back(to_string(s));
  return a;
}

}  // namespace detail

// ------------------------------------------------------------------ SegmentorConfig
//
// Schema (percentages and degrees as in the segmentor table):
//   id                              string
//   fourier.detail_pct              % of descriptors kept
//   fourier.range_pct_of_detail     % of the kept descriptors that are perturbed
//   fourier.magnitude               perturbation scale m
//   affine.resize_pct               number, or resize_x_pct / resize_y_pct
//   affine.shift_px                 0 or [lo, hi] shift length, random direction
//   affine.rotate_deg               optional, default 0
//   spiculation.mode                none | outward | inward | mixture
//   spiculation.count               [lo, hi]
//   spiculation.center_deg          [lo, hi) or null
//   spiculation.height_px           signed [lo, hi]
//   spiculation.width_deg           [lo, hi]
//   stage_order                     optional, default [fourier, spiculation, affine]

inline SegmentorConfig segmentor_from_json(const json& j) {
  if (!j.is_object()) detail::bad_field("segmentor", "expected an object");
  SegmentorConfig c;
  c.id = j.contains("id") ? (j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump()) : "";
  if (c.id.empty()) detail::bad_field("id", "missing");

  const json fd = j.value("fourier", json::object());
  const double detail_pct = fd.contains("detail_pct") ? detail::number(fd.at("detail_pct"), "fourier.detail_pct") : 100.0;
  const double range_pct = fd.contains("range_pct_of_detail")
                               ? detail::number(fd.at("range_pct_of_detail"), "fourier.range_pct_of_detail")
                               : 0.0;
  c.fd.detail = detail_pct / 100.0;
  c.fd.range = (range_pct / 100.0) * c.fd.detail;
  c.fd.magnitude = fd.contains("magnitude") ? detail::number(fd.at("magnitude"), "fourier.magnitude") : 0.0;

  const json af = j.value("affine", json::object());
  const double resize = af.contains("resize_pct") ? detail::number(af.at("resize_pct"), "affine.resize_pct") : 100.0;
  c.resize_x = (af.contains("resize_x_pct") ? detail::number(af.at("resize_x_pct"), "affine.resize_x_pct") : resize) / 100.0;
  c.resize_y = (af.contains("resize_y_pct") ? detail::number(af.at("resize_y_pct"), "affine.resize_y_pct") : resize) / 100.0;
  c.shift = detail::range(af, "shift_px", "affine.shift_px", {0.0, 0.0});
  c.rotate = degrees_to_radians(af.contains("rotate_deg") ? detail::number(af.at("rotate_deg"), "affine.rotate_deg") : 0.0);

  const json sp = j.value("spiculation", json::object());
  c.spiculation_mode = detail::parse_mode(sp.value("mode", std::string("none")));
  if (sp.contains("count") && !sp.at("count").is_null()) {
    const auto r = detail::range(sp, "count", "spiculation.count", {0, 0});
    c.spiculation_count = {static_cast<int>(r.lo), static_cast<int>(r.hi)};
  }
  c.spiculation_center = detail::range(sp, "center_deg", "spiculation.center_deg", {0.0, 360.0});
  c.spiculation_height = detail::range(sp, "height_px", "spiculation.height_px", {0.0, 0.0});
  c.spiculation_width = detail::range(sp, "width_deg", "spiculation.width_deg", {0.0, 0.0});

  if (j.contains("stage_order")) {
    c.stage_order.clear();
    for (const auto& s : j.at("stage_order")) c.stage_order.push_back(detail::parse_stage(s.get<std::string>()));
  }
  if (auto bad = validate(c); !bad.empty()) detail::bad_field(bad.front(), "invalid value");
  return c;
}

inline json to_json(const SegmentorConfig& c) {
  json j;
  j["id"] = c.id;
  j["fourier"] = {{"detail_pct", c.fd.detail * 100.0},
                  {"range_pct_of_detail", c.fd.detail > 0 ? c.fd.range / c.fd.detail * 100.0 : 0.0},
                  {"magnitude", c.fd.magnitude}};
  j["affine"] = {{"resize_x_pct", c.resize_x * 100.0},
                 {"resize_y_pct", c.resize_y * 100.0},
                 {"shift_px", detail::range_json(c.shift)},
                 {"rotate_deg", c.rotate * 180.0 / std::numbers::pi}};
  j["spiculation"] = {{"mode", to_string(c.spiculation_mode)},
                      {"count", json::array({c.spiculation_count.lo, c.spiculation_count.hi})},
                      {"center_deg", detail::range_json(c.spiculation_center)},
                      {"height_px", detail::range_json(c.spiculation_height)},
                      {"width_deg", detail::range_json(c.spiculation_width)}};
  j["stage_order"] = detail::stage_list(c.stage_order);
  return j;
}

// A file holds either one segmentor object or {"segmentors": [...]}.
inline std::vector<SegmentorConfig> segmentors_from_json(const json& j) {
  std::vector<SegmentorConfig> out;
  if (j.is_object() && j.contains("segmentors")) {
    for (const auto& s : j.at("segmentors")) out.push_back(segmentor_from_json(s));
  } else if (j.is_array()) {
    for (const auto& s : j) out.push_back(segmentor_from_json(s));
  } else {
    out.push_back(segmentor_from_json(j));
  }
  if (out.empty()) throw Error(ErrorKind::invalid_argument, "no segmentor configs", "config");
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t k = i + 1; k < out.size(); ++k)
      if (out[i].id == out[k].id) throw Error(ErrorKind::invalid_argument, "duplicate segmentor id " + out[i].id, "config");
  return out;
}

inline json parse_json_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::invalid_argument, "cannot parse " + what + ": " + e.what());
  }
}

inline std::vector<SegmentorConfig> load_segmentors(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return segmentors_from_json(parse_json_text({reinterpret_cast<const char*>(bytes.data()), bytes.size()}, path.string()));
}

// ------------------------------------------------------------------ explicit params

inline json to_json(const ExplicitParams& p) {
  json sp = json::array();
  for (const auto& s : p.spiculations) sp.push_back({{"center", s.center}, {"height", s.height}, {"width", s.width}});
  return {{"fd", {{"detail", p.fd.detail}, {"range", p.fd.range}, {"magnitude", p.fd.magnitude}}},
          {"spiculations", sp},
          {"affine",
           {{"resize_x", p.affine.resize_x},
            {"resize_y", p.affine.resize_y},
            {"shift_dx", p.affine.shift_dx},
            {"shift_dy", p.affine.shift_dy},
            {"rotate", p.affine.rotate}}},
          {"stage_order", detail::stage_list(p.stage_order)}};
}

// Parses preview/export parameters (radians and fractions). Every malformed
// field is collected into `bad` rather than failing on the first.
inline ExplicitParams explicit_params_from_json(const json& j, std::vector<std::string>& bad) {
  ExplicitParams p;
  auto num = [&](const json& parent, const char* key, double fallback, const std::string& field) {
    if (!parent.is_object() || !parent.contains(key)) return fallback;
    if (!parent.at(key).is_number()) {
      bad.push_back(field);
      return fallback;
    }
    return parent.at(key).get<double>();
  };
  if (!j.is_object()) {
    bad.push_back("body");
    return p;
  }
  const json fd = j.value("fd", json::object());
  p.fd.detail = num(fd, "detail", 1.0, "fd.detail");
  p.fd.range = num(fd, "range", 0.0, "fd.range");
  p.fd.magnitude = num(fd, "magnitude", 0.0, "fd.magnitude");
  if (j.contains("spiculations")) {
    if (!j.at("spiculations").is_array()) {
      bad.push_back("spiculations");
    } else {
      std::size_t i = 0;
      for (const auto& s : j.at("spiculations")) {
        const std::string prefix = "spiculations[" + std::to_string(i++) + "]";
        p.spiculations.push_back({num(s, "center", 0.0, prefix + ".center"), num(s, "height", 0.0, prefix + ".height"),
                                  num(s, "width", 0.0, prefix + ".width")});
      }
    }
  }
  const json af = j.value("affine", json::object());
  p.affine.resize_x = num(af, "resize_x", 1.0, "affine.resize_x");
  p.affine.resize_y = num(af, "resize_y", 1.0, "affine.resize_y");
  p.affine.shift_dx = num(af, "shift_dx", 0.0, "affine.shift_dx");
  p.affine.shift_dy = num(af, "shift_dy", 0.0, "affine.shift_dy");
  p.affine.rotate = num(af, "rotate", 0.0, "affine.rotate");
  if (j.contains("stage_order")) {
    p.stage_order.clear();
    try {
      for (const auto& s : j.at("stage_order")) p.stage_order.push_back(detail::parse_stage(s.get<std::string>()));
    } catch (const std::exception&) {
      bad.push_back("stage_order");
    }
  }
  for (auto& b : validate(p))
    if (std::find(bad.begin(), bad.end(), b) == bad.end()) bad.push_back(b);
  return p;
}

// ------------------------------------------------------------------ provenance / reports

inline json to_json(const Provenance& p) {
  json draws = json::array();
  for (const auto& d : p.fd_draws) draws.push_back({{"index", d.index}, {"r", d.r}, {"s", d.s}});
  json sp = json::array();
  for (const auto& s : p.spiculations) sp.push_back({{"center", s.center}, {"height", s.height}, {"width", s.width}});
  return {{"seed", p.seed},
          {"segmentor", p.segmentor_id},
          {"stage_order", detail::stage_list(p.stage_order)},
          {"contour_points", p.contour_points},
          {"fd",
           {{"detail", p.fd.detail},
            {"range", p.fd.range},
            {"magnitude", p.fd.magnitude},
            {"kept", p.fd_counts.kept},
            {"perturbed", p.fd_counts.perturbed},
            {"draws", draws}}},
          {"spiculations", sp},
          {"affine",
           {{"resize_x", p.affine.resize_x},
            {"resize_y", p.affine.resize_y},
            {"shift_dx", p.affine.shift_dx},
            {"shift_dy", p.affine.shift_dy},
            {"rotate", p.affine.rotate},
            {"shift_length", p.shift_length},
            {"shift_direction", p.shift_direction}}}};
}

inline json to_json(const MetricReport& r) {
  json j = json::object();
  for (Metric m : kAllMetrics) {
    const auto& v = r[m];
    json e = {{"direction", std::string(1, direction_sign(m))}};
    if (v.value) {
      e["value"] = *v.value;
    } else {
      e["value"] = nullptr;
      e["reason"] = v.reason;
    }
    j[std::string(symbol(m))] = e;
  }
  return j;
}

inline json to_json(const Contour& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(json::array({p.x, p.y}));
  return pts;
}

}  // namespace miss
