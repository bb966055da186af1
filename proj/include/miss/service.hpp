#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "miss/config_json.hpp"
#include "miss/contour.hpp"
#include "miss/error.hpp"
#include "miss/mask_io.hpp"
#include "miss/metrics.hpp"
#include "miss/synth.hpp"

namespace miss::service {

using Clock = std::chrono::steady_clock;

// Truth mask plus its contour, extracted once. Immutable after creation.
struct Session {
  std::string id;
  BinaryMask truth;
  Contour contour;
  MaskFormat format = MaskFormat::pgm;
  Clock::time_point created;
};

// Concurrent map of immutable sessions with an idle TTL.
class SessionStore {
 public:
  explicit SessionStore(std::chrono::seconds ttl = std::chrono::hours(1)) : ttl_(ttl) {}

  std::shared_ptr<const Session> create(std::span<const std::uint8_t> mask_bytes, Clock::time_point now = Clock::now()) {
    auto s = std::make_shared<Session>();
    s->format = detect_format(mask_bytes);
    s->truth = decode_mask(mask_bytes);
    if (!s->truth.any()) throw Error(ErrorKind::empty_mask, "empty mask", "create_session");
    s->contour = extract_contour(s->truth);
    s->created = now;
    std::unique_lock lock(mutex_);
    purge_locked(now);
    do {
      s->id = new_id();
    } while (entries_.count(s->id));
    entries_[s->id] = {s, now};
    return s;
  }

  std::shared_ptr<const Session> get(const std::string& id, Clock::time_point now = Clock::now()) {
    std::unique_lock lock(mutex_);
    purge_locked(now);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw Error(ErrorKind::not_found, "session '" + id + "' not found");
    it->second.last_access = now;
    return it->second.session;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }

  std::chrono::seconds ttl() const { return ttl_; }

  void purge_expired(Clock::time_point now = Clock::now()) {
    std::unique_lock lock(mutex_);
    purge_locked(now);
  }

 private:
  struct Entry {
    std::shared_ptr<const Session> session;
    Clock::time_point last_access;
  };

  void purge_locked(Clock::time_point now) {
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (now - it->second.last_access > ttl_) it = entries_.erase(it);
      else ++it;
    }
  }

  std::string new_id() {
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 2; ++i) {
      std::uint64_t v = (std::uint64_t(rd_()) << 32) ^ rd_();
      for (int k = 0; k < 16; ++k, v >>= 4) id += hex[v & 15];
    }
    return id;
  }

  std::chrono::seconds ttl_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
  std::random_device rd_;
};

// Alternating run lengths over the row-major mask, starting with background.
inline std::vector<std::uint32_t> run_length_encode(const BinaryMask& mask) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t len = 0;
  for (auto v : mask.data()) {
    if (v != current) {
      runs.push_back(len);
      current = v;
      len = 0;
    }
    ++len;
  }
  runs.push_back(len);
  return runs;
}

inline BinaryMask run_length_decode(int width, int height, const std::vector<std::uint32_t>& runs) {
  BinaryMask m(width, height);
  std::size_t pos = 0;
  bool on = false;
  for (auto r : runs) {
    if (pos + r > m.size()) throw Error(ErrorKind::invalid_argument, "run lengths exceed the frame");
    for (std::uint32_t k = 0; k < r; ++k, ++pos)
      if (on) m.set(static_cast<int>(pos % width), static_cast<int>(pos / width));
    on = !on;
  }
  if (pos != m.size()) throw Error(ErrorKind::invalid_argument, "run lengths do not cover the frame");
  return m;
}

struct PreviewRequest {
  ExplicitParams params;
  std::uint64_t seed = 0;
};

// Parses a preview/export body. Throws invalid_argument listing every bad field.
inline PreviewRequest parse_preview_request(const json& body, std::vector<std::string>& bad_fields) {
  PreviewRequest req;
  req.params = explicit_params_from_json(body, bad_fields);
  if (body.is_object() && body.contains("seed")) {
    const auto& s = body.at("seed");
    if (s.is_number_unsigned()) req.seed = s.get<std::uint64_t>();
    else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) req.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    else bad_fields.push_back("seed");
  }
  return req;
}

struct PreviewResult {
  Contour contour;
  BinaryMask mask;
  MetricReport report;
  Provenance provenance;
};

inline PreviewResult preview(const Session& session, const PreviewRequest& req) {
  SeededRng rng(req.seed);
  auto res = synthesize_explicit(session.contour, session.truth.width(), session.truth.height(), req.params, rng);
  res.provenance.seed = req.seed;
  res.provenance.segmentor_id = "interactive";
  MetricReport report = evaluate_all(session.truth, res.mask);
  return {std::move(res.contour), std::move(res.mask), std::move(report), std::move(res.provenance)};
}

inline json preview_json(const PreviewResult& r) {
  return {{"contour", to_json(r.contour)},
          {"mask", {{"width", r.mask.width()}, {"height", r.mask.height()}, {"runs", run_length_encode(r.mask)}}},
          {"metrics", to_json(r.report)},
          {"provenance", to_json(r.provenance)}};
}

struct ExportResult {
  std::string filename;
  std::vector<std::uint8_t> mask_file;
  json provenance;
};

inline ExportResult export_mask(const Session& session, const PreviewRequest& req) {
  auto r = preview(session, req);
  ExportResult out;
  out.filename = "synthetic_" + std::to_string(req.seed) + extension(session.format);
  out.mask_file = encode_mask(r.mask, session.format);
  out.provenance = to_json(r.provenance);
  out.provenance["parameters"] = to_json(req.params);
  return out;
}

inline std::string base64_encode(std::span<const std::uint8_t> in) {
  static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
    for (int k = 18; k >= 0; k -= 6) out += table[(v >> k) & 63];
  }
  if (i < in.size()) {
    std::uint32_t v = in[i] << 16;
    if (i + 1 < in.size()) v |= in[i + 1] << 8;
    out += table[(v >> 18) & 63];
    out += table[(v >> 12) & 63];
    out += i + 1 < in.size() ? table[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view in) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : in) {
    const int v = val(c);
    if (v < 0) continue;
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace miss::service
