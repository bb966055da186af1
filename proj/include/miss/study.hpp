#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "miss/config_json.hpp"
#include "miss/error.hpp"
#include "miss/mask_io.hpp"
#include "miss/metrics.hpp"
#include "miss/rng.hpp"
#include "miss/synth.hpp"

namespace miss {

// ================================================================== battery

struct CorpusEntry {
  std::string patient_id;
  BinaryMask truth;
};

struct BatteryCell {
  std::string patient_id;
  std::string segmentor_id;
  std::optional<MetricReport> report;
  std::optional<Provenance> provenance;
  std::optional<BinaryMask> mask;  // only with BatteryOptions::keep_masks
  std::string error_stage;
  std::string error;

  bool ok() const { return report.has_value(); }
};

struct BatteryStore {
  std::uint64_t master_seed = 0;
  std::vector<std::string> patients;
  std::vector<std::string> segmentors;
  std::vector<BatteryCell> cells;  // patient-major, then segmentor order

  const BatteryCell& cell(std::size_t patient, std::size_t segmentor) const {
    return cells[patient * segmentors.size() + segmentor];
  }
};

struct BatteryOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  bool keep_masks = false;
  EvaluationOptions evaluation;
};

inline void check_id(const std::string& id, const char* what) {
  if (id.empty() || id.find_first_of(",\n\r\"") != std::string::npos)
    throw Error(ErrorKind::invalid_argument, std::string(what) + " id '" + id + "' is empty or contains , \" or newline");
}

// Synthesises and evaluates every (patient, segmentor) cell. A failing cell
// records its error and the batch carries on. Cells are independent; each
// uses its own stream seeded from (master_seed, patient, segmentor).
inline BatteryStore run_battery(const std::vector<CorpusEntry>& corpus, const std::vector<SegmentorConfig>& configs,
                                std::uint64_t master_seed, const BatteryOptions& options = {}) {
  if (corpus.empty()) throw Error(ErrorKind::invalid_argument, "empty truth corpus");
  if (configs.empty()) throw Error(ErrorKind::invalid_argument, "no segmentor configs");
  BatteryStore store;
  store.master_seed = master_seed;
  auto add_unique = [](std::vector<std::string>& ids, const std::string& id, const char* what) {
    check_id(id, what);
    if (std::find(ids.begin(), ids.end(), id) != ids.end())
      throw Error(ErrorKind::invalid_argument, std::string("duplicate ") + what + " id '" + id + "'");
    ids.push_back(id);
  };
  for (const auto& e : corpus) add_unique(store.patients, e.patient_id, "patient");
  for (const auto& c : configs) add_unique(store.segmentors, c.id, "segmentor");
  const std::size_t s = configs.size();
  store.cells.resize(corpus.size() * s);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < store.cells.size(); i = next++) {
      const auto& entry = corpus[i / s];
      const auto& config = configs[i % s];
      BatteryCell& cell = store.cells[i];
      cell.patient_id = entry.patient_id;
      cell.segmentor_id = config.id;
      try {
        auto res = synthesize(entry.truth, config, cell_seed(master_seed, entry.patient_id, config.id));
        cell.report = evaluate_all(entry.truth, res.mask, options.evaluation);
        cell.provenance = std::move(res.provenance);
        if (options.keep_masks) cell.mask = std::move(res.mask);
      } catch (const Error& e) {
        cell.error_stage = e.stage();
        cell.error = e.what();
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, store.cells.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return store;
}

inline std::string format_value(const MetricValue& v) { return v.value ? format_number(*v.value) : "NA"; }

// patient,segmentor,status,DICE,...,AVD
inline std::string reports_csv(const BatteryStore& store) {
  std::string out = "patient,segmentor,status";
  for (auto sym : kMetricSymbols) (out += ',') += sym;
  out += '\n';
  for (const auto& c : store.cells) {
    out += c.patient_id + "," + c.segmentor_id + "," + (c.ok() ? "ok" : "error");
    for (Metric m : kAllMetrics) {
      out += ',';
      out += c.ok() ? format_value((*c.report)[m]) : "NA";
    }
    out += '\n';
  }
  return out;
}

inline std::string provenance_jsonl(const BatteryStore& store) {
  std::string out;
  for (const auto& c : store.cells) {
    json j = {{"patient", c.patient_id}, {"segmentor", c.segmentor_id}};
    if (c.provenance) j["provenance"] = to_json(*c.provenance);
    if (!c.ok()) j["error"] = {{"stage", c.error_stage}, {"message", c.error}};
    out += j.dump() + '\n';
  }
  return out;
}

inline json store_manifest(const BatteryStore& store) {
  json failures = json::array();
  std::size_t ok = 0;
  for (const auto& c : store.cells) {
    if (c.ok()) {
      ++ok;
    } else {
      failures.push_back({{"patient", c.patient_id}, {"segmentor", c.segmentor_id}, {"stage", c.error_stage},
                          {"message", c.error}});
    }
  }
  return {{"master_seed", store.master_seed},
          {"patients", store.patients},
          {"segmentors", store.segmentors},
          {"cells", store.cells.size()},
          {"succeeded", ok},
          {"failures", failures},
          {"files", {"reports.csv", "provenance.jsonl"}}};
}

// Writes manifest.json, reports.csv, provenance.jsonl and, when masks were
// kept, masks/<patient>_<segmentor><ext>.
inline void write_store(const BatteryStore& store, const std::filesystem::path& dir,
                        MaskFormat mask_format = MaskFormat::pgm) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create store directory " + dir.string() + ": " + ec.message());
  write_text(dir / "manifest.json", store_manifest(store).dump(2) + "\n");
  write_text(dir / "reports.csv", reports_csv(store));
  write_text(dir / "provenance.jsonl", provenance_jsonl(store));
  bool any_mask = false;
  for (const auto& c : store.cells) any_mask = any_mask || c.mask.has_value();
  if (any_mask) {
    std::filesystem::create_directories(dir / "masks");
    for (const auto& c : store.cells)
      if (c.mask)
        save_mask(dir / "masks" / (c.patient_id + "_" + c.segmentor_id + extension(mask_format)), *c.mask, mask_format);
  }
}

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto p = line.find(sep, start);
    out.emplace_back(line.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  for (auto& s : out) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  }
  return out;
}

inline std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

inline std::string read_text(const std::filesystem::path& path) {
  const auto b = read_file(path);
  return {b.begin(), b.end()};
}

inline MetricValue parse_value(const std::string& s) {
  if (s == "NA" || s.empty()) return MetricValue::undefined("not available in store");
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorKind::invalid_argument, "bad metric value '" + s + "' in store");
  return MetricValue::of(v);
}

}  // namespace detail

// Reads reports.csv (and manifest.json when present) back into a store.
// Provenance and masks are not reloaded.
inline BatteryStore read_store(const std::filesystem::path& dir) {
  BatteryStore store;
  if (std::filesystem::exists(dir / "manifest.json")) {
    const json m = parse_json_text(detail::read_text(dir / "manifest.json"), "manifest.json");
    store.master_seed = m.value("master_seed", std::uint64_t{0});
  }
  const auto rows = detail::lines(detail::read_text(dir / "reports.csv"));
  if (rows.empty()) throw Error(ErrorKind::invalid_argument, "reports.csv is empty");
  const auto header = detail::split(rows[0]);
  if (header.size() != 3 + kMetricCount || header[0] != "patient")
    throw Error(ErrorKind::invalid_argument, "reports.csv header does not match the metric set");
  std::map<std::string, std::size_t> pidx, sidx;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto f = detail::split(rows[r]);
    if (f.size() != header.size())
      throw Error(ErrorKind::invalid_argument, "reports.csv line " + std::to_string(r + 1) + " has wrong field count");
    BatteryCell c;
    c.patient_id = f[0];
    c.segmentor_id = f[1];
    if (!pidx.count(c.patient_id)) {
      pidx[c.patient_id] = store.patients.size();
      store.patients.push_back(c.patient_id);
    }
    if (!sidx.count(c.segmentor_id)) {
      sidx[c.segmentor_id] = store.segmentors.size();
      store.segmentors.push_back(c.segmentor_id);
    }
    if (f[2] == "ok") {
      MetricReport rep;
      for (std::size_t k = 0; k < kMetricCount; ++k) {
        const auto m = metric_from_symbol(header[3 + k]);
        if (!m) throw Error(ErrorKind::invalid_argument, "unknown metric column " + header[3 + k]);
        rep[*m] = detail::parse_value(f[3 + k]);
      }
      c.report = rep;
    } else {
      c.error = "failed during battery run";
    }
    store.cells.push_back(std::move(c));
  }
  if (store.cells.size() != store.patients.size() * store.segmentors.size())
    throw Error(ErrorKind::invalid_argument, "reports.csv is not a complete patient x segmentor grid");
  // Reorder into patient-major grid order.
  std::vector<BatteryCell> grid(store.cells.size());
  for (auto& c : store.cells) grid[pidx[c.patient_id] * store.segmentors.size() + sidx[c.segmentor_id]] = std::move(c);
  store.cells = std::move(grid);
  return store;
}

// ================================================================== ranking

using RankRow = std::vector<int>;

// Competition ranking ("1224") under the metric's direction. Undefined
// values rank last (S).
inline RankRow rank_values(const std::vector<MetricValue>& values, Direction dir) {
  const std::size_t s = values.size();
  if (s < 2) throw Error(ErrorKind::invalid_argument, "ranking needs at least two segmentors");
  RankRow ranks(s);
  auto usable = [](const MetricValue& v) { return v.value && !std::isnan(*v.value); };
  for (std::size_t i = 0; i < s; ++i) {
    if (!usable(values[i])) {
      ranks[i] = static_cast<int>(s);
      continue;
    }
    int better = 0;
    for (std::size_t j = 0; j < s; ++j) {
      if (!usable(values[j])) continue;
      const double a = *values[i].value, b = *values[j].value;
      if (dir == Direction::higher_is_better ? b > a : b < a) ++better;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

// metrics x segmentors ranks for one patient.
using PatientRanks = std::vector<RankRow>;

inline PatientRanks rank_per_patient(const std::vector<MetricReport>& reports) {
  if (reports.size() < 2) throw Error(ErrorKind::invalid_argument, "ranking needs at least two segmentors");
  PatientRanks out;
  for (Metric m : kAllMetrics) {
    std::vector<MetricValue> vals;
    for (const auto& r : reports) vals.push_back(r[m]);
    out.push_back(rank_values(vals, direction(m)));
  }
  return out;
}

struct RankTable {
  std::vector<std::string> metrics;
  std::vector<std::string> segmentors;
  std::vector<RankRow> ranks;  // metrics x segmentors
};

// Most frequent rank per cell; ties go to the smaller rank.
inline RankTable mode_aggregate(const std::vector<PatientRanks>& patients, std::vector<std::string> metrics,
                                std::vector<std::string> segmentors) {
  if (patients.empty()) throw Error(ErrorKind::invalid_argument, "mode aggregation needs at least one patient");
  RankTable t{std::move(metrics), std::move(segmentors), {}};
  const std::size_t rows = patients.front().size();
  const std::size_t cols = rows ? patients.front().front().size() : 0;
  if (t.metrics.size() != rows || t.segmentors.size() != cols)
    throw Error(ErrorKind::invalid_argument, "rank matrix shape does not match labels");
  t.ranks.assign(rows, RankRow(cols, 0));
  std::vector<int> hist(cols + 2);
  for (std::size_t m = 0; m < rows; ++m)
    for (std::size_t s = 0; s < cols; ++s) {
      std::fill(hist.begin(), hist.end(), 0);
      for (const auto& p : patients) {
        if (p.size() != rows || p[m].size() != cols)
          throw Error(ErrorKind::invalid_argument, "patients have different rank matrix shapes");
        ++hist[static_cast<std::size_t>(std::clamp(p[m][s], 1, static_cast<int>(cols)))];
      }
      int best = 1;
      for (int r = 2; r <= static_cast<int>(cols); ++r)
        if (hist[r] > hist[best]) best = r;
      t.ranks[m][s] = best;
    }
  return t;
}

inline std::vector<std::string> all_metric_symbols() { return {kMetricSymbols.begin(), kMetricSymbols.end()}; }

// Per-patient ranking and mode aggregation over a battery store. Patients
// with any failed cell are ranked with that cell's metrics undefined.
inline RankTable mode_ranks(const BatteryStore& store) {
  std::vector<PatientRanks> all;
  for (std::size_t p = 0; p < store.patients.size(); ++p) {
    std::vector<MetricReport> reports;
    for (std::size_t s = 0; s < store.segmentors.size(); ++s) {
      const auto& c = store.cell(p, s);
      if (c.report) {
        reports.push_back(*c.report);
      } else {
        MetricReport r;
        for (auto& v : r.values) v = MetricValue::undefined("synthesis failed");
        reports.push_back(r);
      }
    }
    all.push_back(rank_per_patient(reports));
  }
  return mode_aggregate(all, all_metric_symbols(), store.segmentors);
}

inline std::string rank_table_csv(const RankTable& t) {
  std::string out = "metric";
  for (const auto& s : t.segmentors) (out += ',') += s;
  out += '\n';
  for (std::size_t m = 0; m < t.metrics.size(); ++m) {
    out += t.metrics[m];
    for (int r : t.ranks[m]) (out += ',') += std::to_string(r);
    out += '\n';
  }
  return out;
}

inline RankTable parse_rank_table_csv(const std::string& text) {
  const auto rows = detail::lines(text);
  if (rows.size() < 2) throw Error(ErrorKind::invalid_argument, "rank table needs a header and at least one row");
  RankTable t;
  auto header = detail::split(rows[0]);
  t.segmentors.assign(header.begin() + 1, header.end());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto f = detail::split(rows[r]);
    if (f.size() != header.size())
      throw Error(ErrorKind::invalid_argument, "rank table row " + std::to_string(r + 1) + " has wrong field count");
    t.metrics.push_back(f[0]);
    RankRow row;
    for (std::size_t k = 1; k < f.size(); ++k) row.push_back(std::stoi(f[k]));
    t.ranks.push_back(std::move(row));
  }
  return t;
}

// ================================================================== correlation

struct CorrelationMatrix {
  std::vector<std::string> metrics;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::string> warnings;

  const std::optional<double>& at(std::size_t i, std::size_t j) const { return values[i][j]; }
};

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= double(n);
  mb /= double(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// Pearson coefficient between every pair of metric rank rows.
inline CorrelationMatrix rank_correlation(const RankTable& table) {
  if (table.segmentors.size() < 2) throw Error(ErrorKind::invalid_argument, "correlation needs at least two segmentors");
  const std::size_t m = table.metrics.size();
  CorrelationMatrix c;
  c.metrics = table.metrics;
  c.values.assign(m, std::vector<std::optional<double>>(m));
  std::vector<std::vector<double>> rows;
  for (const auto& r : table.ranks) rows.emplace_back(r.begin(), r.end());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      std::optional<double> v = pearson(rows[i], rows[j]);
      if (i == j && v) v = 1.0;
      c.values[i][j] = c.values[j][i] = v;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (!c.values[i][i]) c.warnings.push_back(table.metrics[i] + " has constant ranks; its correlations are undefined");
  return c;
}

inline std::string correlation_csv(const CorrelationMatrix& c) {
  std::string out = "metric";
  for (const auto& s : c.metrics) (out += ',') += s;
  out += '\n';
  for (std::size_t i = 0; i < c.metrics.size(); ++i) {
    out += c.metrics[i];
    for (const auto& v : c.values[i]) (out += ',') += v ? format_number(*v) : "NA";
    out += '\n';
  }
  return out;
}

// ================================================================== grouping

struct MetricGroups {
  double threshold = 0.0;
  std::vector<std::vector<std::string>> groups;
  std::vector<std::string> warnings;
};

namespace detail {

// Position in the metric overview table; unknown symbols sort after, by name.
inline std::pair<std::size_t, std::string> canonical_key(const std::string& s) {
  if (auto m = metric_from_symbol(s)) return {static_cast<std::size_t>(*m), {}};
  return {kMetricCount, s};
}

}  // namespace detail

// Complete-linkage agglomeration: repeatedly merge the two groups whose
// weakest pairwise correlation is highest, while it stays >= threshold.
// Every pair inside a group therefore correlates at >= threshold. Undefined
// correlations count as -1. Output is independent of input metric order.
inline MetricGroups group_metrics(const CorrelationMatrix& matrix, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw Error(ErrorKind::invalid_argument, "grouping threshold must be in (0, 1]");
  const std::size_t m = matrix.metrics.size();
  MetricGroups out;
  out.threshold = threshold;

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::canonical_key(matrix.metrics[a]) < detail::canonical_key(matrix.metrics[b]);
  });

  bool undefined_seen = false;
  auto rho = [&](std::size_t a, std::size_t b) {
    const auto& v = matrix.values[a][b];
    if (!v) {
      undefined_seen = true;
      return -1.0;
    }
    return *v;
  };

  // Clusters hold original indices, kept in canonical order.
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i : order) clusters.push_back({i});
  while (true) {
    double best = -2.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double link = 2.0;
        for (std::size_t a : clusters[i])
          for (std::size_t b : clusters[j]) link = std::min(link, rho(a, b));
        if (link > best) {
          best = link;
          bi = i;
          bj = j;
        }
      }
    if (clusters.size() < 2 || best < threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(clusters[bi].begin(), clusters[bi].end(), [&](std::size_t a, std::size_t b) {
      return detail::canonical_key(matrix.metrics[a]) < detail::canonical_key(matrix.metrics[b]);
    });
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  if (undefined_seen) out.warnings.push_back("undefined correlations were treated as -1");
  for (const auto& c : clusters) {
    std::vector<std::string> names;
    for (std::size_t i : c) names.push_back(matrix.metrics[i]);
    out.groups.push_back(std::move(names));
  }
  return out;
}

// Groups plus the best/worst segmentors per group (lowest/highest mean rank
// over the group's rows).
inline json groups_json(const MetricGroups& g, const RankTable& table) {
  json groups = json::array();
  for (std::size_t k = 0; k < g.groups.size(); ++k) {
    const auto& names = g.groups[k];
    std::vector<double> mean(table.segmentors.size(), 0.0);
    for (const auto& name : names) {
      const auto it = std::find(table.metrics.begin(), table.metrics.end(), name);
      if (it == table.metrics.end()) continue;
      const auto& row = table.ranks[static_cast<std::size_t>(it - table.metrics.begin())];
      for (std::size_t s = 0; s < row.size(); ++s) mean[s] += row[s] / double(names.size());
    }
    json best = json::array(), worst = json::array();
    if (!mean.empty()) {
      const double lo = *std::min_element(mean.begin(), mean.end());
      const double hi = *std::max_element(mean.begin(), mean.end());
      for (std::size_t s = 0; s < mean.size(); ++s) {
        if (std::abs(mean[s] - lo) < 1e-9) best.push_back(table.segmentors[s]);
        if (std::abs(mean[s] - hi) < 1e-9) worst.push_back(table.segmentors[s]);
      }
    }
    groups.push_back({{"group", k + 1}, {"metrics", names}, {"best_segmentors", best}, {"worst_segmentors", worst}});
  }
  return {{"threshold", g.threshold}, {"groups", groups}, {"warnings", g.warnings}};
}

// ================================================================== range experiment

enum class RangeClass {
  attains_bounds,  // within [0, 1] and reaches both ends at best/worst
  within_unit,     // within [0, 1]
  exits_unit,      // some value outside [0, 1] or undefined
};

inline const char* to_string(RangeClass c) {
  switch (c) {
    case RangeClass::attains_bounds: return "attains_0_1";
    case RangeClass::within_unit: return "within_0_1";
    case RangeClass::exits_unit: return "exits_0_1";
  }
  return "?";
}

struct RangeTable {
  MetricReport best, middle, worst;
  std::array<RangeClass, kMetricCount> classes{};
};

inline RangeClass classify_range(Metric m, const MetricValue& best, const MetricValue& middle, const MetricValue& worst) {
  constexpr double eps = 1e-12;
  for (const auto* v : {&best, &middle, &worst})
    if (!v->value || *v->value < -eps || *v->value > 1 + eps) return RangeClass::exits_unit;
  const double b = *best.value, w = *worst.value;
  const bool higher = direction(m) == Direction::higher_is_better;
  const double top = higher ? 1.0 : 0.0, bottom = higher ? 0.0 : 1.0;
  if (std::abs(b - top) <= eps && std::abs(w - bottom) <= eps) return RangeClass::attains_bounds;
  return RangeClass::within_unit;
}

inline RangeTable range_experiment(const BinaryMask& truth, const BinaryMask& best, const BinaryMask& middle,
                                   const BinaryMask& worst, const EvaluationOptions& opt = {}) {
  require_same_frame(truth, best);
  require_same_frame(truth, middle);
  require_same_frame(truth, worst);
  if (!(best == truth)) throw Error(ErrorKind::invalid_argument, "best case must equal the truth mask");
  if (confusion(truth, worst).tp != 0) throw Error(ErrorKind::invalid_argument, "worst case must not overlap the truth");
  if (!worst.any()) throw Error(ErrorKind::invalid_argument, "worst case must be non-empty");
  RangeTable t{evaluate_all(truth, best, opt), evaluate_all(truth, middle, opt), evaluate_all(truth, worst, opt), {}};
  for (Metric m : kAllMetrics) t.classes[static_cast<std::size_t>(m)] = classify_range(m, t.best[m], t.middle[m], t.worst[m]);
  return t;
}

inline std::string range_table_csv(const RangeTable& t) {
  std::string out = "metric,direction,best,middle,worst,range\n";
  for (Metric m : kAllMetrics) {
    out += std::string(symbol(m)) + "," + direction_sign(m) + "," + format_value(t.best[m]) + "," +
           format_value(t.middle[m]) + "," + format_value(t.worst[m]) + "," +
           to_string(t.classes[static_cast<std::size_t>(m)]) + "\n";
  }
  return out;
}

// ================================================================== TN experiment

struct TnRow {
  int padding = 0;
  std::uint64_t tn = 0;
  MetricReport report;
};

struct TnTable {
  std::vector<TnRow> rows;
  std::array<bool, kMetricCount> changed{};
};

// Pads both masks with background so only TN grows; TP/FP/FN pixel sets are
// untouched. `changed` flags metrics whose value differs between any rows.
inline TnTable tn_experiment(const BinaryMask& truth, const BinaryMask& pred, const std::vector<int>& paddings,
                             const EvaluationOptions& opt = {}) {
  require_same_frame(truth, pred);
  if (paddings.empty()) throw Error(ErrorKind::invalid_argument, "no paddings given");
  for (std::size_t i = 0; i < paddings.size(); ++i) {
    if (paddings[i] < 0) throw Error(ErrorKind::invalid_argument, "negative padding would crop the foreground region");
    if (i > 0 && paddings[i] <= paddings[i - 1])
      throw Error(ErrorKind::invalid_argument, "paddings must strictly increase the TN area");
  }
  TnTable t;
  const auto base = confusion(truth, pred);
  for (int p : paddings) {
    const BinaryMask tp = pad(truth, p), pp = pad(pred, p);
    TnRow row{p, 0, evaluate_all(tp, pp, opt)};
    const auto c = confusion(tp, pp);
    if (c.tp != base.tp || c.fp != base.fp || c.fn != base.fn)
      throw Error(ErrorKind::invalid_argument, "padding altered the foreground region");
    row.tn = c.tn;
    t.rows.push_back(std::move(row));
  }
  for (Metric m : kAllMetrics) {
    bool changed = false;
    const auto& first = t.rows.front().report[m];
    for (const auto& r : t.rows) {
      const auto& v = r.report[m];
      if (v.defined() != first.defined() || (v.value && *v.value != *first.value)) changed = true;
    }
    t.changed[static_cast<std::size_t>(m)] = changed;
  }
  return t;
}

inline std::string tn_table_csv(const TnTable& t) {
  std::string out = "padding,TN";
  for (auto sym : kMetricSymbols) (out += ',') += sym;
  out += '\n';
  for (const auto& r : t.rows) {
    out += std::to_string(r.padding) + "," + std::to_string(r.tn);
    for (Metric m : kAllMetrics) (out += ',') += format_value(r.report[m]);
    out += '\n';
  }
  out += "changed,";
  for (Metric m : kAllMetrics) (out += ',') += t.changed[static_cast<std::size_t>(m)] ? "yes" : "no";
  out += '\n';
  return out;
}

}  // namespace miss
