// Runs every primary acceptance criterion and prints one PASS/FAIL line each.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "miss/config_json.hpp"
#include "miss/study.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace miss;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// -------------------------------------------------------------- reference counts

struct TnRowRef {
  std::uint64_t tn;
  double tnr, fpr, acc, auc, kap, ari, mi, voi, gce, icc;
};

const TnRowRef kTnRows[] = {
    {3668, 0.798, 0.202, 0.869, 0.846, 0.674, 0.526, 0.320, 1.069, 0.238, 0.908},
    {9032, 0.907, 0.093, 0.900, 0.901, 0.798, 0.640, 0.527, 0.933, 0.189, 0.908},
    {26532, 0.966, 0.034, 0.944, 0.930, 0.868, 0.783, 0.587, 0.609, 0.108, 0.909},
    {49032, 0.981, 0.019, 0.964, 0.938, 0.886, 0.840, 0.506, 0.421, 0.070, 0.909},
    {76532, 0.988, 0.012, 0.975, 0.941, 0.894, 0.865, 0.423, 0.308, 0.048, 0.909},
    {116132, 0.992, 0.008, 0.983, 0.943, 0.899, 0.880, 0.341, 0.224, 0.034, 0.909},
    {236532, 0.996, 0.004, 0.991, 0.945, 0.904, 0.895, 0.221, 0.126, 0.017, 0.909},
    {626532, 0.999, 0.001, 0.996, 0.946, 0.907, 0.904, 0.110, 0.054, 0.007, 0.909},
    {986532, 0.999, 0.001, 0.998, 0.947, 0.908, 0.906, 0.078, 0.036, 0.004, 0.909},
};

Check reference_counts() {
  Check c;
  const auto t0 = Clock::now();
  double worst_tight = 0, worst_loose = 0;
  for (const auto& row : kTnRows) {
    const auto r = count_metrics({11217, 926, 1325, row.tn});
    const std::pair<Metric, double> tight[] = {
        {Metric::DICE, 0.909}, {Metric::JAC, 0.833}, {Metric::TPR, 0.894}, {Metric::PPV, 0.924},
        {Metric::VS, 0.984},   {Metric::TNR, row.tnr}, {Metric::FPR, row.fpr}, {Metric::ACC, row.acc},
        {Metric::AUC, row.auc}, {Metric::KAP, row.kap}};
    const std::pair<Metric, double> loose[] = {{Metric::ARI, row.ari}, {Metric::MI, row.mi}, {Metric::VOI, row.voi},
                                               {Metric::GCE, row.gce}, {Metric::ICC, row.icc}};
    for (auto [m, v] : tight) {
      const double e = std::abs(r.get(m) - v);
      worst_tight = std::max(worst_tight, e);
      c.expect(e <= 0.001 + 1e-12, "TN=" + std::to_string(row.tn) + " " + std::string(symbol(m)) + "=" +
                                       fmt(r.get(m)) + " vs " + fmt(v));
    }
    for (auto [m, v] : loose) {
      const double e = std::abs(r.get(m) - v);
      worst_loose = std::max(worst_loose, e);
      c.expect(e <= 0.005 + 1e-12, "TN=" + std::to_string(row.tn) + " " + std::string(symbol(m)) + "=" +
                                       fmt(r.get(m)) + " vs " + fmt(v));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + fmt(secs) + " s");
  if (c.ok) c.detail = "max |err| " + fmt(worst_tight) + " (±0.001 set), " + fmt(worst_loose) + " (±0.005 set)";
  return c;
}

// -------------------------------------------------------------- extremes

Check range_extremes() {
  Check c;
  SeededRng rng(2024);
  int cases = 0;
  for (int t = 0; t < 20; ++t) {
    const auto truth = fixtures::ellipse_mask(128, 128, rng.uniform(30, 45), rng.uniform(30, 45), rng.uniform(8, 20),
                                             rng.uniform(8, 20), rng.uniform(0, 3));
    const auto worst = fixtures::ellipse_mask(128, 128, rng.uniform(85, 100), rng.uniform(85, 100),
                                             rng.uniform(8, 20), rng.uniform(8, 20), rng.uniform(0, 3));
    const auto best = evaluate_all(truth, truth);
    for (Metric m : {Metric::DICE, Metric::JAC, Metric::MSI, Metric::TPR, Metric::TNR, Metric::PPV, Metric::ACC,
                     Metric::AUC, Metric::VS, Metric::KAP, Metric::ARI, Metric::ICC})
      c.expect(best.get(m) == 1.0, "best " + std::string(symbol(m)) + "=" + fmt(best.get(m)));
    for (Metric m : {Metric::FPR, Metric::VOI, Metric::GCE, Metric::PBD, Metric::MHD, Metric::HD, Metric::AVD})
      c.expect(best.get(m) == 0.0, "best " + std::string(symbol(m)) + "=" + fmt(best.get(m)));
    const auto w = evaluate_all(truth, worst);
    for (Metric m : {Metric::DICE, Metric::JAC, Metric::MSI, Metric::TPR, Metric::PPV, Metric::ICC})
      c.expect(std::abs(w.get(m)) < 0.0005, "worst " + std::string(symbol(m)) + "=" + fmt(w.get(m)));
    c.expect(w.get(Metric::PBD) == -1.0, "worst PBD=" + fmt(w.get(Metric::PBD)));
    c.expect(w.get(Metric::KAP) <= 0.0, "worst KAP=" + fmt(w.get(Metric::KAP)));
    c.expect(w.get(Metric::ARI) <= 0.0, "worst ARI=" + fmt(w.get(Metric::ARI)));
    ++cases;
  }
  if (c.ok) c.detail = std::to_string(cases) + " truth/disjoint geometries";
  return c;
}

// -------------------------------------------------------------- TN invariance

Check tn_invariance() {
  Check c;
  SeededRng rng(77);
  const Metric invariant[] = {Metric::DICE, Metric::JAC, Metric::MSI, Metric::TPR, Metric::PPV,
                              Metric::VS,   Metric::PBD, Metric::HD,  Metric::AVD, Metric::MHD};
  const Metric changing[] = {Metric::TNR, Metric::FPR, Metric::ACC, Metric::AUC, Metric::KAP,
                             Metric::ARI, Metric::MI,  Metric::VOI, Metric::GCE};
  const Metric distance[] = {Metric::HD, Metric::AVD, Metric::MHD};
  double icc_drift = 0;
  int pairs = 0;
  while (pairs < 100) {
    const int w = 40 + int(rng.uniform_int(0, 40)), h = 40 + int(rng.uniform_int(0, 40));
    const auto truth = fixtures::random_ellipse(rng, w, h);
    const auto pred = fixtures::shifted(truth, int(rng.uniform_int(-6, 6)), int(rng.uniform_int(-6, 6)));
    const auto cc = confusion(truth, pred);
    if (cc.tp == 0 || cc.fp == 0 || cc.fn == 0) continue;
    const int p1 = int(rng.uniform_int(1, 10));
    const int p2 = p1 + int(rng.uniform_int(5, 30));
    const int p3 = p2 + int(rng.uniform_int(20, 100));
    const auto t = tn_experiment(truth, pred, {0, p1, p2, p3});
    const auto& base = t.rows[0].report;
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
      const auto& r = t.rows[k].report;
      for (Metric m : invariant) {
        const bool exact = std::find(std::begin(distance), std::end(distance), m) != std::end(distance);
        const double d = std::abs(r.get(m) - base.get(m));
        c.expect(exact ? d == 0.0 : d <= 1e-12,
                 "pair " + std::to_string(pairs) + " " + std::string(symbol(m)) + " moved by " + fmt(d));
      }
      icc_drift = std::max(icc_drift, std::abs(r.get(Metric::ICC) - base.get(Metric::ICC)));
    }
    for (Metric m : changing)
      c.expect(t.changed[static_cast<std::size_t>(m)],
               "pair " + std::to_string(pairs) + " " + std::string(symbol(m)) + " did not change");
    ++pairs;
  }
  c.expect(icc_drift <= 0.002, "ICC drift " + fmt(icc_drift));
  if (c.ok) c.detail = "100 pairs x 3 paddings, max ICC drift " + fmt(icc_drift);
  return c;
}

// -------------------------------------------------------------- grouping

Check published_grouping() {
  Check c;
  const auto t0 = Clock::now();
  const auto table = parse_rank_table_csv(detail::read_text(std::string(MISS_DATA_DIR) + "/table3_mode_ranks.csv"));
  const auto groups = group_metrics(rank_correlation(table), 0.95);
  std::vector<std::vector<std::string>> expected = {{"DICE", "JAC", "KAP", "ICC", "PBD", "ARI"},
                                                    {"MSI", "AVD"},
                                                    {"TPR", "AUC", "MI"},
                                                    {"TNR", "FPR", "PPV"},
                                                    {"ACC", "VOI", "GCE"},
                                                    {"VS"},
                                                    {"MHD"},
                                                    {"HD"}};
  auto normalise = [](std::vector<std::vector<std::string>> g) {
    for (auto& x : g) std::sort(x.begin(), x.end());
    std::sort(g.begin(), g.end());
    return g;
  };
  c.expect(groups.groups.size() == 8, std::to_string(groups.groups.size()) + " groups");
  c.expect(normalise(groups.groups) == normalise(expected), "memberships differ");
  const auto again = group_metrics(rank_correlation(table), 0.95);
  c.expect(again.groups == groups.groups, "not deterministic");
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + fmt(secs) + " s");
  if (c.ok) c.detail = "threshold 0.95, 8 groups, " + fmt(secs * 1000) + " ms";
  return c;
}

// -------------------------------------------------------------- synthesis anchors

Check synthesis_anchors() {
  Check c;
  const double h = 7.25, w = 0.35, cen = 1.1;
  c.expect(std::abs(spiculation_gain({cen, h, w}, cen) - h) <= 1e-9, "peak");
  c.expect(std::abs(spiculation_gain({cen, h, w}, cen + w) - h * std::exp(-1.0)) <= 1e-9, "one width");

  Contour poly;
  for (int k = 0; k < 60; ++k) {
    const double a = kTwoPi * k / 60.0;
    poly.points.push_back({50 + 20 * std::cos(a), 40 + 20 * std::sin(a)});
  }
  const auto spiked = add_spiculation(poly, {kTwoPi * 7 / 60.0, h, w});
  const Point ctr = centroid(poly);
  c.expect(std::abs(distance(spiked.points[7], ctr) - distance(poly.points[7], ctr) - h) <= 1e-9, "contour peak");

  SeededRng rng(31);
  Contour rnd;
  for (int i = 0; i < 100; ++i) rnd.points.push_back({rng.uniform(-100, 100), rng.uniform(-100, 100)});
  const auto f = to_fourier(rnd);
  const auto back = from_fourier(f, 100);
  double err = 0;
  for (std::size_t i = 0; i < 100; ++i)
    err = std::max({err, std::abs(back.points[i].x - rnd.points[i].x), std::abs(back.points[i].y - rnd.points[i].y)});
  c.expect(err <= 1e-9, "round trip error " + fmt(err));

  double lhs = 0, rhs = 0;
  for (const auto& p : rnd.points) lhs += p.x * p.x + p.y * p.y;
  lhs /= 100;
  for (const auto& z : f.coefficients) rhs += std::norm(z);
  c.expect(std::abs(rhs - lhs) / lhs <= 1e-6, "Parseval relative error " + fmt(std::abs(rhs - lhs) / lhs));

  SeededRng r0(5), r1(5);
  const auto kept = modify_fd(f, {0.10, 0.0, 0.0}, r0);
  const auto mod = modify_fd_traced(f, {0.10, 0.80 * 0.10, 2.0}, r1);
  std::size_t nonzero = 0, differ = 0;
  for (std::size_t u = 0; u < 100; ++u) {
    nonzero += kept.coefficients[u] != Complex{};
    differ += kept.coefficients[u] != mod.descriptors.coefficients[u];
  }
  c.expect(nonzero == 10, "kept " + std::to_string(nonzero));
  c.expect(differ == 8, "perturbed " + std::to_string(differ));
  c.expect(mod.descriptors.coefficients[0] == f.coefficients[0], "DC changed");
  if (c.ok) c.detail = "round trip " + fmt(err) + ", 10 kept / 8 perturbed";
  return c;
}

// -------------------------------------------------------------- battery

std::vector<CorpusEntry> convex_corpus(int n) {
  SeededRng rng(20240601);
  std::vector<CorpusEntry> out;
  for (int i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "case%02d", i);
    const double rx = rng.uniform(25, 60), ry = rng.uniform(25, 60);
    out.push_back({id, fixtures::ellipse_mask(256, 256, rng.uniform(118, 138), rng.uniform(118, 138), rx, ry,
                                             rng.uniform(0, 3.14159))});
  }
  return out;
}

Check battery_statistics() {
  Check c;
  const auto corpus = convex_corpus(50);
  const auto cfgs = load_segmentors(std::string(MISS_DATA_DIR) + "/segmentors_table1.json");
  BatteryOptions opt;
  opt.threads = 1;
  opt.keep_masks = true;
  const auto t0 = Clock::now();
  const auto store = run_battery(corpus, cfgs, 1729, opt);
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "battery took " + fmt(secs) + " s");

  auto col = [&](const std::string& id) {
    return static_cast<std::size_t>(std::find(store.segmentors.begin(), store.segmentors.end(), id) -
                                    store.segmentors.begin());
  };
  int over = 0, under = 0, shifted_ok = 0, failed = 0;
  for (std::size_t p = 0; p < corpus.size(); ++p) {
    const auto& truth = corpus[p].truth;
    for (const auto& cell : {store.cell(p, col("4")), store.cell(p, col("5")), store.cell(p, col("3"))})
      failed += !cell.mask.has_value();
    if (const auto& m = store.cell(p, col("4")).mask) over += m->count() > truth.count();
    if (const auto& m = store.cell(p, col("5")).mask) under += m->count() < truth.count();
    if (const auto& m = store.cell(p, col("3")).mask) {
      const double d = distance(area_centroid(*m), area_centroid(truth));
      shifted_ok += d >= 3.5 && d <= 21.5;
    }
  }
  c.expect(failed == 0, std::to_string(failed) + " failed cells");
  c.expect(over >= 45, "#4 over-segments in " + std::to_string(over) + "/50");
  c.expect(under >= 45, "#5 under-segments in " + std::to_string(under) + "/50");
  c.expect(shifted_ok >= 48, "#3 shift in range for " + std::to_string(shifted_ok) + "/50");

  const fs::path a = fs::temp_directory_path() / "miss_acceptance_a", b = fs::temp_directory_path() / "miss_acceptance_b";
  fs::remove_all(a);
  fs::remove_all(b);
  write_store(store, a);
  write_store(run_battery(corpus, cfgs, 1729, opt), b);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), a);
    c.expect(fs::exists(b / rel) && read_file(e.path()) == read_file(b / rel), "store differs at " + rel.string());
  }
  fs::remove_all(a);
  fs::remove_all(b);
  if (c.ok)
    c.detail = "50x10 in " + fmt(secs) + " s; over " + std::to_string(over) + "/50, under " + std::to_string(under) +
               "/50, shift " + std::to_string(shifted_ok) + "/50; " + std::to_string(files) + " files identical";
  return c;
}

// -------------------------------------------------------------- small-instance oracle

Check small_instance_oracle() {
  Check c;
  const auto t0 = Clock::now();
  std::size_t compared = 0;
  auto compare = [&](const BinaryMask& a, const BinaryMask& b) {
    const auto d = boundary_distances(a, b);
    const auto o = fixtures::brute_hd_avd(a, b);
    ++compared;
    if (d.hd != o.hd || d.avd != o.avd)
      c.fail(std::to_string(a.width()) + "x" + std::to_string(a.height()) + " mismatch hd " + fmt(d.hd) + "/" +
             fmt(o.hd) + " avd " + fmt(d.avd) + "/" + fmt(o.avd));
  };
  for (int h = 1; h <= 5; ++h)
    for (int w = 1; w <= 5; ++w) {
      const int n = w * h;
      for (std::uint32_t bits = 1; bits < (1u << n); ++bits) {
        if (std::popcount(bits) > 8) continue;
        BinaryMask a(w, h), rot(w, h), tr(h, w);
        for (int i = 0; i < n; ++i)
          if (bits >> i & 1u) {
            const int x = i % w, y = i / w;
            a.set(x, y);
            rot.set(w - 1 - x, h - 1 - y);
            tr.set(y, x);
          }
        compare(a, rot);
        if (w == h) compare(a, tr);
      }
    }
  // Every pair on the 3x3 frame.
  for (std::uint32_t x = 1; x < 512; ++x)
    for (std::uint32_t y = 1; y < 512; ++y) {
      BinaryMask a(3, 3), b(3, 3);
      for (int i = 0; i < 9; ++i) {
        a.set(i % 3, i / 3, x >> i & 1u);
        b.set(i % 3, i / 3, y >> i & 1u);
      }
      compare(a, b);
    }
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "runtime " + fmt(secs) + " s");
  if (c.ok) c.detail = std::to_string(compared) + " mask pairs in " + fmt(secs) + " s";
  return c;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Check()>> criteria[] = {
      {"count metrics on reference counts", reference_counts},
      {"range extremes (identical / disjoint)", range_extremes},
      {"TN invariance suite", tn_invariance},
      {"metric grouping from published ranks", published_grouping},
      {"synthesis engine anchors", synthesis_anchors},
      {"battery statistical properties", battery_statistics},
      {"small-instance HD/AVD oracle", small_instance_oracle},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s  %-40s %s\n", c.ok ? "PASS" : "FAIL", name, c.detail.c_str());
    std::fflush(stdout);
    failures += !c.ok;
  }
  std::printf("%d/%zu criteria passed\n", int(std::size(criteria)) - failures, std::size(criteria));
  return failures ? 1 : 0;
}
