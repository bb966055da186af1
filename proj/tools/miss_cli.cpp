// Command-line front end: synth, evaluate, study {run,rank,correlate,ranges,tn}, serve.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "miss/config_json.hpp"
#include "miss/http_service.hpp"
#include "miss/mask_io.hpp"
#include "miss/metrics.hpp"
#include "miss/study.hpp"
#include "miss/synth.hpp"

namespace fs = std::filesystem;
using namespace miss;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

int run_synth(const fs::path& truth_path, const fs::path& config_path, std::uint64_t seed, const fs::path& out,
              const std::string& only, int threshold) {
  const auto bytes = read_file(truth_path);
  const MaskFormat format = detect_format(bytes);
  const BinaryMask truth = decode_mask(bytes, threshold);
  auto configs = load_segmentors(config_path);
  ensure_dir(out);
  int failures = 0;
  for (const auto& config : configs) {
    if (!only.empty() && config.id != only) continue;
    const std::string stem = truth_path.stem().string() + "_" + config.id;
    try {
      auto res = synthesize(truth, config, seed);
      save_mask(out / (stem + extension(format)), res.mask, format);
      write_text(out / (stem + ".contour.txt"), format_contour(res.contour));
      json prov = to_json(res.provenance);
      prov["config"] = to_json(config);
      prov["truth"] = truth_path.string();
      write_text(out / (stem + ".json"), prov.dump(2) + "\n");
      std::cout << "wrote " << (out / (stem + extension(format))).string() << "\n";
    } catch (const Error& e) {
      ++failures;
      std::cerr << "segmentor " << config.id << " failed" << (e.stage().empty() ? "" : " in " + e.stage()) << ": "
                << e.what() << "\n";
    }
  }
  return failures ? 1 : 0;
}

int run_evaluate(const fs::path& truth_path, const fs::path& pred_path, const fs::path& out, int threshold,
                 double msi_tolerance) {
  const BinaryMask truth = load_mask(truth_path, threshold);
  const BinaryMask pred = load_mask(pred_path, threshold);
  const auto report = evaluate_all(truth, pred, {msi_tolerance});
  if (out.extension() == ".csv") {
    std::string csv;
    for (std::size_t i = 0; i < kMetricCount; ++i) (csv += (i ? "," : "")) += kMetricSymbols[i];
    csv += '\n';
    for (std::size_t i = 0; i < kMetricCount; ++i) (csv += (i ? "," : "")) += format_value(report.values[i]);
    csv += '\n';
    write_text(out, csv);
  } else {
    const auto c = confusion(truth, pred);
    json j = {{"truth", truth_path.string()},
              {"pred", pred_path.string()},
              {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}}},
              {"metrics", to_json(report)}};
    write_text(out, j.dump(2) + "\n");
  }
  return 0;
}

std::vector<CorpusEntry> load_corpus(const fs::path& dir, int threshold) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "corpus directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension().string();
    if (e.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> corpus;
  for (const auto& f : files) corpus.push_back({f.stem().string(), load_mask(f, threshold)});
  return corpus;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic segmentation errors and segmentation metric studies"};
  app.require_subcommand(1);
  int threshold = 0;

  // synth
  auto* synth = app.add_subcommand("synth", "Emulate segmentors on one truth mask");
  fs::path truth, config, out, pred;
  std::uint64_t seed = 0;
  std::string segmentor;
  synth->add_option("--truth", truth, "Truth mask (PGM or PNG)")->required()->check(CLI::ExistingFile);
  synth->add_option("--config", config, "Segmentor config JSON")->required()->check(CLI::ExistingFile);
  synth->add_option("--seed", seed, "Random seed")->required();
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--segmentor", segmentor, "Only run this segmentor id");
  synth->add_option("--threshold", threshold, "Foreground threshold");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compute the 20 metrics for a truth/prediction pair");
  double msi_tolerance = 0.0;
  evaluate->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out, "report.json or report.csv")->required();
  evaluate->add_option("--threshold", threshold);
  evaluate->add_option("--msi-tolerance", msi_tolerance, "MSI tolerance band in pixels");

  // study
  auto* study = app.add_subcommand("study", "Battery, ranking, correlation and metric property experiments");
  study->require_subcommand(1);
  fs::path corpus, configs, store, ranks, best, middle, worst;
  unsigned threads = 0;
  bool save_masks = false;
  double corr_threshold = 0.95;
  std::vector<int> paddings;

  auto* run = study->add_subcommand("run", "Run every segmentor on every truth mask");
  run->add_option("--corpus", corpus, "Directory of truth masks")->required();
  run->add_option("--configs", configs, "Segmentor config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed")->required();
  run->add_option("--out", out, "Store directory")->required();
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_flag("--save-masks", save_masks, "Also write every synthetic mask");
  run->add_option("--threshold", threshold);

  auto* rank = study->add_subcommand("rank", "Per-patient ranks aggregated by mode");
  rank->add_option("--store", store, "Store directory")->required();
  rank->add_option("--out", out, "Output directory (default: the store)");

  auto* correlate = study->add_subcommand("correlate", "Rank correlation and metric grouping");
  correlate->add_option("--store", store, "Store directory holding table3_mode_ranks.csv");
  correlate->add_option("--ranks", ranks, "Rank table CSV")->check(CLI::ExistingFile);
  correlate->add_option("--threshold", corr_threshold, "Grouping threshold")->check(CLI::Range(0.0, 1.0));
  correlate->add_option("--out", out, "Output directory (default: the store)");

  auto* ranges = study->add_subcommand("ranges", "Best/middle/worst range experiment");
  ranges->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
  ranges->add_option("--best", best)->required()->check(CLI::ExistingFile);
  ranges->add_option("--middle", middle)->required()->check(CLI::ExistingFile);
  ranges->add_option("--worst", worst)->required()->check(CLI::ExistingFile);
  ranges->add_option("--out", out, "Output directory")->required();

  auto* tn = study->add_subcommand("tn", "True-negative area experiment");
  tn->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
  tn->add_option("--pred", pred)->required()->check(CLI::ExistingFile);
  tn->add_option("--paddings", paddings, "Background padding per side, increasing")->delimiter(',')->required();
  tn->add_option("--out", out, "Output directory")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Local HTTP API for interactive preview");
  std::string bind = "127.0.0.1:8080";
  long ttl = 3600;
  fs::path ui_dir;
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--session-ttl", ttl, "Idle session lifetime in seconds");
  serve->add_option("--serve-ui", ui_dir, "Directory of static UI assets")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return run_synth(truth, config, seed, out, segmentor, threshold);
    if (*evaluate) return run_evaluate(truth, pred, out, threshold, msi_tolerance);
    if (*run) {
      BatteryOptions opt;
      opt.threads = threads;
      opt.keep_masks = save_masks;
      const auto entries = load_corpus(corpus, threshold);
      const auto cfgs = load_segmentors(configs);
      const auto result = run_battery(entries, cfgs, seed, opt);
      write_store(result, out);
      const auto manifest = store_manifest(result);
      std::cout << manifest["succeeded"] << "/" << manifest["cells"] << " cells succeeded; store at " << out.string()
                << "\n";
      return 0;
    }
    if (*rank) {
      const fs::path dest = out.empty() ? store : out;
      ensure_dir(dest);
      write_text(dest / "table3_mode_ranks.csv", rank_table_csv(mode_ranks(read_store(store))));
      std::cout << "wrote " << (dest / "table3_mode_ranks.csv").string() << "\n";
      return 0;
    }
    if (*correlate) {
      if (ranks.empty() && store.empty()) throw Error(ErrorKind::invalid_argument, "give --ranks or --store");
      const fs::path src = ranks.empty() ? store / "table3_mode_ranks.csv" : ranks;
      const fs::path dest = !out.empty() ? out : (!store.empty() ? store : fs::path("."));
      ensure_dir(dest);
      const auto bytes = read_file(src);
      const RankTable table = parse_rank_table_csv({bytes.begin(), bytes.end()});
      const auto corr = rank_correlation(table);
      const auto groups = group_metrics(corr, corr_threshold);
      write_text(dest / "corr_matrix.csv", correlation_csv(corr));
      write_text(dest / "groups.json", groups_json(groups, table).dump(2) + "\n");
      for (const auto& w : corr.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& w : groups.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << groups.groups.size() << " groups at threshold " << corr_threshold << "\n";
      return 0;
    }
    if (*ranges) {
      ensure_dir(out);
      const auto t = range_experiment(load_mask(truth), load_mask(best), load_mask(middle), load_mask(worst));
      write_text(out / "table4_ranges.csv", range_table_csv(t));
      return 0;
    }
    if (*tn) {
      ensure_dir(out);
      const auto t = tn_experiment(load_mask(truth), load_mask(pred), paddings);
      write_text(out / "table5_tn.csv", tn_table_csv(t));
      return 0;
    }
    if (*serve) {
      const auto colon = bind.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorKind::invalid_argument, "--bind expects host:port");
      const std::string host = bind.substr(0, colon);
      const int port = std::stoi(bind.substr(colon + 1));
      service::SessionStore sessions{std::chrono::seconds(ttl)};
      httplib::Server server;
      service::register_routes(server, sessions);
      if (!ui_dir.empty()) server.set_mount_point("/", ui_dir.string());
      std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
      if (!server.listen(host, port)) throw Error(ErrorKind::io, "cannot bind " + bind);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error" << (e.stage().empty() ? "" : " (" + e.stage() + ")") << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
