// wtl2: contour-tracking segmentation pipeline driver.
//
// Subcommands: synth (test-case generator), segment (full pipeline),
// train (tracking net), eval (batch metrics). Exit codes: 0 success,
// 2 error, 3 open shape.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "walkers/errors.hpp"
#include "walkers/evalkit.hpp"
#include "walkers/imaging.hpp"
#include "walkers/png_io.hpp"
#include "walkers/predictor.hpp"
#include "walkers/segment.hpp"
#include "walkers/softcontour.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace walkers;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("WTL2_LOG");
    const std::string v = env ? env : "";
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    if (v == "error") return LogLevel::error;
    return LogLevel::warn;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  if (level < log_threshold()) return;
  static const char* names[] = {"debug", "info", "warn", "error"};
  std::cerr << "[wtl2][" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FileMissingError("cannot open: " + path);
  json j;
  is >> j;
  return j;
}

void write_json_file(const json& j, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

void write_run_manifest(const std::string& command, const std::string& config_path,
                        const std::vector<std::string>& inputs, const std::string& out_dir,
                        std::uint64_t seed) {
  json manifest{{"tool", "wtl2"},   {"version", kToolVersion}, {"command", command},
                {"config", config_path}, {"inputs", inputs},   {"out", out_dir},
                {"seed", seed}};
  write_json_file(manifest, fs::path(out_dir) / "run_manifest.json");
}

// --- synth ---------------------------------------------------------------

int cmd_synth(const std::string& template_path, int count, const std::string& out_dir,
              std::uint64_t seed) {
  SynthTemplate tmpl;
  if (!template_path.empty()) tmpl = template_from_json(load_json_file(template_path));
  fs::create_directories(out_dir);

  for (int i = 0; i < count; ++i) {
    const SynthSpec spec = sample_case_spec(tmpl, i, seed);
    const SynthCase synth = synth_case(spec, splitmix64(seed) + static_cast<std::uint64_t>(i));
    char name[32];
    std::snprintf(name, sizeof(name), "case_%04d", i);
    const fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir);
    save_png_rgb(synth.image, (dir / "image.png").string());
    save_png_gray(synth.soft, (dir / "soft.png").string());
    save_png_mask(synth.gt_mask, (dir / "gt_mask.png").string());
    save_png_mask(synth.gt_contour, (dir / "gt_contour.png").string());
    write_json_file(spec_to_json(spec), dir / "spec.json");
    log(LogLevel::info, std::string("wrote ") + name + " (" + spec.shape + ")");
  }
  write_run_manifest("synth", template_path, {}, out_dir, seed);
  return 0;
}

// --- segment ---------------------------------------------------------------

struct SegmentInput {
  std::string id;
  MultiChannelImage image;
  std::optional<Raster> soft;
};

SegmentInput load_segment_input(const std::string& raw, const PipelineConfig& config) {
  SegmentInput in;
  const fs::path path(raw);
  if (fs::is_directory(path)) {
    in.id = path.filename().string();
    in.image = load_png_rgb((path / "image.png").string());
    if (config.soft_source == "file") in.soft = load_png_gray((path / "soft.png").string());
    return in;
  }
  in.id = path.stem().string();
  in.image = load_png_rgb(path.string());
  if (config.soft_source == "file") {
    fs::path soft_path = path;
    soft_path.replace_extension(".soft.png");
    if (!fs::exists(soft_path))
      throw FileMissingError("soft map not found: " + soft_path.string() +
                             " (use soft_source=fallback for detector-free runs)");
    in.soft = load_png_gray(soft_path.string());
  }
  return in;
}

void save_overlay(const MultiChannelImage& image, const BinaryMask& mask, const std::string& path) {
  MultiChannelImage overlay = image;
  // Green-tinted alpha blend of the mask onto the input.
  const float alpha = 0.4f;
  overlay.channels[0] = image.channels[0] * (1.0f - alpha * mask.cast<float>());
  overlay.channels[1] =
      image.channels[1] * (1.0f - alpha * mask.cast<float>()) + alpha * mask.cast<float>();
  overlay.channels[2] = image.channels[2] * (1.0f - alpha * mask.cast<float>());
  save_png_rgb(overlay, path);
}

int cmd_segment(const std::vector<std::string>& inputs, const PipelineConfig& config,
                const std::string& config_path, const std::string& out_dir, int workers) {
  config.validate();
  fs::create_directories(out_dir);
  write_run_manifest("segment", config_path, inputs, out_dir, config.swarm.rng_seed);
  write_json_file(config_to_json(config), fs::path(out_dir) / "config_used.json");

  bool any_open = false;
  std::map<std::string, int> stem_uses;
  for (const std::string& raw : inputs) {
    SegmentInput in = load_segment_input(raw, config);
    // Inputs from different directories can share a stem; keep outputs apart.
    const int use = stem_uses[in.id]++;
    if (use > 0) in.id += "_" + std::to_string(use + 1);
    log(LogLevel::info, "segmenting " + in.id);
    const PipelineOutput result = segment_image(in.image, in.soft, config, workers);

    const fs::path dir = fs::path(out_dir) / in.id;
    fs::create_directories(dir);
    save_png_gray(result.refined.refined, (dir / "refined.png").string());
    json stats{{"closed", result.closed()},
               {"swarm", stats_to_json(result.swarm_stats)},
               {"seeds", result.seeds.size()}};
    if (result.closed()) {
      stats["closure"] = closure_to_json(*result.closure);
      save_png_mask(result.closure->contour, (dir / "contour.png").string());
      save_png_mask(*result.mask, (dir / "mask.png").string());
      save_overlay(in.image, *result.mask, (dir / "overlay.png").string());
    } else {
      stats["closure"] = nullptr;
      any_open = true;
      log(LogLevel::warn, in.id + ": open shape (no closed contour found)");
    }
    write_json_file(stats, dir / "stats.json");
    // Wall-clock diagnostics; the only artifact that is not run-to-run stable.
    write_json_file(timings_to_json(result.timings), dir / "timings.json");
  }
  return any_open ? 3 : 0;
}

// --- train -----------------------------------------------------------------

std::vector<fs::path> list_case_dirs(const std::string& cases_dir) {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(cases_dir))
    if (entry.is_directory() && fs::exists(entry.path() / "image.png")) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

SynthCase load_case_dir(const fs::path& dir) {
  SynthCase c;
  c.image = load_png_rgb((dir / "image.png").string());
  c.soft = load_png_gray((dir / "soft.png").string());
  c.gt_mask = load_png_mask((dir / "gt_mask.png").string());
  if (fs::exists(dir / "gt_contour.png"))
    c.gt_contour = load_png_mask((dir / "gt_contour.png").string());
  else
    c.gt_contour = inner_boundary(c.gt_mask);
  return c;
}

int cmd_train(const std::string& cases_dir, int epochs, double lr, std::uint64_t seed,
              const std::string& out_weights, int walks, const std::string& loss_csv) {
  std::vector<SynthCase> cases;
  for (const fs::path& dir : list_case_dirs(cases_dir)) cases.push_back(load_case_dir(dir));
  if (cases.empty()) throw InvalidInputError("no case directories under " + cases_dir);
  log(LogLevel::info, "loaded " + std::to_string(cases.size()) + " cases");

  Rng rng(seed);
  const TrainingSet set = gen_training_set(cases, walks, rng);
  if (set.skipped_cases > 0)
    log(LogLevel::warn, std::to_string(set.skipped_cases) + " cases had untraceable contours");
  log(LogLevel::info, std::to_string(set.samples.size()) + " training samples");

  const TrainResult result = net_train(set.samples, epochs, lr, seed);
  save_weights(result.weights, out_weights);

  const std::string csv_path = loss_csv.empty() ? out_weights + ".loss.csv" : loss_csv;
  std::ofstream os(csv_path);
  if (!os) throw IoError("cannot open for writing: " + csv_path);
  os << "epoch,mean_loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    os << e << "," << result.epoch_loss[e] << "\n";
  if (!result.epoch_loss.empty())
    log(LogLevel::info, "final epoch loss " + std::to_string(result.epoch_loss.back()));
  return 0;
}

// --- eval ------------------------------------------------------------------

int cmd_eval(const std::string& manifest_path, const std::string& policy_name,
             const std::string& out_csv) {
  const json manifest = load_json_file(manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const fs::path fp(p);
    return fp.is_absolute() ? p : (base / fp).string();
  };

  std::vector<EvalPair> pairs;
  for (const json& item : manifest.at("pairs")) {
    EvalPair pair;
    pair.id = item.at("id").get<std::string>();
    pair.pred_path = resolve(item.value("pred", ""));
    pair.gt_path = resolve(item.at("gt").get<std::string>());
    pair.seconds = item.value("seconds", 0.0);
    pairs.push_back(std::move(pair));
  }

  const EvalPolicy policy =
      policy_name == "exclude" ? EvalPolicy::exclude : EvalPolicy::zero_fill;
  const Report report = batch_eval(pairs, policy);
  write_report_csv(report, out_csv);
  for (const EvalError& err : report.errors) log(LogLevel::error, err.id + ": " + err.message);
  return report.errors.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walk-the-lines contour tracking pipeline"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic cases");
  std::string synth_template, synth_out = "cases";
  int synth_count = 10;
  std::uint64_t synth_seed = 0;
  synth->add_option("--template", synth_template, "synth template JSON");
  synth->add_option("--count", synth_count, "number of cases");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", synth_seed, "base rng seed");

  // segment
  auto* segment = app.add_subcommand("segment", "run the full pipeline");
  std::vector<std::string> seg_inputs;
  std::string seg_config, seg_out = "out", seg_predictor, seg_weights, seg_soft_source;
  int seg_workers = 1;
  std::uint64_t seg_seed = 0;
  segment->add_option("inputs", seg_inputs, "image files or case directories")->required();
  segment->add_option("--config", seg_config, "pipeline config JSON");
  segment->add_option("--out", seg_out, "output directory");
  auto* seg_seed_opt = segment->add_option("--seed", seg_seed, "rng seed (overrides config)");
  segment->add_option("--workers", seg_workers, "tracker worker threads");
  segment->add_option("--predictor", seg_predictor, "analytic|network (overrides config)");
  segment->add_option("--weights", seg_weights, "weights file for the network predictor");
  segment->add_option("--soft-source", seg_soft_source, "file|fallback (overrides config)");

  // train
  auto* train = app.add_subcommand("train", "train the tracking net on synth cases");
  std::string train_cases, train_out = "weights.wtl2", train_loss_csv;
  int train_epochs = 30, train_walks = 1;
  double train_lr = 1e-6;
  std::uint64_t train_seed = 0;
  train->add_option("--cases", train_cases, "directory of case subdirectories")->required();
  train->add_option("--epochs", train_epochs, "training epochs");
  train->add_option("--lr", train_lr, "learning rate");
  train->add_option("--seed", train_seed, "rng seed");
  train->add_option("--out", train_out, "output weights path");
  train->add_option("--walks", train_walks, "walks per case and orientation");
  train->add_option("--loss-csv", train_loss_csv, "loss trace CSV path");

  // eval
  auto* eval = app.add_subcommand("eval", "score predicted masks against ground truth");
  std::string eval_manifest, eval_policy = "zero-fill", eval_out = "report.csv";
  eval->add_option("--manifest", eval_manifest, "JSON list of pred/gt pairs")->required();
  eval->add_option("--policy", eval_policy, "zero-fill|exclude")
      ->check(CLI::IsMember({"zero-fill", "exclude"}));
  eval->add_option("--out", eval_out, "report CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_template, synth_count, synth_out, synth_seed);
    if (segment->parsed()) {
      PipelineConfig config;
      if (!seg_config.empty()) config = config_from_json(load_json_file(seg_config));
      if (!seg_predictor.empty()) config.predictor = seg_predictor;
      if (!seg_weights.empty()) config.weights_path = seg_weights;
      if (!seg_soft_source.empty()) config.soft_source = seg_soft_source;
      if (seg_seed_opt->count() > 0) config.swarm.rng_seed = seg_seed;
      return cmd_segment(seg_inputs, config, seg_config, seg_out, seg_workers);
    }
    if (train->parsed())
      return cmd_train(train_cases, train_epochs, train_lr, train_seed, train_out, train_walks,
                       train_loss_csv);
    if (eval->parsed()) return cmd_eval(eval_manifest, eval_policy, eval_out);
  } catch (const std::exception& e) {
    log(LogLevel::error, e.what());
    return 2;
  }
  return 0;
}
