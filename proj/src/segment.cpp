#include "walkers/segment.hpp"

#include <chrono>
#include <memory>

#include <json.hpp>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"
#include "walkers/predictor.hpp"
#include "walkers/softcontour.hpp"

namespace walkers {

BinaryMask fill_mask(const BinaryMask& contour) {
  const BinaryMask enclosed = enclosed_region(contour);
  const Components interior = connected_components(enclosed, 4);
  if (interior.count == 0) throw NotClosedError("fill_mask: contour encloses nothing");
  const int keep = interior.labels_by_area()[0];
  return ((interior.labels == keep) || (contour != 0)).cast<std::uint8_t>();
}

void PipelineConfig::validate() const {
  swarm.validate();
  binarize.validate();
  if (predictor != "analytic" && predictor != "network")
    throw InvalidArgumentError("PipelineConfig: unknown predictor '" + predictor + "'");
  if (predictor == "network" && weights_path.empty())
    throw InvalidArgumentError("PipelineConfig: network predictor needs a weights path");
  if (!(tau_seed > 0.0f && tau_seed < 1.0f))
    throw InvalidArgumentError("PipelineConfig: tau_seed outside (0,1)");
  if (max_seeds < 1) throw InvalidArgumentError("PipelineConfig: max_seeds < 1");
  if (soft_source != "file" && soft_source != "fallback")
    throw InvalidArgumentError("PipelineConfig: unknown soft_source '" + soft_source + "'");
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.swarm.max_steps_per_tracker = j.value("max_steps_per_tracker", c.swarm.max_steps_per_tracker);
  c.swarm.tau_dead = j.value("tau_dead", c.swarm.tau_dead);
  c.swarm.stall_limit = j.value("stall_limit", c.swarm.stall_limit);
  c.swarm.step_length_probs[0] = j.value("p1", c.swarm.step_length_probs[0]);
  c.swarm.step_length_probs[1] = j.value("p2", c.swarm.step_length_probs[1]);
  c.swarm.step_length_probs[2] = j.value("p3", c.swarm.step_length_probs[2]);
  c.swarm.rng_seed = j.value("rng_seed", c.swarm.rng_seed);
  c.swarm.max_trackers = j.value("max_trackers", c.swarm.max_trackers);
  c.predictor = j.value("predictor", c.predictor);
  c.weights_path = j.value("weights", c.weights_path);
  c.tau_seed = j.value("tau_seed", c.tau_seed);
  c.max_seeds = j.value("max_seeds", c.max_seeds);
  c.binarize.blur_sigma = j.value("binarize_sigma", c.binarize.blur_sigma);
  c.binarize.max_len = j.value("binarize_max_len", c.binarize.max_len);
  c.binarize.tau_region = j.value("binarize_tau_region", c.binarize.tau_region);
  c.soft_source = j.value("soft_source", c.soft_source);
  return c;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  return nlohmann::json{{"max_steps_per_tracker", c.swarm.max_steps_per_tracker},
                        {"tau_dead", c.swarm.tau_dead},
                        {"stall_limit", c.swarm.stall_limit},
                        {"p1", c.swarm.step_length_probs[0]},
                        {"p2", c.swarm.step_length_probs[1]},
                        {"p3", c.swarm.step_length_probs[2]},
                        {"rng_seed", c.swarm.rng_seed},
                        {"max_trackers", c.swarm.max_trackers},
                        {"predictor", c.predictor},
                        {"weights", c.weights_path},
                        {"tau_seed", c.tau_seed},
                        {"max_seeds", c.max_seeds},
                        {"binarize_sigma", c.binarize.blur_sigma},
                        {"binarize_max_len", c.binarize.max_len},
                        {"binarize_tau_region", c.binarize.tau_region},
                        {"soft_source", c.soft_source}};
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PipelineOutput segment_image(const MultiChannelImage& image, const std::optional<Raster>& soft,
                             const PipelineConfig& config, int workers) {
  config.validate();
  const auto t_total = std::chrono::steady_clock::now();
  PipelineOutput out;

  auto t_stage = std::chrono::steady_clock::now();
  if (config.soft_source == "fallback") {
    out.soft = fallback_edge_map(image);
  } else {
    if (!soft.has_value())
      throw InvalidInputError("segment_image: soft_source 'file' but no soft map given");
    out.soft = *soft;
  }
  out.timings.soft_s = seconds_since(t_stage);

  t_stage = std::chrono::steady_clock::now();
  const Raster thin_soft = nms_thin(out.soft);
  out.seeds = select_seeds(thin_soft, config.tau_seed, config.max_seeds);
  out.timings.nms_s = seconds_since(t_stage);

  std::unique_ptr<DirectionPredictor> predictor;
  if (config.predictor == "network")
    predictor = std::make_unique<NetworkPredictor>(load_weights(config.weights_path));
  else
    predictor = std::make_unique<AnalyticPredictor>(config.swarm.tau_dead);

  t_stage = std::chrono::steady_clock::now();
  auto [refined, stats] = run_swarm(image, out.soft, out.seeds, config.swarm, *predictor, workers);
  out.refined = std::move(refined);
  out.swarm_stats = stats;
  out.timings.swarm_s = seconds_since(t_stage);

  t_stage = std::chrono::steady_clock::now();
  try {
    out.closure = binarize_contour(out.refined.refined, config.binarize);
  } catch (const NoClosedContourError&) {
    out.closure.reset();  // open shape: a legitimate outcome, not a failure
  }
  out.timings.binarize_s = seconds_since(t_stage);

  if (out.closure) {
    t_stage = std::chrono::steady_clock::now();
    try {
      out.mask = fill_mask(out.closure->contour);
    } catch (const NotClosedError&) {
      // A contour that passes the cut test but encloses nothing is not a
      // usable closed shape; report the case as open.
      out.closure.reset();
    }
    out.timings.fill_s = seconds_since(t_stage);
  }
  out.timings.total_s = seconds_since(t_total);
  return out;
}

nlohmann::json timings_to_json(const StageTimings& t) {
  return nlohmann::json{{"soft_s", t.soft_s},         {"nms_s", t.nms_s},
                        {"swarm_s", t.swarm_s},       {"binarize_s", t.binarize_s},
                        {"fill_s", t.fill_s},         {"total_s", t.total_s}};
}

}  // namespace walkers
