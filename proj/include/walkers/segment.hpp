#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "walkers/binarize.hpp"
#include "walkers/nms.hpp"
#include "walkers/tracking.hpp"
#include "walkers/types.hpp"

namespace walkers {

/// Closed contour -> filled object mask: the contour plus its largest
/// enclosed interior. Throws NotClosedError when nothing is enclosed.
BinaryMask fill_mask(const BinaryMask& contour);

struct PipelineConfig {
  SwarmConfig swarm;
  std::string predictor = "analytic";  // analytic | network
  std::string weights_path;            // required when predictor == network
  float tau_seed = 0.5f;
  int max_seeds = 300;
  BinarizeParams binarize;
  std::string soft_source = "file";  // file | fallback (Sobel edge map)

  /// Throws InvalidArgumentError on unknown names or broken sub-configs.
  void validate() const;
};

PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const PipelineConfig& config);

struct StageTimings {
  double soft_s = 0.0;
  double nms_s = 0.0;
  double swarm_s = 0.0;
  double binarize_s = 0.0;
  double fill_s = 0.0;
  double total_s = 0.0;
};

struct PipelineOutput {
  Raster soft;
  SeedList seeds;
  RefinedContour refined;
  SwarmStats swarm_stats;
  std::optional<ClosureResult> closure;  // nullopt = open shape
  std::optional<BinaryMask> mask;        // present iff closure succeeded
  StageTimings timings;

  bool closed() const { return closure.has_value(); }
};

/// Full WtL2 chain: soft map -> NMS thinning -> seeds -> tracker swarm ->
/// contour binarization -> mask. `soft` must be provided when
/// config.soft_source == "file"; with "fallback" it is derived from the
/// image. An open shape is a regular outcome (closure/mask absent);
/// NoSeedsError and EmptyRefinedMapError propagate.
PipelineOutput segment_image(const MultiChannelImage& image, const std::optional<Raster>& soft,
                             const PipelineConfig& config, int workers = 1);

nlohmann::json timings_to_json(const StageTimings& timings);

}  // namespace walkers
