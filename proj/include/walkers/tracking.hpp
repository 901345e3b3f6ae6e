#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "walkers/nms.hpp"
#include "walkers/patch.hpp"
#include "walkers/predictor.hpp"
#include "walkers/rng.hpp"
#include "walkers/types.hpp"

namespace walkers {

enum class DeathCause { none, stall, out_of_bounds, budget, loop };

struct TrackerState {
  PixelCoord position;
  AngleDeg heading;
  int steps_taken = 0;
  bool alive = true;
  std::vector<PixelCoord> path;  // path.back() == position while alive
  int stall_count = 0;
  DeathCause death_cause = DeathCause::none;
};

struct SwarmConfig {
  int max_steps_per_tracker = 0;  // 0 = auto: 4 * (width + height)
  float tau_dead = 0.1f;
  int stall_limit = 3;
  std::array<double, 3> step_length_probs = {0.7, 0.2, 0.1};
  std::uint64_t rng_seed = 0;
  int max_trackers = 600;

  /// Throws InvalidArgumentError when the probabilities do not sum to 1,
  /// break the p1 > p2 >= p3 preference ordering, or counts are non-positive.
  void validate() const;

  int resolved_max_steps(int width, int height) const {
    return max_steps_per_tracker > 0 ? max_steps_per_tracker : 4 * (width + height);
  }
};

struct RefinedContour {
  Raster refined;                    // [0,1], 8-bit-grid values
  Plane<std::int32_t> visit_counts;  // per-pixel traversals
};

struct SwarmStats {
  int trackers_spawned = 0;
  long total_steps = 0;
  int died_stall = 0;
  int died_out_of_bounds = 0;
  int died_budget = 0;
  int died_loop = 0;
};

nlohmann::json stats_to_json(const SwarmStats& stats);

struct QuantizedStep {
  int dx = 0;        // tracker frame: +x forward, +y to the right
  int dy = 0;
  AngleDeg snapped;  // exact lattice angle of (dx, dy)
};

/// Snap a relative angle onto the integer offsets of Chebyshev norm
/// step_len. Step 1 reproduces the 8-neighborhood angles {0, +-45, +-90,
/// +-135, 180}; ties break toward smaller |angle|, then toward positive
/// (left). Throws InvalidArgumentError unless step_len is 1, 2 or 3.
QuantizedStep quantize_direction(AngleDeg relative, int step_len);

/// Categorical draw of 1, 2 or 3 with config.step_length_probs.
int sample_step_length(const SwarmConfig& config, Rng& rng);

/// One tracking iteration: patch, prediction, step draw, quantization, move.
/// Updates heading to the realized lattice direction and applies the death
/// rules (budget, leaving the raster, tight loops, tau_dead stalls). Throws
/// ContractViolationError when called on a dead tracker.
TrackerState advance_tracker(TrackerState state, const DirectionPredictor& predictor,
                             const MultiChannelImage& image, const Raster& soft,
                             const SwarmConfig& config, Rng& rng);

/// Run two opposite trackers per seed (best seeds first, at most
/// config.max_trackers), then fuse visit counts with the soft map:
/// refined = min(1, log(1+visits)/log(1+V95)) * max(soft, 0.5), V95 being the
/// 95th percentile of the nonzero visit counts. Deterministic for a fixed
/// config.rng_seed independent of `workers`. Throws NoSeedsError on an empty
/// seed list.
std::pair<RefinedContour, SwarmStats> run_swarm(const MultiChannelImage& image,
                                                const Raster& soft, const SeedList& seeds,
                                                const SwarmConfig& config,
                                                const DirectionPredictor& predictor,
                                                int workers = 1);

}  // namespace walkers
