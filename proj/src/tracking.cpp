#include "walkers/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"

namespace walkers {

void SwarmConfig::validate() const {
  const double sum = step_length_probs[0] + step_length_probs[1] + step_length_probs[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidArgumentError("SwarmConfig: step length probabilities must sum to 1");
  for (double p : step_length_probs)
    if (p < 0.0) throw InvalidArgumentError("SwarmConfig: negative step length probability");
  if (!(step_length_probs[0] > step_length_probs[1] &&
        step_length_probs[1] >= step_length_probs[2]))
    throw InvalidArgumentError("SwarmConfig: probabilities must prefer 1 over 2 over 3");
  if (stall_limit < 1) throw InvalidArgumentError("SwarmConfig: stall_limit < 1");
  if (max_trackers < 1) throw InvalidArgumentError("SwarmConfig: max_trackers < 1");
  if (max_steps_per_tracker < 0) throw InvalidArgumentError("SwarmConfig: negative step budget");
  if (!(tau_dead >= 0.0f && tau_dead <= 1.0f))
    throw InvalidArgumentError("SwarmConfig: tau_dead outside [0,1]");
}

nlohmann::json stats_to_json(const SwarmStats& stats) {
  return nlohmann::json{{"trackers_spawned", stats.trackers_spawned},
                        {"total_steps", stats.total_steps},
                        {"died_stall", stats.died_stall},
                        {"died_out_of_bounds", stats.died_out_of_bounds},
                        {"died_budget", stats.died_budget},
                        {"died_loop", stats.died_loop}};
}

QuantizedStep quantize_direction(AngleDeg relative, int step_len) {
  if (step_len < 1 || step_len > 3)
    throw InvalidArgumentError("quantize_direction: step_len must be 1, 2 or 3");

  QuantizedStep best;
  bool have = false;
  float best_dist = 0.0f;
  for (int dy = -step_len; dy <= step_len; ++dy) {
    for (int dx = -step_len; dx <= step_len; ++dx) {
      if (std::max(std::abs(dx), std::abs(dy)) != step_len) continue;
      const AngleDeg angle = angle_of_offset(dx, dy);
      const float dist = angular_distance(angle.value, relative.value);
      const bool better =
          !have || dist < best_dist ||
          (dist == best_dist && (std::abs(angle.value) < std::abs(best.snapped.value) ||
                                 (std::abs(angle.value) == std::abs(best.snapped.value) &&
                                  angle.value > best.snapped.value)));
      if (better) {
        best = {dx, dy, angle};
        best_dist = dist;
        have = true;
      }
    }
  }
  return best;
}

int sample_step_length(const SwarmConfig& config, Rng& rng) {
  const double u = rng.uniform();
  if (u < config.step_length_probs[0]) return 1;
  if (u < config.step_length_probs[0] + config.step_length_probs[1]) return 2;
  return 3;
}

TrackerState advance_tracker(TrackerState state, const DirectionPredictor& predictor,
                             const MultiChannelImage& image, const Raster& soft,
                             const SwarmConfig& config, Rng& rng) {
  if (!state.alive) throw ContractViolationError("advance_tracker: tracker is dead");

  const int width = plane_width(soft);
  const int height = plane_height(soft);
  if (state.steps_taken >= config.resolved_max_steps(width, height)) {
    state.alive = false;
    state.death_cause = DeathCause::budget;
    return state;
  }

  const Patch patch = extract_patch(image, soft, state.position, state.heading);
  const Prediction pred = predictor.predict(patch);
  const int step_len = sample_step_length(config, rng);
  const QuantizedStep rel = quantize_direction(pred.angle, step_len);

  // Realize the move in the image frame with a second snap onto the same
  // Chebyshev shell: rotating the tracker-frame offset and rounding
  // per-component could change its Chebyshev norm, the snap cannot.
  const AngleDeg absolute(state.heading.value + rel.snapped.value);
  const QuantizedStep move = quantize_direction(absolute, step_len);

  const PixelCoord next{state.position.x + move.dx, state.position.y + move.dy};
  if (next.x < 0 || next.y < 0 || next.x >= width || next.y >= height) {
    state.alive = false;
    state.death_cause = DeathCause::out_of_bounds;
    return state;
  }
  const int recent = std::min<int>(8, static_cast<int>(state.path.size()));
  for (int i = 0; i < recent; ++i) {
    if (state.path[state.path.size() - 1 - i] == next) {
      state.alive = false;
      state.death_cause = DeathCause::loop;
      return state;
    }
  }

  state.position = next;
  state.heading = move.snapped;
  state.path.push_back(next);
  ++state.steps_taken;

  if (soft(next.y, next.x) < config.tau_dead) {
    if (++state.stall_count >= config.stall_limit) {
      state.alive = false;
      state.death_cause = DeathCause::stall;
    }
  } else {
    state.stall_count = 0;
  }
  return state;
}

namespace {

TrackerState make_tracker(PixelCoord pos, AngleDeg heading) {
  TrackerState t;
  t.position = pos;
  t.heading = heading;
  t.path.push_back(pos);
  return t;
}

}  // namespace

std::pair<RefinedContour, SwarmStats> run_swarm(const MultiChannelImage& image,
                                                const Raster& soft, const SeedList& seeds,
                                                const SwarmConfig& config,
                                                const DirectionPredictor& predictor,
                                                int workers) {
  config.validate();
  if (seeds.empty()) throw NoSeedsError("run_swarm: empty seed list");
  if (image.channel_count() != 3) throw InvalidInputError("run_swarm: expected 3 channels");
  const int width = plane_width(soft);
  const int height = plane_height(soft);
  for (const Raster& c : image.channels)
    if (plane_width(c) != width || plane_height(c) != height)
      throw InvalidInputError("run_swarm: image/soft size mismatch");

  // Tangent headings from the smoothed gradient, one tracker each way.
  const GradientField grad = sobel_gradient(gaussian_blur(soft, 1.0f));
  std::vector<TrackerState> trackers;
  trackers.reserve(static_cast<std::size_t>(config.max_trackers));
  for (const Seed& seed : seeds) {
    const float gx = grad.gx(seed.pos.y, seed.pos.x);
    const float gy = grad.gy(seed.pos.y, seed.pos.x);
    const float grad_deg =
        static_cast<float>(std::atan2(static_cast<double>(-gy), static_cast<double>(gx)) * 180.0 /
                           3.14159265358979323846);
    for (float side : {90.0f, -90.0f}) {
      if (static_cast<int>(trackers.size()) >= config.max_trackers) break;
      trackers.push_back(make_tracker(seed.pos, AngleDeg(grad_deg + side)));
    }
  }

  const int n = static_cast<int>(trackers.size());
  const int threads = std::max(1, std::min({workers, n, 64}));
  std::vector<Plane<std::int32_t>> visit_parts(static_cast<std::size_t>(threads));
  std::vector<SwarmStats> stats_parts(static_cast<std::size_t>(threads));

  auto run_range = [&](int part) {
    Plane<std::int32_t>& visits = visit_parts[static_cast<std::size_t>(part)];
    SwarmStats& stats = stats_parts[static_cast<std::size_t>(part)];
    visits = Plane<std::int32_t>::Zero(height, width);
    for (int i = part; i < n; i += threads) {
      TrackerState t = std::move(trackers[static_cast<std::size_t>(i)]);
      Rng rng(config.rng_seed + static_cast<std::uint64_t>(i));
      while (t.alive) t = advance_tracker(std::move(t), predictor, image, soft, config, rng);
      for (const PixelCoord& p : t.path) ++visits(p.y, p.x);
      ++stats.trackers_spawned;
      stats.total_steps += t.steps_taken;
      switch (t.death_cause) {
        case DeathCause::stall: ++stats.died_stall; break;
        case DeathCause::out_of_bounds: ++stats.died_out_of_bounds; break;
        case DeathCause::budget: ++stats.died_budget; break;
        case DeathCause::loop: ++stats.died_loop; break;
        case DeathCause::none: break;
      }
    }
  };

  if (threads == 1) {
    run_range(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int part = 0; part < threads; ++part) pool.emplace_back(run_range, part);
    for (std::thread& th : pool) th.join();
  }

  RefinedContour out;
  out.visit_counts = std::move(visit_parts[0]);
  for (int part = 1; part < threads; ++part) out.visit_counts += visit_parts[part];
  SwarmStats stats;
  for (const SwarmStats& s : stats_parts) {
    stats.trackers_spawned += s.trackers_spawned;
    stats.total_steps += s.total_steps;
    stats.died_stall += s.died_stall;
    stats.died_out_of_bounds += s.died_out_of_bounds;
    stats.died_budget += s.died_budget;
    stats.died_loop += s.died_loop;
  }

  std::vector<std::int32_t> nonzero;
  nonzero.reserve(static_cast<std::size_t>(out.visit_counts.size()));
  for (Eigen::Index i = 0; i < out.visit_counts.size(); ++i)
    if (out.visit_counts.data()[i] > 0) nonzero.push_back(out.visit_counts.data()[i]);

  out.refined = Raster::Zero(height, width);
  if (!nonzero.empty()) {
    // Nearest-rank 95th percentile of the nonzero visit counts.
    std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(nonzero.size())));
    rank = std::clamp<std::size_t>(rank, 1, nonzero.size()) - 1;
    std::nth_element(nonzero.begin(), nonzero.begin() + static_cast<std::ptrdiff_t>(rank),
                     nonzero.end());
    const double v95 = static_cast<double>(nonzero[rank]);
    const double denom = std::log1p(v95);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const std::int32_t v = out.visit_counts(y, x);
        if (v <= 0) continue;
        const double scale = denom > 0.0 ? std::min(1.0, std::log1p(static_cast<double>(v)) / denom)
                                         : 1.0;
        out.refined(y, x) =
            static_cast<float>(scale) * std::max(soft(y, x), 0.5f);
      }
    }
    out.refined = quantize8(out.refined);
  }
  return {std::move(out), stats};
}

}  // namespace walkers
