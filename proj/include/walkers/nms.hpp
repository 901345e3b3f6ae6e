#pragma once

#include <vector>

#include "walkers/rng.hpp"
#include "walkers/types.hpp"

namespace walkers {

struct Seed {
  PixelCoord pos;
  float confidence = 0.0f;
};

/// Seeds in descending confidence order; raster-scan order breaks ties.
using SeedList = std::vector<Seed>;

/// Orientation-aware non-maximum suppression: a pixel keeps its value only if
/// it is >= both bilinear-sampled neighbors one pixel away along the Sobel
/// gradient orientation of the sigma-1 smoothed map. Flat-gradient pixels are
/// kept.
Raster nms_thin(const Raster& soft);

/// All pixels with value >= tau_seed, descending by value, truncated to
/// max_seeds. Requires 0 < tau_seed < 1 and max_seeds >= 1.
SeedList select_seeds(const Raster& thinned, float tau_seed, int max_seeds);

/// Uniform random pixel of a non-empty contour mask.
PixelCoord gt_seed_sampler(const BinaryMask& gt_contour, Rng& rng);

}  // namespace walkers
