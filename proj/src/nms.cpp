#include "walkers/nms.hpp"

#include <algorithm>
#include <cmath>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"

namespace walkers {

Raster nms_thin(const Raster& soft) {
  const int w = plane_width(soft);
  const int h = plane_height(soft);
  if (w < 3 || h < 3) return soft;

  const GradientField grad = sobel_gradient(gaussian_blur(soft, 1.0f));
  Raster out = Raster::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float gx = grad.gx(y, x), gy = grad.gy(y, x);
      const float mag = std::sqrt(gx * gx + gy * gy);
      const float v = soft(y, x);
      if (mag <= 0.0f) {
        out(y, x) = v;  // flat neighborhood: no direction to suppress along
        continue;
      }
      const float ux = gx / mag, uy = gy / mag;
      const float a = bilinear_sample_zero_pad(soft, x + ux, y + uy);
      const float b = bilinear_sample_zero_pad(soft, x - ux, y - uy);
      if (v >= a && v >= b) out(y, x) = v;
    }
  }
  return out;
}

SeedList select_seeds(const Raster& thinned, float tau_seed, int max_seeds) {
  if (!(tau_seed > 0.0f && tau_seed < 1.0f)) {
    throw InvalidArgumentError("select_seeds: tau_seed must be in (0, 1)");
  }
  if (max_seeds < 1) throw InvalidArgumentError("select_seeds: max_seeds must be >= 1");

  SeedList seeds;
  const int w = plane_width(thinned);
  const int h = plane_height(thinned);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (thinned(y, x) >= tau_seed) seeds.push_back({{x, y}, thinned(y, x)});
    }
  }
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const Seed& a, const Seed& b) { return a.confidence > b.confidence; });
  if (static_cast<int>(seeds.size()) > max_seeds) seeds.resize(max_seeds);
  return seeds;
}

PixelCoord gt_seed_sampler(const BinaryMask& gt_contour, Rng& rng) {
  std::vector<PixelCoord> px;
  const int w = plane_width(gt_contour);
  const int h = plane_height(gt_contour);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (gt_contour(y, x)) px.push_back({x, y});
    }
  }
  if (px.empty()) throw InvalidInputError("gt_seed_sampler: empty contour");
  return px[rng.uniform_int(static_cast<int>(px.size()))];
}

}  // namespace walkers
