#include "walkers/patch.hpp"

#include <cmath>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"

namespace walkers {

Patch extract_patch(const MultiChannelImage& image, const Raster& soft, PixelCoord center,
                    AngleDeg heading) {
  if (image.channel_count() != 3)
    throw InvalidInputError("extract_patch: expected a 3-channel image");
  const Eigen::Index h = soft.rows();
  const Eigen::Index w = soft.cols();
  for (const Raster& c : image.channels)
    if (c.rows() != h || c.cols() != w)
      throw InvalidInputError("extract_patch: channel/soft size mismatch");
  if (center.x < 0 || center.x >= w || center.y < 0 || center.y >= h)
    throw InvalidInputError("extract_patch: center out of bounds");

  const double rad = heading.value * AngleDeg::kDegToRad;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  constexpr int half = Patch::kSize / 2;

  Patch patch;
  for (int py = 0; py < Patch::kSize; ++py) {
    for (int px = 0; px < Patch::kSize; ++px) {
      // u along the heading, v to the tracker's right (patch reads
      // left-to-right in travel direction).
      const double u = px - half;
      const double v = py - half;
      const double sx = center.x + u * c + v * s;
      const double sy = center.y - u * s + v * c;
      for (int ch = 0; ch < 3; ++ch)
        patch.channels[ch](py, px) = bilinear_sample_zero_pad(image.channels[ch], sx, sy);
      patch.soft()(py, px) = bilinear_sample_zero_pad(soft, sx, sy);
    }
  }
  return patch;
}

}  // namespace walkers
