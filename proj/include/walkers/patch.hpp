#pragma once

#include <array>

#include "walkers/types.hpp"

namespace walkers {

/// 7x7x4 tracker input window: 3 image channels plus the soft contour
/// channel, sampled in the tracker's rotated frame (forward = patch +x).
struct Patch {
  static constexpr int kSize = 7;
  static constexpr int kChannels = 4;
  static constexpr int kSoftChannel = 3;

  std::array<Raster, kChannels> channels;  // each kSize x kSize

  Patch() {
    for (Raster& c : channels) c = Raster::Zero(kSize, kSize);
  }

  float at(int c, int y, int x) const { return channels[c](y, x); }
  const Raster& soft() const { return channels[kSoftChannel]; }
  Raster& soft() { return channels[kSoftChannel]; }
};

/// Crop a 7x7x4 window centered on `center`, rotated so the heading maps to
/// the patch +x axis. Bilinear sampling; support outside the image reads 0.
/// Throws InvalidInputError when center is out of bounds.
Patch extract_patch(const MultiChannelImage& image, const Raster& soft, PixelCoord center,
                    AngleDeg heading);

}  // namespace walkers
