#pragma once

#include <string>

#include "walkers/types.hpp"

namespace walkers {

/// Load an 8-bit grayscale PNG as a [0,1] raster (byte / 255).
Raster load_png_gray(const std::string& path);

/// Load an 8-bit RGB PNG as a 3-channel image. Grayscale files are accepted
/// and replicated into 3 channels.
MultiChannelImage load_png_rgb(const std::string& path);

/// Save a [0,1] raster as 8-bit grayscale (round(v * 255)).
void save_png_gray(const Raster& r, const std::string& path);

/// Save a 3-channel [0,1] image as 8-bit RGB.
void save_png_rgb(const MultiChannelImage& img, const std::string& path);

/// Save a mask as 0/255 grayscale.
void save_png_mask(const BinaryMask& m, const std::string& path);

/// Load a 0/255 (or any nonzero) grayscale PNG as a mask.
BinaryMask load_png_mask(const std::string& path);

}  // namespace walkers
