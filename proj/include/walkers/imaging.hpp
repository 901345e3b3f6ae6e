#pragma once

#include <vector>

#include "walkers/types.hpp"

namespace walkers {

/// Gaussian blur with kernel truncated at radius ceil(3*sigma), normalized to
/// sum 1. Borders are handled by edge replication. Throws
/// InvalidArgumentError for sigma <= 0.
Raster gaussian_blur(const Raster& src, float sigma);

struct GradientField {
  Raster gx;               // signed horizontal response
  Raster gy;               // signed vertical response (y down)
  Raster magnitude;        // scaled so the supremum over [0,1] inputs is 1
  Raster orientation_deg;  // atan2(gy, gx) in degrees
};

/// 3x3 Sobel with edge replication. Requires width, height >= 3.
GradientField sobel_gradient(const Raster& src);

/// Bilinear interpolation; support pixels outside the raster read as 0.
/// Coordinates must stay within [-0.5, width-0.5] x [-0.5, height-0.5],
/// otherwise OutOfBoundsError.
float bilinear_sample(const Raster& src, float x, float y);

/// Bilinear interpolation with zero extension and no range check; any
/// coordinate is legal.
float bilinear_sample_zero_pad(const Raster& src, float x, float y);

struct Components {
  LabelMap labels;             // 0 background, 1..count components
  std::vector<long> areas;     // areas[k] = area of label k+1
  int count = 0;

  /// Labels ordered by descending area; ties by ascending label.
  std::vector<int> labels_by_area() const;
};

/// Connected components, labeled deterministically in raster-scan order of
/// each component's first pixel. connectivity is 4 or 8.
Components connected_components(const BinaryMask& mask, int connectivity);

/// All pixels 4-connected to the image border without entering blocked
/// pixels. The enclosed region is the complement of (outside | blocked).
BinaryMask flood_fill_from_border(const BinaryMask& blocked);

inline BinaryMask enclosed_region(const BinaryMask& blocked) {
  BinaryMask outside = flood_fill_from_border(blocked);
  return ((outside == 0) && (blocked == 0)).cast<std::uint8_t>();
}

/// Zhang-Suen thinning to a 1-pixel-wide skeleton. The result is a subset of
/// the input and a fixed point of the operation.
BinaryMask thin(const BinaryMask& mask);

/// Trace the boundary of the largest 8-connected component of `mask` as an
/// ordered closed chain of inner-boundary pixels (Moore neighbor tracing,
/// clockwise in raster coordinates). Returns an empty vector when the mask is
/// empty or the trace does not close on itself.
std::vector<PixelCoord> trace_closed_chain(const BinaryMask& mask);

/// Inner 8-connected boundary: mask pixels with at least one 4-neighbor
/// outside the mask (image border counts as outside).
BinaryMask inner_boundary(const BinaryMask& mask);

inline BinaryMask threshold_at(const Raster& r, float t) {
  return (r >= t).cast<std::uint8_t>();
}

inline long count_nonzero(const BinaryMask& m) {
  return static_cast<long>(m.cast<long>().sum());
}

}  // namespace walkers
