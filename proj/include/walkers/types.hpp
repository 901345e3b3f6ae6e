#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <vector>

namespace walkers {

/// Dense row-major 2D plane, indexed (y, x) like Eigen's (row, col).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Single-channel float raster. Intensity rasters hold values in [0,1];
/// gradient planes may carry signed values.
using Raster = Plane<float>;

/// Row-major boolean bitmap stored as 0/1 bytes.
using BinaryMask = Plane<std::uint8_t>;

/// Connected-component label plane; 0 = background, labels start at 1.
using LabelMap = Plane<std::int32_t>;

struct PixelCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord& a, const PixelCoord& b) {
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator!=(const PixelCoord& a, const PixelCoord& b) { return !(a == b); }
};

template <typename Scalar>
bool in_bounds(const Plane<Scalar>& p, int x, int y) {
  return x >= 0 && y >= 0 && x < static_cast<int>(p.cols()) && y < static_cast<int>(p.rows());
}

template <typename Scalar>
int plane_width(const Plane<Scalar>& p) {
  return static_cast<int>(p.cols());
}

template <typename Scalar>
int plane_height(const Plane<Scalar>& p) {
  return static_cast<int>(p.rows());
}

/// Image with identical-size channels (3 in this project: RGB or replicated IR).
struct MultiChannelImage {
  std::vector<Raster> channels;

  int width() const { return channels.empty() ? 0 : plane_width(channels[0]); }
  int height() const { return channels.empty() ? 0 : plane_height(channels[0]); }
  int channel_count() const { return static_cast<int>(channels.size()); }
};

// ---------------------------------------------------------------------------
// Angles.
//
// Headings and relative turns are degrees in (-180, 180]. A heading theta
// corresponds to the pixel-space direction (cos theta, -sin theta) with x
// right and y down, so positive relative angles turn toward -y ("left" in the
// slight-left/far-right labeling). Gradient orientations from Sobel use the
// raw atan2(gy, gx) of the y-down gradient vector instead; the two meet only
// where a gradient is turned into a tangent heading, and there both signs of
// the tangent are used anyway.
// ---------------------------------------------------------------------------

/// Normalize degrees into (-180, 180].
inline float wrap_degrees(float deg) {
  float w = std::fmod(deg + 180.0f, 360.0f);
  if (w <= 0.0f) w += 360.0f;
  return w - 180.0f;
}

struct AngleDeg {
  float value = 0.0f;  // always kept in (-180, 180]

  AngleDeg() = default;
  explicit AngleDeg(float deg) : value(wrap_degrees(deg)) {}

  /// Unit direction in pixel coordinates (x right, y down).
  float dir_x() const { return std::cos(value * kDegToRad); }
  float dir_y() const { return -std::sin(value * kDegToRad); }

  static constexpr float kDegToRad = 3.14159265358979323846f / 180.0f;
};

/// Heading of an integer pixel move (dx, dy), y down.
inline AngleDeg angle_of_offset(int dx, int dy) {
  return AngleDeg(std::atan2(static_cast<double>(-dy), static_cast<double>(dx)) * 180.0 /
                  3.14159265358979323846);
}

/// Absolute wrapped angular distance in degrees, in [0, 180].
inline float angular_distance(float a_deg, float b_deg) {
  return std::abs(wrap_degrees(a_deg - b_deg));
}

inline Raster clamp01(const Raster& r) { return r.cwiseMax(0.0f).cwiseMin(1.0f); }

/// Snap a [0,1] raster onto the 8-bit grid used by PNG I/O, so saved and
/// in-memory values are identical.
inline Raster quantize8(const Raster& r) {
  return (r * 255.0f + 0.5f).floor().cwiseMin(255.0f) / 255.0f;
}

}  // namespace walkers
