#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "walkers/types.hpp"

namespace walkers {

struct BinarizeParams {
  float blur_sigma = 2.0f;   // edge-gradient smoothing
  int max_len = 15;          // arm length cap of the separation line
  float tau_region = 0.2f;   // background threshold for arms and endpoint regions

  void validate() const;
};

struct Candidate {
  PixelCoord p;
  float x = 0.0f;  // refined intensity, > 0
};

/// Descending by intensity, raster-scan order among equals.
using CandidateList = std::vector<Candidate>;

/// All pixels with refined > 0. Throws EmptyRefinedMapError when none exist.
CandidateList build_candidates(const Raster& refined);

/// Orientation (atan2(gy, gx), y down) of the Sobel gradient of the sigma-2
/// blurred map at p; nullopt when the gradient vanishes there (candidate
/// rejected). Throws OutOfBoundsError for p outside the raster.
std::optional<AngleDeg> edge_gradient_at(const Raster& refined, PixelCoord p);

struct SeparationLine {
  PixelCoord anchor;
  AngleDeg direction;                  // raw atan2(gy, gx) orientation, y down
  std::vector<PixelCoord> cut_pixels;  // ordered e1 arm -> anchor -> e2 arm
  PixelCoord e1, e2;                   // first sub-tau pixel of each arm
  PixelCoord pixel_1, pixel_2;         // reconnect pair, one per side of the line
};

enum class SeparationRejection { None, ArmTooLong, NoReconnectPair };

/// Rasterize a 4-connected (supercover) line through p_x along grad, both
/// ways, each arm ending at its first pixel with refined < tau_region.
/// Rejects with ArmTooLong when an arm runs max_len pixels without leaving
/// the band (or exits the image), NoReconnectPair when either side of the
/// line has no positive-value pixel 8-adjacent to the cut.
std::optional<SeparationLine> build_separation_line(const Raster& refined, PixelCoord p_x,
                                                    AngleDeg grad, const BinarizeParams& params,
                                                    SeparationRejection* rejection = nullptr);

/// True iff e1 and e2 land in the two largest 4-connected components of
/// {refined < tau_region}, one each.
bool validate_separation(const SeparationLine& line, const Raster& refined, float tau_region);

/// True iff, with cut_pixels removed from `contour`, pixel_1 and pixel_2 are
/// both set and 8-connected to each other (closure the long way around).
bool is_closed(const BinaryMask& contour, const SeparationLine& line);

/// Largest threshold whose thinned binarization closes the cut, found by
/// binary search over the descending unique values (pre-thinning closure is
/// monotone) plus a linear descent while thinning breaks closure. The contour
/// is restricted to the component containing the reconnect pair. nullopt =
/// no threshold closes.
std::optional<std::pair<float, BinaryMask>> closure_threshold_search(const Raster& refined,
                                                                     const SeparationLine& line);

struct ClosureResult {
  float threshold = 0.0f;
  BinaryMask contour;  // thinned, closed
  SeparationLine separation;
  int attempts = 0;  // candidates rejected before this one
};

/// Full binarization: walk the candidate list until a separation line validates and
/// a closing threshold exists. Throws EmptyRefinedMapError on an all-zero map
/// and NoClosedContourError when the list is exhausted (the open-shape
/// outcome).
ClosureResult binarize_contour(const Raster& refined, const BinarizeParams& params = {});

nlohmann::json closure_to_json(const ClosureResult& result);

}  // namespace walkers
