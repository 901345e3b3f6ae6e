#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "walkers/rng.hpp"
#include "walkers/types.hpp"

namespace walkers {

inline constexpr int kSynthSpecVersion = 1;

struct GapSpec {
  double position = 0.0;  // fraction of the boundary chain in [0, 1)
  double length = 10.0;   // pixels along the chain
  double residual = 0.0;  // remaining intensity in [0, 1)
};

struct BlobHarmonic {
  int k = 2;
  double amplitude = 0.1;
  double phase = 0.0;
};

/// Fully resolved description of one synthetic case. Geometry is in pixels;
/// shapes must fit inside the raster with at least an 8 pixel margin.
struct SynthSpec {
  int width = 640;
  int height = 480;
  std::string shape = "disk";  // disk | rectangle | polygon | blob

  double cx = 0.0, cy = 0.0;
  double radius = 0.0;                                // disk, blob base radius
  double half_w = 0.0, half_h = 0.0;                  // rectangle
  std::vector<std::pair<double, double>> vertices;    // convex polygon
  std::vector<BlobHarmonic> harmonics;                // blob radial wobble

  double blur_sigma = 1.5;
  double noise_sigma = 0.0;
  std::vector<GapSpec> gaps;
  int distractors = 0;

  double fg_level = 0.75;
  double bg_level = 0.25;

  /// Throws InvalidSpecError on degenerate geometry or broken invariants.
  void validate() const;
};

struct SynthCase {
  MultiChannelImage image;
  Raster soft;
  BinaryMask gt_mask;
  BinaryMask gt_contour;
};

/// Generate one case: mask, its 8-connected boundary, the blurred/attenuated
/// soft contour map, and a flat-intensity image. Deterministic in (spec, seed);
/// soft and image are snapped to the 8-bit grid so PNG round trips are exact.
SynthCase synth_case(const SynthSpec& spec, std::uint64_t seed);

/// Trivial detector stand-in: per-channel Sobel magnitude, max across
/// channels, Gaussian-smoothed (sigma 1), normalized to peak 1.
Raster fallback_edge_map(const MultiChannelImage& image);

/// Replicate a grayscale raster into 3 identical channels.
MultiChannelImage ir_to_multichannel(const Raster& gray);

nlohmann::json spec_to_json(const SynthSpec& spec);
SynthSpec spec_from_json(const nlohmann::json& j);

/// Randomization template for batch generation; any geometry left unset is
/// sampled per case.
struct SynthTemplate {
  int width = 640;
  int height = 480;
  std::string shape = "mixed";  // mixed | disk | rectangle | polygon | blob
  double blur_sigma = 1.5;
  double noise_sigma = 0.05;
  int gap_count = 1;
  double gap_length = 12.0;
  double gap_residual = 0.3;
  int distractors = 0;
};

SynthTemplate template_from_json(const nlohmann::json& j);
nlohmann::json template_to_json(const SynthTemplate& t);

/// Resolve a template into a concrete per-case spec. "mixed" cycles through
/// the four shape kinds by case index; geometry and gap placement come from
/// the per-case rng stream derived from (base_seed, case_index).
SynthSpec sample_case_spec(const SynthTemplate& t, int case_index, std::uint64_t base_seed);

}  // namespace walkers
