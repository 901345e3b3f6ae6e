#include "walkers/softcontour.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"

namespace walkers {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMargin = 8.0;

struct Bounds {
  double min_x, min_y, max_x, max_y;
};

Bounds shape_bounds(const SynthSpec& s) {
  if (s.shape == "disk") {
    return {s.cx - s.radius, s.cy - s.radius, s.cx + s.radius, s.cy + s.radius};
  }
  if (s.shape == "rectangle") {
    return {s.cx - s.half_w, s.cy - s.half_h, s.cx + s.half_w, s.cy + s.half_h};
  }
  if (s.shape == "polygon") {
    Bounds b{1e30, 1e30, -1e30, -1e30};
    for (auto& [vx, vy] : s.vertices) {
      b.min_x = std::min(b.min_x, vx);
      b.min_y = std::min(b.min_y, vy);
      b.max_x = std::max(b.max_x, vx);
      b.max_y = std::max(b.max_y, vy);
    }
    return b;
  }
  // blob: base radius inflated by the worst-case harmonic sum
  double amp = 0.0;
  for (const BlobHarmonic& h : s.harmonics) amp += std::abs(h.amplitude);
  const double r = s.radius * (1.0 + amp);
  return {s.cx - r, s.cy - r, s.cx + r, s.cy + r};
}

bool inside_shape(const SynthSpec& s, double x, double y) {
  const double dx = x - s.cx, dy = y - s.cy;
  if (s.shape == "disk") return dx * dx + dy * dy <= s.radius * s.radius;
  if (s.shape == "rectangle") return std::abs(dx) <= s.half_w && std::abs(dy) <= s.half_h;
  if (s.shape == "polygon") {
    const size_t n = s.vertices.size();
    for (size_t i = 0; i < n; ++i) {
      auto [ax, ay] = s.vertices[i];
      auto [bx, by] = s.vertices[(i + 1) % n];
      // vertices are counterclockwise in raster coords; inside = left of each edge
      if ((bx - ax) * (y - ay) - (by - ay) * (x - ax) < 0.0) return false;
    }
    return true;
  }
  // blob: star-convex radial profile
  const double d = std::sqrt(dx * dx + dy * dy);
  const double theta = std::atan2(dy, dx);
  double r = s.radius;
  for (const BlobHarmonic& h : s.harmonics) {
    r += s.radius * h.amplitude * std::sin(h.k * theta + h.phase);
  }
  return d <= r;
}

BinaryMask rasterize(const SynthSpec& s) {
  BinaryMask m = BinaryMask::Zero(s.height, s.width);
  const Bounds b = shape_bounds(s);
  const int x0 = std::max(0, static_cast<int>(std::floor(b.min_x)) - 1);
  const int x1 = std::min(s.width - 1, static_cast<int>(std::ceil(b.max_x)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(b.min_y)) - 1);
  const int y1 = std::min(s.height - 1, static_cast<int>(std::ceil(b.max_y)) + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (inside_shape(s, x, y)) m(y, x) = 1;
    }
  }
  return m;
}

// 4-connected supercover rasterization of a segment.
std::vector<PixelCoord> supercover_segment(double x0, double y0, double x1, double y1) {
  std::vector<PixelCoord> out;
  int xi = static_cast<int>(std::lround(x0)), yi = static_cast<int>(std::lround(y0));
  const int xe = static_cast<int>(std::lround(x1)), ye = static_cast<int>(std::lround(y1));
  out.push_back({xi, yi});
  const double dx = x1 - x0, dy = y1 - y0;
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  const int guard = 4 * (std::abs(xe - xi) + std::abs(ye - yi)) + 8;
  int steps = 0;
  while ((xi != xe || yi != ye) && steps++ < guard) {
    // advance one cell in x or y, whichever boundary the line crosses first
    double tx = dx != 0.0 ? ((xi + 0.5 * sx) - x0) / dx : 1e30;
    double ty = dy != 0.0 ? ((yi + 0.5 * sy) - y0) / dy : 1e30;
    if (xi == xe) tx = 1e30;
    if (yi == ye) ty = 1e30;
    if (tx <= ty) {
      xi += sx;
    } else {
      yi += sy;
    }
    out.push_back({xi, yi});
  }
  return out;
}

}  // namespace

void SynthSpec::validate() const {
  if (width < 32 || height < 32) throw InvalidSpecError("synth spec: raster too small");
  if (shape != "disk" && shape != "rectangle" && shape != "polygon" && shape != "blob") {
    throw InvalidSpecError("synth spec: unknown shape '" + shape + "'");
  }
  if (shape == "disk" && radius < 3.0) throw InvalidSpecError("synth spec: disk radius too small");
  if (shape == "rectangle" && (half_w < 3.0 || half_h < 3.0)) {
    throw InvalidSpecError("synth spec: degenerate rectangle");
  }
  if (shape == "polygon" && vertices.size() < 3) {
    throw InvalidSpecError("synth spec: polygon needs >= 3 vertices");
  }
  if (shape == "blob") {
    if (radius < 3.0) throw InvalidSpecError("synth spec: blob radius too small");
    double amp = 0.0;
    for (const BlobHarmonic& h : harmonics) amp += std::abs(h.amplitude);
    if (amp >= 0.9) throw InvalidSpecError("synth spec: blob harmonics collapse the radius");
  }
  const Bounds b = shape_bounds(*this);
  if (b.min_x < kMargin || b.min_y < kMargin || b.max_x > width - 1 - kMargin ||
      b.max_y > height - 1 - kMargin) {
    throw InvalidSpecError("synth spec: shape must keep an 8 pixel margin");
  }
  if (!(blur_sigma > 0.0)) throw InvalidSpecError("synth spec: blur_sigma must be positive");
  if (noise_sigma < 0.0) throw InvalidSpecError("synth spec: negative noise_sigma");
  for (const GapSpec& g : gaps) {
    if (g.residual < 0.0 || g.residual >= 1.0) {
      throw InvalidSpecError("synth spec: gap residual must be in [0, 1)");
    }
    if (g.position < 0.0 || g.position >= 1.0 || g.length <= 0.0) {
      throw InvalidSpecError("synth spec: bad gap position/length");
    }
  }
  if (distractors < 0) throw InvalidSpecError("synth spec: negative distractor count");
}

SynthCase synth_case(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);

  SynthCase out;
  out.gt_mask = rasterize(spec);
  if (count_nonzero(out.gt_mask) < 9) throw InvalidSpecError("synth spec: shape rasterized empty");
  out.gt_contour = inner_boundary(out.gt_mask);

  // contour raster with gap arcs pre-attenuated, so the blurred crest carries
  // the residual intensity through the gap
  Raster contour_f = out.gt_contour.cast<float>();
  if (!spec.gaps.empty()) {
    std::vector<PixelCoord> chain = trace_closed_chain(out.gt_mask);
    if (chain.empty()) throw InvalidSpecError("synth spec: boundary chain not traceable");
    const long n = static_cast<long>(chain.size());
    for (const GapSpec& g : spec.gaps) {
      const long start = static_cast<long>(std::llround(g.position * n));
      const long len = std::min<long>(n, std::max<long>(1, std::llround(g.length)));
      for (long i = 0; i < len; ++i) {
        const PixelCoord p = chain[(start + i) % n];
        contour_f(p.y, p.x) = static_cast<float>(g.residual);
      }
    }
  }

  Raster soft = gaussian_blur(contour_f, static_cast<float>(spec.blur_sigma));
  const float peak = soft.maxCoeff();
  if (peak > 0.0f) soft /= peak;

  // off-object clutter strokes, max-combined
  const Raster clean_profile = soft;  // pre-noise profile, used to keep strokes off the object
  for (int d = 0; d < spec.distractors; ++d) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      const double len = rng.uniform_range(15.0, 40.0);
      const double ang = rng.uniform_range(0.0, 2.0 * kPi);
      const double x0 = rng.uniform_range(4.0, spec.width - 5.0);
      const double y0 = rng.uniform_range(4.0, spec.height - 5.0);
      const double x1 = x0 + len * std::cos(ang), y1 = y0 + len * std::sin(ang);
      if (x1 < 4 || x1 > spec.width - 5 || y1 < 4 || y1 > spec.height - 5) continue;
      std::vector<PixelCoord> px = supercover_segment(x0, y0, x1, y1);
      bool clear = true;
      for (const PixelCoord& p : px) {
        if (!in_bounds(out.gt_mask, p.x, p.y) || out.gt_mask(p.y, p.x) ||
            clean_profile(p.y, p.x) > 0.02f) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      Raster stroke = Raster::Zero(spec.height, spec.width);
      for (const PixelCoord& p : px) stroke(p.y, p.x) = 1.0f;
      stroke = gaussian_blur(stroke, static_cast<float>(spec.blur_sigma));
      const float sp = stroke.maxCoeff();
      if (sp > 0.0f) stroke *= static_cast<float>(rng.uniform_range(0.4, 0.8)) / sp;
      soft = soft.max(stroke);
      break;
    }
  }

  if (spec.noise_sigma > 0.0) {
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        soft(y, x) += static_cast<float>(spec.noise_sigma * rng.normal());
      }
    }
  }
  out.soft = quantize8(clamp01(soft));

  out.image.channels.assign(3, Raster(spec.height, spec.width));
  for (int c = 0; c < 3; ++c) {
    Raster& ch = out.image.channels[c];
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double base = out.gt_mask(y, x) ? spec.fg_level : spec.bg_level;
        const double noise = spec.noise_sigma > 0.0 ? spec.noise_sigma * rng.normal() : 0.0;
        ch(y, x) = static_cast<float>(base + noise);
      }
    }
    ch = quantize8(clamp01(ch));
  }
  return out;
}

Raster fallback_edge_map(const MultiChannelImage& image) {
  if (image.channel_count() != 3) {
    throw InvalidInputError("fallback_edge_map: need a 3-channel image");
  }
  Raster acc = Raster::Zero(image.height(), image.width());
  for (const Raster& ch : image.channels) {
    acc = acc.max(sobel_gradient(ch).magnitude);
  }
  acc = gaussian_blur(acc, 1.0f);
  const float peak = acc.maxCoeff();
  if (peak > 0.0f) acc /= peak;
  return acc;
}

MultiChannelImage ir_to_multichannel(const Raster& gray) {
  MultiChannelImage out;
  out.channels.assign(3, gray);
  return out;
}

// --- JSON ---

nlohmann::json spec_to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["synth_spec_version"] = kSynthSpecVersion;
  j["width"] = s.width;
  j["height"] = s.height;
  j["shape"] = s.shape;
  j["cx"] = s.cx;
  j["cy"] = s.cy;
  if (s.shape == "disk" || s.shape == "blob") j["radius"] = s.radius;
  if (s.shape == "rectangle") {
    j["half_w"] = s.half_w;
    j["half_h"] = s.half_h;
  }
  if (s.shape == "polygon") {
    nlohmann::json verts = nlohmann::json::array();
    for (auto& [x, y] : s.vertices) verts.push_back({x, y});
    j["vertices"] = verts;
  }
  if (s.shape == "blob") {
    nlohmann::json hs = nlohmann::json::array();
    for (const BlobHarmonic& h : s.harmonics) {
      hs.push_back({{"k", h.k}, {"amplitude", h.amplitude}, {"phase", h.phase}});
    }
    j["harmonics"] = hs;
  }
  j["blur_sigma"] = s.blur_sigma;
  j["noise_sigma"] = s.noise_sigma;
  nlohmann::json gaps = nlohmann::json::array();
  for (const GapSpec& g : s.gaps) {
    gaps.push_back({{"position", g.position}, {"length", g.length}, {"residual", g.residual}});
  }
  j["gaps"] = gaps;
  j["distractors"] = s.distractors;
  j["fg_level"] = s.fg_level;
  j["bg_level"] = s.bg_level;
  return j;
}

SynthSpec spec_from_json(const nlohmann::json& j) {
  if (!j.contains("synth_spec_version") || j["synth_spec_version"].get<int>() != kSynthSpecVersion) {
    throw InvalidSpecError("synth spec: missing or unsupported synth_spec_version");
  }
  SynthSpec s;
  s.width = j.value("width", 640);
  s.height = j.value("height", 480);
  s.shape = j.value("shape", "disk");
  s.cx = j.value("cx", 0.0);
  s.cy = j.value("cy", 0.0);
  s.radius = j.value("radius", 0.0);
  s.half_w = j.value("half_w", 0.0);
  s.half_h = j.value("half_h", 0.0);
  if (j.contains("vertices")) {
    for (const auto& v : j["vertices"]) {
      s.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    }
  }
  if (j.contains("harmonics")) {
    for (const auto& h : j["harmonics"]) {
      s.harmonics.push_back(
          {h.at("k").get<int>(), h.at("amplitude").get<double>(), h.at("phase").get<double>()});
    }
  }
  s.blur_sigma = j.value("blur_sigma", 1.5);
  s.noise_sigma = j.value("noise_sigma", 0.0);
  if (j.contains("gaps")) {
    for (const auto& g : j["gaps"]) {
      s.gaps.push_back({g.at("position").get<double>(), g.at("length").get<double>(),
                        g.at("residual").get<double>()});
    }
  }
  s.distractors = j.value("distractors", 0);
  s.fg_level = j.value("fg_level", 0.75);
  s.bg_level = j.value("bg_level", 0.25);
  return s;
}

SynthTemplate template_from_json(const nlohmann::json& j) {
  if (!j.contains("synth_spec_version") || j["synth_spec_version"].get<int>() != kSynthSpecVersion) {
    throw InvalidSpecError("synth template: missing or unsupported synth_spec_version");
  }
  SynthTemplate t;
  t.width = j.value("width", 640);
  t.height = j.value("height", 480);
  t.shape = j.value("shape", "mixed");
  t.blur_sigma = j.value("blur_sigma", 1.5);
  t.noise_sigma = j.value("noise_sigma", 0.05);
  t.gap_count = j.value("gap_count", 1);
  t.gap_length = j.value("gap_length", 12.0);
  t.gap_residual = j.value("gap_residual", 0.3);
  t.distractors = j.value("distractors", 0);
  if (t.shape != "mixed" && t.shape != "disk" && t.shape != "rectangle" && t.shape != "polygon" &&
      t.shape != "blob") {
    throw InvalidSpecError("synth template: unknown shape '" + t.shape + "'");
  }
  return t;
}

nlohmann::json template_to_json(const SynthTemplate& t) {
  return {{"synth_spec_version", kSynthSpecVersion},
          {"width", t.width},
          {"height", t.height},
          {"shape", t.shape},
          {"blur_sigma", t.blur_sigma},
          {"noise_sigma", t.noise_sigma},
          {"gap_count", t.gap_count},
          {"gap_length", t.gap_length},
          {"gap_residual", t.gap_residual},
          {"distractors", t.distractors}};
}

SynthSpec sample_case_spec(const SynthTemplate& t, int case_index, std::uint64_t base_seed) {
  Rng rng(splitmix64(base_seed) ^ static_cast<std::uint64_t>(case_index) * 0x9e3779b97f4a7c15ULL);
  static const char* kKinds[] = {"disk", "rectangle", "polygon", "blob"};

  SynthSpec s;
  s.width = t.width;
  s.height = t.height;
  s.shape = t.shape == "mixed" ? kKinds[case_index % 4] : t.shape;
  s.blur_sigma = t.blur_sigma;
  s.noise_sigma = t.noise_sigma;
  s.distractors = t.distractors;

  const double short_side = std::min(t.width, t.height);
  const double r_lo = 0.14 * short_side, r_hi = 0.30 * short_side;
  s.cx = t.width / 2.0 + rng.uniform_range(-0.08, 0.08) * t.width;
  s.cy = t.height / 2.0 + rng.uniform_range(-0.08, 0.08) * t.height;

  if (s.shape == "disk") {
    s.radius = rng.uniform_range(r_lo, r_hi);
  } else if (s.shape == "rectangle") {
    s.half_w = rng.uniform_range(r_lo, r_hi);
    s.half_h = rng.uniform_range(r_lo, r_hi);
  } else if (s.shape == "polygon") {
    const int k = 5 + rng.uniform_int(4);
    const double base_r = rng.uniform_range(r_lo, r_hi);
    const double phase = rng.uniform_range(0.0, 2.0 * kPi);
    // equal angular spacing with mild radius jitter stays convex; the winding
    // must match inside_shape's half-plane sign (angle increasing, y down)
    for (int i = 0; i < k; ++i) {
      const double a = phase + 2.0 * kPi * i / k;
      const double r = base_r * rng.uniform_range(0.92, 1.08);
      s.vertices.emplace_back(s.cx + r * std::cos(a), s.cy + r * std::sin(a));
    }
  } else {
    s.radius = rng.uniform_range(r_lo, r_hi * 0.9);
    // first harmonic strong enough that curvature flips sign somewhere
    BlobHarmonic h0;
    h0.k = 3 + rng.uniform_int(3);
    h0.amplitude = rng.uniform_range(1.2 / (h0.k * h0.k), std::min(0.18, 2.0 / (h0.k * h0.k)));
    h0.phase = rng.uniform_range(0.0, 2.0 * kPi);
    s.harmonics.push_back(h0);
    BlobHarmonic h1;
    h1.k = 2 + rng.uniform_int(4);
    h1.amplitude = rng.uniform_range(0.02, 0.06);
    h1.phase = rng.uniform_range(0.0, 2.0 * kPi);
    s.harmonics.push_back(h1);
  }

  for (int g = 0; g < t.gap_count; ++g) {
    GapSpec gap;
    gap.position = rng.uniform();
    gap.length = t.gap_length;
    gap.residual = t.gap_residual;
    s.gaps.push_back(gap);
  }
  return s;
}

}  // namespace walkers
