#include <doctest.h>

#include <cmath>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"
#include "walkers/softcontour.hpp"

#include "test_util.hpp"

using namespace walkers;

namespace {

SynthSpec disk_spec(int size, double radius) {
  SynthSpec spec;
  spec.width = size;
  spec.height = size;
  spec.shape = "disk";
  spec.cx = size / 2.0;
  spec.cy = size / 2.0;
  spec.radius = radius;
  spec.noise_sigma = 0.0;
  return spec;
}

}  // namespace

TEST_SUITE("softcontour") {

TEST_CASE("synth_case: deterministic in (spec, seed)") {
  SynthSpec spec = disk_spec(96, 20.0);
  spec.noise_sigma = 0.05;
  SynthCase a = synth_case(spec, 42);
  SynthCase b = synth_case(spec, 42);
  CHECK((a.soft == b.soft).all());
  CHECK((a.gt_mask == b.gt_mask).all());
  CHECK((a.gt_contour == b.gt_contour).all());
  for (int c = 0; c < 3; ++c) CHECK((a.image.channels[c] == b.image.channels[c]).all());

  SynthCase c = synth_case(spec, 43);
  CHECK(!(c.soft == a.soft).all());  // different seed moves the noise
}

TEST_CASE("synth_case: disk soft map peaks on the contour along radial lines") {
  SynthCase c = synth_case(disk_spec(96, 20.0), 1);
  CHECK((c.soft >= 0.0f).all());
  CHECK((c.soft <= 1.0f).all());
  CHECK(c.soft.maxCoeff() == doctest::Approx(1.0f).epsilon(1e-3));

  // walk 8 radial lines from the center; the argmax must touch the contour.
  // Blur mass from the staircase can shift the peak one pixel off the
  // discrete ring, so the check allows Chebyshev distance 1.
  const double cx = 48.0, cy = 48.0;
  for (int k = 0; k < 8; ++k) {
    const double ang = k * 3.14159265358979323846 / 4.0;
    float best = -1.0f;
    int bx = -1, by = -1;
    for (double t = 2.0; t < 45.0; t += 0.5) {
      const int x = static_cast<int>(std::lround(cx + t * std::cos(ang)));
      const int y = static_cast<int>(std::lround(cy + t * std::sin(ang)));
      if (c.soft(y, x) > best) {
        best = c.soft(y, x);
        bx = x;
        by = y;
      }
    }
    bool near_contour = false;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        near_contour = near_contour || c.gt_contour(by + dy, bx + dx) == 1;
    CHECK(near_contour);
    CHECK(best > 0.7f);
  }
}

TEST_CASE("synth_case: near-zero blur approaches the contour indicator") {
  SynthSpec spec = disk_spec(72, 16.0);
  spec.blur_sigma = 0.3;
  SynthCase c = synth_case(spec, 2);
  const int h = plane_height(c.soft), w = plane_width(c.soft);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (c.gt_contour(y, x)) CHECK(c.soft(y, x) >= 0.9f);
      // two pixels away from any contour pixel the response must have decayed
      bool near = false;
      for (int dy = -2; dy <= 2 && !near; ++dy)
        for (int dx = -2; dx <= 2 && !near; ++dx) {
          const int qx = x + dx, qy = y + dy;
          if (qx >= 0 && qy >= 0 && qx < w && qy < h && c.gt_contour(qy, qx)) near = true;
        }
      if (!near) CHECK(c.soft(y, x) <= 0.1f);
    }
}

TEST_CASE("synth_case: gt_contour is the 8-connected boundary of gt_mask") {
  SynthCase c = synth_case(disk_spec(64, 14.0), 3);
  CHECK((c.gt_contour == inner_boundary(c.gt_mask)).all());
  CHECK(count_nonzero(enclosed_region(c.gt_contour)) > 0);
}

TEST_CASE("synth_case: gap attenuates the soft map to the residual level") {
  SynthSpec spec = disk_spec(96, 22.0);
  spec.gaps.push_back({0.25, 10.0, 0.3});
  SynthCase c = synth_case(spec, 4);
  float min_on_contour = 1.0f;
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x)
      if (c.gt_contour(y, x)) min_on_contour = std::min(min_on_contour, c.soft(y, x));
  // the gap floor sits at residual * peak, within the 8-bit grid and blur slack
  CHECK(min_on_contour > 0.15f);
  CHECK(min_on_contour < 0.45f);

  SynthSpec clean = disk_spec(96, 22.0);
  float clean_min = 1.0f;
  SynthCase cc = synth_case(clean, 4);
  for (int y = 0; y < 96; ++y)
    for (int x = 0; x < 96; ++x)
      if (cc.gt_contour(y, x)) clean_min = std::min(clean_min, cc.soft(y, x));
  CHECK(clean_min > min_on_contour);  // the gap is a real depression
}

TEST_CASE("synth_case: rejects degenerate geometry") {
  SynthSpec spec = disk_spec(64, 40.0);  // violates the 8-pixel margin
  CHECK_THROWS_AS(synth_case(spec, 0), InvalidSpecError);

  SynthSpec bad_shape = disk_spec(64, 10.0);
  bad_shape.shape = "pentagram";
  CHECK_THROWS_AS(synth_case(bad_shape, 0), InvalidSpecError);

  SynthSpec bad_gap = disk_spec(64, 10.0);
  bad_gap.gaps.push_back({0.0, 5.0, 1.5});  // residual must stay below 1
  CHECK_THROWS_AS(synth_case(bad_gap, 0), InvalidSpecError);
}

TEST_CASE("spec json round trip preserves every field") {
  SynthSpec spec;
  spec.width = 320;
  spec.height = 200;
  spec.shape = "blob";
  spec.cx = 115.5;
  spec.cy = 99.25;
  spec.radius = 37.0;
  spec.harmonics = {{2, 0.15, 0.7}, {5, 0.05, 2.1}};
  spec.blur_sigma = 1.25;
  spec.noise_sigma = 0.04;
  spec.gaps = {{0.6, 9.0, 0.2}};
  spec.distractors = 3;
  spec.fg_level = 0.8;
  spec.bg_level = 0.15;

  nlohmann::json j = spec_to_json(spec);
  CHECK(j.at("synth_spec_version").get<int>() == kSynthSpecVersion);
  SynthSpec back = spec_from_json(j);
  CHECK(back.width == spec.width);
  CHECK(back.height == spec.height);
  CHECK(back.shape == spec.shape);
  CHECK(back.cx == spec.cx);
  CHECK(back.cy == spec.cy);
  CHECK(back.radius == spec.radius);
  REQUIRE(back.harmonics.size() == 2);
  CHECK(back.harmonics[1].k == 5);
  CHECK(back.harmonics[1].amplitude == 0.05);
  CHECK(back.blur_sigma == spec.blur_sigma);
  CHECK(back.noise_sigma == spec.noise_sigma);
  REQUIRE(back.gaps.size() == 1);
  CHECK(back.gaps[0].position == 0.6);
  CHECK(back.gaps[0].length == 9.0);
  CHECK(back.gaps[0].residual == 0.2);
  CHECK(back.distractors == 3);
  CHECK(back.fg_level == 0.8);
  CHECK(back.bg_level == 0.15);
}

TEST_CASE("template json round trip and shape cycling") {
  SynthTemplate t;
  t.width = 200;
  t.height = 150;
  t.shape = "mixed";
  t.gap_residual = 0.25;
  nlohmann::json j = template_to_json(t);
  SynthTemplate back = template_from_json(j);
  CHECK(back.width == 200);
  CHECK(back.height == 150);
  CHECK(back.gap_residual == 0.25);

  // mixed cycles deterministically through the four shapes
  const char* expected[] = {"disk", "rectangle", "polygon", "blob"};
  for (int i = 0; i < 8; ++i) {
    SynthSpec spec = sample_case_spec(t, i, 99);
    CHECK(spec.shape == expected[i % 4]);
    CHECK(spec.width == 200);
    spec.validate();  // sampled geometry must always be valid
  }
  // per-case streams are independent of each other but stable per index
  SynthSpec again = sample_case_spec(t, 3, 99);
  CHECK(again.cx == sample_case_spec(t, 3, 99).cx);
}

TEST_CASE("fallback_edge_map: constant image maps to zero") {
  MultiChannelImage img;
  for (int c = 0; c < 3; ++c) img.channels.push_back(Raster::Constant(16, 16, 0.5f));
  CHECK((fallback_edge_map(img).abs() < 1e-6f).all());
}

TEST_CASE("fallback_edge_map: step edge produces a normalized boundary band") {
  MultiChannelImage img;
  Raster half = Raster::Zero(24, 24);
  for (int x = 12; x < 24; ++x) half.col(x).setConstant(1.0f);
  for (int c = 0; c < 3; ++c) img.channels.push_back(half);
  Raster e = fallback_edge_map(img);
  CHECK(e.maxCoeff() == doctest::Approx(1.0f));
  int argmax_x = -1;
  float best = -1.0f;
  for (int x = 0; x < 24; ++x)
    if (e(12, x) > best) best = e(12, x), argmax_x = x;
  CHECK(std::abs(argmax_x - 12) <= 1);
}

TEST_CASE("fallback_edge_map: invariant to adding a constant to all channels") {
  SynthCase c = synth_case(disk_spec(48, 10.0), 9);
  MultiChannelImage shifted = c.image;
  for (auto& ch : shifted.channels) ch = (ch + 0.11f).eval();
  Raster a = fallback_edge_map(c.image);
  Raster b = fallback_edge_map(shifted);
  CHECK(((a - b).abs() < 1e-5f).all());
}

TEST_CASE("ir_to_multichannel replicates the plane") {
  Raster g(3, 4);
  for (int i = 0; i < 12; ++i) g(i / 4, i % 4) = i / 12.0f;
  MultiChannelImage img = ir_to_multichannel(g);
  REQUIRE(img.channel_count() == 3);
  for (int c = 0; c < 3; ++c) CHECK((img.channels[c] == g).all());
}

}  // TEST_SUITE
