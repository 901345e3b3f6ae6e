#include <doctest.h>

#include <cmath>
#include <map>

#include "walkers/errors.hpp"
#include "walkers/imaging.hpp"
#include "walkers/nms.hpp"
#include "walkers/softcontour.hpp"

#include "test_util.hpp"

using namespace walkers;
using namespace walkers::testutil;

TEST_SUITE("nms") {

TEST_CASE("nms_thin: all-zero map stays all-zero") {
  CHECK((nms_thin(Raster::Zero(12, 12)) == 0.0f).all());
}

TEST_CASE("nms_thin: only the crest of a peaked ridge survives") {
  // horizontal ridge: cross-section 0.4 / 1.0 / 0.4
  Raster r = Raster::Zero(15, 15);
  r.row(6).setConstant(0.4f);
  r.row(7).setConstant(1.0f);
  r.row(8).setConstant(0.4f);
  Raster t = nms_thin(r);
  for (int x = 3; x < 12; ++x) {
    CHECK(t(7, x) == 1.0f);
    CHECK(t(6, x) == 0.0f);
    CHECK(t(8, x) == 0.0f);
  }
}

TEST_CASE("nms_thin: isolated peak survives") {
  Raster r = Raster::Zero(11, 11);
  r(5, 5) = 0.8f;
  Raster t = nms_thin(r);
  CHECK(t(5, 5) == 0.8f);
}

TEST_CASE("nms_thin: output bounded by input with shrinking support") {
  Rng rng(23);
  Raster r(20, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) r(y, x) = static_cast<float>(rng.uniform());
  Raster smooth = gaussian_blur(r, 1.0f);
  Raster t = nms_thin(smooth);
  CHECK((t <= smooth + 1e-7f).all());
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x)
      if (t(y, x) > 0.0f) CHECK(smooth(y, x) > 0.0f);
}

TEST_CASE("nms_thin: attenuated gap stays open after thresholding (Fig. 1c analog)") {
  SynthSpec spec;
  spec.width = 96;
  spec.height = 96;
  spec.shape = "disk";
  spec.cx = 48;
  spec.cy = 48;
  spec.radius = 24;
  spec.noise_sigma = 0.0;
  spec.gaps.push_back({0.5, 8.0, 0.1});
  SynthCase c = synth_case(spec, 5);

  Raster thinned = nms_thin(c.soft);
  BinaryMask binary = threshold_at(thinned, 0.2f);
  CHECK(count_nonzero(binary) > 30);  // most of the ring is there...
  CHECK(count_nonzero(enclosed_region(binary)) == 0);  // ...but it does not close
}

TEST_CASE("select_seeds: supra-threshold pixels in descending value order") {
  Raster r = Raster::Zero(9, 9);
  r(2, 3) = 0.7f;
  r(5, 1) = 0.9f;
  r(7, 7) = 0.6f;
  r(4, 4) = 0.2f;  // below tau
  SeedList seeds = select_seeds(r, 0.5f, 300);
  REQUIRE(seeds.size() == 3);
  CHECK(seeds[0].pos == PixelCoord{1, 5});
  CHECK(seeds[0].confidence == 0.9f);
  CHECK(seeds[1].pos == PixelCoord{3, 2});
  CHECK(seeds[2].pos == PixelCoord{7, 7});
}

TEST_CASE("select_seeds: ties broken by raster-scan order, truncation applies") {
  Raster r = Raster::Zero(5, 5);
  r(1, 4) = 0.8f;
  r(3, 0) = 0.8f;
  r(1, 1) = 0.8f;
  SeedList seeds = select_seeds(r, 0.5f, 2);
  REQUIRE(seeds.size() == 2);  // truncated to max_seeds
  CHECK(seeds[0].pos == PixelCoord{1, 1});
  CHECK(seeds[1].pos == PixelCoord{4, 1});
}

TEST_CASE("select_seeds: tau above the global max gives an empty list") {
  Raster r = Raster::Constant(4, 4, 0.3f);
  CHECK(select_seeds(r, 0.5f, 10).empty());
}

TEST_CASE("select_seeds: raising tau never adds seeds") {
  Rng rng(31);
  Raster r(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) r(y, x) = static_cast<float>(rng.uniform());
  std::size_t prev = select_seeds(r, 0.1f, 1000).size();
  for (float tau : {0.3f, 0.5f, 0.7f, 0.9f}) {
    const std::size_t n = select_seeds(r, tau, 1000).size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("select_seeds: rejects invalid parameters") {
  Raster r = Raster::Zero(4, 4);
  CHECK_THROWS_AS(select_seeds(r, 0.0f, 10), InvalidArgumentError);
  CHECK_THROWS_AS(select_seeds(r, 1.0f, 10), InvalidArgumentError);
  CHECK_THROWS_AS(select_seeds(r, 0.5f, 0), InvalidArgumentError);
}

TEST_CASE("gt_seed_sampler: single-pixel contour, determinism, uniformity") {
  BinaryMask one = BinaryMask::Zero(6, 6);
  one(2, 4) = 1;
  Rng rng(1);
  CHECK(gt_seed_sampler(one, rng) == PixelCoord{4, 2});

  BinaryMask ring = ring_mask(25, 12.0f, 12.0f, 8.0f);
  {
    Rng a(7), b(7);
    for (int i = 0; i < 10; ++i) CHECK(gt_seed_sampler(ring, a) == gt_seed_sampler(ring, b));
  }

  // frequency check: each contour pixel within 3 sigma of uniform
  const long n_pixels = count_nonzero(ring);
  const int draws = 10000;
  std::map<std::pair<int, int>, int> freq;
  Rng r2(99);
  for (int i = 0; i < draws; ++i) {
    PixelCoord p = gt_seed_sampler(ring, r2);
    CHECK(ring(p.y, p.x) == 1);
    ++freq[{p.x, p.y}];
  }
  const double p = 1.0 / static_cast<double>(n_pixels);
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (const auto& [pos, count] : freq) CHECK(std::abs(count - draws * p) <= 3.0 * sigma + 1.0);

  CHECK_THROWS_AS(gt_seed_sampler(BinaryMask::Zero(4, 4), rng), InvalidInputError);
}

}  // TEST_SUITE
