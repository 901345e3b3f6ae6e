#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "walkers/errors.hpp"
#include "walkers/evalkit.hpp"
#include "walkers/imaging.hpp"
#include "walkers/png_io.hpp"
#include "walkers/rng.hpp"

#include "test_util.hpp"

using namespace walkers;
using namespace walkers::testutil;

TEST_SUITE("evalkit") {

TEST_CASE("metrics: exact scores on hand-counted masks") {
  BinaryMask gt = BinaryMask::Zero(4, 8);
  gt.row(1).segment(1, 6).setConstant(1);  // 6 pixels

  CHECK(metrics(gt, gt).precision == 1.0);
  CHECK(metrics(gt, gt).recall == 1.0);
  CHECK(metrics(gt, gt).iou == 1.0);

  BinaryMask two = BinaryMask::Zero(4, 8);
  two(1, 2) = two(1, 3) = 1;  // subset of gt
  Metrics m = metrics(two, gt);
  CHECK(m.precision == 1.0);
  CHECK(m.recall == doctest::Approx(1.0 / 3.0));
  CHECK(m.iou == doctest::Approx(1.0 / 3.0));

  BinaryMask half = BinaryMask::Zero(4, 8);
  half(1, 1) = half(1, 2) = 1;  // 2 hits
  half(3, 0) = half(3, 1) = 1;  // 2 misses
  m = metrics(half, gt);
  CHECK(m.precision == 0.5);
  CHECK(m.recall == doctest::Approx(1.0 / 3.0));
  CHECK(m.iou == doctest::Approx(0.25));  // 2 / (4 + 6 - 2)

  BinaryMask disjoint = BinaryMask::Zero(4, 8);
  disjoint(3, 7) = 1;
  m = metrics(disjoint, gt);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.iou == 0.0);
}

TEST_CASE("metrics: degenerate conventions and dimension checks") {
  BinaryMask empty = BinaryMask::Zero(5, 5);
  BinaryMask one = BinaryMask::Zero(5, 5);
  one(2, 2) = 1;

  Metrics both = metrics(empty, empty);
  CHECK(both.precision == 1.0);
  CHECK(both.recall == 1.0);
  CHECK(both.iou == 1.0);

  Metrics no_pred = metrics(empty, one);
  CHECK(no_pred.precision == 0.0);
  CHECK(no_pred.recall == 0.0);
  CHECK(no_pred.iou == 0.0);

  Metrics no_gt = metrics(one, empty);
  CHECK(no_gt.precision == 0.0);
  CHECK(no_gt.recall == 0.0);
  CHECK(no_gt.iou == 0.0);

  CHECK_THROWS_AS(metrics(BinaryMask::Zero(4, 5), BinaryMask::Zero(5, 4)), InvalidInputError);
}

TEST_CASE("metrics: random masks agree with direct counting") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    BinaryMask pred(8, 8), gt(8, 8);
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        pred(y, x) = rng.uniform() < 0.4 ? 1 : 0;
        gt(y, x) = rng.uniform() < 0.4 ? 1 : 0;
      }
    long tp = 0, fp = 0, fn = 0;
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        if (pred(y, x) && gt(y, x)) ++tp;
        if (pred(y, x) && !gt(y, x)) ++fp;
        if (!pred(y, x) && gt(y, x)) ++fn;
      }
    if (tp + fp == 0 || tp + fn == 0) continue;  // conventions covered above
    Metrics m = metrics(pred, gt);
    CAPTURE(trial);
    CHECK(m.precision == doctest::Approx(static_cast<double>(tp) / (tp + fp)).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(static_cast<double>(tp) / (tp + fn)).epsilon(1e-12));
    CHECK(m.iou == doctest::Approx(static_cast<double>(tp) / (tp + fp + fn)).epsilon(1e-12));
    CHECK(m.iou <= std::min(m.precision, m.recall) + 1e-12);
    CHECK(m.iou >= m.precision + m.recall - 1.0 - 1e-12);
  }
}

TEST_CASE("closed_shape: sealing is a contour property") {
  CHECK(closed_shape(ring_mask(33, 16.0f, 16.0f, 10.0f)));

  BinaryMask holed = ring_mask(33, 16.0f, 16.0f, 10.0f);
  holed(6, 16) = 0;
  CHECK(!closed_shape(holed));

  BinaryMask frame = BinaryMask::Zero(9, 9);
  frame.row(0).setConstant(1);
  frame.row(8).setConstant(1);
  frame.col(0).setConstant(1);
  frame.col(8).setConstant(1);
  CHECK(closed_shape(frame));

  CHECK(!closed_shape(BinaryMask::Zero(12, 12)));
  // a filled blob leaves no interior to seal
  CHECK(!closed_shape(disk_mask(21, 10.0f, 10.0f, 6.0f)));
}

TEST_CASE("batch_eval: policies, aggregates and csv") {
  namespace fs = std::filesystem;
  const fs::path dir = temp_dir("evalkit");

  BinaryMask gt = BinaryMask::Zero(8, 8);
  gt.block(2, 1, 2, 5).setConstant(1);  // 10 pixels
  BinaryMask pred_a = gt;
  pred_a(2, 1) = 0;  // 9-pixel subset: IoU 0.9
  BinaryMask pred_b = gt;
  pred_b(2, 1) = pred_b(2, 2) = 0;  // 8-pixel subset: IoU 0.8

  const std::string gt_path = (dir / "gt.png").string();
  save_png_mask(gt, gt_path);
  save_png_mask(pred_a, (dir / "a.png").string());
  save_png_mask(pred_b, (dir / "b.png").string());

  std::vector<EvalPair> pairs = {
      {"a", (dir / "a.png").string(), gt_path, 1.25},
      {"b", (dir / "b.png").string(), gt_path, 0.5},
      {"c", "", gt_path, 2.0},  // open shape
  };

  Report zero = batch_eval(pairs, EvalPolicy::zero_fill);
  REQUIRE(zero.records.size() == 3);
  CHECK(zero.errors.empty());
  CHECK(zero.closed_count == 2);
  CHECK(zero.evaluated_count == 3);
  CHECK(zero.records[0].closed);
  CHECK(zero.records[0].scores.iou == doctest::Approx(0.9));
  CHECK(zero.records[1].scores.iou == doctest::Approx(0.8));
  CHECK(!zero.records[2].closed);
  CHECK(zero.records[2].scores.iou == 0.0);
  CHECK(zero.records[2].seconds == 2.0);
  CHECK(zero.mean_all.iou == doctest::Approx((0.9 + 0.8) / 3.0));
  CHECK(zero.mean_all.precision == doctest::Approx(2.0 / 3.0));
  CHECK(zero.mean_closed.iou == doctest::Approx(0.85));
  CHECK(zero.mean_closed.iou >= zero.mean_all.iou);

  Report excl = batch_eval(pairs, EvalPolicy::exclude);
  CHECK(excl.records.size() == 3);
  CHECK(excl.evaluated_count == 2);
  CHECK(excl.mean_all.iou == doctest::Approx(0.85));
  CHECK(excl.mean_closed.iou == doctest::Approx(0.85));

  const std::string csv = report_to_csv(zero);
  CHECK(csv.find("image_id,closed,precision,recall,iou,seconds") == 0);
  CHECK(csv.find("a,1,100.00,90.00,90.00,1.250") != std::string::npos);
  CHECK(csv.find("c,0,0.00,0.00,0.00,2.000") != std::string::npos);
  CHECK(csv.find("mean_all,3,") != std::string::npos);
  CHECK(csv.find("56.67") != std::string::npos);  // 100 * (0.9 + 0.8) / 3
  CHECK(csv.find("mean_closed,2,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  const std::string csv_path = (dir / "report.csv").string();
  write_report_csv(zero, csv_path);
  CHECK(read_bytes(csv_path) == csv);
}

TEST_CASE("batch_eval: unreadable pairs become errors, not aggregates") {
  namespace fs = std::filesystem;
  const fs::path dir = temp_dir("evalkit_err");
  BinaryMask gt = BinaryMask::Zero(6, 6);
  gt.block(2, 2, 2, 2).setConstant(1);
  const std::string gt_path = (dir / "gt.png").string();
  save_png_mask(gt, gt_path);
  save_png_mask(gt, (dir / "good.png").string());

  std::vector<EvalPair> pairs = {
      {"good", (dir / "good.png").string(), gt_path, 0.0},
      {"missing", (dir / "nope.png").string(), gt_path, 0.0},
      {"bad_gt", (dir / "good.png").string(), (dir / "nope_gt.png").string(), 0.0},
  };
  Report report = batch_eval(pairs, EvalPolicy::zero_fill);
  CHECK(report.records.size() == 1);
  REQUIRE(report.errors.size() == 2);
  CHECK(report.errors[0].id == "missing");
  CHECK(report.errors[1].id == "bad_gt");
  CHECK(report.evaluated_count == 1);
  CHECK(report.mean_all.iou == 1.0);

  // an all-zero prediction mask counts as an open shape
  save_png_mask(BinaryMask::Zero(6, 6), (dir / "zero.png").string());
  Report open = batch_eval({{"z", (dir / "zero.png").string(), gt_path, 0.0}},
                           EvalPolicy::zero_fill);
  REQUIRE(open.records.size() == 1);
  CHECK(!open.records[0].closed);

  CHECK_THROWS_AS(batch_eval({}, EvalPolicy::zero_fill), InvalidInputError);
}

}  // TEST_SUITE
