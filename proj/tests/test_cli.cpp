#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "walkers/png_io.hpp"
#include "walkers/types.hpp"

#include "test_util.hpp"

using namespace walkers;
using namespace walkers::testutil;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string bin() { return std::string("WTL2_LOG=error \"") + WALKERS_BIN + "\""; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

/// Small, fast template: 160x120 cases with a bridgeable gap.
fs::path small_template(const fs::path& dir) {
  const fs::path p = dir / "template.json";
  write_text(p, json{{"synth_spec_version", 1},
                     {"width", 160},
                     {"height", 120},
                     {"shape", "mixed"},
                     {"noise_sigma", 0.02},
                     {"gap_count", 1},
                     {"gap_length", 8.0},
                     {"gap_residual", 0.35}}
                    .dump());
  return p;
}

bool same_bytes(const fs::path& a, const fs::path& b) { return read_bytes(a) == read_bytes(b); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth: writes the advertised artifacts deterministically") {
  const fs::path dir = temp_dir("cli_synth");
  const fs::path tpl = small_template(dir);

  const std::string base = bin() + " synth --template " + tpl.string() + " --count 2";
  CHECK(run_cmd(base + " --seed 9 --out " + (dir / "a").string()) == 0);
  CHECK(run_cmd(base + " --seed 9 --out " + (dir / "b").string()) == 0);

  for (const char* name : {"case_0000", "case_0001"}) {
    for (const char* file : {"image.png", "soft.png", "gt_mask.png", "gt_contour.png", "spec.json"}) {
      CAPTURE(name);
      CAPTURE(file);
      CHECK(fs::exists(dir / "a" / name / file));
      CHECK(same_bytes(dir / "a" / name / file, dir / "b" / name / file));
    }
  }
  CHECK(fs::exists(dir / "a" / "run_manifest.json"));

  // a different seed must change the data
  CHECK(run_cmd(base + " --out " + (dir / "c").string() + " --seed 10") == 0);
  CHECK(!same_bytes(dir / "a" / "case_0000" / "soft.png", dir / "c" / "case_0000" / "soft.png"));

  // broken template: unknown shape
  const fs::path bad = dir / "bad.json";
  write_text(bad, json{{"synth_spec_version", 1}, {"shape", "hexagon"}}.dump());
  CHECK(run_cmd(bin() + " synth --template " + bad.string() + " --count 1 --out " +
                (dir / "d").string()) == 2);
}

TEST_CASE("segment: closed cases exit 0 with stable artifacts") {
  const fs::path dir = temp_dir("cli_segment");
  const fs::path tpl = small_template(dir);
  REQUIRE(run_cmd(bin() + " synth --template " + tpl.string() + " --count 2 --seed 4 --out " +
                  (dir / "cases").string()) == 0);

  const std::string inputs = (dir / "cases" / "case_0000").string() + " " +
                             (dir / "cases" / "case_0001").string();
  const std::string base = bin() + " segment " + inputs + " --seed 77";
  CHECK(run_cmd(base + " --out " + (dir / "r1").string()) == 0);
  CHECK(run_cmd(base + " --out " + (dir / "r2").string()) == 0);
  CHECK(run_cmd(base + " --workers 4 --out " + (dir / "r4").string()) == 0);

  for (const char* name : {"case_0000", "case_0001"}) {
    CAPTURE(name);
    for (const char* file : {"refined.png", "contour.png", "mask.png", "stats.json"}) {
      CAPTURE(file);
      REQUIRE(fs::exists(dir / "r1" / name / file));
      CHECK(same_bytes(dir / "r1" / name / file, dir / "r2" / name / file));
      CHECK(same_bytes(dir / "r1" / name / file, dir / "r4" / name / file));
    }
    CHECK(fs::exists(dir / "r1" / name / "overlay.png"));
    CHECK(fs::exists(dir / "r1" / name / "timings.json"));  // present, not compared

    const json stats = json::parse(read_bytes(dir / "r1" / name / "stats.json"));
    CHECK(stats.at("closed") == true);
    CHECK(stats.at("closure").at("threshold").get<double>() > 0.0);
    CHECK(stats.at("swarm").at("trackers_spawned").get<int>() > 0);
  }
  CHECK(fs::exists(dir / "r1" / "config_used.json"));
  CHECK(fs::exists(dir / "r1" / "run_manifest.json"));
}

TEST_CASE("segment: open shapes exit 3 and skip the mask artifacts") {
  const fs::path dir = temp_dir("cli_open");
  const fs::path tpl = dir / "template.json";
  write_text(tpl, json{{"synth_spec_version", 1},
                       {"width", 160},
                       {"height", 120},
                       {"shape", "disk"},
                       {"noise_sigma", 0.0},
                       {"gap_count", 1},
                       {"gap_length", 30.0},
                       {"gap_residual", 0.0}}
                      .dump());
  REQUIRE(run_cmd(bin() + " synth --template " + tpl.string() + " --count 1 --seed 6 --out " +
                  (dir / "cases").string()) == 0);

  const int code = run_cmd(bin() + " segment " + (dir / "cases" / "case_0000").string() +
                           " --seed 5 --out " + (dir / "out").string());
  CHECK(code == 3);
  CHECK(fs::exists(dir / "out" / "case_0000" / "refined.png"));
  CHECK(fs::exists(dir / "out" / "case_0000" / "stats.json"));
  CHECK(!fs::exists(dir / "out" / "case_0000" / "mask.png"));
  CHECK(!fs::exists(dir / "out" / "case_0000" / "contour.png"));
  const json stats = json::parse(read_bytes(dir / "out" / "case_0000" / "stats.json"));
  CHECK(stats.at("closed") == false);
  CHECK(stats.at("closure").is_null());
}

TEST_CASE("segment: file inputs use the .soft.png sibling convention") {
  const fs::path dir = temp_dir("cli_files");
  const fs::path tpl = small_template(dir);
  REQUIRE(run_cmd(bin() + " synth --template " + tpl.string() + " --count 1 --seed 12 --out " +
                  (dir / "cases").string()) == 0);
  fs::copy_file(dir / "cases" / "case_0000" / "image.png", dir / "ship.png");

  // no sibling soft map -> error
  CHECK(run_cmd(bin() + " segment " + (dir / "ship.png").string() + " --out " +
                (dir / "o1").string()) == 2);

  fs::copy_file(dir / "cases" / "case_0000" / "soft.png", dir / "ship.soft.png");
  CHECK(run_cmd(bin() + " segment " + (dir / "ship.png").string() + " --seed 3 --out " +
                (dir / "o2").string()) == 0);
  CHECK(fs::exists(dir / "o2" / "ship" / "mask.png"));

  // a black soft map cannot seed: pipeline error -> exit 2
  save_png_gray(Raster(Raster::Zero(120, 160)), (dir / "dark.soft.png").string());
  fs::copy_file(dir / "ship.png", dir / "dark.png");
  CHECK(run_cmd(bin() + " segment " + (dir / "dark.png").string() + " --out " +
                (dir / "o3").string()) == 2);
}

TEST_CASE("eval: manifest-driven scoring and error signaling") {
  const fs::path dir = temp_dir("cli_eval");
  BinaryMask gt = BinaryMask::Zero(10, 10);
  gt.block(3, 3, 4, 4).setConstant(1);
  BinaryMask pred = gt;
  pred(3, 3) = 0;
  save_png_mask(gt, (dir / "gt.png").string());
  save_png_mask(pred, (dir / "pred.png").string());

  // relative paths resolve against the manifest location
  write_text(dir / "manifest.json",
             json{{"pairs",
                   {{{"id", "one"}, {"pred", "pred.png"}, {"gt", "gt.png"}, {"seconds", 0.25}},
                    {{"id", "open"}, {"gt", "gt.png"}}}}}
                 .dump());
  const fs::path csv = dir / "report.csv";
  CHECK(run_cmd(bin() + " eval --manifest " + (dir / "manifest.json").string() + " --out " +
                csv.string()) == 0);
  const std::string report = read_bytes(csv);
  CHECK(report.find("image_id,closed") == 0);
  CHECK(report.find("one,1,100.00,93.75,93.75,0.250") != std::string::npos);
  CHECK(report.find("open,0,") != std::string::npos);
  CHECK(report.find("mean_closed,1,") != std::string::npos);

  // exclude policy drops the open row from mean_all
  CHECK(run_cmd(bin() + " eval --manifest " + (dir / "manifest.json").string() +
                " --policy exclude --out " + (dir / "excl.csv").string()) == 0);
  CHECK(read_bytes(dir / "excl.csv").find("mean_all,1,") != std::string::npos);

  // a missing gt file is a record error: exit 2, report still written
  write_text(dir / "broken.json",
             json{{"pairs",
                   {{{"id", "one"}, {"pred", "pred.png"}, {"gt", "gt.png"}},
                    {{"id", "lost"}, {"pred", "pred.png"}, {"gt", "absent.png"}}}}}
                 .dump());
  CHECK(run_cmd(bin() + " eval --manifest " + (dir / "broken.json").string() + " --out " +
                (dir / "broken.csv").string()) == 2);
  CHECK(read_bytes(dir / "broken.csv").find("one,1,") != std::string::npos);

  CHECK(run_cmd(bin() + " eval --manifest " + (dir / "nope.json").string() + " --out " +
                (dir / "x.csv").string()) == 2);
}

TEST_CASE("version flag reports cleanly") {
  CHECK(run_cmd(bin() + " --version > /dev/null") == 0);
}

}  // TEST_SUITE
