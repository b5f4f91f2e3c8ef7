#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <string>

#include "facadewin/annotations.hpp"
#include "facadewin/dataset.hpp"
#include "facadewin/eval.hpp"
#include "test_util.hpp"

using namespace facadewin;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
    std::string command = std::string(FACADEWIN_CLI_PATH) + " " + args;
    if (!stdout_file.empty()) {
        command += " > " + stdout_file.string();
    } else {
        command += " > /dev/null";
    }
    command += " 2> /dev/null";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) { return load_text(path); }

const char* kSceneSpec = R"json({
  "id": "tex300",
  "image_side": 300,
  "rows": 4, "cols": 4,
  "window_w": 30, "window_h": 30,
  "margin": 20, "spacing": 40,
  "gamma": 1.1, "shadow_fraction": 0.2, "seed": 3
})json";

}  // namespace

TEST_CASE("cli end-to-end: synth, prep, plan, simulate, eval, sweep, diagnose") {
    testutil::TempDir dir;
    const fs::path root = dir.path();
    save_text(kSceneSpec, root / "scene.json");

    // synth
    REQUIRE(run_cli("synth --spec " + (root / "scene.json").string() + " -o " +
                    (root / "src_dataset").string()) == 0);
    CHECK(fs::is_regular_file(root / "src_dataset" / "annotations.json"));
    CHECK(fs::is_regular_file(root / "src_dataset" / "images" / "tex300.png"));

    // prep from the synthetic texture: 300x300 at side 128 -> 9 crops x 4
    // rotations = 36 images.
    REQUIRE(run_cli("prep " + (root / "src_dataset" / "images").string() + " " +
                    (root / "src_dataset" / "annotations.json").string() +
                    " --side 128 --seed 7 --paper-faithful -o " + (root / "ds").string()) == 0);
    const auto set = annotation_set_from_json(slurp(root / "ds" / "annotations.json"));
    CHECK(set.images.size() == 36);
    const auto split = split_from_json(slurp(root / "ds" / "split.json"));
    CHECK(split.train.size() == 21);  // floor rule on 36 ids
    CHECK(split.val.size() == 7);
    CHECK(split.test.size() == 8);
    const auto crops = crops_from_json(slurp(root / "ds" / "crops.json"));
    CHECK(crops.size() == 9);

    // Grouped split of a single parent keeps every crop in one bucket.
    REQUIRE(run_cli("prep " + (root / "src_dataset" / "images").string() + " " +
                    (root / "src_dataset" / "annotations.json").string() +
                    " --side 128 --seed 7 -o " + (root / "ds_grouped").string()) == 0);
    const auto grouped = split_from_json(slurp(root / "ds_grouped" / "split.json"));
    CHECK(grouped.total() == 36);
    const bool one_bucket = grouped.train.size() == 36 || grouped.val.size() == 36 ||
                            grouped.test.size() == 36;
    CHECK(one_bucket);

    // plan
    REQUIRE(run_cli("plan " + (root / "ds").string() + " -o " + (root / "config.json").string()) ==
            0);
    CHECK(slurp(root / "config.json").find("k_layer") != std::string::npos);

    // simulate with zero noise, then eval: a perfect report.
    save_text(R"({"drop_prob": 0, "dup_prob": 0, "jitter_px": 0,
                  "score_lo": 0.9, "score_hi": 0.9, "seed": 1})",
              root / "noise.json");
    REQUIRE(run_cli("simulate " + (root / "ds").string() + " --noise " +
                    (root / "noise.json").string() + " -o " + (root / "dets.json").string()) == 0);
    REQUIRE(run_cli("eval " + (root / "dets.json").string() + " " + (root / "ds").string() +
                    " --mode box --pmin 0.5 -o " + (root / "report.json").string() + " --csv " +
                    (root / "report.csv").string()) == 0);
    const auto report = report_from_json(slurp(root / "report.json"));
    CHECK(report.recall == 1.0);
    CHECK(report.precision == 1.0);
    CHECK(report.ap50 == 1.0);
    CHECK(slurp(root / "report.csv").find("mode,p_min") == 0);

    // mask mode works off the same artifacts
    REQUIRE(run_cli("eval " + (root / "dets.json").string() + " " + (root / "ds").string() +
                    " --mode mask --pmin 0.5 -o " + (root / "report_mask.json").string()) == 0);
    CHECK(report_from_json(slurp(root / "report_mask.json")).ap50 == 1.0);

    // sweep
    REQUIRE(run_cli("sweep " + (root / "dets.json").string() + " " + (root / "ds").string() +
                    " --objective f1 -o " + (root / "curve.csv").string()) == 0);
    const auto curve = slurp(root / "curve.csv");
    CHECK(curve.find("threshold,precision,recall,ap50") == 0);
    CHECK(std::count(curve.begin(), curve.end(), '\n') == 20);  // header + 19 grid points

    // diagnose
    REQUIRE(run_cli("diagnose " + (root / "dets.json").string() + " " + (root / "ds").string() +
                    " -o " + (root / "diag.json").string()) == 0);
    CHECK(slurp(root / "diag.json").find("double_detections") != std::string::npos);
}

TEST_CASE("cli compare prints the table deltas") {
    testutil::TempDir dir;
    const fs::path root = dir.path();
    save_text(R"({"recall": 0.53, "precision": 0.85, "ap50": 0.85})", root / "standard.json");
    save_text(R"({"recall": 0.60, "precision": 0.82, "ap50": 0.87})", root / "optimised.json");
    REQUIRE(run_cli("compare " + (root / "standard.json").string() + " " +
                    (root / "optimised.json").string(), root / "out.txt") == 0);
    CHECK(slurp(root / "out.txt") == "0.07 -0.03 0.02\n");
}

TEST_CASE("cli eval with an empty detections file exits zero") {
    testutil::TempDir dir;
    const fs::path root = dir.path();
    save_text(kSceneSpec, root / "scene.json");
    REQUIRE(run_cli("synth --spec " + (root / "scene.json").string() + " -o " +
                    (root / "ds").string()) == 0);
    save_text("[]\n", root / "empty.json");
    REQUIRE(run_cli("eval " + (root / "empty.json").string() + " " + (root / "ds").string() +
                    " -o " + (root / "report.json").string()) == 0);
    const auto report = report_from_json(slurp(root / "report.json"));
    CHECK(report.recall == 0.0);
    CHECK(report.precision == 1.0);
}

TEST_CASE("cli exit codes: usage 2, module error 1") {
    testutil::TempDir dir;
    CHECK(run_cli("definitely-not-a-subcommand") == 2);
    CHECK(run_cli("plan") == 2);  // missing required arguments
    CHECK(run_cli("plan " + (dir.path() / "missing").string() + " -o " +
                  (dir.path() / "c.json").string()) == 1);
}

TEST_CASE("cli ingest writes a manifest and help exits zero") {
    testutil::TempDir dir;
    const fs::path root = dir.path();
    save_text(R"xml(<?xml version="1.0"?>
<CityModel xmlns:app="http://www.opengis.net/citygml/appearance/2.0">
  <app:ParameterizedTexture>
    <app:imageURI>wall.png</app:imageURI>
    <app:target uri="#s1"/>
  </app:ParameterizedTexture>
</CityModel>)xml",
              root / "model.gml");
    REQUIRE(run_cli("ingest " + (root / "model.gml").string() + " -o " +
                    (root / "manifest.json").string()) == 0);
    CHECK(slurp(root / "manifest.json").find("wall.png") != std::string::npos);

    save_text("<CityModel><unclosed>", root / "broken.gml");
    CHECK(run_cli("ingest " + (root / "broken.gml").string() + " -o " +
                  (root / "manifest2.json").string()) == 1);

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("eval --help") == 0);
}

TEST_CASE("cli runs are idempotent: byte-identical artifacts") {
    testutil::TempDir dir;
    const fs::path root = dir.path();
    save_text(kSceneSpec, root / "scene.json");
    REQUIRE(run_cli("synth --spec " + (root / "scene.json").string() + " -o " +
                    (root / "a").string()) == 0);
    REQUIRE(run_cli("synth --spec " + (root / "scene.json").string() + " -o " +
                    (root / "b").string()) == 0);
    CHECK(slurp(root / "a" / "annotations.json") == slurp(root / "b" / "annotations.json"));
    CHECK(slurp(root / "a" / "images" / "tex300.png") ==
          slurp(root / "b" / "images" / "tex300.png"));
}
