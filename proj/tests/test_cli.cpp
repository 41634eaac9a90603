#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "ensvis/latent_stats.hpp"
#include "ensvis/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = ENSVIS_CLI_PATH;

struct WorkDir {
  fs::path path;
  WorkDir() {
    path = fs::temp_directory_path() / "ensvis_cli_tests";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~WorkDir() { fs::remove_all(path); }
  std::string sub(const std::string& name) const {
    return (path / name).string();
  }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

// Small, fast pipeline shared by the image tests.
void train_small(const WorkDir& wd, const std::string& ensemble_dir,
                 const std::string& model_dir) {
  REQUIRE(run("synth --family perturbed-circle --n 12 --seed 7 --out " +
              wd.sub(ensemble_dir)) == 0);
  REQUIRE(run("train --input " + wd.sub(ensemble_dir) +
              "/ensemble.json --k 3 --s 24 --epochs 200 --seed 1 --out " +
              wd.sub(model_dir)) == 0);
}

}  // namespace

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("") == 2);
  CHECK(run("no-such-command") == 2);
  CHECK(run("train") == 2);                   // missing required --input
  CHECK(run("synth --n 1") == 2);             // below the minimum
  CHECK(run("bands --input x --mode wedge") == 2);
}

TEST_CASE("data errors exit with code 3") {
  WorkDir wd;
  CHECK(run("train --input /nonexistent.json --out " + wd.sub("o")) == 3);
  std::ofstream(wd.path / "garbage.json") << "not json";
  CHECK(run("train --input " + wd.sub("garbage.json") + " --out " +
            wd.sub("o")) == 3);
}

TEST_CASE("synth output is deterministic and loadable") {
  WorkDir wd;
  CHECK(run("synth --family perturbed-circle --n 10 --seed 3 --out " +
            wd.sub("a")) == 0);
  CHECK(run("synth --family perturbed-circle --n 10 --seed 3 --out " +
            wd.sub("b")) == 0);
  CHECK(slurp(wd.sub("a") + "/ensemble.json") ==
        slurp(wd.sub("b") + "/ensemble.json"));
  CHECK(fs::exists(wd.sub("a") + "/manifest.json"));
  // No leftover temp files from the atomic writes.
  for (const auto& entry : fs::directory_iterator(wd.sub("a"))) {
    CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("training produces identical checkpoints across reruns") {
  WorkDir wd;
  train_small(wd, "ens", "m1");
  REQUIRE(run("train --input " + wd.sub("ens") +
              "/ensemble.json --k 3 --s 24 --epochs 200 --seed 1 --out " +
              wd.sub("m2")) == 0);
  CHECK(slurp(wd.sub("m1") + "/model.json") ==
        slurp(wd.sub("m2") + "/model.json"));
  CHECK(fs::exists(wd.sub("m1") + "/loss_history.json"));
}

TEST_CASE("bands pipeline writes nested bands with calibrated metadata") {
  WorkDir wd;
  train_small(wd, "ens", "model");
  REQUIRE(run("bands --input " + wd.sub("model") +
              "/model.json --samples 100 --width 64 --height 64 --seed 4 "
              "--out " + wd.sub("bands")) == 0);

  json meta = json::parse(slurp(wd.sub("bands") + "/bands_meta.json"));
  REQUIRE(meta["levels"].size() == 3);
  for (size_t i = 0; i < meta["levels"].size(); ++i) {
    double expect = std::sqrt(
        ensvis::chi2_quantile(meta["k"].get<int>(), meta["levels"][i]));
    CHECK(std::abs(meta["radii"][i].get<double>() - expect) < 1e-9);
  }
  CHECK(meta["mode"] == "ball");

  ensvis::Image img = ensvis::read_ppm(wd.sub("bands") + "/bands.ppm");
  CHECK(img.width == 64);
  CHECK(img.height == 64);

  // Rerun reproduces the image byte-exactly.
  REQUIRE(run("bands --input " + wd.sub("model") +
              "/model.json --samples 100 --width 64 --height 64 --seed 4 "
              "--out " + wd.sub("bands2")) == 0);
  CHECK(slurp(wd.sub("bands") + "/bands.ppm") ==
        slurp(wd.sub("bands2") + "/bands.ppm"));
}

TEST_CASE("single-level bands work") {
  WorkDir wd;
  train_small(wd, "ens", "model");
  CHECK(run("bands --input " + wd.sub("model") +
            "/model.json --levels 0.9 --samples 50 --width 32 --height 32 "
            "--out " + wd.sub("bands")) == 0);
  json meta = json::parse(slurp(wd.sub("bands") + "/bands_meta.json"));
  CHECK(meta["levels"].size() == 1);
}

TEST_CASE("density pipeline is deterministic and viewer-parseable") {
  WorkDir wd;
  train_small(wd, "ens", "model");
  REQUIRE(run("density --input " + wd.sub("model") +
              "/model.json --samples 50 --width 48 --height 48 --seed 9 "
              "--out " + wd.sub("d1")) == 0);
  REQUIRE(run("density --input " + wd.sub("model") +
              "/model.json --samples 50 --width 48 --height 48 --seed 9 "
              "--out " + wd.sub("d2")) == 0);
  CHECK(slurp(wd.sub("d1") + "/density.pgm") ==
        slurp(wd.sub("d2") + "/density.pgm"));
  CHECK(slurp(wd.sub("d1") + "/density.ppm") ==
        slurp(wd.sub("d2") + "/density.ppm"));
  CHECK(slurp(wd.sub("d1") + "/density.pgm").rfind("P5\n48 48\n255\n", 0) == 0);

  // samples=1 degrades to a binary raster.
  REQUIRE(run("density --input " + wd.sub("model") +
              "/model.json --samples 1 --width 32 --height 32 --out " +
              wd.sub("d3")) == 0);
  std::string pgm = slurp(wd.sub("d3") + "/density.pgm");
  size_t payload = 0;
  for (int newlines = 0; newlines < 3; ++payload) {
    if (pgm[payload] == '\n') ++newlines;
  }
  for (size_t i = payload; i < pgm.size(); ++i) {
    uint8_t v = static_cast<uint8_t>(pgm[i]);
    CHECK((v == 0 || v == 255));
  }
}

TEST_CASE("eval writes a report with per-seed rows") {
  WorkDir wd;
  train_small(wd, "ens", "model");
  REQUIRE(run("eval --input " + wd.sub("ens") + "/ensemble.json --model " +
              wd.sub("model") + "/model.json --points 24 --seeds 1 --seeds 2 "
              "--out " + wd.sub("eval")) == 0);
  json doc = json::parse(slurp(wd.sub("eval") + "/eval.json"));
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["count"] == 12);  // defaults to the ensemble size
  for (const auto& row : doc["rows"]) {
    CHECK(row["vae_mmd_cd"].get<double>() >= 0.0);
    CHECK(row["pca_mmd_cd"].get<double>() >= 0.0);
  }
}

TEST_CASE("spaghetti covers every member") {
  WorkDir wd;
  REQUIRE(run("synth --family phase-sine-band --n 20 --seed 2 --out " +
              wd.sub("ens")) == 0);
  REQUIRE(run("spaghetti --input " + wd.sub("ens") +
              "/ensemble.json --width 64 --height 64 --out " +
              wd.sub("s1")) == 0);
  REQUIRE(run("spaghetti --input " + wd.sub("ens") +
              "/ensemble.json --width 64 --height 64 --out " +
              wd.sub("s2")) == 0);
  CHECK(slurp(wd.sub("s1") + "/spaghetti.ppm") ==
        slurp(wd.sub("s2") + "/spaghetti.ppm"));
  ensvis::Image img = ensvis::read_ppm(wd.sub("s1") + "/spaghetti.ppm");
  int covered = 0;
  for (size_t i = 0; i < img.rgb.size(); i += 3) {
    if (img.rgb[i] != 255) ++covered;
  }
  CHECK(covered > 0);
}

TEST_CASE("config file values are overridden by flags") {
  WorkDir wd;
  std::ofstream(wd.path / "synth.cfg") << "family=perturbed-circle\n"
                                       << "n=10\n"
                                       << "seed=5\n";
  REQUIRE(run("synth --config " + wd.sub("synth.cfg") + " --out " +
              wd.sub("a")) == 0);
  REQUIRE(run("synth --config " + wd.sub("synth.cfg") + " --seed 6 --out " +
              wd.sub("b")) == 0);
  CHECK(slurp(wd.sub("a") + "/ensemble.json") !=
        slurp(wd.sub("b") + "/ensemble.json"));
  json manifest = json::parse(slurp(wd.sub("b") + "/manifest.json"));
  CHECK(manifest["config"]["seed"] == 6);
}
