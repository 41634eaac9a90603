#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ensvis/metrics.hpp"

using namespace ensvis;

namespace {

std::vector<Vec2> random_points(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) pts.push_back({coord(rng), coord(rng)});
  return pts;
}

Polyline circle(double r, double cx = 0.0, double cy = 0.0, int n = 32) {
  std::vector<Vec2> pts;
  for (int j = 0; j < n; ++j) {
    double a = 2 * M_PI * j / n;
    pts.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
  }
  return Polyline(std::move(pts), true);
}

}  // namespace

TEST_CASE("chamfer of a set with itself is zero") {
  std::mt19937_64 rng(1);
  auto a = random_points(rng, 20);
  CHECK(chamfer(a, a) == doctest::Approx(0.0));
}

TEST_CASE("chamfer of two singletons is their distance") {
  CHECK(chamfer({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
  CHECK(chamfer({{0, 0}}, {{3, 4}}, /*squared=*/true) == doctest::Approx(25.0));
}

TEST_CASE("chamfer is symmetric and nonnegative") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_points(rng, 15);
    auto b = random_points(rng, 9);
    double ab = chamfer(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(chamfer(b, a)));
  }
}

TEST_CASE("chamfer rejects empty sets") {
  CHECK_THROWS_AS(chamfer({}, {{1, 1}}), DataError);
}

TEST_CASE("mmd_cd of a set against itself is zero") {
  std::vector<Polyline> refs{circle(1.0), circle(1.2), circle(0.8)};
  MetricReport report = mmd_cd(refs, refs, 50);
  CHECK(report.mmd_cd == doctest::Approx(0.0));
  REQUIRE(report.minima.size() == 3);
  for (double m : report.minima) CHECK(m == doctest::Approx(0.0));
}

TEST_CASE("minimum matching picks the identical contour") {
  std::vector<Polyline> refs{circle(1.0)};
  std::vector<Polyline> gen{circle(1.0), circle(5.0, 20.0, 20.0)};
  MetricReport report = mmd_cd(refs, gen, 50);
  CHECK(report.mmd_cd == doctest::Approx(0.0));
}

TEST_CASE("mmd_cd is the mean of the per-reference minima") {
  std::vector<Polyline> refs{circle(1.0), circle(2.0)};
  std::vector<Polyline> gen{circle(1.1), circle(1.9)};
  MetricReport report = mmd_cd(refs, gen, 64);
  double mean = (report.minima[0] + report.minima[1]) / 2.0;
  CHECK(std::abs(report.mmd_cd - mean) < 1e-12);
}

TEST_CASE("mmd_cd is invariant under generated-list permutation") {
  std::vector<Polyline> refs{circle(1.0), circle(1.5)};
  std::vector<Polyline> gen{circle(0.9), circle(1.4), circle(2.0)};
  std::vector<Polyline> shuffled{gen[2], gen[0], gen[1]};
  CHECK(mmd_cd(refs, gen, 40).mmd_cd ==
        doctest::Approx(mmd_cd(refs, shuffled, 40).mmd_cd));
}

TEST_CASE("adding a generated contour never increases mmd_cd") {
  std::mt19937_64 rng(3);
  std::vector<Polyline> refs{circle(1.0), circle(1.3)};
  std::vector<Polyline> gen{circle(0.7)};
  double prev = mmd_cd(refs, gen, 40).mmd_cd;
  for (double r : {0.9, 1.1, 1.6, 2.5}) {
    gen.push_back(circle(r));
    double cur = mmd_cd(refs, gen, 40).mmd_cd;
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("report json carries the configuration") {
  std::vector<Polyline> refs{circle(1.0)};
  MetricReport report = mmd_cd(refs, refs, 30);
  report.method = "vae";
  report.seed = 7;
  std::string doc = report_to_json(report);
  CHECK(doc.find("\"method\": \"vae\"") != std::string::npos);
  CHECK(doc.find("\"points_per_contour\": 30") != std::string::npos);
}

TEST_CASE("compare_generators runs end to end on a near-linear family") {
  Ensemble e = synth_perturbed_circle(20, 3);
  auto [features, norm] = to_features(e, 30);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.k = 3;
  cfg.s = 30;
  auto [model, history] = train(features, cfg, norm);
  PcaModel pca = pca_fit(features, 3);
  auto [vae_report, pca_report] =
      compare_generators(model, pca, e, 20, 11, 30);
  CHECK(std::isfinite(vae_report.mmd_cd));
  CHECK(std::isfinite(pca_report.mmd_cd));
  CHECK(vae_report.method == "vae");
  CHECK(pca_report.method == "pca");
  CHECK(vae_report.minima.size() == e.members.size());
}
