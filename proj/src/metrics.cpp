#include "ensvis/metrics.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "ensvis/latent_stats.hpp"

using nlohmann::json;

namespace ensvis {

double chamfer(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
               bool squared) {
  if (a.empty() || b.empty()) throw DataError("chamfer: empty point set");
  auto directed = [&](const std::vector<Vec2>& from,
                      const std::vector<Vec2>& to) {
    double sum = 0.0;
    for (const Vec2& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec2& q : to) {
        const double dx = p.x - q.x;
        const double dy = p.y - q.y;
        best = std::min(best, dx * dx + dy * dy);
      }
      sum += squared ? best : std::sqrt(best);
    }
    return sum / from.size();
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

MetricReport mmd_cd(const std::vector<Polyline>& references,
                    const std::vector<Polyline>& generated,
                    int points_per_contour, bool squared) {
  if (references.empty() || generated.empty()) {
    throw DataError("mmd_cd: empty contour list");
  }
  if (points_per_contour < 2) {
    throw DataError("mmd_cd: points_per_contour must be >= 2");
  }
  auto sample = [&](const std::vector<Polyline>& list) {
    std::vector<std::vector<Vec2>> out;
    out.reserve(list.size());
    for (const Polyline& p : list) {
      out.push_back(resample_arclength(p, points_per_contour).points);
    }
    return out;
  };
  const auto ref_pts = sample(references);
  const auto gen_pts = sample(generated);

  MetricReport report;
  report.points_per_contour = points_per_contour;
  report.squared = squared;
  double sum = 0.0;
  for (const auto& r : ref_pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gen_pts) {
      best = std::min(best, chamfer(r, g, squared));
    }
    report.minima.push_back(best);
    sum += best;
  }
  report.mmd_cd = sum / ref_pts.size();
  return report;
}

std::pair<MetricReport, MetricReport>
compare_generators(const VaeModel& vae, const PcaModel& pca,
                   const Ensemble& references, int count, uint64_t seed,
                   int points_per_contour, bool squared) {
  if (count < 1) throw DataError("compare_generators: count must be >= 1");

  LatentSampleSet prior = sample_prior(vae.k, count, seed);
  std::vector<Polyline> vae_contours;
  vae_contours.reserve(count);
  for (const Eigen::VectorXd& z : prior.points) {
    vae_contours.push_back(from_features(decode(vae, z), vae.norm));
  }

  std::vector<Polyline> pca_contours;
  pca_contours.reserve(count);
  for (const FeatureVector& fv : pca_sample(pca, count, seed)) {
    pca_contours.push_back(from_features(fv, vae.norm));
  }

  MetricReport vae_report =
      mmd_cd(references.members, vae_contours, points_per_contour, squared);
  vae_report.method = "vae";
  vae_report.seed = seed;
  MetricReport pca_report =
      mmd_cd(references.members, pca_contours, points_per_contour, squared);
  pca_report.method = "pca";
  pca_report.seed = seed;
  return {std::move(vae_report), std::move(pca_report)};
}

std::string report_to_json(const MetricReport& report) {
  json doc;
  doc["method"] = report.method;
  doc["mmd_cd"] = report.mmd_cd;
  doc["minima"] = report.minima;
  doc["points_per_contour"] = report.points_per_contour;
  doc["seed"] = report.seed;
  doc["squared"] = report.squared;
  return doc.dump(2);
}

}  // namespace ensvis
