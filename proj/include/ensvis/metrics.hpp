#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ensvis/ingest.hpp"
#include "ensvis/pca_baseline.hpp"
#include "ensvis/vae.hpp"

namespace ensvis {

struct MetricReport {
  std::string method;
  double mmd_cd = 0.0;
  std::vector<double> minima;  // one per reference contour
  int points_per_contour = 0;
  uint64_t seed = 0;
  bool squared = false;
};

/// Bidirectional Chamfer distance between point sets:
/// 0.5 * (mean nearest-neighbor distance a->b + mean b->a).
/// With `squared`, squared Euclidean distances are averaged instead.
double chamfer(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
               bool squared = false);

/// Mean over references of the minimum Chamfer distance to any generated
/// contour, after uniform arc-length resampling of every contour.
MetricReport mmd_cd(const std::vector<Polyline>& references,
                    const std::vector<Polyline>& generated,
                    int points_per_contour, bool squared = false);

/// Table-1 style comparison: `count` prior samples decoded by the VAE vs
/// `count` draws from the PCA embedding Gaussian, both scored against the
/// reference members with the same seed.
std::pair<MetricReport, MetricReport>
compare_generators(const VaeModel& vae, const PcaModel& pca,
                   const Ensemble& references, int count, uint64_t seed,
                   int points_per_contour, bool squared = false);

/// JSON serialization of a report.
std::string report_to_json(const MetricReport& report);

}  // namespace ensvis
