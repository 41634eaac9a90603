#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ensvis/geometry.hpp"

namespace ensvis {

struct Ensemble {
  std::string name;
  std::array<double, 4> bounds{};  // xmin, ymin, xmax, ymax
  std::vector<Polyline> members;
};

/// Ensemble-global coordinate normalization: p' = scale * (p - center).
struct NormalizationParams {
  Vec2 center;
  double scale = 1.0;
};

/// Flattened, normalized contour coordinates in interleaved order
/// (x0, y0, x1, y1, ...). Length is always 2*s.
struct FeatureVector {
  Eigen::VectorXd values;
  int s = 0;
  bool closed = false;
};

Ensemble load_ensemble_json(const std::string& path);
void save_ensemble_json(const Ensemble& e, const std::string& path);

/// Loads a directory of text grids, contours each at `iso`, and keeps the
/// longest contour per member. Members without any crossing are an error.
Ensemble load_ensemble_gridset(const std::string& dir, double iso);

/// Resamples every member to s points, normalizes with center = bounds
/// midpoint and scale = 2/max(width, height), and flattens. When
/// `align_start` is set, closed members are rotated to start at the vertex
/// farthest along +x from the member centroid, which roughly aligns start
/// points across members.
std::pair<std::vector<FeatureVector>, NormalizationParams>
to_features(const Ensemble& e, int s, bool align_start = false);

/// De-interleaves and inverts the normalization.
Polyline from_features(const FeatureVector& v, const NormalizationParams& p);

struct PerturbedCircleParams {
  double radius = 1.0;
  double radius_sigma = 0.35;  // relative radius perturbation
  double center_sigma = 0.25;  // absolute center jitter
  int vertices = 128;
};

struct PhaseSineBandParams {
  double amplitude = 2.0;
  double omega = 3.0;
  double offset_sigma = 0.4;   // vertical offset jitter
  double x_min = 0.0;
  double x_max = 6.283185307179586;
  int vertices = 128;
};

Ensemble synth_perturbed_circle(int n, uint64_t seed,
                                const PerturbedCircleParams& params = {});
Ensemble synth_phase_sine_band(int n, uint64_t seed,
                               const PhaseSineBandParams& params = {});

/// Dispatch by family name: "perturbed-circle" or "phase-sine-band".
Ensemble synth_ensemble(const std::string& family, int n, uint64_t seed);

}  // namespace ensvis
