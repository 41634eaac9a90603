#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ensvis/geometry.hpp"  // error types

namespace ensvis {

/// log p(z) for the standard multivariate Gaussian:
/// -(k/2)*ln(2*pi) - 0.5*||z||^2.
double gaussian_logdensity(const Eigen::VectorXd& z);

/// Regularized lower incomplete gamma P(a, x). Series for x < a+1,
/// continued fraction otherwise; per-evaluation tolerance 1e-12.
double regularized_gamma_p(double a, double x);

/// Inverse CDF of the chi-square distribution with k degrees of freedom,
/// by bisection on P(k/2, q/2) to absolute tolerance 1e-10.
double chi2_quantile(int k, double p);

/// Confidence levels (1 - alpha) with their chi-square sphere radii
/// r = sqrt(chi2_quantile(k, level)).
struct ConfidenceSpec {
  std::vector<double> levels;
  std::vector<double> radii;
  int k = 0;
};

ConfidenceSpec make_confidence_spec(int k, std::vector<double> levels);

enum class SampleKind { Ball, Surface, Prior, Neighborhood };

/// Latent sample batch. Ball/surface sets keep their unit-radius pre-images
/// so a set can be rescaled to another confidence radius bit-exactly.
struct LatentSampleSet {
  std::vector<Eigen::VectorXd> points;
  SampleKind kind = SampleKind::Prior;
  double level = 0.0;   // ball/surface only
  double radius = 0.0;  // ball/surface only
  uint64_t seed = 0;
  std::vector<Eigen::VectorXd> unit;  // ball/surface only
};

/// Uniform samples of the solid confidence ball (or its surface) for a
/// level. Same (seed, count) across levels yields point-wise rescalings of
/// one underlying unit set, so sampled balls nest geometrically.
LatentSampleSet sample_ball(int k, double level, int count, uint64_t seed,
                            bool surface_only = false);

/// The same sample set scaled to the radius of another confidence level.
LatentSampleSet rescale_to_level(const LatentSampleSet& set, int k,
                                 double level);

/// i.i.d. standard-normal latent samples.
LatentSampleSet sample_prior(int k, int count, uint64_t seed);

/// One draw per center from Normal(center, sigma^2 * I); sigma = 0 returns
/// the centers unchanged.
LatentSampleSet neighborhood_samples(const std::vector<Eigen::VectorXd>& centers,
                                     double sigma, uint64_t seed);

}  // namespace ensvis
