#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ensvis/ingest.hpp"

namespace ensvis {

/// Linear embedding baseline: top-k principal subspace of the feature
/// matrix plus a Gaussian fitted to the member embeddings.
struct PcaModel {
  Eigen::VectorXd mean;         // feature-space mean, length d
  Eigen::MatrixXd components;   // d x k, orthonormal columns
  Eigen::VectorXd eigenvalues;  // k, descending, n-1 denominator
  Eigen::VectorXd embed_mean;   // k
  Eigen::MatrixXd embed_cov;    // k x k, symmetric PSD
  int s = 0;
  bool closed = false;
};

/// Mean-centered SVD of the data matrix; Gaussian fit over embeddings uses
/// the sample mean and (by default full) sample covariance with the n-1
/// denominator.
PcaModel pca_fit(const std::vector<FeatureVector>& features, int k,
                 bool diagonal_cov = false);

Eigen::VectorXd pca_project(const PcaModel& model, const FeatureVector& x);
FeatureVector pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& y);

/// Draws from the fitted embedding Gaussian via symmetric eigen
/// factorization (negative eigenvalues clamped at 0 down to -1e-10) and
/// reconstructs linearly.
std::vector<FeatureVector> pca_sample(const PcaModel& model, int count,
                                      uint64_t seed);

}  // namespace ensvis
