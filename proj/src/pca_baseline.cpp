#include "ensvis/pca_baseline.hpp"

#include <cmath>
#include <random>

namespace ensvis {

PcaModel pca_fit(const std::vector<FeatureVector>& features, int k,
                 bool diagonal_cov) {
  const int n = static_cast<int>(features.size());
  if (n < 2) throw DataError("pca_fit: need at least 2 members");
  const Eigen::Index d = features.front().values.size();
  if (k < 1 || k > std::min<Eigen::Index>(n - 1, d)) {
    throw DataError("pca_fit: k must satisfy 1 <= k <= min(n-1, d)");
  }
  for (const FeatureVector& f : features) {
    if (f.values.size() != d) throw DataError("pca_fit: ragged features");
  }

  Eigen::MatrixXd data(n, d);
  for (int i = 0; i < n; ++i) data.row(i) = features[i].values.transpose();

  PcaModel model;
  model.s = features.front().s;
  model.closed = features.front().closed;
  model.mean = data.colwise().mean().transpose();
  Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  model.components = svd.matrixV().leftCols(k);
  model.eigenvalues =
      svd.singularValues().head(k).array().square() / (n - 1.0);

  Eigen::MatrixXd embeddings = centered * model.components;  // n x k
  model.embed_mean = embeddings.colwise().mean().transpose();
  Eigen::MatrixXd ec = embeddings.rowwise() - model.embed_mean.transpose();
  model.embed_cov = ec.transpose() * ec / (n - 1.0);
  if (diagonal_cov) {
    model.embed_cov = model.embed_cov.diagonal().asDiagonal();
  }
  return model;
}

Eigen::VectorXd pca_project(const PcaModel& model, const FeatureVector& x) {
  if (x.values.size() != model.mean.size()) {
    throw DataError("pca_project: feature length mismatch");
  }
  return model.components.transpose() * (x.values - model.mean);
}

FeatureVector pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& y) {
  if (y.size() != model.components.cols()) {
    throw DataError("pca_reconstruct: embedding length mismatch");
  }
  FeatureVector fv;
  fv.values = model.mean + model.components * y;
  fv.s = model.s;
  fv.closed = model.closed;
  return fv;
}

std::vector<FeatureVector> pca_sample(const PcaModel& model, int count,
                                      uint64_t seed) {
  if (count < 1) throw DataError("pca_sample: count must be >= 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.embed_cov);
  Eigen::VectorXd evals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals[i] < -1e-10) {
      throw NumericalError("pca_sample: embedding covariance not PSD");
    }
    evals[i] = std::max(evals[i], 0.0);
  }
  Eigen::MatrixXd factor =
      eig.eigenvectors() * evals.array().sqrt().matrix().asDiagonal();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<FeatureVector> out;
  out.reserve(count);
  const Eigen::Index k = model.components.cols();
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd u(k);
    for (Eigen::Index j = 0; j < k; ++j) u[j] = gauss(rng);
    out.push_back(pca_reconstruct(model, model.embed_mean + factor * u));
  }
  return out;
}

}  // namespace ensvis
