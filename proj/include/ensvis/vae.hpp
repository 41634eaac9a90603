#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ensvis/ingest.hpp"
#include "ensvis/neural.hpp"

namespace ensvis {

/// Encoder ends in a single linear layer of width 2k holding the Gaussian
/// posterior mean (first k) and log-variance (last k).
struct VaeModel {
  MlpParams encoder;
  MlpParams decoder;
  int k = 0;
  int s = 0;
  int m = 2;
  NormalizationParams norm;
  bool closed = false;
  uint64_t seed = 0;
  double beta = 1.0;
};

struct LossBreakdown {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

struct TrainConfig {
  int epochs = 4000;
  double lr = 1e-3;
  double beta = 1.0;
  uint64_t seed = 42;
  int k = 8;
  int s = 100;
};

/// Fresh untrained model with the default mirrored architecture:
/// encoder 2s -> 128 tanh -> 64 tanh -> 2k linear,
/// decoder k -> 64 tanh -> 128 tanh -> 2s linear.
VaeModel make_vae(int s, int k, const NormalizationParams& norm, bool closed,
                  uint64_t seed);

std::pair<Eigen::VectorXd, Eigen::VectorXd> encode(const VaeModel& model,
                                                   const FeatureVector& x);

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& logvar,
                               const Eigen::VectorXd& noise);

FeatureVector decode(const VaeModel& model, const Eigen::VectorXd& z);

/// Negative-ELBO pieces for one member with a frozen noise draw:
/// reconstruction = 0.5*||x - decode(reparameterize(...))||^2,
/// kl = 0.5*sum(mu^2 + exp(logvar) - logvar - 1),
/// total = reconstruction + beta*kl.
LossBreakdown elbo_loss(const VaeModel& model, const FeatureVector& x,
                        const Eigen::VectorXd& noise, double beta);

/// Loss plus exact gradients w.r.t. encoder and decoder parameters,
/// accumulated into the supplied accumulators.
LossBreakdown elbo_gradients(const VaeModel& model, const FeatureVector& x,
                             const Eigen::VectorXd& noise, double beta,
                             MlpGrad& enc_grad, MlpGrad& dec_grad);

/// Full-batch Adam on the mean negative ELBO with one noise draw per
/// member per epoch. KL weight ramps linearly from 0 to cfg.beta over the
/// first 10% of epochs. Deterministic under cfg.
std::pair<VaeModel, std::vector<LossBreakdown>>
train(const std::vector<FeatureVector>& features, const TrainConfig& cfg,
      const NormalizationParams& norm);

void save_model(const VaeModel& model, const std::string& path);
VaeModel load_model(const std::string& path);

}  // namespace ensvis
