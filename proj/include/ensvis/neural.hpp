#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "ensvis/geometry.hpp"  // error types

namespace ensvis {

enum class Activation { Tanh, Identity };

struct LayerSpec {
  int in_dim = 0;
  int out_dim = 0;
  Activation act = Activation::Tanh;
};

/// Dense network parameters, one weight matrix (out x in) and bias per layer.
struct MlpParams {
  std::vector<LayerSpec> spec;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  int in_dim() const { return spec.front().in_dim; }
  int out_dim() const { return spec.back().out_dim; }
};

/// Glorot-style uniform init in +-sqrt(6/(in+out)), biases zero.
MlpParams make_mlp(const std::vector<LayerSpec>& spec, std::mt19937_64& rng);

/// Activation record from a forward pass, consumed by backward().
struct Tape {
  Eigen::VectorXd input;
  std::vector<Eigen::VectorXd> post;  // post-activation output per layer
};

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input,
                        Tape* tape = nullptr);

/// Gradient accumulator shaped like MlpParams.
struct MlpGrad {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

MlpGrad zero_grad(const MlpParams& params);

/// Exact reverse-mode pass. Accumulates parameter gradients into `grad`
/// (so multiple inputs can share one accumulator) and returns the input
/// gradient.
Eigen::VectorXd backward(const MlpParams& params, const Tape& tape,
                         const Eigen::VectorXd& output_gradient, MlpGrad& grad);

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam(const MlpParams& params, double lr);

/// Standard bias-corrected Adam update. Throws NumericalError on
/// non-finite gradients.
void adam_step(MlpParams& params, const MlpGrad& grad, AdamState& state);

}  // namespace ensvis
