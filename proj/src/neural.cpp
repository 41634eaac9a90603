#include "ensvis/neural.hpp"

#include <cmath>

namespace ensvis {

MlpParams make_mlp(const std::vector<LayerSpec>& spec, std::mt19937_64& rng) {
  if (spec.empty()) throw DataError("mlp needs at least one layer");
  for (size_t i = 0; i < spec.size(); ++i) {
    if (spec[i].in_dim < 1 || spec[i].out_dim < 1) {
      throw DataError("layer dimensions must be >= 1");
    }
    if (i > 0 && spec[i].in_dim != spec[i - 1].out_dim) {
      throw DataError("layer dimension chain mismatch at layer " +
                      std::to_string(i));
    }
  }
  MlpParams params;
  params.spec = spec;
  for (const LayerSpec& layer : spec) {
    const double limit = std::sqrt(6.0 / (layer.in_dim + layer.out_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(layer.out_dim, layer.in_dim);
    for (int r = 0; r < w.rows(); ++r) {
      for (int c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    params.weights.push_back(std::move(w));
    params.biases.push_back(Eigen::VectorXd::Zero(layer.out_dim));
  }
  return params;
}

Eigen::VectorXd forward(const MlpParams& params, const Eigen::VectorXd& input,
                        Tape* tape) {
  if (input.size() != params.in_dim()) {
    throw DataError("forward: input length " + std::to_string(input.size()) +
                    " != " + std::to_string(params.in_dim()));
  }
  if (tape) {
    tape->input = input;
    tape->post.clear();
    tape->post.reserve(params.spec.size());
  }
  Eigen::VectorXd h = input;
  for (size_t i = 0; i < params.spec.size(); ++i) {
    h = params.weights[i] * h + params.biases[i];
    if (params.spec[i].act == Activation::Tanh) {
      h = h.array().tanh().matrix();
    }
    if (tape) tape->post.push_back(h);
  }
  return h;
}

MlpGrad zero_grad(const MlpParams& params) {
  MlpGrad g;
  for (size_t i = 0; i < params.weights.size(); ++i) {
    g.weights.push_back(Eigen::MatrixXd::Zero(params.weights[i].rows(),
                                              params.weights[i].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(params.biases[i].size()));
  }
  return g;
}

Eigen::VectorXd backward(const MlpParams& params, const Tape& tape,
                         const Eigen::VectorXd& output_gradient,
                         MlpGrad& grad) {
  const size_t n = params.spec.size();
  if (tape.post.size() != n) throw DataError("backward: tape/params mismatch");
  if (output_gradient.size() != params.out_dim()) {
    throw DataError("backward: output gradient length mismatch");
  }
  Eigen::VectorXd delta = output_gradient;
  for (size_t i = n; i-- > 0;) {
    if (params.spec[i].act == Activation::Tanh) {
      // d tanh(u)/du = 1 - tanh(u)^2, and tape stores tanh(u).
      delta = (delta.array() * (1.0 - tape.post[i].array().square())).matrix();
    }
    const Eigen::VectorXd& prev = i == 0 ? tape.input : tape.post[i - 1];
    grad.weights[i].noalias() += delta * prev.transpose();
    grad.biases[i] += delta;
    delta = params.weights[i].transpose() * delta;
  }
  return delta;
}

AdamState make_adam(const MlpParams& params, double lr) {
  AdamState s;
  s.lr = lr;
  for (size_t i = 0; i < params.weights.size(); ++i) {
    s.m_w.push_back(Eigen::MatrixXd::Zero(params.weights[i].rows(),
                                          params.weights[i].cols()));
    s.v_w.push_back(Eigen::MatrixXd::Zero(params.weights[i].rows(),
                                          params.weights[i].cols()));
    s.m_b.push_back(Eigen::VectorXd::Zero(params.biases[i].size()));
    s.v_b.push_back(Eigen::VectorXd::Zero(params.biases[i].size()));
  }
  return s;
}

void adam_step(MlpParams& params, const MlpGrad& grad, AdamState& state) {
  for (const auto& g : grad.weights) {
    if (!g.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  }
  for (const auto& g : grad.biases) {
    if (!g.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  }
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, state.step);
  const double c2 = 1.0 - std::pow(state.beta2, state.step);

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = (state.beta2 * v.array() + (1.0 - state.beta2) * g.array().square())
            .matrix();
    p -= (state.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps))
             .matrix();
  };
  for (size_t i = 0; i < params.weights.size(); ++i) {
    update(params.weights[i], grad.weights[i], state.m_w[i], state.v_w[i]);
    update(params.biases[i], grad.biases[i], state.m_b[i], state.v_b[i]);
  }
}

}  // namespace ensvis
