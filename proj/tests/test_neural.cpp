#include <doctest.h>

#include <cmath>
#include <random>

#include "ensvis/neural.hpp"

using namespace ensvis;

namespace {

// Straightforward re-evaluation used as the forward oracle.
Eigen::VectorXd forward_oracle(const MlpParams& p, Eigen::VectorXd h) {
  for (size_t i = 0; i < p.spec.size(); ++i) {
    Eigen::VectorXd u = p.weights[i] * h + p.biases[i];
    if (p.spec[i].act == Activation::Tanh) {
      for (Eigen::Index j = 0; j < u.size(); ++j) u[j] = std::tanh(u[j]);
    }
    h = u;
  }
  return h;
}

double loss_of(const MlpParams& p, const Eigen::VectorXd& x) {
  return 0.5 * forward_oracle(p, x).squaredNorm();
}

}  // namespace

TEST_CASE("identity layer passes input through") {
  std::mt19937_64 rng(1);
  MlpParams p = make_mlp({{3, 3, Activation::Identity}}, rng);
  p.weights[0] = Eigen::MatrixXd::Identity(3, 3);
  p.biases[0].setZero();
  Eigen::VectorXd x(3);
  x << 1.5, -2.0, 0.25;
  CHECK((forward(p, x) - x).norm() == doctest::Approx(0.0));
}

TEST_CASE("zero tanh layer outputs zero") {
  std::mt19937_64 rng(1);
  MlpParams p = make_mlp({{4, 2, Activation::Tanh}}, rng);
  p.weights[0].setZero();
  Eigen::VectorXd x = Eigen::VectorXd::Random(4);
  CHECK(forward(p, x).norm() == doctest::Approx(0.0));
}

TEST_CASE("forward matches the re-evaluation oracle") {
  std::mt19937_64 rng(2);
  MlpParams p = make_mlp({{5, 7, Activation::Tanh}, {7, 3, Activation::Identity}},
                         rng);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x = Eigen::VectorXd::Random(5);
    CHECK((forward(p, x) - forward_oracle(p, x)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("forward rejects shape mismatch") {
  std::mt19937_64 rng(3);
  MlpParams p = make_mlp({{4, 2, Activation::Tanh}}, rng);
  CHECK_THROWS_AS(forward(p, Eigen::VectorXd::Zero(5)), DataError);
}

TEST_CASE("linear layer gradient of half squared norm is y x^T") {
  std::mt19937_64 rng(4);
  MlpParams p = make_mlp({{3, 2, Activation::Identity}}, rng);
  Eigen::VectorXd x = Eigen::VectorXd::Random(3);
  Tape tape;
  Eigen::VectorXd y = forward(p, x, &tape);
  MlpGrad grad = zero_grad(p);
  backward(p, tape, y, grad);
  Eigen::MatrixXd expect = y * x.transpose();
  CHECK((grad.weights[0] - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((grad.biases[0] - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero output gradient yields zero parameter gradients") {
  std::mt19937_64 rng(5);
  MlpParams p = make_mlp({{3, 4, Activation::Tanh}, {4, 2, Activation::Tanh}},
                         rng);
  Tape tape;
  forward(p, Eigen::VectorXd::Random(3), &tape);
  MlpGrad grad = zero_grad(p);
  backward(p, tape, Eigen::VectorXd::Zero(2), grad);
  for (const auto& w : grad.weights) CHECK(w.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& b : grad.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradients match central finite differences over random nets") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_int_distribution<int> depth_dist(1, 3);
  std::uniform_int_distribution<int> act_dist(0, 1);
  const double h = 1e-5;

  for (int cfg = 0; cfg < 100; ++cfg) {
    int depth = depth_dist(rng);
    std::vector<LayerSpec> spec;
    int in = dim(rng);
    for (int l = 0; l < depth; ++l) {
      int out = dim(rng);
      spec.push_back({in, out,
                      act_dist(rng) ? Activation::Tanh : Activation::Identity});
      in = out;
    }
    MlpParams p = make_mlp(spec, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Random(spec.front().in_dim);

    Tape tape;
    Eigen::VectorXd y = forward(p, x, &tape);
    MlpGrad grad = zero_grad(p);
    backward(p, tape, y, grad);  // gradient of 0.5*||y||^2

    double max_rel = 0.0;
    for (size_t l = 0; l < p.weights.size(); ++l) {
      for (int r = 0; r < p.weights[l].rows(); ++r) {
        for (int c = 0; c < p.weights[l].cols(); ++c) {
          MlpParams pp = p;
          pp.weights[l](r, c) += h;
          MlpParams pm = p;
          pm.weights[l](r, c) -= h;
          double fd = (loss_of(pp, x) - loss_of(pm, x)) / (2 * h);
          double denom = std::max({std::abs(fd),
                                   std::abs(grad.weights[l](r, c)), 1e-6});
          max_rel = std::max(max_rel,
                             std::abs(fd - grad.weights[l](r, c)) / denom);
        }
      }
    }
    CHECK(max_rel < 1e-4);
  }
}

TEST_CASE("adam with zero gradients leaves parameters unchanged") {
  std::mt19937_64 rng(7);
  MlpParams p = make_mlp({{2, 2, Activation::Identity}}, rng);
  MlpParams before = p;
  AdamState state = make_adam(p, 1e-2);
  adam_step(p, zero_grad(p), state);
  CHECK(state.step == 1);
  CHECK((p.weights[0] - before.weights[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam moves opposite a constant gradient") {
  std::mt19937_64 rng(8);
  MlpParams p = make_mlp({{1, 1, Activation::Identity}}, rng);
  p.weights[0](0, 0) = 0.0;
  AdamState state = make_adam(p, 1e-2);
  MlpGrad g = zero_grad(p);
  g.weights[0](0, 0) = 3.0;
  for (int i = 0; i < 50; ++i) adam_step(p, g, state);
  CHECK(p.weights[0](0, 0) < 0.0);
}

TEST_CASE("adam minimizes a quadratic bowl") {
  std::mt19937_64 rng(9);
  MlpParams p = make_mlp({{1, 8, Activation::Identity}}, rng);
  AdamState state = make_adam(p, 1e-2);
  for (int i = 0; i < 500; ++i) {
    MlpGrad g = zero_grad(p);
    g.weights[0] = 2.0 * p.weights[0];  // gradient of ||w||^2
    adam_step(p, g, state);
    CHECK(p.weights[0].allFinite());
  }
  CHECK(p.weights[0].norm() < 1e-3);
}

TEST_CASE("adam rejects non-finite gradients") {
  std::mt19937_64 rng(10);
  MlpParams p = make_mlp({{1, 1, Activation::Identity}}, rng);
  AdamState state = make_adam(p, 1e-2);
  MlpGrad g = zero_grad(p);
  g.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam_step(p, g, state), NumericalError);
}
