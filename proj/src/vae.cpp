#include "ensvis/vae.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

using nlohmann::json;

namespace ensvis {

namespace {
constexpr const char* kCheckpointVersion = "ensvis-vae-1";
}

VaeModel make_vae(int s, int k, const NormalizationParams& norm, bool closed,
                  uint64_t seed) {
  if (s < 2 || k < 1) throw DataError("make_vae: s >= 2 and k >= 1 required");
  const int d = 2 * s;
  std::mt19937_64 rng(seed);
  VaeModel model;
  model.encoder = make_mlp({{d, 128, Activation::Tanh},
                            {128, 64, Activation::Tanh},
                            {64, 2 * k, Activation::Identity}},
                           rng);
  model.decoder = make_mlp({{k, 64, Activation::Tanh},
                            {64, 128, Activation::Tanh},
                            {128, d, Activation::Identity}},
                           rng);
  model.k = k;
  model.s = s;
  model.norm = norm;
  model.closed = closed;
  model.seed = seed;
  return model;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> encode(const VaeModel& model,
                                                   const FeatureVector& x) {
  if (x.values.size() != model.s * model.m) {
    throw DataError("encode: feature length mismatch");
  }
  Eigen::VectorXd heads = forward(model.encoder, x.values);
  return {heads.head(model.k), heads.tail(model.k)};
}

Eigen::VectorXd reparameterize(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& logvar,
                               const Eigen::VectorXd& noise) {
  if (mu.size() != logvar.size() || mu.size() != noise.size()) {
    throw DataError("reparameterize: length mismatch");
  }
  return mu.array() + (0.5 * logvar.array()).exp() * noise.array();
}

FeatureVector decode(const VaeModel& model, const Eigen::VectorXd& z) {
  if (z.size() != model.k) throw DataError("decode: latent length mismatch");
  FeatureVector fv;
  fv.values = forward(model.decoder, z);
  fv.s = model.s;
  fv.closed = model.closed;
  return fv;
}

namespace {

double kl_to_standard_normal(const Eigen::VectorXd& mu,
                             const Eigen::VectorXd& logvar) {
  return 0.5 * (mu.array().square() + logvar.array().exp() - logvar.array() -
                1.0)
                   .sum();
}

}  // namespace

LossBreakdown elbo_loss(const VaeModel& model, const FeatureVector& x,
                        const Eigen::VectorXd& noise, double beta) {
  auto [mu, logvar] = encode(model, x);
  Eigen::VectorXd z = reparameterize(mu, logvar, noise);
  FeatureVector xhat = decode(model, z);
  LossBreakdown loss;
  loss.reconstruction = 0.5 * (x.values - xhat.values).squaredNorm();
  loss.kl = kl_to_standard_normal(mu, logvar);
  loss.total = loss.reconstruction + beta * loss.kl;
  if (!std::isfinite(loss.total)) {
    throw NumericalError("elbo_loss: non-finite loss");
  }
  return loss;
}

LossBreakdown elbo_gradients(const VaeModel& model, const FeatureVector& x,
                             const Eigen::VectorXd& noise, double beta,
                             MlpGrad& enc_grad, MlpGrad& dec_grad) {
  Tape enc_tape;
  Eigen::VectorXd heads = forward(model.encoder, x.values, &enc_tape);
  Eigen::VectorXd mu = heads.head(model.k);
  Eigen::VectorXd logvar = heads.tail(model.k);
  Eigen::VectorXd sigma = (0.5 * logvar.array()).exp().matrix();
  Eigen::VectorXd z = mu.array() + sigma.array() * noise.array();

  Tape dec_tape;
  Eigen::VectorXd xhat = forward(model.decoder, z, &dec_tape);

  Eigen::VectorXd residual = xhat - x.values;
  LossBreakdown loss;
  loss.reconstruction = 0.5 * residual.squaredNorm();
  loss.kl = kl_to_standard_normal(mu, logvar);
  loss.total = loss.reconstruction + beta * loss.kl;
  if (!std::isfinite(loss.total)) {
    throw NumericalError("elbo_gradients: non-finite loss");
  }

  Eigen::VectorXd dz = backward(model.decoder, dec_tape, residual, dec_grad);

  // z = mu + exp(logvar/2)*noise, plus the analytic KL contributions.
  Eigen::VectorXd dmu = dz.array() + beta * mu.array();
  Eigen::VectorXd dlogvar =
      0.5 * dz.array() * noise.array() * sigma.array() +
      beta * 0.5 * (logvar.array().exp() - 1.0);

  Eigen::VectorXd dheads(2 * model.k);
  dheads << dmu, dlogvar;
  backward(model.encoder, enc_tape, dheads, enc_grad);
  return loss;
}

std::pair<VaeModel, std::vector<LossBreakdown>>
train(const std::vector<FeatureVector>& features, const TrainConfig& cfg,
      const NormalizationParams& norm) {
  if (features.size() < 2) throw DataError("train: need at least 2 members");
  if (cfg.epochs < 1 || !(cfg.lr > 0.0) || cfg.beta < 0.0 || cfg.k < 1) {
    throw DataError("train: invalid config");
  }
  for (const FeatureVector& f : features) {
    if (f.s != cfg.s || f.values.size() != 2 * cfg.s) {
      throw DataError("train: inconsistent feature lengths");
    }
  }

  VaeModel model = make_vae(cfg.s, cfg.k, norm, features.front().closed,
                            cfg.seed);
  model.beta = cfg.beta;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AdamState enc_adam = make_adam(model.encoder, cfg.lr);
  AdamState dec_adam = make_adam(model.decoder, cfg.lr);
  const int warmup = std::max(1, cfg.epochs / 10);
  const double inv_n = 1.0 / features.size();

  std::vector<LossBreakdown> history;
  history.reserve(cfg.epochs);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double beta =
        epoch < warmup ? cfg.beta * (static_cast<double>(epoch) / warmup)
                       : cfg.beta;
    MlpGrad enc_grad = zero_grad(model.encoder);
    MlpGrad dec_grad = zero_grad(model.decoder);
    LossBreakdown epoch_loss;
    for (size_t i = 0; i < features.size(); ++i) {
      Eigen::VectorXd noise(cfg.k);
      for (int j = 0; j < cfg.k; ++j) noise[j] = gauss(rng);
      LossBreakdown loss;
      try {
        loss = elbo_gradients(model, features[i], noise, beta, enc_grad,
                              dec_grad);
      } catch (const NumericalError&) {
        throw NumericalError("train: diverged at epoch " +
                             std::to_string(epoch) + ", member " +
                             std::to_string(i));
      }
      epoch_loss.reconstruction += loss.reconstruction * inv_n;
      epoch_loss.kl += loss.kl * inv_n;
      epoch_loss.total += loss.total * inv_n;
    }
    for (auto* grad : {&enc_grad, &dec_grad}) {
      for (auto& w : grad->weights) w *= inv_n;
      for (auto& b : grad->biases) b *= inv_n;
    }
    adam_step(model.encoder, enc_grad, enc_adam);
    adam_step(model.decoder, dec_grad, dec_adam);
    history.push_back(epoch_loss);
  }
  return {std::move(model), std::move(history)};
}

namespace {

json mlp_to_json(const MlpParams& params) {
  json layers = json::array();
  for (size_t i = 0; i < params.spec.size(); ++i) {
    json layer;
    layer["in"] = params.spec[i].in_dim;
    layer["out"] = params.spec[i].out_dim;
    layer["act"] =
        params.spec[i].act == Activation::Tanh ? "tanh" : "identity";
    std::vector<double> w(params.weights[i].data(),
                          params.weights[i].data() + params.weights[i].size());
    std::vector<double> b(params.biases[i].data(),
                          params.biases[i].data() + params.biases[i].size());
    layer["weight"] = std::move(w);
    layer["bias"] = std::move(b);
    layers.push_back(std::move(layer));
  }
  return layers;
}

MlpParams mlp_from_json(const json& layers) {
  MlpParams params;
  for (const auto& layer : layers) {
    LayerSpec spec;
    spec.in_dim = layer.at("in").get<int>();
    spec.out_dim = layer.at("out").get<int>();
    const std::string act = layer.at("act").get<std::string>();
    if (act == "tanh") {
      spec.act = Activation::Tanh;
    } else if (act == "identity") {
      spec.act = Activation::Identity;
    } else {
      throw DataError("checkpoint: unknown activation " + act);
    }
    auto w = layer.at("weight").get<std::vector<double>>();
    auto b = layer.at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<size_t>(spec.in_dim) * spec.out_dim ||
        b.size() != static_cast<size_t>(spec.out_dim)) {
      throw DataError("checkpoint: layer shape mismatch");
    }
    params.spec.push_back(spec);
    params.weights.emplace_back(
        Eigen::Map<Eigen::MatrixXd>(w.data(), spec.out_dim, spec.in_dim));
    params.biases.emplace_back(
        Eigen::Map<Eigen::VectorXd>(b.data(), spec.out_dim));
  }
  if (params.spec.empty()) throw DataError("checkpoint: empty network");
  return params;
}

}  // namespace

void save_model(const VaeModel& model, const std::string& path) {
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["k"] = model.k;
  doc["s"] = model.s;
  doc["m"] = model.m;
  doc["closed"] = model.closed;
  doc["seed"] = model.seed;
  doc["beta"] = model.beta;
  doc["norm"] = {{"center", {model.norm.center.x, model.norm.center.y}},
                 {"scale", model.norm.scale}};
  doc["encoder"] = mlp_to_json(model.encoder);
  doc["decoder"] = mlp_to_json(model.decoder);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << doc.dump() << "\n";
}

VaeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("corrupt checkpoint " + path + ": " + e.what());
  }
  try {
    const std::string version = doc.at("version").get<std::string>();
    if (version != kCheckpointVersion) {
      throw DataError("checkpoint version mismatch: " + version);
    }
    VaeModel model;
    model.k = doc.at("k").get<int>();
    model.s = doc.at("s").get<int>();
    model.m = doc.at("m").get<int>();
    model.closed = doc.at("closed").get<bool>();
    model.seed = doc.at("seed").get<uint64_t>();
    model.beta = doc.at("beta").get<double>();
    model.norm.center = {doc.at("norm").at("center").at(0).get<double>(),
                         doc.at("norm").at("center").at(1).get<double>()};
    model.norm.scale = doc.at("norm").at("scale").get<double>();
    model.encoder = mlp_from_json(doc.at("encoder"));
    model.decoder = mlp_from_json(doc.at("decoder"));
    if (model.encoder.out_dim() != 2 * model.k ||
        model.decoder.out_dim() != model.s * model.m ||
        model.decoder.in_dim() != model.k) {
      throw DataError("checkpoint: inconsistent model shapes");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("corrupt checkpoint " + path + ": " + e.what());
  }
}

}  // namespace ensvis
