#include "ensvis/latent_stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ensvis {

double gaussian_logdensity(const Eigen::VectorXd& z) {
  if (!z.allFinite()) throw DataError("gaussian_logdensity: non-finite input");
  const double k = static_cast<double>(z.size());
  return -0.5 * k * std::log(2.0 * M_PI) - 0.5 * z.squaredNorm();
}

namespace {

constexpr double kGammaTol = 1e-12;
constexpr int kMaxIter = 500;

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaTol) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued-fraction expansion of Q(a, x) (modified Lentz), x >= a + 1.
double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaTol) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw DataError("regularized_gamma_p: domain error");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chi2_quantile(int k, double p) {
  if (k < 1) throw DataError("chi2_quantile: k must be >= 1");
  if (!(p >= 0.0) || p >= 1.0) {
    throw DataError("chi2_quantile: p must lie in [0, 1)");
  }
  if (p == 0.0) return 0.0;
  const double a = 0.5 * k;
  double lo = 0.0;
  double hi = k + 40.0 * std::sqrt(static_cast<double>(k)) + 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (regularized_gamma_p(a, 0.5 * mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-10) break;
  }
  return 0.5 * (lo + hi);
}

ConfidenceSpec make_confidence_spec(int k, std::vector<double> levels) {
  std::sort(levels.begin(), levels.end());
  ConfidenceSpec spec;
  spec.k = k;
  for (double level : levels) {
    if (!(level > 0.0) || !(level < 1.0)) {
      throw DataError("confidence level must lie in (0, 1)");
    }
    spec.levels.push_back(level);
    spec.radii.push_back(std::sqrt(chi2_quantile(k, level)));
  }
  return spec;
}

namespace {

// Uniform unit-ball (or unit-sphere) samples; the level-dependent radius
// is applied afterwards so the same seed yields nested sets.
std::vector<Eigen::VectorXd> unit_ball_samples(int k, int count, uint64_t seed,
                                               bool surface_only) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd g(k);
    double nrm = 0.0;
    do {
      for (int j = 0; j < k; ++j) g[j] = gauss(rng);
      nrm = g.norm();
    } while (nrm == 0.0);
    double scale = 1.0 / nrm;
    if (!surface_only) {
      scale *= std::pow(uniform(rng), 1.0 / k);
    }
    out.push_back(scale * g);
  }
  return out;
}

}  // namespace

LatentSampleSet sample_ball(int k, double level, int count, uint64_t seed,
                            bool surface_only) {
  if (k < 1 || count < 1) throw DataError("sample_ball: k, count must be >= 1");
  if (!(level > 0.0) || !(level < 1.0)) {
    throw DataError("sample_ball: level must lie in (0, 1)");
  }
  LatentSampleSet set;
  set.kind = surface_only ? SampleKind::Surface : SampleKind::Ball;
  set.level = level;
  set.radius = std::sqrt(chi2_quantile(k, level));
  set.seed = seed;
  set.unit = unit_ball_samples(k, count, seed, surface_only);
  set.points.reserve(count);
  for (const Eigen::VectorXd& u : set.unit) {
    set.points.push_back(set.radius * u);
  }
  return set;
}

LatentSampleSet rescale_to_level(const LatentSampleSet& set, int k,
                                 double level) {
  if (set.kind != SampleKind::Ball && set.kind != SampleKind::Surface) {
    throw DataError("rescale_to_level: set has no confidence radius");
  }
  LatentSampleSet out;
  out.kind = set.kind;
  out.level = level;
  out.radius = std::sqrt(chi2_quantile(k, level));
  out.seed = set.seed;
  out.unit = set.unit;
  out.points.reserve(set.unit.size());
  for (const Eigen::VectorXd& u : out.unit) {
    out.points.push_back(out.radius * u);
  }
  return out;
}

LatentSampleSet sample_prior(int k, int count, uint64_t seed) {
  if (k < 1 || count < 1) throw DataError("sample_prior: k, count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LatentSampleSet set;
  set.kind = SampleKind::Prior;
  set.seed = seed;
  set.points.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd z(k);
    for (int j = 0; j < k; ++j) z[j] = gauss(rng);
    set.points.push_back(std::move(z));
  }
  return set;
}

LatentSampleSet neighborhood_samples(const std::vector<Eigen::VectorXd>& centers,
                                     double sigma, uint64_t seed) {
  if (sigma < 0.0) throw DataError("neighborhood_samples: sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  LatentSampleSet set;
  set.kind = SampleKind::Neighborhood;
  set.seed = seed;
  set.points.reserve(centers.size());
  for (const Eigen::VectorXd& c : centers) {
    if (sigma == 0.0) {
      set.points.push_back(c);
      continue;
    }
    Eigen::VectorXd z(c.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      z[j] = c[j] + sigma * gauss(rng);
    }
    set.points.push_back(std::move(z));
  }
  return set;
}

}  // namespace ensvis
