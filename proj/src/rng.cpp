#include "hdsp/rng.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hdsp {

namespace {

// splitmix64; standard seeding scheme for spawning substreams.
uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

uint64_t Rng::uniform_int(uint64_t n) {
  if (n == 0) {
    fail(ErrorCode::domain, "uniform_int: n must be positive");
  }
  const uint64_t rem = (0 - n) % n;  // 2^64 mod n
  uint64_t x = next_u64();
  while (x < rem) {
    x = next_u64();
  }
  return (x - rem) % n;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    fail(ErrorCode::domain, "gamma: shape must be finite and > 0");
  }
  if (shape < 1.0) {
    // boosting trick: Gamma(a) = Gamma(a+1) * U^(1/a)
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform_pos(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze method.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double Rng::gamma(double shape, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    fail(ErrorCode::domain, "gamma: rate must be finite and > 0");
  }
  return gamma(shape) / rate;
}

double Rng::beta(double a, double b) {
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

int Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    fail(ErrorCode::domain, "poisson: mean must be finite and >= 0");
  }
  // Count Exp(1) arrivals before time `mean`; avoids exp(-mean) underflow.
  int k = 0;
  double t = -std::log(uniform_pos());
  while (t <= mean) {
    ++k;
    t += -std::log(uniform_pos());
  }
  return k;
}

bool Rng::bernoulli(double p) { return uniform() < p; }

Eigen::VectorXd Rng::dirichlet(
    const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  Eigen::VectorXd out(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i]);
  }
  const double s = out.sum();
  if (!(s > 0.0)) {
    fail(ErrorCode::numeric, "dirichlet: degenerate draw");
  }
  return out / s;
}

int Rng::categorical(const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (weights.size() == 0) {
    fail(ErrorCode::domain, "categorical: empty weight vector");
  }
  const double total = weights.sum();
  if (!(total > 0.0) || !weights.allFinite() || weights.minCoeff() < 0.0) {
    fail(ErrorCode::domain, "categorical: weights must be non-negative");
  }
  const double u = uniform() * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) {
      return static_cast<int>(i);
    }
  }
  return static_cast<int>(weights.size() - 1);
}

Rng Rng::spawn(uint64_t stream) const {
  uint64_t state = seed_ ^ (0xD1B54A32D192ED03ULL * (stream + 1));
  return Rng(splitmix64(state));
}

std::vector<int> shuffled_indices(int n, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

}  // namespace hdsp
