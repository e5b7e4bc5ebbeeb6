#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hdsp/errors.hpp"

namespace hdsp {

// Deterministic random source. The mt19937_64 engine sequence is fixed by the
// standard; the distribution transforms live here so draws are reproducible
// bit-for-bit on any platform (std::gamma_distribution and friends are
// implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  double uniform();      // [0, 1), 53-bit resolution
  double uniform_pos();  // (0, 1)
  uint64_t uniform_int(uint64_t n);  // unbiased draw from [0, n)
  double normal();                   // standard normal, Box-Muller
  double gamma(double shape);        // rate 1, Marsaglia-Tsang
  double gamma(double shape, double rate);
  double beta(double a, double b);
  int poisson(double mean);  // exponential-gap counting, safe for any mean
  bool bernoulli(double p);
  Eigen::VectorXd dirichlet(const Eigen::Ref<const Eigen::VectorXd>& alpha);
  // Draw an index proportional to non-negative weights (need not sum to 1).
  int categorical(const Eigen::Ref<const Eigen::VectorXd>& weights);

  // Independent stream derived from (seed, stream); used to give each
  // synthetic document its own generator.
  Rng spawn(uint64_t stream) const;

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Deterministic Fisher-Yates permutation of {0, ..., n-1}.
std::vector<int> shuffled_indices(int n, Rng& rng);

}  // namespace hdsp
