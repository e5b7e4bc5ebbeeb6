#pragma once

#include <Eigen/Dense>

#include "hdsp/errors.hpp"

namespace hdsp {

// psi(x) for x > 0. Absolute error <= 1e-10 over [1e-6, 1e8]; internal
// arithmetic is long double because psi(x) ~ -1/x near zero and the target
// tolerance there is below one double ulp.
double digamma(double x);

// ln Gamma(x) for x > 0 via a Lanczos approximation (g = 7, 9 terms).
double log_gamma(double x);

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

// exp(v - logsumexp(v)), renormalized so the output sums to one.
Eigen::VectorXd log_normalize(const Eigen::Ref<const Eigen::VectorXd>& v);

// In-place variant for hot loops; `v` holds log weights on entry and the
// normalized probabilities on exit.
void log_normalize_inplace(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace hdsp
