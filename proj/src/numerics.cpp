#include "hdsp/numerics.hpp"

#include <cmath>
#include <string>

namespace hdsp {

namespace {

void check_positive_finite(double x, const char* fn) {
  if (!std::isfinite(x) || x <= 0.0) {
    fail(ErrorCode::domain,
         std::string(fn) + ": argument must be finite and > 0, got " +
             std::to_string(x));
  }
}

}  // namespace

double digamma(double x) {
  check_positive_finite(x, "digamma");
  // Upward recurrence psi(x) = psi(x+1) - 1/x until x >= 10, then the
  // asymptotic series through the x^-12 Bernoulli term (next term < 1e-15
  // at x = 10).
  long double acc = 0.0L;
  long double xl = x;
  while (xl < 10.0L) {
    acc -= 1.0L / xl;
    xl += 1.0L;
  }
  const long double inv = 1.0L / xl;
  const long double u = inv * inv;
  const long double tail =
      u * (1.0L / 12.0L -
           u * (1.0L / 120.0L -
                u * (1.0L / 252.0L -
                     u * (1.0L / 240.0L -
                          u * (1.0L / 132.0L - u * (691.0L / 32760.0L))))));
  acc += std::log(xl) - 0.5L * inv - tail;
  return static_cast<double>(acc);
}

double log_gamma(double x) {
  check_positive_finite(x, "log_gamma");
  // Lanczos, g = 7, 9 coefficients.
  static const long double kCoef[9] = {
      0.99999999999980993L,      676.5203681218851L, -1259.1392167224028L,
      771.32342877765313L,       -176.61502916214059L, 12.507343278686905L,
      -0.13857109526572012L,     9.9843695780195716e-6L,
      1.5056327351493116e-7L};
  const long double xl = x;
  long double series = kCoef[0];
  for (int i = 1; i < 9; ++i) {
    series += kCoef[i] / (xl - 1.0L + i);
  }
  const long double t = xl + 6.5L;
  const long double half_log_two_pi = 0.91893853320467274178L;
  const long double r =
      half_log_two_pi + (xl - 0.5L) * std::log(t) - t + std::log(series);
  return static_cast<double>(r);
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) {
    fail(ErrorCode::domain, "log_sum_exp: empty vector");
  }
  if (!v.allFinite()) {
    fail(ErrorCode::domain, "log_sum_exp: non-finite entry");
  }
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::VectorXd log_normalize(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd out = v;
  log_normalize_inplace(out);
  return out;
}

void log_normalize_inplace(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) {
    fail(ErrorCode::domain, "log_normalize: empty vector");
  }
  if (!v.allFinite()) {
    fail(ErrorCode::domain, "log_normalize: non-finite entry");
  }
  const double m = v.maxCoeff();
  v = (v.array() - m).exp();
  v /= v.sum();
}

}  // namespace hdsp
