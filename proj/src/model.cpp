#include "hdsp/model.hpp"

#include <cmath>
#include <string>

namespace hdsp {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    fail(ErrorCode::config,
         std::string(name) + " must be finite and > 0, got " +
             std::to_string(v));
  }
}

}  // namespace

void HyperParams::validate() const {
  require_positive(alpha, "alpha");
  require_positive(beta, "beta");
  require_positive(eta, "eta");
  require_positive(a_w, "a_w");
  require_positive(b_w, "b_w");
  require_positive(sigma, "sigma");
  if (truncation < 2) {
    fail(ErrorCode::config, "truncation must be >= 2, got " +
                                std::to_string(truncation));
  }
}

void GlobalState::refresh_sticks() { p = stick_breaking(V); }

Eigen::MatrixXd GlobalState::expected_log_phi() const {
  const int T = static_cast<int>(eta.rows());
  const int I = static_cast<int>(eta.cols());
  Eigen::MatrixXd out(T, I);
  for (int k = 0; k < T; ++k) {
    const double psi_total = digamma(eta.row(k).sum());
    for (int i = 0; i < I; ++i) {
      out(k, i) = digamma(eta(k, i)) - psi_total;
    }
  }
  return out;
}

Eigen::VectorXd DocState::expected_log_pi() const {
  Eigen::VectorXd out(a_pi.size());
  for (Eigen::Index k = 0; k < a_pi.size(); ++k) {
    out[k] = digamma(a_pi[k]) - std::log(b_pi[k]);
  }
  return out;
}

double DocState::refresh_xi() {
  xi = expected_pi().sum();
  return xi;
}

Eigen::VectorXd stick_breaking(const Eigen::Ref<const Eigen::VectorXd>& V) {
  const Eigen::Index T = V.size();
  if (T < 1) {
    fail(ErrorCode::domain, "stick_breaking: empty stick vector");
  }
  for (Eigen::Index k = 0; k < T; ++k) {
    if (!std::isfinite(V[k]) || V[k] <= 0.0 || V[k] > 1.0) {
      fail(ErrorCode::domain, "stick_breaking: V[" + std::to_string(k) +
                                  "] outside (0, 1]");
    }
  }
  if (V[T - 1] != 1.0) {
    fail(ErrorCode::domain, "stick_breaking: last entry must be exactly 1");
  }
  Eigen::VectorXd p(T);
  double remaining = 1.0;
  for (Eigen::Index k = 0; k < T; ++k) {
    p[k] = V[k] * remaining;
    remaining *= 1.0 - V[k];
  }
  return p;
}

Eigen::VectorXd normalize_measure(
    const Eigen::Ref<const Eigen::VectorXd>& pi) {
  if (pi.size() == 0) {
    fail(ErrorCode::domain, "normalize_measure: empty vector");
  }
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    if (!std::isfinite(pi[k]) || pi[k] <= 0.0) {
      fail(ErrorCode::domain,
           "normalize_measure: entry " + std::to_string(k) + " not positive");
    }
  }
  return pi / pi.sum();
}

double gamma_mean(double a, double b) { return a / b; }

double gamma_mean_log(double a, double b) { return digamma(a) - std::log(b); }

double inv_gamma_mean(double a, double b) {
  if (a <= 1.0) {
    fail(ErrorCode::undefined_moment,
         "inv_gamma_mean: undefined for shape <= 1 (a = " + std::to_string(a) +
             ")");
  }
  return b / (a - 1.0);
}

double inv_gamma_mean_inv(double a, double b) { return a / b; }

double inv_gamma_mean_log(double a, double b) {
  return std::log(b) - digamma(a);
}

double inv_gamma_point(double a, double b) { return b / a; }

Eigen::VectorXd dirichlet_expected_log(
    const Eigen::Ref<const Eigen::VectorXd>& params) {
  const double psi_total = digamma(params.sum());
  Eigen::VectorXd out(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    out[i] = digamma(params[i]) - psi_total;
  }
  return out;
}

}  // namespace hdsp
