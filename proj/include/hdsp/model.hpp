#pragma once

#include <Eigen/Dense>

#include "hdsp/errors.hpp"
#include "hdsp/numerics.hpp"

namespace hdsp {

struct HyperParams {
  double alpha = 1.0;   // corpus-level concentration
  double beta = 1.0;    // document-level concentration
  double eta = 0.5;     // symmetric topic Dirichlet
  double a_w = 1.0;     // inverse-gamma prior shape (categorical scaling)
  double b_w = 1.0;     // inverse-gamma prior scale (categorical scaling)
  double sigma = 1.0;   // normal prior variance (log-linear scaling)
  int truncation = 200;

  void validate() const;
};

// Corpus-level variational state: delta sticks V with derived weights p, and
// the per-topic Dirichlet parameters over the vocabulary.
struct GlobalState {
  Eigen::VectorXd V;    // T entries in (0,1], V[T-1] == 1
  Eigen::VectorXd p;    // stick weights derived from V
  Eigen::MatrixXd eta;  // T x I variational Dirichlet parameters

  int truncation() const { return static_cast<int>(V.size()); }
  int vocab_size() const { return static_cast<int>(eta.cols()); }

  void refresh_sticks();  // p = stick_breaking(V)

  // E[ln phi_ki] = psi(eta_ki) - psi(sum_i eta_ki), all topics.
  Eigen::MatrixXd expected_log_phi() const;
};

// Per-document variational state. gamma holds one responsibility row per
// distinct word type; repeated tokens share the row and enter updates through
// their count.
struct DocState {
  Eigen::VectorXd a_pi;   // T gamma shapes
  Eigen::VectorXd b_pi;   // T gamma rates
  Eigen::MatrixXd gamma;  // num_types x T, rows sum to 1
  double xi = 0.0;        // Taylor anchor, sum_k E[pi_mk]

  Eigen::VectorXd expected_pi() const { return a_pi.cwiseQuotient(b_pi); }
  Eigen::VectorXd expected_log_pi() const;
  double refresh_xi();
};

// p_k = V_k prod_{j<k} (1 - V_j). Requires entries in (0,1] and V[T-1] == 1.
Eigen::VectorXd stick_breaking(const Eigen::Ref<const Eigen::VectorXd>& V);

// pi / sum(pi) for strictly positive pi.
Eigen::VectorXd normalize_measure(const Eigen::Ref<const Eigen::VectorXd>& pi);

// Scalar expectations under the variational families.
double gamma_mean(double a, double b);              // E[x] = a/b
double gamma_mean_log(double a, double b);          // E[ln x] = psi(a) - ln b
double inv_gamma_mean(double a, double b);          // b/(a-1), requires a > 1
double inv_gamma_mean_inv(double a, double b);      // E[1/w] = a/b
double inv_gamma_mean_log(double a, double b);      // E[ln w] = ln b - psi(a)
double inv_gamma_point(double a, double b);         // 1/E[1/w] = b/a
Eigen::VectorXd dirichlet_expected_log(
    const Eigen::Ref<const Eigen::VectorXd>& params);

}  // namespace hdsp
