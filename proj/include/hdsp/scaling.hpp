#pragma once

#include <utility>

#include <Eigen/Dense>

#include "hdsp/corpus.hpp"
#include "hdsp/errors.hpp"

namespace hdsp {

enum class ScalingKind { categorical, loglinear };

const char* scaling_kind_name(ScalingKind k);
ScalingKind parse_scaling_kind(const std::string& name);

// Inverse-gamma variational parameters of w_kj, one pair per (topic, label).
struct CategoricalScaling {
  Eigen::MatrixXd a_w;  // T x J shapes
  Eigen::MatrixXd b_w;  // T x J scales
};

// Point estimates of w_kj under a delta variational distribution, with the
// variance of the zero-mean normal prior.
struct LogLinearScaling {
  Eigen::MatrixXd w;  // T x J
  double sigma = 1.0;
};

struct ScalingModel {
  ScalingKind kind = ScalingKind::categorical;
  CategoricalScaling cat;
  LogLinearScaling lin;

  int topics() const;
  int labels() const;
};

struct ScalingExpectations {
  double scale;      // E[s]
  double log_scale;  // E[ln s]
  double inv_scale;  // E[1/s], the gamma rate contribution
};

// prod_j w_j^{r_j} for binary r; the empty label set gives 1.
double scale_categorical(const Eigen::Ref<const Eigen::VectorXd>& w_row,
                         const Eigen::Ref<const Eigen::VectorXd>& r);

// exp(-w . r); exponents beyond +-700 raise saturation_error.
double scale_loglinear(const Eigen::Ref<const Eigen::VectorXd>& w_row,
                       const Eigen::Ref<const Eigen::VectorXd>& r);

// Expectations of the scaling weight for topic k under the variational
// distribution. For the categorical function E[s] uses the inverse-gamma mean
// b/(a-1) per label and falls back to the point summary b/a when a <= 1.
ScalingExpectations expected_scaling(const ScalingModel& s, int k,
                                     const Eigen::Ref<const Eigen::VectorXd>& r);

// Vectorized over topics; exponents are clamped at +-700 so results stay
// finite.
Eigen::VectorXd expected_inv_scale_all(
    const ScalingModel& s, const Eigen::Ref<const Eigen::VectorXd>& r);
Eigen::VectorXd expected_log_scale_all(
    const ScalingModel& s, const Eigen::Ref<const Eigen::VectorXd>& r);

// Closed-form coordinate update of q(w_kj) for the categorical function:
//   a' = beta p_k sum_m r_mj + a_w
//   b' = sum_{m: r_mj=1} prod_{j' != j active} E[w_kj'^{-1}] E[pi_mk] + b_w
// R is the M x J binary label matrix, E_pi_col the frozen E[pi_mk] column.
std::pair<double, double> update_w_categorical(
    int k, int j, double beta_p_k, const CategoricalScaling& state,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double a_w0,
    double b_w0);

// One full pass over topics, sweeping labels j = 0..J-1 in place so later
// coordinates see updated earlier ones. `repeats` controls the inner repeat
// count per topic.
void update_w_categorical_sweep(CategoricalScaling& state,
                                const Eigen::Ref<const Eigen::VectorXd>& beta_p,
                                const Eigen::Ref<const Eigen::MatrixXd>& R,
                                const Eigen::Ref<const Eigen::MatrixXd>& E_pi,
                                double a_w0, double b_w0, int repeats);

struct NewtonOptions {
  int max_iters = 50;
  double tol = 1e-6;  // on the gradient infinity norm
  int max_step_halvings = 20;
};

// ELBO terms of w_k for the log-linear function (up to w-independent
// constants), with its gradient and Hessian:
//   f(w) = sum_m [beta p_k (w.r_m) - exp(w.r_m) E[pi_mk]] - |w|^2 / (2 sigma)
double loglinear_objective(const Eigen::Ref<const Eigen::VectorXd>& w_row,
                           double beta_p_k,
                           const Eigen::Ref<const Eigen::MatrixXd>& R,
                           const Eigen::Ref<const Eigen::VectorXd>& E_pi_col,
                           double sigma);
Eigen::VectorXd loglinear_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& w_row, double beta_p_k,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double sigma);
Eigen::MatrixXd loglinear_hessian(
    const Eigen::Ref<const Eigen::VectorXd>& w_row, double beta_p_k,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double sigma);

struct NewtonResult {
  Eigen::VectorXd w;
  int iterations = 0;
  double grad_inf_norm = 0.0;
};

// Damped Newton ascent on loglinear_objective; steps are halved until the
// objective does not decrease, with a backtracking gradient step when the
// Hessian solve fails. Throws convergence_error (carrying the last gradient
// norm) if the tolerance is not reached.
NewtonResult update_w_loglinear(
    const Eigen::Ref<const Eigen::VectorXd>& w_init, double beta_p_k,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double sigma,
    const NewtonOptions& opts);

// M x J matrix of document label vectors, row per document.
Eigen::MatrixXd labels_matrix(const Corpus& corpus);

}  // namespace hdsp
