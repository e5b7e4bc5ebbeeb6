#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdsp/corpus.hpp"
#include "hdsp/model.hpp"
#include "hdsp/scaling.hpp"

namespace hdsp {

struct FitConfig {
  ScalingKind scaling = ScalingKind::categorical;
  HyperParams hp;
  double tol = 1e-3;  // on the fractional ELBO change
  int max_iters = 100;
  uint64_t seed = 1;
  int lda_warm_start_sweeps = 3;  // 0 disables the warm start entirely
  bool optimize_hyperparams = true;
  int w_inner_repeats = 1;  // categorical label sweeps per corpus phase
  NewtonOptions newton;
  int threads = 0;  // 0: hardware concurrency, capped by HDSP_THREADS

  void validate() const;
};

struct TrainedModel {
  ScalingKind kind = ScalingKind::categorical;
  HyperParams hp;
  GlobalState global;
  ScalingModel scaling;
  std::vector<DocState> docs;
  std::vector<std::string> doc_ids;
  std::vector<double> elbo_trace;

  int truncation() const { return global.truncation(); }
  int vocab_size() const { return global.vocab_size(); }
  int num_labels() const { return scaling.labels(); }
};

// gamma_mnk proportional to exp(E[ln phi_k,x] + E[ln pi_mk]), row-normalized
// per word type.
void update_gamma(const Document& doc, DocState& state,
                  const Eigen::Ref<const Eigen::MatrixXd>& elog_phi,
                  const Eigen::Ref<const Eigen::VectorXd>& elog_pi);

// Refreshes xi from the previous pi, then sets
//   a_pi_k = beta p_k + sum_n gamma_mnk,   b_pi_k = E[1/s_k(r_m)] + N_m / xi.
void update_pi(const Document& doc, DocState& state,
               const Eigen::Ref<const Eigen::VectorXd>& beta_p,
               const ScalingModel& scaling);

// eta_ki = eta0 + sum_{m,n} gamma_mnk 1(x_mn = i), token counts respected.
void update_eta(GlobalState& global, const Corpus& corpus,
                const std::vector<DocState>& docs, double eta0);

// V-dependent ELBO terms as a function of the sticks, with A_k the frozen
// per-topic data statistic sum_m (E[ln 1/s_k(r_m)] + E[ln pi_mk]):
//   f(V) = (alpha-1) sum_{k<T} ln(1-V_k)
//          + sum_k [beta p_k A_k - M ln Gamma(beta p_k)]
double v_objective(const Eigen::Ref<const Eigen::VectorXd>& V, double alpha,
                   double beta, const Eigen::Ref<const Eigen::VectorXd>& A,
                   long num_docs);
Eigen::VectorXd v_gradient(const Eigen::Ref<const Eigen::VectorXd>& V,
                           double alpha, double beta,
                           const Eigen::Ref<const Eigen::VectorXd>& A,
                           long num_docs);

struct VUpdateResult {
  bool stalled = false;
  int halvings = 0;
  double objective = 0.0;
};

// Joint steepest-ascent step on all V_k (k < T) with backtracking; V entries
// are clamped to [1e-6, 1-1e-6] and V_T stays 1. On line-search exhaustion
// the previous V is kept and `stalled` reports it.
VUpdateResult update_V(GlobalState& global, double alpha, double beta,
                       const Eigen::Ref<const Eigen::VectorXd>& A,
                       long num_docs, int max_halvings = 40);

// A_k statistic consumed by update_V and the beta step.
Eigen::VectorXd scaling_elbo_stat(const ScalingModel& scaling,
                                  const Eigen::Ref<const Eigen::MatrixXd>& R,
                                  const Eigen::Ref<const Eigen::MatrixXd>& Elog_pi);

// alpha gets its closed-form maximizer (T-1)/(-sum ln(1-V_k)); beta moves by
// backtracking ascent on its ELBO terms. Both are clamped to [1e-4, 1e4].
std::pair<double, double> optimize_hyperparameters(
    const GlobalState& global, double alpha, double beta,
    const Eigen::Ref<const Eigen::VectorXd>& A, long num_docs);

// Full surrogate objective, including the Taylor term
// -ln xi_m - (sum_k E[pi_mk] - xi_m)/xi_m per token.
double compute_elbo(const TrainedModel& model, const Corpus& corpus);

// Warm start: three LDA-style sweeps (gamma from E[ln phi] only, then eta),
// topics reordered by posterior word count descending; V at the prior mean
// 1/(1+alpha) with V_T = 1; a_pi = beta p_k, b_pi = 1; scaling at its prior.
TrainedModel initialize(const Corpus& corpus, const FitConfig& config);

// Coordinate ascent until the fractional ELBO change drops below tol or
// max_iters sweeps. Deterministic for a fixed seed at any thread count.
TrainedModel fit(const Corpus& corpus, const FitConfig& config);

}  // namespace hdsp
