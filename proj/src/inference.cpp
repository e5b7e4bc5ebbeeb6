#include "hdsp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "hdsp/numerics.hpp"
#include "hdsp/rng.hpp"

namespace hdsp {

namespace {

constexpr double kStickLo = 1e-6;
constexpr double kStickHi = 1.0 - 1e-6;
constexpr double kPiFloor = 1e-10;
constexpr double kHyperLo = 1e-4;
constexpr double kHyperHi = 1e4;
constexpr double kStickMassFloor = 1e-300;  // keeps ln Gamma(beta p_k) finite

int resolve_threads(int requested) {
  int n = requested;
  if (n <= 0) {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
  }
  if (const char* env = std::getenv("HDSP_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return std::max(1, n);
}

// Blocked parallel loop. Every index writes only its own state, so the
// result is identical at any thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int begin = static_cast<int>(static_cast<long>(n) * t / threads);
    const int end = static_cast<int>(static_cast<long>(n) * (t + 1) / threads);
    pool.emplace_back([&, begin, end] {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void check_matrix_finite(const Eigen::MatrixXd& m, const std::string& path,
                         int iter) {
  if (m.allFinite()) return;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (!std::isfinite(m(r, c))) {
        fail(ErrorCode::numeric,
             "iteration " + std::to_string(iter) + ": " + path + "[" +
                 std::to_string(r) + "][" + std::to_string(c) +
                 "] is non-finite");
      }
    }
  }
}

void validate_finite(const TrainedModel& model, int iter) {
  check_matrix_finite(model.global.V, "global.V", iter);
  check_matrix_finite(model.global.p, "global.p", iter);
  check_matrix_finite(model.global.eta, "global.eta", iter);
  if (model.kind == ScalingKind::categorical) {
    check_matrix_finite(model.scaling.cat.a_w, "scaling.a_w", iter);
    check_matrix_finite(model.scaling.cat.b_w, "scaling.b_w", iter);
  } else {
    check_matrix_finite(model.scaling.lin.w, "scaling.w", iter);
  }
  for (size_t m = 0; m < model.docs.size(); ++m) {
    const std::string base = "docs[" + std::to_string(m) + "]";
    check_matrix_finite(model.docs[m].a_pi, base + ".a_pi", iter);
    check_matrix_finite(model.docs[m].b_pi, base + ".b_pi", iter);
    check_matrix_finite(model.docs[m].gamma, base + ".gamma", iter);
    if (!std::isfinite(model.docs[m].xi)) {
      fail(ErrorCode::numeric, "iteration " + std::to_string(iter) + ": " +
                                   base + ".xi is non-finite");
    }
  }
}

double beta_objective(double beta, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& A, long num_docs) {
  long double acc = 0.0L;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double mass = std::max(beta * p[k], kStickMassFloor);
    acc += mass * A[k] - static_cast<double>(num_docs) * log_gamma(mass);
  }
  return static_cast<double>(acc);
}

}  // namespace

void FitConfig::validate() const {
  hp.validate();
  if (!(tol > 0.0)) {
    fail(ErrorCode::config, "tol must be > 0");
  }
  if (max_iters < 1) {
    fail(ErrorCode::config, "max_iters must be >= 1");
  }
  if (lda_warm_start_sweeps < 0 || w_inner_repeats < 1) {
    fail(ErrorCode::config, "invalid initialization/update repeat counts");
  }
  if (newton.max_iters < 1 || !(newton.tol > 0.0)) {
    fail(ErrorCode::config, "invalid Newton options");
  }
}

void update_gamma(const Document& doc, DocState& state,
                  const Eigen::Ref<const Eigen::MatrixXd>& elog_phi,
                  const Eigen::Ref<const Eigen::VectorXd>& elog_pi) {
  const int n_types = doc.num_types();
  Eigen::VectorXd logits(elog_pi.size());
  for (int t = 0; t < n_types; ++t) {
    logits = elog_phi.col(doc.word_ids[t]) + elog_pi;
    log_normalize_inplace(logits);
    state.gamma.row(t) = logits.transpose();
  }
}

void update_pi(const Document& doc, DocState& state,
               const Eigen::Ref<const Eigen::VectorXd>& beta_p,
               const ScalingModel& scaling) {
  state.refresh_xi();
  const double n_tokens = static_cast<double>(doc.total_tokens());
  Eigen::VectorXd shape = beta_p;
  for (int t = 0; t < doc.num_types(); ++t) {
    shape += doc.counts[t] * state.gamma.row(t).transpose();
  }
  state.a_pi = shape.cwiseMax(kPiFloor);
  const Eigen::VectorXd inv_scale =
      expected_inv_scale_all(scaling, doc.labels);
  state.b_pi =
      (inv_scale.array() + n_tokens / state.xi).cwiseMax(kPiFloor).matrix();
}

void update_eta(GlobalState& global, const Corpus& corpus,
                const std::vector<DocState>& docs, double eta0) {
  global.eta.setConstant(eta0);
  for (int m = 0; m < corpus.num_docs(); ++m) {
    const Document& doc = corpus.docs[m];
    const DocState& state = docs[m];
    for (int t = 0; t < doc.num_types(); ++t) {
      global.eta.col(doc.word_ids[t]) +=
          doc.counts[t] * state.gamma.row(t).transpose();
    }
  }
}

double v_objective(const Eigen::Ref<const Eigen::VectorXd>& V, double alpha,
                   double beta, const Eigen::Ref<const Eigen::VectorXd>& A,
                   long num_docs) {
  const Eigen::Index T = V.size();
  const Eigen::VectorXd p = stick_breaking(V);
  long double acc = 0.0L;
  for (Eigen::Index k = 0; k + 1 < T; ++k) {
    acc += (alpha - 1.0) * std::log1p(-V[k]);
  }
  for (Eigen::Index k = 0; k < T; ++k) {
    const double mass = std::max(beta * p[k], kStickMassFloor);
    acc += mass * A[k] - static_cast<double>(num_docs) * log_gamma(mass);
  }
  return static_cast<double>(acc);
}

Eigen::VectorXd v_gradient(const Eigen::Ref<const Eigen::VectorXd>& V,
                           double alpha, double beta,
                           const Eigen::Ref<const Eigen::VectorXd>& A,
                           long num_docs) {
  const Eigen::Index T = V.size();
  const Eigen::VectorXd p = stick_breaking(V);
  // D_k = beta p_k (A_k - M psi(beta p_k)); the chain rule through the stick
  // construction gives d(beta p_k')/dV_k = beta p_k'/V_k for k' = k and
  // -beta p_k'/(1 - V_k) for k' > k.
  Eigen::VectorXd D(T);
  for (Eigen::Index k = 0; k < T; ++k) {
    const double mass = std::max(beta * p[k], kStickMassFloor);
    D[k] = mass * (A[k] - static_cast<double>(num_docs) * digamma(mass));
  }
  Eigen::VectorXd suffix(T);  // sum_{k' > k} D_k'
  double run = 0.0;
  for (Eigen::Index k = T - 1; k >= 0; --k) {
    suffix[k] = run;
    run += D[k];
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(T);
  for (Eigen::Index k = 0; k + 1 < T; ++k) {
    grad[k] = -(alpha - 1.0) / (1.0 - V[k]) + D[k] / V[k] -
              suffix[k] / (1.0 - V[k]);
  }
  return grad;  // grad[T-1] stays 0: V_T is fixed at 1
}

VUpdateResult update_V(GlobalState& global, double alpha, double beta,
                       const Eigen::Ref<const Eigen::VectorXd>& A,
                       long num_docs, int max_halvings) {
  const Eigen::Index T = global.V.size();
  VUpdateResult res;
  const double f0 = v_objective(global.V, alpha, beta, A, num_docs);
  const Eigen::VectorXd grad = v_gradient(global.V, alpha, beta, A, num_docs);
  double step = 1.0;
  for (int h = 0; h <= max_halvings; ++h) {
    Eigen::VectorXd trial = global.V;
    for (Eigen::Index k = 0; k + 1 < T; ++k) {
      trial[k] = std::clamp(global.V[k] + step * grad[k], kStickLo, kStickHi);
    }
    const double f_trial = v_objective(trial, alpha, beta, A, num_docs);
    if (std::isfinite(f_trial) && f_trial >= f0) {
      global.V = trial;
      global.refresh_sticks();
      res.halvings = h;
      res.objective = f_trial;
      return res;
    }
    step *= 0.5;
  }
  res.stalled = true;
  res.objective = f0;
  return res;
}

Eigen::VectorXd scaling_elbo_stat(
    const ScalingModel& scaling, const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::MatrixXd>& Elog_pi) {
  const Eigen::Index M = R.rows();
  const Eigen::Index T = Elog_pi.cols();
  Eigen::VectorXd A = Elog_pi.colwise().sum().transpose();
  for (Eigen::Index m = 0; m < M; ++m) {
    A -= expected_log_scale_all(scaling, R.row(m).transpose());
  }
  (void)T;
  return A;
}

std::pair<double, double> optimize_hyperparameters(
    const GlobalState& global, double alpha, double beta,
    const Eigen::Ref<const Eigen::VectorXd>& A, long num_docs) {
  const Eigen::Index T = global.V.size();
  // alpha: exact maximizer of sum_{k<T} ln Beta(V_k | 1, alpha).
  double sum_log = 0.0;
  for (Eigen::Index k = 0; k + 1 < T; ++k) {
    sum_log += std::log1p(-global.V[k]);
  }
  double alpha_new = alpha;
  if (sum_log < 0.0) {
    alpha_new =
        std::clamp(static_cast<double>(T - 1) / (-sum_log), kHyperLo, kHyperHi);
  }
  // beta: backtracking ascent on its ELBO terms.
  double beta_new = beta;
  const double f0 = beta_objective(beta, global.p, A, num_docs);
  long double g_acc = 0.0L;
  for (Eigen::Index k = 0; k < T; ++k) {
    const double mass = std::max(beta * global.p[k], kStickMassFloor);
    g_acc += global.p[k] *
             (A[k] - static_cast<double>(num_docs) * digamma(mass));
  }
  const double g = static_cast<double>(g_acc);
  double step = 1.0;
  for (int h = 0; h <= 40; ++h) {
    const double trial = std::clamp(beta + step * g, kHyperLo, kHyperHi);
    if (beta_objective(trial, global.p, A, num_docs) >= f0) {
      beta_new = trial;
      break;
    }
    step *= 0.5;
  }
  return {alpha_new, beta_new};
}

double compute_elbo(const TrainedModel& model, const Corpus& corpus) {
  const GlobalState& g = model.global;
  const int T = g.truncation();
  const int I = g.vocab_size();
  const int M = corpus.num_docs();
  const double alpha = model.hp.alpha;
  const double beta = model.hp.beta;
  const double eta0 = model.hp.eta;

  const Eigen::MatrixXd elog_phi = g.expected_log_phi();

  long double words = 0.0L, z_taylor = 0.0L, pi_prior = 0.0L, v_prior = 0.0L;
  long double w_prior = 0.0L, phi_prior = 0.0L;
  long double h_z = 0.0L, h_pi = 0.0L, h_w = 0.0L, h_phi = 0.0L;

  double log_gamma_mass = 0.0;  // sum_k ln Gamma(beta p_k), shared by docs
  for (int k = 0; k < T; ++k) {
    log_gamma_mass += log_gamma(std::max(beta * g.p[k], kStickMassFloor));
  }

  for (int m = 0; m < M; ++m) {
    const Document& doc = corpus.docs[m];
    const DocState& st = model.docs[m];
    const double n_tokens = static_cast<double>(doc.total_tokens());
    const Eigen::VectorXd e_pi = st.expected_pi();
    const Eigen::VectorXd elog_pi = st.expected_log_pi();
    const Eigen::VectorXd elog_scale =
        expected_log_scale_all(model.scaling, doc.labels);
    const Eigen::VectorXd einv_scale =
        expected_inv_scale_all(model.scaling, doc.labels);

    for (int t = 0; t < doc.num_types(); ++t) {
      const double c = doc.counts[t];
      const auto grow = st.gamma.row(t);
      words += c * grow.dot(elog_phi.col(doc.word_ids[t]));
      z_taylor += c * grow.dot(elog_pi);
      double neg_ent = 0.0;
      for (int k = 0; k < T; ++k) {
        const double v = grow[k];
        if (v > 0.0) neg_ent += v * std::log(v);
      }
      h_z -= c * neg_ent;
    }
    z_taylor +=
        n_tokens * (-std::log(st.xi) - (e_pi.sum() - st.xi) / st.xi);

    for (int k = 0; k < T; ++k) {
      const double mass = std::max(beta * g.p[k], kStickMassFloor);
      pi_prior += mass * (-elog_scale[k]) + (mass - 1.0) * elog_pi[k] -
                  einv_scale[k] * e_pi[k];
      h_pi += st.a_pi[k] - std::log(st.b_pi[k]) + log_gamma(st.a_pi[k]) +
              (1.0 - st.a_pi[k]) * digamma(st.a_pi[k]);
    }
    pi_prior -= log_gamma_mass;
  }

  for (int k = 0; k + 1 < T; ++k) {
    v_prior += std::log(alpha) + (alpha - 1.0) * std::log1p(-g.V[k]);
  }

  if (model.kind == ScalingKind::categorical) {
    const double a0 = model.hp.a_w;
    const double b0 = model.hp.b_w;
    const double prior_const = a0 * std::log(b0) - log_gamma(a0);
    const auto& s = model.scaling.cat;
    for (Eigen::Index k = 0; k < s.a_w.rows(); ++k) {
      for (Eigen::Index j = 0; j < s.a_w.cols(); ++j) {
        const double a = s.a_w(k, j);
        const double b = s.b_w(k, j);
        const double elog_w = inv_gamma_mean_log(a, b);
        w_prior += prior_const - (a0 + 1.0) * elog_w - b0 * (a / b);
        h_w += a + std::log(b) + log_gamma(a) - (1.0 + a) * digamma(a);
      }
    }
  } else {
    const auto& s = model.scaling.lin;
    const double sigma = model.hp.sigma;
    const double norm_const = -0.5 * std::log(2.0 * M_PI * sigma);
    w_prior += static_cast<double>(s.w.size()) * norm_const -
               s.w.squaredNorm() / (2.0 * sigma);
    // delta q(w): no entropy contribution
  }

  const double phi_prior_const =
      log_gamma(I * eta0) - I * log_gamma(eta0);
  for (int k = 0; k < T; ++k) {
    phi_prior += phi_prior_const + (eta0 - 1.0) * elog_phi.row(k).sum();
    const double total = g.eta.row(k).sum();
    long double lg_sum = 0.0L, ent_dot = 0.0L;
    for (int i = 0; i < I; ++i) {
      lg_sum += log_gamma(g.eta(k, i));
      ent_dot += (g.eta(k, i) - 1.0) * digamma(g.eta(k, i));
    }
    h_phi += -log_gamma(total) + lg_sum + (total - I) * digamma(total) -
             ent_dot;
  }

  const struct {
    const char* name;
    long double value;
  } terms[] = {{"word_likelihood", words}, {"z_and_taylor", z_taylor},
               {"pi_prior", pi_prior},     {"v_prior", v_prior},
               {"w_prior", w_prior},       {"phi_prior", phi_prior},
               {"entropy_z", h_z},         {"entropy_pi", h_pi},
               {"entropy_w", h_w},         {"entropy_phi", h_phi}};
  long double total = 0.0L;
  for (const auto& term : terms) {
    if (!std::isfinite(static_cast<double>(term.value))) {
      fail(ErrorCode::numeric,
           std::string("compute_elbo: non-finite term ") + term.name);
    }
    total += term.value;
  }
  return static_cast<double>(total);
}

TrainedModel initialize(const Corpus& corpus, const FitConfig& config) {
  config.validate();
  const int T = config.hp.truncation;
  const int I = corpus.vocab_size();
  const int M = corpus.num_docs();
  const int J = corpus.num_labels();
  const int threads = resolve_threads(config.threads);

  TrainedModel model;
  model.kind = config.scaling;
  model.hp = config.hp;

  Rng rng(config.seed);
  // Symmetry-breaking random topic init: exponential draws at the token
  // budget per cell, so topics start strongly tilted and the warm-start
  // sweeps have co-occurrence structure to lock onto.
  const double cell =
      static_cast<double>(corpus.total_tokens()) / (static_cast<double>(T) * I);
  model.global.eta.resize(T, I);
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < I; ++i) {
      model.global.eta(k, i) = config.hp.eta + cell * rng.gamma(1.0);
    }
  }

  model.docs.resize(M);
  model.doc_ids.resize(M);
  for (int m = 0; m < M; ++m) {
    model.doc_ids[m] = corpus.docs[m].id;
    model.docs[m].gamma =
        Eigen::MatrixXd::Constant(corpus.docs[m].num_types(), T, 1.0 / T);
  }

  if (config.lda_warm_start_sweeps > 0) {
    // Plain variational LDA: per-document Dirichlet proportions couple the
    // word assignments across a document, which is what actually separates
    // topics before the scaling machinery starts.
    const double warm_alpha = 1.0;
    Eigen::MatrixXd doc_dirichlet =
        Eigen::MatrixXd::Constant(M, T, warm_alpha);
    for (int m = 0; m < M; ++m) {
      doc_dirichlet.row(m).array() +=
          static_cast<double>(corpus.docs[m].total_tokens()) / T;
    }
    for (int sweep = 0; sweep < config.lda_warm_start_sweeps; ++sweep) {
      const Eigen::MatrixXd elog_phi = model.global.expected_log_phi();
      parallel_for(M, threads, [&](int m) {
        const Document& doc = corpus.docs[m];
        DocState& st = model.docs[m];
        Eigen::VectorXd logits(T);
        for (int inner = 0; inner < 3; ++inner) {
          const Eigen::VectorXd elog_theta =
              dirichlet_expected_log(doc_dirichlet.row(m).transpose());
          for (int t = 0; t < doc.num_types(); ++t) {
            logits = elog_phi.col(doc.word_ids[t]) + elog_theta;
            log_normalize_inplace(logits);
            st.gamma.row(t) = logits.transpose();
          }
          doc_dirichlet.row(m).setConstant(warm_alpha);
          for (int t = 0; t < doc.num_types(); ++t) {
            doc_dirichlet.row(m) += doc.counts[t] * st.gamma.row(t);
          }
        }
      });
      update_eta(model.global, corpus, model.docs, config.hp.eta);
    }
    // Reorder topics by posterior word count, largest first.
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(T);
    for (int m = 0; m < M; ++m) {
      const Document& doc = corpus.docs[m];
      for (int t = 0; t < doc.num_types(); ++t) {
        counts += doc.counts[t] * model.docs[m].gamma.row(t).transpose();
      }
    }
    std::vector<int> order(T);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return counts[a] > counts[b];
    });
    const Eigen::MatrixXd eta_old = model.global.eta;
    for (int k = 0; k < T; ++k) {
      model.global.eta.row(k) = eta_old.row(order[k]);
    }
    for (int m = 0; m < M; ++m) {
      const Eigen::MatrixXd gamma_old = model.docs[m].gamma;
      for (int k = 0; k < T; ++k) {
        model.docs[m].gamma.col(k) = gamma_old.col(order[k]);
      }
    }
  }

  // Uniform-stick start: V_k = 1/(T-k) puts 1/T on every topic. A prior-mean
  // start 1/(1+alpha) makes beta p_k decay geometrically, and psi(beta p_k)
  // then freezes every topic beyond the first few out of the responsibilities
  // before any data is seen.
  model.global.V.resize(T);
  for (int k = 0; k < T; ++k) {
    model.global.V[k] =
        std::clamp(1.0 / static_cast<double>(T - k), kStickLo, kStickHi);
  }
  model.global.V[T - 1] = 1.0;
  model.global.refresh_sticks();

  const Eigen::VectorXd beta_p = config.hp.beta * model.global.p;
  for (int m = 0; m < M; ++m) {
    model.docs[m].a_pi = beta_p.cwiseMax(kPiFloor);
    model.docs[m].b_pi = Eigen::VectorXd::Ones(T);
    model.docs[m].refresh_xi();
  }

  if (config.scaling == ScalingKind::categorical) {
    model.scaling.kind = ScalingKind::categorical;
    model.scaling.cat.a_w = Eigen::MatrixXd::Constant(T, J, config.hp.a_w);
    model.scaling.cat.b_w = Eigen::MatrixXd::Constant(T, J, config.hp.b_w);
  } else {
    model.scaling.kind = ScalingKind::loglinear;
    model.scaling.lin.w = Eigen::MatrixXd::Zero(T, J);
    model.scaling.lin.sigma = config.hp.sigma;
  }
  return model;
}

TrainedModel fit(const Corpus& corpus, const FitConfig& config) {
  config.validate();
  corpus.validate();
  if (config.scaling == ScalingKind::categorical) {
    corpus.validate_binary_labels();
  }
  const int threads = resolve_threads(config.threads);
  const int M = corpus.num_docs();
  const int T = config.hp.truncation;

  TrainedModel model = initialize(corpus, config);
  const Eigen::MatrixXd R = labels_matrix(corpus);

  model.elbo_trace.clear();
  model.elbo_trace.push_back(compute_elbo(model, corpus));
  double prev = model.elbo_trace.back();

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    // Document phase against an immutable snapshot of the corpus state.
    const Eigen::MatrixXd elog_phi = model.global.expected_log_phi();
    const Eigen::VectorXd beta_p = model.hp.beta * model.global.p;
    parallel_for(M, threads, [&](int m) {
      DocState& st = model.docs[m];
      const Eigen::VectorXd elog_pi = st.expected_log_pi();
      update_gamma(corpus.docs[m], st, elog_phi, elog_pi);
      update_pi(corpus.docs[m], st, beta_p, model.scaling);
    });

    // Corpus phase; reductions run in document order for determinism.
    Eigen::MatrixXd E_pi(M, T), Elog_pi(M, T);
    for (int m = 0; m < M; ++m) {
      E_pi.row(m) = model.docs[m].expected_pi().transpose();
      Elog_pi.row(m) = model.docs[m].expected_log_pi().transpose();
    }
    if (model.kind == ScalingKind::categorical) {
      update_w_categorical_sweep(model.scaling.cat, beta_p, R, E_pi,
                                 model.hp.a_w, model.hp.b_w,
                                 config.w_inner_repeats);
    } else {
      for (int k = 0; k < T; ++k) {
        model.scaling.lin.w.row(k) =
            update_w_loglinear(model.scaling.lin.w.row(k).transpose(),
                               beta_p[k], R, E_pi.col(k), model.hp.sigma,
                               config.newton)
                .w.transpose();
      }
    }

    const Eigen::VectorXd A = scaling_elbo_stat(model.scaling, R, Elog_pi);
    update_V(model.global, model.hp.alpha, model.hp.beta, A, M);
    update_eta(model.global, corpus, model.docs, model.hp.eta);
    if (config.optimize_hyperparams) {
      const auto [alpha_new, beta_new] = optimize_hyperparameters(
          model.global, model.hp.alpha, model.hp.beta, A, M);
      model.hp.alpha = alpha_new;
      model.hp.beta = beta_new;
    }

    validate_finite(model, iter);
    const double elbo = compute_elbo(model, corpus);
    model.elbo_trace.push_back(elbo);
    const double frac =
        std::abs(elbo - prev) / std::max(std::abs(prev), 1e-12);
    prev = elbo;
    if (frac < config.tol) break;
  }
  return model;
}

}  // namespace hdsp
