#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "hdsp/eval.hpp"
#include "hdsp/inference.hpp"
#include "hdsp/numerics.hpp"
#include "hdsp/rng.hpp"
#include "hdsp/synth.hpp"
#include "oracles.hpp"

using namespace hdsp;

namespace {

Document make_doc(const std::string& id, std::vector<int> ids,
                  std::vector<int> counts, std::vector<double> labels) {
  Document doc;
  doc.id = id;
  doc.word_ids = std::move(ids);
  doc.counts = std::move(counts);
  doc.labels = Eigen::Map<Eigen::VectorXd>(labels.data(),
                                           static_cast<long>(labels.size()));
  return doc;
}

Corpus random_corpus(int M, int I, int J, Rng& rng, bool binary_labels) {
  Corpus corpus;
  for (int i = 0; i < I; ++i) corpus.vocab.push_back("w" + std::to_string(i));
  for (int j = 0; j < J; ++j) {
    corpus.label_names.push_back("label" + std::to_string(j));
  }
  for (int m = 0; m < M; ++m) {
    Document doc;
    doc.id = "d" + std::to_string(m);
    for (int i = 0; i < I; ++i) {
      if (rng.bernoulli(0.4)) {
        doc.word_ids.push_back(i);
        doc.counts.push_back(1 + static_cast<int>(rng.uniform_int(4)));
      }
    }
    if (doc.word_ids.empty()) {
      doc.word_ids.push_back(static_cast<int>(rng.uniform_int(I)));
      doc.counts.push_back(1);
    }
    doc.labels.resize(J);
    for (int j = 0; j < J; ++j) {
      doc.labels[j] = binary_labels ? (rng.bernoulli(0.5) ? 1.0 : 0.0)
                                    : 2.0 * rng.uniform();
    }
    corpus.docs.push_back(std::move(doc));
  }
  corpus.validate();
  return corpus;
}

// Hand-set (not fitted) but dimensionally consistent state for ELBO checks.
TrainedModel random_model(const Corpus& corpus, ScalingKind kind, int T,
                          Rng& rng) {
  TrainedModel model;
  model.kind = kind;
  model.hp.truncation = T;
  model.hp.alpha = 0.5 + rng.uniform();
  model.hp.beta = 0.5 + rng.uniform();
  model.hp.eta = 0.3;
  model.hp.sigma = 1.5;
  const int I = corpus.vocab_size();
  const int J = corpus.num_labels();
  model.global.V.resize(T);
  for (int k = 0; k < T - 1; ++k) model.global.V[k] = 0.1 + 0.7 * rng.uniform();
  model.global.V[T - 1] = 1.0;
  model.global.refresh_sticks();
  model.global.eta.resize(T, I);
  for (int k = 0; k < T; ++k) {
    for (int i = 0; i < I; ++i) {
      model.global.eta(k, i) = model.hp.eta + 3.0 * rng.uniform();
    }
  }
  model.scaling.kind = kind;
  if (kind == ScalingKind::categorical) {
    model.scaling.cat.a_w.resize(T, J);
    model.scaling.cat.b_w.resize(T, J);
    for (int k = 0; k < T; ++k) {
      for (int j = 0; j < J; ++j) {
        model.scaling.cat.a_w(k, j) = 0.6 + 2.0 * rng.uniform();
        model.scaling.cat.b_w(k, j) = 0.6 + 2.0 * rng.uniform();
      }
    }
  } else {
    model.scaling.lin.w.resize(T, J);
    model.scaling.lin.sigma = model.hp.sigma;
    for (int k = 0; k < T; ++k) {
      for (int j = 0; j < J; ++j) {
        model.scaling.lin.w(k, j) = 0.6 * (rng.uniform() - 0.5);
      }
    }
  }
  for (const auto& doc : corpus.docs) {
    DocState st;
    st.a_pi.resize(T);
    st.b_pi.resize(T);
    for (int k = 0; k < T; ++k) {
      st.a_pi[k] = 0.2 + 3.0 * rng.uniform();
      st.b_pi[k] = 0.2 + 3.0 * rng.uniform();
    }
    st.gamma.resize(doc.num_types(), T);
    for (int t = 0; t < doc.num_types(); ++t) {
      Eigen::VectorXd row(T);
      for (int k = 0; k < T; ++k) row[k] = rng.uniform_pos();
      st.gamma.row(t) = (row / row.sum()).transpose();
    }
    st.refresh_xi();
    model.docs.push_back(std::move(st));
    model.doc_ids.push_back(doc.id);
  }
  return model;
}

FitConfig small_config(ScalingKind kind, int T, uint64_t seed) {
  FitConfig cfg;
  cfg.scaling = kind;
  cfg.hp.truncation = T;
  cfg.hp.eta = 0.5;
  cfg.seed = seed;
  cfg.max_iters = 30;
  cfg.tol = 1e-4;
  return cfg;
}

}  // namespace

TEST_CASE("update_gamma: symmetric expectations give uniform responsibilities") {
  const int T = 4;
  Document doc = make_doc("d", {0, 2}, {1, 3}, {});
  DocState st;
  st.gamma.resize(2, T);
  const Eigen::MatrixXd elog_phi = Eigen::MatrixXd::Constant(T, 3, -1.1);
  const Eigen::VectorXd elog_pi = Eigen::VectorXd::Constant(T, 0.4);
  update_gamma(doc, st, elog_phi, elog_pi);
  for (int t = 0; t < 2; ++t) {
    for (int k = 0; k < T; ++k) {
      CHECK(st.gamma(t, k) == doctest::Approx(0.25).epsilon(1e-14));
    }
  }
}

TEST_CASE("update_gamma: dominant topic takes the full responsibility") {
  const int T = 3;
  Document doc = make_doc("d", {0}, {1}, {});
  DocState st;
  st.gamma.resize(1, T);
  const Eigen::MatrixXd elog_phi = Eigen::MatrixXd::Constant(T, 1, -2.0);
  Eigen::VectorXd elog_pi(T);
  elog_pi << 900.0, 0.0, 0.0;
  update_gamma(doc, st, elog_phi, elog_pi);
  CHECK(st.gamma(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.gamma(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("update_gamma matches a direct softmax computation") {
  const int T = 3;
  Document doc = make_doc("d", {1}, {2}, {});
  DocState st;
  st.gamma.resize(1, T);
  Eigen::MatrixXd elog_phi(T, 2);
  elog_phi << -1.0, -0.2, -0.5, -1.4, -2.0, -0.7;
  Eigen::VectorXd elog_pi(T);
  elog_pi << 0.3, -0.9, 0.05;
  update_gamma(doc, st, elog_phi, elog_pi);
  Eigen::VectorXd direct(T);
  for (int k = 0; k < T; ++k) {
    direct[k] = std::exp(elog_phi(k, 1) + elog_pi[k]);
  }
  direct /= direct.sum();
  for (int k = 0; k < T; ++k) {
    CHECK(st.gamma(0, k) == doctest::Approx(direct[k]).epsilon(1e-12));
  }
}

TEST_CASE("update_pi formulas") {
  const int T = 2;
  ScalingModel s;
  s.kind = ScalingKind::categorical;
  s.cat.a_w = Eigen::MatrixXd::Constant(T, 1, 3.0);
  s.cat.b_w = Eigen::MatrixXd::Constant(T, 1, 4.0);

  // empty label set: b = 1 + N / xi
  Document doc = make_doc("d", {0, 1}, {10, 9}, {0.0});
  DocState st;
  st.a_pi = Eigen::VectorXd::Constant(T, 2.0);
  st.b_pi = Eigen::VectorXd::Constant(T, 1.0);  // xi will refresh to 4
  st.gamma.resize(2, T);
  st.gamma << 0.5, 0.5, 0.5, 0.5;
  Eigen::VectorXd beta_p(T);
  beta_p << 0.5, 0.5;
  update_pi(doc, st, beta_p, s);
  CHECK(st.xi == doctest::Approx(4.0));
  // a = beta p + sum_n gamma = 0.5 + 0.5*19
  CHECK(st.a_pi[0] == doctest::Approx(10.0));
  CHECK(st.b_pi[0] == doctest::Approx(1.0 + 19.0 / 4.0));

  // observed label: b = E[1/s] + N / xi with E[1/s] = a/b = 0.75
  Document doc2 = make_doc("d2", {0}, {5}, {1.0});
  DocState st2;
  st2.a_pi = Eigen::VectorXd::Constant(T, 1.0);
  st2.b_pi = Eigen::VectorXd::Constant(T, 1.0);  // xi = 2
  st2.gamma.resize(1, T);
  st2.gamma << 0.3, 0.7;
  update_pi(doc2, st2, beta_p, s);
  CHECK(st2.a_pi[1] == doctest::Approx(0.5 + 3.5));
  CHECK(st2.b_pi[1] == doctest::Approx(0.75 + 5.0 / 2.0));
}

TEST_CASE("update_eta: empty corpus and one-hot counting") {
  GlobalState g;
  g.eta.resize(3, 4);
  Corpus corpus;
  corpus.vocab = {"a", "b", "c", "d"};
  update_eta(g, corpus, {}, 0.7);
  CHECK((g.eta.array() == 0.7).all());

  corpus.docs.push_back(make_doc("d", {2}, {3}, {}));
  std::vector<DocState> docs(1);
  docs[0].gamma.resize(1, 3);
  docs[0].gamma << 0.0, 1.0, 0.0;
  update_eta(g, corpus, docs, 0.7);
  CHECK(g.eta(1, 2) == doctest::Approx(0.7 + 3.0));
  CHECK(g.eta(0, 2) == doctest::Approx(0.7));
  CHECK(g.eta(1, 1) == doctest::Approx(0.7));
}

TEST_CASE("update_eta matches a brute-force token loop") {
  Rng rng(71);
  Corpus corpus = random_corpus(8, 6, 0, rng, true);
  const int T = 4;
  std::vector<DocState> docs;
  for (const auto& doc : corpus.docs) {
    DocState st;
    st.gamma.resize(doc.num_types(), T);
    for (int t = 0; t < doc.num_types(); ++t) {
      Eigen::VectorXd row(T);
      for (int k = 0; k < T; ++k) row[k] = rng.uniform_pos();
      st.gamma.row(t) = (row / row.sum()).transpose();
    }
    docs.push_back(std::move(st));
  }
  GlobalState g;
  g.eta.resize(T, 6);
  update_eta(g, corpus, docs, 0.4);

  Eigen::MatrixXd want = Eigen::MatrixXd::Constant(T, 6, 0.4);
  for (int m = 0; m < corpus.num_docs(); ++m) {
    const auto& doc = corpus.docs[m];
    for (int t = 0; t < doc.num_types(); ++t) {
      for (int c = 0; c < doc.counts[t]; ++c) {  // token loop
        for (int k = 0; k < T; ++k) {
          want(k, doc.word_ids[t]) += docs[m].gamma(t, k);
        }
      }
    }
  }
  CHECK((g.eta - want).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("v_gradient matches central finite differences of v_objective") {
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 3 + static_cast<int>(rng.uniform_int(8));
    Eigen::VectorXd V(T);
    for (int k = 0; k < T - 1; ++k) V[k] = 0.05 + 0.85 * rng.uniform();
    V[T - 1] = 1.0;
    Eigen::VectorXd A(T);
    for (int k = 0; k < T; ++k) A[k] = 40.0 * (rng.uniform() - 0.5);
    const double alpha = 0.3 + 2.0 * rng.uniform();
    const double beta = 0.3 + 2.0 * rng.uniform();
    const long M = 1 + static_cast<long>(rng.uniform_int(60));

    const Eigen::VectorXd grad = v_gradient(V, alpha, beta, A, M);
    CHECK(grad[T - 1] == 0.0);
    for (int k = 0; k < T - 1; ++k) {
      const double fd = oracle::central_diff(
          [&](double vk) {
            Eigen::VectorXd vt = V;
            vt[k] = vk;
            return v_objective(vt, alpha, beta, A, M);
          },
          V[k], 1e-5);
      CAPTURE(trial);
      CAPTURE(k);
      CHECK(std::abs(grad[k] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("v_gradient on a zero-document corpus is the prior term only") {
  Eigen::VectorXd V(3);
  V << 0.4, 0.6, 1.0;
  const Eigen::VectorXd A = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd grad = v_gradient(V, 2.0, 1.0, A, 0);
  CHECK(grad[0] == doctest::Approx(-1.0 / 0.6).epsilon(1e-12));
  CHECK(grad[1] == doctest::Approx(-1.0 / 0.4).epsilon(1e-12));
  grad = v_gradient(V, 1.0, 1.0, A, 0);  // Beta(1,1) is flat
  CHECK(grad[0] == 0.0);
  CHECK(grad[1] == 0.0);
}

TEST_CASE("update_V never decreases its objective and keeps V_T at 1") {
  Rng rng(79);
  for (int trial = 0; trial < 10; ++trial) {
    GlobalState g;
    const int T = 5;
    g.V.resize(T);
    for (int k = 0; k < T - 1; ++k) g.V[k] = 0.1 + 0.8 * rng.uniform();
    g.V[T - 1] = 1.0;
    g.refresh_sticks();
    Eigen::VectorXd A(T);
    for (int k = 0; k < T; ++k) A[k] = 30.0 * (rng.uniform() - 0.5);
    const double before = v_objective(g.V, 1.3, 0.9, A, 12);
    const auto res = update_V(g, 1.3, 0.9, A, 12);
    CHECK(g.V[T - 1] == 1.0);
    if (!res.stalled) {
      CHECK(res.objective >= before - 1e-12);
      CHECK((g.p - stick_breaking(g.V)).lpNorm<Eigen::Infinity>() == 0.0);
    }
    CHECK(g.V.head(T - 1).minCoeff() >= 1e-6);
    CHECK(g.V.head(T - 1).maxCoeff() <= 1.0 - 1e-6);
  }
}

TEST_CASE("ELBO delta equals v_objective delta when only V moves") {
  Rng rng(83);
  Corpus corpus = random_corpus(6, 5, 2, rng, true);
  TrainedModel model = random_model(corpus, ScalingKind::categorical, 4, rng);
  const Eigen::MatrixXd R = labels_matrix(corpus);
  Eigen::MatrixXd elog_pi(corpus.num_docs(), 4);
  for (int m = 0; m < corpus.num_docs(); ++m) {
    elog_pi.row(m) = model.docs[m].expected_log_pi().transpose();
  }
  const Eigen::VectorXd A = scaling_elbo_stat(model.scaling, R, elog_pi);

  const double e0 = compute_elbo(model, corpus);
  const double f0 =
      v_objective(model.global.V, model.hp.alpha, model.hp.beta, A,
                  corpus.num_docs());
  Eigen::VectorXd v_new = model.global.V;
  v_new[0] = 0.33;
  v_new[2] = 0.71;
  model.global.V = v_new;
  model.global.refresh_sticks();
  const double e1 = compute_elbo(model, corpus);
  const double f1 = v_objective(v_new, model.hp.alpha, model.hp.beta, A,
                                corpus.num_docs());
  CHECK(e1 - e0 == doctest::Approx(f1 - f0).epsilon(1e-9));
}

TEST_CASE("optimize_hyperparameters closed forms for alpha") {
  GlobalState g;
  const int T = 6;
  g.V = Eigen::VectorXd::Constant(T, 1.0 - std::exp(-1.0));
  g.V[T - 1] = 1.0;
  g.refresh_sticks();
  const Eigen::VectorXd A = Eigen::VectorXd::Zero(T);
  auto [alpha1, beta1] = optimize_hyperparameters(g, 2.0, 1.0, A, 0);
  CHECK(alpha1 == doctest::Approx(1.0).epsilon(1e-12));

  g.V = Eigen::VectorXd::Constant(T, 1.0 - std::exp(-2.0));
  g.V[T - 1] = 1.0;
  g.refresh_sticks();
  auto [alpha2, beta2] = optimize_hyperparameters(g, 2.0, 1.0, A, 0);
  CHECK(alpha2 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta1 > 0.0);
  CHECK(beta2 > 0.0);
}

TEST_CASE("compute_elbo equals the independent term-by-term oracle") {
  // Hand-set one-document, two-topic, two-word case first.
  Corpus corpus;
  corpus.vocab = {"a", "b"};
  corpus.label_names = {"x"};
  corpus.docs.push_back(make_doc("d0", {0, 1}, {2, 1}, {1.0}));
  Rng rng(89);
  TrainedModel model = random_model(corpus, ScalingKind::categorical, 2, rng);
  CHECK(compute_elbo(model, corpus) ==
        doctest::Approx(oracle::elbo(model, corpus)).epsilon(1e-10));

  // Random states, both scaling functions.
  for (int trial = 0; trial < 6; ++trial) {
    Corpus c2 = random_corpus(5 + trial, 7, 3, rng, true);
    TrainedModel cat = random_model(c2, ScalingKind::categorical, 4, rng);
    CHECK(compute_elbo(cat, c2) ==
          doctest::Approx(oracle::elbo(cat, c2)).epsilon(1e-10));
    Corpus c3 = random_corpus(5 + trial, 7, 3, rng, false);
    TrainedModel lin = random_model(c3, ScalingKind::loglinear, 4, rng);
    CHECK(compute_elbo(lin, c3) ==
          doctest::Approx(oracle::elbo(lin, c3)).epsilon(1e-10));
  }
}

TEST_CASE("gamma variational entropy matches Monte Carlo at a = b = 1") {
  Rng rng(97);
  const double a = 1.0, b = 1.0;
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.gamma(a, b);
    // -ln q(x) for Gamma(a, b)
    const double lq = a * std::log(b) + (a - 1.0) * std::log(x) - b * x -
                      log_gamma(a);
    sum += -lq;
    sq += lq * lq;
  }
  const double mc = sum / n;
  const double se = std::sqrt((sq / n - mc * mc) / n);
  const double analytic =
      a - std::log(b) + log_gamma(a) + (1.0 - a) * digamma(a);
  CHECK(std::abs(mc - analytic) <= 3.0 * se);
}

TEST_CASE("fit: ELBO trace is monotone for both scaling functions") {
  Rng rng(101);
  Corpus cat_corpus = random_corpus(25, 8, 3, rng, true);
  const TrainedModel cat = fit(cat_corpus, small_config(ScalingKind::categorical, 5, 3));
  REQUIRE(cat.elbo_trace.size() >= 2);
  for (size_t i = 1; i < cat.elbo_trace.size(); ++i) {
    CHECK(cat.elbo_trace[i] >= cat.elbo_trace[i - 1] - 1e-8);
  }

  Corpus lin_corpus = random_corpus(25, 8, 3, rng, false);
  const TrainedModel lin = fit(lin_corpus, small_config(ScalingKind::loglinear, 5, 3));
  for (size_t i = 1; i < lin.elbo_trace.size(); ++i) {
    CHECK(lin.elbo_trace[i] >= lin.elbo_trace[i - 1] - 1e-8);
  }
}

TEST_CASE("fit: infinite tolerance stops after exactly one sweep") {
  Rng rng(103);
  Corpus corpus = random_corpus(10, 6, 2, rng, true);
  FitConfig cfg = small_config(ScalingKind::categorical, 4, 5);
  cfg.tol = std::numeric_limits<double>::infinity();
  cfg.max_iters = 50;
  const TrainedModel model = fit(corpus, cfg);
  CHECK(model.elbo_trace.size() == 2);  // init value plus one sweep
}

TEST_CASE("fit: identical seeds give bit-identical traces") {
  Rng rng(107);
  Corpus corpus = random_corpus(15, 7, 2, rng, true);
  const FitConfig cfg = small_config(ScalingKind::categorical, 4, 11);
  const TrainedModel m1 = fit(corpus, cfg);
  const TrainedModel m2 = fit(corpus, cfg);
  REQUIRE(m1.elbo_trace.size() == m2.elbo_trace.size());
  for (size_t i = 0; i < m1.elbo_trace.size(); ++i) {
    CHECK(m1.elbo_trace[i] == m2.elbo_trace[i]);
  }
  CHECK((m1.global.eta - m2.global.eta).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("fit: thread count does not change the result") {
  Rng rng(109);
  Corpus corpus = random_corpus(20, 7, 2, rng, true);
  FitConfig cfg = small_config(ScalingKind::categorical, 4, 13);
  cfg.threads = 1;
  const TrainedModel m1 = fit(corpus, cfg);
  cfg.threads = 4;
  const TrainedModel m4 = fit(corpus, cfg);
  REQUIRE(m1.elbo_trace.size() == m4.elbo_trace.size());
  for (size_t i = 0; i < m1.elbo_trace.size(); ++i) {
    CHECK(m1.elbo_trace[i] == m4.elbo_trace[i]);
  }
  CHECK((m1.global.eta - m4.global.eta).lpNorm<Eigen::Infinity>() == 0.0);
  for (size_t m = 0; m < m1.docs.size(); ++m) {
    CHECK((m1.docs[m].a_pi - m4.docs[m].a_pi).lpNorm<Eigen::Infinity>() ==
          0.0);
  }
}

TEST_CASE("fit keeps simplex and positivity invariants") {
  Rng rng(113);
  Corpus corpus = random_corpus(15, 6, 2, rng, true);
  const TrainedModel model =
      fit(corpus, small_config(ScalingKind::categorical, 5, 17));
  CHECK(std::abs(model.global.p.sum() - 1.0) <= 1e-12);
  for (const auto& st : model.docs) {
    CHECK(st.a_pi.minCoeff() > 0.0);
    CHECK(st.b_pi.minCoeff() > 0.0);
    for (Eigen::Index t = 0; t < st.gamma.rows(); ++t) {
      CHECK(std::abs(st.gamma.row(t).sum() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("initialize: ordering, prior sticks, reproducibility") {
  FixedSynthConfig synth_cfg;
  synth_cfg.docs = 60;
  const auto [corpus, truth] = generate_fixed(synth_cfg, 19);
  FitConfig cfg = small_config(ScalingKind::categorical, 6, 23);
  const TrainedModel a = initialize(corpus, cfg);
  const TrainedModel b = initialize(corpus, cfg);
  CHECK((a.global.eta - b.global.eta).lpNorm<Eigen::Infinity>() == 0.0);

  // posterior word counts non-increasing after the warm-start reorder
  const Eigen::VectorXd counts = posterior_word_counts(a, corpus);
  for (int k = 0; k + 1 < 6; ++k) {
    CHECK(counts[k] >= counts[k + 1] - 1e-9);
  }
  for (int k = 0; k < 5; ++k) {
    CHECK(a.global.V[k] == doctest::Approx(1.0 / (1.0 + cfg.hp.alpha)));
  }
  CHECK(a.global.V[5] == 1.0);
  for (const auto& st : a.docs) {
    CHECK((st.b_pi.array() == 1.0).all());
    CHECK(st.a_pi[0] == doctest::Approx(cfg.hp.beta * a.global.p[0]));
  }
}

TEST_CASE("warm start lowers first-sweep held-out perplexity vs random init") {
  FixedSynthConfig synth_cfg;
  synth_cfg.docs = 150;
  double warm_mean = 0.0, cold_mean = 0.0;
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    const auto [corpus, truth] = generate_fixed(synth_cfg, seed);
    const auto [train_idx, test_idx] = heldout_split(corpus.num_docs(), 0.2, seed);
    const Corpus train = subset(corpus, train_idx);

    FitConfig cfg = small_config(ScalingKind::categorical, 10, seed);
    cfg.tol = std::numeric_limits<double>::infinity();  // one sweep
    cfg.lda_warm_start_sweeps = 3;
    const TrainedModel warm = fit(train, cfg);
    cfg.lda_warm_start_sweeps = 0;
    const TrainedModel cold = fit(train, cfg);

    for (int m : test_idx) {
      const Document& doc = corpus.docs[m];
      warm_mean += heldout_perplexity(warm, doc, doc.labels);
      cold_mean += heldout_perplexity(cold, doc, doc.labels);
    }
  }
  CHECK(warm_mean < cold_mean);
}
