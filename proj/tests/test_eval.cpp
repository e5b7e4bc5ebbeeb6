#include <doctest.h>

#include <cmath>

#include "hdsp/eval.hpp"
#include "hdsp/numerics.hpp"
#include "hdsp/rng.hpp"
#include "oracles.hpp"

using namespace hdsp;

namespace {

// Minimal consistent model with hand-set globals for evaluation checks.
TrainedModel tiny_model(int T, int I, int J, ScalingKind kind) {
  TrainedModel model;
  model.kind = kind;
  model.hp.truncation = T;
  model.hp.beta = 1.0;
  model.hp.eta = 0.5;
  model.global.V = Eigen::VectorXd::Constant(T, 0.5);
  model.global.V[T - 1] = 1.0;
  model.global.refresh_sticks();
  model.global.eta = Eigen::MatrixXd::Constant(T, I, 1.0);
  model.scaling.kind = kind;
  if (kind == ScalingKind::categorical) {
    model.scaling.cat.a_w = Eigen::MatrixXd::Constant(T, J, 2.0);
    model.scaling.cat.b_w = Eigen::MatrixXd::Constant(T, J, 2.0);
  } else {
    model.scaling.lin.w = Eigen::MatrixXd::Zero(T, J);
    model.scaling.lin.sigma = 1.0;
  }
  return model;
}

Document words_only(std::vector<int> ids, std::vector<int> counts) {
  Document doc;
  doc.id = "t";
  doc.word_ids = std::move(ids);
  doc.counts = std::move(counts);
  doc.labels = Eigen::VectorXd::Zero(0);
  return doc;
}

}  // namespace

TEST_CASE("expected proportions: empty label set returns the sticks") {
  TrainedModel model = tiny_model(3, 4, 2, ScalingKind::categorical);
  const Eigen::VectorXd props =
      expected_proportions_given_labels(model, Eigen::VectorXd::Zero(2));
  CHECK((props - model.global.p).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("expected proportions: uniform single-label weights cancel") {
  TrainedModel model = tiny_model(3, 4, 2, ScalingKind::categorical);
  // identical (a, b) across topics for label 0 -> scaling cancels
  Eigen::VectorXd r(2);
  r << 1.0, 0.0;
  const Eigen::VectorXd props = expected_proportions_given_labels(model, r);
  CHECK((props - model.global.p).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("expected proportions match the direct formula") {
  TrainedModel model = tiny_model(3, 4, 2, ScalingKind::categorical);
  model.scaling.cat.a_w << 2.0, 1.0, 3.0, 2.0, 4.0, 3.0;
  model.scaling.cat.b_w << 1.0, 2.0, 2.0, 1.0, 1.0, 1.0;
  Eigen::VectorXd r(2);
  r << 1.0, 1.0;
  const Eigen::VectorXd props = expected_proportions_given_labels(model, r);
  Eigen::VectorXd direct(3);
  for (int k = 0; k < 3; ++k) {
    const double inv = (model.scaling.cat.a_w(k, 0) / model.scaling.cat.b_w(k, 0)) *
                       (model.scaling.cat.a_w(k, 1) / model.scaling.cat.b_w(k, 1));
    direct[k] = model.hp.beta * model.global.p[k] / inv;
  }
  direct /= direct.sum();
  CHECK((props - direct).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("heldout perplexity: single topic is a geometric mean") {
  // T = 2 with all mass on topic 0 behaves like a single-topic model.
  TrainedModel model = tiny_model(2, 3, 1, ScalingKind::categorical);
  model.global.V[0] = 1.0 - 1e-12;
  model.global.refresh_sticks();
  Eigen::MatrixXd eta(2, 3);
  eta << 2.0, 3.0, 5.0, 2.0, 3.0, 5.0;  // identical rows: phi the same
  model.global.eta = eta;
  const Document doc = words_only({0, 2}, {1, 1});
  const double ppl =
      heldout_perplexity(model, doc, Eigen::VectorXd::Zero(1));
  const double phi0 = 0.2, phi2 = 0.5;
  CHECK(ppl == doctest::Approx(1.0 / std::sqrt(phi0 * phi2)).epsilon(1e-9));
}

TEST_CASE("heldout perplexity: uniform topics give vocabulary size") {
  TrainedModel model = tiny_model(3, 8, 1, ScalingKind::categorical);
  const Document doc = words_only({1, 4, 7}, {2, 1, 3});
  const double ppl =
      heldout_perplexity(model, doc, Eigen::VectorXd::Zero(1));
  CHECK(ppl == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("heldout perplexity: two-topic hand case vs direct summation") {
  TrainedModel model = tiny_model(2, 3, 1, ScalingKind::categorical);
  model.global.eta << 4.0, 1.0, 1.0, 1.0, 1.0, 4.0;
  model.scaling.cat.a_w << 3.0, 1.0;
  model.scaling.cat.b_w << 1.0, 1.0;
  Eigen::VectorXd r(1);
  r << 1.0;
  const Document doc = words_only({0, 1, 2}, {1, 2, 1});

  // direct recomputation
  Eigen::VectorXd props(2);
  props << model.global.p[0] / 3.0, model.global.p[1] / 1.0;
  props /= props.sum();
  double log_p = 0.0;
  const double phi[2][3] = {{4.0 / 6, 1.0 / 6, 1.0 / 6},
                            {1.0 / 6, 1.0 / 6, 4.0 / 6}};
  const int counts[3] = {1, 2, 1};
  for (int i = 0; i < 3; ++i) {
    log_p += counts[i] * std::log(props[0] * phi[0][i] + props[1] * phi[1][i]);
  }
  const double want = std::exp(-log_p / 4.0);
  CHECK(heldout_perplexity(model, doc, r) ==
        doctest::Approx(want).epsilon(1e-12));
  CHECK(heldout_perplexity(model, doc, r) >= 1.0);
}

TEST_CASE("heldout perplexity input guards") {
  TrainedModel model = tiny_model(2, 3, 1, ScalingKind::categorical);
  Document doc = words_only({5}, {1});
  CHECK_THROWS_AS(heldout_perplexity(model, doc, Eigen::VectorXd::Zero(1)),
                  Error);
  try {
    heldout_perplexity(model, doc, Eigen::VectorXd::Zero(1));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unseen_word);
  }
}

TEST_CASE("classify_rating: singleton grid and tie breaking") {
  TrainedModel model = tiny_model(3, 5, 2, ScalingKind::loglinear);
  const Document doc = words_only({0, 3}, {2, 1});
  Eigen::VectorXd base(2);
  base << 0.0, 1.0;
  CHECK(classify_rating(model, doc, base, 0, {4.0}) == 4.0);
  // all weights zero: every rating ties -> lowest returned
  CHECK(classify_rating(model, doc, base, 0, {1, 2, 3, 4, 5}) == 1.0);
  CHECK(classify_rating(model, doc, base, 0, {5, 3, 2}) == 2.0);
  CHECK_THROWS_AS(classify_rating(model, doc, base, 0, {}), Error);
}

TEST_CASE("match_topics recovers a permutation exactly") {
  Rng rng(127);
  const int K = 5, I = 12;
  Eigen::MatrixXd topics(K, I);
  for (int k = 0; k < K; ++k) {
    Eigen::VectorXd row(I);
    for (int i = 0; i < I; ++i) row[i] = rng.uniform_pos();
    topics.row(k) = (row / row.sum()).transpose();
  }
  const int perm[K] = {3, 0, 4, 1, 2};
  Eigen::MatrixXd shuffled(K, I);
  for (int k = 0; k < K; ++k) {
    shuffled.row(perm[k]) = topics.row(k);
  }
  const auto assignment = match_topics(topics, shuffled);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    CHECK(assignment[k] == perm[k]);
    total += kl_divergence(topics.row(k).transpose(),
                           shuffled.row(assignment[k]).transpose());
  }
  CHECK(total <= 1e-12);
}

TEST_CASE("match_topics picks the strictly closer near-duplicate") {
  Eigen::MatrixXd t(2, 2), q(2, 2);
  t << 0.9, 0.1, 0.2, 0.8;
  q << 0.89, 0.11, 0.21, 0.79;
  const auto assignment = match_topics(t, q);
  CHECK(assignment[0] == 0);
  CHECK(assignment[1] == 1);
}

TEST_CASE("match_topics equals exhaustive enumeration on random instances") {
  Rng rng(131);
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 5, Kinf = 8, I = 10;
    Eigen::MatrixXd t(K, I), q(Kinf, I);
    for (int k = 0; k < K; ++k) {
      Eigen::VectorXd row(I);
      for (int i = 0; i < I; ++i) row[i] = rng.uniform_pos();
      t.row(k) = (row / row.sum()).transpose();
    }
    for (int k = 0; k < Kinf; ++k) {
      Eigen::VectorXd row(I);
      for (int i = 0; i < I; ++i) row[i] = rng.uniform_pos();
      q.row(k) = (row / row.sum()).transpose();
    }
    Eigen::MatrixXd cost(K, Kinf);
    for (int a = 0; a < K; ++a) {
      for (int b = 0; b < Kinf; ++b) {
        cost(a, b) =
            kl_divergence(t.row(a).transpose(), q.row(b).transpose());
      }
    }
    const auto assignment = match_topics(t, q);
    double got = 0.0;
    for (int k = 0; k < K; ++k) got += cost(k, assignment[k]);
    const auto [want, want_assign] = oracle::brute_force_assignment(cost);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
    // injectivity
    for (int a = 0; a < K; ++a) {
      for (int b = a + 1; b < K; ++b) {
        CHECK(assignment[a] != assignment[b]);
      }
    }
  }
}

TEST_CASE("match_topics dimension errors") {
  Eigen::MatrixXd t(3, 4), q(2, 4);
  t.setConstant(0.25);
  q.setConstant(0.25);
  CHECK_THROWS_AS(match_topics(t, q), Error);
  Eigen::MatrixXd q2(3, 5);
  q2.setConstant(0.2);
  CHECK_THROWS_AS(match_topics(t, q2), Error);
}

TEST_CASE("spearman_rho examples") {
  Eigen::VectorXd x(4), y(4);
  x << 1, 2, 3, 4;
  y << 1, 2, 3, 4;
  CHECK(spearman_rho(x, y) == doctest::Approx(1.0));
  y << 4, 3, 2, 1;
  CHECK(spearman_rho(x, y) == doctest::Approx(-1.0));
  y << 1, 3, 2, 4;
  CHECK(spearman_rho(x, y) == doctest::Approx(0.8).epsilon(1e-12));
  // ties get average ranks
  Eigen::VectorXd xt(4), yt(4);
  xt << 1, 1, 2, 3;
  yt << 2, 2, 4, 6;
  CHECK(spearman_rho(xt, yt) == doctest::Approx(1.0));
  Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 2.0);
  CHECK_THROWS_AS(spearman_rho(x, c), Error);
}

TEST_CASE("mean_absolute_error") {
  Eigen::VectorXd x(2), y(2);
  x << 0, 0;
  y << 1, 3;
  CHECK(mean_absolute_error(x, y) == doctest::Approx(2.0));
  CHECK(mean_absolute_error(y, y) == 0.0);
  Rng rng(137);
  Eigen::VectorXd a(9), b(9);
  for (int i = 0; i < 9; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  double want = 0.0;
  for (int i = 0; i < 9; ++i) want += std::abs(a[i] - b[i]);
  want /= 9.0;
  CHECK(mean_absolute_error(a, b) == doctest::Approx(want).epsilon(1e-14));
  Eigen::VectorXd shorter(3);
  CHECK_THROWS_AS(mean_absolute_error(a, shorter), Error);
}

TEST_CASE("classification_report: perfect, degenerate, hand-counted") {
  const std::vector<int> classes = {1, 2, 3};
  ClassificationReport rep =
      classification_report({1, 2, 3, 1}, {1, 2, 3, 1}, classes);
  CHECK(rep.macro_f1 == doctest::Approx(1.0));
  CHECK(rep.micro_f1 == doctest::Approx(1.0));
  CHECK(rep.confusion(0, 0) == 2.0);
  CHECK(rep.confusion(0, 1) == 0.0);

  // class 3 never predicted nor true -> F1 = 0 by convention, macro includes it
  rep = classification_report({1, 2, 1, 2}, {1, 2, 2, 1}, classes);
  CHECK(rep.f1[2] == 0.0);
  CHECK(rep.macro_f1 ==
        doctest::Approx((rep.f1[0] + rep.f1[1]) / 3.0).epsilon(1e-14));

  // 10-sample hand case
  const std::vector<int> truth = {1, 1, 1, 1, 2, 2, 2, 3, 3, 3};
  const std::vector<int> pred = {1, 1, 2, 3, 2, 2, 1, 3, 3, 2};
  rep = classification_report(pred, truth, classes);
  // class 1: tp=2 fp=1 fn=2 -> p=2/3 r=1/2 f1=4/7
  CHECK(rep.precision[0] == doctest::Approx(2.0 / 3.0));
  CHECK(rep.recall[0] == doctest::Approx(0.5));
  CHECK(rep.f1[0] == doctest::Approx(4.0 / 7.0));
  // class 2: tp=2 fp=2 fn=1 -> p=1/2 r=2/3 f1=4/7
  CHECK(rep.f1[1] == doctest::Approx(4.0 / 7.0));
  // class 3: tp=2 fp=1 fn=1 -> p=2/3 r=2/3 f1=2/3
  CHECK(rep.f1[2] == doctest::Approx(2.0 / 3.0));
  CHECK(rep.micro_f1 == doctest::Approx(0.6));
  CHECK(rep.macro_f1 ==
        doctest::Approx((4.0 / 7.0 + 4.0 / 7.0 + 2.0 / 3.0) / 3.0));
  // column-normalized confusion sums to one per predicted class
  const Eigen::MatrixXd norm = rep.column_normalized_confusion();
  for (int c = 0; c < 3; ++c) {
    CHECK(norm.col(c).sum() == doctest::Approx(1.0));
  }

  CHECK_THROWS_AS(classification_report({9}, {1}, classes), Error);
}

TEST_CASE("posterior_word_counts: one-hot and conservation") {
  Corpus corpus;
  corpus.vocab = {"a", "b"};
  Document doc;
  doc.id = "d";
  doc.word_ids = {0, 1};
  doc.counts = {3, 4};
  doc.labels = Eigen::VectorXd::Zero(0);
  corpus.docs.push_back(doc);

  TrainedModel model = tiny_model(2, 2, 0, ScalingKind::categorical);
  DocState st;
  st.a_pi = Eigen::VectorXd::Ones(2);
  st.b_pi = Eigen::VectorXd::Ones(2);
  st.gamma.resize(2, 2);
  st.gamma << 1.0, 0.0, 1.0, 0.0;
  st.xi = 2.0;
  model.docs.push_back(st);
  model.doc_ids.push_back("d");

  const Eigen::VectorXd counts = posterior_word_counts(model, corpus);
  CHECK(counts[0] == doctest::Approx(7.0));
  CHECK(counts[1] == doctest::Approx(0.0));
  CHECK(std::abs(counts.sum() - 7.0) <= 1e-6);

  // brute-force token loop on a random responsibility matrix
  Rng rng(139);
  Eigen::VectorXd row(2);
  row << rng.uniform_pos(), rng.uniform_pos();
  row /= row.sum();
  model.docs[0].gamma.row(0) = row.transpose();
  const Eigen::VectorXd counts2 = posterior_word_counts(model, corpus);
  CHECK(counts2[0] == doctest::Approx(3.0 * row[0] + 4.0).epsilon(1e-12));
  CHECK(std::abs(counts2.sum() - 7.0) <= 1e-6);
}

TEST_CASE("heldout_split is deterministic, disjoint, and sized") {
  const auto [train, test] = heldout_split(100, 0.2, 77);
  CHECK(train.size() == 80);
  CHECK(test.size() == 20);
  const auto [train2, test2] = heldout_split(100, 0.2, 77);
  CHECK(train == train2);
  CHECK(test == test2);
  std::vector<char> seen(100, 0);
  for (int i : train) seen[static_cast<size_t>(i)] += 1;
  for (int i : test) seen[static_cast<size_t>(i)] += 1;
  for (char s : seen) CHECK(s == 1);
  CHECK_THROWS_AS(heldout_split(100, 1.0, 1), Error);
  CHECK_THROWS_AS(heldout_split(100, -0.1, 1), Error);
}

TEST_CASE("sign test p-values") {
  CHECK(sign_test_p_value(10, 10) == doctest::Approx(1.0 / 1024).epsilon(1e-10));
  CHECK(sign_test_p_value(9, 10) == doctest::Approx(11.0 / 1024).epsilon(1e-10));
  CHECK(sign_test_p_value(8, 10) == doctest::Approx(56.0 / 1024).epsilon(1e-10));
  CHECK(sign_test_p_value(0, 10) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sign_test_p_value(11, 10), Error);
}
