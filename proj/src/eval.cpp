#include "hdsp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "hdsp/numerics.hpp"
#include "hdsp/rng.hpp"

namespace hdsp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hungarian algorithm (potentials form), rows <= cols, minimizing total cost.
// Returns col index assigned to each row.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) {
      assignment[p[j] - 1] = j - 1;
    }
  }
  return assignment;
}

// Average ranks (1-based), ties get the mean of their rank range.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return x[a] < x[b]; });
  Eigen::VectorXd ranks(n);
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double rank = 0.5 * (i + j) + 1.0;
    for (int t = i; t <= j; ++t) {
      ranks[idx[t]] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::ArrayXd dx = x.array() - mx;
  const Eigen::ArrayXd dy = y.array() - my;
  const double vx = (dx * dx).sum();
  const double vy = (dy * dy).sum();
  if (vx == 0.0 || vy == 0.0) {
    fail(ErrorCode::undefined_correlation,
         "correlation undefined for a constant vector");
  }
  return (dx * dy).sum() / std::sqrt(vx * vy);
}

}  // namespace

Eigen::VectorXd expected_proportions_given_labels(
    const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (r.size() != model.num_labels()) {
    fail(ErrorCode::dimension,
         "expected_proportions_given_labels: label vector length mismatch");
  }
  const Eigen::VectorXd inv_scale = expected_inv_scale_all(model.scaling, r);
  Eigen::VectorXd props =
      (model.hp.beta * model.global.p).cwiseQuotient(inv_scale);
  const double total = props.sum();
  if (!(total > 0.0) || !props.allFinite()) {
    fail(ErrorCode::numeric,
         "expected_proportions_given_labels: degenerate proportions");
  }
  return props / total;
}

Eigen::MatrixXd topic_word_means(const TrainedModel& model) {
  Eigen::MatrixXd phi = model.global.eta;
  for (Eigen::Index k = 0; k < phi.rows(); ++k) {
    phi.row(k) /= phi.row(k).sum();
  }
  return phi;
}

double heldout_log_likelihood(const TrainedModel& model, const Document& doc,
                              const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (doc.num_types() == 0) {
    fail(ErrorCode::domain, "heldout_log_likelihood: empty document");
  }
  for (int w : doc.word_ids) {
    if (w < 0 || w >= model.vocab_size()) {
      fail(ErrorCode::unseen_word,
           "word id " + std::to_string(w) + " outside the model vocabulary");
    }
  }
  const Eigen::VectorXd props = expected_proportions_given_labels(model, r);
  const Eigen::MatrixXd phi = topic_word_means(model);
  long double log_p = 0.0L;
  for (int t = 0; t < doc.num_types(); ++t) {
    const double word_prob = props.dot(phi.col(doc.word_ids[t]));
    log_p += doc.counts[t] * std::log(word_prob);
  }
  return static_cast<double>(log_p);
}

double heldout_perplexity(const TrainedModel& model, const Document& doc,
                          const Eigen::Ref<const Eigen::VectorXd>& r) {
  const double log_p = heldout_log_likelihood(model, doc, r);
  const double n_tokens = static_cast<double>(doc.total_tokens());
  return std::exp(-log_p / n_tokens);
}

double classify_rating(const TrainedModel& model, const Document& doc,
                       const Eigen::Ref<const Eigen::VectorXd>& base_labels,
                       int rating_dim, std::vector<double> rating_grid) {
  if (rating_grid.empty()) {
    fail(ErrorCode::config, "classify_rating: empty rating grid");
  }
  if (rating_dim < 0 || rating_dim >= base_labels.size()) {
    fail(ErrorCode::dimension, "classify_rating: rating dimension out of range");
  }
  std::sort(rating_grid.begin(), rating_grid.end());
  Eigen::VectorXd r = base_labels;
  double best_rating = rating_grid.front();
  double best_perplexity = kInf;
  for (const double rating : rating_grid) {
    r[rating_dim] = rating;
    const double ppl = heldout_perplexity(model, doc, r);
    if (ppl < best_perplexity) {
      best_perplexity = ppl;
      best_rating = rating;
    }
  }
  return best_rating;
}

double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p,
                     const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (p.size() != q.size()) {
    fail(ErrorCode::dimension, "kl_divergence: length mismatch");
  }
  long double kl = 0.0L;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (!(q[i] > 0.0)) return kInf;
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return static_cast<double>(kl);
}

std::vector<int> match_topics(
    const Eigen::Ref<const Eigen::MatrixXd>& true_topics,
    const Eigen::Ref<const Eigen::MatrixXd>& inferred_topics) {
  const int n_true = static_cast<int>(true_topics.rows());
  const int n_inferred = static_cast<int>(inferred_topics.rows());
  if (true_topics.cols() != inferred_topics.cols()) {
    fail(ErrorCode::dimension, "match_topics: vocabulary size mismatch");
  }
  if (n_inferred < n_true) {
    fail(ErrorCode::dimension,
         "match_topics: fewer inferred topics than true topics");
  }
  Eigen::MatrixXd cost(n_true, n_inferred);
  for (int a = 0; a < n_true; ++a) {
    for (int b = 0; b < n_inferred; ++b) {
      const double kl =
          kl_divergence(true_topics.row(a).transpose(),
                        inferred_topics.row(b).transpose());
      cost(a, b) = std::isfinite(kl) ? kl : 1e300;
    }
  }
  return min_cost_assignment(cost);
}

double spearman_rho(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::dimension, "spearman_rho: length mismatch");
  }
  if (x.size() < 2) {
    fail(ErrorCode::domain, "spearman_rho: need at least two points");
  }
  return pearson(average_ranks(x), average_ranks(y));
}

double mean_absolute_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    fail(ErrorCode::dimension, "mean_absolute_error: length mismatch");
  }
  if (x.size() == 0) {
    fail(ErrorCode::dimension, "mean_absolute_error: empty input");
  }
  return (x - y).cwiseAbs().mean();
}

Eigen::MatrixXd ClassificationReport::column_normalized_confusion() const {
  Eigen::MatrixXd out = confusion;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double total = out.col(c).sum();
    if (total > 0.0) {
      out.col(c) /= total;
    }
  }
  return out;
}

ClassificationReport classification_report(const std::vector<int>& predictions,
                                           const std::vector<int>& truths,
                                           const std::vector<int>& classes) {
  if (predictions.size() != truths.size()) {
    fail(ErrorCode::dimension, "classification_report: length mismatch");
  }
  std::map<int, int> index;
  for (size_t c = 0; c < classes.size(); ++c) {
    index[classes[c]] = static_cast<int>(c);
  }
  const int n_classes = static_cast<int>(classes.size());
  ClassificationReport rep;
  rep.classes = classes;
  rep.confusion = Eigen::MatrixXd::Zero(n_classes, n_classes);
  for (size_t i = 0; i < predictions.size(); ++i) {
    const auto pred_it = index.find(predictions[i]);
    const auto true_it = index.find(truths[i]);
    if (pred_it == index.end() || true_it == index.end()) {
      fail(ErrorCode::domain, "classification_report: unknown class label");
    }
    rep.confusion(true_it->second, pred_it->second) += 1.0;
  }
  rep.precision.resize(n_classes);
  rep.recall.resize(n_classes);
  rep.f1.resize(n_classes);
  double tp_total = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    const double tp = rep.confusion(c, c);
    const double predicted = rep.confusion.col(c).sum();
    const double actual = rep.confusion.row(c).sum();
    rep.precision[c] = predicted > 0.0 ? tp / predicted : 0.0;
    rep.recall[c] = actual > 0.0 ? tp / actual : 0.0;
    const double pr = rep.precision[c] + rep.recall[c];
    rep.f1[c] = pr > 0.0 ? 2.0 * rep.precision[c] * rep.recall[c] / pr : 0.0;
    tp_total += tp;
  }
  rep.macro_f1 = rep.f1.mean();
  // Single-label multiclass: pooled precision and recall both equal accuracy.
  const double n = static_cast<double>(predictions.size());
  rep.micro_f1 = n > 0.0 ? tp_total / n : 0.0;
  return rep;
}

Eigen::VectorXd posterior_word_counts(const TrainedModel& model,
                                      const Corpus& corpus) {
  // Documents are matched by id so a model trained on a subset can be
  // evaluated against the full corpus files.
  std::map<std::string, int> by_id;
  for (int m = 0; m < corpus.num_docs(); ++m) {
    by_id[corpus.docs[m].id] = m;
  }
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(model.truncation());
  for (size_t m = 0; m < model.docs.size(); ++m) {
    const auto it = by_id.find(model.doc_ids[m]);
    if (it == by_id.end()) {
      fail(ErrorCode::dimension,
           "posterior_word_counts: document '" + model.doc_ids[m] +
               "' not present in the corpus");
    }
    const Document& doc = corpus.docs[it->second];
    if (model.docs[m].gamma.rows() != doc.num_types()) {
      fail(ErrorCode::dimension,
           "posterior_word_counts: responsibilities do not match document " +
               doc.id);
    }
    for (int t = 0; t < doc.num_types(); ++t) {
      counts += doc.counts[t] * model.docs[m].gamma.row(t).transpose();
    }
  }
  return counts;
}

std::pair<std::vector<int>, std::vector<int>> heldout_split(int num_docs,
                                                            double fraction,
                                                            uint64_t seed) {
  if (!(fraction >= 0.0) || fraction >= 1.0) {
    fail(ErrorCode::config, "heldout fraction must be in [0, 1)");
  }
  Rng rng(seed ^ 0x5eedULL);
  std::vector<int> order = shuffled_indices(num_docs, rng);
  const int n_test = static_cast<int>(std::llround(fraction * num_docs));
  std::vector<int> test(order.begin(), order.begin() + n_test);
  std::vector<int> train(order.begin() + n_test, order.end());
  if (train.empty()) {
    fail(ErrorCode::config, "heldout split leaves no training documents");
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

double sign_test_p_value(int wins, int trials) {
  if (trials < 1 || wins < 0 || wins > trials) {
    fail(ErrorCode::domain, "sign_test_p_value: invalid counts");
  }
  long double p = 0.0L;
  for (int k = wins; k <= trials; ++k) {
    const double log_choose = log_gamma(trials + 1.0) -
                              log_gamma(k + 1.0) -
                              log_gamma(trials - k + 1.0);
    p += std::exp(log_choose - trials * std::log(2.0));
  }
  return std::min(1.0, static_cast<double>(p));
}

}  // namespace hdsp
