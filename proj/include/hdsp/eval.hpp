#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdsp/corpus.hpp"
#include "hdsp/inference.hpp"

namespace hdsp {

// Expected topic proportions for an unseen document carrying labels r:
// pi_k proportional to beta p_k / E[1/s_k(r)], normalized.
Eigen::VectorXd expected_proportions_given_labels(
    const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& r);

// Variational Dirichlet means phi_ki = eta_ki / sum_i eta_ki.
Eigen::MatrixXd topic_word_means(const TrainedModel& model);

// ln p(x' | r) approximated by prod_n sum_k pi_k phi_k,x_n.
double heldout_log_likelihood(const TrainedModel& model, const Document& doc,
                              const Eigen::Ref<const Eigen::VectorXd>& r);

// exp(-ln p / N), always >= 1.
double heldout_perplexity(const TrainedModel& model, const Document& doc,
                          const Eigen::Ref<const Eigen::VectorXd>& r);

// Perplexity-argmin rating over the grid; base_labels supplies the category
// part while the entry at rating_dim is swept. Ties break toward the lowest
// rating.
double classify_rating(const TrainedModel& model, const Document& doc,
                       const Eigen::Ref<const Eigen::VectorXd>& base_labels,
                       int rating_dim, std::vector<double> rating_grid);

// KL(p || q) over a shared support; q must be strictly positive wherever
// p is.
double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p,
                     const Eigen::Ref<const Eigen::VectorXd>& q);

// Injective assignment of each true topic to an inferred topic minimizing
// total KL(true || inferred), via the Hungarian algorithm.
std::vector<int> match_topics(
    const Eigen::Ref<const Eigen::MatrixXd>& true_topics,
    const Eigen::Ref<const Eigen::MatrixXd>& inferred_topics);

// Spearman rank correlation with average ranks on ties.
double spearman_rho(const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y);

double mean_absolute_error(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y);

struct ClassificationReport {
  std::vector<int> classes;
  Eigen::VectorXd precision;
  Eigen::VectorXd recall;
  Eigen::VectorXd f1;
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  Eigen::MatrixXd confusion;  // rows: true class, cols: predicted class

  Eigen::MatrixXd column_normalized_confusion() const;
};

ClassificationReport classification_report(const std::vector<int>& predictions,
                                           const std::vector<int>& truths,
                                           const std::vector<int>& classes);

// Expected token count per topic: sum_{m,n} gamma_mnk.
Eigen::VectorXd posterior_word_counts(const TrainedModel& model,
                                      const Corpus& corpus);

// Seeded-shuffle split; returns (train, test) index lists, both ascending.
std::pair<std::vector<int>, std::vector<int>> heldout_split(int num_docs,
                                                            double fraction,
                                                            uint64_t seed);

// One-sided sign test: P(X >= wins) for X ~ Binomial(trials, 1/2).
double sign_test_p_value(int wins, int trials);

}  // namespace hdsp
