#pragma once

#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "hdsp/corpus.hpp"
#include "hdsp/scaling.hpp"

namespace hdsp {

// 5-topics-over-10-terms experiment: block structured topics, categorical
// scaling weights, Poisson document lengths, Bernoulli binary labels.
struct FixedSynthConfig {
  int topics = 5;
  int vocab = 10;
  int labels = 4;
  int docs = 500;
  double doc_length_mean = 20.0;
  double label_rate = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
};

// Topics drawn from Dirichlet(0.1); topic and label positions uniform in a
// cube of side `side`, with the Euclidean distance as the scaling weight.
struct GeometricSynthConfig {
  int topics = 10;
  int vocab = 20;
  int labels = 4;
  int docs = 1000;
  double doc_length_mean = 20.0;
  double label_rate = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
  double side = 1.0;
  double topic_concentration = 0.1;
};

// Mixed-type corpus for the log-linear scaling: one numerical rating label in
// {1..5} plus one-hot categories, with planted rating-dependent topics.
struct MixedSynthConfig {
  int categories = 3;
  int topics_per_category = 2;  // one low-rating and one high-rating topic
  int terms_per_topic = 5;
  int docs = 1200;
  double doc_length_mean = 30.0;
  double alpha = 1.0;
  double beta = 1.0;
  int num_ratings = 5;
  double rating_weight = 0.5;    // magnitude of the planted rating effect
  double category_weight = 2.0;  // suppression of off-category topics
};

struct GroundTruth {
  Eigen::MatrixXd topics;           // K x I, row-stochastic
  Eigen::MatrixXd weights;          // K x J scaling parameters
  Eigen::MatrixXd doc_proportions;  // M x K normalized pi per document
  double alpha = 1.0;
  double beta = 1.0;
  ScalingKind kind = ScalingKind::categorical;
  Eigen::MatrixXd topic_positions;  // geometric generator only (K x 3)
  Eigen::MatrixXd label_positions;  // geometric generator only (J x 3)
};

std::pair<Corpus, GroundTruth> generate_fixed(const FixedSynthConfig& config,
                                              uint64_t seed);

std::pair<Corpus, GroundTruth> generate_geometric(
    const GeometricSynthConfig& config, uint64_t seed);

std::pair<Corpus, GroundTruth> generate_mixed(const MixedSynthConfig& config,
                                              uint64_t seed);

}  // namespace hdsp
