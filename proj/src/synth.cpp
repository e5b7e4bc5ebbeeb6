#include "hdsp/synth.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "hdsp/model.hpp"
#include "hdsp/rng.hpp"

namespace hdsp {

namespace {

std::string padded_name(const char* prefix, int index, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, index);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::config, "synth: " + what);
}

// Corpus-level sticks: V_k ~ Beta(1, alpha) truncated at K with V_K = 1.
Eigen::VectorXd draw_sticks(int topics, double alpha, Rng& rng) {
  Eigen::VectorXd V(topics);
  for (int k = 0; k + 1 < topics; ++k) {
    V[k] = std::min(std::max(rng.beta(1.0, alpha), 1e-12), 1.0);
  }
  V[topics - 1] = 1.0;
  return stick_breaking(V);
}

// Draws one document body: length, gamma topic weights scaled by the label
// dependent rate, normalization, then words. Returns the normalized topic
// proportions used.
Eigen::VectorXd draw_document(const std::vector<Eigen::VectorXd>& topic_rows,
                              const Eigen::MatrixXd& weights, ScalingKind kind,
                              const Eigen::VectorXd& beta_p,
                              const Eigen::VectorXd& labels,
                              double doc_length_mean, Rng& rng,
                              Document& doc) {
  const int topics = static_cast<int>(beta_p.size());
  int length = 0;
  while (length == 0) {
    length = rng.poisson(doc_length_mean);
  }
  Eigen::VectorXd pi(topics);
  double total = 0.0;
  while (total <= 0.0) {
    for (int k = 0; k < topics; ++k) {
      double rate;
      if (kind == ScalingKind::categorical) {
        rate = 1.0 / scale_categorical(weights.row(k).transpose(), labels);
      } else {
        rate = 1.0 / scale_loglinear(weights.row(k).transpose(), labels);
      }
      pi[k] = rng.gamma(beta_p[k], rate);
    }
    total = pi.sum();
  }
  pi /= total;

  std::map<int, int> counts;
  for (int n = 0; n < length; ++n) {
    const int z = rng.categorical(pi);
    const int word = rng.categorical(topic_rows[z]);
    counts[word] += 1;
  }
  doc.word_ids.clear();
  doc.counts.clear();
  for (const auto& [word, count] : counts) {
    doc.word_ids.push_back(word);
    doc.counts.push_back(count);
  }
  doc.labels = labels;
  return pi;
}

template <typename LabelDraw>
std::pair<Corpus, GroundTruth> generate_corpus(
    const Eigen::MatrixXd& topics_matrix, const Eigen::MatrixXd& weights,
    ScalingKind kind, double alpha, double beta, int docs,
    double doc_length_mean, const std::vector<std::string>& label_names,
    Rng& master, LabelDraw&& draw_labels) {
  const int topics = static_cast<int>(topics_matrix.rows());
  const int vocab = static_cast<int>(topics_matrix.cols());

  GroundTruth truth;
  truth.topics = topics_matrix;
  truth.weights = weights;
  truth.alpha = alpha;
  truth.beta = beta;
  truth.kind = kind;
  truth.doc_proportions.resize(docs, topics);

  const Eigen::VectorXd p = draw_sticks(topics, alpha, master);
  const Eigen::VectorXd beta_p = beta * p;

  std::vector<Eigen::VectorXd> topic_rows(topics);
  for (int k = 0; k < topics; ++k) {
    topic_rows[k] = topics_matrix.row(k).transpose();
  }

  Corpus corpus;
  corpus.label_names = label_names;
  corpus.vocab.reserve(vocab);
  for (int i = 0; i < vocab; ++i) {
    corpus.vocab.push_back(padded_name("w", i, 4));
  }
  corpus.docs.resize(docs);
  for (int m = 0; m < docs; ++m) {
    Rng rng = master.spawn(static_cast<uint64_t>(m));
    Document& doc = corpus.docs[m];
    doc.id = padded_name("d", m, 6);
    const Eigen::VectorXd labels = draw_labels(rng);
    truth.doc_proportions.row(m) =
        draw_document(topic_rows, weights, kind, beta_p, labels,
                      doc_length_mean, rng, doc)
            .transpose();
  }
  corpus.validate();
  return {std::move(corpus), std::move(truth)};
}

// Block-structured row-stochastic topics: term i belongs to the block of
// topic floor(i K / I); block terms share (1 - eps) of the mass.
Eigen::MatrixXd block_topics(int topics, int vocab, double eps) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(topics, vocab, eps / vocab);
  std::vector<int> block_size(topics, 0);
  for (int i = 0; i < vocab; ++i) {
    block_size[static_cast<int>(static_cast<long>(i) * topics / vocab)] += 1;
  }
  for (int i = 0; i < vocab; ++i) {
    const int k = static_cast<int>(static_cast<long>(i) * topics / vocab);
    out(k, i) += (1.0 - eps) / block_size[k];
  }
  return out;
}

}  // namespace

std::pair<Corpus, GroundTruth> generate_fixed(const FixedSynthConfig& config,
                                              uint64_t seed) {
  require(config.topics >= 1, "topics must be >= 1");
  require(config.vocab >= 2, "vocab must be >= 2");
  require(config.vocab >= config.topics, "vocab must be >= topics");
  require(config.labels >= 0, "labels must be >= 0");
  require(config.docs >= 1, "docs must be >= 1");
  require(config.doc_length_mean > 0.0, "doc_length_mean must be > 0");
  require(config.label_rate >= 0.0 && config.label_rate <= 1.0,
          "label_rate must be in [0, 1]");
  require(config.alpha > 0.0 && config.beta > 0.0,
          "alpha and beta must be > 0");

  const Eigen::MatrixXd topics = block_topics(config.topics, config.vocab, 0.15);
  // Each label boosts the topics it is aligned with; the 3.0 / 0.5 contrast
  // keeps documents' label sets clearly informative about their topic mix.
  Eigen::MatrixXd weights(config.topics, config.labels);
  for (int k = 0; k < config.topics; ++k) {
    for (int j = 0; j < config.labels; ++j) {
      weights(k, j) = (k % std::max(config.labels, 1) == j) ? 3.0 : 0.5;
    }
  }

  std::vector<std::string> label_names;
  for (int j = 0; j < config.labels; ++j) {
    label_names.push_back(padded_name("label", j, 1));
  }

  Rng master(seed);
  const int labels = config.labels;
  const double rate = config.label_rate;
  return generate_corpus(topics, weights, ScalingKind::categorical,
                         config.alpha, config.beta, config.docs,
                         config.doc_length_mean, label_names, master,
                         [labels, rate](Rng& rng) {
                           Eigen::VectorXd r(labels);
                           for (int j = 0; j < labels; ++j) {
                             r[j] = rng.bernoulli(rate) ? 1.0 : 0.0;
                           }
                           return r;
                         });
}

std::pair<Corpus, GroundTruth> generate_geometric(
    const GeometricSynthConfig& config, uint64_t seed) {
  require(config.topics >= 1, "topics must be >= 1");
  require(config.vocab >= 2, "vocab must be >= 2");
  require(config.labels >= 1, "labels must be >= 1");
  require(config.docs >= 1, "docs must be >= 1");
  require(config.doc_length_mean > 0.0, "doc_length_mean must be > 0");
  require(config.label_rate >= 0.0 && config.label_rate <= 1.0,
          "label_rate must be in [0, 1]");
  require(config.alpha > 0.0 && config.beta > 0.0,
          "alpha and beta must be > 0");
  require(config.side > 0.0, "cube side must be > 0");
  require(config.topic_concentration > 0.0,
          "topic_concentration must be > 0");

  Rng master(seed);
  Eigen::MatrixXd topics(config.topics, config.vocab);
  const Eigen::VectorXd conc =
      Eigen::VectorXd::Constant(config.vocab, config.topic_concentration);
  for (int k = 0; k < config.topics; ++k) {
    topics.row(k) = master.dirichlet(conc).transpose();
  }

  Eigen::MatrixXd topic_pos(config.topics, 3), label_pos(config.labels, 3);
  for (int k = 0; k < config.topics; ++k) {
    for (int d = 0; d < 3; ++d) {
      topic_pos(k, d) = config.side * master.uniform();
    }
  }
  for (int j = 0; j < config.labels; ++j) {
    for (int d = 0; d < 3; ++d) {
      label_pos(j, d) = config.side * master.uniform();
    }
  }
  Eigen::MatrixXd weights(config.topics, config.labels);
  for (int k = 0; k < config.topics; ++k) {
    for (int j = 0; j < config.labels; ++j) {
      weights(k, j) =
          std::max((topic_pos.row(k) - label_pos.row(j)).norm(), 1e-6);
    }
  }

  std::vector<std::string> label_names;
  for (int j = 0; j < config.labels; ++j) {
    label_names.push_back(padded_name("label", j, 1));
  }

  const int labels = config.labels;
  const double rate = config.label_rate;
  auto result = generate_corpus(topics, weights, ScalingKind::categorical,
                                config.alpha, config.beta, config.docs,
                                config.doc_length_mean, label_names, master,
                                [labels, rate](Rng& rng) {
                                  Eigen::VectorXd r(labels);
                                  for (int j = 0; j < labels; ++j) {
                                    r[j] = rng.bernoulli(rate) ? 1.0 : 0.0;
                                  }
                                  return r;
                                });
  result.second.topic_positions = topic_pos;
  result.second.label_positions = label_pos;
  return result;
}

std::pair<Corpus, GroundTruth> generate_mixed(const MixedSynthConfig& config,
                                              uint64_t seed) {
  require(config.categories >= 1, "categories must be >= 1");
  require(config.topics_per_category >= 2, "need >= 2 topics per category");
  require(config.terms_per_topic >= 1, "terms_per_topic must be >= 1");
  require(config.docs >= 1, "docs must be >= 1");
  require(config.doc_length_mean > 0.0, "doc_length_mean must be > 0");
  require(config.num_ratings >= 2, "num_ratings must be >= 2");
  require(config.alpha > 0.0 && config.beta > 0.0,
          "alpha and beta must be > 0");

  const int topics = config.categories * config.topics_per_category;
  const int vocab = topics * config.terms_per_topic;
  const int labels = 1 + config.categories;  // rating first, then categories

  const Eigen::MatrixXd topic_words = block_topics(topics, vocab, 0.1);

  // Planted weights: within a category the first topic rises at low ratings
  // and the last at high ratings (the gamma rate is exp(w . r), so negative
  // rating weight means more mass at high ratings). Topics are suppressed
  // under other categories.
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(topics, labels);
  for (int k = 0; k < topics; ++k) {
    const int category = k / config.topics_per_category;
    const int slot = k % config.topics_per_category;
    const double frac =
        config.topics_per_category > 1
            ? static_cast<double>(slot) / (config.topics_per_category - 1)
            : 0.5;
    weights(k, 0) = config.rating_weight * (1.0 - 2.0 * frac);
    for (int c = 0; c < config.categories; ++c) {
      weights(k, 1 + c) = (c == category) ? 0.0 : config.category_weight;
    }
  }

  std::vector<std::string> label_names;
  label_names.push_back("rating");
  for (int c = 0; c < config.categories; ++c) {
    label_names.push_back(padded_name("cat", c, 1));
  }

  Rng master(seed);
  const int categories = config.categories;
  const int num_ratings = config.num_ratings;
  return generate_corpus(
      topic_words, weights, ScalingKind::loglinear, config.alpha, config.beta,
      config.docs, config.doc_length_mean, label_names, master,
      [categories, num_ratings, labels](Rng& rng) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(labels);
        r[0] = 1.0 + static_cast<double>(rng.uniform_int(num_ratings));
        r[1 + static_cast<int>(rng.uniform_int(categories))] = 1.0;
        return r;
      });
}

}  // namespace hdsp
