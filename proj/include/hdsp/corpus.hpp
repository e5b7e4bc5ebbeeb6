#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdsp/errors.hpp"

namespace hdsp {

// Sparse bag-of-words document. Word ids are distinct and ascending; repeated
// tokens are carried by `counts`.
struct Document {
  std::string id;
  std::vector<int> word_ids;
  std::vector<int> counts;
  Eigen::VectorXd labels;  // length J; binary for the categorical scaling

  int num_types() const { return static_cast<int>(word_ids.size()); }
  long total_tokens() const;
};

struct Corpus {
  std::vector<Document> docs;
  std::vector<std::string> vocab;
  std::vector<std::string> label_names;

  int num_docs() const { return static_cast<int>(docs.size()); }
  int vocab_size() const { return static_cast<int>(vocab.size()); }
  int num_labels() const { return static_cast<int>(label_names.size()); }
  long total_tokens() const;

  // Checks every corpus invariant (word ids in range, positive counts,
  // non-empty documents, label vector lengths). Throws validation_error.
  void validate() const;

  // Additionally requires every label value to be 0 or 1 (categorical
  // scaling precondition).
  void validate_binary_labels() const;
};

// Sub-corpus over the given document indices, in the given order.
Corpus subset(const Corpus& corpus, const std::vector<int>& doc_indices);

}  // namespace hdsp
