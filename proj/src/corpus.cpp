#include "hdsp/corpus.hpp"

#include <cmath>
#include <string>

namespace hdsp {

long Document::total_tokens() const {
  long n = 0;
  for (int c : counts) {
    n += c;
  }
  return n;
}

long Corpus::total_tokens() const {
  long n = 0;
  for (const auto& d : docs) {
    n += d.total_tokens();
  }
  return n;
}

void Corpus::validate() const {
  const int I = vocab_size();
  const int J = num_labels();
  if (I < 1) {
    fail(ErrorCode::validation, "corpus: empty vocabulary");
  }
  for (const auto& doc : docs) {
    if (doc.word_ids.size() != doc.counts.size()) {
      fail(ErrorCode::validation,
           "doc '" + doc.id + "': word/count length mismatch");
    }
    if (doc.word_ids.empty()) {
      fail(ErrorCode::validation, "doc '" + doc.id + "': no word tokens");
    }
    int prev = -1;
    for (size_t t = 0; t < doc.word_ids.size(); ++t) {
      const int w = doc.word_ids[t];
      if (w < 0 || w >= I) {
        fail(ErrorCode::validation, "doc '" + doc.id + "': word id " +
                                        std::to_string(w) + " outside [0, " +
                                        std::to_string(I) + ")");
      }
      if (w <= prev) {
        fail(ErrorCode::validation,
             "doc '" + doc.id + "': word ids not distinct ascending");
      }
      prev = w;
      if (doc.counts[t] < 1) {
        fail(ErrorCode::validation,
             "doc '" + doc.id + "': non-positive token count");
      }
    }
    if (doc.labels.size() != J) {
      fail(ErrorCode::validation,
           "doc '" + doc.id + "': label vector length " +
               std::to_string(doc.labels.size()) + " != " + std::to_string(J));
    }
    if (J > 0 && !doc.labels.allFinite()) {
      fail(ErrorCode::validation, "doc '" + doc.id + "': non-finite label");
    }
  }
}

void Corpus::validate_binary_labels() const {
  for (const auto& doc : docs) {
    for (Eigen::Index j = 0; j < doc.labels.size(); ++j) {
      const double v = doc.labels[j];
      if (v != 0.0 && v != 1.0) {
        fail(ErrorCode::validation,
             "doc '" + doc.id + "': label '" + label_names[j] + "' value " +
                 std::to_string(v) + " is not binary");
      }
    }
  }
}

Corpus subset(const Corpus& corpus, const std::vector<int>& doc_indices) {
  Corpus out;
  out.vocab = corpus.vocab;
  out.label_names = corpus.label_names;
  out.docs.reserve(doc_indices.size());
  for (int i : doc_indices) {
    if (i < 0 || i >= corpus.num_docs()) {
      fail(ErrorCode::dimension, "subset: document index out of range");
    }
    out.docs.push_back(corpus.docs[i]);
  }
  return out;
}

}  // namespace hdsp
