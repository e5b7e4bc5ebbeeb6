#pragma once

#include <string>

#include "hdsp/corpus.hpp"
#include "hdsp/inference.hpp"
#include "hdsp/synth.hpp"

namespace hdsp {

// Shortest text serialization of a double that parses back bit-exactly.
std::string format_double(double v);

// Strict numeric parsing; the whole token must be consumed.
double parse_double(const std::string& token, const std::string& context);
long parse_long(const std::string& token, const std::string& context);

// Writes via a temp file in the same directory plus rename.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

// Corpus files: one document per line `id<TAB>wordid:count ...`, a one
// token-per-line vocabulary, and labels `id<TAB>name[=value] ...` under a
// `#labels<TAB>name ...` header line (omitted value = 1).
Corpus load_corpus(const std::string& corpus_path,
                   const std::string& vocab_path,
                   const std::string& labels_path);
void write_corpus(const Corpus& corpus, const std::string& corpus_path,
                  const std::string& vocab_path,
                  const std::string& labels_path);

// Versioned structured-text model snapshot: keys in sorted order, doubles at
// 17 significant digits, bit-exact round trip, invariants revalidated on
// load.
void snapshot_save(const TrainedModel& model, const std::string& path);
TrainedModel snapshot_load(const std::string& path);

void write_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

}  // namespace hdsp
