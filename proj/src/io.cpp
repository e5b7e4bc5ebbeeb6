#include "hdsp/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace hdsp {

namespace {

constexpr const char* kSnapshotHeader = "hdsp-snapshot v1";
constexpr const char* kGroundTruthHeader = "hdsp-ground-truth v1";

std::string padded_index(long v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%06ld", v);
  return buf;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) {
    out.push_back(tok);
  }
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    lines.push_back(line);
  }
  return lines;
}

[[noreturn]] void parse_fail(const std::string& path, size_t line_no,
                             const std::string& what) {
  fail(ErrorCode::parse,
       path + ":" + std::to_string(line_no) + ": " + what);
}

// A sorted key/value text document; the canonical form used by snapshots and
// ground-truth files.
class KeyValueWriter {
 public:
  explicit KeyValueWriter(std::string header) : header_(std::move(header)) {}

  void add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void add_double(const std::string& key, double v) { add(key, format_double(v)); }
  void add_long(const std::string& key, long v) { add(key, std::to_string(v)); }
  void add_vector(const std::string& key,
                  const Eigen::Ref<const Eigen::VectorXd>& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ' ';
      s += format_double(v[i]);
    }
    add(key, s);
  }

  std::string str() {
    std::sort(entries_.begin(), entries_.end());
    std::string out = header_;
    out += '\n';
    for (const auto& [key, value] : entries_) {
      out += key;
      if (!value.empty()) {
        out += ' ';
        out += value;
      }
      out += '\n';
    }
    return out;
  }

 private:
  std::string header_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

class KeyValueReader {
 public:
  KeyValueReader(const std::string& path, const std::string& header,
                 ErrorCode missing_code)
      : path_(path) {
    const auto lines = read_lines(path);
    if (lines.empty()) {
      fail(missing_code, path + ": empty file");
    }
    if (lines[0] != header) {
      const std::string name = header.substr(0, header.find(' '));
      if (lines[0].rfind(name, 0) == 0) {
        fail(ErrorCode::version_mismatch,
             path + ": expected '" + header + "', found '" + lines[0] + "'");
      }
      fail(missing_code, path + ": not a '" + header + "' file");
    }
    for (size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const size_t sep = lines[i].find(' ');
      const std::string key = lines[i].substr(0, sep);
      const std::string value =
          sep == std::string::npos ? "" : lines[i].substr(sep + 1);
      if (!entries_.emplace(key, value).second) {
        fail(missing_code, path + ": duplicate key '" + key + "'");
      }
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
      fail(ErrorCode::corrupt_snapshot, path_ + ": missing key '" + key + "'");
    }
    return it->second;
  }

  double get_double(const std::string& key) const {
    return parse_double(get(key), path_ + ": " + key);
  }
  long get_long(const std::string& key) const {
    return parse_long(get(key), path_ + ": " + key);
  }

  Eigen::VectorXd get_vector(const std::string& key, Eigen::Index size) const {
    const auto toks = split_ws(get(key));
    if (static_cast<Eigen::Index>(toks.size()) != size) {
      fail(ErrorCode::corrupt_snapshot,
           path_ + ": key '" + key + "' expected " + std::to_string(size) +
               " values, found " + std::to_string(toks.size()));
    }
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      out[i] = parse_double(toks[i], path_ + ": " + key);
    }
    return out;
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::map<std::string, std::string> entries_;
};

void check_positive_param(const Eigen::Ref<const Eigen::VectorXd>& v,
                          const std::string& path, const std::string& key) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] <= 0.0) {
      fail(ErrorCode::corrupt_snapshot,
           path + ": " + key + "[" + std::to_string(i) +
               "] violates positivity: " + format_double(v[i]));
    }
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& context) {
  if (token.empty()) {
    fail(ErrorCode::parse, context + ": empty numeric field");
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE) {
    fail(ErrorCode::parse, context + ": bad number '" + token + "'");
  }
  return v;
}

long parse_long(const std::string& token, const std::string& context) {
  if (token.empty()) {
    fail(ErrorCode::parse, context + ": empty integer field");
  }
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end != token.c_str() + token.size() || errno == ERANGE) {
    fail(ErrorCode::parse, context + ": bad integer '" + token + "'");
  }
  return v;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      fail(ErrorCode::io, "cannot open '" + tmp + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
      fail(ErrorCode::io, "failed writing '" + tmp + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    fail(ErrorCode::io,
         "failed renaming '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Corpus load_corpus(const std::string& corpus_path,
                   const std::string& vocab_path,
                   const std::string& labels_path) {
  Corpus corpus;
  corpus.vocab = read_lines(vocab_path);
  while (!corpus.vocab.empty() && corpus.vocab.back().empty()) {
    corpus.vocab.pop_back();
  }
  if (corpus.vocab.empty()) {
    fail(ErrorCode::validation, vocab_path + ": empty vocabulary");
  }

  // Label schema comes from the header line of the labels file.
  const auto label_lines = read_lines(labels_path);
  if (label_lines.empty() || label_lines[0].rfind("#labels", 0) != 0) {
    parse_fail(labels_path, 1, "expected '#labels<TAB>name ...' header");
  }
  corpus.label_names = split_ws(label_lines[0].substr(7));
  std::map<std::string, int> label_index;
  for (size_t j = 0; j < corpus.label_names.size(); ++j) {
    if (!label_index.emplace(corpus.label_names[j], static_cast<int>(j))
             .second) {
      parse_fail(labels_path, 1,
                 "duplicate label name '" + corpus.label_names[j] + "'");
    }
  }
  const int J = corpus.num_labels();

  std::map<std::string, Eigen::VectorXd> doc_labels;
  for (size_t ln = 1; ln < label_lines.size(); ++ln) {
    const std::string& line = label_lines[ln];
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    const std::string id = line.substr(0, tab);
    if (id.empty()) {
      parse_fail(labels_path, ln + 1, "missing document id");
    }
    Eigen::VectorXd labels = Eigen::VectorXd::Zero(J);
    if (tab != std::string::npos) {
      for (const std::string& entry : split_ws(line.substr(tab + 1))) {
        const size_t eq = entry.find('=');
        const std::string name = entry.substr(0, eq);
        const auto it = label_index.find(name);
        if (it == label_index.end()) {
          parse_fail(labels_path, ln + 1,
                     "label '" + name + "' not in the schema header");
        }
        const double value =
            eq == std::string::npos
                ? 1.0
                : parse_double(entry.substr(eq + 1),
                               labels_path + ":" + std::to_string(ln + 1));
        labels[it->second] = value;
      }
    }
    if (!doc_labels.emplace(id, std::move(labels)).second) {
      parse_fail(labels_path, ln + 1, "duplicate labels for document '" + id +
                                          "'");
    }
  }

  const auto corpus_lines = read_lines(corpus_path);
  std::vector<std::string> empty_docs;
  std::map<std::string, int> seen_ids;
  for (size_t ln = 0; ln < corpus_lines.size(); ++ln) {
    const std::string& line = corpus_lines[ln];
    if (line.empty()) continue;
    const size_t tab = line.find('\t');
    Document doc;
    doc.id = line.substr(0, tab);
    if (doc.id.empty()) {
      parse_fail(corpus_path, ln + 1, "missing document id");
    }
    if (!seen_ids.emplace(doc.id, 1).second) {
      parse_fail(corpus_path, ln + 1, "duplicate document id '" + doc.id + "'");
    }
    std::map<int, long> counts;
    if (tab != std::string::npos) {
      for (const std::string& pair : split_ws(line.substr(tab + 1))) {
        const size_t colon = pair.find(':');
        if (colon == std::string::npos) {
          parse_fail(corpus_path, ln + 1,
                     "expected 'wordid:count', found '" + pair + "'");
        }
        const std::string ctx = corpus_path + ":" + std::to_string(ln + 1);
        const long word = parse_long(pair.substr(0, colon), ctx);
        const long count = parse_long(pair.substr(colon + 1), ctx);
        if (count < 1) {
          parse_fail(corpus_path, ln + 1,
                     "non-positive count in '" + pair + "'");
        }
        counts[static_cast<int>(word)] += count;
      }
    }
    if (counts.empty()) {
      empty_docs.push_back(doc.id);
      continue;
    }
    for (const auto& [word, count] : counts) {
      doc.word_ids.push_back(word);
      doc.counts.push_back(static_cast<int>(count));
    }
    const auto it = doc_labels.find(doc.id);
    doc.labels = it != doc_labels.end() ? it->second
                                        : Eigen::VectorXd::Zero(J);
    if (it != doc_labels.end()) {
      doc_labels.erase(it);
    }
    corpus.docs.push_back(std::move(doc));
  }
  if (!empty_docs.empty()) {
    std::string ids;
    for (const auto& id : empty_docs) {
      if (!ids.empty()) ids += ", ";
      ids += id;
    }
    fail(ErrorCode::validation,
         corpus_path + ": documents with zero tokens: " + ids);
  }
  if (!doc_labels.empty()) {
    fail(ErrorCode::validation,
         labels_path + ": labels for unknown document '" +
             doc_labels.begin()->first + "'");
  }
  corpus.validate();
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& corpus_path,
                  const std::string& vocab_path,
                  const std::string& labels_path) {
  std::string vocab_text;
  for (const auto& token : corpus.vocab) {
    vocab_text += token;
    vocab_text += '\n';
  }
  write_text_atomic(vocab_path, vocab_text);

  std::string corpus_text;
  for (const auto& doc : corpus.docs) {
    corpus_text += doc.id;
    corpus_text += '\t';
    for (int t = 0; t < doc.num_types(); ++t) {
      if (t) corpus_text += ' ';
      corpus_text += std::to_string(doc.word_ids[t]);
      corpus_text += ':';
      corpus_text += std::to_string(doc.counts[t]);
    }
    corpus_text += '\n';
  }
  write_text_atomic(corpus_path, corpus_text);

  std::string labels_text = "#labels";
  for (size_t j = 0; j < corpus.label_names.size(); ++j) {
    labels_text += j == 0 ? '\t' : ' ';
    labels_text += corpus.label_names[j];
  }
  labels_text += '\n';
  for (const auto& doc : corpus.docs) {
    labels_text += doc.id;
    bool first = true;
    for (Eigen::Index j = 0; j < doc.labels.size(); ++j) {
      if (doc.labels[j] == 0.0) continue;
      labels_text += first ? '\t' : ' ';
      first = false;
      labels_text += corpus.label_names[j];
      if (doc.labels[j] != 1.0) {
        labels_text += '=';
        labels_text += format_double(doc.labels[j]);
      }
    }
    labels_text += '\n';
  }
  write_text_atomic(labels_path, labels_text);
}

void snapshot_save(const TrainedModel& model, const std::string& path) {
  KeyValueWriter w(kSnapshotHeader);
  const int T = model.truncation();
  const int I = model.vocab_size();
  const int J = model.num_labels();
  const long M = static_cast<long>(model.docs.size());

  w.add("meta.scaling", scaling_kind_name(model.kind));
  w.add_long("meta.docs", M);
  w.add_long("meta.vocab", I);
  w.add_long("meta.labels", J);
  w.add_double("hyper.alpha", model.hp.alpha);
  w.add_double("hyper.beta", model.hp.beta);
  w.add_double("hyper.eta", model.hp.eta);
  w.add_double("hyper.a_w", model.hp.a_w);
  w.add_double("hyper.b_w", model.hp.b_w);
  w.add_double("hyper.sigma", model.hp.sigma);
  w.add_long("hyper.truncation", model.hp.truncation);

  w.add_vector("global.V", model.global.V);
  for (int k = 0; k < T; ++k) {
    w.add_vector("global.eta." + padded_index(k),
                 model.global.eta.row(k).transpose());
  }
  if (model.kind == ScalingKind::categorical) {
    for (int k = 0; k < T; ++k) {
      w.add_vector("scaling.a_w." + padded_index(k),
                   model.scaling.cat.a_w.row(k).transpose());
      w.add_vector("scaling.b_w." + padded_index(k),
                   model.scaling.cat.b_w.row(k).transpose());
    }
  } else {
    for (int k = 0; k < T; ++k) {
      w.add_vector("scaling.w." + padded_index(k),
                   model.scaling.lin.w.row(k).transpose());
    }
  }
  for (long m = 0; m < M; ++m) {
    const std::string base = "doc." + padded_index(m) + ".";
    const std::string& id = model.doc_ids[m];
    if (id.empty() || id.find_first_of(" \t\n") != std::string::npos) {
      fail(ErrorCode::io, "snapshot_save: document id '" + id +
                              "' contains whitespace");
    }
    w.add(base + "id", id);
    w.add_long(base + "ntypes", model.docs[m].gamma.rows());
    w.add_vector(base + "a_pi", model.docs[m].a_pi);
    w.add_vector(base + "b_pi", model.docs[m].b_pi);
    w.add_double(base + "xi", model.docs[m].xi);
    for (Eigen::Index t = 0; t < model.docs[m].gamma.rows(); ++t) {
      w.add_vector(base + "gamma." + padded_index(t),
                   model.docs[m].gamma.row(t).transpose());
    }
  }
  if (!model.elbo_trace.empty()) {
    w.add_vector("trace.elbo",
                 Eigen::Map<const Eigen::VectorXd>(
                     model.elbo_trace.data(),
                     static_cast<Eigen::Index>(model.elbo_trace.size())));
  }
  write_text_atomic(path, w.str());
}

TrainedModel snapshot_load(const std::string& path) {
  const KeyValueReader r(path, kSnapshotHeader, ErrorCode::corrupt_snapshot);
  TrainedModel model;
  model.kind = parse_scaling_kind(r.get("meta.scaling"));
  const long M = r.get_long("meta.docs");
  const long I = r.get_long("meta.vocab");
  const long J = r.get_long("meta.labels");
  model.hp.alpha = r.get_double("hyper.alpha");
  model.hp.beta = r.get_double("hyper.beta");
  model.hp.eta = r.get_double("hyper.eta");
  model.hp.a_w = r.get_double("hyper.a_w");
  model.hp.b_w = r.get_double("hyper.b_w");
  model.hp.sigma = r.get_double("hyper.sigma");
  model.hp.truncation = static_cast<int>(r.get_long("hyper.truncation"));
  const int T = model.hp.truncation;
  if (T < 2 || I < 1 || J < 0 || M < 0) {
    fail(ErrorCode::corrupt_snapshot, path + ": inconsistent dimensions");
  }
  try {
    model.hp.validate();
  } catch (const Error& e) {
    fail(ErrorCode::corrupt_snapshot, path + ": " + e.what());
  }

  model.global.V = r.get_vector("global.V", T);
  for (int k = 0; k < T; ++k) {
    const double v = model.global.V[k];
    if (!std::isfinite(v) || v <= 0.0 || v > 1.0) {
      fail(ErrorCode::corrupt_snapshot,
           path + ": global.V[" + std::to_string(k) + "] outside (0, 1]");
    }
  }
  if (model.global.V[T - 1] != 1.0) {
    fail(ErrorCode::corrupt_snapshot, path + ": global.V last entry != 1");
  }
  model.global.refresh_sticks();

  model.global.eta.resize(T, I);
  for (int k = 0; k < T; ++k) {
    const Eigen::VectorXd row = r.get_vector("global.eta." + padded_index(k), I);
    for (long i = 0; i < I; ++i) {
      if (!std::isfinite(row[i]) || row[i] < model.hp.eta - 1e-12) {
        fail(ErrorCode::corrupt_snapshot,
             path + ": global.eta." + padded_index(k) + "[" +
                 std::to_string(i) + "] below the prior value");
      }
    }
    model.global.eta.row(k) = row.transpose();
  }

  model.scaling.kind = model.kind;
  if (model.kind == ScalingKind::categorical) {
    model.scaling.cat.a_w.resize(T, J);
    model.scaling.cat.b_w.resize(T, J);
    for (int k = 0; k < T; ++k) {
      const auto a = r.get_vector("scaling.a_w." + padded_index(k), J);
      const auto b = r.get_vector("scaling.b_w." + padded_index(k), J);
      check_positive_param(a, path, "scaling.a_w." + padded_index(k));
      check_positive_param(b, path, "scaling.b_w." + padded_index(k));
      model.scaling.cat.a_w.row(k) = a.transpose();
      model.scaling.cat.b_w.row(k) = b.transpose();
    }
  } else {
    model.scaling.lin.w.resize(T, J);
    model.scaling.lin.sigma = model.hp.sigma;
    for (int k = 0; k < T; ++k) {
      const auto row = r.get_vector("scaling.w." + padded_index(k), J);
      if (!row.allFinite()) {
        fail(ErrorCode::corrupt_snapshot,
             path + ": scaling.w." + padded_index(k) + " has non-finite entry");
      }
      model.scaling.lin.w.row(k) = row.transpose();
    }
  }

  model.docs.resize(M);
  model.doc_ids.resize(M);
  for (long m = 0; m < M; ++m) {
    const std::string base = "doc." + padded_index(m) + ".";
    model.doc_ids[m] = r.get(base + "id");
    DocState& st = model.docs[m];
    st.a_pi = r.get_vector(base + "a_pi", T);
    st.b_pi = r.get_vector(base + "b_pi", T);
    check_positive_param(st.a_pi, path, base + "a_pi");
    check_positive_param(st.b_pi, path, base + "b_pi");
    st.xi = r.get_double(base + "xi");
    if (!std::isfinite(st.xi) || st.xi <= 0.0) {
      fail(ErrorCode::corrupt_snapshot, path + ": " + base + "xi not positive");
    }
    const long n_types = r.get_long(base + "ntypes");
    if (n_types < 1) {
      fail(ErrorCode::corrupt_snapshot, path + ": " + base + "ntypes < 1");
    }
    st.gamma.resize(n_types, T);
    for (long t = 0; t < n_types; ++t) {
      const std::string key = base + "gamma." + padded_index(t);
      const Eigen::VectorXd row = r.get_vector(key, T);
      double total = 0.0;
      for (int k = 0; k < T; ++k) {
        if (!std::isfinite(row[k]) || row[k] < 0.0) {
          fail(ErrorCode::corrupt_snapshot,
               path + ": " + key + "[" + std::to_string(k) + "] negative");
        }
        total += row[k];
      }
      if (std::abs(total - 1.0) > 1e-12) {
        fail(ErrorCode::corrupt_snapshot,
             path + ": " + key + " does not sum to 1");
      }
      st.gamma.row(t) = row.transpose();
    }
  }

  if (r.has("trace.elbo")) {
    const auto toks = split_ws(r.get("trace.elbo"));
    model.elbo_trace.reserve(toks.size());
    for (const auto& tok : toks) {
      model.elbo_trace.push_back(parse_double(tok, path + ": trace.elbo"));
    }
  }
  return model;
}

void write_ground_truth(const GroundTruth& truth, const std::string& path) {
  KeyValueWriter w(kGroundTruthHeader);
  w.add_double("alpha", truth.alpha);
  w.add_double("beta", truth.beta);
  w.add("kind", scaling_kind_name(truth.kind));
  w.add_long("meta.topics", truth.topics.rows());
  w.add_long("meta.vocab", truth.topics.cols());
  w.add_long("meta.labels", truth.weights.cols());
  for (Eigen::Index k = 0; k < truth.topics.rows(); ++k) {
    w.add_vector("topics." + padded_index(k), truth.topics.row(k).transpose());
    w.add_vector("weights." + padded_index(k),
                 truth.weights.row(k).transpose());
  }
  if (truth.topic_positions.size() > 0) {
    for (Eigen::Index k = 0; k < truth.topic_positions.rows(); ++k) {
      w.add_vector("positions.topic." + padded_index(k),
                   truth.topic_positions.row(k).transpose());
    }
    for (Eigen::Index j = 0; j < truth.label_positions.rows(); ++j) {
      w.add_vector("positions.label." + padded_index(j),
                   truth.label_positions.row(j).transpose());
    }
  }
  write_text_atomic(path, w.str());
}

GroundTruth load_ground_truth(const std::string& path) {
  const KeyValueReader r(path, kGroundTruthHeader, ErrorCode::corrupt_snapshot);
  GroundTruth truth;
  truth.alpha = r.get_double("alpha");
  truth.beta = r.get_double("beta");
  truth.kind = parse_scaling_kind(r.get("kind"));
  const long K = r.get_long("meta.topics");
  const long I = r.get_long("meta.vocab");
  const long J = r.get_long("meta.labels");
  truth.topics.resize(K, I);
  truth.weights.resize(K, J);
  for (long k = 0; k < K; ++k) {
    truth.topics.row(k) = r.get_vector("topics." + padded_index(k), I).transpose();
    truth.weights.row(k) =
        r.get_vector("weights." + padded_index(k), J).transpose();
  }
  if (r.has("positions.topic." + padded_index(0))) {
    truth.topic_positions.resize(K, 3);
    truth.label_positions.resize(J, 3);
    for (long k = 0; k < K; ++k) {
      truth.topic_positions.row(k) =
          r.get_vector("positions.topic." + padded_index(k), 3).transpose();
    }
    for (long j = 0; j < J; ++j) {
      truth.label_positions.row(j) =
          r.get_vector("positions.label." + padded_index(j), 3).transpose();
    }
  }
  return truth;
}

}  // namespace hdsp
