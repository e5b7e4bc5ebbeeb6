#include "hdsp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hdsp/eval.hpp"
#include "hdsp/io.hpp"

namespace hdsp::cli {

namespace {

namespace fs = std::filesystem;

struct CorpusPaths {
  std::string corpus, vocab, labels;
};

struct RunConfig {
  FitConfig fit;
  std::string scaling_name = "categorical";
  double heldout_fraction = 0.0;
  std::string out_dir = ".";
  CorpusPaths paths;
  std::string model_path;
};

void add_hyper_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--scaling", cfg.scaling_name,
                  "scaling function (categorical | loglinear)");
  cmd->add_option("--truncation", cfg.fit.hp.truncation, "truncation level T");
  cmd->add_option("--alpha", cfg.fit.hp.alpha, "corpus concentration");
  cmd->add_option("--beta", cfg.fit.hp.beta, "document concentration");
  cmd->add_option("--eta", cfg.fit.hp.eta,
                  "topic Dirichlet (presets 0.1 0.25 0.5 0.75 1.0)");
  cmd->add_option("--a-w", cfg.fit.hp.a_w, "inverse-gamma prior shape");
  cmd->add_option("--b-w", cfg.fit.hp.b_w, "inverse-gamma prior scale");
  cmd->add_option("--sigma", cfg.fit.hp.sigma, "normal prior variance");
  cmd->add_option("--tol", cfg.fit.tol, "fractional ELBO change tolerance");
  cmd->add_option("--max-iters", cfg.fit.max_iters, "maximum sweeps");
  cmd->add_option("--threads", cfg.fit.threads,
                  "document-phase threads (0 = auto, capped by HDSP_THREADS)");
}

void add_corpus_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--corpus", cfg.paths.corpus, "corpus file")->required();
  cmd->add_option("--vocab", cfg.paths.vocab, "vocabulary file")->required();
  cmd->add_option("--labels", cfg.paths.labels, "labels file")->required();
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    fail(ErrorCode::io, "cannot create out dir '" + cfg.out_dir +
                            "': " + ec.message());
  }
}

// ---- generate ----

struct GenerateArgs {
  std::string kind = "fixed";
  uint64_t seed = 1;
  std::string out_dir = ".";
  int docs = -1, topics = -1, vocab = -1, labels = -1;
  double doc_length = -1.0, label_rate = -1.0;
  double alpha = 1.0, beta = 1.0;
  double side = 1.0;
  int categories = 3, ratings = 5;
};

int run_generate(const GenerateArgs& args) {
  Corpus corpus;
  GroundTruth truth;
  if (args.kind == "fixed") {
    FixedSynthConfig cfg;
    if (args.docs > 0) cfg.docs = args.docs;
    if (args.topics > 0) cfg.topics = args.topics;
    if (args.vocab > 0) cfg.vocab = args.vocab;
    if (args.labels >= 0) cfg.labels = args.labels;
    if (args.doc_length > 0) cfg.doc_length_mean = args.doc_length;
    if (args.label_rate >= 0) cfg.label_rate = args.label_rate;
    cfg.alpha = args.alpha;
    cfg.beta = args.beta;
    std::tie(corpus, truth) = generate_fixed(cfg, args.seed);
  } else if (args.kind == "geometric") {
    GeometricSynthConfig cfg;
    if (args.docs > 0) cfg.docs = args.docs;
    if (args.topics > 0) cfg.topics = args.topics;
    if (args.vocab > 0) cfg.vocab = args.vocab;
    if (args.labels > 0) cfg.labels = args.labels;
    if (args.doc_length > 0) cfg.doc_length_mean = args.doc_length;
    if (args.label_rate >= 0) cfg.label_rate = args.label_rate;
    cfg.alpha = args.alpha;
    cfg.beta = args.beta;
    cfg.side = args.side;
    std::tie(corpus, truth) = generate_geometric(cfg, args.seed);
  } else if (args.kind == "mixed") {
    MixedSynthConfig cfg;
    if (args.docs > 0) cfg.docs = args.docs;
    if (args.doc_length > 0) cfg.doc_length_mean = args.doc_length;
    cfg.categories = args.categories;
    cfg.num_ratings = args.ratings;
    cfg.alpha = args.alpha;
    cfg.beta = args.beta;
    std::tie(corpus, truth) = generate_mixed(cfg, args.seed);
  } else {
    fail(ErrorCode::config, "unknown generator kind '" + args.kind + "'");
  }

  RunConfig cfg;
  cfg.out_dir = args.out_dir;
  ensure_out_dir(cfg);
  write_corpus(corpus, out_path(cfg, "corpus.tsv"), out_path(cfg, "vocab.txt"),
               out_path(cfg, "labels.tsv"));
  write_ground_truth(truth, out_path(cfg, "ground_truth.txt"));
  std::cout << "generated " << corpus.num_docs() << " documents, vocab "
            << corpus.vocab_size() << ", labels " << corpus.num_labels()
            << " -> " << cfg.out_dir << "\n";
  return 0;
}

// ---- train ----

int run_train(RunConfig& cfg, uint64_t seed) {
  cfg.fit.scaling = parse_scaling_kind(cfg.scaling_name);
  cfg.fit.seed = seed;
  Corpus corpus =
      load_corpus(cfg.paths.corpus, cfg.paths.vocab, cfg.paths.labels);
  if (cfg.heldout_fraction > 0.0) {
    const auto [train_idx, test_idx] =
        heldout_split(corpus.num_docs(), cfg.heldout_fraction, seed);
    corpus = subset(corpus, train_idx);
  }
  const TrainedModel model = fit(corpus, cfg.fit);

  ensure_out_dir(cfg);
  snapshot_save(model, out_path(cfg, "model.snapshot"));
  std::string trace = "iteration,elbo\n";
  for (size_t i = 0; i < model.elbo_trace.size(); ++i) {
    trace += std::to_string(i) + "," + format_double(model.elbo_trace[i]) +
             "\n";
  }
  write_text_atomic(out_path(cfg, "elbo_trace.csv"), trace);
  std::cout << "trained on " << corpus.num_docs() << " documents, "
            << model.elbo_trace.size() - 1 << " sweeps, final ELBO "
            << format_double(model.elbo_trace.back()) << "\n";
  return 0;
}

// ---- evaluate ----

int run_evaluate(RunConfig& cfg, uint64_t seed) {
  const Corpus corpus =
      load_corpus(cfg.paths.corpus, cfg.paths.vocab, cfg.paths.labels);
  const TrainedModel model = snapshot_load(cfg.model_path);
  std::vector<int> test_idx;
  if (cfg.heldout_fraction > 0.0) {
    test_idx = heldout_split(corpus.num_docs(), cfg.heldout_fraction, seed)
                   .second;
  } else {
    test_idx.resize(corpus.num_docs());
    for (int m = 0; m < corpus.num_docs(); ++m) test_idx[m] = m;
  }
  if (test_idx.empty()) {
    fail(ErrorCode::config, "evaluate: empty test split");
  }

  std::string csv = "doc_id,tokens,log_likelihood,perplexity\n";
  long double mean_acc = 0.0L;
  for (int m : test_idx) {
    const Document& doc = corpus.docs[m];
    const double log_p = heldout_log_likelihood(model, doc, doc.labels);
    const double ppl =
        std::exp(-log_p / static_cast<double>(doc.total_tokens()));
    mean_acc += ppl;
    csv += doc.id + "," + std::to_string(doc.total_tokens()) + "," +
           format_double(log_p) + "," + format_double(ppl) + "\n";
  }
  const double mean_ppl =
      static_cast<double>(mean_acc) / static_cast<double>(test_idx.size());
  csv += "MEAN," + std::to_string(test_idx.size()) + ",," +
         format_double(mean_ppl) + "\n";
  ensure_out_dir(cfg);
  write_text_atomic(out_path(cfg, "perplexity.csv"), csv);
  std::cout << "evaluated " << test_idx.size()
            << " held-out documents, mean perplexity "
            << format_double(mean_ppl) << "\n";
  return 0;
}

// ---- classify ----

int run_classify(RunConfig& cfg, uint64_t seed, const std::string& rating_label,
                 const std::string& grid_spec) {
  const Corpus corpus =
      load_corpus(cfg.paths.corpus, cfg.paths.vocab, cfg.paths.labels);
  const TrainedModel model = snapshot_load(cfg.model_path);

  int rating_dim = -1;
  for (int j = 0; j < corpus.num_labels(); ++j) {
    if (corpus.label_names[j] == rating_label) rating_dim = j;
  }
  if (rating_dim < 0) {
    fail(ErrorCode::config,
         "rating label '" + rating_label + "' not in the label schema");
  }
  std::vector<double> grid;
  std::stringstream ss(grid_spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) grid.push_back(parse_double(tok, "--rating-grid"));
  }
  if (grid.empty()) {
    fail(ErrorCode::config, "classify: empty rating grid");
  }

  std::vector<int> test_idx;
  if (cfg.heldout_fraction > 0.0) {
    test_idx = heldout_split(corpus.num_docs(), cfg.heldout_fraction, seed)
                   .second;
  } else {
    test_idx.resize(corpus.num_docs());
    for (int m = 0; m < corpus.num_docs(); ++m) test_idx[m] = m;
  }
  if (test_idx.empty()) {
    fail(ErrorCode::config, "classify: empty test split");
  }

  std::vector<int> classes;
  for (double g : grid) {
    classes.push_back(static_cast<int>(std::llround(g)));
  }
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  std::vector<int> predictions, truths;
  std::string pred_csv = "doc_id,true_rating,predicted_rating\n";
  for (int m : test_idx) {
    const Document& doc = corpus.docs[m];
    const double predicted =
        classify_rating(model, doc, doc.labels, rating_dim, grid);
    predictions.push_back(static_cast<int>(std::llround(predicted)));
    truths.push_back(static_cast<int>(std::llround(doc.labels[rating_dim])));
    pred_csv += doc.id + "," + std::to_string(truths.back()) + "," +
                std::to_string(predictions.back()) + "\n";
  }
  const ClassificationReport report =
      classification_report(predictions, truths, classes);

  std::string report_csv = "class,precision,recall,f1\n";
  for (size_t c = 0; c < report.classes.size(); ++c) {
    report_csv += std::to_string(report.classes[c]) + "," +
                  format_double(report.precision[c]) + "," +
                  format_double(report.recall[c]) + "," +
                  format_double(report.f1[c]) + "\n";
  }
  report_csv += "macro,,," + format_double(report.macro_f1) + "\n";
  report_csv += "micro,,," + format_double(report.micro_f1) + "\n";

  std::string conf_csv = "true\\predicted";
  for (int c : report.classes) conf_csv += "," + std::to_string(c);
  conf_csv += "\n";
  for (size_t a = 0; a < report.classes.size(); ++a) {
    conf_csv += std::to_string(report.classes[a]);
    for (size_t b = 0; b < report.classes.size(); ++b) {
      conf_csv += "," + format_double(report.confusion(a, b));
    }
    conf_csv += "\n";
  }

  ensure_out_dir(cfg);
  write_text_atomic(out_path(cfg, "predictions.csv"), pred_csv);
  write_text_atomic(out_path(cfg, "classification_report.csv"), report_csv);
  write_text_atomic(out_path(cfg, "confusion_matrix.csv"), conf_csv);
  std::cout << "classified " << test_idx.size() << " documents, macro F1 "
            << format_double(report.macro_f1) << ", micro F1 "
            << format_double(report.micro_f1) << "\n";
  return 0;
}

// ---- export ----

int run_export(RunConfig& cfg) {
  const TrainedModel model = snapshot_load(cfg.model_path);
  ensure_out_dir(cfg);

  std::string weights_csv = "topic";
  const int J = model.num_labels();
  for (int j = 0; j < J; ++j) weights_csv += ",label" + std::to_string(j);
  weights_csv += "\n";
  for (int k = 0; k < model.truncation(); ++k) {
    weights_csv += std::to_string(k);
    for (int j = 0; j < J; ++j) {
      double value;
      if (model.kind == ScalingKind::categorical) {
        value = inv_gamma_point(model.scaling.cat.a_w(k, j),
                                model.scaling.cat.b_w(k, j));
      } else {
        value = model.scaling.lin.w(k, j);
      }
      weights_csv += "," + format_double(value);
    }
    weights_csv += "\n";
  }
  write_text_atomic(out_path(cfg, "weights.csv"), weights_csv);

  if (!cfg.paths.corpus.empty()) {
    const Corpus corpus =
        load_corpus(cfg.paths.corpus, cfg.paths.vocab, cfg.paths.labels);
    const Eigen::VectorXd counts = posterior_word_counts(model, corpus);
    std::string counts_csv = "topic,expected_tokens\n";
    for (int k = 0; k < model.truncation(); ++k) {
      counts_csv += std::to_string(k) + "," + format_double(counts[k]) + "\n";
    }
    write_text_atomic(out_path(cfg, "posterior_word_counts.csv"), counts_csv);
  }
  std::cout << "exported model tables -> " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("hdsp");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Hierarchical Dirichlet scaling process topic model"};
  app.require_subcommand(1);

  GenerateArgs gen;
  RunConfig cfg;
  uint64_t seed = 1;
  std::string rating_label = "rating";
  std::string rating_grid = "1,2,3,4,5";

  CLI::App* generate = app.add_subcommand("generate", "sample a synthetic corpus");
  generate->add_option("--kind", gen.kind, "fixed | geometric | mixed");
  generate->add_option("--seed", gen.seed, "random seed");
  generate->add_option("--out-dir", gen.out_dir, "output directory");
  generate->add_option("--docs", gen.docs, "number of documents");
  generate->add_option("--topics", gen.topics, "number of topics");
  generate->add_option("--vocab", gen.vocab, "vocabulary size");
  generate->add_option("--labels", gen.labels, "number of labels");
  generate->add_option("--doc-length", gen.doc_length, "mean document length");
  generate->add_option("--label-rate", gen.label_rate, "Bernoulli label rate");
  generate->add_option("--alpha", gen.alpha, "corpus concentration");
  generate->add_option("--beta", gen.beta, "document concentration");
  generate->add_option("--side", gen.side, "cube side (geometric)");
  generate->add_option("--categories", gen.categories, "categories (mixed)");
  generate->add_option("--ratings", gen.ratings, "rating levels (mixed)");

  CLI::App* train = app.add_subcommand("train", "fit the model");
  add_corpus_flags(train, cfg);
  add_hyper_flags(train, cfg);
  train->add_option("--seed", seed, "random seed");
  train->add_option("--heldout-fraction", cfg.heldout_fraction,
                    "test fraction excluded from training");
  train->add_option("--out-dir", cfg.out_dir, "output directory");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "held-out perplexity given labels");
  add_corpus_flags(evaluate, cfg);
  evaluate->add_option("--model", cfg.model_path, "model snapshot")->required();
  evaluate->add_option("--seed", seed, "split seed (must match train)");
  evaluate->add_option("--heldout-fraction", cfg.heldout_fraction,
                       "test fraction (0 evaluates every document)")
      ->default_val(0.2);
  evaluate->add_option("--out-dir", cfg.out_dir, "output directory");

  CLI::App* classify =
      app.add_subcommand("classify", "perplexity-argmin rating classification");
  add_corpus_flags(classify, cfg);
  classify->add_option("--model", cfg.model_path, "model snapshot")->required();
  classify->add_option("--seed", seed, "split seed (must match train)");
  classify->add_option("--heldout-fraction", cfg.heldout_fraction,
                       "test fraction (0 classifies every document)")
      ->default_val(0.2);
  classify->add_option("--rating-label", rating_label, "rating label name");
  classify->add_option("--rating-grid", rating_grid, "comma-separated grid");
  classify->add_option("--out-dir", cfg.out_dir, "output directory");

  CLI::App* exp = app.add_subcommand("export", "weight and count tables");
  exp->add_option("--model", cfg.model_path, "model snapshot")->required();
  exp->add_option("--corpus", cfg.paths.corpus, "corpus file (for counts)");
  exp->add_option("--vocab", cfg.paths.vocab, "vocabulary file");
  exp->add_option("--labels", cfg.paths.labels, "labels file");
  exp->add_option("--out-dir", cfg.out_dir, "output directory");

  try {
    app.parse(argc, argv);
    if (generate->parsed()) return run_generate(gen);
    if (train->parsed()) return run_train(cfg, seed);
    if (evaluate->parsed()) return run_evaluate(cfg, seed);
    if (classify->parsed()) return run_classify(cfg, seed, rating_label, rating_grid);
    if (exp->parsed()) return run_export(cfg);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help and friends
    }
    std::cerr << "error:config_error:" << e.what() << "\n";
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  } catch (const Error& e) {
    std::cerr << "error:" << e.code_name() << ":" << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error:internal_error:" << e.what() << "\n";
    return 1;
  }
}

}  // namespace hdsp::cli
