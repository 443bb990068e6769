// Command-line front end: ingest, train, score, eval, rank-words.
// Every artifact embeds the effective configuration and is written
// atomically (tmp file + rename), so a nonzero exit leaves no partial
// output behind.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contro/analysis.hpp"
#include "contro/concepts.hpp"
#include "contro/corpus.hpp"
#include "contro/embedding.hpp"
#include "contro/evaluation.hpp"
#include "contro/io.hpp"
#include "contro/nb_estimator.hpp"
#include "contro/nn_estimator.hpp"

namespace {

using namespace contro;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found: " + path);
  return in;
}

/// Writes to `path + ".tmp"` and renames on commit; the temporary is
/// removed if the writer is destroyed uncommitted.
class AtomicFile {
 public:
  explicit AtomicFile(std::string path)
      : path_(std::move(path)), tmp_(path_ + ".tmp"), out_(tmp_, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write file: " + tmp_);
  }

  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed: " + tmp_);
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

ConceptSet load_concepts(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_concepts(in, path);
}

ContextMap load_contexts(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_contexts_file(in, path).contexts;
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in = open_input(path);
  return EmbeddingTable::load(in, path);
}

EstimatorKind parse_estimator(const std::string& name) {
  try {
    return estimator_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct IngestArgs {
  std::string corpus, concepts, out;
  int min_len = 10;
  int max_len = 70;
  std::uint64_t seed = 0;
  std::uint64_t max_contexts = 0;  // 0 = unlimited
  std::string mask_token = std::string(kDefaultMaskToken);
};

ContextMap extract_from_corpus(const std::string& corpus_path,
                               const ConceptSet& concepts,
                               const ExtractOptions& options,
                               ExtractStats* stats) {
  std::ifstream in = open_input(corpus_path);
  std::vector<RawSentence> sentences = parse_corpus(in, corpus_path);
  return extract_contexts(sentences, concepts, options, stats);
}

int cmd_ingest(const IngestArgs& args) {
  ConceptSet concepts = load_concepts(args.concepts);
  ExtractOptions options;
  options.min_len = args.min_len;
  options.max_len = args.max_len;
  options.seed = args.seed;
  options.mask_token = args.mask_token;
  if (args.max_contexts > 0) options.per_concept_cap = args.max_contexts;
  ExtractStats stats;
  ContextMap contexts =
      extract_from_corpus(args.corpus, concepts, options, &stats);

  ContextsFile file;
  file.mask_token = args.mask_token;
  file.min_len = args.min_len;
  file.max_len = args.max_len;
  file.config.emplace_back("corpus", args.corpus);
  file.config.emplace_back("concepts", args.concepts);
  file.config.emplace_back("seed", std::to_string(args.seed));
  file.config.emplace_back("max_contexts", std::to_string(args.max_contexts));
  file.contexts = contexts;

  AtomicFile out(args.out);
  write_contexts_file(out.stream(), file);
  out.commit();

  std::cout << "kept=" << stats.kept << " dropped_length=" << stats.dropped_length
            << " dropped_residual_mention=" << stats.dropped_residual_mention
            << " sampled_out=" << stats.sampled_out << "\n";
  std::vector<std::string> empty_ids;
  for (const auto& [id, ctxs] : contexts) {
    std::cout << id << "\t" << ctxs.size() << "\n";
    if (ctxs.empty()) empty_ids.push_back(id);
  }
  if (!empty_ids.empty()) {
    std::cout << "warnings:\n";
    for (const std::string& id : empty_ids)
      std::cout << "  no contexts: " << id << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string contexts, concepts, embeddings, estimator = "nb", out;
  double alpha = 1.0;
  double radius = 0.3;
  std::string mask_token = std::string(kDefaultMaskToken);
};

int cmd_train(const TrainArgs& args) {
  const EstimatorKind kind = parse_estimator(args.estimator);
  ConceptSet concepts = load_concepts(args.concepts);

  ConfigEcho echo;
  echo.emplace_back("concepts", args.concepts);
  echo.emplace_back("estimator", args.estimator);

  if (kind == EstimatorKind::nb) {
    if (args.contexts.empty())
      throw UsageError("the nb estimator requires --contexts");
    ContextMap contexts = load_contexts(args.contexts);
    NBModel model = train_nb(contexts, concepts, args.alpha, args.mask_token);
    echo.emplace_back("contexts", args.contexts);
    AtomicFile out(args.out);
    save_nb_model(out.stream(), model, echo);
    out.commit();
    std::cout << "vocab=" << model.vocab_size() << " total_pos=" << model.total_pos
              << " total_neg=" << model.total_neg << "\n";
    return 0;
  }

  if (args.embeddings.empty())
    throw UsageError("the " + args.estimator +
                     " estimator requires --embeddings");
  EmbeddingTable table = load_embeddings(args.embeddings);
  NNModel model = build_nn_model(concepts, table, args.radius);
  model.weighted = (kind == EstimatorKind::nn_weighted);
  echo.emplace_back("embeddings", args.embeddings);
  AtomicFile out(args.out);
  save_nn_model(out.stream(), model, echo);
  out.commit();
  std::cout << "entries=" << model.entries.size()
            << " skipped_no_embedding=" << model.skipped_no_embedding << "\n";
  return 0;
}

struct ScoreArgs {
  std::string model, contexts, concepts, embeddings, out;
};

std::string sniff_model_kind(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == "contro-nb-model v1") return "nb";
  if (line == "contro-nn-model v1") return "nn";
  throw std::runtime_error(path + ": not a recognized model file");
}

int cmd_score(const ScoreArgs& args) {
  const std::string kind = sniff_model_kind(args.model);
  ScoresFile file;
  file.config.emplace_back("model", args.model);

  if (kind == "nb") {
    if (args.contexts.empty())
      throw UsageError("scoring with an nb model requires --contexts");
    std::ifstream in = open_input(args.model);
    NBModel model = load_nb_model(in, args.model);
    ContextMap contexts = load_contexts(args.contexts);
    file.estimator = "nb";
    file.aux_column = "n_sentences";
    file.config.emplace_back("contexts", args.contexts);

    std::vector<std::string> ids;
    if (!args.concepts.empty()) {
      file.config.emplace_back("concepts", args.concepts);
      const ConceptSet concepts = load_concepts(args.concepts);
      for (const Concept& c : concepts.all()) ids.push_back(c.id);
      std::sort(ids.begin(), ids.end());
    } else {
      for (const auto& [id, ctxs] : contexts) ids.push_back(id);
    }
    for (const std::string& id : ids) {
      auto it = contexts.find(id);
      if (it == contexts.end() || it->second.empty()) {
        file.unscorable.push_back({id, "no contexts"});
        continue;
      }
      ConceptScore score = nb_concept_score(model, it->second);
      file.rows.push_back(
          {id, score.score, static_cast<long long>(score.n_sentences)});
    }
  } else {
    if (args.concepts.empty() || args.embeddings.empty())
      throw UsageError(
          "scoring with an nn model requires --concepts and --embeddings");
    std::ifstream in = open_input(args.model);
    NNModel model = load_nn_model(in, args.model);
    EmbeddingTable table = load_embeddings(args.embeddings);
    if (table.dimension() != model.dimension)
      throw std::runtime_error(
          "embedding dimension " + std::to_string(table.dimension()) +
          " does not match model dimension " +
          std::to_string(model.dimension));
    file.estimator = model.weighted ? "nn-weighted" : "nn";
    file.aux_column = "covered_words";
    file.config.emplace_back("concepts", args.concepts);
    file.config.emplace_back("embeddings", args.embeddings);

    const ConceptSet concepts = load_concepts(args.concepts);
    for (const Concept& c : concepts.all()) {
      auto cv = try_concept_embedding(table, c);
      if (!cv.has_value()) {
        file.unscorable.push_back({c.id, "no embedding"});
        continue;
      }
      bool zero = true;
      for (double x : cv->vec)
        if (x != 0.0) {
          zero = false;
          break;
        }
      if (zero) {
        file.unscorable.push_back({c.id, "no embedding"});
        continue;
      }
      file.rows.push_back(
          {c.id, nn_score(model, *cv, model.weighted), cv->covered_words});
    }
    std::sort(file.rows.begin(), file.rows.end(),
              [](const ScoreRow& a, const ScoreRow& b) {
                return a.concept_id < b.concept_id;
              });
    std::sort(file.unscorable.begin(), file.unscorable.end(),
              [](const UnscorableRow& a, const UnscorableRow& b) {
                return a.concept_id < b.concept_id;
              });
  }

  AtomicFile out(args.out);
  write_scores_file(out.stream(), file);
  out.commit();
  std::cout << "scored=" << file.rows.size()
            << " unscorable=" << file.unscorable.size() << "\n";
  return 0;
}

struct EvalArgs {
  std::string concepts, contexts, corpus, embeddings, out;
  std::string graded_concepts, graded_contexts, graded_corpus;
  std::string estimator = "nb";
  std::string protocol = "kfold";
  std::vector<std::string> held_out;
  int k = 10;
  double alpha = 1.0;
  double radius = 0.3;
  int min_len = 10;
  int max_len = 70;
  int positive_threshold = 6;
  std::uint64_t negative_sample = 0;
  std::uint64_t seed = 0;
  bool no_balance = false;
  std::string mask_token = std::string(kDefaultMaskToken);
};

int cmd_eval(const EvalArgs& args) {
  ExperimentConfig config;
  config.estimator = parse_estimator(args.estimator);
  try {
    config.protocol = protocol_from_string(args.protocol);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  config.k = args.k;
  config.seed = args.seed;
  config.alpha = args.alpha;
  config.radius = args.radius;
  config.mask_token = args.mask_token;
  config.balance_training_sentences = !args.no_balance;
  config.held_out_categories = args.held_out;
  config.positive_threshold = args.positive_threshold;
  config.negative_sample = args.negative_sample;
  config.extra_echo.emplace_back("concepts", args.concepts);

  ConceptSet concepts = load_concepts(args.concepts);
  const bool needs_contexts = config.estimator == EstimatorKind::nb;

  ExtractOptions extract_options;
  extract_options.min_len = args.min_len;
  extract_options.max_len = args.max_len;
  extract_options.seed = args.seed;
  extract_options.mask_token = args.mask_token;

  ContextMap contexts;
  if (needs_contexts) {
    if (!args.contexts.empty()) {
      contexts = load_contexts(args.contexts);
      config.extra_echo.emplace_back("contexts", args.contexts);
    } else if (!args.corpus.empty()) {
      contexts = extract_from_corpus(args.corpus, concepts, extract_options,
                                     nullptr);
      config.extra_echo.emplace_back("corpus", args.corpus);
      config.extra_echo.emplace_back("min_len", std::to_string(args.min_len));
      config.extra_echo.emplace_back("max_len", std::to_string(args.max_len));
    } else {
      throw UsageError("the nb estimator requires --contexts or --corpus");
    }
  }

  EmbeddingTable embeddings;
  if (!needs_contexts) {
    if (args.embeddings.empty())
      throw UsageError("the " + args.estimator +
                       " estimator requires --embeddings");
    embeddings = load_embeddings(args.embeddings);
    config.extra_echo.emplace_back("embeddings", args.embeddings);
  }

  ConceptSet graded_concepts;
  ContextMap graded_contexts;
  if (config.protocol == Protocol::graded) {
    if (args.graded_concepts.empty())
      throw UsageError("the graded protocol requires --graded-concepts");
    graded_concepts = load_concepts(args.graded_concepts);
    config.extra_echo.emplace_back("graded_concepts", args.graded_concepts);
    if (needs_contexts) {
      if (!args.graded_contexts.empty()) {
        graded_contexts = load_contexts(args.graded_contexts);
        config.extra_echo.emplace_back("graded_contexts",
                                       args.graded_contexts);
      } else if (!args.graded_corpus.empty()) {
        graded_contexts = extract_from_corpus(args.graded_corpus,
                                              graded_concepts,
                                              extract_options, nullptr);
        config.extra_echo.emplace_back("graded_corpus", args.graded_corpus);
      } else {
        throw UsageError(
            "graded evaluation with nb requires --graded-contexts or "
            "--graded-corpus");
      }
    }
  }

  ExperimentData data;
  data.concepts = &concepts;
  if (needs_contexts) data.contexts = &contexts;
  if (!needs_contexts) data.embeddings = &embeddings;
  if (config.protocol == Protocol::graded) {
    data.graded_concepts = &graded_concepts;
    if (needs_contexts) data.graded_contexts = &graded_contexts;
  }

  EvaluationReport report = run_experiment(data, config);

  AtomicFile out(args.out);
  write_report(out.stream(), report);
  out.commit();
  std::cout << "aggregate_accuracy=" << format_fixed(report.aggregate_accuracy, 6);
  if (report.pearson.has_value())
    std::cout << " pearson=" << format_double(*report.pearson);
  std::cout << "\n";
  return 0;
}

struct RankArgs {
  std::string contexts, concepts, out;
  long long min_df = 5;
  std::string mask_token = std::string(kDefaultMaskToken);
};

int cmd_rank_words(const RankArgs& args) {
  ConceptSet concepts = load_concepts(args.concepts);
  ContextMap contexts = load_contexts(args.contexts);
  std::vector<WordGain> ranking =
      information_gain_ranking(contexts, concepts, args.min_df,
                               args.mask_token);

  AtomicFile out(args.out);
  out.stream() << "# contro-ranking v1\n";
  out.stream() << "# concepts=" << args.concepts << "\n";
  out.stream() << "# contexts=" << args.contexts << "\n";
  out.stream() << "# min_df=" << args.min_df << "\n";
  for (const WordGain& row : ranking)
    out.stream() << row.word << "\t" << format_double(row.gain) << "\t"
                 << row.df_pos << "\t" << row.df_neg << "\n";
  out.commit();
  if (ranking.empty())
    std::cerr << "warning: no word met the eligibility thresholds\n";
  std::cout << "ranked=" << ranking.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept controversiality estimation toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand(
      "ingest", "Extract masked sentence contexts from a corpus");
  ingest->add_option("--corpus", ingest_args.corpus)->required();
  ingest->add_option("--concepts", ingest_args.concepts)->required();
  ingest->add_option("--out", ingest_args.out)->required();
  ingest->add_option("--min-len", ingest_args.min_len);
  ingest->add_option("--max-len", ingest_args.max_len);
  ingest->add_option("--seed", ingest_args.seed);
  ingest->add_option("--max-contexts", ingest_args.max_contexts,
                     "Per-concept context cap, 0 = unlimited");
  ingest->add_option("--mask-token", ingest_args.mask_token);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train an estimator model");
  train->add_option("--contexts", train_args.contexts);
  train->add_option("--concepts", train_args.concepts)->required();
  train->add_option("--embeddings", train_args.embeddings);
  train->add_option("--estimator", train_args.estimator,
                    "nb, nn or nn-weighted");
  train->add_option("--alpha", train_args.alpha);
  train->add_option("--radius", train_args.radius);
  train->add_option("--mask-token", train_args.mask_token);
  train->add_option("--out", train_args.out)->required();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score concepts with a model");
  score->add_option("--model", score_args.model)->required();
  score->add_option("--contexts", score_args.contexts);
  score->add_option("--concepts", score_args.concepts);
  score->add_option("--embeddings", score_args.embeddings);
  score->add_option("--out", score_args.out)->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Run an evaluation protocol");
  eval->add_option("--concepts", eval_args.concepts)->required();
  eval->add_option("--contexts", eval_args.contexts);
  eval->add_option("--corpus", eval_args.corpus);
  eval->add_option("--embeddings", eval_args.embeddings);
  eval->add_option("--estimator", eval_args.estimator,
                   "nb, nn or nn-weighted");
  eval->add_option("--protocol", eval_args.protocol, "kfold, loco or graded");
  eval->add_option("--held-out-category", eval_args.held_out,
                   "loco: categories to hold out (default: all)");
  eval->add_option("--k", eval_args.k);
  eval->add_option("--alpha", eval_args.alpha);
  eval->add_option("--radius", eval_args.radius);
  eval->add_option("--min-len", eval_args.min_len);
  eval->add_option("--max-len", eval_args.max_len);
  eval->add_option("--positive-threshold", eval_args.positive_threshold);
  eval->add_option("--negative-sample", eval_args.negative_sample,
                   "graded: grade-0 sample size, 0 = match positives");
  eval->add_option("--seed", eval_args.seed);
  eval->add_flag("--no-balance", eval_args.no_balance,
                 "Skip per-class training sentence balancing");
  eval->add_option("--graded-concepts", eval_args.graded_concepts);
  eval->add_option("--graded-contexts", eval_args.graded_contexts);
  eval->add_option("--graded-corpus", eval_args.graded_corpus);
  eval->add_option("--mask-token", eval_args.mask_token);
  eval->add_option("--out", eval_args.out)->required();

  RankArgs rank_args;
  auto* rank = app.add_subcommand(
      "rank-words", "Rank words by information gain over the class split");
  rank->add_option("--contexts", rank_args.contexts)->required();
  rank->add_option("--concepts", rank_args.concepts)->required();
  rank->add_option("--min-df", rank_args.min_df);
  rank->add_option("--mask-token", rank_args.mask_token);
  rank->add_option("--out", rank_args.out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_args);
    if (train->parsed()) return cmd_train(train_args);
    if (score->parsed()) return cmd_score(score_args);
    if (eval->parsed()) return cmd_eval(eval_args);
    if (rank->parsed()) return cmd_rank_words(rank_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
