#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "contro/concepts.hpp"
#include "contro/corpus.hpp"
#include "contro/embedding.hpp"
#include "contro/nb_estimator.hpp"  // ConfigEcho

namespace contro {

/// Concept-level fold assignment. Positives and negatives are each shuffled
/// (seeded) and dealt round-robin, so per-class fold sizes differ by at
/// most one; all sentences of a concept travel with the concept.
struct FoldPlan {
  int k = 0;
  std::map<std::string, int> assignments;  // concept_id -> fold in [0, k)
  std::uint64_t seed = 0;

  std::vector<std::string> fold_ids(int fold) const;
  std::vector<std::string> complement_ids(int fold) const;
};

/// Throws if k < 2 or either class has fewer than k labeled concepts.
FoldPlan make_kfold_plan(const ConceptSet& concepts, int k,
                         std::uint64_t seed);

/// Sorts by (score descending, id ascending) and labels the top ceil(n/2)
/// positive, the rest negative. Throws when fewer than 2 concepts.
std::map<std::string, int> median_split_binarize(
    const std::map<std::string, double>& scores);

/// Fraction of keys on which the two maps agree. Throws on key mismatch.
double accuracy(const std::map<std::string, int>& predicted,
                const std::map<std::string, int>& gold);

struct LocoSplit {
  std::string held_out;
  std::vector<std::string> train_ids;  // sorted
  std::vector<std::string> test_ids;   // sorted
};

/// Test: every labeled concept carrying `held_out` (a multi-category concept
/// carrying it appears only here). Train: labeled positives carrying none of
/// its memberships. Category-less negatives are dealt by seeded sampling to
/// keep both sides label-balanced; surplus negatives are left out. Throws on
/// an unknown category or when negatives cannot balance the split.
LocoSplit leave_one_category_out_split(const ConceptSet& concepts,
                                       const std::string& held_out,
                                       std::uint64_t seed);

/// Product-moment correlation. Throws when lengths differ, fewer than 2
/// points, or either side has zero variance.
double pearson_correlation(std::span<const double> x,
                           std::span<const double> y);

enum class Protocol { kfold, loco, graded };
enum class EstimatorKind { nb, nn, nn_weighted };

std::string_view to_string(Protocol p);
std::string_view to_string(EstimatorKind e);
Protocol protocol_from_string(std::string_view s);
EstimatorKind estimator_from_string(std::string_view s);

struct FoldResult {
  std::string name;  // fold index, held-out category, or "graded"
  double accuracy = 0.0;
  std::size_t n_test = 0;
  std::size_t fallback_scored = 0;  // test concepts scored by fallback 0.5
  std::map<std::string, double> scores;
  std::map<std::string, int> predicted;
  std::map<std::string, int> gold;
};

struct EvaluationReport {
  Protocol protocol = Protocol::kfold;
  std::uint64_t seed = 0;
  std::vector<FoldResult> per_fold;
  double aggregate_accuracy = 0.0;  // mean of per-fold accuracies
  std::optional<double> pearson;
  ConfigEcho config_echo;
};

/// Versioned structured text document; '#' lines echo the configuration.
/// Byte-identical for identical inputs.
void write_report(std::ostream& out, const EvaluationReport& report);

/// Downsamples the larger class's sentence pool (seeded) so both classes
/// contribute the same number of training sentences. Contexts of unlabeled
/// concepts are dropped.
ContextMap balance_training_sentences(const ContextMap& contexts,
                                      const ConceptSet& labels,
                                      std::uint64_t seed);

/// Graded-label protocol: Pearson over all (grade, score) pairs, then
/// median-split accuracy over {grade >= positive_threshold} plus a seeded
/// sample of `negative_sample` grade-0 concepts. Every scored id must carry
/// a grade. Throws when grade-0 concepts cannot cover the requested sample.
EvaluationReport graded_eval(const std::map<std::string, double>& scores,
                             const ConceptSet& graded, int positive_threshold,
                             std::size_t negative_sample, std::uint64_t seed);

struct ExperimentConfig {
  Protocol protocol = Protocol::kfold;
  EstimatorKind estimator = EstimatorKind::nb;
  int k = 10;
  std::uint64_t seed = 0;
  double alpha = 1.0;
  double radius = 0.3;
  std::string mask_token = std::string(kDefaultMaskToken);
  bool balance_training_sentences = true;
  std::vector<std::string> held_out_categories;  // loco; empty = all
  int positive_threshold = 6;                    // graded
  std::size_t negative_sample = 0;               // graded; 0 = match positives
  ConfigEcho extra_echo;                         // paths etc., echoed as-is
};

struct ExperimentData {
  const ConceptSet* concepts = nullptr;        // labeled train concepts
  const ContextMap* contexts = nullptr;        // train contexts (nb)
  const EmbeddingTable* embeddings = nullptr;  // nn variants
  const ConceptSet* graded_concepts = nullptr;
  const ContextMap* graded_contexts = nullptr;
};

/// Runs the configured protocol: trains per split, scores the held-out
/// concepts (fallback 0.5 when a concept has no contexts / no embedding),
/// binarizes by median split and aggregates. All randomness derives from
/// config.seed. Reports echo the full parameter set.
EvaluationReport run_experiment(const ExperimentData& data,
                                const ExperimentConfig& config);

}  // namespace contro
