#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "contro/concepts.hpp"
#include "contro/corpus.hpp"

namespace contro {

/// Multinomial Naive Bayes over bag-of-words contexts with add-alpha
/// smoothing and a fixed 0.5 class prior. The mask token is excluded from
/// both training counts and scoring.
struct NBModel {
  struct Counts {
    long long pos = 0;
    long long neg = 0;
  };

  double alpha = 1.0;
  double prior_pos = 0.5;  // fixed by contract
  long long total_pos = 0;
  long long total_neg = 0;
  std::string mask_token = std::string(kDefaultMaskToken);
  std::unordered_map<std::string, Counts, StringHash, std::equal_to<>> counts;

  std::size_t vocab_size() const { return counts.size(); }
};

/// Accumulates per-class token counts over all contexts whose concept has a
/// binary label in `labels`; unlabeled concepts are ignored. Throws if
/// alpha <= 0 or either class ends up with zero contexts.
NBModel train_nb(const ContextMap& contexts, const ConceptSet& labels,
                 double alpha = 1.0,
                 std::string_view mask_token = kDefaultMaskToken);

/// Posterior probability that the context references a controversial
/// concept. Token likelihood is (count + alpha) / (total + alpha * |vocab|);
/// the two class log scores are combined stably (max subtracted before
/// exponentiation). Mask and out-of-vocabulary tokens are skipped; a context
/// with no scorable token returns exactly 0.5.
double nb_sentence_score(const NBModel& model, const MaskedContext& context);

struct SentenceScore {
  std::string source_ref;
  double score = 0.0;
};

struct ConceptScore {
  std::string concept_id;
  double score = 0.0;  // arithmetic mean of per_sentence scores
  std::size_t n_sentences = 0;
  std::vector<SentenceScore> per_sentence;
};

/// Mean sentence score over all contexts. Throws on an empty context list.
ConceptScore nb_concept_score(const NBModel& model,
                              const std::vector<MaskedContext>& contexts);

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

/// Versioned flat text file: header (alpha, prior, totals, vocab size), then
/// one token record per line, sorted by token. `config` is echoed as
/// comments.
void save_nb_model(std::ostream& out, const NBModel& model,
                   const ConfigEcho& config = {});
NBModel load_nb_model(std::istream& in, const std::string& stream_name);

}  // namespace contro
