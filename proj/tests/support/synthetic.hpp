#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contro/concepts.hpp"
#include "contro/corpus.hpp"
#include "contro/embedding.hpp"

namespace contro::testing {

/// Generator knobs for the planted-vocabulary corpus. The defaults give a
/// cleanly separable two-class problem: positive concepts draw heavily from
/// a small "dispute" vocabulary, negatives barely, and each concept owns a
/// private slice of a large background pool so that count-vector embeddings
/// of same-class concepts are far more similar than cross-class ones.
struct PlantedOptions {
  std::size_t n_pos = 40;
  std::size_t n_neg = 40;
  std::size_t contexts_per_concept = 30;

  std::size_t dispute_words = 15;
  double pos_dispute_rate = 0.20;
  double neg_dispute_rate = 0.02;
  std::size_t common_words = 20;
  double common_rate = 0.08;
  std::size_t background_pool = 3000;
  std::size_t background_per_concept = 150;

  int min_tokens = 15;  // content tokens per context, excluding the mask
  int max_tokens = 35;

  // Themed mode: positives are spread over this many categories, each with
  // its own theme vocabulary mixed into its concepts' contexts.
  std::size_t categories = 0;
  double theme_rate = 0.0;
  std::size_t theme_words_per_category = 12;
  double multi_category_fraction = 0.0;

  std::uint64_t seed = 0;
};

struct PlantedCorpus {
  ConceptSet concepts;
  ContextMap contexts;
  EmbeddingTable embeddings;  // count vectors over the full vocabulary,
                              // keyed by each concept's title token
};

PlantedCorpus make_planted_corpus(const PlantedOptions& options);

/// Graded companion fixture: concepts whose contexts are a mixture of the
/// positive and negative generation profiles. A concept with mixture
/// fraction f gets round(f * contexts_per_concept) positive-profile
/// contexts and carries grade round(10 * f). Produces `zeros` concepts at
/// f = 0 and `per_grade` concepts for each grade 1..10.
struct GradedFixture {
  ConceptSet concepts;
  ContextMap contexts;
};

GradedFixture make_graded_fixture(const PlantedOptions& options,
                                  std::size_t zeros, std::size_t per_grade);

}  // namespace contro::testing
