#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "contro/concepts.hpp"
#include "contro/corpus.hpp"

namespace contro {

struct WordGain {
  std::string word;
  double gain = 0.0;      // bits; in [0, 1] for a binary class variable
  long long df_pos = 0;   // sentence-level presence counts
  long long df_neg = 0;
};

/// Ranks words by information gain of their sentence-level presence with
/// respect to the controversial / non-controversial partition.
///
/// Eligible words appear in at least one positive sentence and in at least
/// min_df sentences overall; the mask token is never ranked. Gains below
/// the -1e-12 numerical floor of zero are clamped to 0. Order: gain
/// descending, then total presence descending, then word ascending.
/// Throws if either class has no sentences.
std::vector<WordGain> information_gain_ranking(
    const ContextMap& contexts, const ConceptSet& labels, long long min_df = 5,
    std::string_view mask_token = kDefaultMaskToken);

}  // namespace contro
