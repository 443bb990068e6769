#include "contro/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace contro {

namespace {

// Shannon entropy in bits of a two-class distribution given raw counts.
double entropy2(double a, double b) {
  const double n = a + b;
  if (n == 0.0) return 0.0;
  double h = 0.0;
  if (a > 0.0) {
    const double p = a / n;
    h -= p * std::log2(p);
  }
  if (b > 0.0) {
    const double p = b / n;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

std::vector<WordGain> information_gain_ranking(const ContextMap& contexts,
                                               const ConceptSet& labels,
                                               long long min_df,
                                               std::string_view mask_token) {
  struct Presence {
    long long pos = 0;
    long long neg = 0;
  };
  std::unordered_map<std::string, Presence, StringHash, std::equal_to<>> df;
  long long n_pos = 0;
  long long n_neg = 0;
  std::unordered_set<std::string_view> seen;

  for (const auto& [concept_id, ctxs] : contexts) {
    const Concept* c = labels.find(concept_id);
    if (c == nullptr || !c->label.has_value()) continue;
    const bool positive = (*c->label == 1);
    for (const MaskedContext& ctx : ctxs) {
      if (positive)
        ++n_pos;
      else
        ++n_neg;
      seen.clear();
      for (const std::string& tok : ctx.tokens) {
        if (tok == mask_token) continue;
        if (!seen.insert(tok).second) continue;
        Presence& p = df[tok];
        if (positive)
          ++p.pos;
        else
          ++p.neg;
      }
    }
  }
  if (n_pos == 0 || n_neg == 0)
    throw std::runtime_error(
        std::string("information_gain_ranking: no sentences for the ") +
        (n_pos == 0 ? "positive" : "negative") + " class");

  const double total = static_cast<double>(n_pos + n_neg);
  const double h_class =
      entropy2(static_cast<double>(n_pos), static_cast<double>(n_neg));

  std::vector<WordGain> result;
  for (const auto& [word, presence] : df) {
    if (presence.pos == 0) continue;
    const long long present = presence.pos + presence.neg;
    if (present < min_df) continue;
    const double h_cond =
        (static_cast<double>(present) / total) *
            entropy2(static_cast<double>(presence.pos),
                     static_cast<double>(presence.neg)) +
        ((total - static_cast<double>(present)) / total) *
            entropy2(static_cast<double>(n_pos - presence.pos),
                     static_cast<double>(n_neg - presence.neg));
    double gain = h_class - h_cond;
    // Information gain is nonnegative; rounding can dip a hair below zero.
    if (gain < 0.0) gain = 0.0;
    result.push_back({word, gain, presence.pos, presence.neg});
  }

  std::sort(result.begin(), result.end(),
            [](const WordGain& a, const WordGain& b) {
              if (a.gain != b.gain) return a.gain > b.gain;
              const long long ta = a.df_pos + a.df_neg;
              const long long tb = b.df_pos + b.df_neg;
              if (ta != tb) return ta > tb;
              return a.word < b.word;
            });
  return result;
}

}  // namespace contro
