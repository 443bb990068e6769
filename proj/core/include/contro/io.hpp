#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "contro/corpus.hpp"
#include "contro/nb_estimator.hpp"  // ConfigEcho

namespace contro {

/// Shortest decimal string that round-trips the exact double.
std::string format_double(double v);
std::string format_fixed(double v, int digits);

double parse_double(std::string_view s, const std::string& what);
long long parse_ll(std::string_view s, const std::string& what);

std::vector<std::string_view> split(std::string_view s, char sep);

/// Extracted contexts on disk: '#' header comments carrying the effective
/// configuration, then one record per line:
///   concept_id <TAB> source_ref <TAB> space-joined tokens
struct ContextsFile {
  std::string mask_token = std::string(kDefaultMaskToken);
  int min_len = 10;
  int max_len = 70;
  ConfigEcho config;
  ContextMap contexts;
};

void write_contexts_file(std::ostream& out, const ContextsFile& file);
ContextsFile read_contexts_file(std::istream& in,
                                const std::string& stream_name);

struct ScoreRow {
  std::string concept_id;
  double score = 0.0;
  long long aux = 0;  // n_sentences (nb) or covered_words (nn)
};

struct UnscorableRow {
  std::string concept_id;
  std::string reason;
};

struct ScoresFile {
  std::string estimator;   // nb | nn | nn-weighted
  std::string aux_column;  // n_sentences | covered_words
  ConfigEcho config;
  std::vector<ScoreRow> rows;
  std::vector<UnscorableRow> unscorable;
};

void write_scores_file(std::ostream& out, const ScoresFile& file);
ScoresFile read_scores_file(std::istream& in, const std::string& stream_name);

}  // namespace contro
