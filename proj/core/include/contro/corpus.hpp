#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contro/concepts.hpp"

namespace contro {

inline constexpr std::string_view kDefaultMaskToken = "[MASK]";

/// Deterministic tokenizer used everywhere counts must be reproducible:
/// ASCII letters are lowercased, tokens are maximal runs of ASCII
/// alphanumerics and non-ASCII bytes, everything else separates. Punctuation
/// therefore never forms a token; numerals are kept.
std::vector<std::string> tokenize(std::string_view text);

/// A hyperlink anchor: byte span [begin, end) of `text` referencing a concept.
struct Mention {
  std::string concept_id;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct RawSentence {
  std::string text;
  std::vector<Mention> mentions;  // sorted by begin, non-overlapping
};

/// Parses the line-delimited corpus format: one JSON object per line with a
/// "text" string and a "mentions" array of {"concept", "start", "end"}
/// (end-exclusive byte offsets). Malformed lines and out-of-bounds or
/// overlapping spans raise errors naming `stream_name` and the line.
std::vector<RawSentence> parse_corpus(std::istream& in,
                                      const std::string& stream_name);

/// One tokenized sentence referencing a concept, with every mention of that
/// concept replaced by the mask token.
struct MaskedContext {
  std::string concept_id;
  std::vector<std::string> tokens;
  std::string source_ref;  // provenance, e.g. "corpus.jsonl:17"

  bool operator==(const MaskedContext&) const = default;
};

using ContextMap = std::map<std::string, std::vector<MaskedContext>>;

/// Replaces every mention span of `concept_id` with exactly one mask token;
/// the rest of the sentence (other concepts' mentions included) is tokenized
/// normally. Throws if the sentence has no mention of `concept_id`.
/// Length filtering is not applied here.
MaskedContext mask_mention(const RawSentence& sentence,
                           const std::string& concept_id,
                           const std::string& mask_token = std::string(kDefaultMaskToken),
                           std::string source_ref = {});

struct ExtractOptions {
  int min_len = 10;
  int max_len = 70;
  std::optional<std::size_t> per_concept_cap;
  std::uint64_t seed = 0;
  std::string mask_token = std::string(kDefaultMaskToken);
  std::string source_label = "corpus";
};

struct ExtractStats {
  std::size_t kept = 0;
  std::size_t dropped_length = 0;
  std::size_t dropped_residual_mention = 0;  // surface form survived masking
  std::size_t sampled_out = 0;               // removed by per_concept_cap
};

/// Extracts masked contexts for every concept in `concepts`. Only contexts
/// whose masked token count (mask counted once) lies in [min_len, max_len]
/// and which carry no token equal to a surface form of their concept are
/// kept. With per_concept_cap set, a seeded uniform sample of that size is
/// taken per concept. Concepts with no surviving context map to an empty
/// list. Deterministic for identical (sentences, options).
ContextMap extract_contexts(const std::vector<RawSentence>& sentences,
                            const ConceptSet& concepts,
                            const ExtractOptions& options = {},
                            ExtractStats* stats = nullptr);

}  // namespace contro
