#include "contro/corpus.hpp"

#include <algorithm>
#include <istream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "contro/random.hpp"

namespace contro {

namespace {

inline bool is_token_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c >= 0x80;
}

inline char fold_char(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                : static_cast<char>(c);
}

void tokenize_into(std::string_view text, std::vector<std::string>& out) {
  std::string cur;
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      cur.push_back(fold_char(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
}

std::string ascii_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(fold_char(c));
  return out;
}

using ForbiddenSet =
    std::unordered_set<std::string, StringHash, std::equal_to<>>;

// tokens equal to any of these strings mean the masking left a residual
// reference to the concept
ForbiddenSet forbidden_tokens(const Concept& c) {
  ForbiddenSet out;
  for (const std::string& s : c.mention_strings()) out.insert(ascii_lower(s));
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  tokenize_into(text, out);
  return out;
}

std::vector<RawSentence> parse_corpus(std::istream& in,
                                      const std::string& stream_name) {
  std::vector<RawSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = stream_name + ":" + std::to_string(lineno);

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(where + ": malformed record: " + e.what());
    }
    if (!record.is_object() || !record.contains("text") ||
        !record["text"].is_string() || !record.contains("mentions") ||
        !record["mentions"].is_array())
      throw std::runtime_error(
          where + ": record must carry a \"text\" string and a \"mentions\" array");

    RawSentence sentence;
    sentence.text = record["text"].get<std::string>();
    for (const auto& m : record["mentions"]) {
      if (!m.is_object() || !m.contains("concept") ||
          !m["concept"].is_string() || !m.contains("start") ||
          !m["start"].is_number_integer() || !m.contains("end") ||
          !m["end"].is_number_integer())
        throw std::runtime_error(
            where + ": mention must carry concept, start and end");
      long long start = m["start"].get<long long>();
      long long end = m["end"].get<long long>();
      if (start < 0 || end <= start ||
          static_cast<std::size_t>(end) > sentence.text.size())
        throw std::runtime_error(where + ": mention span [" +
                                 std::to_string(start) + ", " +
                                 std::to_string(end) +
                                 ") out of bounds for text of length " +
                                 std::to_string(sentence.text.size()));
      sentence.mentions.push_back(Mention{m["concept"].get<std::string>(),
                                          static_cast<std::size_t>(start),
                                          static_cast<std::size_t>(end)});
    }
    std::sort(sentence.mentions.begin(), sentence.mentions.end(),
              [](const Mention& a, const Mention& b) {
                return a.begin < b.begin;
              });
    for (std::size_t i = 1; i < sentence.mentions.size(); ++i)
      if (sentence.mentions[i].begin < sentence.mentions[i - 1].end)
        throw std::runtime_error(where + ": mention spans overlap");
    out.push_back(std::move(sentence));
  }
  return out;
}

MaskedContext mask_mention(const RawSentence& sentence,
                           const std::string& concept_id,
                           const std::string& mask_token,
                           std::string source_ref) {
  MaskedContext ctx;
  ctx.concept_id = concept_id;
  ctx.source_ref = std::move(source_ref);

  std::size_t pos = 0;
  bool found = false;
  for (const Mention& m : sentence.mentions) {
    if (m.concept_id != concept_id) continue;  // other concepts stay as text
    found = true;
    tokenize_into(
        std::string_view(sentence.text).substr(pos, m.begin - pos),
        ctx.tokens);
    ctx.tokens.push_back(mask_token);
    pos = m.end;
  }
  if (!found)
    throw std::runtime_error("sentence has no mention of concept '" +
                             concept_id + "'");
  tokenize_into(std::string_view(sentence.text).substr(pos), ctx.tokens);
  return ctx;
}

ContextMap extract_contexts(const std::vector<RawSentence>& sentences,
                            const ConceptSet& concepts,
                            const ExtractOptions& options,
                            ExtractStats* stats) {
  if (options.min_len > options.max_len)
    throw std::invalid_argument("extract_contexts: min_len > max_len");

  ExtractStats local;
  ContextMap out;
  for (const Concept& c : concepts.all()) out[c.id];  // zero-context concepts

  std::unordered_map<std::string, ForbiddenSet, StringHash, std::equal_to<>>
      forbidden;

  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const RawSentence& sentence = sentences[i];
    // distinct target concepts of this sentence, in first-mention order
    std::vector<const std::string*> targets;
    for (const Mention& m : sentence.mentions) {
      if (!concepts.contains(m.concept_id)) continue;
      bool seen = false;
      for (const std::string* t : targets) seen = seen || *t == m.concept_id;
      if (!seen) targets.push_back(&m.concept_id);
    }
    if (targets.empty()) continue;

    const std::string source_ref =
        options.source_label + ":" + std::to_string(i + 1);
    for (const std::string* id : targets) {
      MaskedContext ctx =
          mask_mention(sentence, *id, options.mask_token, source_ref);
      const auto len = static_cast<long long>(ctx.tokens.size());
      if (len < options.min_len || len > options.max_len) {
        ++local.dropped_length;
        continue;
      }
      auto fit = forbidden.find(*id);
      if (fit == forbidden.end())
        fit = forbidden.emplace(*id, forbidden_tokens(concepts.at(*id))).first;
      bool residual = false;
      for (const std::string& tok : ctx.tokens)
        if (fit->second.contains(tok)) {
          residual = true;
          break;
        }
      if (residual) {
        ++local.dropped_residual_mention;
        continue;
      }
      out[*id].push_back(std::move(ctx));
      ++local.kept;
    }
  }

  if (options.per_concept_cap) {
    const std::size_t cap = *options.per_concept_cap;
    for (auto& [id, ctxs] : out) {
      if (ctxs.size() <= cap) continue;
      std::mt19937_64 rng(mix_seed(options.seed, fnv1a64(id)));
      std::vector<std::size_t> keep = sample_indices(ctxs.size(), cap, rng);
      std::vector<MaskedContext> sampled;
      sampled.reserve(cap);
      for (std::size_t j : keep) sampled.push_back(std::move(ctxs[j]));
      local.sampled_out += ctxs.size() - cap;
      local.kept -= ctxs.size() - cap;
      ctxs = std::move(sampled);
    }
  }

  if (stats) *stats = local;
  return out;
}

}  // namespace contro
