#include "synthetic.hpp"

#include <cmath>
#include <unordered_map>

#include "contro/random.hpp"

namespace contro::testing {

namespace {

struct Vocabulary {
  std::vector<std::string> dispute;
  std::vector<std::string> common;
  std::vector<std::string> background;
  std::vector<std::vector<std::string>> themes;  // one list per category
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>
      index;

  explicit Vocabulary(const PlantedOptions& options) {
    auto intern = [this](std::string word, std::vector<std::string>& bucket) {
      index.emplace(word, index.size());
      bucket.push_back(std::move(word));
    };
    for (std::size_t i = 0; i < options.dispute_words; ++i)
      intern("dispute" + std::to_string(i), dispute);
    for (std::size_t i = 0; i < options.common_words; ++i)
      intern("common" + std::to_string(i), common);
    for (std::size_t i = 0; i < options.background_pool; ++i)
      intern("bg" + std::to_string(i), background);
    themes.resize(options.categories);
    for (std::size_t t = 0; t < options.categories; ++t)
      for (std::size_t i = 0; i < options.theme_words_per_category; ++i)
        intern("theme" + std::to_string(t) + "w" + std::to_string(i),
               themes[t]);
  }

  std::size_t size() const { return index.size(); }
};

std::string two_digit(std::size_t i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

// Generates one concept's contexts; `positive_profile_contexts` of them draw
// dispute words at the positive rate, the rest at the negative rate. The
// theme list applies to every context when non-null.
std::vector<MaskedContext> generate_contexts(
    const PlantedOptions& options, const Vocabulary& vocab,
    const std::string& concept_id, std::size_t positive_profile_contexts,
    const std::vector<std::string>* theme) {
  std::mt19937_64 rng(mix_seed(options.seed, fnv1a64("concept/" + concept_id)));
  std::vector<std::size_t> slice_idx = sample_indices(
      options.background_pool, options.background_per_concept, rng);

  std::vector<MaskedContext> contexts;
  contexts.reserve(options.contexts_per_concept);
  for (std::size_t s = 0; s < options.contexts_per_concept; ++s) {
    const bool positive_profile = s < positive_profile_contexts;
    const double dispute_rate = positive_profile ? options.pos_dispute_rate
                                                 : options.neg_dispute_rate;
    const double theme_rate = theme != nullptr ? options.theme_rate : 0.0;
    const int length =
        options.min_tokens +
        static_cast<int>(bounded(
            rng, static_cast<std::uint64_t>(options.max_tokens -
                                            options.min_tokens + 1)));
    MaskedContext ctx;
    ctx.concept_id = concept_id;
    ctx.source_ref = "synthetic:" + concept_id + ":" + std::to_string(s);
    ctx.tokens.reserve(static_cast<std::size_t>(length) + 1);
    ctx.tokens.emplace_back(kDefaultMaskToken);
    for (int t = 0; t < length; ++t) {
      const double u = next_unit(rng);
      if (u < dispute_rate) {
        ctx.tokens.push_back(
            vocab.dispute[bounded(rng, vocab.dispute.size())]);
      } else if (u < dispute_rate + theme_rate) {
        ctx.tokens.push_back((*theme)[bounded(rng, theme->size())]);
      } else if (u < dispute_rate + theme_rate + options.common_rate) {
        ctx.tokens.push_back(vocab.common[bounded(rng, vocab.common.size())]);
      } else {
        ctx.tokens.push_back(
            vocab.background[slice_idx[bounded(rng, slice_idx.size())]]);
      }
    }
    contexts.push_back(std::move(ctx));
  }
  return contexts;
}

std::vector<float> count_vector(const Vocabulary& vocab,
                                const std::vector<MaskedContext>& contexts) {
  std::vector<float> counts(vocab.size(), 0.0f);
  for (const MaskedContext& ctx : contexts)
    for (const std::string& tok : ctx.tokens) {
      auto it = vocab.index.find(tok);
      if (it != vocab.index.end()) counts[it->second] += 1.0f;
    }
  return counts;
}

}  // namespace

PlantedCorpus make_planted_corpus(const PlantedOptions& options) {
  Vocabulary vocab(options);
  PlantedCorpus corpus;
  corpus.embeddings = EmbeddingTable(vocab.size());

  const std::size_t n_multi = static_cast<std::size_t>(
      std::llround(options.multi_category_fraction *
                   static_cast<double>(options.n_pos)));

  for (std::size_t i = 0; i < options.n_pos; ++i) {
    Concept c;
    c.id = "p" + two_digit(i);
    c.title = "topicp" + two_digit(i);
    c.label = 1;
    const std::vector<std::string>* theme = nullptr;
    if (options.categories > 0) {
      const std::size_t cat = i % options.categories;
      c.categories.push_back("category" + std::to_string(cat));
      if (i < n_multi && options.categories > 1)
        c.categories.push_back(
            "category" + std::to_string((cat + 1) % options.categories));
      if (options.theme_rate > 0.0) theme = &vocab.themes[cat];
    }
    std::vector<MaskedContext> contexts = generate_contexts(
        options, vocab, c.id, options.contexts_per_concept, theme);
    corpus.embeddings.insert(c.title, count_vector(vocab, contexts));
    corpus.contexts[c.id] = std::move(contexts);
    corpus.concepts.add(std::move(c));
  }
  for (std::size_t i = 0; i < options.n_neg; ++i) {
    Concept c;
    c.id = "n" + two_digit(i);
    c.title = "topicn" + two_digit(i);
    c.label = 0;
    std::vector<MaskedContext> contexts =
        generate_contexts(options, vocab, c.id, 0, nullptr);
    corpus.embeddings.insert(c.title, count_vector(vocab, contexts));
    corpus.contexts[c.id] = std::move(contexts);
    corpus.concepts.add(std::move(c));
  }
  return corpus;
}

GradedFixture make_graded_fixture(const PlantedOptions& options,
                                  std::size_t zeros, std::size_t per_grade) {
  Vocabulary vocab(options);
  GradedFixture fixture;
  std::size_t serial = 0;
  auto add = [&](int grade, double fraction) {
    Concept c;
    c.id = "g" + two_digit(serial);
    c.title = "topicg" + two_digit(serial);
    c.grade = grade;
    ++serial;
    const auto positive_contexts = static_cast<std::size_t>(std::llround(
        fraction * static_cast<double>(options.contexts_per_concept)));
    fixture.contexts[c.id] =
        generate_contexts(options, vocab, c.id, positive_contexts, nullptr);
    fixture.concepts.add(std::move(c));
  };
  for (std::size_t i = 0; i < zeros; ++i) add(0, 0.0);
  for (int grade = 1; grade <= 10; ++grade)
    for (std::size_t i = 0; i < per_grade; ++i)
      add(grade, static_cast<double>(grade) / 10.0);
  return fixture;
}

}  // namespace contro::testing
