#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "contro/analysis.hpp"
#include "contro/concepts.hpp"
#include "contro/corpus.hpp"
#include "contro/embedding.hpp"
#include "contro/evaluation.hpp"
#include "contro/nb_estimator.hpp"
#include "contro/nn_estimator.hpp"
#include "contro/random.hpp"

namespace {

using namespace contro;

std::vector<std::string> make_vocab(std::size_t n) {
  std::vector<std::string> vocab;
  vocab.reserve(n);
  for (std::size_t i = 0; i < n; ++i) vocab.push_back("word" + std::to_string(i));
  return vocab;
}

// Fixed bilabeled fixture: `n` concepts per class, 20 contexts each.
struct Fixture {
  ConceptSet concepts;
  ContextMap contexts;
  std::vector<RawSentence> sentences;
  EmbeddingTable table;

  explicit Fixture(std::size_t per_class) : table(64) {
    std::mt19937_64 rng(7);
    const std::vector<std::string> vocab = make_vocab(500);
    std::vector<float> vec(64);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
      Concept c;
      c.id = "c" + std::to_string(i);
      c.title = "topic" + std::to_string(i);
      c.label = static_cast<int>(i % 2);
      concepts.add(c);
      for (float& x : vec) x = static_cast<float>(next_unit(rng) - 0.5);
      table.insert("topic" + std::to_string(i), vec);

      auto& ctxs = contexts[c.id];
      for (int s = 0; s < 20; ++s) {
        MaskedContext ctx;
        ctx.concept_id = c.id;
        ctx.source_ref = "bench:" + std::to_string(s);
        ctx.tokens.push_back(std::string(kDefaultMaskToken));
        std::string text = "the topic" + std::to_string(i);
        for (int t = 0; t < 24; ++t) {
          const std::string& w = vocab[bounded(rng, vocab.size())];
          ctx.tokens.push_back(w);
          text += " " + w;
        }
        ctxs.push_back(ctx);
        RawSentence sentence;
        sentence.text = text;
        sentence.mentions.push_back(
            {c.id, 4, 4 + 5 + std::to_string(i).size()});
        sentences.push_back(std::move(sentence));
      }
    }
  }
};

const Fixture& fixture() {
  static Fixture f(40);
  return f;
}

void bm_tokenize(benchmark::State& state) {
  const std::string text =
      "The committee's 2004 report, widely disputed at the time, called the "
      "policy \"a serious misjudgment\" and recommended 14 corrections.";
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text));
}
BENCHMARK(bm_tokenize);

void bm_extract_contexts(benchmark::State& state) {
  const Fixture& f = fixture();
  ExtractOptions options;
  options.min_len = 2;
  options.max_len = 70;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_contexts(f.sentences, f.concepts, options));
  }
}
BENCHMARK(bm_extract_contexts);

void bm_nb_sentence_score(benchmark::State& state) {
  const Fixture& f = fixture();
  const NBModel model = train_nb(f.contexts, f.concepts);
  const MaskedContext& ctx = f.contexts.begin()->second.front();
  for (auto _ : state) benchmark::DoNotOptimize(nb_sentence_score(model, ctx));
}
BENCHMARK(bm_nb_sentence_score);

void bm_nn_score(benchmark::State& state) {
  const Fixture& f = fixture();
  const NNModel model = build_nn_model(f.concepts, f.table, -0.5);
  const ConceptVector query =
      concept_embedding(f.table, f.concepts.at("c0"));
  for (auto _ : state) benchmark::DoNotOptimize(nn_score(model, query, true));
}
BENCHMARK(bm_nn_score);

void bm_information_gain(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(information_gain_ranking(f.contexts, f.concepts));
}
BENCHMARK(bm_information_gain);

}  // namespace

BENCHMARK_MAIN();
