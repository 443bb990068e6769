#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "contro/nn_estimator.hpp"
#include "contro/random.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace contro;
using contro::testing::check_throws_containing;

namespace {

Concept labeled(std::string id, std::string title, int label) {
  Concept c;
  c.id = std::move(id);
  c.title = std::move(title);
  c.label = label;
  return c;
}

ConceptVector query(std::string id, std::vector<double> vec) {
  ConceptVector q;
  q.concept_id = std::move(id);
  q.vec = std::move(vec);
  q.covered_words = 1;
  return q;
}

// Two training entries whose similarities to query (2, 0) are 0.9 (label 1)
// and 0.3 (label 0), up to float rounding of the stored vectors.
NNModel example_model(double radius = 0.2) {
  ConceptSet concepts;
  concepts.add(labeled("hot", "hotword", 1));
  concepts.add(labeled("cold", "coldword", 0));
  EmbeddingTable table(2);
  const std::vector<float> hot{9.0f, static_cast<float>(std::sqrt(19.0))};
  const std::vector<float> cold{3.0f, static_cast<float>(std::sqrt(91.0))};
  table.insert("hotword", hot);
  table.insert("coldword", cold);
  return build_nn_model(concepts, table, radius);
}

}  // namespace

TEST_CASE("build_nn_model keeps embeddable labeled concepts") {
  ConceptSet concepts;
  concepts.add(labeled("a", "alpha", 1));
  concepts.add(labeled("b", "beta", 0));
  concepts.add(labeled("c", "missing", 1));  // no vector
  Concept unlabeled;
  unlabeled.id = "u";
  unlabeled.title = "alpha";
  concepts.add(unlabeled);

  EmbeddingTable table(2);
  table.insert("alpha", std::vector<float>{1, 0});
  table.insert("beta", std::vector<float>{0, 1});

  NNModel model = build_nn_model(concepts, table, 0.3);
  CHECK(model.entries.size() == 2);
  CHECK(model.skipped_no_embedding == 1);
  CHECK(model.dimension == 2);
  CHECK(model.radius == 0.3);

  ConceptSet none;
  none.add(labeled("c", "missing", 1));
  CHECK_THROWS_AS(build_nn_model(none, table, 0.3), std::runtime_error);

  CHECK_THROWS_AS(build_nn_model(concepts, table, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_nn_model(concepts, table, 1.5),
                  std::invalid_argument);
}

TEST_CASE("neighbor vote: sims 0.9 (label 1) and 0.3 (label 0)") {
  NNModel model = example_model(0.2);  // both entries well inside the radius
  ConceptVector q = query("q", {2, 0});

  NNScoreDetail unweighted = nn_score_detail(model, q, false);
  CHECK(unweighted.neighbors == 2);
  CHECK(unweighted.score == 0.5);

  // 0.9 / (0.9 + 0.3)
  NNScoreDetail weighted = nn_score_detail(model, q, true);
  CHECK(weighted.score == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(weighted.clamped_weights == 0);

  // raising the radius past 0.3 drops the colder neighbor
  NNModel tight = example_model(0.5);
  CHECK(nn_score(tight, q, false) == 1.0);
  CHECK(nn_score(tight, q, true) == 1.0);

  // nothing within a very high radius: fallback
  NNModel empty = example_model(0.99);
  NNScoreDetail fb = nn_score_detail(empty, q, false);
  CHECK(fb.neighbors == 0);
  CHECK(fb.score == 0.5);
  CHECK(nn_score(empty, q, true) == 0.5);
}

TEST_CASE("the radius threshold is inclusive") {
  // similarities of exactly 0.0 and 1.0 are exact in floating point
  ConceptSet concepts;
  concepts.add(labeled("up", "upword", 1));
  concepts.add(labeled("side", "sideword", 0));
  EmbeddingTable table(2);
  table.insert("upword", std::vector<float>{3, 0});
  table.insert("sideword", std::vector<float>{0, 1});

  NNModel at_zero = build_nn_model(concepts, table, 0.0);
  ConceptVector q = query("q", {2, 0});
  NNScoreDetail d = nn_score_detail(at_zero, q, false);
  CHECK(d.neighbors == 2);  // the orthogonal entry sits exactly on the radius
  CHECK(d.score == 0.5);

  NNModel at_one = build_nn_model(concepts, table, 1.0);
  NNScoreDetail p = nn_score_detail(at_one, q, false);
  CHECK(p.neighbors == 1);  // only the parallel entry, at similarity 1.0
  CHECK(p.score == 1.0);
}

TEST_CASE("a concept never votes for itself") {
  NNModel model = example_model(0.2);
  // same vector as the "hot" entry, same id: only "cold" can vote
  ConceptVector self = query("hot", {9.0, std::sqrt(19.0)});
  NNScoreDetail d = nn_score_detail(model, self, false);
  CHECK(d.neighbors == 1);
  CHECK(d.score == 0.0);

  // same vector under a fresh id sees both entries
  ConceptVector other = query("elsewhere", {9.0, std::sqrt(19.0)});
  CHECK(nn_score_detail(model, other, false).neighbors == 2);
}

TEST_CASE("label flip maps unweighted score to its complement") {
  ConceptSet concepts;
  ConceptSet flipped;
  EmbeddingTable table(3);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 12; ++i) {
    std::string id = "c" + std::to_string(i);
    std::string word = "w" + std::to_string(i);
    std::vector<float> v(3);
    for (float& x : v) x = static_cast<float>(next_unit(rng) * 2.0 - 1.0);
    if (v[0] == 0.0f && v[1] == 0.0f && v[2] == 0.0f) v[0] = 1.0f;
    table.insert(word, v);
    int label = static_cast<int>(bounded(rng, 2));
    concepts.add(labeled(id, word, label));
    flipped.add(labeled(id, word, 1 - label));
  }
  NNModel model = build_nn_model(concepts, table, -0.2);
  NNModel anti = build_nn_model(flipped, table, -0.2);

  ConceptVector q = query("q", {0.4, -0.1, 0.3});
  NNScoreDetail d = nn_score_detail(model, q, false);
  NNScoreDetail a = nn_score_detail(anti, q, false);
  REQUIRE(d.neighbors > 0);
  CHECK(a.neighbors == d.neighbors);
  CHECK(a.score == doctest::Approx(1.0 - d.score).epsilon(1e-12));
}

TEST_CASE("weighted variant clamps negative similarities at radius <= 0") {
  ConceptSet concepts;
  concepts.add(labeled("pos", "posword", 1));
  concepts.add(labeled("neg", "negword", 0));
  EmbeddingTable table(2);
  table.insert("posword", std::vector<float>{1, 0});
  table.insert("negword", std::vector<float>{-1, 2});  // sim -1/sqrt(5)

  NNModel model = build_nn_model(concepts, table, -0.5);
  ConceptVector q = query("q", {1, 0});

  NNScoreDetail unweighted = nn_score_detail(model, q, false);
  CHECK(unweighted.neighbors == 2);
  CHECK(unweighted.score == 0.5);

  NNScoreDetail weighted = nn_score_detail(model, q, true);
  CHECK(weighted.clamped_weights == 1);
  CHECK(weighted.score == 1.0);  // 1 / (1 + 0)

  // every in-radius weight clamped to zero: fallback
  ConceptSet only_neg;
  only_neg.add(labeled("neg", "negword", 0));
  NNModel neg_model = build_nn_model(only_neg, table, -0.5);
  NNScoreDetail all_clamped = nn_score_detail(neg_model, q, true);
  CHECK(all_clamped.neighbors == 1);
  CHECK(all_clamped.clamped_weights == 1);
  CHECK(all_clamped.score == 0.5);
}

TEST_CASE("query validation") {
  NNModel model = example_model();
  check_throws_containing(
      [&] { nn_score(model, query("q", {1, 2, 3}), false); }, "dimension");
  check_throws_containing(
      [&] { nn_score(model, query("q", {0, 0}), false); }, "zero-norm");
}

TEST_CASE("scores stay in [0,1] on random inputs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    ConceptSet concepts;
    EmbeddingTable table(4);
    int n = 3 + static_cast<int>(bounded(rng, 10));
    for (int i = 0; i < n; ++i) {
      std::string word = "w" + std::to_string(i);
      std::vector<float> v(4);
      bool nonzero = false;
      for (float& x : v) {
        x = static_cast<float>(next_unit(rng) * 2.0 - 1.0);
        nonzero = nonzero || x != 0.0f;
      }
      if (!nonzero) v[0] = 0.5f;
      table.insert(word, v);
      concepts.add(labeled("c" + std::to_string(i), word,
                           static_cast<int>(bounded(rng, 2))));
    }
    double radius = next_unit(rng) * 1.9 - 0.9;
    NNModel model = build_nn_model(concepts, table, radius);
    std::vector<double> qv{next_unit(rng) - 0.5, next_unit(rng) - 0.5,
                           next_unit(rng) - 0.5, 0.25};
    for (bool weighted : {false, true}) {
      double s = nn_score(model, query("probe", qv), weighted);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("nn model round-trips through its file format") {
  NNModel model = example_model(0.25);
  model.weighted = true;

  std::ostringstream out;
  save_nn_model(out, model, {{"radius", "0.25"}});
  const std::string text = out.str();
  CHECK(text.rfind("contro-nn-model v1\n", 0) == 0);
  CHECK(text.find("# radius=0.25\n") != std::string::npos);

  std::istringstream in(text);
  NNModel loaded = load_nn_model(in, "m");
  CHECK(loaded.dimension == model.dimension);
  CHECK(loaded.radius == model.radius);
  CHECK(loaded.fallback_score == model.fallback_score);
  CHECK(loaded.weighted == model.weighted);
  REQUIRE(loaded.entries.size() == model.entries.size());
  for (std::size_t i = 0; i < model.entries.size(); ++i) {
    CHECK(loaded.entries[i].concept_id == model.entries[i].concept_id);
    CHECK(loaded.entries[i].label == model.entries[i].label);
    CHECK(loaded.entries[i].norm ==
          doctest::Approx(model.entries[i].norm).epsilon(1e-12));
  }

  ConceptVector q = query("q", {2, 0});
  CHECK(nn_score(loaded, q, true) ==
        doctest::Approx(nn_score(model, q, true)).epsilon(1e-12));

  std::ostringstream out2;
  save_nn_model(out2, loaded, {{"radius", "0.25"}});
  CHECK(out2.str() == text);
}

TEST_CASE("load_nn_model rejects corrupt files") {
  const std::string good =
      "contro-nn-model v1\n"
      "dimension\t2\n"
      "radius\t0.3\n"
      "fallback\t0.5\n"
      "weighted\t0\n"
      "entries\t1\n"
      "a\t1\t0.5\t0.5\n"
      "end\n";
  {
    std::istringstream in(good);
    NNModel m = load_nn_model(in, "m");
    CHECK(m.entries.size() == 1);
  }

  auto corrupt = [&](const std::string& from, const std::string& to) {
    std::string text = good;
    text.replace(text.find(from), from.size(), to);
    return text;
  };

  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("contro-nn-model", "contro-nb-model"));
        load_nn_model(in, "m");
      },
      "not a contro-nn-model v1 file");
  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("radius\t0.3", "radius\t1.5"));
        load_nn_model(in, "m");
      },
      "radius must be in (-1, 1]");
  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("weighted\t0", "weighted\t2"));
        load_nn_model(in, "m");
      },
      "weighted must be 0 or 1");
  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("a\t1\t0.5\t0.5", "a\t1\t0.5"));
        load_nn_model(in, "m");
      },
      "expected 4 fields, got 3");
  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("a\t1\t0.5\t0.5", "a\t3\t0.5\t0.5"));
        load_nn_model(in, "m");
      },
      "label must be 0 or 1");
  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("a\t1\t0.5\t0.5", "a\t1\t0\t0"));
        load_nn_model(in, "m");
      },
      "zero vector");
  check_throws_containing(
      [&] {
        std::istringstream in(corrupt("end\n", ""));
        load_nn_model(in, "m");
      },
      "truncated");
}
