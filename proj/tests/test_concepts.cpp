#include <sstream>
#include <stdexcept>
#include <vector>

#include "contro/concepts.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace contro;
using contro::testing::check_throws_containing;

namespace {

Concept make(std::string id, std::string title, int label) {
  Concept c;
  c.id = std::move(id);
  c.title = std::move(title);
  c.label = label;
  return c;
}

}  // namespace

TEST_CASE("ConceptSet::add validates its input") {
  ConceptSet set;
  set.add(make("a", "Alpha", 1));

  Concept empty_id;
  empty_id.title = "x";
  CHECK_THROWS_AS(set.add(empty_id), std::runtime_error);

  check_throws_containing([&] { set.add(make("a", "Again", 0)); },
                          "duplicate concept id");

  Concept bad_label = make("b", "Beta", 2);
  check_throws_containing([&] { set.add(bad_label); }, "label must be 0 or 1");

  Concept bad_grade = make("c", "Gamma", 0);
  bad_grade.grade = 11;
  check_throws_containing([&] { set.add(bad_grade); }, "grade");

  Concept unlabeled;
  unlabeled.id = "d";
  unlabeled.title = "Delta";
  set.add(unlabeled);  // label and grade are optional
  CHECK(set.size() == 2);
}

TEST_CASE("ConceptSet lookup") {
  ConceptSet set;
  set.add(make("x", "X", 1));
  CHECK(set.contains("x"));
  CHECK_FALSE(set.contains("y"));
  CHECK(set.find("y") == nullptr);
  CHECK(set.at("x").title == "X");
  CHECK_THROWS_AS(set.at("y"), std::runtime_error);
}

TEST_CASE("labeled_ids returns the requested class, sorted") {
  ConceptSet set;
  set.add(make("b", "B", 1));
  set.add(make("a", "A", 1));
  set.add(make("c", "C", 0));
  Concept u;
  u.id = "u";
  u.title = "U";
  set.add(u);

  CHECK(set.labeled_ids(1) == std::vector<std::string>{"a", "b"});
  CHECK(set.labeled_ids(0) == std::vector<std::string>{"c"});
}

TEST_CASE("category_names is sorted and distinct") {
  ConceptSet set;
  Concept a = make("a", "A", 1);
  a.categories = {"history", "religion"};
  Concept b = make("b", "B", 1);
  b.categories = {"religion"};
  set.add(a);
  set.add(b);
  CHECK(set.category_names() ==
        std::vector<std::string>{"history", "religion"});
  CHECK(set.at("a").has_category("history"));
  CHECK_FALSE(set.at("b").has_category("history"));
}

TEST_CASE("mention_strings lists title then surface forms") {
  Concept c = make("a", "Alpha", 1);
  c.surface_forms = {"al", "alfa"};
  CHECK(c.mention_strings() == std::vector<std::string>{"Alpha", "al", "alfa"});
}

TEST_CASE("parse_concepts reads the tab-separated format") {
  std::istringstream in(
      "# comment\n"
      "\n"
      "a\tAlpha\t1\n"
      "b\tBeta\t0\t\thistory;religion\n"
      "c\tGamma\t\t7\n"
      "d\tDelta\t1\t10\tscience\tD;the d\n"
      "e\tEpsilon\n");
  ConceptSet set = parse_concepts(in, "concepts.tsv");
  REQUIRE(set.size() == 5);

  CHECK(set.at("a").label == 1);
  CHECK_FALSE(set.at("a").grade.has_value());

  CHECK(set.at("b").label == 0);
  CHECK(set.at("b").categories ==
        std::vector<std::string>{"history", "religion"});

  CHECK_FALSE(set.at("c").label.has_value());
  CHECK(set.at("c").grade == 7);

  CHECK(set.at("d").grade == 10);
  CHECK(set.at("d").surface_forms == std::vector<std::string>{"D", "the d"});

  CHECK_FALSE(set.at("e").label.has_value());
  CHECK(set.at("e").categories.empty());
}

TEST_CASE("parse_concepts errors name the stream and line") {
  std::istringstream one_field("loner\n");
  check_throws_containing(
      [&] { parse_concepts(one_field, "bad.tsv"); }, "bad.tsv:1");

  std::istringstream bad_label("a\tAlpha\ttwo\n");
  check_throws_containing(
      [&] { parse_concepts(bad_label, "bad.tsv"); }, "not an integer");

  std::istringstream dup(
      "a\tAlpha\t1\n"
      "a\tAgain\t0\n");
  check_throws_containing([&] { parse_concepts(dup, "dup.tsv"); },
                          "dup.tsv:2");

  std::istringstream label_range("a\tAlpha\t3\n");
  CHECK_THROWS_AS(parse_concepts(label_range, "x"), std::runtime_error);
}
