#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace contro {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

/// A titled entity whose controversiality is being estimated. `label` is the
/// binary ground truth (1 = controversial), `grade` an optional 0-10 degree.
struct Concept {
  std::string id;
  std::string title;
  std::vector<std::string> surface_forms;  // alternatives to the title
  std::optional<int> label;
  std::optional<int> grade;
  std::vector<std::string> categories;

  bool has_category(std::string_view name) const;

  /// Title plus alternative surface forms, as written in the concept list.
  std::vector<std::string> mention_strings() const;
};

class ConceptSet {
 public:
  /// Throws if the id is empty or already present, the label is not 0/1,
  /// or the grade is outside [0, 10].
  void add(Concept c);

  bool contains(std::string_view id) const { return find(id) != nullptr; }
  const Concept* find(std::string_view id) const;
  const Concept& at(std::string_view id) const;

  const std::vector<Concept>& all() const { return concepts_; }
  std::size_t size() const { return concepts_.size(); }
  bool empty() const { return concepts_.empty(); }

  /// ids of concepts carrying the given binary label, sorted.
  std::vector<std::string> labeled_ids(int label) const;

  /// Distinct category names across all concepts, sorted.
  std::vector<std::string> category_names() const;

 private:
  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>
      index_;
};

/// Parses the tab-separated concept list format:
///   id <TAB> title [<TAB> label(0/1) [<TAB> grade(0-10)
///      [<TAB> categories(a;b;c) [<TAB> surface_forms(x;y)]]]]
/// Blank lines and lines starting with '#' are skipped. Optional fields may
/// be left empty. Errors name `stream_name` and the line number.
ConceptSet parse_concepts(std::istream& in, const std::string& stream_name);

}  // namespace contro
