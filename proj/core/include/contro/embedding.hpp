#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "contro/concepts.hpp"

namespace contro {

/// word -> dense vector map with a fixed dimensionality. Immutable after
/// load; safe for shared concurrent reads. Components are stored as float,
/// all arithmetic downstream is double.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {}

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  bool empty() const { return index_.empty(); }

  /// Empty span if the word is absent.
  std::span<const float> find(std::string_view word) const;
  bool contains(std::string_view word) const { return !find(word).empty(); }

  /// Inserts or overrides; a vector of the wrong dimension throws.
  void insert(std::string_view word, std::span<const float> components);

  /// Number of words whose vector was overridden by a later duplicate.
  std::size_t overridden() const { return overridden_; }

  /// Loads the textual vector format: one line per word, the word followed
  /// by D whitespace-separated decimal numbers, D constant across lines.
  /// Later duplicates override earlier entries (counted). Errors name
  /// `stream_name` and the offending line.
  static EmbeddingTable load(std::istream& in, const std::string& stream_name);

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>
      index_;
  std::size_t overridden_ = 0;
};

struct ConceptVector {
  std::string concept_id;
  std::vector<double> vec;
  int covered_words = 0;  // how many of the title's words were in the table
};

/// Component-wise mean of the table vectors of the concept title's words;
/// words missing from the table are skipped. Returns nullopt when no word
/// is covered.
std::optional<ConceptVector> try_concept_embedding(const EmbeddingTable& table,
                                                   const Concept& c);

/// Throwing variant of try_concept_embedding ("no embedding" error).
ConceptVector concept_embedding(const EmbeddingTable& table,
                                const Concept& c);

/// dot(u,v) / (|u||v|). Throws on dimension mismatch or a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

}  // namespace contro
