#include "contro/embedding.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>

#include "contro/corpus.hpp"

namespace contro {

std::span<const float> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return {};
  return {data_.data() + static_cast<std::size_t>(it->second) * dim_, dim_};
}

void EmbeddingTable::insert(std::string_view word,
                            std::span<const float> components) {
  if (dim_ == 0) dim_ = components.size();
  if (components.size() != dim_)
    throw std::runtime_error("embedding for '" + std::string(word) +
                             "' has dimension " +
                             std::to_string(components.size()) +
                             ", table has " + std::to_string(dim_));
  auto it = index_.find(word);
  if (it != index_.end()) {
    std::copy(components.begin(), components.end(),
              data_.begin() + static_cast<std::size_t>(it->second) * dim_);
    ++overridden_;
    return;
  }
  index_.emplace(std::string(word),
                 static_cast<std::uint32_t>(index_.size()));
  data_.insert(data_.end(), components.begin(), components.end());
}

EmbeddingTable EmbeddingTable::load(std::istream& in,
                                    const std::string& stream_name) {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  std::vector<float> components;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = stream_name + ":" + std::to_string(lineno);

    std::size_t sep = line.find_first_of(" \t");
    if (sep == std::string::npos || sep == 0)
      throw std::runtime_error(where +
                               ": expected a word followed by components");
    std::string_view word(line.data(), sep);

    components.clear();
    const char* p = line.data() + sep;
    const char* end = line.data() + line.size();
    while (p != end) {
      while (p != end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
      if (p == end) break;
      float value = 0.0f;
      auto [next, ec] = std::from_chars(p, end, value);
      if (ec != std::errc{})
        throw std::runtime_error(where + ": non-numeric component");
      components.push_back(value);
      p = next;
    }
    if (components.empty())
      throw std::runtime_error(where + ": no vector components");
    if (table.dim_ != 0 && components.size() != table.dim_)
      throw std::runtime_error(
          where + ": dimension mismatch: expected " +
          std::to_string(table.dim_) + " components, got " +
          std::to_string(components.size()));
    table.insert(word, components);
  }
  if (table.empty()) throw std::runtime_error(stream_name + ": empty embedding table");
  return table;
}

std::optional<ConceptVector> try_concept_embedding(const EmbeddingTable& table,
                                                   const Concept& c) {
  std::vector<std::string> words = tokenize(c.title);
  ConceptVector cv;
  cv.concept_id = c.id;
  cv.vec.assign(table.dimension(), 0.0);
  for (const std::string& w : words) {
    std::span<const float> v = table.find(w);
    if (v.empty()) continue;
    for (std::size_t i = 0; i < v.size(); ++i) cv.vec[i] += v[i];
    ++cv.covered_words;
  }
  if (cv.covered_words == 0) return std::nullopt;
  for (double& x : cv.vec) x /= cv.covered_words;
  return cv;
}

ConceptVector concept_embedding(const EmbeddingTable& table,
                                const Concept& c) {
  auto cv = try_concept_embedding(table, c);
  if (!cv)
    throw std::runtime_error("no embedding for concept '" + c.id +
                             "': no title word is in the table");
  return std::move(*cv);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine_similarity: dimension mismatch (" +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()) + ")");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (uu == 0.0 || vv == 0.0)
    throw std::invalid_argument(
        "cosine_similarity: undefined for a zero vector");
  return dot / (std::sqrt(uu) * std::sqrt(vv));
}

}  // namespace contro
