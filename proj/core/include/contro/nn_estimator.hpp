#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "contro/concepts.hpp"
#include "contro/embedding.hpp"
#include "contro/nb_estimator.hpp"  // ConfigEcho

namespace contro {

/// Labeled concept vectors scored by neighborhood vote within a cosine
/// radius. Immutable after build; scoring is pure.
struct NNModel {
  struct Entry {
    std::string concept_id;
    int label = 0;   // binary
    double norm = 0; // cached |v|
  };

  std::size_t dimension = 0;
  double radius = 0.3;          // cosine-similarity threshold, in (-1, 1]
  double fallback_score = 0.5;  // returned when no neighbor is in radius
  bool weighted = false;        // scoring variant recorded at train time
  std::size_t skipped_no_embedding = 0;

  std::vector<Entry> entries;
  std::vector<double> vectors;  // entries.size() * dimension, row-major

  std::span<const double> vector_of(std::size_t i) const {
    return {vectors.data() + i * dimension, dimension};
  }
};

/// Builds a model from the training concepts carrying binary labels;
/// concepts without a usable embedding are skipped and counted. Throws if
/// radius is outside (-1, 1] or no training concept is embeddable.
NNModel build_nn_model(const ConceptSet& train_concepts,
                       const EmbeddingTable& table, double radius = 0.3);

struct NNScoreDetail {
  double score = 0.0;
  std::size_t neighbors = 0;
  std::size_t clamped_weights = 0;  // negative similarities clamped to 0
};

/// Neighbors are entries with cosine similarity >= radius, the query's own
/// concept id excluded. Unweighted: fraction of controversial neighbors.
/// Weighted: similarity-weighted fraction; with radius <= 0, in-radius
/// negative similarities are clamped to 0 in the weights (counted in the
/// result). Empty neighborhood returns fallback_score. Throws on dimension
/// mismatch or a zero-norm query.
NNScoreDetail nn_score_detail(const NNModel& model, const ConceptVector& query,
                              bool weighted);

inline double nn_score(const NNModel& model, const ConceptVector& query,
                       bool weighted) {
  return nn_score_detail(model, query, weighted).score;
}

/// Versioned flat text file: header (dimension, radius, fallback, variant),
/// then one record per entry (id, label, vector components).
void save_nn_model(std::ostream& out, const NNModel& model,
                   const ConfigEcho& config = {});
NNModel load_nn_model(std::istream& in, const std::string& stream_name);

}  // namespace contro
