#include "contro/nn_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "contro/io.hpp"

namespace contro {

NNModel build_nn_model(const ConceptSet& train_concepts,
                       const EmbeddingTable& table, double radius) {
  if (!(radius > -1.0 && radius <= 1.0))
    throw std::invalid_argument("build_nn_model: radius must be in (-1, 1]");
  NNModel model;
  model.radius = radius;
  model.dimension = table.dimension();
  for (const Concept& c : train_concepts.all()) {
    if (!c.label.has_value()) continue;
    auto cv = try_concept_embedding(table, c);
    if (!cv) {
      ++model.skipped_no_embedding;
      continue;
    }
    double norm_sq = 0.0;
    for (double x : cv->vec) norm_sq += x * x;
    if (norm_sq == 0.0) {
      ++model.skipped_no_embedding;
      continue;
    }
    NNModel::Entry entry;
    entry.concept_id = c.id;
    entry.label = *c.label;
    entry.norm = std::sqrt(norm_sq);
    model.entries.push_back(std::move(entry));
    model.vectors.insert(model.vectors.end(), cv->vec.begin(), cv->vec.end());
  }
  if (model.entries.empty())
    throw std::runtime_error(
        "build_nn_model: no labeled concept has an embedding");
  return model;
}

NNScoreDetail nn_score_detail(const NNModel& model, const ConceptVector& query,
                              bool weighted) {
  if (query.vec.size() != model.dimension)
    throw std::invalid_argument(
        "nn_score: query has dimension " + std::to_string(query.vec.size()) +
        ", model has " + std::to_string(model.dimension));
  double query_norm_sq = 0.0;
  for (double x : query.vec) query_norm_sq += x * x;
  if (query_norm_sq == 0.0)
    throw std::invalid_argument("nn_score: zero-norm query for '" +
                                query.concept_id + "'");
  const double query_norm = std::sqrt(query_norm_sq);

  NNScoreDetail detail;
  double weight_sum = 0.0;
  double weighted_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < model.entries.size(); ++i) {
    const NNModel::Entry& entry = model.entries[i];
    if (entry.concept_id == query.concept_id) continue;
    std::span<const double> v = model.vector_of(i);
    double dot = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) dot += v[d] * query.vec[d];
    const double sim = dot / (entry.norm * query_norm);
    if (sim < model.radius) continue;
    ++detail.neighbors;
    if (entry.label == 1) ++n_pos;
    if (weighted) {
      double w = sim;
      if (w < 0.0) {
        w = 0.0;
        ++detail.clamped_weights;
      }
      weight_sum += w;
      if (entry.label == 1) weighted_pos += w;
    }
  }
  if (detail.neighbors == 0) {
    detail.score = model.fallback_score;
    return detail;
  }
  if (weighted) {
    if (weight_sum == 0.0) {
      detail.score = model.fallback_score;
      return detail;
    }
    detail.score = weighted_pos / weight_sum;
  } else {
    detail.score =
        static_cast<double>(n_pos) / static_cast<double>(detail.neighbors);
  }
  return detail;
}

void save_nn_model(std::ostream& out, const NNModel& model,
                   const ConfigEcho& config) {
  out << "contro-nn-model v1\n";
  for (const auto& [key, value] : config)
    out << "# " << key << "=" << value << "\n";
  out << "dimension\t" << model.dimension << "\n";
  out << "radius\t" << format_double(model.radius) << "\n";
  out << "fallback\t" << format_double(model.fallback_score) << "\n";
  out << "weighted\t" << (model.weighted ? 1 : 0) << "\n";
  out << "entries\t" << model.entries.size() << "\n";
  for (std::size_t i = 0; i < model.entries.size(); ++i) {
    const NNModel::Entry& entry = model.entries[i];
    out << entry.concept_id << "\t" << entry.label;
    for (double x : model.vector_of(i)) out << "\t" << format_double(x);
    out << "\n";
  }
  out << "end\n";
}

namespace {

std::string next_line(std::istream& in, const std::string& name,
                      std::size_t& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("# ", 0) == 0) continue;
    return line;
  }
  throw std::runtime_error(name + ": truncated model file");
}

std::string expect_field(std::string_view line, std::string_view key,
                         const std::string& name, std::size_t lineno) {
  std::size_t tab = line.find('\t');
  if (tab == std::string_view::npos || line.substr(0, tab) != key)
    throw std::runtime_error(name + ":" + std::to_string(lineno) +
                             ": expected '" + std::string(key) + "' field");
  return std::string(line.substr(tab + 1));
}

}  // namespace

NNModel load_nn_model(std::istream& in, const std::string& stream_name) {
  std::size_t lineno = 0;
  if (next_line(in, stream_name, lineno) != "contro-nn-model v1")
    throw std::runtime_error(stream_name + ": not a contro-nn-model v1 file");
  NNModel model;
  const long long dimension =
      parse_ll(expect_field(next_line(in, stream_name, lineno), "dimension",
                            stream_name, lineno),
               "dimension");
  if (dimension <= 0)
    throw std::runtime_error(stream_name + ": dimension must be positive");
  model.dimension = static_cast<std::size_t>(dimension);
  model.radius = parse_double(
      expect_field(next_line(in, stream_name, lineno), "radius", stream_name,
                   lineno),
      "radius");
  if (!(model.radius > -1.0 && model.radius <= 1.0))
    throw std::runtime_error(stream_name + ": radius must be in (-1, 1]");
  model.fallback_score = parse_double(
      expect_field(next_line(in, stream_name, lineno), "fallback", stream_name,
                   lineno),
      "fallback");
  const long long weighted =
      parse_ll(expect_field(next_line(in, stream_name, lineno), "weighted",
                            stream_name, lineno),
               "weighted");
  if (weighted != 0 && weighted != 1)
    throw std::runtime_error(stream_name + ": weighted must be 0 or 1");
  model.weighted = (weighted == 1);
  const long long n_entries =
      parse_ll(expect_field(next_line(in, stream_name, lineno), "entries",
                            stream_name, lineno),
               "entries");
  if (n_entries <= 0)
    throw std::runtime_error(stream_name + ": model must have entries");
  model.entries.reserve(static_cast<std::size_t>(n_entries));
  model.vectors.reserve(static_cast<std::size_t>(n_entries) * model.dimension);
  for (long long i = 0; i < n_entries; ++i) {
    const std::string line = next_line(in, stream_name, lineno);
    auto fields = split(line, '\t');
    if (fields.size() != 2 + model.dimension)
      throw std::runtime_error(
          stream_name + ":" + std::to_string(lineno) + ": expected " +
          std::to_string(2 + model.dimension) + " fields, got " +
          std::to_string(fields.size()));
    NNModel::Entry entry;
    entry.concept_id = std::string(fields[0]);
    const long long label = parse_ll(fields[1], "label");
    if (label != 0 && label != 1)
      throw std::runtime_error(stream_name + ":" + std::to_string(lineno) +
                               ": label must be 0 or 1");
    entry.label = static_cast<int>(label);
    double norm_sq = 0.0;
    for (std::size_t d = 0; d < model.dimension; ++d) {
      const double x = parse_double(fields[2 + d], "component");
      model.vectors.push_back(x);
      norm_sq += x * x;
    }
    if (norm_sq == 0.0)
      throw std::runtime_error(stream_name + ":" + std::to_string(lineno) +
                               ": zero vector for '" + entry.concept_id + "'");
    entry.norm = std::sqrt(norm_sq);
    model.entries.push_back(std::move(entry));
  }
  if (next_line(in, stream_name, lineno) != "end")
    throw std::runtime_error(stream_name + ": missing end marker");
  return model;
}

}  // namespace contro
