#include "contro/nb_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "contro/io.hpp"

namespace contro {

NBModel train_nb(const ContextMap& contexts, const ConceptSet& labels,
                 double alpha, std::string_view mask_token) {
  if (!(alpha > 0.0))
    throw std::invalid_argument("train_nb: alpha must be positive");
  NBModel model;
  model.alpha = alpha;
  model.mask_token = std::string(mask_token);
  std::size_t ctx_pos = 0;
  std::size_t ctx_neg = 0;
  for (const auto& [concept_id, ctxs] : contexts) {
    const Concept* c = labels.find(concept_id);
    if (c == nullptr || !c->label.has_value()) continue;
    const bool positive = (*c->label == 1);
    for (const MaskedContext& ctx : ctxs) {
      if (positive)
        ++ctx_pos;
      else
        ++ctx_neg;
      for (const std::string& tok : ctx.tokens) {
        if (tok == model.mask_token) continue;
        NBModel::Counts& counts = model.counts[tok];
        if (positive) {
          ++counts.pos;
          ++model.total_pos;
        } else {
          ++counts.neg;
          ++model.total_neg;
        }
      }
    }
  }
  if (ctx_pos == 0 || ctx_neg == 0)
    throw std::runtime_error(std::string("train_nb: no contexts for the ") +
                             (ctx_pos == 0 ? "positive" : "negative") +
                             " class");
  return model;
}

double nb_sentence_score(const NBModel& model, const MaskedContext& context) {
  const double v = static_cast<double>(model.vocab_size());
  const double denom_pos =
      static_cast<double>(model.total_pos) + model.alpha * v;
  const double denom_neg =
      static_cast<double>(model.total_neg) + model.alpha * v;
  double log_pos = std::log(model.prior_pos);
  double log_neg = std::log(1.0 - model.prior_pos);
  std::size_t scorable = 0;
  for (const std::string& tok : context.tokens) {
    if (tok == model.mask_token) continue;
    auto it = model.counts.find(tok);
    if (it == model.counts.end()) continue;
    ++scorable;
    log_pos += std::log(
        (static_cast<double>(it->second.pos) + model.alpha) / denom_pos);
    log_neg += std::log(
        (static_cast<double>(it->second.neg) + model.alpha) / denom_neg);
  }
  if (scorable == 0) return 0.5;
  const double m = std::max(log_pos, log_neg);
  const double ep = std::exp(log_pos - m);
  const double en = std::exp(log_neg - m);
  return ep / (ep + en);
}

ConceptScore nb_concept_score(const NBModel& model,
                              const std::vector<MaskedContext>& contexts) {
  if (contexts.empty())
    throw std::invalid_argument("nb_concept_score: empty context list");
  ConceptScore result;
  result.concept_id = contexts.front().concept_id;
  double sum = 0.0;
  result.per_sentence.reserve(contexts.size());
  for (const MaskedContext& ctx : contexts) {
    const double s = nb_sentence_score(model, ctx);
    result.per_sentence.push_back({ctx.source_ref, s});
    sum += s;
  }
  result.n_sentences = contexts.size();
  result.score = sum / static_cast<double>(contexts.size());
  return result;
}

void save_nb_model(std::ostream& out, const NBModel& model,
                   const ConfigEcho& config) {
  out << "contro-nb-model v1\n";
  for (const auto& [key, value] : config)
    out << "# " << key << "=" << value << "\n";
  out << "alpha\t" << format_double(model.alpha) << "\n";
  out << "prior_pos\t" << format_double(model.prior_pos) << "\n";
  out << "mask_token\t" << model.mask_token << "\n";
  out << "total_pos\t" << model.total_pos << "\n";
  out << "total_neg\t" << model.total_neg << "\n";
  out << "vocab\t" << model.counts.size() << "\n";
  std::vector<const std::pair<const std::string, NBModel::Counts>*> rows;
  rows.reserve(model.counts.size());
  for (const auto& entry : model.counts) rows.push_back(&entry);
  std::sort(rows.begin(), rows.end(),
            [](const auto* a, const auto* b) { return a->first < b->first; });
  for (const auto* row : rows)
    out << row->first << "\t" << row->second.pos << "\t" << row->second.neg
        << "\n";
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

NBModel load_nb_model(std::istream& in, const std::string& stream_name) {
  std::size_t lineno = 0;
  if (next_line(in, stream_name, lineno) != "contro-nb-model v1")
    throw std::runtime_error(stream_name + ": not a contro-nb-model v1 file");
  NBModel model;
  model.alpha = parse_double(
      expect_field(next_line(in, stream_name, lineno), "alpha", stream_name,
                   lineno),
      "alpha");
  if (!(model.alpha > 0.0))
    throw std::runtime_error(stream_name + ": alpha must be positive");
  model.prior_pos = parse_double(
      expect_field(next_line(in, stream_name, lineno), "prior_pos",
                   stream_name, lineno),
      "prior_pos");
  if (model.prior_pos != 0.5)
    throw std::runtime_error(stream_name + ": prior_pos must be 0.5");
  model.mask_token = expect_field(next_line(in, stream_name, lineno),
                                  "mask_token", stream_name, lineno);
  model.total_pos =
      parse_ll(expect_field(next_line(in, stream_name, lineno), "total_pos",
                            stream_name, lineno),
               "total_pos");
  model.total_neg =
      parse_ll(expect_field(next_line(in, stream_name, lineno), "total_neg",
                            stream_name, lineno),
               "total_neg");
  const long long vocab =
      parse_ll(expect_field(next_line(in, stream_name, lineno), "vocab",
                            stream_name, lineno),
               "vocab");
  if (vocab < 0 || model.total_pos < 0 || model.total_neg < 0)
    throw std::runtime_error(stream_name + ": negative count");
  model.counts.reserve(static_cast<std::size_t>(vocab));
  long long sum_pos = 0;
  long long sum_neg = 0;
  for (long long i = 0; i < vocab; ++i) {
    const std::string line = next_line(in, stream_name, lineno);
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error(stream_name + ":" + std::to_string(lineno) +
                               ": expected word, pos count, neg count");
    NBModel::Counts counts;
    counts.pos = parse_ll(fields[1], "pos count");
    counts.neg = parse_ll(fields[2], "neg count");
    if (counts.pos < 0 || counts.neg < 0)
      throw std::runtime_error(stream_name + ":" + std::to_string(lineno) +
                               ": negative count");
    if (!model.counts.emplace(std::string(fields[0]), counts).second)
      throw std::runtime_error(stream_name + ":" + std::to_string(lineno) +
                               ": duplicate word '" + std::string(fields[0]) +
                               "'");
    sum_pos += counts.pos;
    sum_neg += counts.neg;
  }
  if (next_line(in, stream_name, lineno) != "end")
    throw std::runtime_error(stream_name + ": missing end marker");
  if (sum_pos != model.total_pos || sum_neg != model.total_neg)
    throw std::runtime_error(stream_name +
                             ": count totals do not match word rows");
  return model;
}

}  // namespace contro
