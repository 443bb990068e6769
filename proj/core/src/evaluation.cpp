#include "contro/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "contro/io.hpp"
#include "contro/nn_estimator.hpp"
#include "contro/random.hpp"

namespace contro {

std::vector<std::string> FoldPlan::fold_ids(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignments)
    if (f == fold) ids.push_back(id);
  return ids;
}

std::vector<std::string> FoldPlan::complement_ids(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignments)
    if (f != fold) ids.push_back(id);
  return ids;
}

FoldPlan make_kfold_plan(const ConceptSet& concepts, int k,
                         std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("make_kfold_plan: k must be at least 2");
  std::vector<std::string> pos = concepts.labeled_ids(1);
  std::vector<std::string> neg = concepts.labeled_ids(0);
  if (pos.size() < static_cast<std::size_t>(k) ||
      neg.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument(
        "make_kfold_plan: k=" + std::to_string(k) +
        " exceeds a class size (" + std::to_string(pos.size()) +
        " positive, " + std::to_string(neg.size()) + " negative)");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  {
    std::mt19937_64 rng(mix_seed(seed, fnv1a64("kfold/pos")));
    deterministic_shuffle(pos, rng);
  }
  {
    std::mt19937_64 rng(mix_seed(seed, fnv1a64("kfold/neg")));
    deterministic_shuffle(neg, rng);
  }
  for (std::size_t i = 0; i < pos.size(); ++i)
    plan.assignments[pos[i]] = static_cast<int>(i % k);
  for (std::size_t i = 0; i < neg.size(); ++i)
    plan.assignments[neg[i]] = static_cast<int>(i % k);
  return plan;
}

std::map<std::string, int> median_split_binarize(
    const std::map<std::string, double>& scores) {
  if (scores.size() < 2)
    throw std::invalid_argument(
        "median_split_binarize: need at least 2 concepts");
  std::vector<std::pair<const std::string*, double>> order;
  order.reserve(scores.size());
  for (const auto& [id, score] : scores) order.emplace_back(&id, score);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return *a.first < *b.first;
  });
  const std::size_t n_positive = (order.size() + 1) / 2;
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    out[*order[i].first] = i < n_positive ? 1 : 0;
  return out;
}

double accuracy(const std::map<std::string, int>& predicted,
                const std::map<std::string, int>& gold) {
  if (predicted.empty() || predicted.size() != gold.size())
    throw std::invalid_argument("accuracy: key sets differ or are empty");
  std::size_t agree = 0;
  auto itp = predicted.begin();
  auto itg = gold.begin();
  for (; itp != predicted.end(); ++itp, ++itg) {
    if (itp->first != itg->first)
      throw std::invalid_argument("accuracy: key sets differ ('" + itp->first +
                                  "' vs '" + itg->first + "')");
    if (itp->second == itg->second) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(predicted.size());
}

LocoSplit leave_one_category_out_split(const ConceptSet& concepts,
                                       const std::string& held_out,
                                       std::uint64_t seed) {
  const std::vector<std::string> names = concepts.category_names();
  if (!std::binary_search(names.begin(), names.end(), held_out))
    throw std::invalid_argument("unknown category '" + held_out + "'");

  std::vector<std::string> test_pos, test_neg, train_pos, neg_free;
  for (const Concept& c : concepts.all()) {
    if (!c.label.has_value()) continue;
    const bool carries = c.has_category(held_out);
    if (*c.label == 1)
      (carries ? test_pos : train_pos).push_back(c.id);
    else
      (carries ? test_neg : neg_free).push_back(c.id);
  }
  std::sort(test_pos.begin(), test_pos.end());
  std::sort(test_neg.begin(), test_neg.end());
  std::sort(train_pos.begin(), train_pos.end());
  std::sort(neg_free.begin(), neg_free.end());

  if (test_pos.empty())
    throw std::runtime_error("category '" + held_out +
                             "' has no labeled controversial concepts");
  if (train_pos.empty())
    throw std::runtime_error("category '" + held_out +
                             "' covers every controversial concept; nothing "
                             "is left to train on");
  if (test_neg.size() > test_pos.size())
    throw std::runtime_error("category '" + held_out +
                             "' carries more negatives than positives; the "
                             "test set cannot be balanced");

  const std::size_t need_test = test_pos.size() - test_neg.size();
  if (neg_free.size() < need_test + train_pos.size())
    throw std::runtime_error(
        "not enough negative concepts to balance the '" + held_out +
        "' split: need " + std::to_string(need_test + train_pos.size()) +
        ", have " + std::to_string(neg_free.size()));

  std::mt19937_64 rng(mix_seed(seed, fnv1a64("loco/" + held_out)));
  std::vector<char> taken(neg_free.size(), 0);
  for (std::size_t i : sample_indices(neg_free.size(), need_test, rng)) {
    test_neg.push_back(neg_free[i]);
    taken[i] = 1;
  }
  std::vector<std::string> remaining;
  remaining.reserve(neg_free.size() - need_test);
  for (std::size_t i = 0; i < neg_free.size(); ++i)
    if (!taken[i]) remaining.push_back(neg_free[i]);
  std::vector<std::string> train_neg;
  for (std::size_t i : sample_indices(remaining.size(), train_pos.size(), rng))
    train_neg.push_back(remaining[i]);

  LocoSplit split;
  split.held_out = held_out;
  split.test_ids = std::move(test_pos);
  split.test_ids.insert(split.test_ids.end(), test_neg.begin(),
                        test_neg.end());
  split.train_ids = std::move(train_pos);
  split.train_ids.insert(split.train_ids.end(), train_neg.begin(),
                         train_neg.end());
  std::sort(split.test_ids.begin(), split.test_ids.end());
  std::sort(split.train_ids.begin(), split.train_ids.end());
  return split;
}

double pearson_correlation(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("pearson_correlation: length mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  if (x.size() < 2)
    throw std::invalid_argument(
        "pearson_correlation: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw std::invalid_argument("pearson_correlation: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kfold:
      return "kfold";
    case Protocol::loco:
      return "loco";
    case Protocol::graded:
      return "graded";
  }
  throw std::logic_error("unreachable protocol value");
}

std::string_view to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::nb:
      return "nb";
    case EstimatorKind::nn:
      return "nn";
    case EstimatorKind::nn_weighted:
      return "nn-weighted";
  }
  throw std::logic_error("unreachable estimator value");
}

Protocol protocol_from_string(std::string_view s) {
  if (s == "kfold") return Protocol::kfold;
  if (s == "loco") return Protocol::loco;
  if (s == "graded") return Protocol::graded;
  throw std::invalid_argument("unknown protocol '" + std::string(s) +
                              "' (valid: kfold, loco, graded)");
}

EstimatorKind estimator_from_string(std::string_view s) {
  if (s == "nb") return EstimatorKind::nb;
  if (s == "nn") return EstimatorKind::nn;
  if (s == "nn-weighted") return EstimatorKind::nn_weighted;
  throw std::invalid_argument("unknown estimator '" + std::string(s) +
                              "' (valid: nb, nn, nn-weighted)");
}

void write_report(std::ostream& out, const EvaluationReport& report) {
  out << "# contro-report v1\n";
  ConfigEcho echo = report.config_echo;
  std::stable_sort(echo.begin(), echo.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [key, value] : echo) out << "# " << key << "=" << value << "\n";
  out << "protocol\t" << to_string(report.protocol) << "\n";
  out << "seed\t" << report.seed << "\n";
  out << "folds\t" << report.per_fold.size() << "\n";
  for (const FoldResult& fold : report.per_fold)
    out << "fold\t" << fold.name << "\t" << format_fixed(fold.accuracy, 6)
        << "\t" << fold.n_test << "\t" << fold.fallback_scored << "\n";
  out << "aggregate_accuracy\t" << format_fixed(report.aggregate_accuracy, 6)
      << "\n";
  out << "pearson\t"
      << (report.pearson.has_value() ? format_double(*report.pearson) : "-")
      << "\n";
  out << "end\n";
}

ContextMap balance_training_sentences(const ContextMap& contexts,
                                      const ConceptSet& labels,
                                      std::uint64_t seed) {
  struct Ref {
    const std::string* id;
    const MaskedContext* ctx;
  };
  std::vector<Ref> pos, neg;
  ContextMap out;
  for (const auto& [id, ctxs] : contexts) {
    const Concept* c = labels.find(id);
    if (c == nullptr || !c->label.has_value()) continue;
    out[id];
    std::vector<Ref>& bucket = (*c->label == 1) ? pos : neg;
    for (const MaskedContext& ctx : ctxs) bucket.push_back({&id, &ctx});
  }
  auto keep_all = [&out](const std::vector<Ref>& refs) {
    for (const Ref& r : refs) out[*r.id].push_back(*r.ctx);
  };
  if (pos.size() == neg.size()) {
    keep_all(pos);
    keep_all(neg);
    return out;
  }
  const std::vector<Ref>& larger = pos.size() > neg.size() ? pos : neg;
  const std::vector<Ref>& smaller = pos.size() > neg.size() ? neg : pos;
  keep_all(smaller);
  std::mt19937_64 rng(mix_seed(seed, fnv1a64("balance")));
  for (std::size_t i : sample_indices(larger.size(), smaller.size(), rng))
    out[*larger[i].id].push_back(*larger[i].ctx);
  return out;
}

EvaluationReport graded_eval(const std::map<std::string, double>& scores,
                             const ConceptSet& graded, int positive_threshold,
                             std::size_t negative_sample, std::uint64_t seed) {
  if (positive_threshold < 1)
    throw std::invalid_argument(
        "graded_eval: positive_threshold must be at least 1");
  std::vector<double> grades, values;
  std::vector<std::string> positives, zeros;
  for (const auto& [id, score] : scores) {
    const Concept* c = graded.find(id);
    if (c == nullptr || !c->grade.has_value())
      throw std::invalid_argument("graded_eval: concept '" + id +
                                  "' has no grade");
    grades.push_back(static_cast<double>(*c->grade));
    values.push_back(score);
    if (*c->grade >= positive_threshold)
      positives.push_back(id);
    else if (*c->grade == 0)
      zeros.push_back(id);
  }
  const double r = pearson_correlation(grades, values);

  if (negative_sample > zeros.size())
    throw std::runtime_error("graded_eval: requested a sample of " +
                             std::to_string(negative_sample) +
                             " ungraded-zero concepts, only " +
                             std::to_string(zeros.size()) + " available");
  std::mt19937_64 rng(mix_seed(seed, fnv1a64("graded/negatives")));

  std::map<std::string, double> eval_scores;
  std::map<std::string, int> gold;
  for (const std::string& id : positives) {
    eval_scores[id] = scores.at(id);
    gold[id] = 1;
  }
  for (std::size_t i : sample_indices(zeros.size(), negative_sample, rng)) {
    eval_scores[zeros[i]] = scores.at(zeros[i]);
    gold[zeros[i]] = 0;
  }
  auto predicted = median_split_binarize(eval_scores);
  const double acc = accuracy(predicted, gold);

  EvaluationReport report;
  report.protocol = Protocol::graded;
  report.seed = seed;
  FoldResult fold;
  fold.name = "graded";
  fold.accuracy = acc;
  fold.n_test = eval_scores.size();
  fold.scores = std::move(eval_scores);
  fold.predicted = std::move(predicted);
  fold.gold = std::move(gold);
  report.per_fold.push_back(std::move(fold));
  report.aggregate_accuracy = acc;
  report.pearson = r;
  return report;
}

namespace {

bool is_zero_vector(const std::vector<double>& v) {
  for (double x : v)
    if (x != 0.0) return false;
  return true;
}

// Trains on train_ids and scores test_ids with the configured estimator;
// concepts that cannot be scored get the 0.5 fallback and are counted.
FoldResult score_split(const ExperimentData& data,
                       const ExperimentConfig& config,
                       const std::vector<std::string>& train_ids,
                       const std::vector<std::string>& test_ids,
                       std::string name, std::uint64_t split_seed) {
  const ConceptSet& concepts = *data.concepts;
  std::size_t train_pos = 0, train_neg = 0;
  for (const std::string& id : train_ids) {
    const Concept& c = concepts.at(id);
    if (!c.label.has_value()) continue;
    if (*c.label == 1)
      ++train_pos;
    else
      ++train_neg;
  }
  if (train_pos == 0 || train_neg == 0)
    throw std::runtime_error("split '" + name +
                             "' leaves a training class empty");

  FoldResult result;
  result.name = std::move(name);
  result.n_test = test_ids.size();

  if (config.estimator == EstimatorKind::nb) {
    ContextMap train_ctx;
    for (const std::string& id : train_ids) {
      auto it = data.contexts->find(id);
      if (it != data.contexts->end() && !it->second.empty())
        train_ctx[id] = it->second;
    }
    ContextMap balanced;
    const ContextMap* training = &train_ctx;
    if (config.balance_training_sentences) {
      balanced = balance_training_sentences(train_ctx, concepts, split_seed);
      training = &balanced;
    }
    NBModel model =
        train_nb(*training, concepts, config.alpha, config.mask_token);
    for (const std::string& id : test_ids) {
      auto it = data.contexts->find(id);
      if (it == data.contexts->end() || it->second.empty()) {
        result.scores[id] = 0.5;
        ++result.fallback_scored;
        continue;
      }
      result.scores[id] = nb_concept_score(model, it->second).score;
    }
  } else {
    const bool weighted = config.estimator == EstimatorKind::nn_weighted;
    ConceptSet train_set;
    for (const std::string& id : train_ids) train_set.add(concepts.at(id));
    NNModel model =
        build_nn_model(train_set, *data.embeddings, config.radius);
    model.weighted = weighted;
    for (const std::string& id : test_ids) {
      auto cv = try_concept_embedding(*data.embeddings, concepts.at(id));
      if (!cv.has_value() || is_zero_vector(cv->vec)) {
        result.scores[id] = model.fallback_score;
        ++result.fallback_scored;
        continue;
      }
      result.scores[id] = nn_score(model, *cv, weighted);
    }
  }

  for (const std::string& id : test_ids) {
    const Concept& c = concepts.at(id);
    if (!c.label.has_value())
      throw std::runtime_error("test concept '" + id + "' has no label");
    result.gold[id] = *c.label;
  }
  result.predicted = median_split_binarize(result.scores);
  result.accuracy = accuracy(result.predicted, result.gold);
  return result;
}

ConfigEcho build_echo(const ExperimentConfig& config) {
  ConfigEcho echo;
  echo.emplace_back("protocol", std::string(to_string(config.protocol)));
  echo.emplace_back("estimator", std::string(to_string(config.estimator)));
  echo.emplace_back("k", std::to_string(config.k));
  echo.emplace_back("alpha", format_double(config.alpha));
  echo.emplace_back("radius", format_double(config.radius));
  echo.emplace_back("mask_token", config.mask_token);
  echo.emplace_back("balance_training_sentences",
                    config.balance_training_sentences ? "1" : "0");
  echo.emplace_back("positive_threshold",
                    std::to_string(config.positive_threshold));
  echo.emplace_back("negative_sample", std::to_string(config.negative_sample));
  if (!config.held_out_categories.empty()) {
    std::string joined;
    for (const std::string& name : config.held_out_categories) {
      if (!joined.empty()) joined += ';';
      joined += name;
    }
    echo.emplace_back("held_out_categories", joined);
  }
  for (const auto& kv : config.extra_echo) echo.push_back(kv);
  return echo;
}

}  // namespace

EvaluationReport run_experiment(const ExperimentData& data,
                                const ExperimentConfig& config) {
  if (data.concepts == nullptr)
    throw std::invalid_argument("run_experiment: concepts are required");
  if (config.estimator == EstimatorKind::nb) {
    if (data.contexts == nullptr)
      throw std::invalid_argument(
          "run_experiment: the nb estimator requires contexts");
  } else if (data.embeddings == nullptr) {
    throw std::invalid_argument(
        "run_experiment: nn estimators require embeddings");
  }

  EvaluationReport report;
  report.protocol = config.protocol;
  report.seed = config.seed;
  report.config_echo = build_echo(config);

  switch (config.protocol) {
    case Protocol::kfold: {
      FoldPlan plan = make_kfold_plan(*data.concepts, config.k, config.seed);
      double sum = 0.0;
      for (int f = 0; f < plan.k; ++f) {
        const std::string name = std::to_string(f);
        const std::uint64_t split_seed =
            mix_seed(config.seed, fnv1a64("fold/" + name));
        FoldResult fold = score_split(data, config, plan.complement_ids(f),
                                      plan.fold_ids(f), name, split_seed);
        sum += fold.accuracy;
        report.per_fold.push_back(std::move(fold));
      }
      report.aggregate_accuracy = sum / static_cast<double>(plan.k);
      break;
    }
    case Protocol::loco: {
      std::vector<std::string> categories = config.held_out_categories;
      if (categories.empty()) {
        for (const std::string& name : data.concepts->category_names()) {
          bool carried_by_labeled = false;
          for (const Concept& c : data.concepts->all()) {
            if (c.label.has_value() && c.has_category(name)) {
              carried_by_labeled = true;
              break;
            }
          }
          if (carried_by_labeled) categories.push_back(name);
        }
        if (categories.empty())
          throw std::runtime_error(
              "run_experiment: no labeled concept carries a category");
      }
      double sum = 0.0;
      for (const std::string& name : categories) {
        LocoSplit split =
            leave_one_category_out_split(*data.concepts, name, config.seed);
        const std::uint64_t split_seed =
            mix_seed(config.seed, fnv1a64("loco-fold/" + name));
        FoldResult fold = score_split(data, config, split.train_ids,
                                      split.test_ids, name, split_seed);
        sum += fold.accuracy;
        report.per_fold.push_back(std::move(fold));
      }
      report.aggregate_accuracy =
          sum / static_cast<double>(report.per_fold.size());
      break;
    }
    case Protocol::graded: {
      if (data.graded_concepts == nullptr)
        throw std::invalid_argument(
            "run_experiment: the graded protocol requires graded concepts");
      if (config.estimator == EstimatorKind::nb &&
          data.graded_contexts == nullptr)
        throw std::invalid_argument(
            "run_experiment: graded scoring with nb requires graded "
            "contexts");

      std::map<std::string, double> scores;
      std::size_t fallback = 0;
      std::size_t n_positive = 0;
      if (config.estimator == EstimatorKind::nb) {
        ContextMap balanced;
        const ContextMap* training = data.contexts;
        if (config.balance_training_sentences) {
          balanced = balance_training_sentences(
              *data.contexts, *data.concepts,
              mix_seed(config.seed, fnv1a64("graded/train")));
          training = &balanced;
        }
        NBModel model =
            train_nb(*training, *data.concepts, config.alpha,
                     config.mask_token);
        for (const Concept& c : data.graded_concepts->all()) {
          if (!c.grade.has_value()) continue;
          if (*c.grade >= config.positive_threshold) ++n_positive;
          auto it = data.graded_contexts->find(c.id);
          if (it == data.graded_contexts->end() || it->second.empty()) {
            scores[c.id] = 0.5;
            ++fallback;
            continue;
          }
          scores[c.id] = nb_concept_score(model, it->second).score;
        }
      } else {
        const bool weighted = config.estimator == EstimatorKind::nn_weighted;
        NNModel model =
            build_nn_model(*data.concepts, *data.embeddings, config.radius);
        model.weighted = weighted;
        for (const Concept& c : data.graded_concepts->all()) {
          if (!c.grade.has_value()) continue;
          if (*c.grade >= config.positive_threshold) ++n_positive;
          auto cv = try_concept_embedding(*data.embeddings, c);
          if (!cv.has_value() || is_zero_vector(cv->vec)) {
            scores[c.id] = model.fallback_score;
            ++fallback;
            continue;
          }
          scores[c.id] = nn_score(model, *cv, weighted);
        }
      }
      const std::size_t sample = config.negative_sample != 0
                                     ? config.negative_sample
                                     : n_positive;
      EvaluationReport sub =
          graded_eval(scores, *data.graded_concepts,
                      config.positive_threshold, sample, config.seed);
      report.per_fold = std::move(sub.per_fold);
      report.per_fold.front().fallback_scored = fallback;
      report.aggregate_accuracy = sub.aggregate_accuracy;
      report.pearson = sub.pearson;
      break;
    }
  }
  return report;
}

}  // namespace contro
