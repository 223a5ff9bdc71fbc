#include "cefrlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>

#include "cefrlab/rng.hpp"

namespace cefrlab {

ConfusionMatrix::ConfusionMatrix(std::vector<CefrLabel> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(std::vector<CefrLabel> labels, std::vector<std::size_t> counts)
    : labels_(std::move(labels)), counts_(std::move(counts)) {
  if (counts_.size() != labels_.size() * labels_.size())
    throw Error("confusion matrix needs " + std::to_string(labels_.size() * labels_.size()) + " cells");
}

ConfusionMatrix ConfusionMatrix::from_predictions(std::vector<CefrLabel> labels, std::span<const CefrLabel> gold,
                                                  std::span<const CefrLabel> predicted) {
  if (gold.size() != predicted.size()) throw Error("gold and predicted lengths differ");
  ConfusionMatrix cm(std::move(labels));
  for (std::size_t i = 0; i < gold.size(); ++i) cm.add(gold[i], predicted[i]);
  return cm;
}

std::size_t ConfusionMatrix::index_of(CefrLabel l) const {
  auto it = std::find(labels_.begin(), labels_.end(), l);
  if (it == labels_.end()) throw Error("label " + std::string(to_string(l)) + " not in confusion matrix");
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(CefrLabel gold, CefrLabel predicted, std::size_t n) {
  counts_[index_of(gold) * size() + index_of(predicted)] += n;
}

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::row_total(std::size_t gold) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < size(); ++p) s += at(gold, p);
  return s;
}

std::size_t ConfusionMatrix::column_total(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t g = 0; g < size(); ++g) s += at(g, predicted);
  return s;
}

MetricsReport matrix_metrics(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw Error("cannot compute metrics of an empty confusion matrix");
  MetricsReport r;
  r.n = total;
  std::size_t correct = 0, adjacent = 0;
  for (std::size_t g = 0; g < cm.size(); ++g)
    for (std::size_t p = 0; p < cm.size(); ++p) {
      if (g == p) correct += cm.at(g, p);
      if (std::abs(ordinal(cm.labels()[g]) - ordinal(cm.labels()[p])) <= 1) adjacent += cm.at(g, p);
    }
  const double n = static_cast<double>(total);
  r.accuracy = static_cast<double>(correct) / n;
  r.adjacent_accuracy = static_cast<double>(adjacent) / n;

  double weighted = 0.0, macro = 0.0;
  for (std::size_t k = 0; k < cm.size(); ++k) {
    ClassMetrics c;
    c.label = cm.labels()[k];
    c.support = cm.row_total(k);
    const std::size_t predicted = cm.column_total(k);
    const double tp = static_cast<double>(cm.at(k, k));
    c.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    c.recall = c.support ? tp / static_cast<double>(c.support) : 0.0;
    c.f = (c.precision + c.recall) > 0.0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
    weighted += static_cast<double>(c.support) * c.f;
    macro += c.f;
    r.per_class.push_back(c);
  }
  r.weighted_f = weighted / n;
  r.macro_f = cm.size() ? macro / static_cast<double>(cm.size()) : 0.0;
  return r;
}

double row_error_rate(const ConfusionMatrix& cm, CefrLabel gold) {
  const std::size_t g = cm.index_of(gold);
  const std::size_t row = cm.row_total(g);
  if (row == 0) return 0.0;
  return static_cast<double>(row - cm.at(g, g)) / static_cast<double>(row);
}

double rmse_prob(std::span<const std::vector<double>> probabilities, std::span<const std::size_t> gold_index) {
  if (probabilities.size() != gold_index.size()) throw Error("probability records and golds differ in length");
  if (probabilities.empty()) return 0.0;
  // Extended accumulation so fixtures like a uniform 0.2 row land on the
  // nearest double.
  long double sum = 0.0L;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const auto& p = probabilities[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      const long double d = static_cast<long double>(p[k]) - (k == gold_index[i] ? 1.0L : 0.0L);
      sum += d * d;
    }
    cells += p.size();
  }
  return static_cast<double>(std::sqrt(sum / static_cast<long double>(cells)));
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    if (fold_of[i] != fold) out.push_back(i);
  return out;
}

FoldPlan stratified_folds(std::span<const CefrLabel> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error("cross-validation needs k >= 2");
  if (k > labels.size())
    throw Error("k = " + std::to_string(k) + " exceeds the number of instances (" + std::to_string(labels.size()) + ")");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(labels.size(), 0);
  Rng rng(seed);
  const std::set<CefrLabel> classes(labels.begin(), labels.end());
  std::size_t next = 0;
  for (CefrLabel c : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);
    rng.shuffle(members);
    for (auto i : members) {
      plan.fold_of[i] = next;
      next = (next + 1) % k;
    }
  }
  return plan;
}

namespace {

FeatureMatrix subset_rows(const FeatureMatrix& x, const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(x[i]);
  return out;
}

std::vector<CefrLabel> subset_labels(std::span<const CefrLabel> y, const std::vector<std::size_t>& idx) {
  std::vector<CefrLabel> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(y[i]);
  return out;
}

void check_cv_input(const FeatureMatrix& x, std::span<const CefrLabel> labels, const FoldPlan& plan) {
  if (x.size() != labels.size()) throw Error("feature rows and labels differ in length");
  if (plan.fold_of.size() != labels.size()) throw Error("fold plan does not match the number of instances");
}

// Probabilities of `model_labels` spread onto `all_labels` (absent classes get 0).
std::vector<double> widen(const std::vector<double>& p, const std::vector<CefrLabel>& model_labels,
                          const std::vector<CefrLabel>& all_labels) {
  std::vector<double> out(all_labels.size(), 0.0);
  for (std::size_t k = 0; k < model_labels.size(); ++k) {
    auto it = std::find(all_labels.begin(), all_labels.end(), model_labels[k]);
    out[static_cast<std::size_t>(it - all_labels.begin())] = p[k];
  }
  return out;
}

}  // namespace

CvResult cross_validate(const FeatureMatrix& x, std::span<const CefrLabel> labels, const ModelSpec& spec,
                        const FoldPlan& plan) {
  return cross_validate(x, x, labels, spec, plan);
}

CvResult cross_validate(const FeatureMatrix& x_train, const FeatureMatrix& x_test, std::span<const CefrLabel> labels,
                        const ModelSpec& spec, const FoldPlan& plan) {
  check_cv_input(x_train, labels, plan);
  check_cv_input(x_test, labels, plan);
  const FeatureMatrix& x = x_test;
  if (spec.learner == Learner::LinReg) throw Error("cross_validate handles classifiers; use cross_validate_regression");
  CvResult result;
  const std::set<CefrLabel> distinct(labels.begin(), labels.end());
  result.labels.assign(distinct.begin(), distinct.end());
  result.matrix = ConfusionMatrix(result.labels);
  result.records.resize(labels.size());

  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    const auto test = plan.test_indices(fold);
    if (test.empty()) continue;
    const auto train = plan.train_indices(fold);
    const FeatureMatrix xtr = subset_rows(x_train, train);
    const std::vector<CefrLabel> ytr = subset_labels(labels, train);

    AnyModel model;
    if (spec.learner == Learner::Mlr) {
      const std::set<CefrLabel> train_classes(ytr.begin(), ytr.end());
      if (train_classes.size() < 2)
        throw Error("fold " + std::to_string(fold) + ": training part has fewer than two classes");
      MlrModel m = train_mlr(xtr, ytr, spec.ridge, spec.options, spec.feature_names);
      for (const auto& w : m.info.warnings) result.warnings.push_back("fold " + std::to_string(fold) + ": " + w);
      model = std::move(m);
    } else {
      model = train_majority(ytr, spec.feature_names);
    }

    for (auto i : test) {
      PredictionRecord& rec = result.records[i];
      rec.index = i;
      rec.gold = labels[i];
      std::visit(
          [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, LinRegModel>) {
              throw Error("unreachable");
            } else {
              rec.probabilities = widen(m.predict_proba(x[i]), m.labels, result.labels);
            }
          },
          model);
      rec.predicted = result.labels[argmax_lowest(rec.probabilities)];
      result.matrix.add(rec.gold, rec.predicted);
    }
  }

  result.report = matrix_metrics(result.matrix);
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> gold;
  for (const auto& r : result.records) {
    probs.push_back(r.probabilities);
    gold.push_back(result.matrix.index_of(r.gold));
  }
  result.report.rmse = rmse_prob(probs, gold);
  return result;
}

PearsonResult pearson(std::span<const double> predictions, std::span<const double> golds) {
  if (predictions.size() != golds.size()) throw Error("pearson: length mismatch");
  if (predictions.size() < 2) throw Error("pearson: need at least two points");
  const double n = static_cast<double>(predictions.size());
  const double mp = std::accumulate(predictions.begin(), predictions.end(), 0.0) / n;
  const double mg = std::accumulate(golds.begin(), golds.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double dp = predictions[i] - mp;
    const double dg = golds[i] - mg;
    sxy += dp * dg;
    sxx += dp * dp;
    syy += dg * dg;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return {0.0, true};
  return {sxy / std::sqrt(sxx * syy), false};
}

RegressionCvResult cross_validate_regression(const FeatureMatrix& x, std::span<const CefrLabel> labels, double ridge,
                                             const FoldPlan& plan) {
  check_cv_input(x, labels, plan);
  RegressionCvResult r;
  r.predictions.assign(labels.size(), 0.0);
  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    const auto test = plan.test_indices(fold);
    if (test.empty()) continue;
    const auto train = plan.train_indices(fold);
    LinRegModel m = train_linreg(subset_rows(x, train), subset_labels(labels, train), ridge);
    for (auto i : test) r.predictions[i] = m.predict(x[i]);
  }
  std::vector<double> golds;
  double sq = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    golds.push_back(static_cast<double>(ordinal(labels[i])));
    const double d = r.predictions[i] - golds.back();
    sq += d * d;
  }
  r.rmse = std::sqrt(sq / static_cast<double>(labels.size()));
  r.correlation = pearson(r.predictions, golds);
  if (r.correlation.degenerate) r.warnings.push_back("zero variance in predictions or targets; r reported as 0");
  return r;
}

namespace {

bool is_low(CefrLabel l) { return ordinal(l) <= ordinal(CefrLabel::B1); }

void finish(BinaryCollapse& b) {
  const double n = static_cast<double>(b.total());
  b.accuracy = n > 0 ? static_cast<double>(b.low_low + b.high_high) / n : 0.0;
  const std::size_t pred_low = b.low_low + b.high_low;
  const std::size_t pred_high = b.low_high + b.high_high;
  b.precision_low = pred_low ? static_cast<double>(b.low_low) / static_cast<double>(pred_low) : 0.0;
  b.precision_high = pred_high ? static_cast<double>(b.high_high) / static_cast<double>(pred_high) : 0.0;
}

void tally(BinaryCollapse& b, CefrLabel gold, CefrLabel pred, std::size_t n) {
  if (is_low(gold)) (is_low(pred) ? b.low_low : b.low_high) += n;
  else (is_low(pred) ? b.high_low : b.high_high) += n;
}

}  // namespace

BinaryCollapse collapse_binary(const ConfusionMatrix& cm) {
  BinaryCollapse b;
  for (std::size_t g = 0; g < cm.size(); ++g)
    for (std::size_t p = 0; p < cm.size(); ++p) tally(b, cm.labels()[g], cm.labels()[p], cm.at(g, p));
  finish(b);
  return b;
}

BinaryCollapse collapse_binary(std::span<const CefrLabel> gold, std::span<const CefrLabel> predicted) {
  if (gold.size() != predicted.size()) throw Error("gold and predicted lengths differ");
  BinaryCollapse b;
  for (std::size_t i = 0; i < gold.size(); ++i) tally(b, gold[i], predicted[i], 1);
  finish(b);
  return b;
}

Predictor::Predictor(const AnyModel& model) : model_(model) {
  for (const auto& name : model_feature_names(model_)) {
    auto idx = feature_index(name);
    if (!idx) throw Error("model feature '" + name + "' is not in the feature catalog");
    columns_.push_back(*idx);
  }
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinRegModel>) {
          labels_.assign(kClassLevels.begin(), kClassLevels.end());
        } else {
          labels_ = m.labels;
        }
      },
      model_);
}

std::vector<double> Predictor::probabilities(const FeatureVector& v) const {
  const std::vector<double> x = select_columns(v, columns_);
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinRegModel>) {
          // Regression output rounded onto the scale, reported one-hot.
          const double y = std::clamp(std::round(m.predict(x)), 1.0, 5.0);
          std::vector<double> p(5, 0.0);
          p[static_cast<std::size_t>(y) - 1] = 1.0;
          return p;
        } else {
          return m.predict_proba(x);
        }
      },
      model_);
}

CefrLabel Predictor::classify(const FeatureVector& v) const { return labels_[argmax_lowest(probabilities(v))]; }

DistributionTable sentence_distribution(const Predictor& sentence_model, std::span<const Document> documents,
                                        const ExtractionContext& ctx) {
  DistributionTable t;
  for (const auto& doc : documents) {
    if (ordinal(doc.level) > 5) continue;
    for (const auto& s : doc.sentences) {
      const CefrLabel pred = sentence_model.classify(extract_sentence_features(s, ctx));
      t.counts[class_index(doc.level)][class_index(pred)] += 1;
    }
  }
  for (std::size_t g = 0; g < 5; ++g) {
    const std::size_t row = std::accumulate(t.counts[g].begin(), t.counts[g].end(), std::size_t{0});
    for (std::size_t p = 0; p < 5; ++p)
      t.proportions[g][p] = row ? static_cast<double>(t.counts[g][p]) / static_cast<double>(row) : 0.0;
  }
  return t;
}

void write_metrics_tsv(std::ostream& out, const MetricsReport& r) {
  out << std::fixed << std::setprecision(6);
  out << "metric\tvalue\n";
  out << "n\t" << r.n << '\n';
  out << "accuracy\t" << r.accuracy << '\n';
  out << "adjacent_accuracy\t" << r.adjacent_accuracy << '\n';
  out << "weighted_f\t" << r.weighted_f << '\n';
  out << "macro_f\t" << r.macro_f << '\n';
  if (r.rmse) out << "rmse\t" << *r.rmse << '\n';
  for (const auto& c : r.per_class) {
    const auto l = to_string(c.label);
    out << "precision_" << l << '\t' << c.precision << '\n';
    out << "recall_" << l << '\t' << c.recall << '\n';
    out << "f_" << l << '\t' << c.f << '\n';
    out << "support_" << l << '\t' << c.support << '\n';
  }
  out << std::defaultfloat;
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "gold\\predicted";
  for (auto l : cm.labels()) out << ',' << to_string(l);
  out << '\n';
  for (std::size_t g = 0; g < cm.size(); ++g) {
    out << to_string(cm.labels()[g]);
    for (std::size_t p = 0; p < cm.size(); ++p) out << ',' << cm.at(g, p);
    out << '\n';
  }
}

void write_predictions_tsv(std::ostream& out, const std::vector<std::string>& unit_ids, const CvResult& cv) {
  out << "unit_id\tgold\tpredicted";
  for (auto l : cv.labels) out << "\tp_" << to_string(l);
  out << '\n' << std::fixed << std::setprecision(6);
  for (const auto& r : cv.records) {
    out << (r.index < unit_ids.size() ? unit_ids[r.index] : std::to_string(r.index)) << '\t' << to_string(r.gold)
        << '\t' << to_string(r.predicted);
    for (double p : r.probabilities) out << '\t' << p;
    out << '\n';
  }
  out << std::defaultfloat;
}

void write_distribution_csv(std::ostream& out, const DistributionTable& t) {
  out << "document_level";
  for (auto l : kClassLevels) out << ",pred_" << to_string(l);
  for (auto l : kClassLevels) out << ",n_" << to_string(l);
  out << '\n' << std::fixed << std::setprecision(6);
  for (std::size_t g = 0; g < 5; ++g) {
    out << to_string(kClassLevels[g]);
    for (std::size_t p = 0; p < 5; ++p) out << ',' << t.proportions[g][p];
    for (std::size_t p = 0; p < 5; ++p) out << ',' << t.counts[g][p];
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace cefrlab
