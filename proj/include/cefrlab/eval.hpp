#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cefrlab/cefr.hpp"
#include "cefrlab/corpus.hpp"
#include "cefrlab/features.hpp"
#include "cefrlab/model.hpp"

namespace cefrlab {

/// Rows are gold labels, columns predictions, in `labels` order. The label
/// order is arbitrary; adjacency is judged on the ordinal level values.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<CefrLabel> labels);
  ConfusionMatrix(std::vector<CefrLabel> labels, std::vector<std::size_t> counts);

  static ConfusionMatrix from_predictions(std::vector<CefrLabel> labels, std::span<const CefrLabel> gold,
                                          std::span<const CefrLabel> predicted);

  void add(CefrLabel gold, CefrLabel predicted, std::size_t n = 1);

  std::size_t size() const { return labels_.size(); }
  const std::vector<CefrLabel>& labels() const { return labels_; }
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * size() + predicted]; }
  std::size_t total() const;
  std::size_t row_total(std::size_t gold) const;
  std::size_t column_total(std::size_t predicted) const;
  std::size_t index_of(CefrLabel l) const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<CefrLabel> labels_;
  std::vector<std::size_t> counts_;
};

struct ClassMetrics {
  CefrLabel label = CefrLabel::A1;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  std::size_t support = 0;
};

struct MetricsReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  double adjacent_accuracy = 0.0;  // |gold - predicted| <= 1 counts as correct
  std::vector<ClassMetrics> per_class;
  double weighted_f = 0.0;         // support-weighted
  double macro_f = 0.0;
  std::optional<double> rmse;      // only when probabilities are available
};

/// Throws Error when the matrix is empty.
MetricsReport matrix_metrics(const ConfusionMatrix& cm);

/// Error rate of one gold row: off-diagonal share of that row.
double row_error_rate(const ConfusionMatrix& cm, CefrLabel gold);

/// sqrt of the mean over instances and classes of (p - onehot)^2.
double rmse_prob(std::span<const std::vector<double>> probabilities, std::span<const std::size_t> gold_index);

struct FoldPlan {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;  // per instance

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Each class is shuffled with `seed` and dealt round-robin, the dealing
/// position carrying over between classes so fold sizes stay balanced.
FoldPlan stratified_folds(std::span<const CefrLabel> labels, std::size_t k, std::uint64_t seed = kDefaultSeed);

struct ModelSpec {
  Learner learner = Learner::Mlr;
  double ridge = kDefaultRidge;
  TrainOptions options;
  std::vector<std::string> feature_names;
};

struct PredictionRecord {
  std::size_t index = 0;
  CefrLabel gold = CefrLabel::A1;
  CefrLabel predicted = CefrLabel::A1;
  std::vector<double> probabilities;  // over CvResult::labels
};

struct CvResult {
  std::vector<CefrLabel> labels;
  ConfusionMatrix matrix{{}};
  MetricsReport report;
  std::vector<PredictionRecord> records;  // ordered by instance index
  std::vector<std::string> warnings;
};

/// Pools the held-out predictions of every fold into one matrix. Classifiers
/// only (mlr, majority). Throws when a training part has fewer than two
/// classes (mlr) or dimensions disagree.
CvResult cross_validate(const FeatureMatrix& x, std::span<const CefrLabel> labels, const ModelSpec& spec,
                        const FoldPlan& plan);

/// Same, with training rows taken from `x_train` and held-out rows from
/// `x_test` (for features whose value depends on how the reference level is
/// chosen at training versus prediction time).
CvResult cross_validate(const FeatureMatrix& x_train, const FeatureMatrix& x_test, std::span<const CefrLabel> labels,
                        const ModelSpec& spec, const FoldPlan& plan);

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // zero variance on either side; r reported as 0
};

/// Sample correlation. Throws on length mismatch or fewer than two points.
PearsonResult pearson(std::span<const double> predictions, std::span<const double> golds);

struct RegressionCvResult {
  std::vector<double> predictions;  // per instance, unclamped
  PearsonResult correlation;
  double rmse = 0.0;                // on the ordinal scale
  std::vector<std::string> warnings;
};

RegressionCvResult cross_validate_regression(const FeatureMatrix& x, std::span<const CefrLabel> labels,
                                             double ridge, const FoldPlan& plan);

/// A1..B1 vs B2..C1.
struct BinaryCollapse {
  std::size_t low_low = 0, low_high = 0, high_low = 0, high_high = 0;  // gold -> predicted
  double accuracy = 0.0;
  double precision_low = 0.0;
  double precision_high = 0.0;

  std::size_t total() const { return low_low + low_high + high_low + high_high; }
};

BinaryCollapse collapse_binary(const ConfusionMatrix& cm);
BinaryCollapse collapse_binary(std::span<const CefrLabel> gold, std::span<const CefrLabel> predicted);

/// Applies a stored model to full feature vectors, selecting the model's
/// columns by name.
class Predictor {
 public:
  explicit Predictor(const AnyModel& model);

  /// Labels the probabilities refer to.
  const std::vector<CefrLabel>& labels() const { return labels_; }
  std::vector<double> probabilities(const FeatureVector& v) const;
  CefrLabel classify(const FeatureVector& v) const;

 private:
  AnyModel model_;
  std::vector<std::size_t> columns_;
  std::vector<CefrLabel> labels_;
};

struct DistributionTable {
  std::array<std::array<std::size_t, 5>, 5> counts{};  // [document level][predicted level]
  std::array<std::array<double, 5>, 5> proportions{};  // rows sum to 1, or 0 for absent levels
};

/// Classifies every sentence of every document with a sentence-level model.
DistributionTable sentence_distribution(const Predictor& sentence_model, std::span<const Document> documents,
                                        const ExtractionContext& ctx);

// Report writers. Numbers are written with fixed precision so reruns are
// byte-identical.
void write_metrics_tsv(std::ostream& out, const MetricsReport& r);
void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);
void write_predictions_tsv(std::ostream& out, const std::vector<std::string>& unit_ids, const CvResult& cv);
void write_distribution_csv(std::ostream& out, const DistributionTable& t);

}  // namespace cefrlab
