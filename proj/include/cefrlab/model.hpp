#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cefrlab/cefr.hpp"

namespace cefrlab {

/// Row-major observations: one inner vector per instance.
using FeatureMatrix = std::vector<std::vector<double>>;

/// Per-dimension z-scoring. Population standard deviation; zero spread is
/// replaced by 1 so constant columns map to 0.
struct Scaler {
  std::vector<double> means;
  std::vector<double> stds;

  static Scaler fit(const FeatureMatrix& x);
  std::vector<double> transform(std::span<const double> x) const;
  std::size_t dimension() const { return means.size(); }
};

struct TrainOptions {
  double tolerance = 1e-6;     // sup-norm of the gradient
  int max_iterations = 500;
};

struct TrainingInfo {
  int iterations = 0;
  bool converged = false;
  double final_nll = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultRidge = 1e-8;
inline constexpr int kModelFormatVersion = 1;

/// Ridge-penalized multinomial logistic regression over standardized inputs.
/// weights is K x (D+1) row-major with the intercept in the last column; the
/// last class row is identically zero.
struct MlrModel {
  std::vector<CefrLabel> labels;
  std::vector<double> weights;
  double ridge = kDefaultRidge;
  Scaler scaler;
  std::vector<std::string> feature_names;
  TrainingInfo info;

  std::size_t classes() const { return labels.size(); }
  std::size_t dimension() const { return feature_names.size(); }
  double weight(std::size_t k, std::size_t j) const { return weights[k * (dimension() + 1) + j]; }

  /// Throws Error on a dimension mismatch.
  std::vector<double> predict_proba(std::span<const double> x) const;
  CefrLabel predict_label(std::span<const double> x) const;
};

/// Ridge least squares on the ordinal encoding A1=1 .. C1=5. weights holds D
/// standardized-space slopes followed by the intercept.
struct LinRegModel {
  std::vector<double> weights;
  double ridge = 0.0;
  Scaler scaler;
  std::vector<std::string> feature_names;

  std::size_t dimension() const { return feature_names.size(); }
  double predict(std::span<const double> x) const;

  /// Slopes and intercept in the units of the raw features.
  std::vector<double> raw_coefficients() const;
};

/// Predicts the most frequent training label with probability one.
struct MajorityModel {
  CefrLabel label = CefrLabel::A1;
  std::vector<CefrLabel> labels;  // all training labels, ascending
  std::vector<std::string> feature_names;

  std::vector<double> predict_proba(std::span<const double> x) const;
  CefrLabel predict_label(std::span<const double>) const { return label; }
};

/// Throws Error on fewer than two instances, a single class, non-finite input
/// or mismatched sizes. Non-convergence is reported in `info`, not thrown.
MlrModel train_mlr(const FeatureMatrix& x, std::span<const CefrLabel> y, double ridge = kDefaultRidge,
                   const TrainOptions& options = {}, std::vector<std::string> feature_names = {});

LinRegModel train_linreg(const FeatureMatrix& x, std::span<const CefrLabel> y, double ridge = 0.0,
                         std::vector<std::string> feature_names = {});

/// Regression on arbitrary real targets; train_linreg encodes labels and calls this.
LinRegModel train_linreg_values(const FeatureMatrix& x, std::span<const double> y, double ridge,
                                std::vector<std::string> feature_names = {});

/// Ties go to the lower level. Throws on empty input.
MajorityModel train_majority(std::span<const CefrLabel> y, std::vector<std::string> feature_names = {});

/// Index of the largest probability; the first (lowest level) wins ties.
std::size_t argmax_lowest(std::span<const double> probs);

enum class Learner { Mlr, LinReg, Majority };

std::string_view to_string(Learner l);
std::optional<Learner> parse_learner(std::string_view s);

using AnyModel = std::variant<MlrModel, LinRegModel, MajorityModel>;

const std::vector<std::string>& model_feature_names(const AnyModel& m);

/// Versioned JSON. Doubles are written in shortest round-trip form so a
/// reloaded model predicts bit-identically.
/// A non-empty `invocation` is stored alongside for provenance; loading ignores it.
void save_model(std::ostream& out, const AnyModel& model, const std::string& invocation = {});
void save_model_file(const std::string& path, const AnyModel& model, const std::string& invocation = {});
/// Throws FormatError on a version mismatch or a truncated/malformed document.
AnyModel load_model(std::istream& in);
AnyModel load_model_file(const std::string& path);

}  // namespace cefrlab
