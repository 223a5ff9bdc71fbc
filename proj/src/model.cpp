#include "cefrlab/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cefrlab/mlr_objective.hpp"

namespace cefrlab {

namespace {

void check_training_input(const FeatureMatrix& x, std::size_t y_size) {
  if (x.size() != y_size) throw Error("feature rows and labels differ in length");
  if (x.size() < 2) throw Error("training needs at least two instances");
  const std::size_t d = x.front().size();
  for (const auto& row : x) {
    if (row.size() != d) throw Error("ragged feature matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw Error("non-finite feature value in training data");
  }
}

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t d) {
  if (names.empty()) {
    for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  }
  if (names.size() != d) throw Error("feature name count does not match the feature dimension");
  return names;
}

std::vector<double> softmax(std::vector<double> s) {
  const double m = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (auto& v : s) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : s) v /= sum;
  return s;
}

}  // namespace

Scaler Scaler::fit(const FeatureMatrix& x) {
  Scaler s;
  if (x.empty()) return s;
  const std::size_t d = x.front().size();
  const double n = static_cast<double>(x.size());
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) s.means[j] += row[j];
  for (auto& m : s.means) m /= n;
  for (const auto& row : x)
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = row[j] - s.means[j];
      s.stds[j] += dev * dev;
    }
  for (auto& sd : s.stds) {
    sd = std::sqrt(sd / n);
    if (!(sd > 0.0)) sd = 1.0;
  }
  return s;
}

std::vector<double> Scaler::transform(std::span<const double> x) const {
  if (x.size() != means.size())
    throw Error("dimension mismatch: expected " + std::to_string(means.size()) + " features, got " +
                std::to_string(x.size()));
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - means[j]) / stds[j];
  return z;
}

std::size_t argmax_lowest(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  return best;
}

std::vector<double> MlrModel::predict_proba(std::span<const double> x) const {
  const std::vector<double> z = scaler.transform(x);
  const std::size_t d = dimension();
  std::vector<double> s(classes(), 0.0);
  for (std::size_t k = 0; k < classes(); ++k) {
    double acc = weight(k, d);
    for (std::size_t j = 0; j < d; ++j) acc += weight(k, j) * z[j];
    s[k] = acc;
  }
  return softmax(std::move(s));
}

CefrLabel MlrModel::predict_label(std::span<const double> x) const {
  return labels[argmax_lowest(predict_proba(x))];
}

MlrModel train_mlr(const FeatureMatrix& x, std::span<const CefrLabel> y, double ridge,
                   const TrainOptions& options, std::vector<std::string> feature_names) {
  check_training_input(x, y.size());
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error("ridge must be a finite value >= 0");
  const std::set<CefrLabel> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw Error("training needs at least two distinct labels");

  MlrModel m;
  m.labels.assign(distinct.begin(), distinct.end());
  m.ridge = ridge;
  m.scaler = Scaler::fit(x);
  m.feature_names = default_names(std::move(feature_names), x.front().size());
  const std::size_t d = m.dimension();
  const std::size_t k = m.classes();

  std::vector<double> z;
  z.reserve(x.size() * d);
  for (const auto& row : x) {
    auto zr = m.scaler.transform(row);
    z.insert(z.end(), zr.begin(), zr.end());
  }
  std::vector<std::size_t> yi;
  yi.reserve(y.size());
  for (auto l : y)
    yi.push_back(static_cast<std::size_t>(
        std::lower_bound(m.labels.begin(), m.labels.end(), l) - m.labels.begin()));

  MlrObjective objective(std::move(z), std::move(yi), k, d, ridge);
  NewtonResult fit = minimize_newton(objective, options.tolerance, options.max_iterations);

  m.weights.assign(k * (d + 1), 0.0);
  std::copy(fit.params.begin(), fit.params.end(), m.weights.begin());
  m.info.iterations = fit.iterations;
  m.info.converged = fit.converged;
  m.info.final_nll = fit.value;
  if (!fit.converged) {
    m.info.warnings.push_back("optimizer did not converge after " + std::to_string(fit.iterations) +
                              " iterations (gradient sup-norm " + std::to_string(fit.gradient_norm) +
                              ")");
  }
  return m;
}

double LinRegModel::predict(std::span<const double> x) const {
  const std::vector<double> z = scaler.transform(x);
  double acc = weights.back();
  for (std::size_t j = 0; j < z.size(); ++j) acc += weights[j] * z[j];
  return acc;
}

std::vector<double> LinRegModel::raw_coefficients() const {
  const std::size_t d = dimension();
  std::vector<double> out(d + 1, 0.0);
  double intercept = weights[d];
  for (std::size_t j = 0; j < d; ++j) {
    out[j] = weights[j] / scaler.stds[j];
    intercept -= weights[j] * scaler.means[j] / scaler.stds[j];
  }
  out[d] = intercept;
  return out;
}

LinRegModel train_linreg_values(const FeatureMatrix& x, std::span<const double> y, double ridge,
                                std::vector<std::string> feature_names) {
  check_training_input(x, y.size());
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error("ridge must be a finite value >= 0");
  LinRegModel m;
  m.ridge = ridge;
  m.scaler = Scaler::fit(x);
  m.feature_names = default_names(std::move(feature_names), x.front().size());
  const auto n = static_cast<Eigen::Index>(x.size());
  const auto d = static_cast<Eigen::Index>(m.dimension());

  // Ridge as extra rows sqrt(ridge) * I on the slopes; a complete orthogonal
  // decomposition gives the minimum-norm solution when the design is singular.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + (ridge > 0.0 ? d : 0), d + 1);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    auto z = m.scaler.transform(x[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = z[static_cast<std::size_t>(j)];
    a(i, d) = 1.0;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  if (ridge > 0.0)
    for (Eigen::Index j = 0; j < d; ++j) a(n + j, j) = std::sqrt(ridge);
  Eigen::VectorXd w = a.completeOrthogonalDecomposition().solve(b);
  m.weights.assign(w.data(), w.data() + w.size());
  return m;
}

LinRegModel train_linreg(const FeatureMatrix& x, std::span<const CefrLabel> y, double ridge,
                         std::vector<std::string> feature_names) {
  const std::set<CefrLabel> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw Error("training needs at least two distinct labels");
  std::vector<double> targets;
  targets.reserve(y.size());
  for (auto l : y) targets.push_back(static_cast<double>(ordinal(l)));
  return train_linreg_values(x, targets, ridge, std::move(feature_names));
}

std::vector<double> MajorityModel::predict_proba(std::span<const double>) const {
  std::vector<double> p(labels.size(), 0.0);
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == label) p[k] = 1.0;
  return p;
}

MajorityModel train_majority(std::span<const CefrLabel> y, std::vector<std::string> feature_names) {
  if (y.empty()) throw Error("majority baseline needs at least one label");
  std::map<CefrLabel, std::size_t> counts;
  for (auto l : y) ++counts[l];
  MajorityModel m;
  std::size_t best = 0;
  for (const auto& [label, c] : counts) {
    m.labels.push_back(label);
    if (c > best) {  // ascending iteration keeps the lower level on ties
      best = c;
      m.label = label;
    }
  }
  m.feature_names = std::move(feature_names);
  return m;
}

std::string_view to_string(Learner l) {
  switch (l) {
    case Learner::Mlr: return "mlr";
    case Learner::LinReg: return "linreg";
    case Learner::Majority: return "majority";
  }
  return "mlr";
}

std::optional<Learner> parse_learner(std::string_view s) {
  if (s == "mlr") return Learner::Mlr;
  if (s == "linreg") return Learner::LinReg;
  if (s == "majority") return Learner::Majority;
  return std::nullopt;
}

const std::vector<std::string>& model_feature_names(const AnyModel& m) {
  return std::visit([](const auto& model) -> const std::vector<std::string>& { return model.feature_names; },
                    m);
}

}  // namespace cefrlab
