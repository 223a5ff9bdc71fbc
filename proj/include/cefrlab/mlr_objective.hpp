#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cefrlab {

// Penalized negative log-likelihood of a K-class softmax model whose last
// class has all-zero weights.
//
//   NLL(W) = -sum_i log p(y_i | z_i) + ridge * sum of squared non-intercept weights
//
// Parameters are the free (K-1) x (D+1) rows, row-major, intercept last.
// Inputs are already standardized.
class MlrObjective {
 public:
  /// `z` is N x D row-major; `y` holds class indices in [0, K).
  MlrObjective(std::vector<double> z, std::vector<std::size_t> y, std::size_t classes,
               std::size_t dimension, double ridge);

  std::size_t parameter_count() const { return (classes_ - 1) * (dim_ + 1); }
  std::size_t instances() const { return y_.size(); }

  double value(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;

  /// Row-major P x P Hessian, P = parameter_count().
  std::vector<double> hessian(std::span<const double> params) const;

  /// N x K class probabilities, row-major.
  std::vector<double> probabilities(std::span<const double> params) const;

  const std::vector<double>& inputs() const { return z_; }
  const std::vector<std::size_t>& targets() const { return y_; }
  std::size_t classes() const { return classes_; }
  std::size_t dimension() const { return dim_; }
  double ridge() const { return ridge_; }

 private:
  std::vector<double> z_;
  std::vector<std::size_t> y_;
  std::size_t classes_;
  std::size_t dim_;
  double ridge_;
};

struct NewtonResult {
  std::vector<double> params;
  int iterations = 0;
  bool converged = false;
  double value = 0.0;
  double gradient_norm = 0.0;  // sup-norm at the returned point
};

/// Damped Newton iterations with Armijo backtracking, starting from zero.
NewtonResult minimize_newton(const MlrObjective& objective, double tolerance, int max_iterations);

}  // namespace cefrlab
