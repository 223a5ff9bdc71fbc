#include "cefrlab/mlr_objective.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "cefrlab/cefr.hpp"

namespace cefrlab {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

// N x (D+1) design with a trailing column of ones.
RowMatrix augmented(const std::vector<double>& z, std::size_t n, std::size_t d) {
  RowMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d + 1));
  x.leftCols(static_cast<Eigen::Index>(d)) =
      ConstRowMap(z.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  x.col(static_cast<Eigen::Index>(d)).setOnes();
  return x;
}

// N x K scores with the pinned last class at zero.
RowMatrix scores(const RowMatrix& x, std::span<const double> params, std::size_t classes) {
  const auto free = static_cast<Eigen::Index>(classes - 1);
  ConstRowMap w(params.data(), free, x.cols());
  RowMatrix s = RowMatrix::Zero(x.rows(), static_cast<Eigen::Index>(classes));
  s.leftCols(free) = x * w.transpose();
  return s;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

MlrObjective::MlrObjective(std::vector<double> z, std::vector<std::size_t> y, std::size_t classes,
                           std::size_t dimension, double ridge)
    : z_(std::move(z)), y_(std::move(y)), classes_(classes), dim_(dimension), ridge_(ridge) {
  if (classes_ < 2) throw Error("objective needs at least two classes");
  if (z_.size() != y_.size() * dim_) throw Error("objective: input size mismatch");
  for (auto k : y_)
    if (k >= classes_) throw Error("objective: class index out of range");
}

std::vector<double> MlrObjective::probabilities(std::span<const double> params) const {
  const RowMatrix x = augmented(z_, y_.size(), dim_);
  RowMatrix s = scores(x, params, classes_);
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - m).exp();
    s.row(i) /= s.row(i).sum();
  }
  return std::vector<double>(s.data(), s.data() + s.size());
}

double MlrObjective::value(std::span<const double> params) const {
  const RowMatrix x = augmented(z_, y_.size(), dim_);
  const RowMatrix s = scores(x, params, classes_);
  double nll = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    const double lse = m + std::log((s.row(i).array() - m).exp().sum());
    nll += lse - s(i, static_cast<Eigen::Index>(y_[static_cast<std::size_t>(i)]));
  }
  double penalty = 0.0;
  for (std::size_t k = 0; k + 1 < classes_; ++k)
    for (std::size_t j = 0; j < dim_; ++j) {
      const double w = params[k * (dim_ + 1) + j];
      penalty += w * w;
    }
  return nll + ridge_ * penalty;
}

std::vector<double> MlrObjective::gradient(std::span<const double> params) const {
  const RowMatrix x = augmented(z_, y_.size(), dim_);
  const std::vector<double> p = probabilities(params);
  const auto n = static_cast<Eigen::Index>(y_.size());
  const auto free = static_cast<Eigen::Index>(classes_ - 1);
  RowMatrix resid(n, free);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < free; ++k)
      resid(i, k) = p[static_cast<std::size_t>(i) * classes_ + static_cast<std::size_t>(k)] -
                    (y_[static_cast<std::size_t>(i)] == static_cast<std::size_t>(k) ? 1.0 : 0.0);
  RowMatrix g = resid.transpose() * x;  // (K-1) x (D+1)
  for (Eigen::Index k = 0; k < free; ++k)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(dim_); ++j)
      g(k, j) += 2.0 * ridge_ * params[static_cast<std::size_t>(k) * (dim_ + 1) + static_cast<std::size_t>(j)];
  return std::vector<double>(g.data(), g.data() + g.size());
}

std::vector<double> MlrObjective::hessian(std::span<const double> params) const {
  const RowMatrix x = augmented(z_, y_.size(), dim_);
  const std::vector<double> p = probabilities(params);
  const auto n = static_cast<Eigen::Index>(y_.size());
  const auto cols = static_cast<Eigen::Index>(dim_ + 1);
  const auto free = static_cast<Eigen::Index>(classes_ - 1);
  const Eigen::Index total = free * cols;
  RowMatrix h = RowMatrix::Zero(total, total);
  Eigen::VectorXd w(n);
  for (Eigen::Index a = 0; a < free; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t row = static_cast<std::size_t>(i) * classes_;
        const double pa = p[row + static_cast<std::size_t>(a)];
        const double pb = p[row + static_cast<std::size_t>(b)];
        w(i) = pa * ((a == b ? 1.0 : 0.0) - pb);
      }
      RowMatrix block = x.transpose() * (x.array().colwise() * w.array()).matrix();
      h.block(a * cols, b * cols, cols, cols) = block;
      if (a != b) h.block(b * cols, a * cols, cols, cols) = block.transpose();
    }
    for (Eigen::Index j = 0; j + 1 < cols; ++j) h(a * cols + j, a * cols + j) += 2.0 * ridge_;
  }
  return std::vector<double>(h.data(), h.data() + h.size());
}

NewtonResult minimize_newton(const MlrObjective& objective, double tolerance, int max_iterations) {
  const auto p = static_cast<Eigen::Index>(objective.parameter_count());
  NewtonResult r;
  r.params.assign(static_cast<std::size_t>(p), 0.0);
  double f = objective.value(r.params);
  std::vector<double> g = objective.gradient(r.params);

  while (true) {
    r.gradient_norm = sup_norm(g);
    if (r.gradient_norm < tolerance) {
      r.converged = true;
      break;
    }
    if (r.iterations >= max_iterations) break;

    const std::vector<double> hv = objective.hessian(r.params);
    Eigen::Map<const RowMatrix> h(hv.data(), p, p);
    Eigen::Map<const Eigen::VectorXd> grad(g.data(), p);

    // Levenberg-style damping until the system is positive definite and the
    // step is a descent direction.
    Eigen::VectorXd step;
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    double damping = 0.0;
    bool ok = false;
    for (int attempt = 0; attempt < 30 && !ok; ++attempt) {
      RowMatrix a = h;
      a.diagonal().array() += damping;
      Eigen::LLT<RowMatrix> llt(a);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(-grad);
        ok = step.allFinite() && step.dot(grad) < 0.0;
      }
      damping = damping == 0.0 ? 1e-12 * scale : damping * 10.0;
    }
    if (!ok) {
      step = -grad;
    }

    const double slope = step.dot(grad);
    double t = 1.0;
    std::vector<double> trial(r.params.size());
    double f_trial = f;
    bool accepted = false;
    while (t > 1e-14) {
      for (Eigen::Index i = 0; i < p; ++i)
        trial[static_cast<std::size_t>(i)] = r.params[static_cast<std::size_t>(i)] + t * step(i);
      f_trial = objective.value(trial);
      if (std::isfinite(f_trial) && f_trial <= f + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++r.iterations;
    if (!accepted) break;  // no further decrease representable in double precision
    r.params = trial;
    f = f_trial;
    g = objective.gradient(r.params);
  }
  r.value = f;
  return r;
}

}  // namespace cefrlab
