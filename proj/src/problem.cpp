// Copyright 2026 The stochtr Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stochtr/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stochtr/error.hpp"

namespace stochtr {

namespace {

constexpr double kBoundFloor = 1e-6;
// sup |s(1-s)(1-2s)| for the logistic sigmoid s.
const double kSigmoidSecondBound = 1.0 / (6.0 * std::sqrt(3.0));

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

enum class Link { logistic, nls };

struct LossDerivs {
  double value;
  double d1;
  double d2;
};

// Generalized linear component: f_i(w) = loss(y_i, w . x_i).
class LinearModel final : public ComponentModel {
 public:
  LinearModel(std::shared_ptr<const Dataset> data, Link link)
      : data_(std::move(data)), link_(link) {
    require(data_ != nullptr, ErrorCode::argument, "null dataset");
    validate(*data_);
    require(data_->n >= 1 && data_->d >= 1, ErrorCode::argument,
            "problem needs n >= 1 and d >= 1");
  }

  ProblemKind kind() const override {
    return link_ == Link::logistic ? ProblemKind::logistic_nc : ProblemKind::nls_nc;
  }
  std::size_t size() const override { return data_->n; }
  std::size_t dim() const override { return data_->d; }
  const Dataset* dataset() const override { return data_.get(); }

  double value(std::size_t i, const Vector& x) const override {
    return derivs(i, data_->dot(i, x), 0).value;
  }

  void add_gradient(std::size_t i, const Vector& x, double weight,
                    Vector& out) const override {
    const double s = weight * derivs(i, data_->dot(i, x), 1).d1;
    for (const auto& e : data_->rows[i]) out[e.index] += s * e.value;
  }

  void add_hessian(std::size_t i, const Vector& x, double weight,
                   Matrix& out) const override {
    const double s = weight * derivs(i, data_->dot(i, x), 2).d2;
    const auto& row = data_->rows[i];
    for (const auto& a : row) {
      const double sa = s * a.value;
      for (const auto& b : row) out(a.index, b.index) += sa * b.value;
    }
  }

  void add_hvp(std::size_t i, const Vector& x, const Vector& v, double weight,
               Vector& out) const override {
    const double s = weight * derivs(i, data_->dot(i, x), 2).d2 * data_->dot(i, v);
    for (const auto& e : data_->rows[i]) out[e.index] += s * e.value;
  }

  std::optional<LipschitzBounds> analytic_bounds() const override {
    const double r = data_->max_row_norm();
    LipschitzBounds b;
    b.provenance = BoundsProvenance::analytic;
    if (link_ == Link::logistic) {
      // |l''| <= 1/4, |l'''| <= sup|s(1-s)(1-2s)|.
      b.L1 = 0.25 * r * r;
      b.L2 = kSigmoidSecondBound * r * r * r;
    } else {
      // l'' = p'^2 - (t-p) p'', l''' = 3 p' p'' - (t-p) p''' with |t-p| <= 1,
      // |p'| <= 1/4, |p''| <= 1/(6 sqrt 3), |p'''| <= 1/8.
      b.L1 = (1.0 / 16.0 + kSigmoidSecondBound) * r * r;
      b.L2 = (0.75 * kSigmoidSecondBound + 0.125) * r * r * r;
    }
    return b;
  }

 private:
  // order limits which derivatives are needed; value is always filled.
  LossDerivs derivs(std::size_t i, double z, int order) const {
    const double y = data_->labels[i];
    LossDerivs out{};
    if (link_ == Link::logistic) {
      out.value = softplus(-y * z);
      if (order >= 1) {
        const double sneg = sigmoid(-y * z);
        out.d1 = -y * sneg;
        out.d2 = sneg * (1.0 - sneg);
      }
    } else {
      const double t = 0.5 * (y + 1.0);
      const double p = sigmoid(z);
      const double resid = t - p;
      out.value = 0.5 * resid * resid;
      if (order >= 1) {
        const double dp = p * (1.0 - p);
        const double ddp = dp * (1.0 - 2.0 * p);
        out.d1 = -resid * dp;
        out.d2 = dp * dp - resid * ddp;
      }
    }
    return out;
  }

  std::shared_ptr<const Dataset> data_;
  Link link_;
};

class QuadraticModel final : public ComponentModel {
 public:
  explicit QuadraticModel(Matrix centers) : centers_(std::move(centers)) {
    require(centers_.rows() >= 1 && centers_.cols() >= 1, ErrorCode::argument,
            "quadratic problem needs n >= 1 and d >= 1");
    require(centers_.allFinite(), ErrorCode::domain, "non-finite centers");
  }

  ProblemKind kind() const override { return ProblemKind::synthetic_quad; }
  std::size_t size() const override { return centers_.rows(); }
  std::size_t dim() const override { return centers_.cols(); }

  double value(std::size_t i, const Vector& x) const override {
    return 0.5 * (x - centers_.row(i).transpose()).squaredNorm();
  }
  void add_gradient(std::size_t i, const Vector& x, double weight,
                    Vector& out) const override {
    out += weight * (x - centers_.row(i).transpose());
  }
  void add_hessian(std::size_t, const Vector&, double weight,
                   Matrix& out) const override {
    out.diagonal().array() += weight;
  }
  void add_hvp(std::size_t, const Vector&, const Vector& v, double weight,
               Vector& out) const override {
    out += weight * v;
  }
  std::optional<LipschitzBounds> analytic_bounds() const override {
    return LipschitzBounds{1.0, 0.0, BoundsProvenance::analytic};
  }

 private:
  Matrix centers_;
};

}  // namespace

const char* problem_kind_name(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::logistic_nc: return "logistic_nc";
    case ProblemKind::nls_nc: return "nls_nc";
    case ProblemKind::synthetic_quad: return "synthetic_quad";
    case ProblemKind::custom: return "custom";
  }
  return "unknown";
}

void ComponentModel::add_hvp(std::size_t i, const Vector& x, const Vector& v,
                             double weight, Vector& out) const {
  Matrix h = Matrix::Zero(dim(), dim());
  add_hessian(i, x, 1.0, h);
  out += weight * (h * v);
}

RegularizerDerivatives regularizer_derivatives(const Vector& w, double alpha) {
  require(alpha > 0.0, ErrorCode::argument, "alpha must be positive");
  require(w.allFinite(), ErrorCode::domain, "non-finite input to regularizer");
  RegularizerDerivatives r;
  r.gradient.resize(w.size());
  r.hessian_diag.resize(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    const double aw2 = alpha * w[j] * w[j];
    const double q = 1.0 + aw2;
    r.value += aw2 / q;
    r.gradient[j] = 2.0 * alpha * w[j] / (q * q);
    r.hessian_diag[j] = 2.0 * alpha * (1.0 - 3.0 * aw2) / (q * q * q);
  }
  return r;
}

double regularizer_third_derivative_bound(double alpha) {
  // R''' = -24 alpha^2 w (1 - alpha w^2) / (1 + alpha w^2)^4; with
  // t = sqrt(alpha) w the extremum of t (1 - t^2) / (1 + t^2)^4 sits at
  // t^2 = 1 - 2 / sqrt(5).
  const double t2 = 1.0 - 2.0 / std::sqrt(5.0);
  const double t = std::sqrt(t2);
  const double g = t * (1.0 - t2) / std::pow(1.0 + t2, 4);
  return 24.0 * std::pow(alpha, 1.5) * g;
}

FiniteSumProblem::FiniteSumProblem(std::shared_ptr<const ComponentModel> model,
                                   double reg_lambda, double reg_alpha,
                                   double data_weight)
    : model_(std::move(model)),
      reg_lambda_(reg_lambda),
      reg_alpha_(reg_alpha),
      data_weight_(data_weight) {
  require(model_ != nullptr, ErrorCode::argument, "null component model");
  require(model_->size() >= 1 && model_->dim() >= 1, ErrorCode::argument,
          "problem needs n >= 1 and d >= 1");
  require(std::isfinite(reg_lambda) && reg_lambda >= 0.0, ErrorCode::argument,
          "reg_lambda must be >= 0");
  require(std::isfinite(reg_alpha) && reg_alpha > 0.0, ErrorCode::argument,
          "reg_alpha must be > 0");
  require(std::isfinite(data_weight) && data_weight >= 0.0, ErrorCode::argument,
          "data_weight must be >= 0");
}

FiniteSumProblem FiniteSumProblem::logistic(std::shared_ptr<const Dataset> data,
                                            double reg_lambda, double reg_alpha) {
  return FiniteSumProblem(std::make_shared<LinearModel>(std::move(data), Link::logistic),
                          reg_lambda, reg_alpha);
}

FiniteSumProblem FiniteSumProblem::nonlinear_least_squares(
    std::shared_ptr<const Dataset> data, double reg_lambda, double reg_alpha) {
  return FiniteSumProblem(std::make_shared<LinearModel>(std::move(data), Link::nls),
                          reg_lambda, reg_alpha);
}

FiniteSumProblem FiniteSumProblem::quadratic(Matrix centers) {
  return FiniteSumProblem(std::make_shared<QuadraticModel>(std::move(centers)));
}

void FiniteSumProblem::check_point(const Vector& x) const {
  require(static_cast<std::size_t>(x.size()) == d(), ErrorCode::argument,
          "point has wrong dimension");
  require(x.allFinite(), ErrorCode::domain, "non-finite point");
}

void FiniteSumProblem::check_batch(IndexSpan batch) const {
  require(!batch.empty(), ErrorCode::argument, "empty batch");
  const std::size_t n_ = n();
  for (auto i : batch) require(i < n_, ErrorCode::argument, "batch index out of range");
}

double FiniteSumProblem::batch_value(const Vector& x, IndexSpan batch,
                                     OracleCounters& c) const {
  check_point(x);
  check_batch(batch);
  double s = 0.0;
  for (auto i : batch) s += model_->value(i, x);
  c.fval += batch.size();
  double v = data_weight_ * s / static_cast<double>(batch.size());
  if (reg_lambda_ > 0.0) v += reg_lambda_ * regularizer_derivatives(x, reg_alpha_).value;
  return v;
}

Vector FiniteSumProblem::batch_gradient(const Vector& x, IndexSpan batch,
                                        OracleCounters& c) const {
  check_point(x);
  check_batch(batch);
  Vector g = Vector::Zero(d());
  const double w = data_weight_ / static_cast<double>(batch.size());
  for (auto i : batch) model_->add_gradient(i, x, w, g);
  c.sfo += batch.size();
  if (reg_lambda_ > 0.0) g += reg_lambda_ * regularizer_derivatives(x, reg_alpha_).gradient;
  return g;
}

Matrix FiniteSumProblem::batch_hessian(const Vector& x, IndexSpan batch,
                                       OracleCounters& c) const {
  check_point(x);
  check_batch(batch);
  Matrix h = Matrix::Zero(d(), d());
  const double w = data_weight_ / static_cast<double>(batch.size());
  for (auto i : batch) model_->add_hessian(i, x, w, h);
  c.sso += batch.size();
  if (reg_lambda_ > 0.0)
    h.diagonal() += reg_lambda_ * regularizer_derivatives(x, reg_alpha_).hessian_diag;
  Matrix sym = 0.5 * (h + h.transpose());
  return sym;
}

Vector FiniteSumProblem::batch_hvp(const Vector& x, IndexSpan batch, const Vector& v,
                                   OracleCounters& c) const {
  check_point(x);
  check_batch(batch);
  require(static_cast<std::size_t>(v.size()) == d(), ErrorCode::argument,
          "direction has wrong dimension");
  require(v.allFinite(), ErrorCode::domain, "non-finite direction");
  Vector out = Vector::Zero(d());
  const double w = data_weight_ / static_cast<double>(batch.size());
  for (auto i : batch) model_->add_hvp(i, x, v, w, out);
  c.sso += batch.size();
  if (reg_lambda_ > 0.0)
    out += reg_lambda_ *
           regularizer_derivatives(x, reg_alpha_).hessian_diag.cwiseProduct(v);
  return out;
}

namespace {
std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}
}  // namespace

double FiniteSumProblem::full_value(const Vector& x, OracleCounters& c) const {
  return batch_value(x, all_indices(n()), c);
}
Vector FiniteSumProblem::full_gradient(const Vector& x, OracleCounters& c) const {
  return batch_gradient(x, all_indices(n()), c);
}
Matrix FiniteSumProblem::full_hessian(const Vector& x, OracleCounters& c) const {
  return batch_hessian(x, all_indices(n()), c);
}
Vector FiniteSumProblem::full_hvp(const Vector& x, const Vector& v,
                                  OracleCounters& c) const {
  return batch_hvp(x, all_indices(n()), v, c);
}

LipschitzBounds lipschitz_bounds(const FiniteSumProblem& problem, LipschitzMode mode,
                                 std::uint64_t seed, std::size_t trials) {
  LipschitzBounds out;
  if (mode == LipschitzMode::analytic) {
    auto data = problem.model().analytic_bounds();
    if (!data)
      fail(ErrorCode::unsupported,
           std::string("no analytic Lipschitz bounds for kind ") +
               problem_kind_name(problem.kind()));
    out.L1 = problem.data_weight() * data->L1 +
             2.0 * problem.reg_lambda() * problem.reg_alpha();
    out.L2 = problem.data_weight() * data->L2 +
             problem.reg_lambda() * regularizer_third_derivative_bound(problem.reg_alpha());
    out.provenance = BoundsProvenance::analytic;
  } else {
    require(problem.n() >= 2, ErrorCode::argument, "sampled bounds need n >= 2");
    require(trials >= 1, ErrorCode::argument, "sampled bounds need trials >= 1");
    CounterRng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t d = problem.d();
    Vector x(d), y(d);
    OracleCounters scratch;
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t i = rng.uniform_index(problem.n());
      for (std::size_t j = 0; j < d; ++j) x[j] = normal(rng);
      for (std::size_t j = 0; j < d; ++j) y[j] = normal(rng);
      const double dist = (x - y).norm();
      if (dist == 0.0) continue;
      const std::size_t one[1] = {i};
      const Vector gx = problem.batch_gradient(x, one, scratch);
      const Vector gy = problem.batch_gradient(y, one, scratch);
      l1 = std::max(l1, (gx - gy).norm() / dist);
      const Matrix diff = problem.batch_hessian(x, one, scratch) -
                          problem.batch_hessian(y, one, scratch);
      Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
      l2 = std::max(l2, es.eigenvalues().cwiseAbs().maxCoeff() / dist);
    }
    out.L1 = 2.0 * l1;
    out.L2 = 2.0 * l2;
    out.provenance = BoundsProvenance::sampled;
  }
  out.L1 = std::max(out.L1, kBoundFloor);
  out.L2 = std::max(out.L2, kBoundFloor);
  return out;
}

}  // namespace stochtr
