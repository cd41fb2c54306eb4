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

#ifndef STOCHTR_PROBLEM_HPP
#define STOCHTR_PROBLEM_HPP

#include <cstdint>
#include <memory>
#include <optional>

#include "stochtr/dataset.hpp"
#include "stochtr/error.hpp"
#include "stochtr/types.hpp"

namespace stochtr {

enum class ProblemKind { logistic_nc, nls_nc, synthetic_quad, custom };

const char* problem_kind_name(ProblemKind kind) noexcept;

/// Stochastic oracle query counts. sfo counts single-component gradients,
/// sso single-component Hessians or Hessian-vector products, fval
/// single-component values.
struct OracleCounters {
  std::uint64_t sfo = 0;
  std::uint64_t sso = 0;
  std::uint64_t fval = 0;

  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

enum class BoundsProvenance { analytic, sampled, user };

struct LipschitzBounds {
  double L1 = 1.0;  // gradient Lipschitz constant
  double L2 = 1.0;  // Hessian Lipschitz constant
  BoundsProvenance provenance = BoundsProvenance::user;
};

/// Per-component data term. Implementations add `weight` times the requested
/// derivative into `out` so batches can accumulate without temporaries.
class ComponentModel {
 public:
  virtual ~ComponentModel() = default;

  virtual ProblemKind kind() const = 0;
  virtual std::size_t size() const = 0;
  virtual std::size_t dim() const = 0;

  virtual double value(std::size_t i, const Vector& x) const = 0;
  virtual void add_gradient(std::size_t i, const Vector& x, double weight,
                            Vector& out) const = 0;
  virtual void add_hessian(std::size_t i, const Vector& x, double weight,
                           Matrix& out) const = 0;
  virtual void add_hvp(std::size_t i, const Vector& x, const Vector& v,
                       double weight, Vector& out) const;

  /// Closed-form bounds for the data term alone, if the model has them.
  virtual std::optional<LipschitzBounds> analytic_bounds() const { return {}; }

  /// Dataset backing the model, if any.
  virtual const Dataset* dataset() const { return nullptr; }
};

/// R(w; alpha) = sum_j alpha w_j^2 / (1 + alpha w_j^2), its gradient and the
/// diagonal of its (diagonal) Hessian.
struct RegularizerDerivatives {
  double value = 0.0;
  Vector gradient;
  Vector hessian_diag;
};

RegularizerDerivatives regularizer_derivatives(const Vector& w, double alpha);

/// Sup over w of |d^3/dw^3 of alpha w^2/(1+alpha w^2)|.
double regularizer_third_derivative_bound(double alpha);

/// F(x) = (1/n) sum_i [data_weight * f_i(x) + reg_lambda * R(x; reg_alpha)].
class FiniteSumProblem {
 public:
  FiniteSumProblem(std::shared_ptr<const ComponentModel> model,
                   double reg_lambda = 0.0, double reg_alpha = 1.0,
                   double data_weight = 1.0);

  /// Logistic loss log(1 + exp(-y w.x)) plus the nonconvex regularizer.
  static FiniteSumProblem logistic(std::shared_ptr<const Dataset> data,
                                   double reg_lambda = 1e-3, double reg_alpha = 10.0);
  /// (1/2)(t - sigmoid(w.x))^2 with targets t = (y + 1) / 2.
  static FiniteSumProblem nonlinear_least_squares(std::shared_ptr<const Dataset> data,
                                                  double reg_lambda = 1e-3,
                                                  double reg_alpha = 10.0);
  /// f_i(x) = 0.5 ||x - a_i||^2 with a_i the rows of `centers`.
  static FiniteSumProblem quadratic(Matrix centers);

  std::size_t n() const { return model_->size(); }
  std::size_t d() const { return model_->dim(); }
  ProblemKind kind() const { return model_->kind(); }
  double reg_lambda() const { return reg_lambda_; }
  double reg_alpha() const { return reg_alpha_; }
  double data_weight() const { return data_weight_; }
  const ComponentModel& model() const { return *model_; }
  const Dataset* dataset() const { return model_->dataset(); }
  FiniteSumProblem with_data_weight(double weight) const {
    return FiniteSumProblem(model_, reg_lambda_, reg_alpha_, weight);
  }

  double batch_value(const Vector& x, IndexSpan batch, OracleCounters& c) const;
  Vector batch_gradient(const Vector& x, IndexSpan batch, OracleCounters& c) const;
  /// Symmetrized as (A + A^T) / 2 before returning.
  Matrix batch_hessian(const Vector& x, IndexSpan batch, OracleCounters& c) const;
  Vector batch_hvp(const Vector& x, IndexSpan batch, const Vector& v,
                   OracleCounters& c) const;

  double full_value(const Vector& x, OracleCounters& c) const;
  Vector full_gradient(const Vector& x, OracleCounters& c) const;
  Matrix full_hessian(const Vector& x, OracleCounters& c) const;
  Vector full_hvp(const Vector& x, const Vector& v, OracleCounters& c) const;

 private:
  void check_point(const Vector& x) const;
  void check_batch(IndexSpan batch) const;

  std::shared_ptr<const ComponentModel> model_;
  double reg_lambda_;
  double reg_alpha_;
  double data_weight_;
};

enum class LipschitzMode { analytic, sampled };

/// Analytic mode combines the model's closed form with the regularizer bound
/// (L1 += 2 lambda alpha, L2 += lambda sup|R'''|). Sampled mode takes the max
/// secant ratio over `trials` random (component, x, y) triples, times 2.
/// Both floor each constant at 1e-6.
LipschitzBounds lipschitz_bounds(const FiniteSumProblem& problem, LipschitzMode mode,
                                 std::uint64_t seed = 0, std::size_t trials = 200);

}  // namespace stochtr

#endif  // STOCHTR_PROBLEM_HPP
