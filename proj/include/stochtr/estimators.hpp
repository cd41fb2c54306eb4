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

#ifndef STOCHTR_ESTIMATORS_HPP
#define STOCHTR_ESTIMATORS_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "stochtr/problem.hpp"
#include "stochtr/types.hpp"

namespace stochtr {

/// Constant in the gradient sample-size rules.
inline constexpr double kGradientSampleConstant = 1152.0;

enum class ScheduleMode { theory, practical };
enum class HessOption { I, II };

/// Epoch length p2 and sample sizes of the recurrent Hessian estimator.
/// Option I restarts each epoch from the full Hessian; Option II from an
/// s2_prime subsample. Sizes are capped at n.
struct HessSchedule {
  HessOption option = HessOption::I;
  std::size_t p2 = 1;
  std::size_t s2 = 1;
  std::size_t s2_prime = 1;
  ScheduleMode mode = ScheduleMode::theory;
  double kappa = 1.0;
};

struct GradSchedule {
  int grad_case = 1;
  std::size_t p1 = 1;
  std::size_t s1 = 1;
  ScheduleMode mode = ScheduleMode::theory;
  double kappa = 1.0;
};

struct HessScheduleInputs {
  std::size_t n = 1;
  std::size_t d = 1;
  double epsilon = 1e-3;
  double L1 = 1.0;
  double L2 = 1.0;
  double delta = 0.1;
  double K0 = 1.0;
  ScheduleMode mode = ScheduleMode::theory;
  double kappa = 1.0;
  // Option I's log factor: log(d K0 / delta) by default, log(d / delta) if set.
  bool option1_log_without_k0 = false;
  // Skips the cost comparison and uses this option's formulas.
  std::optional<HessOption> force_option;
};

/// Option I: p2 = ceil(sqrt n), s2 = ceil(32 sqrt(n) log(d K0/delta)).
/// Option II: p2 = ceil(L1 / (2 sqrt(eps L2))),
///   s2' = ceil(16 L1^2 / (eps L2) log(d K0/delta)),
///   s2 = ceil(32 L1 / sqrt(eps L2) log(d K0/delta)).
/// The option with the smaller uncapped 2 s2 wins, ties going to Option I.
/// Practical mode multiplies sample sizes by kappa before the ceiling.
HessSchedule hessian_schedule(const HessScheduleInputs& in);

/// p1 = max{1, ceil(sqrt(n eps L2 / (c L1^2 log(K0/delta))))},
/// s1 = min{n, ceil(sqrt(c n L1^2 log(K0/delta) / (eps L2)))}.
/// Practical mode scales s1 by kappa and p1 by 1/kappa so s1 p1 stays ~n.
GradSchedule gradient_schedule_case1(std::size_t n, double epsilon, double L1,
                                     double L2, double delta, double K0,
                                     ScheduleMode mode = ScheduleMode::theory,
                                     double kappa = 1.0);

/// p1 = ceil(n^(1/4)), s1 = min{n, ceil(n^(3/4) c log(K0/delta))}.
GradSchedule gradient_schedule_case2(std::size_t n, double delta, double K0,
                                     ScheduleMode mode = ScheduleMode::theory,
                                     double kappa = 1.0);

/// Draws a batch of `size` indices; a size of n or more uses every component
/// exactly once instead of sampling.
void draw_batch(IndexSampler& sampler, std::size_t n, std::size_t size,
                std::vector<std::size_t>& out);

class GradientEstimator {
 public:
  virtual ~GradientEstimator() = default;
  virtual Vector step(const FiniteSumProblem& problem, const Vector& x,
                      OracleCounters& counters, IndexSampler& sampler) = 0;
};

class HessianEstimator {
 public:
  virtual ~HessianEstimator() = default;
  virtual Matrix step(const FiniteSumProblem& problem, const Vector& x,
                      OracleCounters& counters, IndexSampler& sampler) = 0;
};

class ExactGradient final : public GradientEstimator {
 public:
  Vector step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;
};

class ExactHessian final : public HessianEstimator {
 public:
  Matrix step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;
};

/// Fresh uniform batch every call, no recurrence.
class SubsampledGradient final : public GradientEstimator {
 public:
  explicit SubsampledGradient(std::size_t batch) : batch_(batch) {}
  Vector step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;

 private:
  std::size_t batch_;
  std::vector<std::size_t> idx_;
};

class SubsampledHessian final : public HessianEstimator {
 public:
  explicit SubsampledHessian(std::size_t batch) : batch_(batch) {}
  Matrix step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;

 private:
  std::size_t batch_;
  std::vector<std::size_t> idx_;
};

struct GradEstimatorState {
  std::size_t k_in_epoch = 0;
  bool initialized = false;
  Vector g_prev;
  Vector x_prev;
  Vector x_ref;   // corrected estimator only
  Matrix H_ref;   // full Hessian at x_ref, corrected estimator only
  bool has_ref = false;
};

/// g^k = grad f(x^k; G) - grad f(x^{k-1}; G) + g^{k-1}, restarted from the
/// full gradient every p1 steps.
class SpiderGradient final : public GradientEstimator {
 public:
  explicit SpiderGradient(GradSchedule schedule);
  Vector step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;
  const GradEstimatorState& state() const { return state_; }
  const GradSchedule& schedule() const { return schedule_; }
  const std::vector<std::size_t>& last_batch() const { return idx_; }

 private:
  GradSchedule schedule_;
  GradEstimatorState state_;
  std::vector<std::size_t> idx_;
};

/// SPIDER recurrence plus the correction
/// c^k = [H(x_ref) - hess f(x_ref; G)] (x^k - x^{k-1}), where the full Hessian
/// at the epoch reference point is computed once per epoch (n sso).
class CorrectedGradient final : public GradientEstimator {
 public:
  explicit CorrectedGradient(GradSchedule schedule);
  Vector step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;
  const GradEstimatorState& state() const { return state_; }
  const GradSchedule& schedule() const { return schedule_; }
  /// Test hook: drop the cached reference Hessian to exercise the state check.
  void drop_reference() { state_.has_ref = false; }

 private:
  GradSchedule schedule_;
  GradEstimatorState state_;
  std::vector<std::size_t> idx_;
};

struct HessEstimatorState {
  std::size_t k_in_epoch = 0;
  bool initialized = false;
  Matrix H_prev;
  Vector x_prev;
};

/// H^k = hess f(x^k; S) - hess f(x^{k-1}; S) + H^{k-1} on one shared batch S,
/// restarted every p2 steps per the schedule's option.
class RecurrentHessian final : public HessianEstimator {
 public:
  explicit RecurrentHessian(HessSchedule schedule);
  Matrix step(const FiniteSumProblem& problem, const Vector& x, OracleCounters& counters,
              IndexSampler& sampler) override;
  const HessEstimatorState& state() const { return state_; }
  const HessSchedule& schedule() const { return schedule_; }

 private:
  HessSchedule schedule_;
  HessEstimatorState state_;
  std::vector<std::size_t> idx_;
};

}  // namespace stochtr

#endif  // STOCHTR_ESTIMATORS_HPP
