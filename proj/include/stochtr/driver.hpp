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

#ifndef STOCHTR_DRIVER_HPP
#define STOCHTR_DRIVER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stochtr/estimators.hpp"
#include "stochtr/problem.hpp"
#include "stochtr/trs.hpp"

namespace stochtr {

enum class Variant { exact_tr, str1, str2, subsampled };
enum class SolverKind { exact, lanczos };
enum class StopReason { dual_threshold, interior_step, random_iterate, iteration_cap };

const char* variant_name(Variant v) noexcept;
const char* solver_name(SolverKind s) noexcept;
const char* stop_reason_name(StopReason r) noexcept;
Variant parse_variant(const std::string& name);
SolverKind parse_solver(const std::string& name);
ScheduleMode parse_schedule_mode(const std::string& name);

/// Explicit schedule values that replace the computed ones field by field.
struct ScheduleOverrides {
  std::optional<std::size_t> p1, s1, p2, s2, s2_prime;
  std::optional<HessOption> option;
  bool option1_log_without_k0 = false;
};

struct RunConfig {
  Variant variant = Variant::exact_tr;
  double epsilon = 1e-3;
  double delta = 0.1;
  LipschitzBounds bounds;
  std::optional<double> radius;          // default sqrt(epsilon / L2)
  std::optional<std::size_t> max_iterations;  // default ceil(6 sqrt(L2) D / eps^1.5)
  std::optional<double> delta_hat;       // default F(x0), assumes inf F >= 0
  SolverKind solver = SolverKind::exact;
  double solver_tol = 1e-8;
  std::size_t lanczos_max_dim = 0;       // 0 means d
  ScheduleMode mode = ScheduleMode::theory;
  double kappa = 1.0;
  ScheduleOverrides overrides;
  // Subsampled baseline batch sizes; 0 picks the defaults (gradient n,
  // Hessian the one-shot subsample size s2' of the Hessian schedule).
  std::size_t subsample_grad = 0;
  std::size_t subsample_hess = 0;
  std::uint64_t seed = 0;
  std::optional<Vector> x0;              // default zero vector
  bool keep_iterates = false;
};

/// One row per iteration k: diagnostics at x^k (outside the oracle budget),
/// the step taken from x^k, and cumulative counters after the step.
struct IterateRecord {
  std::size_t k = 0;
  double fval = 0.0;
  double grad_norm = 0.0;
  double lambda_alg = 0.0;
  double step_norm = 0.0;
  std::uint64_t sfo = 0;
  std::uint64_t sso = 0;
  double wall_ms = 0.0;
  bool solver_converged = true;
};

struct SosReport {
  double grad_norm = 0.0;
  double min_eig = 0.0;
  double grad_threshold = 0.0;  // 3 eps
  double eig_threshold = 0.0;   // -(10/3) sqrt(L2 eps)
  bool grad_ok = false;
  bool eig_ok = false;
  bool certified = false;
};

/// Derived run parameters after defaults are resolved.
struct ResolvedParams {
  double radius = 0.0;
  std::size_t max_iterations = 0;
  double delta_hat = 0.0;
  double dual_threshold = 0.0;  // 2 sqrt(eps / L2)
  double K0 = 0.0;              // 2K
  std::optional<GradSchedule> grad_schedule;
  std::optional<HessSchedule> hess_schedule;
  std::size_t subsample_grad = 0;
  std::size_t subsample_hess = 0;
};

struct RunResult {
  Vector x_final;
  double initial_fval = 0.0;
  double final_fval = 0.0;
  std::vector<IterateRecord> trace;
  std::vector<Vector> iterates;  // x^0, x^1, ... when keep_iterates
  StopReason stop_reason = StopReason::iteration_cap;
  std::size_t returned_index = 0;  // j such that x_final = x^j
  SosReport report;
  OracleCounters counters;
  ResolvedParams params;
  std::uint64_t seed = 0;
};

/// A run that aborted; `partial` holds the trace up to the failure.
class RunAborted : public Error {
 public:
  RunAborted(ErrorCode code, const std::string& what, RunResult partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const RunResult& partial() const noexcept { return partial_; }

 private:
  RunResult partial_;
};

/// Resolves radius, iteration cap, K0 = 2K and the variant's schedules.
ResolvedParams resolve_params(const FiniteSumProblem& problem, const RunConfig& config);

/// Inexact trust-region loop that stops the first time
/// lambda_alg <= 2 sqrt(eps / L2), returning x^{k+1}.
RunResult run_inexact_tr(const FiniteSumProblem& problem, const RunConfig& config,
                         GradientEstimator& grad, HessianEstimator& hess);

/// Variant without the dual variable: stops on the first interior step
/// (||h|| < r (1 - 1e-10)), otherwise returns x^j for j drawn uniformly from
/// {1..K} with the run seed.
RunResult run_inexact_tr_expectation(const FiniteSumProblem& problem,
                                     const RunConfig& config, GradientEstimator& grad,
                                     HessianEstimator& hess);

/// Builds the estimators for config.variant and runs the dual-stopping loop.
RunResult run(const FiniteSumProblem& problem, const RunConfig& config);
/// Same wiring, expectation-style stopping.
RunResult run_expectation(const FiniteSumProblem& problem, const RunConfig& config);

/// Exact gradient norm and lowest Hessian eigenvalue at x against the
/// thresholds 3 eps and -(10/3) sqrt(L2 eps).
SosReport verify_sosp(const FiniteSumProblem& problem, const Vector& x, double epsilon,
                      double L2);

}  // namespace stochtr

#endif  // STOCHTR_DRIVER_HPP
