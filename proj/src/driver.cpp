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

#include "stochtr/driver.hpp"

#include <chrono>
#include <cmath>

namespace stochtr {

namespace {

constexpr double kInteriorGuard = 1e-10;
constexpr std::uint64_t kPickStream = 0xA24BAED4963EE407ULL;

Vector initial_point(const FiniteSumProblem& problem, const RunConfig& config) {
  if (!config.x0) return Vector::Zero(problem.d());
  require(static_cast<std::size_t>(config.x0->size()) == problem.d(), ErrorCode::argument,
          "x0 has wrong dimension");
  require(config.x0->allFinite(), ErrorCode::domain, "non-finite x0");
  return *config.x0;
}

void check_config(const RunConfig& c) {
  require(std::isfinite(c.epsilon) && c.epsilon > 0.0, ErrorCode::argument,
          "epsilon must be positive");
  require(c.delta > 0.0 && c.delta < 1.0, ErrorCode::argument, "delta must lie in (0,1)");
  require(c.bounds.L1 > 0.0 && c.bounds.L2 > 0.0, ErrorCode::argument,
          "L1 and L2 must be positive");
  require(!c.radius || (std::isfinite(*c.radius) && *c.radius > 0.0), ErrorCode::argument,
          "radius must be positive");
  require(!c.max_iterations || *c.max_iterations >= 1, ErrorCode::argument,
          "iteration cap must be >= 1");
  require(c.solver_tol > 0.0, ErrorCode::argument, "solver tolerance must be positive");
  require(c.kappa > 0.0 && c.kappa <= 1.0, ErrorCode::argument, "kappa must lie in (0,1]");
}

HessSchedule make_hess_schedule(const FiniteSumProblem& problem, const RunConfig& c,
                                double K0, std::optional<HessOption> force) {
  HessScheduleInputs in;
  in.n = problem.n();
  in.d = problem.d();
  in.epsilon = c.epsilon;
  in.L1 = c.bounds.L1;
  in.L2 = c.bounds.L2;
  in.delta = c.delta;
  in.K0 = K0;
  in.mode = c.mode;
  in.kappa = c.kappa;
  in.option1_log_without_k0 = c.overrides.option1_log_without_k0;
  in.force_option = force;
  HessSchedule s = hessian_schedule(in);
  const auto& o = c.overrides;
  if (o.p2) s.p2 = *o.p2;
  if (o.s2) s.s2 = *o.s2;
  if (o.s2_prime) s.s2_prime = *o.s2_prime;
  require(s.p2 >= 1 && s.s2 >= 1 && s.s2_prime >= 1, ErrorCode::argument,
          "schedule overrides must be >= 1");
  return s;
}

void apply_grad_overrides(GradSchedule& s, const ScheduleOverrides& o) {
  if (o.p1) s.p1 = *o.p1;
  if (o.s1) s.s1 = *o.s1;
  require(s.p1 >= 1 && s.s1 >= 1, ErrorCode::argument, "schedule overrides must be >= 1");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

RunResult drive(const FiniteSumProblem& problem, const RunConfig& config,
                const ResolvedParams& params, GradientEstimator& grad,
                HessianEstimator& hess, bool expectation) {
  const double L2 = config.bounds.L2;
  const double r = params.radius;
  const std::size_t K = params.max_iterations;

  RunResult result;
  result.seed = config.seed;
  result.params = params;

  Vector x = initial_point(problem, config);
  OracleCounters diag;  // diagnostics, never reported as oracle cost
  result.initial_fval = problem.full_value(x, diag);
  if (config.keep_iterates) result.iterates.push_back(x);

  UniformSampler sampler(config.seed);
  std::size_t chosen = 0;
  Vector chosen_x;
  if (expectation) {
    CounterRng pick(config.seed ^ kPickStream);
    chosen = 1 + pick.uniform_index(K);
  }

  const auto start = std::chrono::steady_clock::now();
  auto abort = [&](ErrorCode code, const std::string& what) -> RunAborted {
    result.x_final = x;
    return RunAborted(code, what, result);
  };

  bool stopped = false;
  for (std::size_t k = 0; k < K; ++k) {
    IterateRecord rec;
    rec.k = k;
    rec.fval = problem.full_value(x, diag);
    if (!std::isfinite(rec.fval)) throw abort(ErrorCode::domain, "objective is not finite");
    rec.grad_norm = problem.full_gradient(x, diag).norm();

    Vector g;
    Matrix H;
    try {
      g = grad.step(problem, x, result.counters, sampler);
      H = hess.step(problem, x, result.counters, sampler);
    } catch (const Error& e) {
      throw abort(e.code(), e.what());
    }
    if (!g.allFinite() || !H.allFinite())
      throw abort(ErrorCode::domain, "non-finite differential estimate");

    TrsSolution sol;
    try {
      if (config.solver == SolverKind::exact) {
        sol = solve_trs_exact(g, H, r, L2, config.solver_tol);
      } else {
        LanczosOptions opts;
        opts.max_dim = config.lanczos_max_dim;
        opts.tol = config.solver_tol;
        opts.seed = config.seed + k;
        sol = solve_trs_lanczos(
            g, [&H](const Vector& v) -> Vector { return H * v; }, problem.d(), r, L2, opts);
      }
    } catch (const Error& e) {
      throw abort(e.code(), std::string("trust-region solve failed: ") + e.what());
    }

    const Vector x_next = x + sol.h;
    rec.lambda_alg = sol.lambda_alg;
    rec.step_norm = sol.h.norm();
    rec.sfo = result.counters.sfo;
    rec.sso = result.counters.sso;
    rec.solver_converged = sol.converged;
    rec.wall_ms = elapsed_ms(start);
    result.trace.push_back(rec);
    if (config.keep_iterates) result.iterates.push_back(x_next);

    if (expectation) {
      if (k + 1 == chosen) chosen_x = x_next;
      if (rec.step_norm < r * (1.0 - kInteriorGuard)) {
        result.stop_reason = StopReason::interior_step;
        result.x_final = x_next;
        result.returned_index = k + 1;
        stopped = true;
        break;
      }
    } else if (sol.lambda_alg <= params.dual_threshold) {
      result.stop_reason = StopReason::dual_threshold;
      result.x_final = x_next;
      result.returned_index = k + 1;
      stopped = true;
      break;
    }
    x = x_next;
  }

  if (!stopped) {
    if (expectation) {
      result.stop_reason = StopReason::random_iterate;
      result.x_final = chosen_x;
      result.returned_index = chosen;
    } else {
      result.stop_reason = StopReason::iteration_cap;
      result.x_final = x;
      result.returned_index = K;
    }
  }
  result.final_fval = problem.full_value(result.x_final, diag);
  result.report = verify_sosp(problem, result.x_final, config.epsilon, L2);
  return result;
}

RunResult run_variant(const FiniteSumProblem& problem, const RunConfig& config,
                      bool expectation) {
  const ResolvedParams params = resolve_params(problem, config);
  switch (config.variant) {
    case Variant::exact_tr: {
      ExactGradient g;
      ExactHessian h;
      return drive(problem, config, params, g, h, expectation);
    }
    case Variant::str1: {
      SpiderGradient g(*params.grad_schedule);
      RecurrentHessian h(*params.hess_schedule);
      return drive(problem, config, params, g, h, expectation);
    }
    case Variant::str2: {
      CorrectedGradient g(*params.grad_schedule);
      RecurrentHessian h(*params.hess_schedule);
      return drive(problem, config, params, g, h, expectation);
    }
    case Variant::subsampled: {
      SubsampledGradient g(params.subsample_grad);
      SubsampledHessian h(params.subsample_hess);
      return drive(problem, config, params, g, h, expectation);
    }
  }
  fail(ErrorCode::argument, "unknown variant");
}

}  // namespace

const char* variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::exact_tr: return "exact_tr";
    case Variant::str1: return "str1";
    case Variant::str2: return "str2";
    case Variant::subsampled: return "subsampled";
  }
  return "unknown";
}

const char* solver_name(SolverKind s) noexcept {
  return s == SolverKind::exact ? "exact" : "lanczos";
}

const char* stop_reason_name(StopReason r) noexcept {
  switch (r) {
    case StopReason::dual_threshold: return "dual_threshold";
    case StopReason::interior_step: return "interior_step";
    case StopReason::random_iterate: return "random_iterate";
    case StopReason::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "exact_tr") return Variant::exact_tr;
  if (name == "str1") return Variant::str1;
  if (name == "str2") return Variant::str2;
  if (name == "subsampled") return Variant::subsampled;
  fail(ErrorCode::argument, "unknown variant '" + name + "'");
}

SolverKind parse_solver(const std::string& name) {
  if (name == "exact") return SolverKind::exact;
  if (name == "lanczos") return SolverKind::lanczos;
  fail(ErrorCode::argument, "unknown solver '" + name + "'");
}

ScheduleMode parse_schedule_mode(const std::string& name) {
  if (name == "theory") return ScheduleMode::theory;
  if (name == "practical") return ScheduleMode::practical;
  fail(ErrorCode::argument, "unknown schedule mode '" + name + "'");
}

ResolvedParams resolve_params(const FiniteSumProblem& problem, const RunConfig& config) {
  check_config(config);
  const double eps = config.epsilon;
  const double L2 = config.bounds.L2;
  ResolvedParams p;
  p.radius = config.radius.value_or(std::sqrt(eps / L2));
  p.dual_threshold = 2.0 * std::sqrt(eps / L2);
  if (config.delta_hat) {
    require(std::isfinite(*config.delta_hat) && *config.delta_hat >= 0.0,
            ErrorCode::argument, "delta_hat must be >= 0");
    p.delta_hat = *config.delta_hat;
  } else {
    OracleCounters scratch;
    p.delta_hat = problem.full_value(initial_point(problem, config), scratch);
    require(std::isfinite(p.delta_hat), ErrorCode::domain, "objective is not finite at x0");
    p.delta_hat = std::max(0.0, p.delta_hat);
  }
  if (config.max_iterations) {
    p.max_iterations = *config.max_iterations;
  } else {
    const double k = std::ceil(6.0 * std::sqrt(L2) * p.delta_hat / std::pow(eps, 1.5));
    require(k < 1e15, ErrorCode::argument, "iteration cap overflows; set max_iterations");
    p.max_iterations = std::max<std::size_t>(1, static_cast<std::size_t>(k));
  }
  p.K0 = 2.0 * static_cast<double>(p.max_iterations);

  const std::size_t n = problem.n();
  switch (config.variant) {
    case Variant::exact_tr:
      break;
    case Variant::str1: {
      GradSchedule gs = gradient_schedule_case1(n, eps, config.bounds.L1, L2, config.delta,
                                                p.K0, config.mode, config.kappa);
      apply_grad_overrides(gs, config.overrides);
      p.grad_schedule = gs;
      p.hess_schedule = make_hess_schedule(problem, config, p.K0, config.overrides.option);
      break;
    }
    case Variant::str2: {
      GradSchedule gs = gradient_schedule_case2(n, config.delta, p.K0, config.mode, config.kappa);
      apply_grad_overrides(gs, config.overrides);
      p.grad_schedule = gs;
      p.hess_schedule = make_hess_schedule(problem, config, p.K0, config.overrides.option);
      break;
    }
    case Variant::subsampled: {
      p.subsample_grad = config.subsample_grad != 0 ? config.subsample_grad : n;
      p.subsample_hess = config.subsample_hess != 0
                             ? config.subsample_hess
                             : make_hess_schedule(problem, config, p.K0, HessOption::II).s2_prime;
      break;
    }
  }
  return p;
}

RunResult run_inexact_tr(const FiniteSumProblem& problem, const RunConfig& config,
                         GradientEstimator& grad, HessianEstimator& hess) {
  return drive(problem, config, resolve_params(problem, config), grad, hess, false);
}

RunResult run_inexact_tr_expectation(const FiniteSumProblem& problem,
                                     const RunConfig& config, GradientEstimator& grad,
                                     HessianEstimator& hess) {
  return drive(problem, config, resolve_params(problem, config), grad, hess, true);
}

RunResult run(const FiniteSumProblem& problem, const RunConfig& config) {
  return run_variant(problem, config, false);
}

RunResult run_expectation(const FiniteSumProblem& problem, const RunConfig& config) {
  return run_variant(problem, config, true);
}

SosReport verify_sosp(const FiniteSumProblem& problem, const Vector& x, double epsilon,
                      double L2) {
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::argument,
          "epsilon must be positive");
  require(L2 > 0.0, ErrorCode::argument, "L2 must be positive");
  OracleCounters scratch;
  SosReport rep;
  rep.grad_norm = problem.full_gradient(x, scratch).norm();
  rep.min_eig = sym_eig(problem.full_hessian(x, scratch)).values[0];
  rep.grad_threshold = 3.0 * epsilon;
  rep.eig_threshold = -(10.0 / 3.0) * std::sqrt(L2 * epsilon);
  rep.grad_ok = rep.grad_norm <= rep.grad_threshold;
  rep.eig_ok = rep.min_eig >= rep.eig_threshold;
  rep.certified = rep.grad_ok && rep.eig_ok;
  return rep;
}

}  // namespace stochtr
