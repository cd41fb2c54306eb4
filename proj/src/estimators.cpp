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

#include "stochtr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stochtr/error.hpp"

namespace stochtr {

namespace {

// Ceiling that ignores round-off just above an integer.
std::size_t ceil_count(double x) {
  if (!(x > 0.0)) return 0;
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, r)) return static_cast<std::size_t>(r);
  return static_cast<std::size_t>(std::ceil(x));
}

std::size_t clamp_size(double raw, std::size_t n) {
  return std::clamp<std::size_t>(ceil_count(raw), 1, n);
}

void check_common(std::size_t n, double delta, double K0, ScheduleMode mode, double kappa) {
  require(n >= 1, ErrorCode::argument, "n must be >= 1");
  require(delta > 0.0 && delta < 1.0, ErrorCode::argument, "delta must lie in (0,1)");
  require(std::isfinite(K0) && K0 > 0.0, ErrorCode::argument, "K0 must be positive");
  require(kappa > 0.0 && kappa <= 1.0, ErrorCode::argument, "kappa must lie in (0,1]");
  (void)mode;
}

void check_point(const FiniteSumProblem& problem, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) == problem.d(), ErrorCode::argument,
          "iterate dimension does not match problem");
}

}  // namespace

HessSchedule hessian_schedule(const HessScheduleInputs& in) {
  check_common(in.n, in.delta, in.K0, in.mode, in.kappa);
  require(in.d >= 1, ErrorCode::argument, "d must be >= 1");
  require(std::isfinite(in.epsilon) && in.epsilon > 0.0, ErrorCode::argument,
          "epsilon must be positive");
  require(in.L1 > 0.0 && in.L2 > 0.0, ErrorCode::argument, "L1 and L2 must be positive");

  const double n = static_cast<double>(in.n);
  const double d = static_cast<double>(in.d);
  const double log_k0 = std::log(d * in.K0 / in.delta);
  const double log_one = in.option1_log_without_k0 ? std::log(d / in.delta) : log_k0;
  const double root_eps_l2 = std::sqrt(in.epsilon * in.L2);

  const double s2_one = 32.0 * std::sqrt(n) * log_one;
  const double s2_two = 32.0 * in.L1 / root_eps_l2 * log_k0;
  const double factor = in.mode == ScheduleMode::practical ? in.kappa : 1.0;

  HessSchedule s;
  s.mode = in.mode;
  s.kappa = in.kappa;
  const bool use_two = in.force_option ? *in.force_option == HessOption::II
                                        : 2.0 * s2_two < 2.0 * s2_one;
  if (use_two) {
    s.option = HessOption::II;
    s.p2 = std::max<std::size_t>(1, ceil_count(in.L1 / (2.0 * root_eps_l2)));
    s.s2 = clamp_size(factor * s2_two, in.n);
    s.s2_prime = clamp_size(
        factor * 16.0 * in.L1 * in.L1 / (in.epsilon * in.L2) * log_k0, in.n);
  } else {
    s.option = HessOption::I;
    s.p2 = std::max<std::size_t>(1, ceil_count(std::sqrt(n)));
    s.s2 = clamp_size(factor * s2_one, in.n);
    s.s2_prime = in.n;
  }
  return s;
}

GradSchedule gradient_schedule_case1(std::size_t n, double epsilon, double L1, double L2,
                                     double delta, double K0, ScheduleMode mode,
                                     double kappa) {
  check_common(n, delta, K0, mode, kappa);
  require(std::isfinite(epsilon) && epsilon > 0.0, ErrorCode::argument,
          "epsilon must be positive");
  require(L1 > 0.0 && L2 > 0.0, ErrorCode::argument, "L1 and L2 must be positive");
  const double log_term = std::log(K0 / delta);
  require(log_term > 0.0, ErrorCode::argument, "K0/delta must exceed 1");
  const double nd = static_cast<double>(n);
  const double c = kGradientSampleConstant;
  const double p1_raw = std::sqrt(nd * epsilon * L2 / (c * L1 * L1 * log_term));
  const double s1_raw = std::sqrt(c * nd * L1 * L1 * log_term / (epsilon * L2));

  GradSchedule s;
  s.grad_case = 1;
  s.mode = mode;
  s.kappa = kappa;
  if (mode == ScheduleMode::theory) {
    s.p1 = std::max<std::size_t>(1, ceil_count(p1_raw));
    s.s1 = clamp_size(s1_raw, n);
  } else {
    s.s1 = clamp_size(kappa * s1_raw, n);
    s.p1 = s.s1 == n ? 1 : std::max<std::size_t>(1, ceil_count(p1_raw / kappa));
  }
  return s;
}

GradSchedule gradient_schedule_case2(std::size_t n, double delta, double K0,
                                     ScheduleMode mode, double kappa) {
  check_common(n, delta, K0, mode, kappa);
  const double log_term = std::log(K0 / delta);
  require(log_term > 0.0, ErrorCode::argument, "K0/delta must exceed 1");
  const double nd = static_cast<double>(n);
  const double quarter = std::sqrt(std::sqrt(nd));
  const double s1_raw = nd / quarter * kGradientSampleConstant * log_term;
  GradSchedule s;
  s.grad_case = 2;
  s.mode = mode;
  s.kappa = kappa;
  s.p1 = std::max<std::size_t>(1, ceil_count(quarter));
  s.s1 = clamp_size(mode == ScheduleMode::practical ? kappa * s1_raw : s1_raw, n);
  return s;
}

void draw_batch(IndexSampler& sampler, std::size_t n, std::size_t size,
                std::vector<std::size_t>& out) {
  require(size >= 1, ErrorCode::argument, "batch size must be >= 1");
  if (size >= n) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return;
  }
  sampler.draw(n, size, out);
  require(out.size() == size, ErrorCode::state, "sampler returned a wrong batch size");
}

Vector ExactGradient::step(const FiniteSumProblem& problem, const Vector& x,
                           OracleCounters& counters, IndexSampler&) {
  check_point(problem, x);
  return problem.full_gradient(x, counters);
}

Matrix ExactHessian::step(const FiniteSumProblem& problem, const Vector& x,
                          OracleCounters& counters, IndexSampler&) {
  check_point(problem, x);
  return problem.full_hessian(x, counters);
}

Vector SubsampledGradient::step(const FiniteSumProblem& problem, const Vector& x,
                                OracleCounters& counters, IndexSampler& sampler) {
  check_point(problem, x);
  draw_batch(sampler, problem.n(), batch_, idx_);
  return problem.batch_gradient(x, idx_, counters);
}

Matrix SubsampledHessian::step(const FiniteSumProblem& problem, const Vector& x,
                               OracleCounters& counters, IndexSampler& sampler) {
  check_point(problem, x);
  draw_batch(sampler, problem.n(), batch_, idx_);
  return problem.batch_hessian(x, idx_, counters);
}

SpiderGradient::SpiderGradient(GradSchedule schedule) : schedule_(schedule) {
  require(schedule_.grad_case == 1, ErrorCode::argument,
          "SPIDER estimator needs a case-1 schedule");
  require(schedule_.p1 >= 1 && schedule_.s1 >= 1, ErrorCode::argument,
          "schedule needs p1 >= 1 and s1 >= 1");
}

Vector SpiderGradient::step(const FiniteSumProblem& problem, const Vector& x,
                            OracleCounters& counters, IndexSampler& sampler) {
  check_point(problem, x);
  Vector g;
  if (state_.k_in_epoch == 0) {
    idx_.clear();
    g = problem.full_gradient(x, counters);
  } else {
    require(state_.initialized, ErrorCode::state, "recurrent step without history");
    draw_batch(sampler, problem.n(), schedule_.s1, idx_);
    g = problem.batch_gradient(x, idx_, counters) -
        problem.batch_gradient(state_.x_prev, idx_, counters) + state_.g_prev;
  }
  state_.g_prev = g;
  state_.x_prev = x;
  state_.initialized = true;
  state_.k_in_epoch = (state_.k_in_epoch + 1) % schedule_.p1;
  return g;
}

CorrectedGradient::CorrectedGradient(GradSchedule schedule) : schedule_(schedule) {
  require(schedule_.grad_case == 2, ErrorCode::argument,
          "corrected estimator needs a case-2 schedule");
  require(schedule_.p1 >= 1 && schedule_.s1 >= 1, ErrorCode::argument,
          "schedule needs p1 >= 1 and s1 >= 1");
}

Vector CorrectedGradient::step(const FiniteSumProblem& problem, const Vector& x,
                               OracleCounters& counters, IndexSampler& sampler) {
  check_point(problem, x);
  Vector g;
  if (state_.k_in_epoch == 0) {
    idx_.clear();
    state_.x_ref = x;
    g = problem.full_gradient(x, counters);
    state_.H_ref = problem.full_hessian(x, counters);
    state_.has_ref = true;
  } else {
    require(state_.initialized, ErrorCode::state, "recurrent step without history");
    require(state_.has_ref, ErrorCode::state, "reference Hessian missing mid-epoch");
    draw_batch(sampler, problem.n(), schedule_.s1, idx_);
    const Vector dx = x - state_.x_prev;
    const Vector correction =
        state_.H_ref * dx - problem.batch_hvp(state_.x_ref, idx_, dx, counters);
    g = problem.batch_gradient(x, idx_, counters) -
        problem.batch_gradient(state_.x_prev, idx_, counters) + state_.g_prev + correction;
  }
  state_.g_prev = g;
  state_.x_prev = x;
  state_.initialized = true;
  state_.k_in_epoch = (state_.k_in_epoch + 1) % schedule_.p1;
  return g;
}

RecurrentHessian::RecurrentHessian(HessSchedule schedule) : schedule_(schedule) {
  require(schedule_.p2 >= 1 && schedule_.s2 >= 1, ErrorCode::argument,
          "schedule needs p2 >= 1 and s2 >= 1");
  require(schedule_.option == HessOption::I || schedule_.s2_prime >= 1,
          ErrorCode::argument, "Option II needs s2_prime >= 1");
}

Matrix RecurrentHessian::step(const FiniteSumProblem& problem, const Vector& x,
                              OracleCounters& counters, IndexSampler& sampler) {
  check_point(problem, x);
  Matrix h;
  if (state_.k_in_epoch == 0) {
    if (schedule_.option == HessOption::I) {
      idx_.clear();
      h = problem.full_hessian(x, counters);
    } else {
      draw_batch(sampler, problem.n(), schedule_.s2_prime, idx_);
      h = problem.batch_hessian(x, idx_, counters);
    }
  } else {
    require(state_.initialized, ErrorCode::state, "recurrent step without history");
    draw_batch(sampler, problem.n(), schedule_.s2, idx_);
    h = problem.batch_hessian(x, idx_, counters) -
        problem.batch_hessian(state_.x_prev, idx_, counters) + state_.H_prev;
  }
  state_.H_prev = h;
  state_.x_prev = x;
  state_.initialized = true;
  state_.k_in_epoch = (state_.k_in_epoch + 1) % schedule_.p2;
  return h;
}

}  // namespace stochtr
