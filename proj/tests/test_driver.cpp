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

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "stochtr/driver.hpp"

using namespace stochtr;
using oracle::error_of;

namespace {

// Single-component objective given by closed-form value, gradient, Hessian.
class Closed final : public ComponentModel {
 public:
  using Val = std::function<double(const Vector&)>;
  using Grad = std::function<Vector(const Vector&)>;
  using Hess = std::function<Matrix(const Vector&)>;
  Closed(std::size_t d, Val v, Grad g, Hess h)
      : d_(d), v_(std::move(v)), g_(std::move(g)), h_(std::move(h)) {}
  ProblemKind kind() const override { return ProblemKind::custom; }
  std::size_t size() const override { return 1; }
  std::size_t dim() const override { return d_; }
  double value(std::size_t, const Vector& x) const override { return v_(x); }
  void add_gradient(std::size_t, const Vector& x, double w, Vector& out) const override {
    out += w * g_(x);
  }
  void add_hessian(std::size_t, const Vector& x, double w, Matrix& out) const override {
    out += w * h_(x);
  }

 private:
  std::size_t d_;
  Val v_;
  Grad g_;
  Hess h_;
};

FiniteSumProblem saddle() {
  return FiniteSumProblem(std::make_shared<Closed>(
      2, [](const Vector& x) { return x[0] * x[0] - x[1] * x[1]; },
      [](const Vector& x) {
        Vector g(2);
        g << 2 * x[0], -2 * x[1];
        return g;
      },
      [](const Vector&) {
        Matrix h = Matrix::Zero(2, 2);
        h(0, 0) = 2;
        h(1, 1) = -2;
        return h;
      }));
}

FiniteSumProblem logistic(std::size_t n, std::size_t d, std::uint64_t seed) {
  return FiniteSumProblem::logistic(
      std::make_shared<const Dataset>(generate_synthetic(n, d, seed, false)));
}

RunConfig config_for(const FiniteSumProblem& p, Variant v, double eps = 1e-3) {
  RunConfig c;
  c.variant = v;
  c.epsilon = eps;
  c.bounds = lipschitz_bounds(p, LipschitzMode::analytic);
  return c;
}

void expect_same_run(const RunResult& a, const RunResult& b) {
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    EXPECT_EQ(a.trace[k].fval, b.trace[k].fval);
    EXPECT_EQ(a.trace[k].lambda_alg, b.trace[k].lambda_alg);
    EXPECT_EQ(a.trace[k].sso, b.trace[k].sso);
    EXPECT_EQ(a.trace[k].sfo, b.trace[k].sfo);
  }
  EXPECT_EQ(a.x_final, b.x_final);
  EXPECT_EQ(a.counters, b.counters);
  EXPECT_EQ(a.stop_reason, b.stop_reason);
}

}  // namespace

TEST(Names, RoundTripAndUnknown) {
  for (Variant v : {Variant::exact_tr, Variant::str1, Variant::str2, Variant::subsampled})
    EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_EQ(parse_solver("lanczos"), SolverKind::lanczos);
  EXPECT_EQ(error_of([] { parse_variant("newton"); }), ErrorCode::argument);
  EXPECT_EQ(error_of([] { parse_schedule_mode("fast"); }), ErrorCode::argument);
}

TEST(ExactTr, ScalarQuadraticWithAnalyticFloor) {
  Matrix centers = Matrix::Zero(1, 1);
  auto p = FiniteSumProblem::quadratic(centers);
  RunConfig c = config_for(p, Variant::exact_tr, 1e-4);
  ASSERT_EQ(c.bounds.L2, 1e-6);
  c.x0 = Vector::Ones(1);
  const RunResult r = run(p, c);
  EXPECT_LE(r.trace.size(), 3u);
  EXPECT_EQ(r.stop_reason, StopReason::dual_threshold);
  EXPECT_LE(r.report.grad_norm, 3e-4);
  EXPECT_TRUE(r.report.certified);
  // First step is the interior Newton step straight to 0.
  EXPECT_NEAR(r.trace[0].step_norm, 1.0, 1e-15);
}

TEST(ExactTr, ScalarQuadraticWithUnitL2) {
  auto p = FiniteSumProblem::quadratic(Matrix::Zero(1, 1));
  RunConfig c = config_for(p, Variant::exact_tr, 1e-4);
  c.bounds.L2 = 1.0;
  c.x0 = Vector::Ones(1);
  const RunResult r = run(p, c);
  EXPECT_EQ(r.stop_reason, StopReason::dual_threshold);
  EXPECT_LE(r.report.grad_norm, 3e-4);
  EXPECT_NEAR(r.trace[0].step_norm, 0.01, 1e-12);
  EXPECT_LE(r.trace.size(), r.params.max_iterations);
}

TEST(ExactTr, StationaryStartStopsImmediately) {
  Matrix centers(3, 2);
  centers << 1, 2, 3, 4, 5, 6;
  auto p = FiniteSumProblem::quadratic(centers);
  RunConfig c = config_for(p, Variant::exact_tr);
  c.x0 = centers.colwise().mean().transpose();
  const RunResult r = run(p, c);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].lambda_alg, 0.0);
  EXPECT_EQ(r.stop_reason, StopReason::dual_threshold);
  EXPECT_EQ(r.returned_index, 1u);
  EXPECT_TRUE(r.report.certified);
}

TEST(ExactTr, DescentLawAndStepSizeLaw) {
  auto p = logistic(500, 20, 7);
  RunConfig c = config_for(p, Variant::exact_tr);
  const RunResult r = run(p, c);
  const double L2 = c.bounds.L2;
  const double thr = 2 * std::sqrt(c.epsilon / L2);
  const double dec = std::pow(c.epsilon, 1.5) / (6 * std::sqrt(L2));
  ASSERT_EQ(r.stop_reason, StopReason::dual_threshold);
  EXPECT_LE(r.trace.back().lambda_alg, thr);
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const double next = k + 1 < r.trace.size() ? r.trace[k + 1].fval : r.final_fval;
    if (r.trace[k].lambda_alg > thr) {
      EXPECT_GE(r.trace[k].fval - next, dec - 1e-12) << k;
      EXPECT_NEAR(r.trace[k].step_norm, r.params.radius, 1e-8 * r.params.radius) << k;
    }
    if (k > 0) {
      EXPECT_GE(r.trace[k].sfo, r.trace[k - 1].sfo);
      EXPECT_GT(r.trace[k].k, r.trace[k - 1].k);
    }
  }
  const double bound =
      std::ceil(6 * std::sqrt(L2) * (r.initial_fval - r.final_fval) / std::pow(c.epsilon, 1.5));
  EXPECT_LE(double(r.trace.size() - 1), bound + 1);
  EXPECT_TRUE(r.report.certified);
  EXPECT_EQ(r.counters.sso, 500u * r.trace.size());
}

TEST(ExactTr, Deterministic) {
  auto p = logistic(200, 8, 3);
  RunConfig c = config_for(p, Variant::str1);
  c.mode = ScheduleMode::practical;
  c.kappa = 0.05;
  c.seed = 42;
  expect_same_run(run(p, c), run(p, c));
}

TEST(ExactTr, LanczosSolverMatchesExactOnSmallInstance) {
  auto p = logistic(200, 8, 3);
  RunConfig c = config_for(p, Variant::exact_tr);
  const RunResult e = run(p, c);
  c.solver = SolverKind::lanczos;
  const RunResult l = run(p, c);
  EXPECT_EQ(l.stop_reason, StopReason::dual_threshold);
  EXPECT_TRUE(l.report.certified);
  EXPECT_LE((e.x_final - l.x_final).norm(), 1e-6);
}

TEST(Str1, QuadraticConvergesCertified) {
  Matrix centers = Matrix::Random(40, 3);
  auto p = FiniteSumProblem::quadratic(centers);
  RunConfig c = config_for(p, Variant::str1);
  c.mode = ScheduleMode::practical;
  c.kappa = 0.1;
  c.seed = 3;
  const RunResult r = run(p, c);
  EXPECT_EQ(r.stop_reason, StopReason::dual_threshold);
  EXPECT_TRUE(r.report.certified);
  EXPECT_LE((r.x_final - centers.colwise().mean().transpose()).norm(), 3e-3);
}

TEST(Str1, FullBatchesReproduceExactTr) {
  auto p = logistic(300, 10, 5);
  RunConfig c = config_for(p, Variant::exact_tr);
  c.seed = 9;
  c.keep_iterates = true;
  const RunResult e = run(p, c);
  c.variant = Variant::str1;
  c.overrides.p1 = 1;
  c.overrides.p2 = 1;
  c.overrides.s1 = 300;
  c.overrides.s2 = 300;
  c.overrides.s2_prime = 300;
  c.overrides.option = HessOption::I;
  const RunResult s = run(p, c);
  ASSERT_EQ(e.iterates.size(), s.iterates.size());
  for (std::size_t k = 0; k < e.iterates.size(); ++k)
    EXPECT_LE((e.iterates[k] - s.iterates[k]).cwiseAbs().maxCoeff(), 1e-12) << k;
}

TEST(Str2, RunsAndCertifiesOnQuadratic) {
  Matrix centers = Matrix::Random(30, 2);
  auto p = FiniteSumProblem::quadratic(centers);
  RunConfig c = config_for(p, Variant::str2);
  c.mode = ScheduleMode::practical;
  c.kappa = 0.01;
  const RunResult r = run(p, c);
  EXPECT_TRUE(r.report.certified);
  ASSERT_TRUE(r.params.grad_schedule.has_value());
  EXPECT_EQ(r.params.grad_schedule->grad_case, 2);
}

TEST(Subsampled, UsesConfiguredBatches) {
  auto p = logistic(100, 5, 2);
  RunConfig c = config_for(p, Variant::subsampled);
  c.subsample_grad = 100;
  c.subsample_hess = 10;
  c.max_iterations = 4;
  const RunResult r = run(p, c);
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    EXPECT_EQ(r.trace[k].sfo, 100u * (k + 1));
    EXPECT_EQ(r.trace[k].sso, 10u * (k + 1));
  }
}

TEST(ResolveParams, Defaults) {
  auto p = logistic(100, 5, 2);
  RunConfig c = config_for(p, Variant::str1, 1e-2);
  const ResolvedParams rp = resolve_params(p, c);
  EXPECT_DOUBLE_EQ(rp.radius, std::sqrt(1e-2 / c.bounds.L2));
  EXPECT_NEAR(rp.delta_hat, std::log(2.0), 1e-14);
  EXPECT_EQ(rp.max_iterations, static_cast<std::size_t>(std::ceil(
                                   6 * std::sqrt(c.bounds.L2) * rp.delta_hat / 1e-3)));
  EXPECT_EQ(rp.K0, 2.0 * rp.max_iterations);
  c.radius = 0.5;
  c.max_iterations = 7;
  c.delta_hat = 3.0;
  const ResolvedParams o = resolve_params(p, c);
  EXPECT_EQ(o.radius, 0.5);
  EXPECT_EQ(o.max_iterations, 7u);
  EXPECT_EQ(o.K0, 14.0);
}

TEST(ResolveParams, RejectsInvalidConfig) {
  auto p = logistic(50, 3, 2);
  RunConfig c = config_for(p, Variant::exact_tr);
  c.epsilon = 0;
  EXPECT_EQ(error_of([&] { run(p, c); }), ErrorCode::argument);
  c.epsilon = 1e-3;
  c.delta = 1.5;
  EXPECT_EQ(error_of([&] { run(p, c); }), ErrorCode::argument);
  c.delta = 0.1;
  c.x0 = Vector::Zero(4);
  EXPECT_EQ(error_of([&] { run(p, c); }), ErrorCode::argument);
}

TEST(Errors, NonFiniteObjectiveAbortsWithPartialTrace) {
  // F(x) = x for x > -0.5 and NaN beyond; steps of 0.2 walk into the NaN region.
  auto p = FiniteSumProblem(std::make_shared<Closed>(
      1, [](const Vector& x) { return x[0] > -0.5 ? x[0] : std::nan(""); },
      [](const Vector&) { return Vector::Constant(1, 1.0); },
      [](const Vector&) { return Matrix::Zero(1, 1); }));
  RunConfig c;
  c.variant = Variant::exact_tr;
  c.bounds = {1, 1, BoundsProvenance::user};
  c.epsilon = 1e-2;
  c.radius = 0.2;
  c.delta_hat = 10;
  c.x0 = Vector::Zero(1);
  try {
    run(p, c);
    FAIL() << "expected abort";
  } catch (const RunAborted& e) {
    EXPECT_EQ(e.code(), ErrorCode::domain);
    EXPECT_EQ(e.partial().trace.size(), 3u);
  }
}

TEST(Expectation, StrictMinimumExitsOnInteriorStep) {
  Matrix centers(2, 2);
  centers << 1, 1, -1, -1;
  auto p = FiniteSumProblem::quadratic(centers);
  RunConfig c = config_for(p, Variant::exact_tr);
  c.x0 = Vector::Zero(2);
  const RunResult r = run_expectation(p, c);
  EXPECT_EQ(r.stop_reason, StopReason::interior_step);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.returned_index, 1u);
}

TEST(Expectation, RandomIterateReproducible) {
  auto p = FiniteSumProblem::quadratic(Matrix::Zero(1, 2));
  RunConfig c = config_for(p, Variant::exact_tr);
  c.bounds.L2 = 1.0;
  c.max_iterations = 5;
  c.x0 = Vector::Constant(2, 100.0);
  c.keep_iterates = true;
  std::set<std::size_t> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    c.seed = seed;
    const RunResult a = run_expectation(p, c);
    const RunResult b = run_expectation(p, c);
    EXPECT_EQ(a.stop_reason, StopReason::random_iterate);
    EXPECT_GE(a.returned_index, 1u);
    EXPECT_LE(a.returned_index, 5u);
    EXPECT_EQ(a.returned_index, b.returned_index);
    EXPECT_EQ(a.x_final, a.iterates[a.returned_index]);
    seen.insert(a.returned_index);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(VerifySosp, QuadraticMinimumAndSaddle) {
  Matrix centers(2, 3);
  centers << 1, 2, 3, 3, 2, 1;
  auto p = FiniteSumProblem::quadratic(centers);
  const SosReport q = verify_sosp(p, Vector::Constant(3, 2.0), 1e-3, 1.0);
  EXPECT_EQ(q.grad_norm, 0.0);
  EXPECT_NEAR(q.min_eig, 1.0, 1e-15);
  EXPECT_TRUE(q.certified);

  const double eps = 1e-2, L2 = 1.0;
  ASSERT_LT(10.0 / 3.0 * std::sqrt(L2 * eps), 2.0);
  const SosReport s = verify_sosp(saddle(), Vector::Zero(2), eps, L2);
  EXPECT_NEAR(s.min_eig, -2.0, 1e-14);
  EXPECT_TRUE(s.grad_ok);
  EXPECT_FALSE(s.eig_ok);
  EXPECT_FALSE(s.certified);
}

TEST(VerifySosp, FlagsMatchThresholds) {
  auto p = logistic(100, 6, 4);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const Vector x = oracle::random_vector(rng, 6);
    const double eps = 1e-3 * (1 + t), L2 = 0.3;
    const SosReport r = verify_sosp(p, x, eps, L2);
    EXPECT_EQ(r.grad_threshold, 3 * eps);
    EXPECT_EQ(r.eig_threshold, -(10.0 / 3.0) * std::sqrt(L2 * eps));
    EXPECT_EQ(r.grad_ok, r.grad_norm <= 3 * eps);
    EXPECT_EQ(r.eig_ok, r.min_eig >= r.eig_threshold);
    EXPECT_EQ(r.certified, r.grad_ok && r.eig_ok);
  }
  Vector bad = Vector::Zero(6);
  bad[1] = INFINITY;
  EXPECT_EQ(error_of([&] { verify_sosp(p, bad, 1e-3, 1); }), ErrorCode::domain);
}

TEST(Saddle, ExactTrEscapes) {
  RunConfig c;
  c.variant = Variant::exact_tr;
  c.bounds = {2, 1, BoundsProvenance::user};
  c.epsilon = 1e-2;
  c.max_iterations = 3;
  const RunResult r = run(saddle(), c);
  // The zero-gradient start is a saddle; the first step follows -y curvature.
  EXPECT_NEAR(r.trace[0].step_norm, r.params.radius, 1e-12);
  EXPECT_GT(r.trace[0].lambda_alg, r.params.dual_threshold);
}
