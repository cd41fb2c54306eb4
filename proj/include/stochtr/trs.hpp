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

#ifndef STOCHTR_TRS_HPP
#define STOCHTR_TRS_HPP

#include <cstdint>
#include <functional>

#include "stochtr/error.hpp"
#include "stochtr/types.hpp"

namespace stochtr {

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // orthonormal columns
};

/// Eigendecomposition of a symmetric matrix (max asymmetry 1e-12 relative).
SymEig sym_eig(const Matrix& a);
double min_eigenvalue(const Matrix& a);

/// Lemma-style optimality residuals of a trust-region step.
struct KktResiduals {
  double stationarity = 0.0;      // ||(H + mu I) h + g||
  double dual_feasibility = 0.0;  // lambda_min(H + mu I), should be >= 0
  double complementarity = 0.0;   // |mu (||h|| - r)|
};

/// Solution of min <g,h> + 0.5 <Hh,h> s.t. ||h|| <= r.
///
/// `mu` is the multiplier in (H + mu I) h = -g. The stopping variable of the
/// inexact trust-region loop is `lambda_alg` = 2 mu / L2. For the Lanczos
/// solver the residuals certify the Krylov-space problem; its stationarity
/// entry equals the lifted full-space residual.
struct TrsSolution {
  Vector h;
  double mu = 0.0;
  double lambda_alg = 0.0;
  bool on_boundary = false;
  bool hard_case = false;
  bool converged = true;
  int iterations = 0;  // root-finder steps, or Krylov dimension for Lanczos
  KktResiduals kkt;
  double model_decrease = 0.0;
};

/// Thrown when the secular-equation root finder stalls; carries the best
/// iterate it reached.
class TrsStallError : public Error {
 public:
  TrsStallError(const std::string& what, TrsSolution best)
      : Error(ErrorCode::numeric, what), best_(std::move(best)) {}
  const TrsSolution& best() const noexcept { return best_; }

 private:
  TrsSolution best_;
};

double model_value(const Vector& g, const Matrix& H, const Vector& h);

/// Global minimizer through a full eigendecomposition of H. The boundary
/// multiplier solves 1/||h(mu)|| = 1/r by safeguarded Newton; the hard case
/// (g orthogonal to the lowest eigenspace, |<v,g>| <= 1e-11 ||g||) adds a
/// lowest-eigenvector component to reach the boundary.
TrsSolution solve_trs_exact(const Vector& g, const Matrix& H, double radius,
                            double L2, double tol = 1e-8);

using HvpOracle = std::function<Vector(const Vector&)>;

struct LanczosOptions {
  std::size_t max_dim = 0;  // 0 means d
  double tol = 1e-8;
  std::uint64_t seed = 0;   // random start when g = 0 and on restarts
};

/// Approximate solution in the Krylov space span{g, Hg, ...} built with
/// full reorthogonalization. Each step solves the projected problem exactly.
/// Once the residual drops below tol (||g|| + 1), a separate Lanczos run from
/// a random start estimates lambda_min(H); if mu < -lambda_min the leftmost
/// Ritz vector joins the basis and the iteration continues.
TrsSolution solve_trs_lanczos(const Vector& g, const HvpOracle& hvp, std::size_t d,
                              double radius, double L2, const LanczosOptions& opts = {});

KktResiduals kkt_residual(const Vector& g, const Matrix& H, double radius,
                          const TrsSolution& sol);

}  // namespace stochtr

#endif  // STOCHTR_TRS_HPP
