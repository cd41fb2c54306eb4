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

#include "stochtr/trs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace stochtr {

namespace {

constexpr double kHardCaseTol = 1e-11;
constexpr double kBreakdown = 1e-10;  // relative to the largest projected entry
constexpr int kMaxRootIterations = 300;

void check_inputs(const Vector& g, double radius, double L2) {
  require(std::isfinite(radius) && radius > 0.0, ErrorCode::argument,
          "trust-region radius must be positive");
  require(std::isfinite(L2) && L2 > 0.0, ErrorCode::argument, "L2 must be positive");
  require(g.allFinite(), ErrorCode::domain, "non-finite gradient");
}

// ||h(mu)|| with h_i = -gh_i / (lam_i + mu); zero coefficients are skipped
// so the value stays finite at a pole of an orthogonal eigenvalue.
double step_norm(const Vector& gh, const Vector& lam, double mu) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < gh.size(); ++i) {
    if (gh[i] == 0.0) continue;
    const double den = lam[i] + mu;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    const double q = gh[i] / den;
    s += q * q;
  }
  return std::sqrt(s);
}

// d/dmu of 1/||h(mu)||.
double reciprocal_slope(const Vector& gh, const Vector& lam, double mu, double norm) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < gh.size(); ++i) {
    if (gh[i] == 0.0) continue;
    const double den = lam[i] + mu;
    s += gh[i] * gh[i] / (den * den * den);
  }
  return s / (norm * norm * norm);
}

Vector eigen_step(const SymEig& eig, const Vector& gh, double mu) {
  Vector coef(gh.size());
  for (Eigen::Index i = 0; i < gh.size(); ++i) {
    const double den = eig.values[i] + mu;
    coef[i] = gh[i] == 0.0 ? 0.0 : -gh[i] / den;
  }
  return eig.vectors * coef;
}

void finish(TrsSolution& sol, const Vector& g, const Matrix& H, double radius,
            double L2, double lam_min, double tol) {
  const double hn = sol.h.norm();
  sol.lambda_alg = 2.0 * sol.mu / L2;
  sol.on_boundary = std::abs(hn - radius) <= tol * radius;
  sol.kkt.stationarity = (H * sol.h + sol.mu * sol.h + g).norm();
  sol.kkt.dual_feasibility = lam_min + sol.mu;
  sol.kkt.complementarity = sol.mu == 0.0 ? 0.0 : std::abs(sol.mu * (hn - radius));
  sol.model_decrease = model_value(g, H, sol.h);
}

}  // namespace

SymEig sym_eig(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorCode::argument, "matrix must be square");
  require(a.allFinite(), ErrorCode::domain, "non-finite matrix");
  if (a.size() == 0) return {};
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  require(asym <= 1e-12 * scale, ErrorCode::argument, "matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) fail(ErrorCode::numeric, "eigensolver did not converge");
  return {es.eigenvalues(), es.eigenvectors()};
}

double min_eigenvalue(const Matrix& a) {
  require(a.rows() == a.cols() && a.rows() > 0, ErrorCode::argument,
          "matrix must be square and non-empty");
  require(a.allFinite(), ErrorCode::domain, "non-finite matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::numeric, "eigensolver did not converge");
  return es.eigenvalues()[0];
}

double model_value(const Vector& g, const Matrix& H, const Vector& h) {
  return g.dot(h) + 0.5 * h.dot(H * h);
}

TrsSolution solve_trs_exact(const Vector& g, const Matrix& H, double radius,
                            double L2, double tol) {
  check_inputs(g, radius, L2);
  require(H.rows() == g.size() && H.cols() == g.size(), ErrorCode::argument,
          "dimension mismatch between g and H");
  require(tol > 0.0, ErrorCode::argument, "tolerance must be positive");
  const Eigen::Index d = g.size();
  require(d >= 1, ErrorCode::argument, "empty problem");

  const SymEig eig = sym_eig(H);
  const Vector& lam = eig.values;
  const Vector gh = eig.vectors.transpose() * g;
  const double gnorm = g.norm();
  const double lam_min = lam[0];

  TrsSolution sol;

  // Interior Newton step.
  if (lam_min > 0.0) {
    const double n0 = step_norm(gh, lam, 0.0);
    if (n0 <= radius) {
      sol.h = eigen_step(eig, gh, 0.0);
      sol.mu = 0.0;
      finish(sol, g, H, radius, L2, lam_min, tol);
      return sol;
    }
  }

  const double mu_lo = std::max(0.0, -lam_min);

  // Hard case: g has (numerically) no component along the lowest eigenspace.
  if (lam_min <= 0.0) {
    const double spread = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    double proj2 = 0.0;
    Eigen::Index cluster = 0;
    while (cluster < d && lam[cluster] - lam_min <= spread) {
      proj2 += gh[cluster] * gh[cluster];
      ++cluster;
    }
    if (std::sqrt(proj2) <= kHardCaseTol * gnorm) {
      Vector gh_rest = gh;
      gh_rest.head(cluster).setZero();
      const Vector partial = eigen_step(eig, gh_rest, mu_lo);
      const double pn = partial.norm();
      if (pn <= radius) {
        sol.hard_case = true;
        sol.mu = mu_lo;
        sol.h = partial;
        if (mu_lo > 0.0) {
          const double tau = std::sqrt(std::max(0.0, radius * radius - pn * pn));
          sol.h += tau * eig.vectors.col(0);
        }
        finish(sol, g, H, radius, L2, lam_min, tol);
        return sol;
      }
    }
  }

  // Boundary solution: 1/||h(mu)|| - 1/r = 0 on (mu_lo, mu_hi].
  const double inv_r = 1.0 / radius;
  double a = mu_lo;
  double b = std::max(mu_lo, gnorm / radius - lam_min);
  // ||h(b)|| <= ||g|| / (lam_min + b) <= r; widen if rounding says otherwise.
  for (int guard = 0; guard < 60 && step_norm(gh, lam, b) > radius; ++guard)
    b = b * 2.0 + 1e-300;

  double mu = a;
  double norm = step_norm(gh, lam, mu);
  if (!std::isfinite(norm) || norm <= radius) {
    mu = 0.5 * (a + b);
    norm = step_norm(gh, lam, mu);
  }
  double best_mu = b;
  double best_gap = std::abs(step_norm(gh, lam, b) - radius);
  int it = 0;
  for (; it < kMaxRootIterations; ++it) {
    const double gap = norm - radius;
    if (std::isfinite(norm) && std::abs(gap) < best_gap) {
      best_gap = std::abs(gap);
      best_mu = mu;
    }
    if (std::isfinite(norm) && std::abs(gap) <= 1e-15 * radius) break;
    if (!std::isfinite(norm) || norm > radius) {
      a = mu;
    } else {
      b = mu;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, b)) break;
    double next = 0.5 * (a + b);
    if (std::isfinite(norm) && norm > 0.0) {
      const double phi = 1.0 / norm - inv_r;
      const double slope = reciprocal_slope(gh, lam, mu, norm);
      if (slope > 0.0) {
        const double newton = mu - phi / slope;
        if (newton > a && newton < b) next = newton;
      }
    }
    mu = next;
    norm = step_norm(gh, lam, mu);
  }

  sol.mu = best_mu;
  sol.h = eigen_step(eig, gh, best_mu);
  sol.iterations = it;
  const double hn = sol.h.norm();
  if (!(std::abs(hn - radius) <= tol * radius)) {
    finish(sol, g, H, radius, L2, lam_min, tol);
    throw TrsStallError("secular equation root finder stalled", sol);
  }
  if (hn > radius) sol.h *= radius / hn;
  finish(sol, g, H, radius, L2, lam_min, tol);
  return sol;
}

namespace {

struct RitzPair {
  double value = 0.0;
  Vector vector;
  double residual = 0.0;
};

// Leftmost eigenpair of H by Lanczos from a random start.
RitzPair leftmost_ritz(const HvpOracle& hvp, std::size_t d, double tol, CounterRng& rng) {
  Matrix Q(d, d), W(d, d);
  Vector q(d);
  for (std::size_t i = 0; i < d; ++i) q[i] = rng.uniform01() - 0.5;
  q.normalize();
  RitzPair out;
  for (std::size_t j = 0; j < d; ++j) {
    Q.col(j) = q;
    W.col(j) = hvp(q);
    const Eigen::Index m = static_cast<Eigen::Index>(j + 1);
    const Matrix T = Q.leftCols(m).transpose() * W.leftCols(m);
    const SymEig e = sym_eig(0.5 * (T + T.transpose()));
    out.value = e.values[0];
    out.vector = Q.leftCols(m) * e.vectors.col(0);
    out.residual = (W.leftCols(m) * e.vectors.col(0) - out.value * out.vector).norm();
    if (out.residual <= tol) break;
    Vector w = W.col(j);
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(m) * (Q.leftCols(m).transpose() * w);
    const double wn = w.norm();
    if (wn <= kBreakdown * (T.cwiseAbs().maxCoeff() + 1.0)) break;
    q = w / wn;
  }
  return out;
}

}  // namespace

TrsSolution solve_trs_lanczos(const Vector& g, const HvpOracle& hvp, std::size_t d,
                              double radius, double L2, const LanczosOptions& opts) {
  check_inputs(g, radius, L2);
  require(static_cast<std::size_t>(g.size()) == d && d >= 1, ErrorCode::argument,
          "dimension mismatch");
  require(static_cast<bool>(hvp), ErrorCode::argument, "missing Hessian-vector oracle");
  const std::size_t m_max = opts.max_dim == 0 ? d : std::min(opts.max_dim, d);
  const double gnorm = g.norm();
  const double target = opts.tol * (gnorm + 1.0);
  const HvpOracle checked = [&](const Vector& v) {
    Vector w = hvp(v);
    require(static_cast<std::size_t>(w.size()) == d && w.allFinite(), ErrorCode::numeric,
            "Hessian-vector oracle returned an invalid vector");
    return w;
  };

  CounterRng rng(opts.seed);
  auto orthogonal_to = [&](const Matrix& basis, std::size_t cols, Vector v) {
    for (int pass = 0; pass < 2; ++pass)
      if (cols > 0) v -= basis.leftCols(cols) * (basis.leftCols(cols).transpose() * v);
    return v;
  };
  auto random_orthogonal = [&](const Matrix& basis, std::size_t cols) {
    Vector v(d);
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (std::size_t i = 0; i < d; ++i) v[i] = rng.uniform01() - 0.5;
      v = orthogonal_to(basis, cols, v);
      const double nv = v.norm();
      if (nv > 1e-8) return Vector(v / nv);
    }
    fail(ErrorCode::numeric, "could not draw an orthogonal restart direction");
  };

  // Q is an orthonormal basis and W = H Q, so T = Q^T W is the exact
  // projection and the residual below is measured in the full space.
  Matrix Q(d, m_max), W(d, m_max), T(m_max, m_max);
  Vector q = gnorm > 0.0 ? Vector(g / gnorm) : random_orthogonal(Q, 0);
  std::optional<RitzPair> probe;
  const double eig_tol = std::sqrt(opts.tol);

  TrsSolution best;
  Vector best_y;
  std::size_t best_m = 0;
  bool converged = false;
  for (std::size_t j = 0; j < m_max; ++j) {
    Q.col(j) = q;
    W.col(j) = checked(q);
    const Eigen::Index m = static_cast<Eigen::Index>(j + 1);
    const Vector col = Q.leftCols(m).transpose() * W.col(j);
    T.block(0, j, m, 1) = col;
    T.block(j, 0, 1, m) = col.transpose();

    const Matrix Tm = 0.5 * (T.topLeftCorner(m, m) + T.topLeftCorner(m, m).transpose());
    TrsSolution red =
        solve_trs_exact(Q.leftCols(m).transpose() * g, Tm, radius, L2, opts.tol);
    const double residual =
        (W.leftCols(m) * red.h + red.mu * (Q.leftCols(m) * red.h) + g).norm();
    best = red;
    best_y = red.h;
    best_m = j + 1;
    best.kkt.stationarity = residual;
    if (j + 1 == d) {
      converged = true;
      break;
    }
    if (j + 1 == m_max) break;

    Vector w = orthogonal_to(Q, j + 1, W.col(j));
    const double wn = w.norm();
    const double scale = Tm.cwiseAbs().maxCoeff() + 1.0;
    if (residual <= target) {
      // Optimal within the subspace. It is globally optimal only if mu
      // dominates the leftmost curvature, which the Krylov space of g can
      // miss entirely (the hard case).
      if (!probe) probe = leftmost_ritz(checked, d, eig_tol * scale, rng);
      if (red.mu + probe->value >= -eig_tol * scale) {
        converged = true;
        break;
      }
      Vector v = orthogonal_to(Q, j + 1, probe->vector);
      const double vn = v.norm();
      q = vn > 1e-8 ? Vector(v / vn) : random_orthogonal(Q, j + 1);
    } else if (wn <= kBreakdown * scale) {
      q = random_orthogonal(Q, j + 1);
    } else {
      q = w / wn;
    }
  }

  best.h = Q.leftCols(best_m) * best_y;
  best.converged = converged;
  best.iterations = static_cast<int>(best_m);
  const double hn = best.h.norm();
  if (hn > radius) best.h *= radius / hn;
  best.lambda_alg = 2.0 * best.mu / L2;
  best.on_boundary = std::abs(best.h.norm() - radius) <= opts.tol * radius;
  // model_decrease stays the reduced value: <g, Qy> + 0.5 <HQy, Qy> = it.
  return best;
}

KktResiduals kkt_residual(const Vector& g, const Matrix& H, double radius,
                          const TrsSolution& sol) {
  require(H.rows() == g.size() && H.cols() == g.size() && sol.h.size() == g.size(),
          ErrorCode::argument, "dimension mismatch");
  KktResiduals r;
  r.stationarity = (H * sol.h + sol.mu * sol.h + g).norm();
  r.dual_feasibility = min_eigenvalue(H) + sol.mu;
  r.complementarity = sol.mu == 0.0 ? 0.0 : std::abs(sol.mu * (sol.h.norm() - radius));
  return r;
}

}  // namespace stochtr
