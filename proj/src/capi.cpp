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

#include "stochtr/stochtr.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "stochtr/experiment.hpp"

struct str_dataset {
  std::shared_ptr<const stochtr::Dataset> data;
};

struct str_problem {
  stochtr::FiniteSumProblem problem;
};

struct str_result {
  stochtr::RunResult result;
};

namespace {

using namespace stochtr;

thread_local std::string g_last_error;

str_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::argument: return STR_E_ARGUMENT;
    case ErrorCode::parse: return STR_E_PARSE;
    case ErrorCode::dimension: return STR_E_DIMENSION;
    case ErrorCode::domain: return STR_E_DOMAIN;
    case ErrorCode::numeric: return STR_E_NUMERIC;
    case ErrorCode::state: return STR_E_STATE;
    case ErrorCode::unsupported: return STR_E_UNSUPPORTED;
    case ErrorCode::format: return STR_E_FORMAT;
    case ErrorCode::io: return STR_E_IO;
  }
  return STR_E_INTERNAL;
}

str_status set_error(str_status s, const char* what) {
  g_last_error = what;
  return s;
}

template <class F>
str_status guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return STR_OK;
  } catch (const Error& e) {
    return set_error(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(STR_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(STR_E_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) fail(ErrorCode::argument, std::string(name) + " is null");
}

Vector read_vector(const double* x, std::size_t d) {
  need(x, "x");
  return Eigen::Map<const Vector>(x, static_cast<Eigen::Index>(d));
}

str_sos_report to_c(const SosReport& r) {
  return {r.grad_norm, r.min_eig, r.grad_threshold, r.eig_threshold,
          r.grad_ok,   r.eig_ok,  r.certified};
}

}  // namespace

extern "C" {

const char* str_version(void) { return library_version(); }

const char* str_status_name(str_status status) {
  switch (status) {
    case STR_OK: return "ok";
    case STR_E_ARGUMENT: return "argument";
    case STR_E_PARSE: return "parse";
    case STR_E_DIMENSION: return "dimension";
    case STR_E_DOMAIN: return "domain";
    case STR_E_NUMERIC: return "numeric";
    case STR_E_STATE: return "state";
    case STR_E_UNSUPPORTED: return "unsupported";
    case STR_E_FORMAT: return "format";
    case STR_E_IO: return "io";
    case STR_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* str_last_error(void) { return g_last_error.c_str(); }

str_status str_dataset_load(const char* path, size_t d_override, str_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto ds = load_libsvm(path, d_override ? std::optional<std::size_t>(d_override)
                                           : std::nullopt);
    *out = new str_dataset{std::make_shared<const Dataset>(std::move(ds))};
  });
}

str_status str_dataset_parse(const char* text, size_t d_override, str_dataset** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    auto ds = parse_libsvm_text(text, d_override ? std::optional<std::size_t>(d_override)
                                                 : std::nullopt);
    *out = new str_dataset{std::make_shared<const Dataset>(std::move(ds))};
  });
}

str_status str_dataset_synthetic(size_t n, size_t d, uint64_t seed, int separable,
                                 str_dataset** out) {
  return guard([&] {
    need(out, "out");
    auto ds = generate_synthetic(n, d, seed, separable != 0);
    *out = new str_dataset{std::make_shared<const Dataset>(std::move(ds))};
  });
}

str_status str_dataset_normalize(const str_dataset* ds, str_dataset** out) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    *out = new str_dataset{std::make_shared<const Dataset>(normalize_rows(*ds->data))};
  });
}

str_status str_dataset_shape(const str_dataset* ds, size_t* n, size_t* d) {
  return guard([&] {
    need(ds, "dataset");
    if (n) *n = ds->data->n;
    if (d) *d = ds->data->d;
  });
}

str_status str_dataset_save(const str_dataset* ds, const char* path) {
  return guard([&] {
    need(ds, "dataset");
    need(path, "path");
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io, std::string("cannot open '") + path + "'");
    write_libsvm(f, *ds->data);
    if (!f) fail(ErrorCode::io, std::string("write failed for '") + path + "'");
  });
}

void str_dataset_free(str_dataset* ds) { delete ds; }

str_status str_problem_create(const str_dataset* ds, str_task task, double reg_lambda,
                              double reg_alpha, str_problem** out) {
  return guard([&] {
    need(ds, "dataset");
    need(out, "out");
    switch (task) {
      case STR_TASK_LOGISTIC_NC:
        *out = new str_problem{FiniteSumProblem::logistic(ds->data, reg_lambda, reg_alpha)};
        return;
      case STR_TASK_NLS_NC:
        *out = new str_problem{
            FiniteSumProblem::nonlinear_least_squares(ds->data, reg_lambda, reg_alpha)};
        return;
    }
    fail(ErrorCode::argument, "unknown task");
  });
}

str_status str_problem_quadratic(const double* centers, size_t n, size_t d, str_problem** out) {
  return guard([&] {
    need(centers, "centers");
    need(out, "out");
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Matrix c = Eigen::Map<const RowMajor>(centers, static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(d));
    *out = new str_problem{FiniteSumProblem::quadratic(std::move(c))};
  });
}

str_status str_problem_shape(const str_problem* p, size_t* n, size_t* d) {
  return guard([&] {
    need(p, "problem");
    if (n) *n = p->problem.n();
    if (d) *d = p->problem.d();
  });
}

str_status str_problem_value(const str_problem* p, const double* x, double* value) {
  return guard([&] {
    need(p, "problem");
    need(value, "value");
    OracleCounters c;
    *value = p->problem.full_value(read_vector(x, p->problem.d()), c);
  });
}

str_status str_problem_gradient(const str_problem* p, const double* x, double* grad) {
  return guard([&] {
    need(p, "problem");
    need(grad, "grad");
    OracleCounters c;
    const Vector g = p->problem.full_gradient(read_vector(x, p->problem.d()), c);
    std::memcpy(grad, g.data(), sizeof(double) * g.size());
  });
}

str_status str_problem_hessian(const str_problem* p, const double* x, double* hess) {
  return guard([&] {
    need(p, "problem");
    need(hess, "hess");
    OracleCounters c;
    const Matrix h = p->problem.full_hessian(read_vector(x, p->problem.d()), c);
    std::memcpy(hess, h.data(), sizeof(double) * h.size());
  });
}

str_status str_problem_lipschitz(const str_problem* p, int sampled, uint64_t seed, double* L1,
                                 double* L2) {
  return guard([&] {
    need(p, "problem");
    const auto b = lipschitz_bounds(
        p->problem, sampled ? LipschitzMode::sampled : LipschitzMode::analytic, seed);
    if (L1) *L1 = b.L1;
    if (L2) *L2 = b.L2;
  });
}

void str_problem_free(str_problem* p) { delete p; }

str_status str_solve_trs(const double* g, const double* H, size_t d, double radius, double L2,
                         double tol, str_solver solver, double* h, str_trs_info* info) {
  return guard([&] {
    need(g, "g");
    need(H, "H");
    need(h, "h");
    const auto dim = static_cast<Eigen::Index>(d);
    const Vector gv = Eigen::Map<const Vector>(g, dim);
    const Matrix Hm = Eigen::Map<const Matrix>(H, dim, dim);
    TrsSolution sol;
    if (solver == STR_SOLVER_LANCZOS) {
      LanczosOptions opts;
      opts.tol = tol;
      sol = solve_trs_lanczos(
          gv, [&Hm](const Vector& v) -> Vector { return Hm * v; }, d, radius, L2, opts);
    } else {
      sol = solve_trs_exact(gv, Hm, radius, L2, tol);
    }
    std::memcpy(h, sol.h.data(), sizeof(double) * d);
    if (info) {
      *info = {sol.mu,
               sol.lambda_alg,
               sol.model_decrease,
               sol.on_boundary,
               sol.hard_case,
               sol.converged,
               static_cast<size_t>(sol.iterations),
               sol.kkt.stationarity,
               sol.kkt.dual_feasibility,
               sol.kkt.complementarity};
    }
  });
}

void str_run_config_default(str_run_config* cfg) {
  if (cfg == nullptr) return;
  std::memset(cfg, 0, sizeof *cfg);
  cfg->variant = STR_VARIANT_EXACT_TR;
  cfg->epsilon = 1e-3;
  cfg->delta = 0.1;
  cfg->L1 = 1.0;
  cfg->L2 = 1.0;
  cfg->delta_hat = -1.0;
  cfg->solver = STR_SOLVER_EXACT;
  cfg->solver_tol = 1e-8;
  cfg->kappa = 1.0;
}

str_status str_run(const str_problem* p, const str_run_config* cfg, const double* x0,
                   str_result** out) {
  return guard([&] {
    need(p, "problem");
    need(cfg, "config");
    need(out, "out");
    *out = nullptr;
    RunConfig c;
    switch (cfg->variant) {
      case STR_VARIANT_EXACT_TR: c.variant = Variant::exact_tr; break;
      case STR_VARIANT_STR1: c.variant = Variant::str1; break;
      case STR_VARIANT_STR2: c.variant = Variant::str2; break;
      case STR_VARIANT_SUBSAMPLED: c.variant = Variant::subsampled; break;
      default: fail(ErrorCode::argument, "unknown variant");
    }
    c.epsilon = cfg->epsilon;
    c.delta = cfg->delta;
    c.bounds = {cfg->L1, cfg->L2, BoundsProvenance::user};
    if (cfg->radius > 0.0) c.radius = cfg->radius;
    if (cfg->max_iterations > 0) c.max_iterations = cfg->max_iterations;
    if (cfg->delta_hat >= 0.0) c.delta_hat = cfg->delta_hat;
    c.solver = cfg->solver == STR_SOLVER_LANCZOS ? SolverKind::lanczos : SolverKind::exact;
    c.solver_tol = cfg->solver_tol;
    c.lanczos_max_dim = cfg->lanczos_max_dim;
    c.mode = cfg->practical ? ScheduleMode::practical : ScheduleMode::theory;
    c.kappa = cfg->kappa;
    auto set = [](std::optional<std::size_t>& dst, size_t v) {
      if (v > 0) dst = v;
    };
    set(c.overrides.p1, cfg->p1);
    set(c.overrides.s1, cfg->s1);
    set(c.overrides.p2, cfg->p2);
    set(c.overrides.s2, cfg->s2);
    set(c.overrides.s2_prime, cfg->s2_prime);
    if (cfg->hess_option == 1) c.overrides.option = HessOption::I;
    else if (cfg->hess_option == 2) c.overrides.option = HessOption::II;
    else if (cfg->hess_option != 0) fail(ErrorCode::argument, "hess_option must be 0, 1 or 2");
    c.subsample_grad = cfg->subsample_grad;
    c.subsample_hess = cfg->subsample_hess;
    c.seed = cfg->seed;
    if (x0) c.x0 = read_vector(x0, p->problem.d());
    try {
      RunResult r = cfg->expectation ? run_expectation(p->problem, c) : run(p->problem, c);
      *out = new str_result{std::move(r)};
    } catch (const RunAborted& e) {
      *out = new str_result{e.partial()};
      throw;
    }
  });
}

size_t str_result_dim(const str_result* r) {
  return r ? static_cast<size_t>(r->result.x_final.size()) : 0;
}

str_status str_result_x(const str_result* r, double* x) {
  return guard([&] {
    need(r, "result");
    need(x, "x");
    std::memcpy(x, r->result.x_final.data(), sizeof(double) * r->result.x_final.size());
  });
}

const char* str_result_stop_reason(const str_result* r) {
  return r ? stop_reason_name(r->result.stop_reason) : "";
}

size_t str_result_returned_index(const str_result* r) {
  return r ? r->result.returned_index : 0;
}

double str_result_final_fval(const str_result* r) { return r ? r->result.final_fval : 0.0; }

size_t str_result_trace_length(const str_result* r) {
  return r ? r->result.trace.size() : 0;
}

str_status str_result_trace_row(const str_result* r, size_t i, str_trace_row* row) {
  return guard([&] {
    need(r, "result");
    need(row, "row");
    if (i >= r->result.trace.size()) fail(ErrorCode::argument, "trace row out of range");
    const auto& t = r->result.trace[i];
    *row = {t.k,   t.fval, t.grad_norm, t.lambda_alg, t.step_norm,
            t.sfo, t.sso,  t.wall_ms,   t.solver_converged};
  });
}

str_status str_result_report(const str_result* r, str_sos_report* report) {
  return guard([&] {
    need(r, "result");
    need(report, "report");
    *report = to_c(r->result.report);
  });
}

str_status str_result_counters(const str_result* r, uint64_t* sfo, uint64_t* sso) {
  return guard([&] {
    need(r, "result");
    if (sfo) *sfo = r->result.counters.sfo;
    if (sso) *sso = r->result.counters.sso;
  });
}

str_status str_result_write_trace(const str_result* r, const char* path) {
  return guard([&] {
    need(r, "result");
    need(path, "path");
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::io, std::string("cannot open '") + path + "'");
    write_trace_csv(f, r->result.trace);
    if (!f) fail(ErrorCode::io, std::string("write failed for '") + path + "'");
  });
}

void str_result_free(str_result* r) { delete r; }

str_status str_verify_sosp(const str_problem* p, const double* x, double epsilon, double L2,
                           str_sos_report* report) {
  return guard([&] {
    need(p, "problem");
    need(report, "report");
    *report = to_c(verify_sosp(p->problem, read_vector(x, p->problem.d()), epsilon, L2));
  });
}

str_status str_experiment_run(const char* spec_path, const char* out_dir, unsigned threads,
                              int* exit_code) {
  std::string message;
  const str_status s = guard([&] {
    need(spec_path, "spec_path");
    need(exit_code, "exit_code");
    ExperimentOptions opts;
    if (out_dir) opts.output_dir = out_dir;
    opts.threads = threads == 0 ? 1 : threads;
    const ExperimentOutcome outcome = run_experiment(spec_path, opts);
    *exit_code = outcome.exit_code;
    message = outcome.message;
  });
  if (s == STR_OK) g_last_error = message;
  return s;
}

str_status str_traces_compare(const char* const* paths, size_t count, char** out) {
  return guard([&] {
    need(paths, "paths");
    need(out, "out");
    std::vector<std::string> files;
    for (size_t i = 0; i < count; ++i) {
      need(paths[i], "path");
      files.emplace_back(paths[i]);
    }
    const std::string text = compare_traces(files);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (buf == nullptr) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

void str_string_free(char* s) { std::free(s); }

}  // extern "C"
