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

/* C interface to the stochastic trust-region library. Every call returns a
 * status; on failure str_last_error() describes it (per thread). Handles are
 * opaque and owned by the caller, who releases them with the *_free calls. */
#ifndef STOCHTR_STOCHTR_H
#define STOCHTR_STOCHTR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(STOCHTR_BUILDING)
#define STR_API __declspec(dllexport)
#else
#define STR_API __declspec(dllimport)
#endif
#else
#define STR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  STR_OK = 0,
  STR_E_ARGUMENT = 1,
  STR_E_PARSE = 2,
  STR_E_DIMENSION = 3,
  STR_E_DOMAIN = 4,
  STR_E_NUMERIC = 5,
  STR_E_STATE = 6,
  STR_E_UNSUPPORTED = 7,
  STR_E_FORMAT = 8,
  STR_E_IO = 9,
  STR_E_INTERNAL = 10
} str_status;

typedef enum { STR_TASK_LOGISTIC_NC = 0, STR_TASK_NLS_NC = 1 } str_task;
typedef enum {
  STR_VARIANT_EXACT_TR = 0,
  STR_VARIANT_STR1 = 1,
  STR_VARIANT_STR2 = 2,
  STR_VARIANT_SUBSAMPLED = 3
} str_variant;
typedef enum { STR_SOLVER_EXACT = 0, STR_SOLVER_LANCZOS = 1 } str_solver;

typedef struct str_dataset str_dataset;
typedef struct str_problem str_problem;
typedef struct str_result str_result;

STR_API const char* str_version(void);
STR_API const char* str_status_name(str_status status);
/* Message of the last failed call on this thread; "" if none. */
STR_API const char* str_last_error(void);

/* d_override = 0 infers the dimension from the largest index. */
STR_API str_status str_dataset_load(const char* path, size_t d_override, str_dataset** out);
STR_API str_status str_dataset_parse(const char* text, size_t d_override, str_dataset** out);
STR_API str_status str_dataset_synthetic(size_t n, size_t d, uint64_t seed, int separable,
                                         str_dataset** out);
STR_API str_status str_dataset_normalize(const str_dataset* ds, str_dataset** out);
STR_API str_status str_dataset_shape(const str_dataset* ds, size_t* n, size_t* d);
STR_API str_status str_dataset_save(const str_dataset* ds, const char* path);
STR_API void str_dataset_free(str_dataset* ds);

/* The problem keeps its own reference to the data. */
STR_API str_status str_problem_create(const str_dataset* ds, str_task task, double reg_lambda,
                                      double reg_alpha, str_problem** out);
/* centers is n x d, row-major; f_i(x) = 0.5 ||x - a_i||^2. */
STR_API str_status str_problem_quadratic(const double* centers, size_t n, size_t d,
                                         str_problem** out);
STR_API str_status str_problem_shape(const str_problem* p, size_t* n, size_t* d);
STR_API str_status str_problem_value(const str_problem* p, const double* x, double* value);
STR_API str_status str_problem_gradient(const str_problem* p, const double* x, double* grad);
/* Writes d*d entries, column-major (the matrix is symmetric). */
STR_API str_status str_problem_hessian(const str_problem* p, const double* x, double* hess);
STR_API str_status str_problem_lipschitz(const str_problem* p, int sampled, uint64_t seed,
                                         double* L1, double* L2);
STR_API void str_problem_free(str_problem* p);

typedef struct {
  double mu;
  double lambda_alg;
  double model_decrease;
  int on_boundary;
  int hard_case;
  int converged;
  size_t iterations;
  double stationarity;
  double dual_feasibility;
  double complementarity;
} str_trs_info;

/* H is d x d column-major and must be symmetric. info may be NULL. */
STR_API str_status str_solve_trs(const double* g, const double* H, size_t d, double radius,
                                 double L2, double tol, str_solver solver, double* h,
                                 str_trs_info* info);

typedef struct {
  str_variant variant;
  double epsilon;
  double delta;
  double L1;
  double L2;
  double radius;           /* <= 0: sqrt(epsilon / L2) */
  size_t max_iterations;   /* 0: from the complexity bound */
  double delta_hat;        /* < 0: F(x0) */
  str_solver solver;
  double solver_tol;
  size_t lanczos_max_dim;  /* 0: d */
  int practical;           /* nonzero selects practical schedules */
  double kappa;
  size_t p1, s1, p2, s2, s2_prime;  /* 0: computed */
  int hess_option;         /* 0 automatic, 1 or 2 to force */
  size_t subsample_grad;   /* 0: default */
  size_t subsample_hess;
  uint64_t seed;
  int expectation;         /* nonzero: stop on interior step or random iterate */
} str_run_config;

STR_API void str_run_config_default(str_run_config* cfg);

typedef struct {
  size_t k;
  double fval;
  double grad_norm;
  double lambda_alg;
  double step_norm;
  uint64_t sfo;
  uint64_t sso;
  double wall_ms;
  int solver_converged;
} str_trace_row;

typedef struct {
  double grad_norm;
  double min_eig;
  double grad_threshold;
  double eig_threshold;
  int grad_ok;
  int eig_ok;
  int certified;
} str_sos_report;

/* x0 may be NULL (zero start). When the run aborts, the error status is
 * returned and *out still receives the partial result. */
STR_API str_status str_run(const str_problem* p, const str_run_config* cfg, const double* x0,
                           str_result** out);
STR_API size_t str_result_dim(const str_result* r);
STR_API str_status str_result_x(const str_result* r, double* x);
STR_API const char* str_result_stop_reason(const str_result* r);
STR_API size_t str_result_returned_index(const str_result* r);
STR_API double str_result_final_fval(const str_result* r);
STR_API size_t str_result_trace_length(const str_result* r);
STR_API str_status str_result_trace_row(const str_result* r, size_t i, str_trace_row* row);
STR_API str_status str_result_report(const str_result* r, str_sos_report* report);
STR_API str_status str_result_counters(const str_result* r, uint64_t* sfo, uint64_t* sso);
STR_API str_status str_result_write_trace(const str_result* r, const char* path);
STR_API void str_result_free(str_result* r);

STR_API str_status str_verify_sosp(const str_problem* p, const double* x, double epsilon,
                                   double L2, str_sos_report* report);

/* Runs a JSON experiment spec. out_dir and threads = 0 keep the spec values.
 * *exit_code gets 0, 1 or 2; on 1 or 2 str_last_error() holds the reason. */
STR_API str_status str_experiment_run(const char* spec_path, const char* out_dir,
                                      unsigned threads, int* exit_code);
/* Merged long table; *out is released with str_string_free. */
STR_API str_status str_traces_compare(const char* const* paths, size_t count, char** out);
STR_API void str_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* STOCHTR_STOCHTR_H */
