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

#ifndef STOCHTR_EXPERIMENT_HPP
#define STOCHTR_EXPERIMENT_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stochtr/dataset.hpp"
#include "stochtr/driver.hpp"
#include "stochtr/problem.hpp"

namespace stochtr {

const char* library_version() noexcept;

struct SyntheticSpec {
  std::size_t n = 500;
  std::size_t d = 20;
  std::uint64_t seed = 0;
  bool separable = false;
};

/// Centers a_i ~ N(0, I) for f_i(x) = 0.5 ||x - a_i||^2.
struct QuadraticSpec {
  std::size_t n = 50;
  std::size_t d = 5;
  std::uint64_t seed = 0;
};

struct DatasetSpec {
  std::optional<std::string> path;  // resolved against the spec file directory
  std::optional<std::size_t> d;     // dimension override for LibSVM files
  bool normalize = false;
  std::optional<SyntheticSpec> synthetic;
  std::optional<QuadraticSpec> quadratic;
};

struct VariantSpec {
  std::string label;  // used in file names; defaults to the variant name
  RunConfig config;   // bounds, epsilon, delta and seed are filled per run
  std::optional<double> epsilon;
  std::optional<double> delta;
};

struct ExperimentSpec {
  DatasetSpec dataset;
  ProblemKind task = ProblemKind::logistic_nc;
  double reg_lambda = 1e-3;
  double reg_alpha = 10.0;
  double epsilon = 1e-3;
  double delta = 0.1;
  LipschitzMode lipschitz = LipschitzMode::analytic;
  std::optional<LipschitzBounds> bounds;  // explicit L1, L2
  std::uint64_t lipschitz_seed = 0;
  std::vector<VariantSpec> variants;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  std::string source_text;  // raw JSON, echoed into the summary
};

/// Parses the JSON spec. Relative dataset paths resolve against `base_dir`.
ExperimentSpec parse_experiment_spec(const std::string& json_text,
                                     const std::string& base_dir = {});
ExperimentSpec load_experiment_spec(const std::string& path);

/// Builds the objective described by the spec (loads or generates the data).
FiniteSumProblem build_problem(const ExperimentSpec& spec);

struct RunRecord {
  std::string label;
  Variant variant = Variant::exact_tr;
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  RunResult result;  // partial when the run aborted
  std::string trace_file;
};

struct ExperimentOptions {
  std::optional<std::string> output_dir;  // replaces spec.output_dir
  unsigned threads = 1;
  bool honor_env_seed = true;             // STR_SEED replaces spec seeds
};

struct ExperimentOutcome {
  int exit_code = 0;  // 0 all runs completed, 1 some run failed, 2 bad input
  std::string message;
  std::vector<RunRecord> runs;
  std::string output_dir;
};

/// Runs every (variant, seed) pair and writes trace CSVs plus summary.json.
/// Never throws for input problems; those map to exit code 2.
ExperimentOutcome run_experiment(const std::string& spec_path,
                                 const ExperimentOptions& options = {});
ExperimentOutcome run_experiment(const ExperimentSpec& spec,
                                 const ExperimentOptions& options = {});

inline constexpr const char* kTraceHeader =
    "k,fval,grad_norm,lambda_alg,step_norm,sfo,sso,wall_ms";
inline constexpr const char* kCompareHeader =
    "variant,seed,k,fval_gap,grad_norm,sso,sfo,wall_ms";

void write_trace_csv(std::ostream& out, const std::vector<IterateRecord>& trace);

/// Merges trace files named trace_<variant>_<seed>.csv into one long table,
/// gap taken against the smallest fval over all inputs.
std::string compare_traces(const std::vector<std::string>& paths);

}  // namespace stochtr

#endif  // STOCHTR_EXPERIMENT_HPP
