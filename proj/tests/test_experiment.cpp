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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "oracles.hpp"
#include "stochtr/experiment.hpp"

using namespace stochtr;
using oracle::error_of;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::temp_directory_path() /
                 (std::string("stochtr_") + info->test_suite_name() + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

// Drops the wall_ms column so runs can be compared byte for byte.
std::string without_wall(const std::string& text) {
  std::string out;
  for (auto& row : csv(text)) {
    row.pop_back();
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

const char* kQuadSpec = R"({
  "dataset": {"quadratic": {"n": 30, "d": 4, "seed": 2}},
  "epsilon": 1e-3,
  "lipschitz": {"L1": 1, "L2": 1},
  "variants": [{"variant": "exact_tr"}],
  "seeds": [5],
  "output_dir": "out"
})";

const char* kLogisticSpec = R"({
  "dataset": {"synthetic": {"n": 300, "d": 8, "seed": 4}},
  "task": "logistic_nc",
  "variants": [{"variant": "exact_tr"},
               {"variant": "str1", "name": "str1_fast", "mode": "practical", "kappa": 0.05},
               {"variant": "subsampled"}],
  "seeds": [1, 2]
})";

}  // namespace

TEST(Spec, DefaultsAndOverrides) {
  const ExperimentSpec s = parse_experiment_spec(kLogisticSpec);
  EXPECT_EQ(s.reg_lambda, 1e-3);
  EXPECT_EQ(s.reg_alpha, 10.0);
  EXPECT_EQ(s.task, ProblemKind::logistic_nc);
  ASSERT_EQ(s.variants.size(), 3u);
  EXPECT_EQ(s.variants[1].label, "str1_fast");
  EXPECT_EQ(s.variants[1].config.mode, ScheduleMode::practical);
  EXPECT_EQ(s.variants[1].config.kappa, 0.05);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{1, 2}));
  const FiniteSumProblem p = build_problem(s);
  EXPECT_EQ(p.n(), 300u);
  EXPECT_EQ(p.reg_alpha(), 10.0);
}

TEST(Spec, Rejections) {
  EXPECT_EQ(error_of([] { parse_experiment_spec("{"); }), ErrorCode::parse);
  EXPECT_EQ(error_of([] { parse_experiment_spec(R"({"dataset": "a", "variants": [], "seeds": [1]})"); }),
            ErrorCode::argument);
  EXPECT_EQ(error_of([] {
              parse_experiment_spec(
                  R"({"dataset": "a", "variants": [{"variant": "exact_tr"}], "seeds": []})");
            }),
            ErrorCode::argument);
  EXPECT_EQ(error_of([] {
              parse_experiment_spec(R"({"dataset": "a", "variants": [{"variant": "exact_tr"}],
                                       "seeds": [1], "lambda": 3})");
            }),
            ErrorCode::argument);
  EXPECT_EQ(error_of([] {
              parse_experiment_spec(R"({"dataset": "a", "variants": [{"variant": "bfgs"}],
                                       "seeds": [1]})");
            }),
            ErrorCode::argument);
  EXPECT_EQ(error_of([] {
              parse_experiment_spec(R"({"dataset": "a", "variants": [{"variant": "str1"},
                                       {"variant": "str1"}], "seeds": [1]})");
            }),
            ErrorCode::argument);
}

TEST(Spec, RelativePathsResolveAgainstSpecDir) {
  const ExperimentSpec s = parse_experiment_spec(
      R"({"dataset": {"path": "d.txt"}, "variants": [{"variant": "exact_tr"}], "seeds": [1]})",
      "/data/exp");
  EXPECT_EQ(*s.dataset.path, "/data/exp/d.txt");
  EXPECT_EQ(s.output_dir, "/data/exp/out");
}

TEST(RunExperiment, QuadraticTraceNonIncreasing) {
  const fs::path dir = scratch_dir();
  write(dir / "spec.json", kQuadSpec);
  const ExperimentOutcome o = run_experiment((dir / "spec.json").string());
  ASSERT_EQ(o.exit_code, 0) << o.message;
  const auto rows = csv(slurp(dir / "out" / "trace_exact_tr_5.csv"));
  ASSERT_GE(rows.size(), 2u);
  const std::string text = slurp(dir / "out" / "trace_exact_tr_5.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), kTraceHeader);
  for (std::size_t i = 2; i < rows.size(); ++i)
    EXPECT_LE(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));

  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["version"], library_version());
  const auto& run = summary["runs"][0];
  EXPECT_EQ(run["status"], "completed");
  EXPECT_EQ(run["stop_reason"], "dual_threshold");
  EXPECT_TRUE(run["report"]["certified"].get<bool>());
  EXPECT_EQ(run["counters"]["sso"].get<std::uint64_t>(), o.runs[0].result.counters.sso);
  EXPECT_EQ(summary["config"]["epsilon"], 1e-3);
}

TEST(RunExperiment, ReproducibleModuloWallTime) {
  const fs::path dir = scratch_dir();
  write(dir / "spec.json", kLogisticSpec);
  ExperimentOptions a, b;
  a.output_dir = (dir / "a").string();
  b.output_dir = (dir / "b").string();
  b.threads = 3;
  ASSERT_EQ(run_experiment((dir / "spec.json").string(), a).exit_code, 0);
  ASSERT_EQ(run_experiment((dir / "spec.json").string(), b).exit_code, 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    EXPECT_EQ(without_wall(slurp(e.path())), without_wall(slurp(dir / "b" / e.path().filename())))
        << e.path();
  }
  EXPECT_EQ(files, 6);
}

TEST(RunExperiment, EnvironmentSeedOverride) {
  const fs::path dir = scratch_dir();
  write(dir / "spec.json", kQuadSpec);
  ::setenv("STR_SEED", "77", 1);
  const ExperimentOutcome o = run_experiment((dir / "spec.json").string());
  ::unsetenv("STR_SEED");
  ASSERT_EQ(o.exit_code, 0);
  ASSERT_EQ(o.runs.size(), 1u);
  EXPECT_EQ(o.runs[0].seed, 77u);
  EXPECT_TRUE(fs::exists(dir / "out" / "trace_exact_tr_77.csv"));
}

TEST(RunExperiment, ExitCodes) {
  const fs::path dir = scratch_dir();
  EXPECT_EQ(run_experiment((dir / "missing.json").string()).exit_code, 2);
  write(dir / "bad.json", "{ not json");
  EXPECT_EQ(run_experiment((dir / "bad.json").string()).exit_code, 2);
  write(dir / "nodata.json",
        R"({"dataset": "nowhere.libsvm", "variants": [{"variant": "exact_tr"}], "seeds": [1]})");
  const ExperimentOutcome nodata = run_experiment((dir / "nodata.json").string());
  EXPECT_EQ(nodata.exit_code, 2);
  EXPECT_NE(nodata.message.find("nowhere.libsvm"), std::string::npos);

  write(dir / "fail.json", R"({
    "dataset": {"quadratic": {"n": 5, "d": 2}},
    "variants": [{"variant": "exact_tr"}, {"variant": "str1", "mode": "practical", "kappa": 2}],
    "seeds": [1]})");
  const ExperimentOutcome fail = run_experiment((dir / "fail.json").string());
  EXPECT_EQ(fail.exit_code, 1);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["runs"][0]["status"], "completed");
  EXPECT_EQ(summary["runs"][1]["status"], "failed");
  EXPECT_FALSE(summary["runs"][1]["error"].get<std::string>().empty());
}

TEST(RunExperiment, LibsvmFileDataset) {
  const fs::path dir = scratch_dir();
  std::ofstream data(dir / "toy.libsvm");
  write_libsvm(data, generate_synthetic(60, 4, 3, false));
  data.close();
  write(dir / "spec.json", R"({"dataset": {"path": "toy.libsvm", "normalize": true},
    "task": "nls_nc", "variants": [{"variant": "exact_tr", "solver": "lanczos"}], "seeds": [0]})");
  const ExperimentOutcome o = run_experiment((dir / "spec.json").string());
  ASSERT_EQ(o.exit_code, 0) << o.message;
  EXPECT_TRUE(o.runs[0].result.report.certified);
}

TEST(Compare, SingleInputGaps) {
  const fs::path dir = scratch_dir();
  write(dir / "spec.json", kQuadSpec);
  ASSERT_EQ(run_experiment((dir / "spec.json").string()).exit_code, 0);
  const std::string merged = compare_traces({(dir / "out" / "trace_exact_tr_5.csv").string()});
  const auto rows = csv(merged);
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(merged.substr(0, merged.find('\n')), kCompareHeader);
  double min_gap = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i][0], "exact_tr");
    EXPECT_EQ(rows[i][1], "5");
    min_gap = std::min(min_gap, std::stod(rows[i][3]));
  }
  EXPECT_EQ(min_gap, 0.0);
  EXPECT_GE(std::stod(rows.back()[3]), 0.0);
}

TEST(Compare, MergesAndSorts) {
  const fs::path dir = scratch_dir();
  write(dir / "spec.json", kLogisticSpec);
  ASSERT_EQ(run_experiment((dir / "spec.json").string()).exit_code, 0);
  std::vector<std::string> files;
  std::size_t total = 0;
  for (const char* f : {"trace_subsampled_2.csv", "trace_exact_tr_1.csv", "trace_str1_fast_2.csv",
                        "trace_str1_fast_1.csv"}) {
    files.push_back((dir / "out" / f).string());
    total += csv(slurp(dir / "out" / f)).size() - 1;
  }
  const auto rows = csv(compare_traces(files));
  EXPECT_EQ(rows.size() - 1, total);
  auto sorted = std::vector<std::vector<std::string>>(rows.begin() + 1, rows.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a[0], std::stoull(a[1]), std::stoull(a[2])) <
           std::make_tuple(b[0], std::stoull(b[1]), std::stoull(b[2]));
  });
  EXPECT_TRUE(std::equal(sorted.begin(), sorted.end(), rows.begin() + 1));
  EXPECT_EQ(rows[1][0], "exact_tr");
  EXPECT_EQ(rows.back()[0], "subsampled");
}

TEST(Compare, FormatErrorsNameTheFile) {
  const fs::path dir = scratch_dir();
  write(dir / "trace_a_1.csv", "k,fval\n0,1\n");
  try {
    compare_traces({(dir / "trace_a_1.csv").string()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::format);
    EXPECT_NE(std::string(e.what()).find("trace_a_1.csv"), std::string::npos);
  }
  write(dir / "other.csv", std::string(kTraceHeader) + "\n");
  EXPECT_EQ(error_of([&] { compare_traces({(dir / "other.csv").string()}); }), ErrorCode::format);
  write(dir / "trace_b_2.csv", std::string(kTraceHeader) + "\n0,1,2\n");
  EXPECT_EQ(error_of([&] { compare_traces({(dir / "trace_b_2.csv").string()}); }),
            ErrorCode::format);
}
