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

#include "stochtr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace stochtr {

namespace fs = std::filesystem;
using nlohmann::json;

const char* library_version() noexcept { return STOCHTR_VERSION; }

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  require(obj.is_object(), ErrorCode::argument, "expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorCode::argument, "unknown key '" + key + "' in " + where);
  }
}

template <class T>
std::optional<T> opt(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::size_t positive_size(const json& obj, const char* key, std::size_t fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  require(it->is_number_unsigned() && it->get<std::size_t>() > 0, ErrorCode::argument,
          "size fields must be positive integers");
  return it->get<std::size_t>();
}

std::optional<std::size_t> opt_positive(const json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  return positive_size(obj, key, 0);
}

ProblemKind parse_task(const std::string& s) {
  if (s == "logistic_nc") return ProblemKind::logistic_nc;
  if (s == "nls_nc") return ProblemKind::nls_nc;
  if (s == "synthetic_quad") return ProblemKind::synthetic_quad;
  fail(ErrorCode::argument, "unknown task '" + s + "'");
}

DatasetSpec parse_dataset(const json& j, const std::string& base_dir) {
  DatasetSpec ds;
  if (j.is_string()) {
    j.get_to(ds.path.emplace());
  } else {
    check_keys(j, {"path", "d", "normalize", "synthetic", "quadratic"}, "dataset");
    ds.path = opt<std::string>(j, "path");
    ds.d = opt_positive(j, "d");
    ds.normalize = j.value("normalize", false);
    if (j.contains("synthetic")) {
      const json& s = j.at("synthetic");
      check_keys(s, {"n", "d", "seed", "separable"}, "dataset.synthetic");
      SyntheticSpec syn;
      syn.n = positive_size(s, "n", syn.n);
      syn.d = positive_size(s, "d", syn.d);
      syn.seed = s.value("seed", std::uint64_t{0});
      syn.separable = s.value("separable", false);
      ds.synthetic = syn;
    }
    if (j.contains("quadratic")) {
      const json& q = j.at("quadratic");
      check_keys(q, {"n", "d", "seed"}, "dataset.quadratic");
      QuadraticSpec quad;
      quad.n = positive_size(q, "n", quad.n);
      quad.d = positive_size(q, "d", quad.d);
      quad.seed = q.value("seed", std::uint64_t{0});
      ds.quadratic = quad;
    }
  }
  const int sources = ds.path.has_value() + ds.synthetic.has_value() + ds.quadratic.has_value();
  require(sources == 1, ErrorCode::argument,
          "dataset needs exactly one of path, synthetic, quadratic");
  if (ds.path && !base_dir.empty() && fs::path(*ds.path).is_relative())
    ds.path = (fs::path(base_dir) / *ds.path).string();
  return ds;
}

HessOption parse_option(const std::string& s) {
  if (s == "I") return HessOption::I;
  if (s == "II") return HessOption::II;
  fail(ErrorCode::argument, "hessian option must be \"I\" or \"II\"");
}

VariantSpec parse_variant_spec(const json& j) {
  check_keys(j,
             {"variant", "name", "epsilon", "delta", "radius", "max_iterations", "delta_hat",
              "solver", "solver_tol", "lanczos_max_dim", "mode", "kappa", "p1", "s1", "p2",
              "s2", "s2_prime", "option", "option1_log_without_k0", "subsample_grad",
              "subsample_hess", "x0", "keep_iterates"},
             "variant");
  require(j.contains("variant"), ErrorCode::argument, "variant entry needs 'variant'");
  VariantSpec v;
  RunConfig& c = v.config;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  v.label = j.value("name", std::string(variant_name(c.variant)));
  require(!v.label.empty() && v.label.find_first_of("/\\ ,") == std::string::npos,
          ErrorCode::argument, "variant name must be non-empty without '/', ',' or spaces");
  v.epsilon = opt<double>(j, "epsilon");
  v.delta = opt<double>(j, "delta");
  c.radius = opt<double>(j, "radius");
  c.max_iterations = opt_positive(j, "max_iterations");
  c.delta_hat = opt<double>(j, "delta_hat");
  if (auto s = opt<std::string>(j, "solver")) c.solver = parse_solver(*s);
  c.solver_tol = j.value("solver_tol", c.solver_tol);
  c.lanczos_max_dim = j.value("lanczos_max_dim", std::size_t{0});
  if (auto s = opt<std::string>(j, "mode")) c.mode = parse_schedule_mode(*s);
  c.kappa = j.value("kappa", c.kappa);
  c.overrides.p1 = opt_positive(j, "p1");
  c.overrides.s1 = opt_positive(j, "s1");
  c.overrides.p2 = opt_positive(j, "p2");
  c.overrides.s2 = opt_positive(j, "s2");
  c.overrides.s2_prime = opt_positive(j, "s2_prime");
  if (auto s = opt<std::string>(j, "option")) c.overrides.option = parse_option(*s);
  c.overrides.option1_log_without_k0 = j.value("option1_log_without_k0", false);
  c.subsample_grad = j.value("subsample_grad", std::size_t{0});
  c.subsample_hess = j.value("subsample_hess", std::size_t{0});
  c.keep_iterates = j.value("keep_iterates", false);
  if (j.contains("x0")) {
    const auto vals = j.at("x0").get<std::vector<double>>();
    c.x0 = Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  }
  return v;
}

json bounds_json(const LipschitzBounds& b) {
  const char* prov = b.provenance == BoundsProvenance::analytic  ? "analytic"
                     : b.provenance == BoundsProvenance::sampled ? "sampled"
                                                                 : "user";
  return {{"L1", b.L1}, {"L2", b.L2}, {"provenance", prov}};
}

json counters_json(const OracleCounters& c) {
  return {{"sfo", c.sfo}, {"sso", c.sso}, {"fval", c.fval}};
}

json params_json(const ResolvedParams& p) {
  json j = {{"radius", p.radius},       {"max_iterations", p.max_iterations},
            {"delta_hat", p.delta_hat}, {"dual_threshold", p.dual_threshold},
            {"K0", p.K0}};
  if (p.grad_schedule)
    j["gradient_schedule"] = {{"p1", p.grad_schedule->p1}, {"s1", p.grad_schedule->s1}};
  if (p.hess_schedule)
    j["hessian_schedule"] = {{"option", p.hess_schedule->option == HessOption::I ? "I" : "II"},
                             {"p2", p.hess_schedule->p2},
                             {"s2", p.hess_schedule->s2},
                             {"s2_prime", p.hess_schedule->s2_prime}};
  if (p.subsample_grad != 0)
    j["subsample"] = {{"gradient", p.subsample_grad}, {"hessian", p.subsample_hess}};
  return j;
}

json run_json(const RunRecord& r) {
  const RunResult& res = r.result;
  json j = {{"variant", r.label},
            {"algorithm", variant_name(r.variant)},
            {"seed", r.seed},
            {"status", r.completed ? "completed" : "failed"},
            {"trace_file", r.trace_file},
            {"iterations", res.trace.size()},
            {"counters", counters_json(res.counters)},
            {"params", params_json(res.params)}};
  if (!r.completed) {
    j["error"] = r.error;
    return j;
  }
  j["stop_reason"] = stop_reason_name(res.stop_reason);
  j["returned_index"] = res.returned_index;
  j["initial_fval"] = res.initial_fval;
  j["final_fval"] = res.final_fval;
  j["report"] = {{"grad_norm", res.report.grad_norm},
                 {"min_eig", res.report.min_eig},
                 {"grad_threshold", res.report.grad_threshold},
                 {"eig_threshold", res.report.eig_threshold},
                 {"grad_ok", res.report.grad_ok},
                 {"eig_ok", res.report.eig_ok},
                 {"certified", res.report.certified}};
  return j;
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("STR_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const char* end = s + std::char_traits<char>::length(s);
  auto [ptr, ec] = std::from_chars(s, end, v);
  require(ec == std::errc() && ptr == end, ErrorCode::argument,
          "STR_SEED must be an unsigned integer");
  return v;
}

}  // namespace

ExperimentSpec parse_experiment_spec(const std::string& json_text,
                                     const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::parse, std::string("spec is not valid JSON: ") + e.what());
  }
  ExperimentSpec spec;
  spec.source_text = json_text;
  try {
    check_keys(j,
               {"dataset", "task", "reg_lambda", "reg_alpha", "epsilon", "delta",
                "lipschitz", "lipschitz_seed", "variants", "seeds", "output_dir"},
               "spec");
    require(j.contains("dataset"), ErrorCode::argument, "spec needs 'dataset'");
    spec.dataset = parse_dataset(j.at("dataset"), base_dir);
    if (spec.dataset.quadratic) spec.task = ProblemKind::synthetic_quad;
    if (auto t = opt<std::string>(j, "task")) spec.task = parse_task(*t);
    require((spec.task == ProblemKind::synthetic_quad) == spec.dataset.quadratic.has_value(),
            ErrorCode::argument, "task synthetic_quad goes with dataset.quadratic only");
    spec.reg_lambda = j.value("reg_lambda", spec.reg_lambda);
    spec.reg_alpha = j.value("reg_alpha", spec.reg_alpha);
    require(spec.reg_lambda >= 0.0 && spec.reg_alpha > 0.0, ErrorCode::argument,
            "reg_lambda must be >= 0 and reg_alpha > 0");
    spec.epsilon = j.value("epsilon", spec.epsilon);
    spec.delta = j.value("delta", spec.delta);
    if (j.contains("lipschitz")) {
      const json& l = j.at("lipschitz");
      if (l.is_string()) {
        const auto s = l.get<std::string>();
        if (s == "analytic") spec.lipschitz = LipschitzMode::analytic;
        else if (s == "sampled") spec.lipschitz = LipschitzMode::sampled;
        else fail(ErrorCode::argument, "lipschitz must be analytic, sampled or {L1, L2}");
      } else {
        check_keys(l, {"L1", "L2"}, "lipschitz");
        LipschitzBounds b;
        b.L1 = l.at("L1").get<double>();
        b.L2 = l.at("L2").get<double>();
        b.provenance = BoundsProvenance::user;
        require(b.L1 > 0.0 && b.L2 > 0.0, ErrorCode::argument, "L1 and L2 must be positive");
        spec.bounds = b;
      }
    }
    spec.lipschitz_seed = j.value("lipschitz_seed", std::uint64_t{0});
    require(j.contains("variants") && j.at("variants").is_array() && !j.at("variants").empty(),
            ErrorCode::argument, "spec needs at least one variant");
    std::set<std::string> labels;
    for (const json& v : j.at("variants")) {
      spec.variants.push_back(parse_variant_spec(v));
      require(labels.insert(spec.variants.back().label).second, ErrorCode::argument,
              "variant names must be unique");
    }
    require(j.contains("seeds") && j.at("seeds").is_array() && !j.at("seeds").empty(),
            ErrorCode::argument, "spec needs at least one seed");
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.output_dir = j.value("output_dir", spec.output_dir);
    if (!base_dir.empty() && fs::path(spec.output_dir).is_relative())
      spec.output_dir = (fs::path(base_dir) / spec.output_dir).string();
  } catch (const json::exception& e) {
    fail(ErrorCode::argument, std::string("bad spec field: ") + e.what());
  }
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open spec '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_spec(buf.str(), fs::path(path).parent_path().string());
}

FiniteSumProblem build_problem(const ExperimentSpec& spec) {
  const DatasetSpec& ds = spec.dataset;
  if (ds.quadratic) {
    CounterRng rng(ds.quadratic->seed);
    std::normal_distribution<double> normal;
    Matrix centers(ds.quadratic->n, ds.quadratic->d);
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      for (Eigen::Index j = 0; j < centers.cols(); ++j) centers(i, j) = normal(rng);
    return FiniteSumProblem::quadratic(std::move(centers));
  }
  Dataset data = ds.path ? load_libsvm(*ds.path, ds.d)
                         : generate_synthetic(ds.synthetic->n, ds.synthetic->d,
                                              ds.synthetic->seed, ds.synthetic->separable);
  if (ds.normalize) data = normalize_rows(data);
  auto shared = std::make_shared<const Dataset>(std::move(data));
  if (spec.task == ProblemKind::nls_nc)
    return FiniteSumProblem::nonlinear_least_squares(shared, spec.reg_lambda, spec.reg_alpha);
  return FiniteSumProblem::logistic(shared, spec.reg_lambda, spec.reg_alpha);
}

void write_trace_csv(std::ostream& out, const std::vector<IterateRecord>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.k << ',' << format_double(r.fval) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.lambda_alg) << ',' << format_double(r.step_norm) << ',' << r.sfo
        << ',' << r.sso << ',' << format_double(r.wall_ms) << '\n';
  }
}

ExperimentOutcome run_experiment(const std::string& spec_path,
                                 const ExperimentOptions& options) {
  ExperimentSpec spec;
  try {
    spec = load_experiment_spec(spec_path);
  } catch (const Error& e) {
    ExperimentOutcome out;
    out.exit_code = 2;
    out.message = e.what();
    return out;
  }
  return run_experiment(spec, options);
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec_in,
                                 const ExperimentOptions& options) {
  ExperimentOutcome outcome;
  ExperimentSpec spec = spec_in;
  std::optional<FiniteSumProblem> problem;
  LipschitzBounds bounds;
  try {
    if (options.honor_env_seed)
      if (auto s = env_seed()) spec.seeds = {*s};
    if (options.output_dir) spec.output_dir = *options.output_dir;
    problem = build_problem(spec);
    bounds = spec.bounds ? *spec.bounds
                         : lipschitz_bounds(*problem, spec.lipschitz, spec.lipschitz_seed);
    fs::create_directories(spec.output_dir);
  } catch (const std::exception& e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
    return outcome;
  }
  outcome.output_dir = spec.output_dir;

  for (const auto& v : spec.variants)
    for (std::uint64_t seed : spec.seeds) {
      RunRecord r;
      r.label = v.label;
      r.variant = v.config.variant;
      r.seed = seed;
      r.trace_file = "trace_" + v.label + "_" + std::to_string(seed) + ".csv";
      outcome.runs.push_back(std::move(r));
    }
  const std::size_t per_variant = spec.seeds.size();

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx; (idx = next.fetch_add(1)) < outcome.runs.size();) {
      RunRecord& rec = outcome.runs[idx];
      const VariantSpec& v = spec.variants[idx / per_variant];
      RunConfig cfg = v.config;
      cfg.epsilon = v.epsilon.value_or(spec.epsilon);
      cfg.delta = v.delta.value_or(spec.delta);
      cfg.bounds = bounds;
      cfg.seed = rec.seed;
      try {
        rec.result = run(*problem, cfg);
        rec.completed = true;
      } catch (const RunAborted& e) {
        rec.result = e.partial();
        rec.error = e.what();
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      std::ofstream out(fs::path(spec.output_dir) / rec.trace_file, std::ios::binary);
      write_trace_csv(out, rec.result.trace);
      if (!out) {
        rec.completed = false;
        rec.error = "cannot write " + rec.trace_file;
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, outcome.runs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  json summary;
  summary["version"] = library_version();
  summary["bounds"] = bounds_json(bounds);
  summary["n"] = problem->n();
  summary["d"] = problem->d();
  summary["config"] = json::parse(spec.source_text, nullptr, false);
  summary["seeds"] = spec.seeds;
  summary["runs"] = json::array();
  for (const auto& r : outcome.runs) {
    summary["runs"].push_back(run_json(r));
    if (!r.completed) {
      outcome.exit_code = 1;
      if (outcome.message.empty())
        outcome.message = r.label + " seed " + std::to_string(r.seed) + ": " + r.error;
    }
  }
  std::ofstream out(fs::path(spec.output_dir) / "summary.json", std::ios::binary);
  out << summary.dump(2) << '\n';
  if (!out) {
    outcome.exit_code = 2;
    outcome.message = "cannot write summary.json";
  }
  return outcome;
}

namespace {

struct TraceRow {
  std::string variant;
  std::uint64_t seed = 0;
  std::uint64_t k = 0;
  double fval = 0.0;
  std::string grad_norm, sfo, sso, wall_ms;
};

double parse_field(const std::string& s, const std::string& file, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    fail(ErrorCode::format, file + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string compare_traces(const std::vector<std::string>& paths) {
  require(!paths.empty(), ErrorCode::argument, "compare needs at least one trace file");
  std::vector<TraceRow> rows;
  for (const auto& path : paths) {
    const std::string stem = fs::path(path).stem().string();
    const auto last = stem.rfind('_');
    if (stem.rfind("trace_", 0) != 0 || last == std::string::npos || last <= 6)
      fail(ErrorCode::format, path + ": file name is not trace_<variant>_<seed>.csv");
    const std::string variant = stem.substr(6, last - 6);
    std::uint64_t seed = 0;
    const std::string seed_text = stem.substr(last + 1);
    auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
    if (ec != std::errc() || ptr != seed_text.data() + seed_text.size())
      fail(ErrorCode::format, path + ": file name is not trace_<variant>_<seed>.csv");

    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
      fail(ErrorCode::format, path + ": header mismatch");
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() != 8)
        fail(ErrorCode::format, path + ":" + std::to_string(lineno) + ": expected 8 fields");
      TraceRow r;
      r.variant = variant;
      r.seed = seed;
      r.k = static_cast<std::uint64_t>(parse_field(f[0], path, lineno));
      r.fval = parse_field(f[1], path, lineno);
      for (int c : {2, 5, 6, 7}) parse_field(f[c], path, lineno);
      r.grad_norm = f[2];
      r.sfo = f[5];
      r.sso = f[6];
      r.wall_ms = f[7];
      rows.push_back(std::move(r));
    }
  }
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) fmin = std::min(fmin, r.fval);
  std::stable_sort(rows.begin(), rows.end(), [](const TraceRow& a, const TraceRow& b) {
    return std::tie(a.variant, a.seed, a.k) < std::tie(b.variant, b.seed, b.k);
  });
  std::string out = std::string(kCompareHeader) + "\n";
  for (const auto& r : rows) {
    out += r.variant + ',' + std::to_string(r.seed) + ',' + std::to_string(r.k) + ',' +
           format_double(r.fval - fmin) + ',' + r.grad_norm + ',' + r.sso + ',' + r.sfo + ',' +
           r.wall_ms + '\n';
  }
  return out;
}

}  // namespace stochtr
