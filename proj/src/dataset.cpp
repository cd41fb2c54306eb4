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

#include "stochtr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>

#include "stochtr/error.hpp"
#include "stochtr/types.hpp"

namespace stochtr {

namespace {

bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_index(std::string_view tok, long long& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  if (tok.empty()) return false;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

double Dataset::row_squared_norm(std::size_t i) const {
  double s = 0.0;
  for (const auto& e : rows[i]) s += e.value * e.value;
  return s;
}

double Dataset::max_row_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, row_squared_norm(i));
  return std::sqrt(m);
}

bool same_content(const Dataset& a, const Dataset& b) {
  return a.n == b.n && a.d == b.d && a.rows == b.rows && a.labels == b.labels;
}

void validate(const Dataset& ds) {
  require(ds.rows.size() == ds.n && ds.labels.size() == ds.n,
          ErrorCode::dimension, "row/label count differs from n");
  for (std::size_t i = 0; i < ds.n; ++i) {
    require(ds.labels[i] == 1.0 || ds.labels[i] == -1.0, ErrorCode::argument,
            "label outside {-1,+1}");
    std::size_t prev = 0;
    bool first = true;
    for (const auto& e : ds.rows[i]) {
      require(e.index < ds.d, ErrorCode::dimension, "feature index >= d");
      require(first || e.index > prev, ErrorCode::argument,
              "feature indices not strictly increasing");
      require(std::isfinite(e.value), ErrorCode::argument,
              "non-finite feature value");
      prev = e.index;
      first = false;
    }
  }
}

Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> d_override,
                     std::string source) {
  if (d_override && *d_override == 0) fail(ErrorCode::argument, "d_override must be positive");
  Dataset ds;
  ds.source = std::move(source);
  std::size_t max_index = 0;
  bool any_feature = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos)
      view = view.substr(0, hash);
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < view.size()) {
      while (pos < view.size() && is_space(view[pos])) ++pos;
      std::size_t start = pos;
      while (pos < view.size() && !is_space(view[pos])) ++pos;
      if (pos > start) tokens.push_back(view.substr(start, pos - start));
    }
    if (tokens.empty()) continue;

    double label = 0.0;
    if (!parse_double(tokens[0], label) || std::isnan(label))
      throw ParseError(lineno, "malformed label '" + std::string(tokens[0]) + "'");

    SparseRow row;
    row.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos)
        throw ParseError(lineno, "expected idx:val, got '" + std::string(tok) + "'");
      long long idx = 0;
      double val = 0.0;
      if (!parse_index(tok.substr(0, colon), idx))
        throw ParseError(lineno, "malformed index in '" + std::string(tok) + "'");
      if (idx <= 0)
        throw ParseError(lineno, "index must be >= 1, got " + std::to_string(idx));
      if (!parse_double(tok.substr(colon + 1), val) || !std::isfinite(val))
        throw ParseError(lineno, "malformed value in '" + std::string(tok) + "'");
      row.push_back({static_cast<std::size_t>(idx - 1), val});
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (row[k].index == row[k - 1].index)
        throw ParseError(lineno, "duplicate index " + std::to_string(row[k].index + 1));
    }
    if (!row.empty()) {
      max_index = std::max(max_index, row.back().index);
      any_feature = true;
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label > 0.0 ? 1.0 : -1.0);
  }
  if (in.bad()) fail(ErrorCode::io, "stream read failure");
  ds.n = ds.rows.size();
  const std::size_t observed = any_feature ? max_index + 1 : 0;
  if (d_override) {
    if (*d_override < observed)
      fail(ErrorCode::dimension, "d_override " + std::to_string(*d_override) +
                                     " is smaller than max index + 1 = " +
                                     std::to_string(observed));
    ds.d = *d_override;
  } else {
    ds.d = observed;
  }
  return ds;
}

Dataset parse_libsvm_text(const std::string& text,
                          std::optional<std::size_t> d_override) {
  std::istringstream in(text);
  return parse_libsvm(in, d_override, "<memory>");
}

Dataset load_libsvm(const std::string& path, std::optional<std::size_t> d_override) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open dataset '" + path + "'");
  return parse_libsvm(in, d_override, path);
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
  char buf[64];
  for (std::size_t i = 0; i < ds.n; ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    for (const auto& e : ds.rows[i]) {
      auto res = std::to_chars(buf, buf + sizeof(buf), e.value);
      out << ' ' << (e.index + 1) << ':' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

Dataset generate_synthetic(std::size_t n, std::size_t d, std::uint64_t seed,
                           bool separable) {
  require(n >= 1 && d >= 1, ErrorCode::argument, "synthetic dataset needs n >= 1 and d >= 1");
  CounterRng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> plane(d);
  for (auto& w : plane) w = normal(rng);

  Dataset ds;
  ds.n = n;
  ds.d = d;
  ds.source = "synthetic:n=" + std::to_string(n) + ",d=" + std::to_string(d) +
              ",seed=" + std::to_string(seed) + (separable ? ",separable" : "");
  ds.rows.resize(n);
  ds.labels.resize(n);
  std::vector<double> feat(d);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (auto& v : feat) {
      v = normal(rng);
      sq += v * v;
    }
    // A zero draw has probability zero; redraw anyway rather than divide by 0.
    while (sq == 0.0) {
      for (auto& v : feat) {
        v = normal(rng);
        sq += v * v;
      }
    }
    const double inv = 1.0 / std::sqrt(sq);
    double margin = 0.0;
    auto& row = ds.rows[i];
    row.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      row.push_back({j, feat[j] * inv});
      margin += plane[j] * feat[j] * inv;
    }
    double y = margin >= 0.0 ? 1.0 : -1.0;
    const double u = rng.uniform01();
    if (!separable && u < 0.1) y = -y;
    ds.labels[i] = y;
  }
  return ds;
}

Dataset normalize_rows(const Dataset& ds) {
  Dataset out = ds;
  for (std::size_t i = 0; i < out.n; ++i) {
    const double nrm = std::sqrt(out.row_squared_norm(i));
    if (nrm == 0.0) continue;
    for (auto& e : out.rows[i]) e.value /= nrm;
  }
  return out;
}

}  // namespace stochtr
