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

#ifndef STOCHTR_DATASET_HPP
#define STOCHTR_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace stochtr {

struct SparseEntry {
  std::size_t index;  // zero-based
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

using SparseRow = std::vector<SparseEntry>;

/// Labeled sparse sample matrix. Indices within a row are strictly
/// increasing and below d; labels are exactly -1 or +1.
struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<SparseRow> rows;
  std::vector<double> labels;
  std::string source;

  double row_squared_norm(std::size_t i) const;
  double max_row_norm() const;
  /// Dot product of row i with a dense vector of length d.
  template <class Dense>
  double dot(std::size_t i, const Dense& x) const {
    double s = 0.0;
    for (const auto& e : rows[i]) s += e.value * x[e.index];
    return s;
  }
};

/// Same content ignoring the provenance string.
bool same_content(const Dataset& a, const Dataset& b);

/// Throws Error(dimension/argument) when an invariant is broken.
void validate(const Dataset& ds);

/// Reads `<label> <idx>:<val> ...` lines with one-based indices. Blank lines
/// and '#' comments are skipped; CR before LF is tolerated.
Dataset parse_libsvm(std::istream& in, std::optional<std::size_t> d_override = {},
                     std::string source = {});
Dataset parse_libsvm_text(const std::string& text,
                          std::optional<std::size_t> d_override = {});
Dataset load_libsvm(const std::string& path,
                    std::optional<std::size_t> d_override = {});

/// Writes one-based LibSVM text with round-trip precision.
void write_libsvm(std::ostream& out, const Dataset& ds);

/// Standard-normal features scaled to unit row norm; labels from a random
/// hyperplane, each flipped with probability 0.1 unless `separable`.
Dataset generate_synthetic(std::size_t n, std::size_t d, std::uint64_t seed,
                           bool separable);

Dataset normalize_rows(const Dataset& ds);

}  // namespace stochtr

#endif  // STOCHTR_DATASET_HPP
