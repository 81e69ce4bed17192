//
// Copyright 2026 The Curagen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef CURAGEN_COMMON_HPP_
#define CURAGEN_COMMON_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curagen {

// Failure categories. Each maps to one process exit code in the CLI.
enum class ErrorKind {
  kConfig,     // bad configuration or arguments
  kIo,         // unreadable/unwritable files, malformed input files
  kProvider,   // embedding provider failures
  kInvariant,  // internal invariant violated
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// 0 ok, 2 config, 3 io, 4 provider, 5 internal invariant.
int exit_code_for(ErrorKind kind);

// Dense row-major matrix of doubles. Rows are embedding vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  // Appends a row; the first row fixes the column count.
  void append_row(std::span<const double> values);

  // New matrix made of the given rows, in the given order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// SplitMix64 finalizer; used for all seed derivations.
std::uint64_t mix64(std::uint64_t x);
// Order-sensitive combination of two seed components.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);
// Seed component for a string (FNV-1a 64, then mixed).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt);

std::uint64_t fnv1a64(std::string_view bytes);

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

// Seeded generator. Bounded integers and normals are derived from the raw
// 64-bit stream with fixed algorithms so draws do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform integer in [0, bound). bound must be positive.
  std::size_t uniform_index(std::size_t bound);
  // Uniform double in [0, 1).
  double uniform01();
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// k distinct values from [0, n) drawn uniformly, in draw order
// (partial Fisher-Yates). Requires k <= n.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n,
                                                    std::size_t k);

bool all_finite(std::span<const double> values);

std::string read_file(const std::string& path);
// Writes via a temporary file and rename.
void write_file(const std::string& path, std::string_view contents);

}  // namespace curagen

#endif  // CURAGEN_COMMON_HPP_
