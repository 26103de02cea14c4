#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "respec/error.hpp"

namespace respec {

/// Unit-norm real vector. Only constructible through normalize(), so the
/// unit-norm invariant holds for every instance.
class Embedding {
 public:
  Embedding() = default;

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  explicit Embedding(std::vector<double> values) : values_(std::move(values)) {}
  friend Embedding normalize(std::span<const double> v);

  std::vector<double> values_;
};

// Vectors whose squared norm is this close to 1 are returned unchanged, which
// makes normalize() bitwise idempotent.
inline constexpr double kUnitSquaredNormTolerance = 1e-12;
inline constexpr double kMinNorm = 1e-6;

Embedding normalize(std::span<const double> v);
Embedding normalize(std::span<const float> v);
Embedding normalize(std::initializer_list<double> v);

/// Unchecked dot product with a fixed eight-lane accumulation order, so the
/// result never depends on buffer alignment or thread placement.
inline double dot_kernel(const double* a, const double* b, std::size_t n) noexcept {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  }
  for (std::size_t l = 0; i < n; ++i, ++l) acc[l] += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

double dot(std::span<const double> a, std::span<const double> b);
double dot(const Embedding& a, const Embedding& b);
double euclidean_distance(const Embedding& a, const Embedding& b);

/// m + ln sum(exp(v_i - m)) with m = max(v).
double log_sum_exp(std::span<const double> values);

/// Linear interpolation between order statistics: h = (N-1) p.
double quantile(std::span<const double> values, double p);
/// Same as quantile() for input that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

/// Row-major N x z matrix of unit-norm rows.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Normalizes every row of a row-major buffer.
  static EmbeddingMatrix from_rows(std::span<const double> data, std::size_t dim);
  static EmbeddingMatrix from_rows(std::span<const float> data, std::size_t dim);
  static EmbeddingMatrix from_embeddings(std::span<const Embedding> rows);

  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  Embedding row_embedding(std::size_t i) const { return normalize(row(i)); }
  std::span<const double> data() const noexcept { return data_; }

  /// Rows sorted by index order; used by test code and analysis to select subsets.
  EmbeddingMatrix select(std::span<const std::size_t> indices) const;

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::vector<double> data_;
  std::size_t dim_ = 0;
};

}  // namespace respec
