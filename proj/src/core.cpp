#include "respec/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace respec {

namespace {

template <typename T>
double squared_norm(std::span<const T> v) {
  double s = 0.0;
  for (T x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return s;
}

}  // namespace

Embedding normalize(std::span<const double> v) {
  if (v.size() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "embedding dimension must be >= 2, got " + std::to_string(v.size()));
  }
  const double sq = squared_norm(v);
  if (!std::isfinite(sq)) throw Error(ErrorCode::ZeroNorm, "non-finite embedding component");
  const double norm = std::sqrt(sq);
  if (norm < kMinNorm) throw Error(ErrorCode::ZeroNorm, "embedding norm below 1e-6");
  std::vector<double> out(v.begin(), v.end());
  if (std::abs(sq - 1.0) > kUnitSquaredNormTolerance) {
    for (double& x : out) x /= norm;
  }
  return Embedding(std::move(out));
}

Embedding normalize(std::span<const float> v) {
  std::vector<double> tmp(v.begin(), v.end());
  return normalize(std::span<const double>(tmp));
}

Embedding normalize(std::initializer_list<double> v) {
  return normalize(std::span<const double>(v.begin(), v.size()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dot of dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  return dot_kernel(a.data(), b.data(), a.size());
}

double dot(const Embedding& a, const Embedding& b) { return dot(a.values(), b.values()); }

double euclidean_distance(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "distance of dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "log_sum_exp of empty sequence");
  if (values.size() == 1) return values[0];
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty sequence");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::POutOfRange, "quantile level " + std::to_string(p) + " not in [0,1]");
  }
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

EmbeddingMatrix EmbeddingMatrix::from_rows(std::span<const double> data, std::size_t dim) {
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "matrix dimension must be >= 2");
  if (data.empty() || data.size() % dim != 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "buffer of " + std::to_string(data.size()) + " values is not N x " + std::to_string(dim));
  }
  EmbeddingMatrix m;
  m.dim_ = dim;
  m.data_.reserve(data.size());
  for (std::size_t off = 0; off < data.size(); off += dim) {
    const Embedding e = normalize(data.subspan(off, dim));
    m.data_.insert(m.data_.end(), e.values().begin(), e.values().end());
  }
  return m;
}

EmbeddingMatrix EmbeddingMatrix::from_rows(std::span<const float> data, std::size_t dim) {
  std::vector<double> tmp(data.begin(), data.end());
  return from_rows(std::span<const double>(tmp), dim);
}

EmbeddingMatrix EmbeddingMatrix::from_embeddings(std::span<const Embedding> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "matrix needs at least one row");
  EmbeddingMatrix m;
  m.dim_ = rows.front().dim();
  m.data_.reserve(rows.size() * m.dim_);
  for (const Embedding& e : rows) {
    if (e.dim() != m.dim_) throw Error(ErrorCode::DimensionMismatch, "rows of differing dimension");
    m.data_.insert(m.data_.end(), e.values().begin(), e.values().end());
  }
  return m;
}

EmbeddingMatrix EmbeddingMatrix::select(std::span<const std::size_t> indices) const {
  EmbeddingMatrix m;
  m.dim_ = dim_;
  m.data_.reserve(indices.size() * dim_);
  for (std::size_t i : indices) {
    auto r = row(i);
    m.data_.insert(m.data_.end(), r.begin(), r.end());
  }
  return m;
}

}  // namespace respec
