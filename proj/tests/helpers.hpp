#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "respec/bundle_io.hpp"
#include "respec/core.hpp"
#include "respec/engine.hpp"

namespace testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("respec-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = g(rng);
  return v;
}

inline respec::Embedding random_unit(std::mt19937_64& rng, std::size_t dim) {
  return respec::normalize(std::span<const double>(gaussian_vector(rng, dim)));
}

/// Row-major orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
inline std::vector<double> random_rotation(std::mt19937_64& rng, std::size_t dim) {
  std::vector<double> q(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    auto v = gaussian_vector(rng, dim);
    for (std::size_t k = 0; k < i; ++k) {
      double d = 0;
      for (std::size_t j = 0; j < dim; ++j) d += v[j] * q[k * dim + j];
      for (std::size_t j = 0; j < dim; ++j) v[j] -= d * q[k * dim + j];
    }
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (std::size_t j = 0; j < dim; ++j) q[i * dim + j] = v[j] / n;
  }
  return q;
}

inline respec::Embedding rotate(const std::vector<double>& q, const respec::Embedding& x) {
  const std::size_t dim = x.dim();
  std::vector<double> out(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) out[i] += q[i * dim + j] * x[j];
  }
  return respec::normalize(std::span<const double>(out));
}

inline respec::EmbeddingMatrix rotate(const std::vector<double>& q, const respec::EmbeddingMatrix& m) {
  std::vector<respec::Embedding> rows;
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(rotate(q, m.row_embedding(i)));
  return respec::EmbeddingMatrix::from_embeddings(rows);
}

inline respec::Embedding negate(const respec::Embedding& e) {
  std::vector<double> v(e.values().begin(), e.values().end());
  for (double& x : v) x = -x;
  return respec::normalize(std::span<const double>(v));
}

inline respec::RawRecord raw_record(const std::string& id, const respec::Embedding& video,
                                    const respec::Embedding& text) {
  respec::RawRecord r;
  r.entry.id = id;
  r.video.assign(video.values().begin(), video.values().end());
  r.text.assign(text.values().begin(), text.values().end());
  return r;
}

inline double fraction(std::size_t k, std::size_t n) { return static_cast<double>(k) / static_cast<double>(n); }

}  // namespace testing
