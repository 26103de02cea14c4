#pragma once

#include <cstdint>
#include <optional>

#include "respec/core.hpp"

namespace respec {

struct VmfParams {
  Embedding mu;
  double kappa = 0.0;

  std::size_t dim() const noexcept { return mu.dim(); }
};

/// Relevance cut-off in unnormalized log-density units (ln C_z(kappa) omitted).
struct DensityThreshold {
  double log_threshold = 0.0;
  double alpha = 0.05;
  bool leave_one_out = true;

  friend bool operator==(const DensityThreshold&, const DensityThreshold&) = default;
};

/// ||mean of rows||.
double mean_resultant_length(const EmbeddingMatrix& x);
Embedding mean_direction(const EmbeddingMatrix& x);

/// kappa_hat = R (z - R^2) / (1 - R^2). Zero when R == 0; throws
/// DegenerateConcentration when R > 1 - 1e-9.
double estimate_kappa(const EmbeddingMatrix& x);

/// ln C_z(kappa) = (z/2 - 1) ln kappa - (z/2) ln 2pi - ln I_{z/2-1}(kappa).
double log_norm_const(std::size_t z, double kappa);

/// ln( (1/n) sum_rows exp(kappa * x.row) ) over the included rows. Leaving
/// out exclude_row gives the leave-one-out estimate for that reference point.
double kde_log_density(std::span<const double> x, const EmbeddingMatrix& refs, double kappa,
                       std::optional<std::size_t> exclude_row = std::nullopt);
double kde_log_density(const Embedding& x, const EmbeddingMatrix& refs, double kappa,
                       std::optional<std::size_t> exclude_row = std::nullopt);

/// alpha-quantile of the reference points' own KDE values. workers == 0 picks
/// the hardware concurrency; the result does not depend on it.
DensityThreshold self_density_threshold(const EmbeddingMatrix& refs, double kappa, double alpha,
                                        bool leave_one_out, unsigned workers = 0);

/// Mean direction plus estimate_kappa.
VmfParams fit_vmf(const EmbeddingMatrix& x);

/// kappa * x.mu.
double single_vmf_log_density(std::span<const double> x, const VmfParams& params);
double single_vmf_log_density(const Embedding& x, const VmfParams& params);

/// alpha-quantile of single_vmf_log_density over the reference rows.
DensityThreshold single_vmf_threshold(const EmbeddingMatrix& refs, const VmfParams& params, double alpha);

/// n draws from vMF(mu, kappa) by Wood's rejection scheme on the cosine to mu
/// plus a uniform tangent direction. Deterministic for a fixed seed.
EmbeddingMatrix sample_vmf(const Embedding& mu, double kappa, std::size_t n, std::uint64_t seed);

/// Uniform random unit vector.
Embedding random_direction(std::size_t dim, std::uint64_t seed);

}  // namespace respec
