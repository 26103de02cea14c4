#include "respec/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "respec/bessel.hpp"

namespace respec {

namespace {

void require_positive_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::NonPositiveKappa, "kappa must be finite and > 0, got " + std::to_string(kappa));
  }
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::POutOfRange, "alpha must be in (0,1), got " + std::to_string(alpha));
  }
}

std::vector<double> mean_row(const EmbeddingMatrix& x) {
  if (x.empty()) throw Error(ErrorCode::EmptyInput, "mean of empty matrix");
  std::vector<double> m(x.dim(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += r[j];
  }
  for (double& v : m) v /= static_cast<double>(x.rows());
  return m;
}

}  // namespace

double mean_resultant_length(const EmbeddingMatrix& x) {
  const auto m = mean_row(x);
  return std::sqrt(dot(m, m));
}

Embedding mean_direction(const EmbeddingMatrix& x) { return normalize(std::span<const double>(mean_row(x))); }

double estimate_kappa(const EmbeddingMatrix& x) {
  if (x.rows() < 2) throw Error(ErrorCode::EmptyInput, "estimate_kappa needs at least two rows");
  const double r = mean_resultant_length(x);
  if (r > 1.0 - 1e-9) {
    throw Error(ErrorCode::DegenerateConcentration,
                "mean resultant length " + std::to_string(r) + " too close to 1; rows coincide");
  }
  if (r == 0.0) return 0.0;
  const double z = static_cast<double>(x.dim());
  return r * (z - r * r) / (1.0 - r * r);
}

double log_norm_const(std::size_t z, double kappa) {
  if (z < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 2");
  require_positive_kappa(kappa);
  const double half = 0.5 * static_cast<double>(z);
  const double nu = half - 1.0;
  return nu * std::log(kappa) - half * std::log(2.0 * std::numbers::pi) - log_bessel_i(nu, kappa);
}

double kde_log_density(std::span<const double> x, const EmbeddingMatrix& refs, double kappa,
                       std::optional<std::size_t> exclude_row) {
  require_positive_kappa(kappa);
  if (x.size() != refs.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query dim " + std::to_string(x.size()) + " vs reference dim " +
                                                  std::to_string(refs.dim()));
  }
  const std::size_t n = refs.rows();
  if (exclude_row && *exclude_row >= n) {
    throw Error(ErrorCode::InvalidArgument, "excluded row " + std::to_string(*exclude_row) + " out of range");
  }
  const std::size_t included = n - (exclude_row ? 1 : 0);
  if (included == 0) throw Error(ErrorCode::EmptyAfterExclusion, "no reference rows left after exclusion");

  thread_local std::vector<double> dots;
  dots.resize(n);
  const double* base = refs.data().data();
  const std::size_t z = refs.dim();
  double max_dot = -2.0;
  for (std::size_t i = 0; i < n; ++i) {
    dots[i] = dot_kernel(x.data(), base + i * z, z);
    if (i != exclude_row && dots[i] > max_dot) max_dot = dots[i];
  }
  const double shift = kappa * max_dot;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == exclude_row) continue;
    sum += std::exp(kappa * dots[i] - shift);
  }
  return shift + std::log(sum) - std::log(static_cast<double>(included));
}

double kde_log_density(const Embedding& x, const EmbeddingMatrix& refs, double kappa,
                       std::optional<std::size_t> exclude_row) {
  return kde_log_density(x.values(), refs, kappa, exclude_row);
}

DensityThreshold self_density_threshold(const EmbeddingMatrix& refs, double kappa, double alpha,
                                        bool leave_one_out, unsigned workers) {
  require_alpha(alpha);
  require_positive_kappa(kappa);
  const std::size_t n = refs.rows();
  if (leave_one_out && n < 2) {
    throw Error(ErrorCode::EmptyAfterExclusion, "leave-one-out calibration needs at least two rows");
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n / 64)));

  std::vector<double> self(n);
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      self[i] = kde_log_density(refs.row(i), refs, kappa,
                                leave_one_out ? std::optional<std::size_t>(i) : std::nullopt);
    }
  };
  if (workers <= 1) {
    run(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t b = w * chunk;
      const std::size_t e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(run, b, e);
    }
  }
  return DensityThreshold{quantile(self, alpha), alpha, leave_one_out};
}

VmfParams fit_vmf(const EmbeddingMatrix& x) { return VmfParams{mean_direction(x), estimate_kappa(x)}; }

double single_vmf_log_density(std::span<const double> x, const VmfParams& params) {
  require_positive_kappa(params.kappa);
  return params.kappa * dot(x, params.mu.values());
}

double single_vmf_log_density(const Embedding& x, const VmfParams& params) {
  return single_vmf_log_density(x.values(), params);
}

DensityThreshold single_vmf_threshold(const EmbeddingMatrix& refs, const VmfParams& params, double alpha) {
  require_alpha(alpha);
  std::vector<double> logd(refs.rows());
  for (std::size_t i = 0; i < refs.rows(); ++i) logd[i] = single_vmf_log_density(refs.row(i), params);
  return DensityThreshold{quantile(logd, alpha), alpha, false};
}

EmbeddingMatrix sample_vmf(const Embedding& mu, double kappa, std::size_t n, std::uint64_t seed) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::InvalidArgument, "kappa must be finite and >= 0");
  }
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const std::size_t z = mu.dim();
  if (z < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 2");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double m1 = static_cast<double>(z) - 1.0;
  std::gamma_distribution<double> gamma(0.5 * m1, 1.0);

  // Wood (1994): W = cos angle to mu.
  const double b = m1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + m1 * m1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + m1 * std::log(1.0 - x0 * x0);

  std::vector<double> data;
  data.reserve(n * z);
  std::vector<double> tangent(z);
  for (std::size_t s = 0; s < n; ++s) {
    double w = 0.0;
    for (;;) {
      const double g1 = gamma(rng);
      const double g2 = gamma(rng);
      const double beta = g1 / (g1 + g2);
      w = (1.0 - (1.0 + b) * beta) / (1.0 - (1.0 - b) * beta);
      const double u = unif(rng);
      if (kappa * w + m1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
    double tn = 0.0;
    do {
      for (double& t : tangent) t = gauss(rng);
      const double along = dot(tangent, mu.values());
      tn = 0.0;
      for (std::size_t j = 0; j < z; ++j) {
        tangent[j] -= along * mu[j];
        tn += tangent[j] * tangent[j];
      }
      tn = std::sqrt(tn);
    } while (tn < 1e-12);
    const double radial = std::sqrt(std::max(0.0, 1.0 - w * w));
    for (std::size_t j = 0; j < z; ++j) data.push_back(w * mu[j] + radial * tangent[j] / tn);
  }
  return EmbeddingMatrix::from_rows(std::span<const double>(data), z);
}

Embedding random_direction(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  for (;;) {
    for (double& x : v) x = gauss(rng);
    if (std::sqrt(dot(v, v)) > 1e-3) return normalize(std::span<const double>(v));
  }
}

}  // namespace respec
