#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "respec/core.hpp"

namespace respec {

inline constexpr double kCovarianceRegularization = 1e-6;
inline constexpr std::size_t kDefaultBuckets = 10000;

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased, plus eps * I
};

/// Rows are samples. A single row gives a zero covariance before regularization.
GaussianMoments fit_moments(const Eigen::MatrixXd& samples, double eps = kCovarianceRegularization);

/// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}); the square-root trace
/// is taken from the symmetric form S_a^{1/2} S_b S_a^{1/2} with eigenvalues
/// clamped at zero.
double frechet_distance(const GaussianMoments& a, const GaussianMoments& b);
double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
double frechet_distance(const EmbeddingMatrix& a, const EmbeddingMatrix& b);

/// [video | text] per row, 2z columns.
Eigen::MatrixXd concat_modalities(const EmbeddingMatrix& video, const EmbeddingMatrix& text);
Eigen::MatrixXd to_eigen(const EmbeddingMatrix& m);

struct NGramHistogram {
  std::vector<double> probabilities;
  double smoothing = 0.0;
};

/// Lowercased (ASCII) whitespace tokens.
std::vector<std::string> tokenize(const std::string& text);
/// Unigrams and space-joined bigrams of each text.
std::vector<std::string> ngrams(const std::string& text);
/// FNV-1a 64 of each n-gram modulo buckets; add-(1/buckets) smoothing.
NGramHistogram ngram_histogram(const std::vector<std::string>& texts, std::size_t buckets = kDefaultBuckets);
double kl_divergence(const NGramHistogram& p, const NGramHistogram& q);
/// KL(reference || candidate) in nats.
double ngram_kl(const std::vector<std::string>& reference, const std::vector<std::string>& candidate,
                std::size_t buckets = kDefaultBuckets);

struct TaskPassCounts {
  std::string task;
  std::uint64_t evaluated = 0;
  std::uint64_t relevance_pass = 0;
  std::uint64_t specificity_pass = 0;
  std::uint64_t joint_pass = 0;
};

struct Report {
  std::uint64_t records = 0;
  std::uint64_t errors = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected_by_alignment = 0;
  std::uint64_t rejected_by_relevance = 0;
  std::uint64_t rejected_by_specificity = 0;
  std::vector<TaskPassCounts> per_task;

  double clip_ratio() const { return records == 0 ? 0.0 : static_cast<double>(accepted) / records; }
  nlohmann::json to_json() const;
  std::string to_text() const;
};

Report report_from_lines(const std::vector<std::string>& lines);
Report report(const std::filesystem::path& decision_log);

}  // namespace respec
