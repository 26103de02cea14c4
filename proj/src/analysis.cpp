#include "respec/analysis.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "respec/bundle_io.hpp"

namespace respec {

using nlohmann::json;

GaussianMoments fit_moments(const Eigen::MatrixXd& samples, double eps) {
  if (samples.rows() == 0) throw Error(ErrorCode::EmptyInput, "moments of an empty sample set");
  GaussianMoments m;
  m.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
  const double denom = samples.rows() > 1 ? static_cast<double>(samples.rows() - 1) : 1.0;
  m.covariance = (centered.transpose() * centered) / denom;
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
  m.covariance.diagonal().array() += eps;
  return m;
}

namespace {

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigendecomposition did not converge");
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b) {
  if (a.mean.size() != b.mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Frechet distance between dims " + std::to_string(a.mean.size()) +
                                                  " and " + std::to_string(b.mean.size()));
  }
  const Eigen::MatrixXd sa = sqrt_psd(a.covariance);
  Eigen::MatrixXd inner = sa * b.covariance * sa;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigendecomposition did not converge");
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double mean_term = (a.mean - b.mean).squaredNorm();
  return mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * tr_sqrt;
}

double frechet_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Frechet distance between dims " + std::to_string(a.cols()) +
                                                  " and " + std::to_string(b.cols()));
  }
  return frechet_distance(fit_moments(a), fit_moments(b));
}

double frechet_distance(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
  return frechet_distance(to_eigen(a), to_eigen(b));
}

Eigen::MatrixXd to_eigen(const EmbeddingMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.dim());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = r[j];
  }
  return out;
}

Eigen::MatrixXd concat_modalities(const EmbeddingMatrix& video, const EmbeddingMatrix& text) {
  if (video.rows() != text.rows()) {
    throw Error(ErrorCode::BundlePairMismatch, "video and text sets differ in row count");
  }
  Eigen::MatrixXd out(video.rows(), video.dim() + text.dim());
  out.leftCols(video.dim()) = to_eigen(video);
  out.rightCols(text.dim()) = to_eigen(text);
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> ngrams(const std::string& text) {
  const auto tokens = tokenize(text);
  std::vector<std::string> out(tokens);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) out.push_back(tokens[i] + ' ' + tokens[i + 1]);
  return out;
}

NGramHistogram ngram_histogram(const std::vector<std::string>& texts, std::size_t buckets) {
  if (texts.empty()) throw Error(ErrorCode::EmptyCorpus, "n-gram histogram of an empty corpus");
  if (buckets == 0) throw Error(ErrorCode::InvalidArgument, "bucket count must be >= 1");
  std::vector<double> counts(buckets, 0.0);
  double total = 0.0;
  for (const std::string& t : texts) {
    for (const std::string& g : ngrams(t)) {
      counts[fnv1a64(g) % buckets] += 1.0;
      total += 1.0;
    }
  }
  NGramHistogram h;
  h.smoothing = 1.0 / static_cast<double>(buckets);
  const double denom = total + 1.0;
  h.probabilities.resize(buckets);
  for (std::size_t i = 0; i < buckets; ++i) h.probabilities[i] = (counts[i] + h.smoothing) / denom;
  return h;
}

double kl_divergence(const NGramHistogram& p, const NGramHistogram& q) {
  if (p.probabilities.size() != q.probabilities.size()) {
    throw Error(ErrorCode::DimensionMismatch, "histograms have different bucket counts");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.probabilities.size(); ++i) {
    const double pi = p.probabilities[i];
    kl += pi * std::log(pi / q.probabilities[i]);
  }
  return std::max(0.0, kl);
}

double ngram_kl(const std::vector<std::string>& reference, const std::vector<std::string>& candidate,
                std::size_t buckets) {
  return kl_divergence(ngram_histogram(reference, buckets), ngram_histogram(candidate, buckets));
}

json Report::to_json() const {
  json tasks = json::array();
  for (const TaskPassCounts& t : per_task) {
    auto rate = [&](std::uint64_t n) { return t.evaluated == 0 ? 0.0 : static_cast<double>(n) / t.evaluated; };
    tasks.push_back(json{{"task", t.task},
                         {"evaluated", t.evaluated},
                         {"relevance_pass", t.relevance_pass},
                         {"specificity_pass", t.specificity_pass},
                         {"joint_pass", t.joint_pass},
                         {"relevance_pass_rate", rate(t.relevance_pass)},
                         {"specificity_pass_rate", rate(t.specificity_pass)},
                         {"joint_pass_rate", rate(t.joint_pass)}});
  }
  auto share = [&](std::uint64_t n) { return records == 0 ? 0.0 : static_cast<double>(n) / records; };
  return json{{"records", records},
              {"errors", errors},
              {"accepted", accepted},
              {"clip_ratio", clip_ratio()},
              {"rejected_by",
               {{"alignment", rejected_by_alignment},
                {"relevance", rejected_by_relevance},
                {"specificity", rejected_by_specificity}}},
              {"rejected_share",
               {{"alignment", share(rejected_by_alignment)},
                {"relevance", share(rejected_by_relevance)},
                {"specificity", share(rejected_by_specificity)}}},
              {"per_task", std::move(tasks)}};
}

std::string Report::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "records " << records << "  accepted " << accepted << "  clip ratio " << clip_ratio() << "  errors "
     << errors << '\n';
  os << "rejected  alignment " << rejected_by_alignment << "  relevance " << rejected_by_relevance
     << "  specificity " << rejected_by_specificity << '\n';
  if (!per_task.empty()) {
    os << std::left << std::setw(20) << "task" << std::right << std::setw(10) << "evaluated" << std::setw(10)
       << "rel" << std::setw(10) << "spec" << std::setw(10) << "both" << '\n';
    for (const TaskPassCounts& t : per_task) {
      auto rate = [&](std::uint64_t n) { return t.evaluated == 0 ? 0.0 : static_cast<double>(n) / t.evaluated; };
      os << std::left << std::setw(20) << t.task << std::right << std::setw(10) << t.evaluated << std::setw(10)
         << rate(t.relevance_pass) << std::setw(10) << rate(t.specificity_pass) << std::setw(10)
         << rate(t.joint_pass) << '\n';
    }
  }
  return os.str();
}

Report report_from_lines(const std::vector<std::string>& lines) {
  Report r;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 0;
  for (const std::string& line : lines) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::BadManifest, "decision log line " + std::to_string(line_no) + ": " + e.what());
    }
    if (j.contains("error")) {
      ++r.errors;
      continue;
    }
    ++r.records;
    const std::string by = j.value("rejected_by", std::string("none"));
    if (by == "none") ++r.accepted;
    else if (by == "alignment") ++r.rejected_by_alignment;
    else if (by == "relevance") ++r.rejected_by_relevance;
    else if (by == "specificity") ++r.rejected_by_specificity;
    for (const json& t : j.value("per_task", json::array())) {
      const std::string name = t.at("task").get<std::string>();
      auto [it, inserted] = index.try_emplace(name, r.per_task.size());
      if (inserted) r.per_task.push_back(TaskPassCounts{name});
      TaskPassCounts& c = r.per_task[it->second];
      ++c.evaluated;
      const bool rel = t.at("rel_pass").get<bool>();
      const bool spec = t.at("spec_pass").get<bool>();
      c.relevance_pass += rel;
      c.specificity_pass += spec;
      c.joint_pass += rel && spec;
    }
  }
  return r;
}

Report report(const std::filesystem::path& decision_log) {
  std::ifstream in(decision_log);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + decision_log.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return report_from_lines(lines);
}

}  // namespace respec
