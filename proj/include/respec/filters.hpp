#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "respec/reference.hpp"

namespace respec {

enum class Combine { JointSameTask, Independent };
enum class Baseline { Respec, LbThreshold, CitTrainFree, ColorSampleWise };
enum class RejectedBy { None, Alignment, Relevance, Specificity };

std::string_view to_string(Combine c);
std::string_view to_string(Baseline b);
std::string_view to_string(RejectedBy r);
Combine parse_combine(std::string_view s);
Baseline parse_baseline(std::string_view s);

inline constexpr double kDefaultTauText = 0.55;

struct FilterConfig {
  double tau = 0.28;
  Modality modality = Modality::Text;
  Combine combine = Combine::JointSameTask;
  Baseline baseline = Baseline::Respec;
  double tau_text = kDefaultTauText;

  /// Throws InvalidArgument when tau or tau_text leave [-1, 1].
  void validate() const;
};

struct StreamRecord {
  std::string id;
  Embedding video;
  Embedding text;
  std::optional<std::string> raw_text;
  std::optional<Embedding> alt_video;
  std::optional<Embedding> alt_text;
};

/// Work counters. kernel_rows counts reference-row kernel evaluations (one
/// dot product each against the downstream sets); dot_products counts the
/// per-record alignment, root-distance and single-vMF products.
struct Telemetry {
  std::uint64_t dot_products = 0;
  std::uint64_t kernel_rows = 0;

  Telemetry& operator+=(const Telemetry& o) {
    dot_products += o.dot_products;
    kernel_rows += o.kernel_rows;
    return *this;
  }
  friend bool operator==(const Telemetry&, const Telemetry&) = default;
};

struct RelevanceResult {
  bool pass = false;
  std::optional<double> log_density_text;
  std::optional<bool> pass_text;
  std::optional<double> log_density_video;
  std::optional<bool> pass_video;
};

struct TaskTrace {
  std::string task;
  RelevanceResult relevance;
  double specificity_distance = 0.0;
  bool specificity_pass = false;
};

struct FilterDecision {
  std::string id;
  bool accepted = false;
  double alignment_score = 0.0;
  bool alignment_pass = false;
  std::vector<TaskTrace> per_task;
  RejectedBy rejected_by = RejectedBy::Alignment;
  // CiT: max text similarity to any reference; CoLoR: alt minus prior alignment.
  std::optional<double> baseline_score;
  Telemetry telemetry;
};

struct AlignmentResult {
  bool pass = false;
  double score = 0.0;
};

AlignmentResult alignment_pass(const Embedding& video, const Embedding& text, double tau);

/// Unnormalized log density of x under one modality's references, using the
/// task's density model.
double relevance_log_density(const Embedding& x, const ModalityReference& ref, DensityModel density,
                             Telemetry* telemetry = nullptr);

RelevanceResult relevance_pass(const Embedding& video, const Embedding& text, const TaskReference& ref,
                               Modality modality, Telemetry* telemetry = nullptr);

struct SpecificityResult {
  bool pass = false;
  double distance = 0.0;
};

SpecificityResult specificity_pass(const Embedding& text, const TaskReference& ref);

FilterDecision respec_decide(const StreamRecord& record, const ReferenceBundle& bundle, const FilterConfig& cfg);
FilterDecision baseline_threshold_decide(const StreamRecord& record, double tau);
FilterDecision baseline_cit_trainfree_decide(const StreamRecord& record, const ReferenceBundle& bundle,
                                             double tau_text, double tau);
FilterDecision baseline_color_samplewise_decide(const StreamRecord& record, double tau);

/// Dispatches on cfg.baseline.
FilterDecision decide(const StreamRecord& record, const ReferenceBundle& bundle, const FilterConfig& cfg);

}  // namespace respec
