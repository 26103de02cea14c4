#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "respec/bundle_io.hpp"
#include "respec/vmf.hpp"

namespace respec {

enum class Modality { Text, Video, Union, Intersection };
enum class DensityModel { Kde, SingleVmf };

std::string_view to_string(Modality m);
std::string_view to_string(DensityModel d);
Modality parse_modality(std::string_view s);
DensityModel parse_density_model(std::string_view s);

struct BuildConfig {
  double alpha = 0.05;
  double q = 0.1;
  bool leave_one_out = true;
  Modality modality = Modality::Text;
  DensityModel density = DensityModel::Kde;

  friend bool operator==(const BuildConfig&, const BuildConfig&) = default;
};

/// Per-modality reference statistics for one task.
struct ModalityReference {
  RawMatrix source;  // rows exactly as stored on disk
  EmbeddingMatrix refs;
  double kappa = 0.0;
  Embedding mean;  // used by the single-vMF density model
  DensityThreshold threshold;

  friend bool operator==(const ModalityReference&, const ModalityReference&) = default;
};

struct TaskReference {
  std::string name;
  ModalityReference text;
  std::optional<ModalityReference> video;
  DensityModel density = DensityModel::Kde;
  Embedding root;
  double specificity_threshold = 0.0;
  double q = 0.1;

  std::size_t dim() const noexcept { return text.refs.dim(); }
  friend bool operator==(const TaskReference&, const TaskReference&) = default;
};

struct ReferenceBundle {
  std::vector<TaskReference> tasks;
  std::size_t dim = 0;
  BuildConfig config;
  RawMatrix root_source;

  friend bool operator==(const ReferenceBundle&, const ReferenceBundle&) = default;
};

/// Freezes one task: kappa_hat per modality, relevance thresholds, and the
/// q-quantile of root distances over the text references.
TaskReference build_task_reference(std::string name, const RawMatrix& text, const RawMatrix* video,
                                   const RawMatrix& root, const BuildConfig& config, unsigned workers = 0);

struct TaskInput {
  std::string name;
  RawMatrix text;
  std::optional<RawMatrix> video;
};

ReferenceBundle build_reference_bundle(const std::vector<TaskInput>& tasks, const RawMatrix& root,
                                       const BuildConfig& config, unsigned workers = 0);

/// Root-distance threshold, recomputable from stored matrices.
double specificity_threshold(const EmbeddingMatrix& text_refs, const Embedding& root, double q);

inline constexpr std::string_view kBundleManifestName = "bundle.json";

void save_bundle(const ReferenceBundle& bundle, const std::filesystem::path& dir);
ReferenceBundle load_bundle(const std::filesystem::path& dir);

struct ThresholdDrift {
  std::string task;
  double relevance_text = 0.0;
  std::optional<double> relevance_video;
  double specificity = 0.0;
};

/// Recomputes every stored threshold from the stored matrices and reports the
/// absolute difference per task.
std::vector<ThresholdDrift> verify_thresholds(const ReferenceBundle& bundle, unsigned workers = 0);

}  // namespace respec
