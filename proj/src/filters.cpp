#include "respec/filters.hpp"

#include <algorithm>
#include <string>

namespace respec {

std::string_view to_string(Combine c) { return c == Combine::JointSameTask ? "joint" : "independent"; }

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::Respec: return "respec";
    case Baseline::LbThreshold: return "lb_threshold";
    case Baseline::CitTrainFree: return "cit_trainfree";
    case Baseline::ColorSampleWise: return "color_samplewise";
  }
  return "respec";
}

std::string_view to_string(RejectedBy r) {
  switch (r) {
    case RejectedBy::None: return "none";
    case RejectedBy::Alignment: return "alignment";
    case RejectedBy::Relevance: return "relevance";
    case RejectedBy::Specificity: return "specificity";
  }
  return "none";
}

Combine parse_combine(std::string_view s) {
  if (s == "joint" || s == "joint_same_task") return Combine::JointSameTask;
  if (s == "independent") return Combine::Independent;
  throw Error(ErrorCode::InvalidArgument, "unknown combine mode '" + std::string(s) + "'");
}

Baseline parse_baseline(std::string_view s) {
  if (s == "respec") return Baseline::Respec;
  if (s == "lb_threshold") return Baseline::LbThreshold;
  if (s == "cit_trainfree") return Baseline::CitTrainFree;
  if (s == "color_samplewise") return Baseline::ColorSampleWise;
  throw Error(ErrorCode::InvalidArgument, "unknown baseline '" + std::string(s) + "'");
}

void FilterConfig::validate() const {
  if (!(tau >= -1.0 && tau <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau must be in [-1,1], got " + std::to_string(tau));
  }
  if (!(tau_text >= -1.0 && tau_text <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau_text must be in [-1,1], got " + std::to_string(tau_text));
  }
}

AlignmentResult alignment_pass(const Embedding& video, const Embedding& text, double tau) {
  const double score = dot(video, text);
  return {score > tau, score};
}

double relevance_log_density(const Embedding& x, const ModalityReference& ref, DensityModel density,
                             Telemetry* telemetry) {
  if (density == DensityModel::SingleVmf) {
    if (telemetry) telemetry->dot_products += 1;
    return single_vmf_log_density(x, VmfParams{ref.mean, ref.kappa});
  }
  if (telemetry) telemetry->kernel_rows += ref.refs.rows();
  return kde_log_density(x, ref.refs, ref.kappa);
}

RelevanceResult relevance_pass(const Embedding& video, const Embedding& text, const TaskReference& ref,
                               Modality modality, Telemetry* telemetry) {
  const bool use_text = modality != Modality::Video;
  const bool use_video = modality != Modality::Text;
  if (use_video && !ref.video) {
    throw Error(ErrorCode::MissingModalityReferences,
                "task '" + ref.name + "' has no video references for modality " + std::string(to_string(modality)));
  }
  RelevanceResult r;
  if (use_text) {
    r.log_density_text = relevance_log_density(text, ref.text, ref.density, telemetry);
    r.pass_text = *r.log_density_text > ref.text.threshold.log_threshold;
  }
  if (use_video) {
    r.log_density_video = relevance_log_density(video, *ref.video, ref.density, telemetry);
    r.pass_video = *r.log_density_video > ref.video->threshold.log_threshold;
  }
  switch (modality) {
    case Modality::Text: r.pass = *r.pass_text; break;
    case Modality::Video: r.pass = *r.pass_video; break;
    case Modality::Union: r.pass = *r.pass_text || *r.pass_video; break;
    case Modality::Intersection: r.pass = *r.pass_text && *r.pass_video; break;
  }
  return r;
}

SpecificityResult specificity_pass(const Embedding& text, const TaskReference& ref) {
  const double d = euclidean_distance(text, ref.root);
  return {d > ref.specificity_threshold, d};
}

namespace {

void check_record_dims(const StreamRecord& record, std::size_t dim) {
  if (record.video.dim() != record.text.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "record '" + record.id + "' video dim " +
                                                  std::to_string(record.video.dim()) + " vs text dim " +
                                                  std::to_string(record.text.dim()));
  }
  if (dim != 0 && record.text.dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "record '" + record.id + "' dim " + std::to_string(record.text.dim()) +
                                                  " vs bundle dim " + std::to_string(dim));
  }
}

FilterDecision start_decision(const StreamRecord& record, double tau) {
  FilterDecision d;
  d.id = record.id;
  const AlignmentResult a = alignment_pass(record.video, record.text, tau);
  d.alignment_score = a.score;
  d.alignment_pass = a.pass;
  d.telemetry.dot_products = 1;
  d.rejected_by = a.pass ? RejectedBy::None : RejectedBy::Alignment;
  return d;
}

void finish(FilterDecision& d, bool stage_pass, RejectedBy stage) {
  d.accepted = d.alignment_pass && stage_pass;
  if (d.accepted) {
    d.rejected_by = RejectedBy::None;
  } else if (d.alignment_pass) {
    d.rejected_by = stage;
  }
}

}  // namespace

FilterDecision respec_decide(const StreamRecord& record, const ReferenceBundle& bundle, const FilterConfig& cfg) {
  check_record_dims(record, bundle.dim);
  FilterDecision d = start_decision(record, cfg.tau);
  if (!d.alignment_pass) return d;

  bool any_joint = false;
  bool any_relevant = false;
  bool any_specific = false;
  d.per_task.reserve(bundle.tasks.size());
  for (const TaskReference& task : bundle.tasks) {
    TaskTrace t;
    t.task = task.name;
    t.relevance = relevance_pass(record.video, record.text, task, cfg.modality, &d.telemetry);
    const SpecificityResult s = specificity_pass(record.text, task);
    d.telemetry.dot_products += 1;
    t.specificity_distance = s.distance;
    t.specificity_pass = s.pass;
    any_relevant = any_relevant || t.relevance.pass;
    any_specific = any_specific || t.specificity_pass;
    any_joint = any_joint || (t.relevance.pass && t.specificity_pass);
    d.per_task.push_back(std::move(t));
  }
  const bool pass = cfg.combine == Combine::JointSameTask ? any_joint : (any_relevant && any_specific);
  finish(d, pass, any_relevant ? RejectedBy::Specificity : RejectedBy::Relevance);
  return d;
}

FilterDecision baseline_threshold_decide(const StreamRecord& record, double tau) {
  check_record_dims(record, 0);
  FilterDecision d = start_decision(record, tau);
  finish(d, true, RejectedBy::None);
  return d;
}

FilterDecision baseline_cit_trainfree_decide(const StreamRecord& record, const ReferenceBundle& bundle,
                                             double tau_text, double tau) {
  check_record_dims(record, bundle.dim);
  FilterDecision d = start_decision(record, tau);
  if (!d.alignment_pass) return d;
  double best = -2.0;
  const double* q = record.text.values().data();
  for (const TaskReference& task : bundle.tasks) {
    const EmbeddingMatrix& refs = task.text.refs;
    const std::size_t z = refs.dim();
    const double* base = refs.data().data();
    for (std::size_t i = 0; i < refs.rows(); ++i) best = std::max(best, dot_kernel(q, base + i * z, z));
    d.telemetry.kernel_rows += refs.rows();
  }
  d.baseline_score = best;
  finish(d, best > tau_text, RejectedBy::Relevance);
  return d;
}

FilterDecision baseline_color_samplewise_decide(const StreamRecord& record, double tau) {
  check_record_dims(record, 0);
  if (!record.alt_video || !record.alt_text) {
    throw Error(ErrorCode::MissingAltEmbeddings, "record '" + record.id + "' lacks alt video/text embeddings");
  }
  if (record.alt_video->dim() != record.alt_text->dim()) {
    throw Error(ErrorCode::DimensionMismatch, "record '" + record.id + "' alt embeddings differ in dimension");
  }
  FilterDecision d = start_decision(record, tau);
  if (!d.alignment_pass) return d;
  const double diff = dot(*record.alt_video, *record.alt_text) - d.alignment_score;
  d.telemetry.dot_products += 1;
  d.baseline_score = diff;
  finish(d, diff > 0.0, RejectedBy::Relevance);
  return d;
}

FilterDecision decide(const StreamRecord& record, const ReferenceBundle& bundle, const FilterConfig& cfg) {
  switch (cfg.baseline) {
    case Baseline::Respec: return respec_decide(record, bundle, cfg);
    case Baseline::LbThreshold: return baseline_threshold_decide(record, cfg.tau);
    case Baseline::CitTrainFree: return baseline_cit_trainfree_decide(record, bundle, cfg.tau_text, cfg.tau);
    case Baseline::ColorSampleWise: return baseline_color_samplewise_decide(record, cfg.tau);
  }
  return respec_decide(record, bundle, cfg);
}

}  // namespace respec
