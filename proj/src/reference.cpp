#include "respec/reference.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace respec {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::Text: return "text";
    case Modality::Video: return "video";
    case Modality::Union: return "union";
    case Modality::Intersection: return "intersection";
  }
  return "text";
}

std::string_view to_string(DensityModel d) { return d == DensityModel::Kde ? "kde" : "single_vmf"; }

Modality parse_modality(std::string_view s) {
  if (s == "text") return Modality::Text;
  if (s == "video") return Modality::Video;
  if (s == "union") return Modality::Union;
  if (s == "intersection") return Modality::Intersection;
  throw Error(ErrorCode::InvalidArgument, "unknown modality '" + std::string(s) + "'");
}

DensityModel parse_density_model(std::string_view s) {
  if (s == "kde") return DensityModel::Kde;
  if (s == "single_vmf") return DensityModel::SingleVmf;
  throw Error(ErrorCode::InvalidArgument, "unknown density model '" + std::string(s) + "'");
}

namespace {

ModalityReference build_modality(const RawMatrix& source, const BuildConfig& config, unsigned workers,
                                 std::string_view what) {
  ModalityReference m;
  m.source = source;
  m.refs = ingest(source);
  m.kappa = estimate_kappa(m.refs);
  if (m.kappa == 0.0) {
    throw Error(ErrorCode::KappaZero, std::string(what) + " references have zero mean resultant length");
  }
  m.mean = mean_direction(m.refs);
  if (config.density == DensityModel::Kde) {
    m.threshold = self_density_threshold(m.refs, m.kappa, config.alpha, config.leave_one_out, workers);
  } else {
    m.threshold = single_vmf_threshold(m.refs, VmfParams{m.mean, m.kappa}, config.alpha);
  }
  return m;
}

Embedding root_embedding(const RawMatrix& root) {
  if (root.rows != 1) {
    throw Error(ErrorCode::CountMismatch, "root bundle must hold exactly one row, got " + std::to_string(root.rows));
  }
  return normalize(root.row(0));
}

void check_unit_interval(double v, std::string_view what) {
  if (!(v > 0.0 && v < 1.0)) {
    throw Error(ErrorCode::POutOfRange, std::string(what) + " must be in (0,1), got " + std::to_string(v));
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json config_to_json(const BuildConfig& c) {
  return json{{"alpha", c.alpha},
              {"q", c.q},
              {"loo", c.leave_one_out},
              {"modality", std::string(to_string(c.modality))},
              {"density", std::string(to_string(c.density))}};
}

json threshold_to_json(const DensityThreshold& t) {
  return json{{"log_threshold", t.log_threshold}, {"alpha", t.alpha}, {"leave_one_out", t.leave_one_out}};
}

DensityThreshold threshold_from_json(const json& j) {
  return DensityThreshold{j.at("log_threshold").get<double>(), j.at("alpha").get<double>(),
                          j.at("leave_one_out").get<bool>()};
}

RawMatrix load_checked(const fs::path& dir, const json& file, const json& checksum) {
  const fs::path p = dir / file.get<std::string>();
  if (!fs::exists(p)) throw Error(ErrorCode::MissingMatrixFile, p.string() + " referenced by bundle.json is missing");
  if (hex64(file_checksum(p)) != checksum.get<std::string>()) {
    throw Error(ErrorCode::ChecksumMismatch, p.string() + " does not match its recorded checksum");
  }
  return read_matrix(p);
}

}  // namespace

double specificity_threshold(const EmbeddingMatrix& text_refs, const Embedding& root, double q) {
  if (root.dim() != text_refs.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "root dim " + std::to_string(root.dim()) + " vs references " +
                                                  std::to_string(text_refs.dim()));
  }
  std::vector<double> dist(text_refs.rows());
  for (std::size_t i = 0; i < text_refs.rows(); ++i) {
    dist[i] = euclidean_distance(text_refs.row_embedding(i), root);
  }
  return quantile(dist, q);
}

TaskReference build_task_reference(std::string name, const RawMatrix& text, const RawMatrix* video,
                                   const RawMatrix& root, const BuildConfig& config, unsigned workers) {
  check_unit_interval(config.alpha, "alpha");
  check_unit_interval(config.q, "q");
  if (text.rows == 0) throw Error(ErrorCode::EmptyInput, "task '" + name + "' has no text references");
  TaskReference t;
  t.root = root_embedding(root);
  if (t.root.dim() != text.dim) {
    throw Error(ErrorCode::DimensionMismatch, "task '" + name + "': root dim " + std::to_string(t.root.dim()) +
                                                  " vs text dim " + std::to_string(text.dim));
  }
  if (video && video->dim != text.dim) {
    throw Error(ErrorCode::DimensionMismatch, "task '" + name + "': video dim " + std::to_string(video->dim) +
                                                  " vs text dim " + std::to_string(text.dim));
  }
  t.name = std::move(name);
  t.density = config.density;
  t.q = config.q;
  t.text = build_modality(text, config, workers, "task '" + t.name + "' text");
  if (video) t.video = build_modality(*video, config, workers, "task '" + t.name + "' video");
  t.specificity_threshold = specificity_threshold(t.text.refs, t.root, config.q);
  return t;
}

ReferenceBundle build_reference_bundle(const std::vector<TaskInput>& tasks, const RawMatrix& root,
                                       const BuildConfig& config, unsigned workers) {
  if (tasks.empty()) throw Error(ErrorCode::EmptyInput, "reference bundle needs at least one task");
  ReferenceBundle b;
  b.config = config;
  b.root_source = root;
  std::set<std::string> names;
  for (const TaskInput& in : tasks) {
    if (!names.insert(in.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate task name '" + in.name + "'");
    }
    b.tasks.push_back(
        build_task_reference(in.name, in.text, in.video ? &*in.video : nullptr, root, config, workers));
  }
  b.dim = b.tasks.front().dim();
  return b;
}

void save_bundle(const ReferenceBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  json j;
  j["format"] = "respec-reference";
  j["version"] = 1;
  j["dim"] = bundle.dim;
  j["build_config"] = config_to_json(bundle.config);

  write_matrix(dir / "root.rspc", bundle.root_source);
  j["root_file"] = "root.rspc";
  j["root_checksum"] = hex64(file_checksum(dir / "root.rspc"));

  json tasks = json::array();
  for (std::size_t i = 0; i < bundle.tasks.size(); ++i) {
    const TaskReference& t = bundle.tasks[i];
    json e;
    e["name"] = t.name;
    e["q"] = t.q;
    e["n_text"] = t.text.refs.rows();
    e["kappa_text"] = t.text.kappa;
    e["relevance_threshold_text"] = threshold_to_json(t.text.threshold);
    e["specificity_threshold"] = t.specificity_threshold;
    const std::string text_file = "task" + std::to_string(i) + "_text.rspc";
    write_matrix(dir / text_file, t.text.source);
    e["text_file"] = text_file;
    e["text_checksum"] = hex64(file_checksum(dir / text_file));
    if (t.video) {
      e["n_video"] = t.video->refs.rows();
      e["kappa_video"] = t.video->kappa;
      e["relevance_threshold_video"] = threshold_to_json(t.video->threshold);
      const std::string video_file = "task" + std::to_string(i) + "_video.rspc";
      write_matrix(dir / video_file, t.video->source);
      e["video_file"] = video_file;
      e["video_checksum"] = hex64(file_checksum(dir / video_file));
    } else {
      e["n_video"] = nullptr;
      e["kappa_video"] = nullptr;
      e["relevance_threshold_video"] = nullptr;
    }
    tasks.push_back(std::move(e));
  }
  j["tasks"] = std::move(tasks);

  std::ofstream out(dir / kBundleManifestName, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / kBundleManifestName).string());
  out << j.dump(2) << '\n';
}

ReferenceBundle load_bundle(const fs::path& dir) {
  const fs::path header = dir / kBundleManifestName;
  std::ifstream in(header);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + header.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::BadManifest, header.string() + ": " + e.what());
  }
  try {
    if (j.at("version").get<int>() != 1) {
      throw Error(ErrorCode::VersionUnsupported, header.string() + " has version " + j.at("version").dump());
    }
    ReferenceBundle b;
    b.dim = j.at("dim").get<std::size_t>();
    const json& c = j.at("build_config");
    b.config.alpha = c.at("alpha").get<double>();
    b.config.q = c.at("q").get<double>();
    b.config.leave_one_out = c.at("loo").get<bool>();
    b.config.modality = parse_modality(c.at("modality").get<std::string>());
    b.config.density = parse_density_model(c.at("density").get<std::string>());
    b.root_source = load_checked(dir, j.at("root_file"), j.at("root_checksum"));
    const Embedding root = root_embedding(b.root_source);

    auto load_modality = [&](const json& file, const json& checksum, const json& kappa, const json& threshold) {
      ModalityReference m;
      m.source = load_checked(dir, file, checksum);
      if (m.source.dim != b.dim) {
        throw Error(ErrorCode::DimensionMismatch, file.get<std::string>() + " has dim " +
                                                      std::to_string(m.source.dim) + ", bundle dim is " +
                                                      std::to_string(b.dim));
      }
      m.refs = ingest(m.source);
      m.kappa = kappa.get<double>();
      m.mean = mean_direction(m.refs);
      m.threshold = threshold_from_json(threshold);
      return m;
    };

    for (const json& e : j.at("tasks")) {
      TaskReference t;
      t.name = e.at("name").get<std::string>();
      t.q = e.at("q").get<double>();
      t.density = b.config.density;
      t.root = root;
      t.specificity_threshold = e.at("specificity_threshold").get<double>();
      t.text = load_modality(e.at("text_file"), e.at("text_checksum"), e.at("kappa_text"),
                             e.at("relevance_threshold_text"));
      if (e.contains("video_file")) {
        t.video = load_modality(e.at("video_file"), e.at("video_checksum"), e.at("kappa_video"),
                                e.at("relevance_threshold_video"));
      }
      b.tasks.push_back(std::move(t));
    }
    if (b.tasks.empty()) throw Error(ErrorCode::BadManifest, header.string() + " lists no tasks");
    return b;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadManifest, header.string() + ": " + e.what());
  }
}

std::vector<ThresholdDrift> verify_thresholds(const ReferenceBundle& bundle, unsigned workers) {
  std::vector<ThresholdDrift> out;
  auto relevance = [&](const ModalityReference& m) {
    DensityThreshold t;
    if (bundle.config.density == DensityModel::Kde) {
      t = self_density_threshold(m.refs, m.kappa, m.threshold.alpha, m.threshold.leave_one_out, workers);
    } else {
      t = single_vmf_threshold(m.refs, VmfParams{m.mean, m.kappa}, m.threshold.alpha);
    }
    return std::abs(t.log_threshold - m.threshold.log_threshold);
  };
  for (const TaskReference& t : bundle.tasks) {
    ThresholdDrift d;
    d.task = t.name;
    d.relevance_text = relevance(t.text);
    if (t.video) d.relevance_video = relevance(*t.video);
    d.specificity = std::abs(specificity_threshold(t.text.refs, t.root, t.q) - t.specificity_threshold);
    out.push_back(d);
  }
  return out;
}

}  // namespace respec
