#include "respec/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "respec/analysis.hpp"
#include "respec/engine.hpp"
#include "respec/reference.hpp"
#include "respec/synth.hpp"

namespace respec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_unit_open(double v, const char* flag) {
  if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(flag) + " must lie in (0,1)");
}

void require_cosine(double v, const char* flag) {
  if (!(v >= -1.0 && v <= 1.0)) throw UsageError(std::string(flag) + " must lie in [-1,1]");
}

void add_config(CLI::App* sub) {
  // Consumed by expand_config before parsing; declared here for --help.
  sub->add_option("--config")->description("JSON file with flag values; command-line flags take precedence");
}

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

// Rewrites `<sub> ... --config PATH ...` by splicing the file's keys in as
// flags ahead of the given ones. Keys already on the command line are
// skipped, so flags win over the file and the file wins over environment
// fallbacks. build-ref task groups are emitted interleaved.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  if (args.size() < 2) return args;
  std::optional<std::string> path;
  std::vector<std::string> kept{args[0], args[1]};
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!path) return args;
  std::ifstream in(*path);
  if (!in) throw UsageError("cannot open config file " + *path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + *path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file " + *path + " must hold a JSON object");

  auto given = [&](const std::string& flag) {
    for (std::size_t i = 2; i < kept.size(); ++i) {
      if (kept[i] == flag || kept[i].starts_with(flag + "=")) return true;
      if (flag.starts_with("--") && kept[i] == "--no-" + flag.substr(2)) return true;
    }
    return false;
  };
  std::vector<std::string> extra;
  const bool groups = args[1] == "build-ref" && j.contains("task") && !given("--task");
  if (groups) {
    auto list = [&](const char* key) {
      std::vector<std::string> v;
      if (j.contains(key)) {
        for (const json& x : j.at(key).is_array() ? j.at(key) : json::array({j.at(key)})) v.push_back(scalar(x));
      }
      return v;
    };
    const auto tasks = list("task"), texts = list("text"), videos = list("video");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      extra.insert(extra.end(), {"--task", tasks[i]});
      if (i < texts.size()) extra.insert(extra.end(), {"--text", texts[i]});
      if (i < videos.size()) extra.insert(extra.end(), {"--video", videos[i]});
    }
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (groups && (it.key() == "task" || it.key() == "text" || it.key() == "video")) continue;
    const std::string flag = flag_name(it.key());
    if (given(flag)) continue;
    if (it->is_boolean()) {
      if (it->get<bool>()) {
        extra.push_back(flag);
      } else if (flag == "--loo") {
        extra.push_back("--no-loo");
      }
    } else if (it->is_array()) {
      for (const json& v : *it) extra.insert(extra.end(), {flag, scalar(v)});
    } else {
      extra.insert(extra.end(), {flag, scalar(*it)});
    }
  }
  kept.insert(kept.begin() + 2, extra.begin(), extra.end());
  return kept;
}

// ---------------------------------------------------------------- build-ref

struct BuildRefArgs {
  std::vector<std::string> task_names;
  std::vector<std::string> text_paths;
  std::vector<std::string> video_paths;
  std::string root;
  double alpha = 0.05;
  double q = 0.1;
  bool loo = true;
  std::string modality = "text";
  std::string density = "kde";
  std::string out;
  unsigned workers = 0;
};

void setup_build_ref(CLI::App& app, BuildRefArgs& a) {
  auto* sub = app.add_subcommand("build-ref", "Precompute per-task reference statistics from downstream embeddings");
  add_config(sub);
  sub->add_option("--task", a.task_names, "Task name; starts a task group (repeatable)")->required();
  sub->add_option("--text", a.text_paths, "RSPC1 text embeddings of the preceding --task")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--video", a.video_paths, "RSPC1 video embeddings of the preceding --task (optional)")
      ->check(CLI::ExistingFile);
  sub->add_option("--root", a.root, "One-row RSPC1 bundle with the empty-caption text embedding")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--alpha", a.alpha,
                  "Significance level of the relevance test, quantile of reference self-densities "
                  "(default 0.05)")
      ->capture_default_str();
  sub->add_option("--q", a.q, "Quantile of reference root distances used as specificity threshold (default 0.1)")
      ->capture_default_str();
  sub->add_flag("--loo,!--no-loo", a.loo, "Leave-one-out self-density calibration (default on)");
  sub->add_option("--modality", a.modality, "Relevance modality recorded in the bundle")
      ->check(CLI::IsMember({"text", "video", "union", "intersection"}))
      ->capture_default_str();
  sub->add_option("--density", a.density, "Relevance density model: kde or single_vmf")
      ->check(CLI::IsMember({"kde", "single_vmf"}))
      ->capture_default_str();
  sub->add_option("--workers", a.workers, "Threads for threshold calibration (0 = all cores)")
      ->envname("RESPEC_WORKERS");
  sub->add_option("--out", a.out, "Output bundle directory")->required();
}

int cmd_build_ref(const CLI::App& sub, const BuildRefArgs& a, std::ostream& out) {
  require_unit_open(a.alpha, "--alpha");
  require_unit_open(a.q, "--q");
  // Rebuild the --task/--text/--video grouping from the parse order.
  struct Group {
    std::string name;
    std::optional<std::string> text, video;
  };
  std::vector<Group> groups;
  std::size_t ti = 0, xi = 0, vi = 0;
  for (const CLI::Option* opt : sub.parse_order()) {
    const std::string n = opt->get_name();
    if (n == "--task") {
      groups.push_back(Group{a.task_names.at(ti++), std::nullopt, std::nullopt});
    } else if (n == "--text" || n == "--video") {
      if (groups.empty()) throw UsageError(n + " must follow a --task NAME");
      auto& slot = n == "--text" ? groups.back().text : groups.back().video;
      if (slot) throw UsageError("task '" + groups.back().name + "' has more than one " + n);
      slot = n == "--text" ? a.text_paths.at(xi++) : a.video_paths.at(vi++);
    }
  }
  for (const Group& g : groups) {
    if (!g.text) throw UsageError("task '" + g.name + "' is missing --text");
  }
  const Modality modality = parse_modality(a.modality);
  if (modality != Modality::Text) {
    for (const Group& g : groups) {
      if (!g.video) throw UsageError("--modality " + a.modality + " needs --video for task '" + g.name + "'");
    }
  }

  BuildConfig cfg;
  cfg.alpha = a.alpha;
  cfg.q = a.q;
  cfg.leave_one_out = a.loo;
  cfg.modality = modality;
  cfg.density = parse_density_model(a.density);

  std::vector<TaskInput> inputs;
  for (const Group& g : groups) {
    TaskInput in{g.name, read_matrix(*g.text), std::nullopt};
    if (g.video) in.video = read_matrix(*g.video);
    inputs.push_back(std::move(in));
  }
  const RawMatrix root = read_matrix(a.root);
  const ReferenceBundle bundle = build_reference_bundle(inputs, root, cfg, a.workers);
  save_bundle(bundle, a.out);
  for (const TaskReference& t : bundle.tasks) {
    out << t.name << ": n_text=" << t.text.refs.rows() << " kappa_text=" << t.text.kappa
        << " rel_threshold_text=" << t.text.threshold.log_threshold;
    if (t.video) {
      out << " n_video=" << t.video->refs.rows() << " kappa_video=" << t.video->kappa
          << " rel_threshold_video=" << t.video->threshold.log_threshold;
    }
    out << " spec_threshold=" << t.specificity_threshold << '\n';
  }
  out << "wrote " << (fs::path(a.out) / kBundleManifestName).string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- filter

struct FilterArgs {
  std::string bundle, video, text, manifest, out, stats;
  std::optional<std::string> alt_video, alt_text;
  double tau = 0.28;
  double tau_text = kDefaultTauText;
  std::string modality = "text";
  std::string combine = "joint";
  std::string baseline = "respec";
  unsigned workers = 1;
  std::size_t batch_size = 256;
  bool skip_bad = false;
  bool verify_bundle = false;
};

void setup_filter(CLI::App& app, FilterArgs& a) {
  auto* sub = app.add_subcommand("filter", "Filter a paired video/text embedding stream in one pass");
  add_config(sub);
  sub->add_option("--bundle", a.bundle, "Reference bundle directory from build-ref")
      ->required()
      ->check(CLI::ExistingDirectory);
  sub->add_option("--video", a.video, "RSPC1 stream video embeddings")->required()->check(CLI::ExistingFile);
  sub->add_option("--text", a.text, "RSPC1 stream text embeddings")->required()->check(CLI::ExistingFile);
  sub->add_option("--manifest", a.manifest, "JSON-lines manifest, one line per stream row")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--tau", a.tau,
                  "Video-text alignment threshold, pass iff cosine > tau; useful range 0.20..0.30")
      ->required();
  sub->add_option("--tau-text", a.tau_text, "Text similarity threshold of the train-free CiT baseline (default 0.55)")
      ->capture_default_str();
  sub->add_option("--modality", a.modality, "Relevance modality: text, video, union, intersection")
      ->check(CLI::IsMember({"text", "video", "union", "intersection"}))
      ->capture_default_str();
  sub->add_option("--combine", a.combine,
                  "joint: one task must pass relevance and specificity; independent: any task for each")
      ->check(CLI::IsMember({"joint", "joint_same_task", "independent"}))
      ->capture_default_str();
  sub->add_option("--baseline", a.baseline, "respec, lb_threshold, cit_trainfree or color_samplewise")
      ->check(CLI::IsMember({"respec", "lb_threshold", "cit_trainfree", "color_samplewise"}))
      ->capture_default_str();
  sub->add_option("--workers", a.workers, "Decision threads (falls back to RESPEC_WORKERS)")
      ->envname("RESPEC_WORKERS")
      ->capture_default_str();
  sub->add_option("--batch-size", a.batch_size, "Records per worker per window; no effect on results")
      ->capture_default_str();
  sub->add_option("--alt-video", a.alt_video, "Second-model video embeddings (color_samplewise)")
      ->check(CLI::ExistingFile);
  sub->add_option("--alt-text", a.alt_text, "Second-model text embeddings (color_samplewise)")
      ->check(CLI::ExistingFile);
  sub->add_flag("--skip-bad", a.skip_bad, "Log records that fail ingestion and continue instead of aborting");
  sub->add_flag("--verify-bundle", a.verify_bundle, "Recompute stored thresholds and report drift before filtering");
  sub->add_option("--stats", a.stats, "Stats JSON path (default <out>/stats.json)");
  sub->add_option("--out", a.out, "Output directory")->required();
}

int cmd_filter(const FilterArgs& a, std::ostream& out) {
  FilterConfig cfg;
  cfg.tau = a.tau;
  cfg.tau_text = a.tau_text;
  require_cosine(cfg.tau, "--tau");
  require_cosine(cfg.tau_text, "--tau-text");
  cfg.modality = parse_modality(a.modality);
  cfg.combine = parse_combine(a.combine);
  cfg.baseline = parse_baseline(a.baseline);
  if (a.workers == 0) throw UsageError("--workers must be >= 1");
  if (a.batch_size == 0) throw UsageError("--batch-size must be >= 1");
  if (cfg.baseline == Baseline::ColorSampleWise && (!a.alt_video || !a.alt_text)) {
    throw Error(ErrorCode::MissingAltEmbeddings, "--baseline color_samplewise requires --alt-video and --alt-text");
  }

  const ReferenceBundle bundle = load_bundle(a.bundle);
  if (a.verify_bundle) {
    for (const ThresholdDrift& d : verify_thresholds(bundle)) {
      out << "drift " << d.task << ": relevance_text " << d.relevance_text;
      if (d.relevance_video) out << ", relevance_video " << *d.relevance_video;
      out << ", specificity " << d.specificity << '\n';
    }
  }
  if (cfg.modality != Modality::Text) {
    for (const TaskReference& t : bundle.tasks) {
      if (!t.video) {
        throw Error(ErrorCode::MissingModalityReferences,
                    "--modality " + a.modality + ": task '" + t.name + "' in " + a.bundle + " has no video references");
      }
    }
  }
  PairedBundleSource source(a.video, a.text, a.manifest,
                            a.alt_video ? std::optional<fs::path>(*a.alt_video) : std::nullopt,
                            a.alt_text ? std::optional<fs::path>(*a.alt_text) : std::nullopt);
  if (source.dim() != bundle.dim) {
    throw Error(ErrorCode::DimensionMismatch, a.text + " has dim " + std::to_string(source.dim()) +
                                                  ", bundle " + a.bundle + " has dim " + std::to_string(bundle.dim));
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ofstream decisions(dir / "decisions.jsonl", std::ios::trunc);
  std::ofstream accepted(dir / "accepted.txt", std::ios::trunc);
  if (!decisions || !accepted) throw Error(ErrorCode::IoError, "cannot write outputs under " + dir.string());

  EngineOptions opts{a.workers, a.batch_size, a.skip_bad};
  const StreamStats stats = run_stream(source, bundle, cfg, opts, decisions, &accepted);
  if (stats.rows_read != source.rows()) {
    throw Error(ErrorCode::CountMismatch, "stream was not read exactly once");
  }

  json s = stats.to_json();
  s["config"] = json{{"tau", cfg.tau},
                     {"tau_text", cfg.tau_text},
                     {"modality", std::string(to_string(cfg.modality))},
                     {"combine", std::string(to_string(cfg.combine))},
                     {"baseline", std::string(to_string(cfg.baseline))},
                     {"skip_bad", a.skip_bad},
                     {"bundle_build_config",
                      {{"alpha", bundle.config.alpha},
                       {"q", bundle.config.q},
                       {"loo", bundle.config.leave_one_out},
                       {"density", std::string(to_string(bundle.config.density))}}}};
  const fs::path stats_path = a.stats.empty() ? dir / "stats.json" : fs::path(a.stats);
  std::ofstream sf(stats_path, std::ios::trunc);
  if (!sf) throw Error(ErrorCode::IoError, "cannot write " + stats_path.string());
  sf << s.dump(2) << '\n';
  out << stats.summary();
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::optional<std::uint64_t> seed;
  SynthConfig cfg;
  std::string out;
};

void setup_synth(CLI::App& app, SynthArgs& a) {
  auto* sub = app.add_subcommand("synth", "Generate labeled synthetic tasks and a mixed stream");
  add_config(sub);
  sub->add_option("--seed", a.seed, "RNG seed (required; no clock-based default)")->required();
  sub->add_option("--dim", a.cfg.dim, "Embedding dimension")->capture_default_str();
  sub->add_option("--tasks", a.cfg.tasks, "Number of downstream tasks")->capture_default_str();
  sub->add_option("--task-size", a.cfg.task_size, "Reference rows per task")->capture_default_str();
  sub->add_option("--task-kappa", a.cfg.task_kappa, "Concentration of task text clusters")->capture_default_str();
  sub->add_option("--pair-kappa", a.cfg.pair_kappa, "Concentration of video around its caption")
      ->capture_default_str();
  sub->add_option("--stream-size", a.cfg.stream_size, "Stream records")->capture_default_str();
  sub->add_option("--in-task", a.cfg.in_task_fraction, "Fraction of stream drawn from the tasks")
      ->capture_default_str();
  sub->add_option("--generic", a.cfg.generic_fraction, "Fraction of stream drawn around the root")
      ->capture_default_str();
  sub->add_option("--misaligned", a.cfg.misaligned_fraction, "Fraction of records with unrelated video")
      ->capture_default_str();
  sub->add_option("--out", a.out, "Output directory")->required();
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig cfg = a.cfg;
  cfg.seed = *a.seed;
  if (cfg.dim < 2) throw UsageError("--dim must be >= 2");
  if (cfg.tasks == 0 || cfg.task_size < 2) throw UsageError("--tasks >= 1 and --task-size >= 2 required");
  const SynthData data = synthesize(cfg);
  write_synth(data, a.out);
  out << "wrote " << data.tasks.size() << " tasks and " << cfg.stream_size << " stream records to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string log, out;
  std::optional<std::string> video, text, manifest;
  std::vector<std::string> ref_video, ref_text, ref_manifest;
  std::size_t buckets = kDefaultBuckets;
};

void setup_analyze(CLI::App& app, AnalyzeArgs& a) {
  auto* sub = app.add_subcommand("analyze", "Report clip ratio, pass rates and distribution distances");
  add_config(sub);
  sub->add_option("--log", a.log, "Decision log from filter")->required()->check(CLI::ExistingFile);
  sub->add_option("--video", a.video, "Stream video bundle (for Frechet distance)")->check(CLI::ExistingFile);
  sub->add_option("--text", a.text, "Stream text bundle (for Frechet distance)")->check(CLI::ExistingFile);
  sub->add_option("--manifest", a.manifest, "Stream manifest with captions (for n-gram KL)")
      ->check(CLI::ExistingFile);
  sub->add_option("--ref-video", a.ref_video, "Downstream video bundle (repeatable)")->check(CLI::ExistingFile);
  sub->add_option("--ref-text", a.ref_text, "Downstream text bundle (repeatable)")->check(CLI::ExistingFile);
  sub->add_option("--ref-manifest", a.ref_manifest, "Downstream manifest with captions (repeatable)")
      ->check(CLI::ExistingFile);
  sub->add_option("--buckets", a.buckets, "Hash buckets for the n-gram histogram")->capture_default_str();
  sub->add_option("--out", a.out, "Output directory")->required();
}

EmbeddingMatrix pooled(const std::vector<std::string>& paths) {
  RawMatrix all;
  for (const std::string& p : paths) {
    RawMatrix m = read_matrix(p);
    if (all.rows && m.dim != all.dim) throw Error(ErrorCode::DimensionMismatch, p + " differs in dimension");
    all.dim = m.dim;
    all.rows += m.rows;
    all.values.insert(all.values.end(), m.values.begin(), m.values.end());
  }
  return ingest(all);
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  if (a.video.has_value() != a.text.has_value()) throw UsageError("--video and --text must be given together");
  if (a.ref_video.size() != a.ref_text.size()) throw UsageError("--ref-video and --ref-text must pair up");
  if (a.buckets == 0) throw UsageError("--buckets must be >= 1");
  const bool want_frechet = a.video && !a.ref_text.empty();
  const bool want_kl = a.manifest && !a.ref_manifest.empty();

  std::vector<std::string> lines;
  {
    std::ifstream in(a.log);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.log);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) lines.push_back(std::move(line));
    }
  }
  const Report rep = report_from_lines(lines);
  std::vector<std::size_t> accepted_rows;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const json j = json::parse(lines[i]);
    ids.push_back(j.at("id").get<std::string>());
    if (j.value("accepted", false)) accepted_rows.push_back(i);
  }

  json result = rep.to_json();
  result["analysis_config"] = json{{"buckets", a.buckets},
                                   {"tokenizer", "ascii-lowercase whitespace"},
                                   {"ngrams", "unigram+bigram"},
                                   {"hash", "fnv1a64"},
                                   {"smoothing", "add-1/B"},
                                   {"kl_direction", "KL(downstream || filtered)"},
                                   {"covariance_regularization", kCovarianceRegularization}};
  if (want_frechet) {
    const EmbeddingMatrix v = ingest(read_matrix(*a.video));
    const EmbeddingMatrix t = ingest(read_matrix(*a.text));
    if (v.rows() != lines.size() || t.rows() != lines.size()) {
      throw Error(ErrorCode::CountMismatch, "decision log " + a.log + " and stream bundles differ in length");
    }
    const Eigen::MatrixXd ref = concat_modalities(pooled(a.ref_video), pooled(a.ref_text));
    const Eigen::MatrixXd all = concat_modalities(v, t);
    result["frechet_unfiltered"] = frechet_distance(ref, all);
    if (accepted_rows.empty()) {
      result["frechet_filtered"] = nullptr;
    } else {
      result["frechet_filtered"] = frechet_distance(ref, concat_modalities(v.select(accepted_rows), t.select(accepted_rows)));
    }
  }
  if (want_kl) {
    const Manifest stream = read_manifest(*a.manifest);
    if (stream.size() != lines.size()) {
      throw Error(ErrorCode::CountMismatch, "decision log " + a.log + " and " + *a.manifest + " differ in length");
    }
    std::vector<std::string> ref_texts, all_texts, kept_texts;
    for (const std::string& p : a.ref_manifest) {
      for (const ManifestEntry& e : read_manifest(p)) {
        if (e.text) ref_texts.push_back(*e.text);
      }
    }
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (stream[i].id != ids[i]) {
        throw Error(ErrorCode::CountMismatch, "manifest row " + std::to_string(i) + " id does not match decision log");
      }
      if (stream[i].text) all_texts.push_back(*stream[i].text);
    }
    for (std::size_t i : accepted_rows) {
      if (stream[i].text) kept_texts.push_back(*stream[i].text);
    }
    result["ngram_kl_unfiltered"] = ngram_kl(ref_texts, all_texts, a.buckets);
    result["ngram_kl_filtered"] = kept_texts.empty() ? json(nullptr) : json(ngram_kl(ref_texts, kept_texts, a.buckets));
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ofstream rf(dir / "report.json", std::ios::trunc);
  if (!rf) throw Error(ErrorCode::IoError, "cannot write " + (dir / "report.json").string());
  rf << result.dump(2) << '\n';
  out << rep.to_text();
  for (const char* key : {"frechet_unfiltered", "frechet_filtered", "ngram_kl_unfiltered", "ngram_kl_filtered"}) {
    if (result.contains(key)) out << key << ' ' << result[key].dump() << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Streaming relevance/specificity filter for video-text embedding pairs", "respec"};
  app.require_subcommand(1);
  BuildRefArgs build_args;
  FilterArgs filter_args;
  SynthArgs synth_args;
  AnalyzeArgs analyze_args;
  setup_build_ref(app, build_args);
  setup_filter(app, filter_args);
  setup_synth(app, synth_args);
  setup_analyze(app, analyze_args);

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(std::move(args));
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<const char*> expanded;
  for (const std::string& a : args) expanded.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(expanded.size()), expanded.data());
  } catch (const CLI::ParseError& e) {
    if (app.exit(e, out, err) == 0) return kExitOk;
    for (const CLI::App* sub : app.get_subcommands()) err << '\n' << sub->help();
    if (app.get_subcommands().empty()) err << '\n' << app.help();
    return kExitUsage;
  }

  try {
    if (auto* s = app.get_subcommand("build-ref"); s->parsed()) return cmd_build_ref(*s, build_args, out);
    if (app.get_subcommand("filter")->parsed()) return cmd_filter(filter_args, out);
    if (app.get_subcommand("synth")->parsed()) return cmd_synth(synth_args, out);
    if (app.get_subcommand("analyze")->parsed()) return cmd_analyze(analyze_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.category() == ErrorCategory::Numeric ? kExitNumeric : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace respec::cli
