#include "respec/synth.hpp"

#include <cmath>
#include <random>

#include "respec/vmf.hpp"

namespace respec {

namespace fs = std::filesystem;

namespace {

// Independent deterministic sub-seeds from one master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)) ^ (0xbf58476d1ce4e5b9ULL * (index + 1));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

Embedding draw_one(const Embedding& mu, double kappa, std::uint64_t seed) {
  return sample_vmf(mu, kappa, 1, seed).row_embedding(0);
}

void append(RawMatrix& m, const Embedding& e) {
  m.dim = e.dim();
  m.values.insert(m.values.end(), e.values().begin(), e.values().end());
  ++m.rows;
}

std::string caption(std::mt19937_64& rng, const std::string& vocab_prefix, std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> word(0, vocab - 1);
  std::uniform_int_distribution<int> len(4, 9);
  std::string s;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += vocab_prefix + std::to_string(word(rng));
  }
  return s;
}

std::string pad(std::size_t i) {
  std::string s = std::to_string(i);
  return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

}  // namespace

SynthData synthesize(const SynthConfig& cfg) {
  if (cfg.dim < 2) throw Error(ErrorCode::InvalidArgument, "synthetic dimension must be >= 2");
  if (cfg.tasks == 0 || cfg.task_size < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least one task of two or more rows");
  }
  const double fractions = cfg.in_task_fraction + cfg.generic_fraction;
  if (cfg.in_task_fraction < 0 || cfg.generic_fraction < 0 || fractions > 1.0 || cfg.misaligned_fraction < 0 ||
      cfg.misaligned_fraction > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "mixture fractions must lie in [0,1] and sum to at most 1");
  }
  SynthData out;
  for (RawMatrix* m : {&out.stream_video, &out.stream_text, &out.stream_alt_video, &out.stream_alt_text}) m->dim = cfg.dim;
  const Embedding root = random_direction(cfg.dim, derive_seed(cfg.seed, 0, 0));
  out.root = to_raw(root);

  std::vector<Embedding> means;
  for (std::size_t d = 0; d < cfg.tasks; ++d) {
    means.push_back(random_direction(cfg.dim, derive_seed(cfg.seed, 1, d)));
    SynthTask t;
    t.name = "task" + std::to_string(d);
    t.video.dim = cfg.dim;
    const EmbeddingMatrix text = sample_vmf(means.back(), cfg.task_kappa, cfg.task_size, derive_seed(cfg.seed, 2, d));
    t.text = to_raw(text);
    std::mt19937_64 words(derive_seed(cfg.seed, 3, d));
    for (std::size_t i = 0; i < cfg.task_size; ++i) {
      append(t.video, draw_one(text.row_embedding(i), cfg.pair_kappa, derive_seed(cfg.seed, 4 + d, i)));
      t.manifest.push_back(ManifestEntry{t.name + "-" + pad(i), caption(words, t.name + "w", 40), std::nullopt});
    }
    out.tasks.push_back(std::move(t));
  }
  std::vector<Embedding> centres;
  for (std::size_t c = 0; c < cfg.background_centres; ++c) {
    centres.push_back(random_direction(cfg.dim, derive_seed(cfg.seed, 5, c)));
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, 6, 0));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_task(0, cfg.tasks - 1);
  std::uniform_int_distribution<std::size_t> pick_centre(0, std::max<std::size_t>(1, cfg.background_centres) - 1);
  for (std::size_t i = 0; i < cfg.stream_size; ++i) {
    const double u = unif(rng);
    const bool misaligned = unif(rng) < cfg.misaligned_fraction;
    const std::uint64_t s = derive_seed(cfg.seed, 7, i);
    Embedding text;
    std::string label;
    std::string words;
    bool in_task = false;
    if (u < cfg.in_task_fraction) {
      const std::size_t d = pick_task(rng);
      text = draw_one(means[d], cfg.task_kappa, s);
      label = "task:" + out.tasks[d].name;
      words = caption(rng, out.tasks[d].name + "w", 40);
      in_task = true;
    } else if (u < fractions) {
      text = draw_one(root, cfg.task_kappa, s);
      label = "generic";
      words = caption(rng, "genericw", 5);
    } else {
      const std::size_t c = pick_centre(rng);
      text = cfg.background_centres == 0 ? random_direction(cfg.dim, s) : draw_one(centres[c], cfg.task_kappa, s);
      label = "background";
      words = caption(rng, "bg" + std::to_string(c) + "w", 40);
    }
    const std::uint64_t vs = derive_seed(cfg.seed, 8, i);
    const Embedding video = misaligned ? random_direction(cfg.dim, vs) : draw_one(text, cfg.pair_kappa, vs);
    std::vector<double> alt(cfg.dim);
    const double shift = in_task ? cfg.alt_shift : -cfg.alt_shift;
    for (std::size_t j = 0; j < cfg.dim; ++j) alt[j] = video[j] + shift * text[j];

    append(out.stream_text, text);
    append(out.stream_video, video);
    append(out.stream_alt_text, text);
    append(out.stream_alt_video, normalize(std::span<const double>(alt)));
    nlohmann::json meta{{"label", label}, {"misaligned", misaligned}};
    out.stream_manifest.push_back(ManifestEntry{"rec-" + pad(i), words, meta});
  }
  return out;
}

void write_synth(const SynthData& data, const fs::path& out) {
  fs::create_directories(out);
  write_matrix(out / "root.rspc", data.root);
  for (const SynthTask& t : data.tasks) {
    write_matrix(out / (t.name + "_text.rspc"), t.text);
    write_matrix(out / (t.name + "_video.rspc"), t.video);
    write_manifest(out / (t.name + ".jsonl"), t.manifest);
  }
  write_matrix(out / "stream_video.rspc", data.stream_video);
  write_matrix(out / "stream_text.rspc", data.stream_text);
  write_matrix(out / "stream_alt_video.rspc", data.stream_alt_video);
  write_matrix(out / "stream_alt_text.rspc", data.stream_alt_text);
  write_manifest(out / "stream.jsonl", data.stream_manifest);
}

}  // namespace respec
