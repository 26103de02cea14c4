#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "respec/bundle_io.hpp"

namespace respec {

/// Labeled synthetic tasks and a mixed stream. Stream records are drawn as
///   in-task     text ~ vMF(task mean, task_kappa)
///   generic     text ~ vMF(root, task_kappa)        (low specificity)
///   background  text ~ vMF(background centre, task_kappa)
/// with video ~ vMF(text, pair_kappa), or uniform for misaligned records.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t dim = 64;
  std::size_t tasks = 2;
  std::size_t task_size = 2000;
  double task_kappa = 300.0;
  double pair_kappa = 24.0;
  std::size_t stream_size = 10000;
  double in_task_fraction = 0.3;
  double generic_fraction = 0.1;
  double misaligned_fraction = 0.2;
  std::size_t background_centres = 8;
  // alt video = normalize(video + shift * text) for in-task records, minus otherwise.
  double alt_shift = 0.3;
};

struct SynthTask {
  std::string name;
  RawMatrix text;
  RawMatrix video;
  Manifest manifest;
};

struct SynthData {
  std::vector<SynthTask> tasks;
  RawMatrix root;
  RawMatrix stream_video;
  RawMatrix stream_text;
  RawMatrix stream_alt_video;
  RawMatrix stream_alt_text;
  Manifest stream_manifest;  // meta.label is "task:<name>", "generic" or "background"
};

SynthData synthesize(const SynthConfig& cfg);

/// Writes <out>/root.rspc, <out>/<task>_{text,video}.rspc + <task>.jsonl and
/// <out>/stream_{video,text,alt_video,alt_text}.rspc + stream.jsonl.
void write_synth(const SynthData& data, const std::filesystem::path& out);

}  // namespace respec
