#pragma once

#include <vector>

#include "respec/engine.hpp"
#include "respec/synth.hpp"

namespace testing {

inline respec::SynthConfig small_synth(std::uint64_t seed, std::size_t stream, std::size_t task_size = 1000) {
  respec::SynthConfig c;
  c.seed = seed;
  c.stream_size = stream;
  c.task_size = task_size;
  return c;
}

inline respec::ReferenceBundle bundle_from(const respec::SynthData& s, const respec::BuildConfig& cfg = {},
                                           bool with_video = true, unsigned workers = 0) {
  std::vector<respec::TaskInput> in;
  for (const auto& t : s.tasks) {
    respec::TaskInput ti{t.name, t.text, std::nullopt};
    if (with_video) ti.video = t.video;
    in.push_back(std::move(ti));
  }
  return respec::build_reference_bundle(in, s.root, cfg, workers);
}

inline std::vector<respec::RawRecord> raw_stream(const respec::SynthData& s, bool with_alt = false) {
  std::vector<respec::RawRecord> out;
  const std::size_t z = s.stream_text.dim;
  for (std::size_t i = 0; i < s.stream_text.rows; ++i) {
    respec::RawRecord r;
    r.entry = s.stream_manifest[i];
    r.video.assign(s.stream_video.values.begin() + i * z, s.stream_video.values.begin() + (i + 1) * z);
    r.text.assign(s.stream_text.values.begin() + i * z, s.stream_text.values.begin() + (i + 1) * z);
    if (with_alt) {
      r.alt_video.assign(s.stream_alt_video.values.begin() + i * z, s.stream_alt_video.values.begin() + (i + 1) * z);
      r.alt_text.assign(s.stream_alt_text.values.begin() + i * z, s.stream_alt_text.values.begin() + (i + 1) * z);
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<respec::StreamRecord> records(const respec::SynthData& s, bool with_alt = false) {
  std::vector<respec::StreamRecord> out;
  for (const auto& r : raw_stream(s, with_alt)) out.push_back(respec::ingest_record(r));
  return out;
}

inline std::vector<bool> accepted(const std::vector<respec::StreamRecord>& recs, const respec::ReferenceBundle& b,
                                  const respec::FilterConfig& cfg) {
  std::vector<bool> out;
  out.reserve(recs.size());
  for (const auto& r : recs) out.push_back(respec::decide(r, b, cfg).accepted);
  return out;
}

inline bool subset(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] && !b[i]) return false;
  }
  return true;
}

inline std::size_t count(const std::vector<bool>& a) {
  std::size_t n = 0;
  for (bool x : a) n += x;
  return n;
}

}  // namespace testing
