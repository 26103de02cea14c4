#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "respec/filters.hpp"

namespace respec {

/// A record before ingestion normalization; per-record numeric errors surface
/// when the worker normalizes it.
struct RawRecord {
  ManifestEntry entry;
  std::vector<float> video;
  std::vector<float> text;
  std::vector<float> alt_video;  // empty when absent
  std::vector<float> alt_text;
};

StreamRecord ingest_record(const RawRecord& raw);

class RecordSource {
 public:
  virtual ~RecordSource() = default;
  /// Appends up to max records; returns how many were appended (0 at end).
  virtual std::size_t next_batch(std::size_t max, std::vector<RawRecord>& out) = 0;
  /// Row reads per underlying file, for the one-pass check.
  virtual std::uint64_t rows_read() const = 0;
};

/// Video and text RSPC1 bundles paired by row plus one shared manifest;
/// alt bundles are optional and must be given together.
class PairedBundleSource final : public RecordSource {
 public:
  PairedBundleSource(const std::filesystem::path& video, const std::filesystem::path& text,
                     const std::filesystem::path& manifest,
                     const std::optional<std::filesystem::path>& alt_video = std::nullopt,
                     const std::optional<std::filesystem::path>& alt_text = std::nullopt);

  std::size_t next_batch(std::size_t max, std::vector<RawRecord>& out) override;
  std::uint64_t rows_read() const override { return text_.rows_read(); }
  std::uint64_t rows() const { return text_.rows(); }
  std::size_t dim() const { return text_.dim(); }
  bool has_alt() const { return alt_video_ != nullptr; }

 private:
  MatrixReader video_;
  MatrixReader text_;
  ManifestReader manifest_;
  std::unique_ptr<MatrixReader> alt_video_;
  std::unique_ptr<MatrixReader> alt_text_;
  std::vector<float> vbuf_, tbuf_, avbuf_, atbuf_;
};

class VectorSource final : public RecordSource {
 public:
  explicit VectorSource(std::vector<RawRecord> records) : records_(std::move(records)) {}
  std::size_t next_batch(std::size_t max, std::vector<RawRecord>& out) override;
  std::uint64_t rows_read() const override { return pos_; }

 private:
  std::vector<RawRecord> records_;
  std::size_t pos_ = 0;
};

struct EngineOptions {
  unsigned workers = 1;
  std::size_t batch_size = 256;
  bool skip_bad = false;
};

struct StreamStats {
  std::uint64_t records_in = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected_by_alignment = 0;
  std::uint64_t rejected_by_relevance = 0;
  std::uint64_t rejected_by_specificity = 0;
  std::uint64_t errors = 0;
  std::uint64_t dot_products = 0;
  std::uint64_t kernel_row_evaluations = 0;
  std::uint64_t rows_read = 0;
  std::chrono::duration<double> wall_time{0};

  double clip_ratio() const {
    return records_in == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(records_in);
  }
  void add(const FilterDecision& d);

  /// Deterministic counters only; wall time is excluded so that the stats
  /// file is identical across worker counts.
  nlohmann::json to_json() const;
  std::string summary() const;
};

std::string decision_to_json_line(const FilterDecision& d, Modality modality);
std::string error_to_json_line(const std::string& id, const Error& e);

/// One pass over the source. Decision lines are written in input order for
/// any worker count; accepted ids go to accepted_out when given.
StreamStats run_stream(RecordSource& source, const ReferenceBundle& bundle, const FilterConfig& cfg,
                       const EngineOptions& options, std::ostream& decisions_out, std::ostream* accepted_out);

}  // namespace respec
