#include "respec/engine.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <thread>
#include <variant>

namespace respec {

namespace fs = std::filesystem;
using nlohmann::json;

StreamRecord ingest_record(const RawRecord& raw) {
  StreamRecord r;
  r.id = raw.entry.id;
  r.raw_text = raw.entry.text;
  r.video = normalize(std::span<const float>(raw.video));
  r.text = normalize(std::span<const float>(raw.text));
  if (!raw.alt_video.empty()) r.alt_video = normalize(std::span<const float>(raw.alt_video));
  if (!raw.alt_text.empty()) r.alt_text = normalize(std::span<const float>(raw.alt_text));
  return r;
}

PairedBundleSource::PairedBundleSource(const fs::path& video, const fs::path& text, const fs::path& manifest,
                                       const std::optional<fs::path>& alt_video,
                                       const std::optional<fs::path>& alt_text)
    : video_(video), text_(text), manifest_(manifest) {
  if (video_.rows() != text_.rows()) {
    throw Error(ErrorCode::BundlePairMismatch, video.string() + " has " + std::to_string(video_.rows()) +
                                                   " rows, " + text.string() + " has " +
                                                   std::to_string(text_.rows()));
  }
  if (video_.dim() != text_.dim()) {
    throw Error(ErrorCode::DimensionMismatch, video.string() + " and " + text.string() + " differ in dimension");
  }
  if (alt_video.has_value() != alt_text.has_value()) {
    throw Error(ErrorCode::MissingAltEmbeddings, "--alt-video and --alt-text must be given together");
  }
  if (alt_video) {
    alt_video_ = std::make_unique<MatrixReader>(*alt_video);
    alt_text_ = std::make_unique<MatrixReader>(*alt_text);
    if (alt_video_->rows() != text_.rows() || alt_text_->rows() != text_.rows()) {
      throw Error(ErrorCode::BundlePairMismatch, "alt bundles must have the same row count as the stream");
    }
    if (alt_video_->dim() != alt_text_->dim()) {
      throw Error(ErrorCode::DimensionMismatch, "alt video and alt text bundles differ in dimension");
    }
  }
}

std::size_t PairedBundleSource::next_batch(std::size_t max, std::vector<RawRecord>& out) {
  vbuf_.clear();
  tbuf_.clear();
  const std::size_t n = video_.read_rows(max, vbuf_);
  if (text_.read_rows(n, tbuf_) != n) throw Error(ErrorCode::BundlePairMismatch, "text bundle ended early");
  if (alt_video_) {
    avbuf_.clear();
    atbuf_.clear();
    alt_video_->read_rows(n, avbuf_);
    alt_text_->read_rows(n, atbuf_);
  }
  const std::size_t z = text_.dim();
  for (std::size_t i = 0; i < n; ++i) {
    auto entry = manifest_.next();
    if (!entry) {
      throw Error(ErrorCode::CountMismatch, "manifest has fewer lines than the bundles have rows");
    }
    RawRecord r;
    r.entry = std::move(*entry);
    r.video.assign(vbuf_.begin() + i * z, vbuf_.begin() + (i + 1) * z);
    r.text.assign(tbuf_.begin() + i * z, tbuf_.begin() + (i + 1) * z);
    if (alt_video_) {
      const std::size_t az = alt_video_->dim();
      r.alt_video.assign(avbuf_.begin() + i * az, avbuf_.begin() + (i + 1) * az);
      r.alt_text.assign(atbuf_.begin() + i * az, atbuf_.begin() + (i + 1) * az);
    }
    out.push_back(std::move(r));
  }
  if (n == 0 && manifest_.next()) {
    throw Error(ErrorCode::CountMismatch, "manifest has more lines than the bundles have rows");
  }
  return n;
}

std::size_t VectorSource::next_batch(std::size_t max, std::vector<RawRecord>& out) {
  const std::size_t n = std::min(max, records_.size() - pos_);
  for (std::size_t i = 0; i < n; ++i) out.push_back(records_[pos_ + i]);
  pos_ += n;
  return n;
}

void StreamStats::add(const FilterDecision& d) {
  ++records_in;
  switch (d.rejected_by) {
    case RejectedBy::None: ++accepted; break;
    case RejectedBy::Alignment: ++rejected_by_alignment; break;
    case RejectedBy::Relevance: ++rejected_by_relevance; break;
    case RejectedBy::Specificity: ++rejected_by_specificity; break;
  }
  dot_products += d.telemetry.dot_products;
  kernel_row_evaluations += d.telemetry.kernel_rows;
}

json StreamStats::to_json() const {
  return json{{"records_in", records_in},
              {"accepted", accepted},
              {"rejected_by_alignment", rejected_by_alignment},
              {"rejected_by_relevance", rejected_by_relevance},
              {"rejected_by_specificity", rejected_by_specificity},
              {"errors", errors},
              {"dot_products", dot_products},
              {"kernel_row_evaluations", kernel_row_evaluations},
              {"rows_read", rows_read},
              {"clip_ratio", clip_ratio()}};
}

std::string StreamStats::summary() const {
  std::ostringstream os;
  const double secs = wall_time.count();
  os << "records      " << records_in << '\n'
     << "accepted     " << accepted << "  (clip ratio " << clip_ratio() << ")\n"
     << "rejected     alignment " << rejected_by_alignment << ", relevance " << rejected_by_relevance
     << ", specificity " << rejected_by_specificity << '\n'
     << "errors       " << errors << '\n'
     << "dot products " << dot_products << ", kernel rows " << kernel_row_evaluations << '\n'
     << "wall time    " << secs << " s";
  if (secs > 0) os << "  (" << static_cast<double>(records_in + errors) / secs << " records/s)";
  os << '\n';
  return os.str();
}

std::string decision_to_json_line(const FilterDecision& d, Modality modality) {
  json j;
  j["id"] = d.id;
  j["accepted"] = d.accepted;
  j["rejected_by"] = std::string(to_string(d.rejected_by));
  j["alignment_score"] = d.alignment_score;
  if (d.baseline_score) j["baseline_score"] = *d.baseline_score;
  json tasks = json::array();
  for (const TaskTrace& t : d.per_task) {
    json e;
    e["task"] = t.task;
    const RelevanceResult& r = t.relevance;
    if (modality == Modality::Video) {
      e["rel_logd"] = *r.log_density_video;
    } else {
      e["rel_logd"] = *r.log_density_text;
    }
    e["rel_pass"] = r.pass;
    if (modality == Modality::Union || modality == Modality::Intersection) {
      e["rel_pass_text"] = *r.pass_text;
      e["rel_logd_video"] = *r.log_density_video;
      e["rel_pass_video"] = *r.pass_video;
    }
    e["spec_dist"] = t.specificity_distance;
    e["spec_pass"] = t.specificity_pass;
    tasks.push_back(std::move(e));
  }
  j["per_task"] = std::move(tasks);
  return j.dump();
}

std::string error_to_json_line(const std::string& id, const Error& e) {
  return json{{"id", id}, {"error", std::string(error_code_name(e.code()))}, {"message", e.what()}}.dump();
}

namespace {

struct Failed {
  Error error;
};
using Outcome = std::variant<FilterDecision, Failed>;

Outcome decide_raw(const RawRecord& raw, const ReferenceBundle& bundle, const FilterConfig& cfg) {
  try {
    return decide(ingest_record(raw), bundle, cfg);
  } catch (const Error& e) {
    return Failed{e};
  }
}

}  // namespace

StreamStats run_stream(RecordSource& source, const ReferenceBundle& bundle, const FilterConfig& cfg,
                       const EngineOptions& options, std::ostream& decisions_out, std::ostream* accepted_out) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const unsigned workers = std::max(1u, options.workers);
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  // Reassembly window: workers x batch records are in flight at once.
  const std::size_t window = workers * batch;

  StreamStats stats;
  std::vector<RawRecord> raw;
  std::vector<Outcome> results;
  for (;;) {
    raw.clear();
    if (source.next_batch(window, raw) == 0) break;
    results.assign(raw.size(), Failed{Error(ErrorCode::InvalidArgument, "undecided")});

    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) results[i] = decide_raw(raw[i], bundle, cfg);
    };
    if (workers == 1 || raw.size() <= batch) {
      work(0, raw.size());
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t begin = 0; begin < raw.size(); begin += batch) {
        pool.emplace_back(work, begin, std::min(raw.size(), begin + batch));
      }
    }

    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (const auto* f = std::get_if<Failed>(&results[i])) {
        if (!options.skip_bad) throw f->error;
        ++stats.errors;
        decisions_out << error_to_json_line(raw[i].entry.id, f->error) << '\n';
        continue;
      }
      const FilterDecision& d = std::get<FilterDecision>(results[i]);
      stats.add(d);
      decisions_out << decision_to_json_line(d, cfg.modality) << '\n';
      if (accepted_out && d.accepted) *accepted_out << d.id << '\n';
    }
  }
  stats.rows_read = source.rows_read();
  stats.wall_time = std::chrono::steady_clock::now() - t0;
  return stats;
}

}  // namespace respec
