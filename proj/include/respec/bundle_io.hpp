#pragma once

// RSPC1 embedding-bundle format and its JSON-lines sidecar manifest.
//
//   bytes  0-3   magic "RSPC"
//   bytes  4-7   version, u32 LE (1)
//   bytes  8-11  dim z, u32 LE
//   bytes 12-19  row count N, u64 LE
//   byte  20     dtype (1 = binary32 LE)
//   bytes 21-23  zero padding
//   then N*z values, row-major.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "respec/core.hpp"

namespace respec {

inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::size_t kBundleHeaderSize = 24;

/// Matrix payload exactly as stored on disk; no normalization applied.
struct RawMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  friend bool operator==(const RawMatrix&, const RawMatrix&) = default;
};

RawMatrix to_raw(const EmbeddingMatrix& m);
RawMatrix to_raw(const Embedding& e);
/// Normalizes every stored row into an EmbeddingMatrix.
EmbeddingMatrix ingest(const RawMatrix& m);

struct ManifestEntry {
  std::string id;
  std::optional<std::string> text;
  std::optional<nlohmann::json> meta;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};
using Manifest = std::vector<ManifestEntry>;

struct Bundle {
  RawMatrix matrix;
  Manifest manifest;
};

void write_matrix(const std::filesystem::path& path, const RawMatrix& m);
RawMatrix read_matrix(const std::filesystem::path& path);

ManifestEntry parse_manifest_line(const std::string& line, std::size_t line_no);
std::string format_manifest_line(const ManifestEntry& e);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Reads matrix and manifest; throws CountMismatch when their lengths differ.
Bundle read_bundle(const std::filesystem::path& matrix_path, const std::filesystem::path& manifest_path);
void write_bundle(const RawMatrix& m, const Manifest& manifest, const std::filesystem::path& matrix_path,
                  const std::filesystem::path& manifest_path);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t file_checksum(const std::filesystem::path& path);

struct MatrixHeader {
  std::uint32_t version = kBundleVersion;
  std::uint32_t dim = 0;
  std::uint64_t rows = 0;
  std::uint8_t dtype = kDtypeFloat32;
};

/// Sequential row reader; each row is read from the file exactly once.
class MatrixReader {
 public:
  explicit MatrixReader(const std::filesystem::path& path);

  const MatrixHeader& header() const noexcept { return header_; }
  std::size_t dim() const noexcept { return header_.dim; }
  std::uint64_t rows() const noexcept { return header_.rows; }
  std::uint64_t rows_read() const noexcept { return rows_read_; }

  /// Appends up to max_rows rows to out; returns the number appended.
  std::size_t read_rows(std::size_t max_rows, std::vector<float>& out);

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  MatrixHeader header_;
  std::uint64_t rows_read_ = 0;
};

class ManifestReader {
 public:
  explicit ManifestReader(const std::filesystem::path& path);
  std::optional<ManifestEntry> next();
  std::size_t lines_read() const noexcept { return line_no_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

}  // namespace respec
