#include "respec/bundle_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

namespace respec {

namespace fs = std::filesystem;

namespace {

constexpr std::array<unsigned char, 4> kMagic = {0x52, 0x53, 0x50, 0x43};

template <typename T>
void put_le(unsigned char* dst, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
}

template <typename T>
T get_le(const unsigned char* src) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(src[i]) << (8 * i);
  return v;
}

void floats_to_le(std::span<const float> in, std::vector<unsigned char>& out) {
  out.resize(in.size() * 4);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), in.data(), out.size());
  } else {
    for (std::size_t i = 0; i < in.size(); ++i) put_le(out.data() + 4 * i, std::bit_cast<std::uint32_t>(in[i]));
  }
}

void le_to_floats(const unsigned char* src, std::size_t n, float* dst) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, n * 4);
  } else {
    for (std::size_t i = 0; i < n; ++i) dst[i] = std::bit_cast<float>(get_le<std::uint32_t>(src + 4 * i));
  }
}

MatrixHeader parse_header(const unsigned char* h, const fs::path& path) {
  if (!std::equal(kMagic.begin(), kMagic.end(), h)) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not an RSPC bundle");
  }
  MatrixHeader hdr;
  hdr.version = get_le<std::uint32_t>(h + 4);
  hdr.dim = get_le<std::uint32_t>(h + 8);
  hdr.rows = get_le<std::uint64_t>(h + 12);
  hdr.dtype = h[20];
  if (hdr.version != kBundleVersion) {
    throw Error(ErrorCode::VersionUnsupported,
                path.string() + " has version " + std::to_string(hdr.version));
  }
  if (hdr.dtype != kDtypeFloat32) {
    throw Error(ErrorCode::UnsupportedDtype, path.string() + " has dtype " + std::to_string(hdr.dtype));
  }
  return hdr;
}

std::ifstream open_in(const fs::path& path, ErrorCode missing = ErrorCode::IoError) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string());
  return in;
}

}  // namespace

RawMatrix to_raw(const EmbeddingMatrix& m) {
  RawMatrix r;
  r.rows = m.rows();
  r.dim = m.dim();
  r.values.assign(m.data().begin(), m.data().end());
  return r;
}

RawMatrix to_raw(const Embedding& e) {
  RawMatrix r;
  r.rows = 1;
  r.dim = e.dim();
  r.values.assign(e.values().begin(), e.values().end());
  return r;
}

EmbeddingMatrix ingest(const RawMatrix& m) {
  if (m.rows == 0) throw Error(ErrorCode::EmptyInput, "matrix has no rows");
  return EmbeddingMatrix::from_rows(std::span<const float>(m.values), m.dim);
}

void write_matrix(const fs::path& path, const RawMatrix& m) {
  if (m.values.size() != m.rows * m.dim) {
    throw Error(ErrorCode::CountMismatch, "matrix payload size does not equal rows x dim");
  }
  std::array<unsigned char, kBundleHeaderSize> h{};
  std::copy(kMagic.begin(), kMagic.end(), h.begin());
  put_le<std::uint32_t>(h.data() + 4, kBundleVersion);
  put_le<std::uint32_t>(h.data() + 8, static_cast<std::uint32_t>(m.dim));
  put_le<std::uint64_t>(h.data() + 12, static_cast<std::uint64_t>(m.rows));
  h[20] = kDtypeFloat32;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(h.data()), h.size());
  std::vector<unsigned char> payload;
  floats_to_le(m.values, payload);
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

RawMatrix read_matrix(const fs::path& path) {
  MatrixReader reader(path);
  RawMatrix m;
  m.dim = reader.dim();
  m.rows = reader.rows();
  m.values.reserve(m.rows * m.dim);
  reader.read_rows(m.rows, m.values);
  return m;
}

ManifestEntry parse_manifest_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::BadManifest, "line " + std::to_string(line_no) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw Error(ErrorCode::BadManifest, "line " + std::to_string(line_no) + ": missing string \"id\"");
  }
  ManifestEntry e;
  e.id = j["id"].get<std::string>();
  if (j.contains("text") && j["text"].is_string()) e.text = j["text"].get<std::string>();
  if (j.contains("meta")) e.meta = j["meta"];
  return e;
}

std::string format_manifest_line(const ManifestEntry& e) {
  nlohmann::json j;
  j["id"] = e.id;
  if (e.text) j["text"] = *e.text;
  if (e.meta) j["meta"] = *e.meta;
  return j.dump();
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (const ManifestEntry& e : manifest) out << format_manifest_line(e) << '\n';
}

Manifest read_manifest(const fs::path& path) {
  ManifestReader reader(path);
  Manifest m;
  while (auto e = reader.next()) m.push_back(std::move(*e));
  return m;
}

Bundle read_bundle(const fs::path& matrix_path, const fs::path& manifest_path) {
  Bundle b{read_matrix(matrix_path), read_manifest(manifest_path)};
  if (b.manifest.size() != b.matrix.rows) {
    throw Error(ErrorCode::CountMismatch, manifest_path.string() + " has " + std::to_string(b.manifest.size()) +
                                              " lines but " + matrix_path.string() + " has " +
                                              std::to_string(b.matrix.rows) + " rows");
  }
  return b;
}

void write_bundle(const RawMatrix& m, const Manifest& manifest, const fs::path& matrix_path,
                  const fs::path& manifest_path) {
  if (manifest.size() != m.rows) {
    throw Error(ErrorCode::CountMismatch, "manifest length does not equal matrix rows");
  }
  write_matrix(matrix_path, m);
  write_manifest(manifest_path, manifest);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
}

std::uint64_t file_checksum(const fs::path& path) {
  std::ifstream in = open_in(path, ErrorCode::MissingMatrixFile);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<unsigned char> buf(1 << 16);
  while (in) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    h = fnv1a64(std::span<const unsigned char>(buf.data(), got), h);
  }
  return h;
}

MatrixReader::MatrixReader(const fs::path& path) : path_(path), in_(open_in(path)) {
  std::array<unsigned char, kBundleHeaderSize> h{};
  in_.read(reinterpret_cast<char*>(h.data()), h.size());
  if (in_.gcount() < 4) throw Error(ErrorCode::TruncatedFile, path.string() + " shorter than magic");
  if (!std::equal(kMagic.begin(), kMagic.end(), h.begin())) {
    throw Error(ErrorCode::BadMagic, path.string() + " is not an RSPC bundle");
  }
  if (static_cast<std::size_t>(in_.gcount()) < h.size()) {
    throw Error(ErrorCode::TruncatedFile, path.string() + " has a truncated header");
  }
  header_ = parse_header(h.data(), path);

  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot stat " + path.string());
  const std::uint64_t expected = kBundleHeaderSize + header_.rows * header_.dim * 4ULL;
  if (size < expected) {
    throw Error(ErrorCode::TruncatedFile, path.string() + " has " + std::to_string(size) + " bytes, header implies " +
                                              std::to_string(expected));
  }
  if (size > expected) {
    throw Error(ErrorCode::CountMismatch, path.string() + " has trailing bytes beyond the declared rows");
  }
}

std::size_t MatrixReader::read_rows(std::size_t max_rows, std::vector<float>& out) {
  const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(max_rows, header_.rows - rows_read_));
  if (n == 0) return 0;
  std::vector<unsigned char> buf(n * header_.dim * 4);
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in_.gcount()) != buf.size()) {
    throw Error(ErrorCode::TruncatedFile, path_.string() + " ended early");
  }
  const std::size_t old = out.size();
  out.resize(old + n * header_.dim);
  le_to_floats(buf.data(), n * header_.dim, out.data() + old);
  rows_read_ += n;
  return n;
}

ManifestReader::ManifestReader(const fs::path& path) : path_(path), in_(path) {
  if (!in_) throw Error(ErrorCode::IoError, "cannot open " + path.string());
}

std::optional<ManifestEntry> ManifestReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.empty() || line == "\r") continue;
    return parse_manifest_line(line, line_no_);
  }
  return std::nullopt;
}

}  // namespace respec
