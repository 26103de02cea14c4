#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "naive_reference.hpp"
#include "respec/reference.hpp"

using namespace respec;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

Embedding basis(std::size_t dim, std::size_t i) {
  std::vector<double> v(dim, 0.0);
  v[i] = 1.0;
  return normalize(std::span<const double>(v));
}

ReferenceBundle two_task_bundle(std::uint64_t seed, bool with_video) {
  std::mt19937_64 rng(seed);
  const std::size_t dim = 24;
  std::vector<TaskInput> tasks;
  for (int i = 0; i < 2; ++i) {
    const Embedding mu = testing::random_unit(rng, dim);
    TaskInput t{"task-" + std::to_string(i), to_raw(sample_vmf(mu, 80.0, 300, seed + i)), std::nullopt};
    if (with_video) t.video = to_raw(sample_vmf(mu, 50.0, 200, seed + 10 + i));
    tasks.push_back(std::move(t));
  }
  return build_reference_bundle(tasks, to_raw(testing::random_unit(rng, dim)), BuildConfig{}, 2);
}

}  // namespace

TEST_CASE("antipodal-only references have no concentration") {
  const RawMatrix text = to_raw(EmbeddingMatrix::from_rows(std::vector<double>{1, 0, 0, -1, 0, 0}, 3));
  const RawMatrix root = to_raw(basis(3, 1));
  CHECK(code_of([&] { build_task_reference("x", text, nullptr, root, BuildConfig{}); }) == ErrorCode::KappaZero);
}

TEST_CASE("build rejects bad inputs") {
  std::mt19937_64 rng(1);
  const RawMatrix text = to_raw(sample_vmf(testing::random_unit(rng, 4), 10.0, 50, 1));
  const RawMatrix root3 = to_raw(basis(3, 0));
  CHECK(code_of([&] { build_task_reference("x", text, nullptr, root3, BuildConfig{}); }) ==
        ErrorCode::DimensionMismatch);
  const RawMatrix root = to_raw(basis(4, 0));
  BuildConfig bad;
  bad.alpha = 0.0;
  CHECK(code_of([&] { build_task_reference("x", text, nullptr, root, bad); }) == ErrorCode::POutOfRange);
  std::vector<TaskInput> dup{{"a", text, std::nullopt}, {"a", text, std::nullopt}};
  CHECK(code_of([&] { build_reference_bundle(dup, root, BuildConfig{}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_reference_bundle({}, root, BuildConfig{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("stored thresholds are the recomputed quantiles") {
  std::mt19937_64 rng(2);
  const std::size_t dim = 32;
  const Embedding mu = testing::random_unit(rng, dim);
  const RawMatrix text = to_raw(sample_vmf(mu, 120.0, 5000, 3));
  const Embedding root = basis(dim, 0);
  const TaskReference t = build_task_reference("t", text, nullptr, to_raw(root), BuildConfig{});

  // Independent type-7 quantile over naive distances.
  std::vector<double> d;
  for (std::size_t i = 0; i < t.text.refs.rows(); ++i) d.push_back(naive::distance(t.text.refs.row(i), t.root.values()));
  std::sort(d.begin(), d.end());
  const double h = 0.1 * static_cast<double>(d.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double want = d[lo] + (h - static_cast<double>(lo)) * (d[lo + 1] - d[lo]);
  CHECK(std::abs(t.specificity_threshold - want) <= 1e-12);

  std::vector<double> self;
  for (std::size_t i = 0; i < t.text.refs.rows(); ++i) self.push_back(naive::kde(t.text.refs.row(i), t.text.refs, t.text.kappa, static_cast<long>(i)));
  std::sort(self.begin(), self.end());
  const double hs = 0.05 * static_cast<double>(self.size() - 1);
  const auto ls = static_cast<std::size_t>(std::floor(hs));
  const double want_rel = self[ls] + (hs - static_cast<double>(ls)) * (self[ls + 1] - self[ls]);
  CHECK(std::abs(t.text.threshold.log_threshold - want_rel) <= 1e-9 * std::abs(want_rel));

  CHECK(t.text.kappa == estimate_kappa(t.text.refs));
  CHECK(t.q == 0.1);
  CHECK_FALSE(t.video);
}

TEST_CASE("specificity threshold is monotone in q") {
  std::mt19937_64 rng(4);
  const EmbeddingMatrix refs = sample_vmf(testing::random_unit(rng, 16), 40.0, 400, 5);
  const Embedding root = testing::random_unit(rng, 16);
  double prev = -1.0;
  for (double q : {0.01, 0.1, 0.3, 0.5, 0.9}) {
    const double s = specificity_threshold(refs, root, q);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("bundle save and load round trip") {
  for (bool with_video : {false, true}) {
    const ReferenceBundle b = two_task_bundle(7, with_video);
    testing::TempDir dir("bundle");
    save_bundle(b, dir.path());
    const ReferenceBundle back = load_bundle(dir.path());
    CHECK(back == b);
    for (const ThresholdDrift& d : verify_thresholds(back, 3)) {
      CHECK(d.relevance_text == 0.0);
      CHECK(d.specificity == 0.0);
      if (with_video) CHECK(d.relevance_video == 0.0);
    }
  }
}

TEST_CASE("identical inputs serialize to identical bytes") {
  testing::TempDir a("ba"), b("bb");
  save_bundle(two_task_bundle(8, true), a.path());
  save_bundle(two_task_bundle(8, true), b.path());
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    const auto name = entry.path().filename().string();
    CHECK_MESSAGE(testing::slurp(entry.path()) == testing::slurp(b / name), name);
  }
}

TEST_CASE("damaged bundles are refused") {
  const ReferenceBundle b = two_task_bundle(9, false);

  SUBCASE("missing matrix") {
    testing::TempDir dir("miss");
    save_bundle(b, dir.path());
    std::filesystem::remove(dir / "task1_text.rspc");
    CHECK(code_of([&] { load_bundle(dir.path()); }) == ErrorCode::MissingMatrixFile);
  }
  SUBCASE("truncated matrix") {
    testing::TempDir dir("trunc");
    save_bundle(b, dir.path());
    const auto p = dir / "task0_text.rspc";
    std::filesystem::resize_file(p, std::filesystem::file_size(p) - 4);
    const ErrorCode c = code_of([&] { load_bundle(dir.path()); });
    CHECK((c == ErrorCode::ChecksumMismatch || c == ErrorCode::TruncatedFile));
  }
  SUBCASE("flipped payload byte") {
    testing::TempDir dir("flip");
    save_bundle(b, dir.path());
    const auto p = dir / "root.rspc";
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(30);
    f.put('\x7f');
    f.close();
    CHECK(code_of([&] { load_bundle(dir.path()); }) == ErrorCode::ChecksumMismatch);
  }
  SUBCASE("unknown version") {
    testing::TempDir dir("ver");
    save_bundle(b, dir.path());
    auto j = nlohmann::json::parse(testing::slurp(dir / "bundle.json"));
    j["version"] = 99;
    std::ofstream(dir / "bundle.json") << j.dump(2);
    CHECK(code_of([&] { load_bundle(dir.path()); }) == ErrorCode::VersionUnsupported);
  }
  SUBCASE("malformed header") {
    testing::TempDir dir("bad");
    save_bundle(b, dir.path());
    std::ofstream(dir / "bundle.json") << "{\"version\": 1";
    CHECK(code_of([&] { load_bundle(dir.path()); }) == ErrorCode::BadManifest);
  }
  SUBCASE("no header") {
    testing::TempDir dir("none");
    CHECK(code_of([&] { load_bundle(dir.path()); }) == ErrorCode::IoError);
  }
}

TEST_CASE("verify reports drift of edited thresholds") {
  ReferenceBundle b = two_task_bundle(10, false);
  b.tasks[1].specificity_threshold += 0.25;
  const auto drift = verify_thresholds(b);
  REQUIRE(drift.size() == 2);
  CHECK(drift[0].specificity == 0.0);
  CHECK(drift[1].specificity == doctest::Approx(0.25));
}

TEST_CASE("single vMF density model keeps its own threshold") {
  std::mt19937_64 rng(11);
  const RawMatrix text = to_raw(sample_vmf(testing::random_unit(rng, 16), 60.0, 800, 12));
  BuildConfig cfg;
  cfg.density = DensityModel::SingleVmf;
  const TaskReference t = build_task_reference("s", text, nullptr, to_raw(basis(16, 3)), cfg);
  CHECK(t.density == DensityModel::SingleVmf);
  const VmfParams p{t.text.mean, t.text.kappa};
  CHECK(t.text.threshold.log_threshold == single_vmf_threshold(t.text.refs, p, 0.05).log_threshold);

  testing::TempDir dir("svmf");
  ReferenceBundle b = build_reference_bundle({{"s", text, std::nullopt}}, to_raw(basis(16, 3)), cfg);
  save_bundle(b, dir.path());
  CHECK(load_bundle(dir.path()) == b);
}

TEST_CASE("modality and density names") {
  for (Modality m : {Modality::Text, Modality::Video, Modality::Union, Modality::Intersection})
    CHECK(parse_modality(to_string(m)) == m);
  for (DensityModel d : {DensityModel::Kde, DensityModel::SingleVmf}) CHECK(parse_density_model(to_string(d)) == d);
  CHECK_THROWS_AS(parse_modality("audio"), Error);
}
