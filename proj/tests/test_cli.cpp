#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "respec/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result respec_run(std::vector<std::string> args) {
  args.insert(args.begin(), "respec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = respec::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& x) { return x.string(); }

// synth -> build-ref -> filter -> analyze under dir.
void pipeline(const fs::path& dir, unsigned workers) {
  const fs::path data = dir / "data", bundle = dir / "bundle", run = dir / "run", rep = dir / "report";
  REQUIRE(respec_run({"synth", "--seed", "42", "--stream-size", "3000", "--task-size", "400", "--out", p(data)}).code == 0);
  const Result b = respec_run({"build-ref", "--task", "task0", "--text", p(data / "task0_text.rspc"), "--video",
                               p(data / "task0_video.rspc"), "--task", "task1", "--text", p(data / "task1_text.rspc"),
                               "--video", p(data / "task1_video.rspc"), "--root", p(data / "root.rspc"), "--workers",
                               std::to_string(workers), "--out", p(bundle)});
  REQUIRE_MESSAGE(b.code == 0, b.err);
  const Result f = respec_run({"filter", "--bundle", p(bundle), "--video", p(data / "stream_video.rspc"), "--text",
                               p(data / "stream_text.rspc"), "--manifest", p(data / "stream.jsonl"), "--tau", "0.28",
                               "--workers", std::to_string(workers), "--out", p(run)});
  REQUIRE_MESSAGE(f.code == 0, f.err);
  const Result a = respec_run({"analyze", "--log", p(run / "decisions.jsonl"), "--video", p(data / "stream_video.rspc"),
                               "--text", p(data / "stream_text.rspc"), "--manifest", p(data / "stream.jsonl"),
                               "--ref-video", p(data / "task0_video.rspc"), "--ref-text", p(data / "task0_text.rspc"),
                               "--ref-manifest", p(data / "task0.jsonl"), "--ref-video", p(data / "task1_video.rspc"),
                               "--ref-text", p(data / "task1_text.rspc"), "--ref-manifest", p(data / "task1.jsonl"),
                               "--out", p(rep)});
  REQUIRE_MESSAGE(a.code == 0, a.err);
}

std::vector<fs::path> outputs(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  testing::TempDir dir("cli-usage");
  CHECK(respec_run({}).code == respec::cli::kExitUsage);
  CHECK(respec_run({"nonsense"}).code == respec::cli::kExitUsage);
  const Result r = respec_run({"filter", "--tau", "0.28", "--out", p(dir.path())});
  CHECK(r.code == respec::cli::kExitUsage);
  CHECK(r.err.find("--bundle") != std::string::npos);
  CHECK(respec_run({"synth", "--out", p(dir / "x")}).code == respec::cli::kExitUsage);
}

TEST_CASE("help exits 0") {
  for (const char* sub : {"build-ref", "filter", "synth", "analyze"}) {
    const Result r = respec_run({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--") != std::string::npos);
  }
  const Result top = respec_run({"--help"});
  CHECK(top.code == 0);
  CHECK(top.out.find("build-ref") != std::string::npos);
}

TEST_CASE("pipeline is reproducible from one seed and across worker counts") {
  testing::TempDir a("cli-a"), b("cli-b"), c("cli-c");
  pipeline(a.path(), 1);
  pipeline(b.path(), 1);
  pipeline(c.path(), 4);
  const auto files = outputs(a.path());
  CHECK(files == outputs(b.path()));
  CHECK(files == outputs(c.path()));
  for (const fs::path& f : files) {
    CHECK_MESSAGE(testing::slurp(a.path() / f) == testing::slurp(b.path() / f), f.string());
    CHECK_MESSAGE(testing::slurp(a.path() / f) == testing::slurp(c.path() / f), f.string());
  }
  const auto report = nlohmann::json::parse(testing::slurp(a.path() / "report" / "report.json"));
  CHECK(report.at("records") == 3000);
  CHECK(report.contains("frechet_filtered"));
  CHECK(report.at("ngram_kl_unfiltered").get<double>() >= 0.0);
  CHECK(report.at("analysis_config").at("buckets") == 10000);
  const auto stats = nlohmann::json::parse(testing::slurp(a.path() / "run" / "stats.json"));
  CHECK(stats.at("records_in") == 3000);
  CHECK(stats.at("rows_read") == 3000);
  CHECK_FALSE(stats.contains("wall_time"));
}

TEST_CASE("filter failures map to exit codes") {
  testing::TempDir dir("cli-codes");
  const fs::path data = dir / "data", bundle = dir / "bundle";
  REQUIRE(respec_run({"synth", "--seed", "1", "--stream-size", "50", "--task-size", "100", "--tasks", "1", "--out", p(data)})
              .code == 0);
  REQUIRE(respec_run({"build-ref", "--task", "task0", "--text", p(data / "task0_text.rspc"), "--root",
                      p(data / "root.rspc"), "--out", p(bundle)})
              .code == 0);
  const std::vector<std::string> base{"filter", "--bundle", p(bundle), "--video", p(data / "stream_video.rspc"), "--text",
                                      p(data / "stream_text.rspc"), "--manifest", p(data / "stream.jsonl"), "--tau", "0.28",
                                      "--out", p(dir / "run")};
  auto with = [&](std::vector<std::string> extra) {
    auto args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return respec_run(args);
  };
  CHECK(with({}).code == 0);

  const Result color = with({"--baseline", "color_samplewise"});
  CHECK(color.code == respec::cli::kExitData);
  CHECK(color.err.find("MissingAltEmbeddings") != std::string::npos);
  CHECK(with({"--baseline", "color_samplewise", "--alt-video", p(data / "stream_alt_video.rspc"), "--alt-text",
              p(data / "stream_alt_text.rspc")})
            .code == 0);

  // text-only bundle cannot serve the video modality
  const Result video = with({"--modality", "video"});
  CHECK(video.code == respec::cli::kExitData);
  CHECK(video.err.find("MissingModalityReferences") != std::string::npos);

  CHECK(with({"--tau", "1.5"}).code == respec::cli::kExitUsage);

  const Result verify = with({"--verify-bundle"});
  CHECK(verify.code == 0);
  CHECK(verify.out.find("drift task0: relevance_text 0") != std::string::npos);

  std::ofstream(bundle / "bundle.json", std::ios::app) << "garbage";
  CHECK(with({}).code == respec::cli::kExitData);
}

TEST_CASE("numeric build failures exit 3") {
  testing::TempDir dir("cli-numeric");
  respec::write_matrix(dir / "t.rspc", respec::RawMatrix{2, 3, {1, 0, 0, -1, 0, 0}});
  respec::write_matrix(dir / "r.rspc", respec::RawMatrix{1, 3, {0, 1, 0}});
  const Result r = respec_run({"build-ref", "--task", "x", "--text", p(dir / "t.rspc"), "--root", p(dir / "r.rspc"),
                               "--out", p(dir / "b")});
  CHECK(r.code == respec::cli::kExitNumeric);
  CHECK(r.err.find("KappaZero") != std::string::npos);
}

TEST_CASE("flag, config file and environment precedence") {
  testing::TempDir dir("cli-prec");
  const fs::path data = dir / "data", bundle = dir / "bundle";
  REQUIRE(respec_run({"synth", "--seed", "2", "--stream-size", "20", "--task-size", "50", "--tasks", "1", "--out", p(data)})
              .code == 0);
  REQUIRE(respec_run({"build-ref", "--task", "task0", "--text", p(data / "task0_text.rspc"), "--root",
                      p(data / "root.rspc"), "--out", p(bundle)})
              .code == 0);
  nlohmann::json cfg{{"bundle", p(bundle)},
                     {"video", p(data / "stream_video.rspc")},
                     {"text", p(data / "stream_text.rspc")},
                     {"manifest", p(data / "stream.jsonl")},
                     {"tau", 0.2},
                     {"out", p(dir / "run")}};
  std::ofstream(dir / "ok.json") << cfg.dump();
  cfg["workers"] = 0;
  std::ofstream(dir / "zero.json") << cfg.dump();

  // workers = 0 is rejected, which makes the winning source observable.
  ::setenv("RESPEC_WORKERS", "0", 1);
  CHECK(respec_run({"filter", "--config", p(dir / "ok.json")}).code == respec::cli::kExitUsage);
  CHECK(respec_run({"filter", "--config", p(dir / "ok.json"), "--workers", "2"}).code == 0);
  ::setenv("RESPEC_WORKERS", "3", 1);
  CHECK(respec_run({"filter", "--config", p(dir / "ok.json")}).code == 0);
  CHECK(respec_run({"filter", "--config", p(dir / "zero.json")}).code == respec::cli::kExitUsage);
  CHECK(respec_run({"filter", "--config", p(dir / "zero.json"), "--workers", "1"}).code == 0);
  ::unsetenv("RESPEC_WORKERS");

  const auto stats = nlohmann::json::parse(testing::slurp(dir / "run" / "stats.json"));
  CHECK(stats.at("config").at("tau") == 0.2);
  // a flag beats the config value
  CHECK(respec_run({"filter", "--config", p(dir / "ok.json"), "--tau", "0.3"}).code == 0);
  CHECK(nlohmann::json::parse(testing::slurp(dir / "run" / "stats.json")).at("config").at("tau") == 0.3);
}

TEST_CASE("build-ref task groups from a config file") {
  testing::TempDir dir("cli-cfg");
  const fs::path data = dir / "data";
  REQUIRE(respec_run({"synth", "--seed", "3", "--stream-size", "10", "--task-size", "60", "--out", p(data)}).code == 0);
  const nlohmann::json cfg{{"task", {"task0", "task1"}},
                           {"text", {p(data / "task0_text.rspc"), p(data / "task1_text.rspc")}},
                           {"root", p(data / "root.rspc")},
                           {"q", 0.25},
                           {"loo", false},
                           {"out", p(dir / "from-config")}};
  std::ofstream(dir / "b.json") << cfg.dump();
  REQUIRE(respec_run({"build-ref", "--config", p(dir / "b.json")}).code == 0);
  REQUIRE(respec_run({"build-ref", "--task", "task0", "--text", p(data / "task0_text.rspc"), "--task", "task1", "--text",
                      p(data / "task1_text.rspc"), "--root", p(data / "root.rspc"), "--q", "0.25", "--no-loo", "--out",
                      p(dir / "from-flags")})
              .code == 0);
  CHECK(testing::slurp(dir / "from-config" / "bundle.json") == testing::slurp(dir / "from-flags" / "bundle.json"));
  const auto b = nlohmann::json::parse(testing::slurp(dir / "from-config" / "bundle.json"));
  CHECK(b.at("build_config").at("q") == 0.25);
  CHECK(b.at("build_config").at("loo") == false);
  CHECK(respec_run({"build-ref", "--config", p(dir / "missing.json")}).code == respec::cli::kExitUsage);
}
