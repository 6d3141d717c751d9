/* Copyright 2026 The SoVTP Toolkit Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <sstream>

#include "sovtp/cli.hpp"
#include "sovtp/image.hpp"
#include "sovtp/metrics.hpp"
#include "sovtp/sidecar.hpp"
#include "synthetic.hpp"

namespace sovtp {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({"--version"}).code, kExitOk);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"report"}).code, kExitUsage);
  EXPECT_EQ(cli({"annotate", "--sidecar", "x", "--frames-dir", "y", "-o", "z", "--epsilon", "1.5"}).code, kExitUsage);
  EXPECT_EQ(cli({"annotate", "--sidecar", "x", "--frames-dir", "y", "-o", "z", "--overlap-check", "some"}).code,
            kExitUsage);
}

class CliFlow : public ::testing::Test {
 protected:
  void SetUp() override {
    video = testing::write_synthetic_video(dir.path());
    testing::write_file(dir / "stub.json", testing::stub_script("Happiness"));
  }
  TempDir dir;
  testing::SyntheticVideo video;
};

TEST_F(CliFlow, AnnotateThenChain) {
  const auto out = (dir / "annotated").string();
  const auto a = cli({"annotate", "--sidecar", video.sidecar.string(), "--frames-dir", video.frames_dir.string(),
                      "-o", out});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("frame 0: detected 3, kept 2"), std::string::npos) << a.out;
  EXPECT_NE(a.out.find("tracks: 2"), std::string::npos);
  EXPECT_NE(a.err.find("# epsilon = "), std::string::npos);

  const auto doc = nlohmann::json::parse(testing::read_file(fs::path(out) / "annotations.json"));
  EXPECT_EQ(doc["frames"].size(), 3u);
  EXPECT_EQ(doc["tracks"].size(), 2u);
  for (const auto& f : doc["frames"]) EXPECT_TRUE(fs::is_regular_file(fs::path(out) / f["image"].get<std::string>()));

  const auto transcript = (dir / "t.jsonl").string();
  const auto c = cli({"chain", "--annotated", out, "--target", "1", "--stub", (dir / "stub.json").string(),
                      "--transcript", transcript});
  ASSERT_EQ(c.code, kExitOk) << c.err;
  EXPECT_NE(c.out.find("label: Happiness"), std::string::npos) << c.out;
  std::istringstream lines(testing::read_file(transcript));
  int n = 0;
  for (std::string line; std::getline(lines, line);) ++n;
  EXPECT_EQ(n, 5);
}

TEST_F(CliFlow, ChainAbortExitsBackend) {
  const auto out = (dir / "annotated").string();
  ASSERT_EQ(cli({"annotate", "--sidecar", video.sidecar.string(), "--frames-dir", video.frames_dir.string(), "-o",
                 out})
                .code,
            kExitOk);
  testing::write_file(dir / "bad.json", R"({"1": {"fail": "transport"}})");
  const auto t = (dir / "t.jsonl").string();
  EXPECT_EQ(cli({"chain", "--annotated", out, "--target", "1", "--stub", (dir / "bad.json").string(),
                 "--transcript", t, "--backoff-base", "0.001", "--backoff-max", "0.001"})
                .code,
            kExitBackend);
  EXPECT_TRUE(fs::exists(t));
}

TEST_F(CliFlow, LayersOffAtSourceSizeReproducesFrames) {
  const auto out = dir / "plain";
  const auto r = cli({"annotate", "--sidecar", video.sidecar.string(), "--frames-dir", video.frames_dir.string(), "-o",
                      out.string(), "--frame-width", "0", "--frame-height", "0", "--no-boxes", "--no-numbers",
                      "--no-landmarks", "--no-au-tags"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = nlohmann::json::parse(testing::read_file(out / "annotations.json"));
  for (const auto& f : doc["frames"]) {
    const auto src = read_png((video.frames_dir / default_frame_name(f["frame_index"].get<int>())).string());
    EXPECT_EQ(read_png((out / f["image"].get<std::string>()).string()), src);
  }
}

TEST_F(CliFlow, EvalAndReport) {
  testing::write_file(dir / "manifest.jsonl",
                      testing::manifest_line("a", video.frames_dir, video.sidecar, 1, "Happiness", "Easy") + "\n" +
                          testing::manifest_line("b", video.frames_dir, video.sidecar, 2, "Sadness", "Hard") + "\n");
  const auto records = (dir / "records.jsonl").string();
  const auto e = cli({"eval", "--manifest", (dir / "manifest.jsonl").string(), "--records", records, "--stub",
                      (dir / "stub.json").string(), "--report", (dir / "report.json").string(), "-j", "2"});
  ASSERT_EQ(e.code, kExitOk) << e.err;
  EXPECT_NE(e.out.find("Acc (%)"), std::string::npos);

  const auto r = cli({"report", "--records", records, "--format", "markdown"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("| Acc (%) | 100.00 | — | 0.00 | 50.00 |"), std::string::npos) << r.out;
  EXPECT_EQ(cli({"report", "--records", records, "--format", "yaml"}).code, kExitUsage);

  const auto doc = nlohmann::json::parse(testing::read_file(dir / "report.json"));
  EXPECT_DOUBLE_EQ(doc["slices"]["Total"]["accuracy"].get<double>(), 50.0);
}

TEST_F(CliFlow, EvalErrors) {
  testing::write_file(dir / "empty.jsonl", "");
  EXPECT_EQ(cli({"eval", "--manifest", (dir / "empty.jsonl").string(), "--records", (dir / "r").string(), "--stub",
                 (dir / "stub.json").string()})
                .code,
            kExitData);
  testing::write_file(dir / "m.jsonl",
                      testing::manifest_line("a", video.frames_dir, dir / "nope.json", 1, "Happiness", "Easy"));
  EXPECT_EQ(cli({"eval", "--manifest", (dir / "m.jsonl").string(), "--records", (dir / "r").string(), "--stub",
                 (dir / "stub.json").string()})
                .code,
            kExitData);
  const auto lenient = cli({"eval", "--manifest", (dir / "m.jsonl").string(), "--records", (dir / "r").string(),
                            "--stub", (dir / "stub.json").string(), "--allow-missing"});
  EXPECT_EQ(lenient.code, kExitData);
  EXPECT_EQ(read_records((dir / "r").string()).size(), 1u);
  EXPECT_EQ(cli({"eval", "--manifest", (dir / "m.jsonl").string(), "--records", (dir / "r").string(), "--allow-missing"}).code,
            kExitUsage);
}

TEST_F(CliFlow, ValidateSidecar) {
  EXPECT_EQ(cli({"validate", "--sidecar", video.sidecar.string()}).code, kExitOk);
  testing::write_file(dir / "bad.json", R"({"format": "nope"})");
  const auto r = cli({"validate", "--sidecar", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_TRUE(nlohmann::json::parse(r.out).is_array());
  EXPECT_EQ(cli({"annotate", "--sidecar", (dir / "bad.json").string(), "--frames-dir", video.frames_dir.string(),
                 "-o", (dir / "x").string()})
                .code,
            kExitData);
}

}  // namespace
}  // namespace sovtp
