// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dmgsl/cli.hpp"

namespace dmgsl::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() / "dmgsl_cli_test";
  void SetUp() override {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::vector<std::string> synth_args(const fs::path& out) {
    return {"synth", "--seed", "4", "--nodes", "12", "--classes", "3", "--snapshots", "3",
            "--dim", "8", "--edges", "16", "--out", out.string()};
  }
};

TEST_F(CliTest, CoherenceTime) {
  const Result r = invoke({"tc", "--freq-hz", "3.55e9", "--speed-mps", "2.7778"});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("5.44"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("e-03 s"), std::string::npos) << r.out;
}

TEST_F(CliTest, MissingDataFlagIsNamed) {
  const Result r = invoke({"train", "--out", (dir / "run").string()});
  EXPECT_EQ(r.code, kDataError);
  EXPECT_NE(r.err.find("--data"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(invoke({"train", "--bogus", "1"}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({}).code, kUsage);
}

TEST_F(CliTest, HelpForEveryCommand) {
  for (const char* cmd : {"synth", "ingest", "train", "eval", "ablate", "heatmap", "tc"}) {
    const Result r = invoke({cmd, "--help"});
    EXPECT_EQ(r.code, kOk) << cmd;
    EXPECT_NE((r.out + r.err).find("--"), std::string::npos) << cmd;
  }
  const Result synth = invoke({"synth", "--help"});
  EXPECT_NE(synth.out.find("82"), std::string::npos) << "defaults are shown";
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST_F(CliTest, SynthIsByteIdentical) {
  ASSERT_EQ(invoke(synth_args(dir / "a")).code, kOk);
  ASSERT_EQ(invoke(synth_args(dir / "b")).code, kOk);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const fs::path twin = dir / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(twin)) << twin;
    EXPECT_EQ(slurp(entry.path()), slurp(twin)) << entry.path().filename();
    ++files;
  }
  EXPECT_GE(files, 4u);
}

TEST_F(CliTest, TrainEvalHeatmapFlow) {
  ASSERT_EQ(invoke(synth_args(dir / "data")).code, kOk);
  std::ofstream(dir / "small.cfg") << "hat_hidden = 6\nhead_dim = 4\nheads = 2\nencoder_hidden = 8\n"
                                      "embed_dim = 6\nprojector_hidden = 5\nprojection_dim = 4\nseed = 3\n";
  const fs::path run_dir = dir / "run";
  const Result train = invoke({"train", "--data", (dir / "data").string(), "--config", (dir / "small.cfg").string(),
                               "--out", run_dir.string(), "--epochs", "3", "--log-every", "0"});
  ASSERT_EQ(train.code, kOk) << train.err;
  for (const char* f : {"checkpoint.bin", "learned_adjacency.csv", "embeddings.csv", "loss.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(run_dir / f)) << f;
  }
  EXPECT_NE(slurp(run_dir / "manifest.json").find("config_hash"), std::string::npos);

  const Result eval = invoke({"eval", "--run", run_dir.string(), "--seeds", "2", "--probe-epochs", "20"});
  ASSERT_EQ(eval.code, kOk) << eval.err;
  EXPECT_TRUE(fs::exists(run_dir / "metrics.json"));
  EXPECT_TRUE(fs::exists(run_dir / "metrics.txt"));

  const Result heat = invoke({"heatmap", "--adjacency", (run_dir / "learned_adjacency.csv").string(), "--out",
                              (dir / "heat.pgm").string()});
  ASSERT_EQ(heat.code, kOk) << heat.err;
  EXPECT_TRUE(fs::exists(dir / "heat.pgm"));
  EXPECT_TRUE(fs::exists(dir / "heat.csv"));
}

TEST_F(CliTest, MissingDatasetIsDataError) {
  const Result r = invoke({"train", "--data", (dir / "nope").string(), "--out", (dir / "run").string()});
  EXPECT_EQ(r.code, kDataError);
}

}  // namespace
}  // namespace dmgsl::cli
