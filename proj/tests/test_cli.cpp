#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "simgen/cli.hpp"
#include "support.hpp"

using simgen::cli::dispatch;
using simgen::testing::read_file;
using simgen::testing::TempDir;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured run(const std::vector<std::string>& args) {
  ::testing::internal::CaptureStdout();
  ::testing::internal::CaptureStderr();
  const int code = dispatch(args);
  Captured r{code, ::testing::internal::GetCapturedStdout(), ::testing::internal::GetCapturedStderr()};
  return r;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, Version) {
  const Captured r = run({"version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "simgen 0.1.0\n");
}

TEST(Cli, UsageErrors) {
  Captured r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown subcommand"), std::string::npos);
  EXPECT_NE(r.err.find("make-toy"), std::string::npos);

  r = run({"train", "--classes", "4", "--out", "x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--data"), std::string::npos);

  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"eval"}).code, 1);
  EXPECT_EQ(run({"palette", "--classes", "three", "--out", "p.json"}).code, 1);
  EXPECT_EQ(run({"train", "--help"}).code, 0);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  TempDir dir("cli-rt");
  Captured r = run({"train", "--data", (dir / "none").string(), "--classes", "3", "--out", (dir / "run").string(),
               "--seed", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("images/"), std::string::npos);
  r = run({"palette", "--classes", "0", "--out", (dir / "p.json").string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, PaletteAndSchedule) {
  TempDir dir("cli-ps");
  ASSERT_EQ(run({"palette", "--classes", "5", "--out", (dir / "p.json").string()}).code, 0);
  const auto j = nlohmann::json::parse(read_file(dir / "p.json"));
  EXPECT_EQ(j.at("num_classes").get<int>(), 5);
  EXPECT_EQ(j.at("points").size(), 5u);
  ASSERT_EQ(run({"schedule", "--steps", "40", "--out", (dir / "s.csv").string()}).code, 0);
  EXPECT_EQ(lines(read_file(dir / "s.csv")), 41u);
}

TEST(Cli, ConfigTokens) {
  const auto t = simgen::cli::config_tokens("# comment\nsteps = 5\n\n lr=0.01 # trailing\nboxes = true\nquiet = false\n");
  EXPECT_EQ(t, (std::vector<std::string>{"--steps", "5", "--lr", "0.01", "--boxes"}));
  EXPECT_ANY_THROW(simgen::cli::config_tokens("no equals sign\n"));
}

TEST(Cli, PipelineIsReproducibleAndConfigurable) {
  TempDir dir("cli-pipe");
  const std::string toy = (dir / "toy").string();
  Captured r = run({"make-toy", "--out", toy, "--count", "24", "--size", "16", "--classes", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("no --seed given, using seed"), std::string::npos);
  ASSERT_EQ(run({"make-toy", "--out", toy, "--count", "24", "--size", "16", "--classes", "3", "--seed", "4",
                 "--split", "0.75,0.125,0.125"})
                .code,
            0);

  std::ofstream(dir / "train.cfg") << "data = " << toy << "\nclasses = 3\nsteps = 2\nbatch = 4\nlr = 0.001\n"
                                   << "base = 8\nseed = 6\nlog-every = 1\n";
  for (const char* name : {"a", "b"}) {
    r = run({"train", "--config", (dir / "train.cfg").string(), "--steps", "3", "--out", (dir / name).string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(lines(read_file(dir / "a/loss.csv")), 4u);
  EXPECT_EQ(read_file(dir / "a/loss.csv"), read_file(dir / "b/loss.csv"));
  const auto cfg = nlohmann::json::parse(read_file(dir / "a/config.json"));
  EXPECT_EQ(cfg.at("steps"), "3");
  EXPECT_EQ(cfg.at("seed"), "6");
  EXPECT_EQ(cfg.at("train_size").get<int>(), 18);

  // The captured config reproduces the run.
  r = run({"train", "--config", (dir / "a/run.cfg").string(), "--out", (dir / "c").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir / "a/loss.csv"), read_file(dir / "c/loss.csv"));

  for (const char* name : {"ga", "gb"}) {
    r = run({"sample", "--ckpt", (dir / "a/ckpt_3.bin").string(), "--count", "3", "--size", "16", "--seed", "2",
             "--out", (dir / name).string(), "--boxes", "--min-area", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(read_file(dir / "ga/boxes.json"), read_file(dir / "gb/boxes.json"));
  ASSERT_EQ(run({"boxes", "--masks", (dir / "ga").string(), "--out", (dir / "boxes.json").string(), "--min-area", "1"})
                .code,
            0);
  EXPECT_EQ(read_file(dir / "boxes.json"), read_file(dir / "ga/boxes.json"));

  r = run({"eval", "fid", "--real", toy, "--gen", toy, "--save-real-features", (dir / "real.sgft").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(nlohmann::json::parse(r.out).at("fid").get<double>(), 0.0, 1e-6);
  r = run({"eval", "kid", "--real", (dir / "real.sgft").string(), "--gen", toy, "--block", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(nlohmann::json::parse(r.out).contains("kid"));
  r = run({"eval", "sid", "--real", toy, "--gen", toy, "--crop", "16", "--min-pixels", "4", "--report",
           (dir / "sid.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(read_file(dir / "sid.json")), nlohmann::json::parse(r.out));

  r = run({"eval", "fid", "--real", toy, "--gen", (dir / "real.sgft").string(), "--dim", "32"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ResumeContinuesRun) {
  TempDir dir("cli-resume");
  const std::string toy = (dir / "toy").string();
  ASSERT_EQ(run({"make-toy", "--out", toy, "--count", "8", "--size", "16", "--classes", "3", "--seed", "1"}).code, 0);
  const std::vector<std::string> common{"train", "--data", toy, "--classes", "3", "--batch", "2", "--base", "8",
                                        "--lr", "0.001", "--seed", "3", "--checkpoint-every", "2"};
  auto args = common;
  args.insert(args.end(), {"--steps", "4", "--out", (dir / "full").string()});
  ASSERT_EQ(run(args).code, 0);
  args = common;
  args.insert(args.end(), {"--steps", "2", "--out", (dir / "part").string()});
  ASSERT_EQ(run(args).code, 0);
  args = common;
  args.insert(args.end(), {"--steps", "4", "--out", (dir / "part").string(), "--resume",
                           (dir / "part/ckpt_2.bin").string()});
  const Captured r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(dir / "full/loss.csv"), read_file(dir / "part/loss.csv"));
  EXPECT_EQ(read_file(dir / "full/ckpt_4.bin"), read_file(dir / "part/ckpt_4.bin"));
}
