#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli() { return RICNN_CLI_PATH; }

int run(const std::string& args) {
  const std::string cmd = std::string(cli()) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ricnn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "tiny.json") << R"({
  "generate": {"classes": 3, "gaussians": 2, "train_per_class": 2, "test_per_class": 2,
               "params": {"image_size": 12}},
  "model": {"input_extent": 13, "classes": 3,
            "conv": [{"filters": 2, "kernel": 3, "downsample": 2}],
            "transition": {"filters": 3}, "hidden": [4]},
  "train": {"batch_size": 3, "max_steps": 4, "eval_every": 2}
})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string cfg() const { return "--config " + (dir_ / "tiny.json").string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenerateTrainEvaluateSmoke) {
  const auto data = dir_ / "data";
  ASSERT_EQ(run("generate " + cfg() + " --seed 1 --out " + data.string()), 0);
  EXPECT_TRUE(fs::exists(data / "train" / "manifest.json"));
  const auto run_dir = dir_ / "run";
  ASSERT_EQ(run("train " + cfg() + " --seed 1 --train " + (data / "train").string() + " --test " +
                (data / "test").string() + " --out " + run_dir.string()),
            0);
  const auto metrics = slurp(run_dir / "metrics.csv");
  EXPECT_EQ(metrics.rfind("step,loss,eval_acc\n", 0), 0u);
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 3);
  EXPECT_TRUE(fs::exists(run_dir / "best" / "manifest.json"));
  ASSERT_EQ(run("evaluate --checkpoint " + (run_dir / "best").string() + " --test " + (data / "test").string() +
                " --out " + (dir_ / "eval").string()),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "eval" / "per_class.csv"));
}

TEST_F(CliTest, SeededRunsAreByteIdentical) {
  const auto data = dir_ / "data";
  ASSERT_EQ(run("generate " + cfg() + " --seed 2 --out " + data.string()), 0);
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run("train " + cfg() + " --seed 2 --arch cnn --train " + (data / "train").string() + " --out " +
                  (dir_ / name).string()),
              0);
  }
  EXPECT_EQ(slurp(dir_ / "a" / "metrics.csv"), slurp(dir_ / "b" / "metrics.csv"));
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run("train " + cfg() + " --train " + (dir_ / "missing").string() + " --out " + (dir_ / "x").string()), 3);
  EXPECT_EQ(run("generate " + cfg() + " --train-per-class 0 --out " + (dir_ / "x").string()), 1);
  EXPECT_EQ(run("train --arch gcnn"), 1);
  EXPECT_EQ(run("--help"), 0);
  std::ofstream(dir_ / "bad.json") << R"({"trian": {}})";
  EXPECT_EQ(run("generate --config " + (dir_ / "bad.json").string() + " --out " + (dir_ / "x").string()), 1);
  EXPECT_EQ(run("generate --config " + (dir_ / "nope.json").string()), 3);
}

TEST_F(CliTest, VerifyPasses) {
  EXPECT_EQ(run("verify --instances 1 --seed 3"), 0);
  EXPECT_EQ(run("verify --instances 1 --seed 3 --perturb-origin"), 2);
}
