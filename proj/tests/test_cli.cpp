#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "srwd/training.hpp"

using namespace srwd;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string output;
};

CliResult cli(const std::string& args) {
  const std::string cmd = std::string("'") + SRWD_CLI_PATH + "' " + args + " 2>&1";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.output.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("srwd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& rel) const { return "'" + (dir_ / rel).string() + "'"; }
  fs::path dir_;
  const fs::path fixtures_ = SRWD_FIXTURE_DIR;
};

}  // namespace

TEST_F(Cli, ErrorsAreOneLineWithDistinctCodes) {
  auto missing = cli("train --manifest " + at("nope.jsonl") + " --out " + at("c.bin"));
  auto bad_flag = cli("restore --lr x.png --ckpt y --out z --sigma lots");
  EXPECT_NE(missing.status, 0);
  EXPECT_NE(bad_flag.status, 0);
  EXPECT_NE(missing.status, bad_flag.status);
  EXPECT_EQ(missing.output.rfind("error: code=IoError message=", 0), 0u) << missing.output;
  EXPECT_EQ(bad_flag.output.rfind("error: code=BadFlag message=", 0), 0u) << bad_flag.output;
  EXPECT_EQ(std::count(missing.output.begin(), missing.output.end(), '\n'), 1);
}

TEST_F(Cli, KernelGenSizesAndDeterminism) {
  ASSERT_EQ(cli("kernel-gen --out " + at("a") + " --count 4 --sizes 15..15 --seed 2").status, 0);
  ASSERT_EQ(cli("kernel-gen --out " + at("b") + " --count 4 --sizes 15..15 --seed 2").status, 0);
  for (int i = 0; i < 4; ++i) {
    const std::string name = "kernel_0" + std::to_string(i) + ".txt";
    auto k = load_kernel(dir_ / "a" / name);
    EXPECT_EQ(k.side(), 15u);
    EXPECT_EQ(slurp(dir_ / "a" / name), slurp(dir_ / "b" / name));
  }
  EXPECT_TRUE(fs::exists(dir_ / "a" / "kernel_00.png"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "run.json"));
  EXPECT_NE(cli("kernel-gen --out " + at("c") + " --sizes 12").status, 0);
}

TEST_F(Cli, DegradeAllPairsAndPureBicubic) {
  ASSERT_EQ(cli("degrade --hr '" + (fixtures_ / "hr_heldout").string() + "' --out " + at("d") +
                " --kernels '" + (fixtures_ / "kernels").string() + "' --crop 64 --sigma 1%")
                .status,
            0);
  EXPECT_EQ(load_manifest(dir_ / "d" / "manifest.jsonl").usable().size(), 8u * 3u);

  ASSERT_EQ(cli("degrade --hr '" + (fixtures_ / "hr_heldout").string() + "' --out " + at("e") +
                " --kernel-count 1 --sizes 11..11 --crop 64 --sigma 0 --variant eq1")
                .status,
            0);
  auto m = load_manifest(dir_ / "e" / "manifest.jsonl");
  for (auto* r : m.usable()) {
    EXPECT_EQ(r->sigma, 0.0);
    auto hr = read_png(m.resolve(r->hr_path)).pixels;
    auto lr = read_png(m.resolve(r->lr_path)).pixels;
    auto want = bicubic_resize(hr, 2, ResizeDirection::Down);
    double worst = 0.0;
    for (std::size_t i = 0; i < lr.size(); ++i)
      worst = std::max(worst, std::abs(lr.data()[i] - std::clamp(want.data()[i], 0.0, 1.0)));
    EXPECT_LE(worst, 0.5 / 65535.0 + 1e-12) << r->id;
  }
}

TEST_F(Cli, ZeroEpochsGivesInitialization) {
  const std::string manifest = "'" + (fixtures_ / "train_x2" / "manifest.jsonl").string() + "'";
  ASSERT_EQ(cli("train --manifest " + manifest + " --scale 2 --toy --epochs 0 --seed 6 --out " + at("c.bin")).status, 0);
  auto ck = load_checkpoint(dir_ / "c.bin");
  auto init = model_init(ck.model.config, 6);
  auto a = ck.model.params(), b = init.params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].values.size(); ++j) ASSERT_EQ(a[i].values[j], b[i].values[j]) << a[i].name;
  EXPECT_TRUE(fs::exists(dir_ / "c.bin.run.json"));
}

TEST_F(Cli, RestoreShapesDeltaKernelAndScaleCheck) {
  ModelCheckpoint ck;
  ck.model = model_init(ModelConfig::toy(2, 3), 1);
  save_checkpoint(ck, dir_ / "x2.ckpt");
  ImageTensor lr(3, 64, 64);
  for (std::size_t i = 0; i < lr.size(); ++i) lr.data()[i] = 0.5 + 0.3 * std::sin(0.01 * double(i));
  write_png(dir_ / "lr.png", lr, 8);

  auto r = cli("restore --lr " + at("lr.png") + " --delta --sigma 0 --scale 2 --ckpt " + at("x2.ckpt") + " --out " +
               at("hr.png"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find(" s\n"), std::string::npos);
  auto hr = read_png(dir_ / "hr.png").pixels;
  EXPECT_EQ(hr.height(), 128u);
  EXPECT_EQ(hr.width(), 128u);

  auto wrong = cli("restore --lr " + at("lr.png") + " --delta --scale 3 --ckpt " + at("x2.ckpt") + " --out " +
                   at("hr3.png"));
  EXPECT_EQ(wrong.output.rfind("error: code=ScaleMismatch", 0), 0u) << wrong.output;

  auto big = cli("restore --lr " + at("lr.png") + " --kernel '" + (fixtures_ / "kernels" / "kernel_01.txt").string() +
                 "' --scale 2 --ckpt " + at("x2.ckpt") + " --out " + at("ok.png"));
  EXPECT_EQ(big.status, 0) << big.output;
}

TEST_F(Cli, BenchmarkBicubicNeedsNoCheckpoint) {
  auto r = cli("benchmark --manifest '" + (fixtures_ / "heldout_x2" / "manifest.jsonl").string() +
               "' --methods bicubic --out " + at("t.tsv"));
  ASSERT_EQ(r.status, 0) << r.output;
  auto text = slurp(dir_ / "t.tsv");
  EXPECT_EQ(text.rfind("id\tmethod\tscale\tsigma\tpsnr_db\tssim\n", 0), 0u);
  EXPECT_NE(text.find("\nmean\tbicubic\t"), std::string::npos);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 8 + 1 + 1);

  auto no_ckpt = cli("benchmark --manifest '" + (fixtures_ / "heldout_x2" / "manifest.jsonl").string() +
                     "' --methods srwdnet");
  EXPECT_EQ(no_ckpt.output.rfind("error: code=BadFlag", 0), 0u);
}
