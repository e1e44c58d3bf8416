#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"

using namespace wheatfx;
using wheatfx::testing::TempDir;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run(const TempDir& dir, const std::string& args) {
  const auto out = dir.path() / "stdout.txt";
  const auto err = dir.path() / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && '" WHEATFX_CLI_PATH "' " + args + " > '" +
                          out.string() + "' 2> '" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli");
    ASSERT_EQ(run(*dir_, "synth data --per-class 10 --seed 3").status, 0);
    ASSERT_EQ(run(*dir_, "--working-size 96 extract data -o f.csv").status, 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static TempDir* dir_;
};

TempDir* Cli::dir_ = nullptr;

}  // namespace

TEST_F(Cli, ExtractWritesOneRowPerImage) {
  const std::string csv = slurp(dir_->path() / "f.csv");
  EXPECT_EQ(count_lines(csv), 41U);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), feature_csv_header());
  const RunResult again = run(*dir_, "--working-size 96 extract data -o g.csv");
  EXPECT_EQ(again.status, 0);
  EXPECT_NE(again.out.find("checkerboard=10"), std::string::npos) << again.out;
  EXPECT_EQ(slurp(dir_->path() / "g.csv"), csv);
}

TEST_F(Cli, UnreadableFileIsSkippedWithWarning) {
  TempDir local("cli-skip");
  std::filesystem::copy(dir_->path() / "data", local.path() / "data", std::filesystem::copy_options::recursive);
  std::ofstream(local.path() / "data" / "healthy" / "zz_broken.jpg") << "\xff\xd8\xff truncated";
  const RunResult r = run(local, "--working-size 96 extract data -o f.csv");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.err.find("zz_broken.jpg"), std::string::npos);
  EXPECT_NE(r.out.find("skipped 1"), std::string::npos) << r.out;
  EXPECT_EQ(count_lines(slurp(local.path() / "f.csv")), 41U);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(*dir_, "train f.csv -o m.json --model perceptron").status, 2);
  EXPECT_EQ(run(*dir_, "train").status, 2);
  EXPECT_EQ(run(*dir_, "").status, 2);
  EXPECT_EQ(run(*dir_, "--canny-low 200 --canny-high 100 extract data -o x.csv").status, 2);
}

TEST_F(Cli, DataErrorsExitOne) {
  EXPECT_EQ(run(*dir_, "train missing.csv -o m.json").status, 1);
  std::ofstream(dir_->path() / "bad_model.json") << "{\"format\":\"something\"}";
  const RunResult r = run(*dir_, "predict bad_model.json data/healthy/img_0000.png");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("version"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainPredictAndReplay) {
  const std::string args =
      "train f.csv -o model.json --report report.json --confusion-csv cm.csv --forest-trees 10 --gbm-rounds 10";
  const RunResult t = run(*dir_, args);
  ASSERT_EQ(t.status, 0) << t.err;
  EXPECT_NE(t.out.find("accuracy"), std::string::npos);
  const std::string model = slurp(dir_->path() / "model.json");
  const std::string metrics = slurp(dir_->path() / "report.json");
  ASSERT_EQ(run(*dir_, "train f.csv -o model2.json --report report2.json --forest-trees 10 --gbm-rounds 10").status, 0);
  EXPECT_EQ(slurp(dir_->path() / "model2.json"), model);
  EXPECT_EQ(slurp(dir_->path() / "report2.json"), metrics);

  const json report = json::parse(metrics);
  for (const auto& p : report.at("predictions")) {
    const std::string source = p.at("source");
    const RunResult pr = run(*dir_, "predict --json model.json '" + source + "'");
    ASSERT_EQ(pr.status, 0) << pr.err;
    const json got = json::parse(pr.out);
    EXPECT_EQ(got.at("class"), p.at("predicted"));
    double sum = 0.0;
    for (double v : got.at("probabilities")) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(got.at("probabilities"), p.at("probabilities"));
  }

  const RunResult rep = run(*dir_, "report report.json");
  EXPECT_EQ(rep.status, 0);
  EXPECT_NE(rep.out.find("macro avg"), std::string::npos);
  EXPECT_EQ(count_lines(slurp(dir_->path() / "cm.csv")), 5U);

  const RunResult ev = run(*dir_, "evaluate f.csv --model-file model.json");
  EXPECT_EQ(ev.status, 0) << ev.err;

  ASSERT_EQ(run(*dir_, "--working-size 96 --glcm-levels 8 extract data -o other.csv").status, 0);
  const RunResult mismatch = run(*dir_, "evaluate other.csv --model-file model.json");
  EXPECT_EQ(mismatch.status, 1);
  EXPECT_NE(mismatch.err.find("differ"), std::string::npos) << mismatch.err;
}

TEST_F(Cli, DebugDirectoryGetsImages) {
  TempDir local("cli-debug");
  std::filesystem::create_directories(local.path() / "data");
  for (const char* cls : {"healthy", "stripes"}) {
    std::filesystem::create_directories(local.path() / "data" / cls);
    std::filesystem::copy_file(dir_->path() / "data" / cls / "img_0000.png", local.path() / "data" / cls / "a.png");
  }
  ASSERT_EQ(run(local, "--working-size 64 extract data -o f.csv --debug-dir dbg").status, 0);
  for (const char* name : {"healthy__a_gray.png", "healthy__a_mask.png", "stripes__a_edges.png"}) {
    const RasterImage img = load_image(local.path() / "dbg" / name);
    EXPECT_EQ(img.width(), 64);
  }
}

TEST_F(Cli, CrossValidationReport) {
  const RunResult r = run(*dir_, "evaluate f.csv --model tree --folds 5 --report cv.json");
  ASSERT_EQ(r.status, 0) << r.err;
  const json cv = json::parse(slurp(dir_->path() / "cv.json"));
  EXPECT_EQ(cv.at("folds").size(), 5U);
  EXPECT_EQ(run(*dir_, "report cv.json").status, 0);
}

TEST_F(Cli, ConfigFilePrecedence) {
  std::ofstream(dir_->path() / "cfg.ini") << "model=tree\nseed=11\n";
  ASSERT_EQ(run(*dir_, "--config cfg.ini train f.csv -o a.json").status, 0);
  const ModelFile a = load_model(dir_->path() / "a.json");
  EXPECT_EQ(kind_of(a.model), ModelKind::kTree);
  EXPECT_EQ(a.config.seed, 11U);
  ASSERT_EQ(run(*dir_, "--config cfg.ini train f.csv -o b.json --seed 12").status, 0);
  const ModelFile b = load_model(dir_->path() / "b.json");
  EXPECT_EQ(kind_of(b.model), ModelKind::kTree);
  EXPECT_EQ(b.config.seed, 12U);
  ASSERT_EQ(run(*dir_, "train f.csv -o c.json --model tree").status, 0);
  EXPECT_EQ(load_model(dir_->path() / "c.json").config.seed, 42U);
}
