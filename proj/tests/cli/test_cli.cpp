#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(RWPI_CLI_PATH) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rwpi_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SelectLambdaHighdim) {
  const auto r = run("select-lambda --method highdim --n 10000 --d 300 --alpha 0.05 --seed 1");
  ASSERT_EQ(r.status, 0);
  const auto j = json::parse(r.out);
  for (const char* key : {"alpha", "method", "mc_draws", "eta_hat", "delta", "lambda", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_NEAR(j["lambda"].get<double>(), 0.103605627474, 1e-12);
}

TEST_F(Cli, RwpMeanExample) {
  const auto data = write("w.csv", "w\n0\n4\n");
  const auto r = run("rwp --mode mean --theta 1 --rho 2 --data " + data);
  ASSERT_EQ(r.status, 0);
  EXPECT_DOUBLE_EQ(json::parse(r.out)["value"].get<double>(), 1.0);
}

TEST_F(Cli, SqrtLassoAtZeroEqualsOls) {
  ASSERT_EQ(run("gen-data --n 80 --d 6 --sigma 1 --seed 3 --out " + path("d.csv")).status, 0);
  const auto a = run("fit --model sqrt-lasso --lambda 0 --p 1 --data " + path("d.csv") + " --response y");
  const auto b = run("fit --model ols --data " + path("d.csv") + " --response y");
  ASSERT_EQ(a.status, 0);
  ASSERT_EQ(b.status, 0);
  const auto ba = json::parse(a.out)["beta"];
  const auto bb = json::parse(b.out)["beta"];
  ASSERT_EQ(ba.size(), 6u);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(ba[j].get<double>(), bb[j].get<double>(), 1e-8);
}

TEST_F(Cli, FitRoundTripsAtTwelveDigits) {
  ASSERT_EQ(run("gen-data --n 50 --d 5 --sigma 2 --seed 4 --out " + path("d.csv")).status, 0);
  const auto a = run("fit --model sqrt-lasso --lambda 0.2 --p 2 --data " + path("d.csv"));
  ASSERT_EQ(a.status, 0);
  const auto j = json::parse(a.out);
  // re-emitting parsed numbers must not change them
  EXPECT_EQ(json::parse(j.dump()), j);
  const double obj = j["objective"].get<double>();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", obj);
  EXPECT_EQ(std::stod(buf), obj);
}

TEST_F(Cli, WorstCaseNumericIncludesGamma) {
  ASSERT_EQ(run("gen-data --n 30 --d 4 --sigma 1 --seed 5 --out " + path("d.csv")).status, 0);
  const auto beta = write("b.txt", "3 2 0 1.5\n");
  const auto closed = run("worst-case --loss square --delta 0.3 --p inf --data " + path("d.csv") + " --beta-file " + beta);
  const auto numeric =
      run("worst-case --loss square --numeric --delta 0.3 --p inf --data " + path("d.csv") + " --beta-file " + beta);
  ASSERT_EQ(closed.status, 0);
  ASSERT_EQ(numeric.status, 0);
  const auto jc = json::parse(closed.out);
  const auto jn = json::parse(numeric.out);
  EXPECT_FALSE(jc.contains("gamma"));
  EXPECT_TRUE(jn.contains("gamma"));
  EXPECT_NEAR(jc["value"].get<double>(), jn["value"].get<double>(), 1e-6 * (1 + jc["value"].get<double>()));
}

TEST_F(Cli, EveryVerbRuns) {
  ASSERT_EQ(run("gen-data --n 40 --d 4 --sigma 1 --seed 6 --out " + path("d.csv")).status, 0);
  const auto beta = write("b.txt", "3,2,0,1.5\n");
  const auto binary = write("bin.csv", "x1,x2,y\n1,0.5,1\n-1,0.2,-1\n0.3,-1,1\n-0.7,0.9,-1\n1.2,1,1\n-0.1,-0.4,-1\n");
  const auto cfg = write("exp.cfg", "n=40\nd=5\nreps=2\ntest_size=100\nmc_draws=50\ncv_folds=3\ncv_grid=4\nseed=9\n");
  const std::string d = path("d.csv");
  const std::string cmds[] = {
      "select-lambda --method l2 --alpha 0.05 --n 40 --data " + d + " --mc 200 --seed 1",
      "select-lambda --method l1 --alpha 0.05 --n 40 --data " + d + " --beta-file " + beta +
          " --mc 20 --saa 40 --seed 1",
      "select-lambda --method l4 --alpha 0.05 --n 6 --data " + binary + " --mc 200 --seed 1",
      "fit --model logistic --lambda 0.05 --p 1 --data " + binary,
      "worst-case --loss logistic --delta 0.1 --p 1 --data " + binary + " --beta-file " + write("b2.txt", "1 0\n"),
      "worst-case --loss hinge --delta 0.1 --p 2 --data " + binary + " --beta-file " + path("b2.txt"),
      "rwp --mode linear-q2 --data " + d + " --beta-file " + beta,
      "rwp --mode generic --equation mean --theta 0.5 --rho 2 --q 2 --seed 1 --data " + write("w.csv", "w\n0\n1\n3\n"),
      "simulate-limit --law l2 --draws 100 --seed 2 --d 3 --ar 0.5",
      "simulate-limit --law l4 --draws 100 --seed 2 --data " + binary,
      "simulate-limit --law rbar --rho 2 --p 2 --draws 50 --seed 2 --theta 1 --data " + path("w.csv"),
      "simulate-limit --law rbar1 --p 2 --draws 50 --seed 2 --theta 1 --data " + path("w.csv"),
      "simulate-limit --law l1 --p 1 --draws 10 --saa 40 --seed 2 --data " + d + " --beta-file " + beta,
      "experiment --config " + cfg + " --rows " + path("rows.csv"),
  };
  for (const auto& c : cmds) {
    const auto r = run(c, true);
    EXPECT_EQ(r.status, 0) << c << "\n" << r.out;
    EXPECT_TRUE(json::accept(r.out)) << c;
  }
  EXPECT_TRUE(fs::exists(path("rows.csv")));
}

TEST_F(Cli, OutputsAreByteIdentical) {
  const auto cfg = write("exp.cfg", "n=40\nd=5\nreps=2\ntest_size=100\nmc_draws=50\ncv_folds=3\ncv_grid=4\nseed=9\n");
  const auto a = run("experiment --config " + cfg + " --threads 1");
  const auto b = run("experiment --config " + cfg + " --threads 3");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  const auto s1 = run("simulate-limit --law l2 --draws 500 --seed 7 --d 4 --ar 0.5 --threads 1");
  const auto s2 = run("simulate-limit --law l2 --draws 500 --seed 7 --d 4 --ar 0.5 --threads 4");
  EXPECT_EQ(s1.out, s2.out);
}

TEST_F(Cli, UsageErrorsExitTwoAndNameTheFlag) {
  auto r = run("frobnicate", true);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("frobnicate"), std::string::npos);
  r = run("select-lambda --method highdim --n 100 --alpha 0.05 --seed 1 --bogus 3", true);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("--bogus"), std::string::npos);
  r = run("gen-data --n 10 --d 5 --sigma 1 --out x.csv", true);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("--seed"), std::string::npos);
  r = run("select-lambda --method l7 --n 100 --alpha 0.05 --seed 1", true);
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.out.find("--method"), std::string::npos);
}

TEST_F(Cli, RuntimeErrorsExitOneWithPath) {
  const auto r = run("fit --model ols --data " + path("missing.csv"), true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("missing.csv"), std::string::npos);
  const auto bad = write("bad.cfg", "n=10\nwhat=1\n");
  const auto e = run("experiment --config " + bad, true);
  EXPECT_EQ(e.status, 1);
  EXPECT_NE(e.out.find("what"), std::string::npos);
}
