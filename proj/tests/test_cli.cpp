#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "druin/table.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("druin_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args, const std::string& env = "unset DRUIN_OUT_DIR;") const {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = env + " '" + std::string(DRUIN_CLI_PATH) + "' " + args + " > '" + out.string() +
                            "' 2> '" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, NbmToStdout) {
  const auto r = run("nbm --model nbm --weights 1 --p 0.6 --u-max 3");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "u,NBM\n0,0.66667\n1,0.44444\n2,0.29630\n3,0.19753\n");
}

TEST_F(Cli, AllMethodsCsvHeader) {
  const auto r = run("all --mixing erlang --k 2 --beta 3 --replications 500");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "u,E,N1,err1,N2,err2,SIM,err_sim,PK,err_pk,NBM,err_nbm");
  const auto t = druin::ResultTable::from_csv(r.out);
  EXPECT_EQ(druin::ResultTable::format_fixed(t.get(1, "N1")), "0.40775");
  EXPECT_EQ(druin::ResultTable::format_fixed(t.get(10, "E")), "0.00355");
}

TEST_F(Cli, JsonOutput) {
  const auto r = run("exact --mixing pareto --alpha 3 --theta 1 --u-max 2 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto t = druin::ResultTable::from_json_text(r.out);
  EXPECT_EQ(t.meta()["model"], "mp(pareto(3,1))");
  EXPECT_DOUBLE_EQ(t.get(0, "E"), 0.5);
  EXPECT_NEAR(t.get(1, "E"), 0.28757, 5e-6);
}

TEST_F(Cli, OutFileAndDirectory) {
  const auto file = dir_ / "a.csv";
  ASSERT_EQ(run("exact --model nbm --p 0.6 --u-max 2 --out '" + file.string() + "'").code, 0);
  EXPECT_EQ(slurp(file), "u,E\n0,0.66667\n1,0.44444\n2,0.29630\n");
  ASSERT_EQ(run("exact --model nbm --p 0.6 --u-max 2 --format json --out '" + dir_.string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "exact.json"));
}

TEST_F(Cli, EnvironmentOutputDirectory) {
  const auto out = dir_ / "env";
  const auto r = run("pk --model nbm --p 0.6 --u-max 2", "DRUIN_OUT_DIR='" + out.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(out / "pk.csv"), "u,PK\n0,0.66667\n1,0.44444\n2,0.29630\n");
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  const auto cfg = write("job.ini", "model = nbm\nweights = \"0.5,0.5\"\np = 0.8\nu-max = 6\n");
  const auto a = run("nbm --config '" + cfg.string() + "'");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(druin::ResultTable::from_csv(a.out).rows(), 7u);
  const auto b = run("nbm --config '" + cfg.string() + "' --u-max 2");
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(druin::ResultTable::from_csv(b.out).rows(), 3u);
  EXPECT_EQ(a.out.substr(0, b.out.size()), b.out);
}

TEST_F(Cli, ConfigFileUnknownKeyRejected) {
  const auto cfg = write("bad.ini", "u_maximum = 3\n");
  EXPECT_EQ(run("nbm --model nbm --config '" + cfg.string() + "'").code, 2);
}

TEST_F(Cli, ByteIdenticalRuns) {
  const std::string args = "all --mixing lognormal --mu-log -1 --sigma-log 1 --replications 500 --seed 5 --format json";
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(run(args + " --timings").out, a.out);
}

TEST_F(Cli, NetProfitViolation) {
  const auto r = run("exact --model nbm --weights 1 --p 0.4");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("net profit"), std::string::npos) << r.err;
}

TEST_F(Cli, ValidationFailures) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("exact --format xml").code, 2);
  EXPECT_EQ(run("exact --u-max -3").code, 2);
  EXPECT_EQ(run("mp1 --model nbm --p 0.6").code, 2);
  EXPECT_EQ(run("exact --model gd").code, 2);
  EXPECT_EQ(run("exact --model gd --pmf /nonexistent.csv").code, 2);
  EXPECT_EQ(run("exact --mixing pareto --alpha 0.5").code, 2);
}

TEST_F(Cli, BudgetFailure) {
  // alpha close to 1: the claim tail is far too heavy for a complete pmf
  const auto r = run("simulate --mixing pareto --alpha 1.05 --theta 0.01 --u-max 2 --replications 10");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST_F(Cli, PmfFileModels) {
  const auto pmf = write("claims.csv", "x,pmf\n0,0.5\n1,0.2\n2,0.3\n");
  const auto gd = run("exact --model gd --pmf '" + pmf.string() + "' --u-max 3");
  ASSERT_EQ(gd.code, 0) << gd.err;
  EXPECT_EQ(gd.out.substr(0, gd.out.find('\n', 2) + 1), "u,E\n");
  const auto sizes = write("sizes.csv", "x,pmf\n1,0.6\n2,0.4\n");
  const auto cb = run("all --model cb --p 0.5 --pmf '" + sizes.string() + "' --u-max 3 --replications 200");
  ASSERT_EQ(cb.code, 0) << cb.err;
  EXPECT_EQ(cb.out.substr(0, cb.out.find('\n')), "u,E,SIM,err_sim,PK,err_pk");
}

TEST_F(Cli, HelpExitsZero) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("tables"), std::string::npos);
}
