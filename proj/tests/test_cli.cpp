#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out, err;
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
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("pggm_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { if (!HasFailure()) fs::remove_all(dir_); }

  Outcome run(const std::string& args) const {
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && '" PGGM_CLI_PATH "' " + args + " 2>'" + err.string() + "'";
    Outcome r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  // n x 3 predictors and a response driven by the first column.
  void write_regression(int n) const {
    std::ostringstream x, y;
    x << "x1,x2,x3\n";
    y << "y\n";
    std::uint64_t s = 12345;
    auto next = [&] {
      s = s * 6364136223846793005ULL + 1442695040888963407ULL;
      return static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    };
    for (int i = 0; i < n; ++i) {
      const double a = next(), b = next(), c = next();
      x << a << ',' << b << ',' << c << '\n';
      y << 3.0 * a + 0.3 * next() << '\n';
    }
    write("x.csv", x.str());
    write("y.csv", y.str());
  }

  fs::path dir_;
};

const std::string kQuick = " --iterations 120 --burn-in 60";

}  // namespace

TEST_F(Cli, SimulateIsByteIdentical) {
  ASSERT_EQ(run("simulate --scenario 1 --reps 2 --seed 5 --out a" + kQuick).code, 0);
  ASSERT_EQ(run("simulate --scenario 1 --reps 2 --seed 5 --out b --threads 2" + kQuick).code, 0);
  EXPECT_EQ(slurp(dir_ / "a/report.json"), slurp(dir_ / "b/report.json"));
  EXPECT_EQ(slurp(dir_ / "a/metrics.csv"), slurp(dir_ / "b/metrics.csv"));
  ASSERT_EQ(run("simulate --scenario 1 --reps 2 --seed 6 --out c" + kQuick).code, 0);
  EXPECT_NE(slurp(dir_ / "a/report.json"), slurp(dir_ / "c/report.json"));
}

TEST_F(Cli, SimulateReportContents) {
  const Outcome r = run("simulate --scenario 0 --reps 3 --seed 1 --out o" + kQuick);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "o/report.json"));
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["scenario"]["variant"], "none");
  EXPECT_EQ(j["repetitions"].size(), 3u);
  EXPECT_EQ(j["aggregate"]["f_score"]["median"].get<double>(), 1.0);
  const std::string csv = slurp(dir_ / "o/metrics.csv");
  EXPECT_EQ(csv.rfind("# ", 0), 0u);
  EXPECT_NE(csv.find("scenario,n_e,rho,variant,repetition,metric,value"), std::string::npos);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  write("cfg.json", R"({"iterations": 150, "burn_in": 50, "reps": 2, "scenario": "0"})");
  ASSERT_EQ(run("simulate --config cfg.json --iterations 120 --out o").code, 0);
  const auto cfg = nlohmann::json::parse(slurp(dir_ / "o/report.json"))["provenance"]["config"];
  EXPECT_EQ(cfg["iterations"], 120);
  EXPECT_EQ(cfg["burn_in"], 50);
  EXPECT_EQ(cfg["reps"], 2);
}

TEST_F(Cli, ThoroughPresetYieldsToExplicitFlags) {
  write("cfg.json", R"({"thorough": true, "iterations": 100, "burn_in": 50, "reps": 1, "scenario": "0"})");
  ASSERT_EQ(run("simulate --config cfg.json --out o").code, 0);
  const auto cfg = nlohmann::json::parse(slurp(dir_ / "o/report.json"))["provenance"]["config"];
  EXPECT_EQ(cfg["iterations"], 100);
  EXPECT_EQ(cfg["thorough"], true);
}

TEST_F(Cli, FitIsDeterministicAndFindsSignal) {
  write_regression(120);
  const std::string base = "fit --x x.csv --y y.csv --variant s --seed 3 --iterations 600 --burn-in 300";
  ASSERT_EQ(run(base + " --out f1").code, 0);
  ASSERT_EQ(run(base + " --out f2").code, 0);
  const std::string a = slurp(dir_ / "f1/summary.json");
  EXPECT_EQ(a, slurp(dir_ / "f2/summary.json"));
  const auto j = nlohmann::json::parse(a);
  EXPECT_EQ(j["summary"]["support"], nlohmann::json::parse("[0]"));  // selected column indices
}

TEST_F(Cli, FitChainDumpAndSubsampling) {
  write_regression(80);
  const std::string base = "fit --x x.csv --y y.csv --variant s --iterations 200 --burn-in 100";
  Outcome r = run(base + " --out f --chain-dump dump/chain.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string dump = slurp(dir_ / "dump/chain.csv");
  EXPECT_NE(dump.find("sweep,block,row,col,value"), std::string::npos);
  r = run(base + " --out s --subsample-reps 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "s/summary.json"));
  EXPECT_EQ(j["subsample"]["repetitions"], 2);
  EXPECT_EQ(j["subsample"]["size"], 40);
  EXPECT_EQ(run(base + " --subsample-reps 2 --chain-dump d.csv").code, 1);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("simulate --scenario 9 --out o").code, 1);
  EXPECT_EQ(run("simulate --scenario 1 --iterations 10 --burn-in 10 --out o").code, 1);
  EXPECT_EQ(run("fit --x missing.csv --y missing.csv").code, 2);
  write_regression(20);
  EXPECT_EQ(run("fit --x x.csv --y y.csv --variant gs --iterations 20 --burn-in 10").code, 1);
  write("groups.json", "[2, 2]");
  EXPECT_EQ(run("fit --x x.csv --y y.csv --variant gs --groups groups.json --iterations 20 --burn-in 10").code, 2);
}

TEST_F(Cli, CsvErrorsReportLineNumbers) {
  write("x.csv", "a,b\n1,2\n3,4\n5,zz\n");
  write("y.csv", "1\n2\n3\n");
  const Outcome r = run("fit --x x.csv --y y.csv --variant s --iterations 20 --burn-in 10");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("x.csv:4: field 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("\"status\":\"error\""), std::string::npos) << r.err;
}

TEST_F(Cli, ValidatePassesAndMutantFails) {
  const Outcome ok = run("validate --draws 20000 --out v.json");
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("all checks passed"), std::string::npos);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "v.json"))["status"], "ok");
  const Outcome bad = run("validate --draws 2000 --mutate-slab-sign");
  EXPECT_EQ(bad.code, 3);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}
