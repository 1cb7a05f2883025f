#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

// Spawn the CLI with stdout+stderr captured.
RunResult run_cli(const std::string& args, const fs::path& workdir) {
  const fs::path log = workdir / "cli_output.txt";
  const std::string cmd = std::string(ARCHINFTY_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("archinfty_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  json read_json(const std::string& name) const {
    std::ifstream in(dir_ / name);
    EXPECT_TRUE(in.good()) << "missing artifact " << name;
    json j;
    in >> j;
    return j;
  }

  fs::path dir_;
};

TEST_F(CliTest, CheckStationarySpecExitsZero) {
  const auto r = run_cli("check --kernel '{\"family\":\"table\",\"values\":[0.5]}' --lambda1 1 --lambda2 2 "
                         "--intercept 1 --horizon 200 --out " + dir_.string(), dir_);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const json j = read_json("stationarity.json");
  EXPECT_EQ(j["s1"], "HOLDS");
  EXPECT_EQ(j["s2"], "HOLDS");
  EXPECT_EQ(j["con3"], "FAILS");
  EXPECT_NEAR(j["var_x"].get<double>(), 8.0, 1e-9);
}

TEST_F(CliTest, CheckNonStationarySpecExitsTwo) {
  const auto r = run_cli("check --kernel '{\"family\":\"table\",\"values\":[1.2]}' --lambda1 1 --lambda2 2 "
                         "--horizon 100 --out " + dir_.string(), dir_);
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_EQ(read_json("stationarity.json")["s1"], "FAILS");
}

TEST_F(CliTest, AutocovWritesClosedFormRows) {
  const auto r = run_cli("autocov --kernel '{\"family\":\"table\",\"values\":[0.5]}' --lambda1 1 --lambda2 2 "
                         "--intercept 1 --horizon 200 -K 5 --out " + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::ifstream in(dir_ / "autocov.csv");
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  ASSERT_EQ(line, "lag,rho,chi,tail_flag");
  const std::vector<double> expected{8.0, 4.0, 2.0, 1.0, 0.5, 0.25};
  for (double want : expected) {
    ASSERT_TRUE(std::getline(in, line));
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    EXPECT_NEAR(std::stod(line.substr(first + 1, second - first - 1)), want, 1e-9);
  }
}

TEST_F(CliTest, SpecFileWithFlagOverride) {
  const fs::path spec = dir_ / "run.json";
  {
    std::ofstream out(spec);
    out << R"({"version":1,
               "kernel":{"family":"table","values":[0.5]},
               "moments":{"lambda1":1.0,"lambda2":2.0,"a":1.0},
               "horizons":{"N":150,"K":4}})";
  }
  const auto base = run_cli("check --spec " + spec.string() + " --out " + dir_.string(), dir_);
  EXPECT_EQ(base.exit_code, 0) << base.output;
  // flag overrides the file's kernel into a non-stationary one
  const auto overridden = run_cli("check --spec " + spec.string() +
                                  " --kernel '{\"family\":\"table\",\"values\":[1.5]}' --out " + dir_.string(),
                                  dir_);
  EXPECT_EQ(overridden.exit_code, 2) << overridden.output;
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run_cli("check --kernel 'not json' --lambda1 1 --lambda2 2", dir_).exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate", dir_).exit_code, 1);
  EXPECT_EQ(run_cli("check --lambda1 1 --lambda2 2", dir_).exit_code, 1);  // no kernel anywhere
  const fs::path bad = dir_ / "bad.json";
  {
    std::ofstream out(bad);
    out << "{\"no_version\": true}";
  }
  const auto r = run_cli("check --spec " + bad.string(), dir_);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("version"), std::string::npos);
}

TEST_F(CliTest, KernelCsvInput) {
  const fs::path csv = dir_ / "kernel.csv";
  {
    std::ofstream out(csv);
    out << "index,value\n1,0.5\n";
  }
  const auto r = run_cli("check --kernel-csv " + csv.string() + " --lambda1 1 --lambda2 2 --horizon 100 --out " +
                         dir_.string(), dir_);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  const fs::path bad = dir_ / "bad.csv";
  {
    std::ofstream out(bad);
    out << "index,value\n2,oops\n";
  }
  const auto rbad = run_cli("check --kernel-csv " + bad.string() + " --lambda1 1 --lambda2 2", dir_);
  EXPECT_EQ(rbad.exit_code, 1);
  EXPECT_NE(rbad.output.find("line 2"), std::string::npos) << rbad.output;
}

TEST_F(CliTest, ResolventWritesSeriesAndIdentity) {
  const auto r = run_cli("resolvent --kernel '{\"family\":\"table\",\"values\":[0.5]}' --lambda1 1 "
                         "--horizon 60 --out " + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::ifstream in(dir_ / "resolvent.csv");
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,z");
  std::getline(in, line);
  EXPECT_EQ(line, "0,1");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 2), "1,");
  EXPECT_NEAR(std::stod(line.substr(2)), 0.5, 1e-15);
  const json j = read_json("resolvent.json");
  EXPECT_NEAR(j["sum_identity"]["rhs"].get<double>(), 2.0, 1e-12);
  EXPECT_LT(j["recursion_residual"].get<double>(), 1e-14);
}

TEST_F(CliTest, SimulateProducesArtifactsAndIsSeeded) {
  const std::string base = "simulate --kernel '{\"family\":\"table\",\"values\":[0.5]}' "
                           "--shocks '{\"family\":\"exponential\",\"mean\":1.0}' --intercept 1 "
                           "--length 20000 --truncation-lag 16 --burn-in 160 --lags 5 --seed 3 --out ";
  const auto r = run_cli(base + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const json j = read_json("sim.json");
  EXPECT_EQ(j["seed"], 3);
  EXPECT_NEAR(j["rho_hat"][0].get<double>(), 8.0, 2.0);
  const auto r2 = run_cli(base + dir_.string(), dir_);
  ASSERT_EQ(r2.exit_code, 0) << r2.output;
  EXPECT_EQ(read_json("sim.json"), j);  // deterministic given the seed
}

TEST_F(CliTest, SimulateRefusesNonStationarySpec) {
  const auto r = run_cli("simulate --kernel '{\"family\":\"table\",\"values\":[0.9]}' "
                         "--shocks '{\"family\":\"exponential\",\"mean\":1.0}' --length 1000 --out " +
                         dir_.string(), dir_);
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST_F(CliTest, DiagnoseEmitsRatioSeries) {
  const auto r = run_cli("diagnose --kernel '{\"family\":\"power_law\",\"scale\":0.1,\"exponent\":3.0}' "
                         "--lambda1 1 --lambda2 2 --horizon 1200 --out " + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const json j = read_json("diagnostics.json");
  EXPECT_TRUE(j["z_over_b_ok"].get<bool>());
  std::ifstream in(dir_ / "ratio_z_over_b.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,ratio");
}

TEST_F(CliTest, ReproduceSingleLag) {
  const auto r = run_cli("reproduce single_lag --out " + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("rho(0)"), std::string::npos);
  const json rows = read_json("reproduce_single_lag.json");
  for (const auto& row : rows) EXPECT_LT(row["rel_err"].get<double>(), 1e-9) << row.dump();
}

TEST_F(CliTest, ReproducePeriodic2AtReducedHorizon) {
  const auto r = run_cli("reproduce periodic2 --horizon 20000 --out " + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const json rows = read_json("reproduce_periodic2.json");
  for (const auto& row : rows) EXPECT_LT(row["rel_err"].get<double>(), 1e-4) << row.dump();
  const json numeric = read_json("reproduce_periodic2_numeric.json");
  EXPECT_NEAR(numeric["z_over_b_even"].get<double>(), numeric["z_over_b_even_target"].get<double>(),
              0.05 * numeric["z_over_b_even_target"].get<double>());
}

TEST_F(CliTest, ReproducePeriodic3) {
  const auto r = run_cli("reproduce periodic3 --out " + dir_.string(), dir_);
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const json j = read_json("reproduce_periodic3.json");
  EXPECT_GT(j["liminf_z_over_phi"].get<double>(), 0.0);
  EXPECT_GT(j["liminf_chi_over_phi"].get<double>(), 0.0);
}

}  // namespace
