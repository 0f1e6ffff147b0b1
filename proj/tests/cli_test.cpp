// End-to-end tests of the installed command-line binary: invocation contract,
// exit codes (0 ok, 2 config, 3 numerical, 4 validation), file outputs, and
// byte-level determinism.  The binary path is injected by the build.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ppqme_cli_" + std::string(::testing::UnitTest::GetInstance()
                                           ->current_test_info()
                                           ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& doc, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

  CliResult run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string(PPQME_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static json base_config() {
    return json{
        {"system",
         {{"n_sites", 2}, {"energies_cm1", {0.0, 0.0}}, {"couplings", {{1, 2, 300.0}}}}},
        {"bath", {{"family", "ohmic_exponential"}, {"eta", 1.0}, {"omega_c_cm1", 200.0}}},
        {"weighting", {{"kind", "step"}, {"omega_h_cm1", 200.0}}},
        {"run",
         {{"temperature_K", 300.0},
          {"t_max_fs", 50.0},
          {"dt_fs", 0.5},
          {"initial_site", 1},
          {"inhom_order", 1},
          {"stride", 10}}},
        {"output", {{"csv_path", "traj.csv"}}}};
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateWritesTrajectoryAndSummary) {
  const auto cfg = write_config(base_config());
  const auto r = run("simulate --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote "), std::string::npos);

  const std::string csv = slurp(dir_ / "traj.csv");
  ASSERT_FALSE(csv.empty());
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header,
            "t_fs,P_1,P_2,Re_sigma_tilde_1_2,Im_sigma_tilde_1_2,trace,min_eigenvalue");
  int rows = 0;
  for (std::string line; std::getline(lines, line);)
    if (!line.empty()) ++rows;
  // 100 steps, stride 10: records at steps 0, 10, ..., 100.
  EXPECT_EQ(rows, 11);

  // The JSON sidecar reports the dressed frame.
  const auto doc = json::parse(slurp(dir_ / "traj.json"));
  ASSERT_TRUE(doc.contains("frame"));
  EXPECT_TRUE(doc["frame"].contains("renormalized_energies_cm1"));
  EXPECT_TRUE(doc["frame"].contains("debye_waller"));
  EXPECT_TRUE(doc.contains("diagnostics"));
  EXPECT_LE(std::abs(doc["diagnostics"]["max_trace_drift"].get<double>()), 1e-10);
}

TEST_F(CliTest, SimulateIsByteDeterministic) {
  const auto cfg = write_config(base_config());
  fs::create_directories(dir_ / "a");
  fs::create_directories(dir_ / "b");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "a").string()).code,
            0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "b").string()).code,
            0);
  EXPECT_EQ(slurp(dir_ / "a" / "traj.csv"), slurp(dir_ / "b" / "traj.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "traj.json"), slurp(dir_ / "b" / "traj.json"));
}

TEST_F(CliTest, MissingKeyIsConfigError) {
  auto doc = base_config();
  doc["run"].erase("dt_fs");
  const auto cfg = write_config(doc);
  const auto r = run("simulate --config " + cfg.string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("run.dt_fs"), std::string::npos) << r.err;
}

TEST_F(CliTest, LowAlphaRejectedUnlessOverridden) {
  auto doc = base_config();
  doc["weighting"] = {{"kind", "smooth"}, {"omega_h_cm1", 200.0}, {"alpha", 1.0}};
  doc["run"]["t_max_fs"] = 10.0;
  const auto cfg = write_config(doc);
  const auto rejected = run("simulate --config " + cfg.string() + " --out " + dir_.string());
  EXPECT_EQ(rejected.code, 2);
  EXPECT_NE(rejected.err.find("alpha"), std::string::npos) << rejected.err;
  const auto allowed = run("simulate --config " + cfg.string() + " --out " + dir_.string() +
                           " --allow-divergent-alpha");
  EXPECT_EQ(allowed.code, 0) << allowed.err;
}

TEST_F(CliTest, DivergentTransformIsNumericalError) {
  auto doc = base_config();
  doc["weighting"] = {{"kind", "unity"}};
  const auto cfg = write_config(doc);
  const auto r = run("simulate --config " + cfg.string() + " --out " + dir_.string());
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("divergent"), std::string::npos) << r.err;
}

TEST_F(CliTest, ValidatePassesAndReports) {
  const auto r = run("validate");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("checks passed"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("debye_waller_consistency"), std::string::npos);
  EXPECT_NE(r.out.find("bare_limit_matches_reference"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST_F(CliTest, ValidateNegativeControlFails) {
  const auto r = run("validate --corrupt-w");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("debye_waller_consistency"), std::string::npos) << r.out;
}

TEST_F(CliTest, DumpCorrelationsZeroWeightingIsTrivial) {
  auto doc = base_config();
  doc["weighting"] = {{"kind", "zero"}};
  doc["run"]["t_max_fs"] = 10.0;
  doc["output"] = {{"csv_path", "corr.csv"}};
  const auto cfg = write_config(doc);
  const auto r = run("dump-correlations --config " + cfg.string() + " --out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;

  const std::string csv = slurp(dir_ / "corr.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  ASSERT_NE(header.find("t_fs"), std::string::npos);
  // Locate columns by name, then assert the transformed-channel ones vanish.
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  }
  int checked_rows = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    for (std::string c; std::getline(ls, c, ',');) vals.push_back(std::stod(c));
    ASSERT_EQ(vals.size(), cols.size());
    for (size_t i = 1; i < cols.size(); ++i) {
      const std::string& name = cols[i];
      if (name.rfind("Re_K", 0) == 0 || name.rfind("Im_K", 0) == 0 ||
          name.rfind("Re_M", 0) == 0 || name.rfind("Im_M", 0) == 0 ||
          name.rfind("h_", 0) == 0 || name.rfind("Im_f", 0) == 0) {
        EXPECT_NEAR(vals[i], 0.0, 1e-14) << name;
      } else if (name.rfind("Re_f", 0) == 0) {
        EXPECT_NEAR(vals[i], 1.0, 1e-14) << name;
      }
    }
    ++checked_rows;
  }
  EXPECT_GT(checked_rows, 10);
}

TEST_F(CliTest, SweepWritesSummaryAndPointFiles) {
  auto doc = base_config();
  doc["run"]["t_max_fs"] = 20.0;
  const auto cfg = write_config(doc);
  const auto r = run("sweep --config " + cfg.string() + " --param omega_h --values 100,200 " +
                     "--out " + dir_.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string summary = slurp(dir_ / "sweep_summary.csv");
  std::istringstream lines(summary);
  std::string header;
  std::getline(lines, header);
  EXPECT_EQ(header, "parameter,value,status,coherence_metric,P1_long_time");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    if (line.empty()) continue;
    EXPECT_NE(line.find("omega_h"), std::string::npos);
    EXPECT_NE(line.find(",ok,"), std::string::npos);
    ++rows;
  }
  EXPECT_EQ(rows, 2);
  EXPECT_TRUE(fs::exists(dir_ / "sweep_omega_h_00.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "sweep_omega_h_01.csv"));
}

TEST_F(CliTest, SweepEmptyValuesIsNoOp) {
  const auto cfg = write_config(base_config());
  const auto r = run("sweep --config " + cfg.string() + " --param omega_h --values \"\" --out " +
                     dir_.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "sweep_summary.csv"));
}

TEST_F(CliTest, SweepParameterValidation) {
  const auto cfg = write_config(base_config());
  // Unknown parameter name.
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --param beta --values 1,2 --out " +
                dir_.string())
                .code,
            2);
  // alpha can only be swept on a smooth weighting.
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --param alpha --values 2,3 --out " +
                dir_.string())
                .code,
            2);
  // Unparseable value list.
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --param omega_h --values 1,x --out " +
                dir_.string())
                .code,
            2);
}

TEST_F(CliTest, BadInvocationIsConfigError) {
  EXPECT_EQ(run("").code, 2);                       // missing subcommand
  EXPECT_EQ(run("simulate").code, 2);               // missing --config
  EXPECT_EQ(run("frobnicate --config x").code, 2);  // unknown subcommand
  const auto r = run("simulate --config " + (dir_ / "absent.json").string());
  EXPECT_EQ(r.code, 2);  // unreadable config file
}

}  // namespace
