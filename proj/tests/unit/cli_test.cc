#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace sadyn {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sadyn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run_subcommand(args, out_, err_);
  }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string Read(const std::string& path) const {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string WriteConfig(const std::string& json) const {
    const std::string p = Path("config_in.json");
    std::ofstream(p) << json;
    return p;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, UsageExitCodes) {
  EXPECT_EQ(Run({}), cli::kExitUsage);
  EXPECT_NE(err_.str().find("usage: sadyn"), std::string::npos);
  EXPECT_EQ(Run({"train"}), cli::kExitUsage);
  EXPECT_NE(err_.str().find("unknown subcommand 'train'"), std::string::npos);
  EXPECT_EQ(Run({"--help"}), cli::kExitOk);
  EXPECT_EQ(Run({"energy", "--help"}), cli::kExitOk);
  EXPECT_NE(out_.str().find("--system"), std::string::npos);
}

TEST_F(CliTest, ValidationErrorsExitOne) {
  EXPECT_EQ(Run({"regularize", "--bogus"}), cli::kExitValidation);
  EXPECT_EQ(Run({"regularize", "--preset", "huge"}), cli::kExitValidation);
  EXPECT_EQ(Run({"regularize", "--config", Path("missing.json")}), cli::kExitValidation);
  EXPECT_EQ(Run({"regularize", "--config", WriteConfig(R"({"eta": -1})"), "--out", Path("o")}),
            cli::kExitValidation);
  EXPECT_NE(err_.str().find("eta"), std::string::npos);
  EXPECT_FALSE(fs::exists(Path("o")));
  EXPECT_EQ(Run({"energy", "--system", "triple"}), cli::kExitValidation);
  EXPECT_EQ(Run({"bounds", "--sweep-tokens", "16:8", "--out", Path("o")}), cli::kExitValidation);
  EXPECT_EQ(Run({"lyapunov", "--config", WriteConfig(R"({"variant": "ContinuousProjected"})"),
                 "--out", Path("o")}),
            cli::kExitValidation);
}

TEST_F(CliTest, NumericalFailureExitsTwo) {
  const std::string cfg = WriteConfig(R"({"beta": 1e5, "energy": {"steps": 5}})");
  EXPECT_EQ(Run({"energy", "--config", cfg, "--out", Path("o")}), cli::kExitNumerical);
  EXPECT_NE(err_.str().find("EnergyOverflow"), std::string::npos);
}

TEST_F(CliTest, LyapunovWritesSpectrumAndVerdict) {
  ASSERT_EQ(Run({"lyapunov", "--seed", "3", "--out", Path("ly")}), cli::kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("lambda_max "), std::string::npos);
  EXPECT_NE(out_.str().find("lambda_mean "), std::string::npos);
  EXPECT_NE(out_.str().find("criticality "), std::string::npos);
  const std::string csv = Read(Path("ly/spectrum.csv"));
  EXPECT_EQ(csv.rfind("rank,exponent\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 8 * 32);
  EXPECT_TRUE(fs::exists(Path("ly/spectrum.json")));
  EXPECT_TRUE(fs::exists(Path("ly/weights.archive")));
  EXPECT_TRUE(fs::exists(Path("ly/config.json")));
}

TEST_F(CliTest, EnergyFooterCarriesMonotoneFraction) {
  ASSERT_EQ(Run({"energy", "--system", "single", "--steps", "200", "--out", Path("e")}), cli::kExitOk)
      << err_.str();
  const std::string csv = Read(Path("e/energy.csv"));
  EXPECT_EQ(csv.rfind("t,energy,delta\n", 0), 0u);
  EXPECT_NE(csv.find("# monotone_fraction,1\n"), std::string::npos);
  ASSERT_EQ(Run({"energy", "--system", "multi", "--steps", "50", "--out", Path("m")}), cli::kExitOk)
      << err_.str();
  EXPECT_NE(Read(Path("m/energy.csv")).find("# monotone_fraction,1\n"), std::string::npos);
}

TEST_F(CliTest, BoundsSweepTable) {
  const std::string cfg = WriteConfig(R"({"bounds": {"seeds": 3}})");
  ASSERT_EQ(Run({"bounds", "--config", cfg, "--sweep-tokens", "8:32", "--samples", "1", "--out",
                 Path("b")}),
            cli::kExitOk)
      << err_.str();
  const std::string sweep = Read(Path("b/token_sweep.csv"));
  EXPECT_EQ(sweep.rfind("S,msa_norm,step_norm,prop3_bound,castin_bound\n", 0), 0u);
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 4);
  const std::string checks = Read(Path("b/bound_checks.csv"));
  EXPECT_EQ(std::count(checks.begin(), checks.end(), '\n'), 1 + 3 * 3 + 3);
  EXPECT_EQ(checks.find(",false"), std::string::npos);
  EXPECT_NE(out_.str().find("normalized step bound: 9/9 satisfied"), std::string::npos);
}

TEST_F(CliTest, OtherSubcommandsSucceed) {
  EXPECT_EQ(Run({"simulate", "--iterations", "5", "--out", Path("s")}), cli::kExitOk) << err_.str();
  const std::string traj = Read(Path("s/trajectory.csv"));
  EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 1 + 6);
  EXPECT_EQ(Run({"jacobian-check", "--out", Path("j")}), cli::kExitOk) << err_.str();
  EXPECT_EQ(Read(Path("j/jacobian_check.csv")).find(",false"), std::string::npos);
  const std::string ak = WriteConfig(R"({"variant": "AKOrN", "state": {"init": "conditioning",
                                          "conditioning_scale": 1.0}})");
  EXPECT_EQ(Run({"jacobian-check", "--config", ak, "--out", Path("ja")}), cli::kExitOk) << err_.str();
  EXPECT_EQ(Run({"oscillator", "--out", Path("osc")}), cli::kExitOk) << err_.str();
  EXPECT_TRUE(fs::exists(Path("osc/phase_scan_plain.csv")));
  EXPECT_TRUE(fs::exists(Path("osc/phase_scan_normalized.csv")));
  EXPECT_EQ(Run({"regularize", "--out", Path("r")}), cli::kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("r_spec "), std::string::npos);
}

TEST_F(CliTest, OutputsAreByteIdenticalAcrossRunsAndThreadCounts) {
  const std::string cfg = WriteConfig(R"({"samples": 3, "bounds": {"seeds": 4}})");
  const char* files[] = {"spectrum.csv", "spectrum.json", "lyapunov_samples.csv", "spectrum_samples.csv",
                         "bound_checks.csv", "eta_probe.csv", "weights.archive"};
  std::vector<std::string> first;
  for (const char* threads : {"1", "4"}) {
    setenv("SA_DYN_THREADS", threads, 1);
    const std::string out = Path(std::string("t") + threads);
    ASSERT_EQ(Run({"lyapunov", "--config", cfg, "--seed", "11", "--out", out}), cli::kExitOk);
    ASSERT_EQ(Run({"bounds", "--config", cfg, "--seed", "11", "--out", out}), cli::kExitOk);
    std::vector<std::string> contents;
    for (const char* f : files) contents.push_back(Read(out + "/" + f));
    if (first.empty()) {
      first = contents;
    } else {
      for (std::size_t k = 0; k < contents.size(); ++k) EXPECT_EQ(contents[k], first[k]) << files[k];
    }
  }
  unsetenv("SA_DYN_THREADS");
  ASSERT_EQ(Run({"lyapunov", "--config", cfg, "--seed", "12", "--out", Path("other")}), cli::kExitOk);
  EXPECT_NE(Read(Path("other/spectrum.csv")), first[0]);
}

}  // namespace
}  // namespace sadyn
