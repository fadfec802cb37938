#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dcopt_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(DCOPT_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSmallSynth = "synth --n1 40 --n2 30 --rank-true 2 --rank 4 --sr 0.4";

}  // namespace

TEST(Cli, SynthIsDeterministic) {
  TempDir t;
  const auto a = t.path / "a", b = t.path / "b";
  ASSERT_EQ(run(std::string(kSmallSynth) + " --seed 5 --out-dir " + a.string()), 0);
  ASSERT_EQ(run(std::string(kSmallSynth) + " --seed 5 --out-dir " + b.string()), 0);
  const std::string ma = slurp(a / "metrics.json");
  EXPECT_FALSE(ma.empty());
  EXPECT_EQ(ma, slurp(b / "metrics.json"));
  EXPECT_NE(ma.find("\"time_ms\": null"), std::string::npos);
  const std::string trace = slurp(a / "trace.csv");
  EXPECT_EQ(trace.rfind("# threads=1\n", 0), 0u);
}

TEST(Cli, MissingDataFileLeavesNoOutput) {
  TempDir t;
  const auto out = t.path / "out";
  EXPECT_EQ(run("complete --data " + (t.path / "missing.txt").string() + " --out-dir " +
                out.string()),
            1);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, ConfigFileAndOverride) {
  TempDir t;
  const auto cfg = t.path / "run.ini";
  std::ofstream(cfg) << "n1 = 30\nn2 = 20\nrank-true = 2\nrank = 3\nsr = 0.5\n";
  const std::string flags = "synth --n2 20 --rank-true 2 --rank 3 --sr 0.5";
  auto out = [&](const char* name) { return " --out-dir " + (t.path / name).string(); };
  ASSERT_EQ(run("synth --config " + cfg.string() + out("from_config")), 0);
  ASSERT_EQ(run(flags + " --n1 30" + out("from_flags")), 0);
  EXPECT_EQ(slurp(t.path / "from_config" / "metrics.json"),
            slurp(t.path / "from_flags" / "metrics.json"));
  // The command line wins over the file.
  ASSERT_EQ(run("synth --config " + cfg.string() + " --n1 25" + out("override")), 0);
  ASSERT_EQ(run(flags + " --n1 25" + out("override_flags")), 0);
  EXPECT_EQ(slurp(t.path / "override" / "metrics.json"),
            slurp(t.path / "override_flags" / "metrics.json"));
  EXPECT_NE(slurp(t.path / "override" / "metrics.json"),
            slurp(t.path / "from_config" / "metrics.json"));
}

TEST(Cli, UnknownConfigKeyIsRejected) {
  TempDir t;
  const auto cfg = t.path / "bad.ini";
  std::ofstream(cfg) << "n1 = 30\nbogus-key = 1\n";
  EXPECT_NE(run("synth --config " + cfg.string() + " --out-dir " + (t.path / "o").string()), 0);
}

TEST(Cli, BadArgumentsExitNonzero) {
  EXPECT_NE(run("synth --scheme S9"), 0);
  EXPECT_NE(run("nosuchcommand"), 0);
  TempDir t;
  EXPECT_NE(run("dc-bench --solver subgm --out-dir " + (t.path / "o").string()), 0);
}

TEST(Cli, CheckPassesAndNegativeControlFails) {
  TempDir t;
  EXPECT_EQ(run("check --subsolver-instances 5 --out-dir " + (t.path / "ok").string()), 0);
  EXPECT_NE(run("check --subsolver-instances 5 --corrupt-theta2-grad --out-dir " +
                (t.path / "bad").string()),
            0);
}

TEST(Cli, DcBenchWritesReproducibleCsv) {
  TempDir t;
  const auto a = t.path / "a", b = t.path / "b";
  ASSERT_EQ(run("dc-bench --examples 1,3 --runs 5 --out-dir " + a.string()), 0);
  ASSERT_EQ(run("dc-bench --examples 1,3 --runs 5 --out-dir " + b.string()), 0);
  const std::string csv = slurp(a / "bench.csv");
  EXPECT_EQ(csv.rfind("example,min,max,mean,Nopt,time\n", 0), 0u);
  EXPECT_EQ(csv, slurp(b / "bench.csv"));
}
