#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(CONESURF_CLI) + " " + args + " 2>&1";
  CliResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(CONESURF_DATA_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("conesurf_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string tmp(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
  fs::path dir;
};

std::set<std::string> help_flags(const std::string& help) {
  std::set<std::string> out;
  const std::regex re("(--[a-z][a-z-]*)");
  for (auto it = std::sregex_iterator(help.begin(), help.end(), re); it != std::sregex_iterator(); ++it)
    out.insert((*it)[1]);
  return out;
}

}  // namespace

TEST_F(Cli, ValidatePrintsGaussBonnet) {
  const CliResult r = run("validate --surface " + data("octagon.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("Gauss-Bonnet"), std::string::npos);
  EXPECT_NE(r.out.find("6 pi"), std::string::npos);
}

TEST_F(Cli, ValidateJsonOutput) {
  const CliResult r = run("--json validate --surface " + data("pillowcase.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["euler_characteristic"], 2);
  EXPECT_EQ(j["vertex_classes"].size(), 4u);
}

TEST_F(Cli, InvalidSurfaceExitsTwo) {
  write("bad.json", R"({"polygons":[{"id":"T","vertices":[[0,0],[1,0],[1,1],[0,1]]}],
                       "gluings":[{"a":["T",0],"b":["T",2]}]})");
  const CliResult r = run("validate --surface " + tmp("bad.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("UnmatchedEdge"), std::string::npos) << r.out;
  EXPECT_EQ(run("validate --surface " + tmp("missing.json")).code, 2);
}

TEST_F(Cli, UsageErrorsExitTwoAndNameTheFlag) {
  const CliResult r = run("trace --surface " + data("octagon.json") + " --point 0,0 --direction 1,0 --bogus 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("--bogus"), std::string::npos) << r.out;
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("experiment sideways --surface " + data("octagon.json") + " --config " + data("ns.json")).code, 2);
}

TEST_F(Cli, NoStripsExperimentPasses) {
  const CliResult r = run("experiment no-strips --surface " + data("octagon.json") + " --config " + data("ns.json") +
                    " --report " + tmp("ns.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(tmp("ns.json")));
  EXPECT_EQ(j["verdict"], "PASS");
  EXPECT_LT(j["metrics"]["final"].get<double>(), 0.05);
}

TEST_F(Cli, DensityExperimentPassesAndFailsWithExitThree) {
  CliResult r = run("experiment density --surface " + data("torus_marked.json") + " --config " + data("d.json") +
              " --report " + tmp("d.json"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(nlohmann::json::parse(slurp(tmp("d.json")))["verdict"], "PASS");

  auto cfg = nlohmann::json::parse(slurp(data("d.json")));
  cfg["eta"] = 1e-6;
  write("strict.json", cfg.dump());
  r = run("experiment density --surface " + data("torus_marked.json") + " --config " + tmp("strict.json") +
          " --report " + tmp("strict_report.json"));
  EXPECT_EQ(r.code, 3) << r.out;
  ASSERT_TRUE(fs::exists(tmp("strict_report.json")));
  EXPECT_EQ(nlohmann::json::parse(slurp(tmp("strict_report.json")))["verdict"], "FAIL");
}

TEST_F(Cli, ReportsAreByteIdentical) {
  const std::string runs[] = {
      "experiment density --surface " + data("torus_marked.json") + " --config " + data("d.json") + " --report ",
      "experiment no-strips --surface " + data("octagon.json") + " --config " + data("ns.json") + " --report ",
      "saddles --surface " + data("octagon.json") + " --length 4 --csv ",
      "cover --surface " + data("pillowcase.json") + " --report ",
      "cylinders --surface " + data("octagon.json") + " --direction 1,0 --report ",
      "trace --surface " + data("octagon.json") + " --point 0.1,0.2 --direction 1,0.3 --length 30 --events-csv ",
      "density --surface " + data("torus_marked.json") + " --target-spec " + data("golden_target.json") +
          " --lengths 1.5,2.3,3.7 --report "};
  int i = 0;
  for (const auto& cmd : runs) {
    const std::string a = tmp("a" + std::to_string(i)), b = tmp("b" + std::to_string(i));
    // Verdict-bearing commands may exit 3; only usage or input errors are fatal here.
    ASSERT_NE(run("--quiet " + cmd + a).code, 2) << cmd;
    ASSERT_NE(run("--quiet " + cmd + b).code, 2) << cmd;
    EXPECT_EQ(slurp(a), slurp(b)) << cmd;
    EXPECT_FALSE(slurp(a).empty());
    ++i;
  }
}

TEST_F(Cli, QuietPrintsNothing) {
  EXPECT_TRUE(run("--quiet validate --surface " + data("torus.json")).out.empty());
}

TEST_F(Cli, TraceWritesSvg) {
  const CliResult r = run("trace --surface " + data("octagon.json") + " --point 0,0 --direction 1,0.3 --length 10 --svg " +
                    tmp("t.svg"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string svg = slurp(tmp("t.svg"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
}

TEST_F(Cli, CoverWritesSurfaceAndReport) {
  const CliResult r = run("cover --surface " + data("pillowcase.json") + " --degree auto --monodromy search --out " +
                    tmp("cover.json") + " --report " + tmp("report.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto rep = nlohmann::json::parse(slurp(tmp("report.json")));
  EXPECT_EQ(rep["euler_characteristic"], -2);
  EXPECT_EQ(rep["riemann_hurwitz_residual"], 0);
  // The written cover is itself a valid surface, and the monodromy round-trips.
  EXPECT_EQ(run("validate --surface " + tmp("cover.json")).code, 0);
  std::ofstream(tmp("mono.json")) << rep["monodromy"].dump();
  const CliResult again = run("cover --surface " + data("pillowcase.json") + " --degree 3 --monodromy " + tmp("mono.json") +
                        " --report " + tmp("report2.json"));
  ASSERT_EQ(again.code, 0) << again.out;
  EXPECT_EQ(slurp(tmp("report.json")), slurp(tmp("report2.json")));
  EXPECT_EQ(run("cover --surface " + data("octagon.json")).code, 2);
}

TEST_F(Cli, CylindersFromSaddle) {
  const CliResult r = run("--json cylinders --surface " + data("torus_marked.json") + " --from-saddle 0 --saddle-length 1.5");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["circumference"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(j["d_left"].get<double>() + j["d_right"].get<double>(), 1.0, 1e-9);
  const auto u = nlohmann::json::parse(run("--json cylinders --surface " + data("torus.json") + " --direction 1,0").out);
  EXPECT_EQ(u["d_left"], "unbounded");
}

TEST_F(Cli, SelftestRecordsSeed) {
  const CliResult r = run("--json selftest --surface " + data("octagon.json") + " --seed 7 --count 20");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(nlohmann::json::parse(r.out)["seed"], 7);
}

TEST_F(Cli, HelpListsExactlyTheAcceptedFlags) {
  const std::map<std::string, std::set<std::string>> expected = {
      {"", {"--help", "--tolerance-overrides", "--quiet", "--json"}},
      {"validate", {"--help", "--surface"}},
      {"trace",
       {"--help", "--surface", "--chart", "--point", "--direction", "--length", "--no-stop", "--recurrence",
        "--events-csv", "--svg", "--report"}},
      {"saddles", {"--help", "--surface", "--length", "--base", "--budget", "--spectrum", "--csv"}},
      {"cylinders",
       {"--help", "--surface", "--direction", "--chart", "--point", "--from-saddle", "--saddle-length",
        "--max-length", "--report"}},
      {"density", {"--help", "--surface", "--target-spec", "--lengths", "--window", "--eta", "--report"}},
      {"cover", {"--help", "--surface", "--degree", "--monodromy", "--node-budget", "--out", "--report"}},
      {"experiment", {"--help", "--surface", "--config", "--report"}},
      {"selftest", {"--help", "--surface", "--seed", "--count"}},
  };
  for (const auto& [sub, flags] : expected) {
    const CliResult r = run(sub + " --help");
    EXPECT_EQ(r.code, 0) << sub;
    auto seen = help_flags(r.out);
    // Flags mentioned inside descriptions of other flags.
    if (sub == "cylinders") { EXPECT_TRUE(seen.count("--from-saddle")); }
    EXPECT_EQ(seen, flags) << "subcommand '" << sub << "'";
  }
}

TEST_F(Cli, ToleranceOverrides) {
  write("tol.json", R"({"angle": 1e-6})");
  EXPECT_EQ(run("--tolerance-overrides " + tmp("tol.json") + " validate --surface " + data("octagon.json")).code, 0);
  write("badtol.json", R"({"fuzz": 1})");
  const CliResult r = run("--tolerance-overrides " + tmp("badtol.json") + " validate --surface " + data("octagon.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("fuzz"), std::string::npos);
}
