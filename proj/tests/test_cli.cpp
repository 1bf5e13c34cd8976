#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "config.hpp"
#include "ionmodes/error.hpp"

namespace fs = std::filesystem;
using namespace ionmodes;
using namespace ionmodes::cli;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "ionmodes");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ionmodes_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  [[nodiscard]] std::string out(const std::string& sub = "out") const { return (dir_ / sub).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpListsDefaults) {
  const Invocation r = invoke({"berry", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--T-us"), std::string::npos);
  EXPECT_NE(r.out.find("[780]"), std::string::npos);
  EXPECT_NE(r.out.find("[canonical]"), std::string::npos);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, BerryWritesTracesAndSummary) {
  const Invocation r = invoke({"berry", "--family", "canonical", "--T-us", "780", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("berry: dphi = ", 0), 0u);
  EXPECT_NE(r.out.find(" pi (canonical, T = 780 us)"), std::string::npos);
  for (const char* f : {"berry_enclosing.csv", "berry_non_enclosing.csv", "berry.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "berry.json"));
  EXPECT_EQ(j["winding"][0], 1);
  EXPECT_DOUBLE_EQ(j["berry_phase_rad"][0].get<double>(), kPi);
  for (const auto& entry : fs::directory_iterator(dir_ / "out")) {
    EXPECT_NE(entry.path().extension(), ".tmp");
  }
}

TEST_F(CliTest, SurfacesAreSwapSymmetric) {
  const Invocation r = invoke({"surfaces", "--grid", "21", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(dir_ / "out" / "surfaces.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "sA,sB,dk1,dk2,dk3");
  std::vector<std::array<double, 5>> rows;
  while (std::getline(in, line)) {
    std::array<double, 5> v{};
    std::istringstream ls(line);
    char comma = 0;
    ls >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >> v[4];
    rows.push_back(v);
  }
  ASSERT_EQ(rows.size(), 21u * 21u);
  for (std::size_t i = 0; i < 21; ++i) {
    for (std::size_t j = 0; j < 21; ++j) {
      const auto& a = rows[i * 21 + j];
      const auto& b = rows[j * 21 + i];
      EXPECT_EQ(a[0], b[1]);
      for (int k = 2; k < 5; ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
    }
  }
}

TEST_F(CliTest, DeterministicOutputs) {
  ASSERT_EQ(invoke({"spectrum", "--seed", "7", "--out-dir", out("a")}).code, 0);
  ASSERT_EQ(invoke({"spectrum", "--seed", "7", "--out-dir", out("b")}).code, 0);
  ASSERT_EQ(invoke({"spectrum", "--seed", "8", "--out-dir", out("c")}).code, 0);
  const std::string a = slurp(dir_ / "a" / "spectrum.csv");
  EXPECT_EQ(a, slurp(dir_ / "b" / "spectrum.csv"));
  EXPECT_NE(a, slurp(dir_ / "c" / "spectrum.csv"));
  ASSERT_EQ(invoke({"exchange", "--shots", "200", "--seed", "3", "--out-dir", out("a")}).code, 0);
  ASSERT_EQ(invoke({"exchange", "--shots", "200", "--seed", "3", "--out-dir", out("b")}).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "exchange.csv"), slurp(dir_ / "b" / "exchange.csv"));
}

TEST_F(CliTest, ConfigOverridesPropagate) {
  ASSERT_EQ(invoke({"surfaces", "--grid", "5", "--out-dir", out("default")}).code, 0);
  const auto cfg = write("alpha.json", R"({"alpha": -0.5, "surfaces": {"grid": 5}})");
  ASSERT_EQ(invoke({"surfaces", "--config", cfg.string(), "--out-dir", out("alpha")}).code, 0);
  ASSERT_EQ(invoke({"surfaces", "--grid", "5", "--alpha", "-0.5", "--out-dir", out("flag")}).code, 0);
  const std::string by_config = slurp(dir_ / "alpha" / "surfaces.csv");
  EXPECT_NE(slurp(dir_ / "default" / "surfaces.csv"), by_config);
  EXPECT_EQ(slurp(dir_ / "flag" / "surfaces.csv"), by_config);
}

TEST_F(CliTest, FlagsOverrideConfig) {
  const auto cfg = write("c.json", R"({"berry": {"T_us": 100, "waypoints": 64}, "out_dir": "ignored"})");
  const Invocation r = invoke({"berry", "--config", cfg.string(), "--T-us", "200", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "berry.json"));
  EXPECT_EQ(j["T_us"], 200.0);
}

TEST_F(CliTest, ConfigErrorsExitTwoWithFieldPath) {
  const auto unknown = write("u.json", R"({"alpah": -0.3})");
  Invocation r = invoke({"surfaces", "--config", unknown.string(), "--out-dir", out()});
  EXPECT_EQ(r.code, kExitConfig);
  auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"], "config");
  EXPECT_NE(j["message"].get<std::string>().find("$.alpah"), std::string::npos);

  const auto mismatch = write("m.json", R"({"sweep": {"waypoints": "many"}})");
  r = invoke({"sweep", "--config", mismatch.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("$.sweep.waypoints"), std::string::npos);

  const auto malformed = write("bad.json", R"({"alpha": )");
  r = invoke({"surfaces", "--config", malformed.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("malformed"), std::string::npos);

  EXPECT_EQ(invoke({"surfaces", "--config", (dir_ / "nope.json").string()}).code, kExitConfig);
  EXPECT_EQ(invoke({"teleport"}).code, kExitConfig);
  EXPECT_EQ(invoke({"berry", "--family", "spiral", "--out-dir", out()}).code, kExitConfig);
  EXPECT_EQ(invoke({"sweep", "--T-us", "100:50:10", "--out-dir", out()}).code, kExitConfig);
  EXPECT_EQ(invoke({"fit-spectrum", "--out-dir", out()}).code, kExitConfig);
}

TEST_F(CliTest, NumericalFailureExitsThree) {
  ASSERT_EQ(invoke({"spectrum", "--noise", "3", "--out-dir", out()}).code, 0);
  const Invocation r = invoke({"fit-spectrum", "--input", out() + "/spectrum.csv", "--trials", "0", "--out-dir", out()});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "branch-assignment");
}

TEST_F(CliTest, SweepTable) {
  const Invocation r = invoke({"sweep", "--T-us", "100:300:100", "--n", "100", "--threads", "3", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(slurp(dir_ / "out" / "sweep.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "T_us,dphi_rad,dphi_over_pi,flagged");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST_F(CliTest, FitRoundTrips) {
  ASSERT_EQ(invoke({"spectrum", "--seed", "1", "--out-dir", out()}).code, 0);
  Invocation r = invoke({"fit-spectrum", "--input", out() + "/spectrum.csv", "--trials", "100", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(dir_ / "out" / "fit_spectrum.json"));
  EXPECT_NEAR(j["parameters"]["alpha"].get<double>(), -0.383, 0.004);
  EXPECT_NEAR(j["parameters"]["c_per_mV"].get<double>(), -1.202, 0.01);
  EXPECT_TRUE(j["ci68"].contains("alpha"));

  ASSERT_EQ(invoke({"berry", "--T-us", "300", "--out-dir", out()}).code, 0);
  r = invoke({"fit-fringes", "--input", out() + "/berry_enclosing.csv", "--input-b",
              out() + "/berry_non_enclosing.csv", "--trials", "100", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto berry = nlohmann::json::parse(slurp(dir_ / "out" / "berry.json"));
  j = nlohmann::json::parse(slurp(dir_ / "out" / "fit_fringes.json"));
  EXPECT_NEAR(j["parameters"]["dphi"].get<double>(), berry["dphi_rad"].get<double>(), 1e-9);

  r = invoke({"fit-fringes", "--input", out() + "/berry_enclosing.csv", "--trials", "0", "--out-dir", out()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("fit-fringes: frequency = ", 0), 0u);
}

TEST(Config, EmptyObjectGivesDefaults) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.model.alpha, -0.383);
  EXPECT_EQ(c.model.delta_f_kHz, 3.299);
  EXPECT_EQ(c.berry.T_us, 780.0);
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(Config, RangeParsing) {
  EXPECT_EQ(parse_range_us("100:300:100"), (std::vector<double>{100, 200, 300}));
  EXPECT_EQ(parse_range_us("780"), std::vector<double>{780});
  EXPECT_EQ(parse_range_us("100:1800:100").size(), 18u);
  EXPECT_THROW(parse_range_us("1:2"), Error);
  EXPECT_THROW(parse_range_us("a:b:c"), Error);
  EXPECT_THROW(parse_range_us("-5"), Error);
}
