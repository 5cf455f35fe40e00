#include "eccm/presets.hpp"
#include "eccm_cli/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eccm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = ECCM_CONFIG_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("eccm_cli_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + std::to_string(counter++) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "eccm");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json config_json(const std::string& name) { return json::parse(slurp(kConfigs / name)); }

std::string toy_config() {
  return R"({
    "model": {"kind": "barrage", "T": 1, "A": [[0]], "Q0": [[1]], "C": [[1]]},
    "channel": {"grid": [1], "P": [[1]]},
    "utility": {"c1": 2, "c2": 1},
    "simulation": {"slow_horizon": 1, "intermediate_per_slow": 2, "initial_sigma": 1,
                   "strategy_mode": "full"}
  })";
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST(ParseConfig, ShippedConfigsMatchPresets) {
  const SimulationConfig b = cli::load_config(kConfigs / "barrage.json");
  const SimulationConfig ref = presets::barrage_config();
  EXPECT_EQ(b.channel.probabilities(), ref.channel.probabilities());
  EXPECT_EQ(b.channel.grid().levels(), ref.channel.grid().levels());
  EXPECT_EQ(b.params.c1(), 100.0);
  EXPECT_EQ(b.params.c2(), 1e4);
  EXPECT_EQ(b.slow_horizon, 4);
  EXPECT_EQ(b.intermediate_per_slow, 8);
  const auto& km = std::get<KinematicsModel>(b.targets.front().model);
  const auto& kref = std::get<KinematicsModel>(ref.targets.front().model);
  EXPECT_EQ(km.a(), kref.a());
  EXPECT_EQ(km.q(), kref.q());
  EXPECT_EQ(km.c(), kref.c());

  const SimulationConfig d = cli::load_config(kConfigs / "deception.json");
  const auto& dm = std::get<DeceptionModel>(d.targets.front().model);
  const SimulationConfig dcfg = presets::deception_config();
  const auto& dref = std::get<DeceptionModel>(dcfg.targets.front().model);
  EXPECT_EQ(dm.augmented_transition(), dref.augmented_transition());
  EXPECT_EQ(dm.augmented_measurement(), dref.augmented_measurement());

  const SimulationConfig m = cli::load_config(kConfigs / "mismatch.json");
  ASSERT_TRUE(m.mismatch);
  EXPECT_EQ(m.mismatch->scenario, 1);
  EXPECT_EQ(m.mismatch->jammer_belief.probabilities(),
            presets::reference_jammer_belief().probabilities());

  EXPECT_EQ(cli::load_config(kConfigs / "barrage_affine.json").strategy_mode,
            StrategyClass::Affine);
}

TEST(ParseConfig, SyntaxErrorsCarryLineAndColumn) {
  try {
    cli::parse_config("{\n  \"model\": {\n    \"kind\": barrage\n  }\n}");
    FAIL() << "expected ConfigError";
  } catch (const cli::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, ValidationErrorsCarryPointer) {
  auto expect_pointer = [](const json& doc, const std::string& pointer) {
    try {
      cli::parse_config(doc.dump());
      ADD_FAILURE() << "expected ConfigError for " << pointer;
    } catch (const cli::ConfigError& e) {
      EXPECT_EQ(std::string(e.what()).rfind(pointer, 0), 0u) << e.what();
    }
  };
  json doc = config_json("barrage.json");
  doc["channel"]["P"][1][2] = 1.5;
  expect_pointer(doc, "/channel/P/1/2");

  doc = config_json("barrage.json");
  doc["channel"]["P"][0][0] = 0.5;  // row sum 1.1122
  expect_pointer(doc, "/channel/P/0");

  doc = config_json("barrage.json");
  doc["utility"]["c1"] = -1;
  expect_pointer(doc, "/utility/c1");

  doc = config_json("barrage.json");
  doc["utility"]["extra"] = 1;
  expect_pointer(doc, "/utility/extra");

  doc = config_json("barrage.json");
  doc["model"].erase("C");
  expect_pointer(doc, "/model");

  doc = config_json("barrage.json");
  doc["simulation"]["strategy_mode"] = "relaxed";
  expect_pointer(doc, "/simulation/strategy_mode");

  doc = config_json("barrage.json");
  doc["channel"]["grid"] = {1, 2, 3};
  expect_pointer(doc, "/channel");
}

TEST(ParseConfig, RowDefectWithinToleranceIsRenormalized) {
  json doc = config_json("barrage.json");
  doc["channel"]["P"][0][0] = 0.3880;  // row sum 1.0002
  const SimulationConfig c = cli::parse_config(doc.dump());
  EXPECT_NEAR(c.channel.probabilities().row(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(c.channel.prob(0, 0), 0.3880 / 1.0002, 1e-15);
}

TEST(ParseConfig, MatrixForms) {
  json doc = config_json("barrage.json");
  doc["model"]["Q0"] = {{"rows", 6}, {"cols", 6}, {"diagonal", {1, 2, 3, 4, 5, 6}}};
  doc["model"]["C"] = {{"rows", 6}, {"cols", 6}, {"data", json::array()}};
  for (int i = 0; i < 36; ++i) doc["model"]["C"]["data"].push_back(i % 7 == 0 ? 1.0 : 0.0);
  const SimulationConfig c = cli::parse_config(doc.dump());
  const auto& m = std::get<KinematicsModel>(c.targets.front().model);
  EXPECT_EQ(m.q()(5, 5), 6.0);
  EXPECT_TRUE(m.c().isIdentity());
}

TEST(ParseConfig, ParseMode) {
  EXPECT_EQ(cli::parse_mode("full"), StrategyClass::Full);
  EXPECT_EQ(cli::parse_mode("relaxed"), StrategyClass::Relaxed);
  EXPECT_EQ(cli::parse_mode("affine"), StrategyClass::Affine);
  EXPECT_THROW(cli::parse_mode("other"), cli::ConfigError);
}

TEST(Check, ReferenceChannelPasses) {
  const RunResult r = run_cli({"check", "--config", (kConfigs / "barrage.json").string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_TRUE(doc.at("tp2").get<bool>());
  EXPECT_TRUE(doc.at("tail_convex").get<bool>());
  EXPECT_FALSE(doc.contains("tp2_witness"));
}

TEST(Check, ViolationExitsWithWitness) {
  TempDir dir;
  json doc = json::parse(toy_config());
  doc["channel"] = {{"grid", {1, 2}}, {"P", {{0.1, 0.9}, {0.9, 0.1}}}};
  const fs::path cfg = dir.write("bad.json", doc.dump());
  const RunResult r = run_cli({"check", "--config", cfg.string()});
  EXPECT_EQ(r.code, cli::kExitStructure);
  const json out = json::parse(r.out);
  EXPECT_FALSE(out.at("tp2").get<bool>());
  EXPECT_EQ(out.at("tp2_witness"), json({{"i", 1}, {"j", 0}, {"m", 1}, {"n", 0}}));
}

TEST(Check, SeededCrossCheck) {
  const RunResult r =
      run_cli({"check", "--config", (kConfigs / "barrage.json").string(), "--seed", "7"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json cc = json::parse(r.out).at("covariance_cross_check");
  EXPECT_NEAR(cc.at("are_lambda_max").get<double>(), 2.817354021023964, 1e-8);
  EXPECT_LE(cc.at("relative_error").get<double>(), 0.05);
}

TEST(Check, MalformedConfigIsAnError) {
  TempDir dir;
  const fs::path cfg = dir.write("broken.json", "{\"model\": [1, 2,\n");
  const RunResult r = run_cli({"check", "--config", cfg.string()});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("config error"), std::string::npos);
  EXPECT_NE(r.err.find("line"), std::string::npos);
  EXPECT_EQ(run_cli({"check", "--config", (dir.path() / "missing.json").string()}).code,
            cli::kExitError);
}

TEST(Solve, ReferenceDocumentValidates) {
  const RunResult r =
      run_cli({"solve", "--config", (kConfigs / "barrage.json").string(), "--sigma", "1"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_TRUE(cli::validate_solution_json(doc).empty());
  EXPECT_EQ(doc.at("winner").at("level").get<int>(), 0);
  EXPECT_EQ(doc.at("levels").size(), 4u);
  EXPECT_NEAR(doc.at("levels")[0].at("radar_utility").get<double>(), 65.02028048330413, 1e-8);
  EXPECT_EQ(doc.at("mode"), "full");
}

TEST(Solve, AffineReportsCoefficients) {
  const RunResult r = run_cli({"solve", "--config", (kConfigs / "barrage.json").string(),
                               "--sigma", "1", "--mode", "affine"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_TRUE(cli::validate_solution_json(doc).empty());
  EXPECT_EQ(doc.at("winner").at("level").get<int>(), 1);
  const json& aff = doc.at("levels")[1].at("affine");
  EXPECT_NEAR(aff.at("c3").get<double>(), 0.45096093135921556, 1e-8);
  EXPECT_NEAR(aff.at("c4").get<double>(), 0.7673554454506016, 1e-8);
}

TEST(Solve, SingleLevelToy) {
  TempDir dir;
  const fs::path cfg = dir.write("toy.json", toy_config());
  const RunResult r = run_cli({"solve", "--config", cfg.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc.at("levels")[0].at("x_star")[0].get<double>(), 0.0, 1e-10);
  EXPECT_NEAR(doc.at("levels")[0].at("radar_utility").get<double>(), -1.0, 1e-12);
}

TEST(Solve, RejectsBadArguments) {
  const std::string cfg = (kConfigs / "barrage.json").string();
  EXPECT_EQ(run_cli({"solve", "--config", cfg, "--sigma", "-1"}).code, cli::kExitError);
  EXPECT_EQ(run_cli({"solve", "--config", cfg, "--mode", "greedy"}).code, cli::kExitError);
  EXPECT_EQ(run_cli({}).code, cli::kExitError);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk);
}

TEST(SolutionSchema, DetectsProblems) {
  const RunResult r =
      run_cli({"solve", "--config", (kConfigs / "barrage.json").string(), "--sigma", "1"});
  json doc = json::parse(r.out);
  doc.erase("winner");
  doc["levels"][0]["x_star"] = "nope";
  EXPECT_GE(cli::validate_solution_json(doc).size(), 2u);
}

TEST(Simulate, CsvShape) {
  const RunResult r = run_cli({"simulate", "--config", (kConfigs / "barrage.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind(std::string(cli::kTraceHeader) + "\n", 0), 0u);
  EXPECT_EQ(count_lines(r.out), 33u);
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  std::getline(rows, line);
  EXPECT_EQ(line.rfind("1,1,", 0), 0u) << line;
}

TEST(Simulate, ByteDeterministicThroughFiles) {
  TempDir dir;
  const std::string cfg = (kConfigs / "deception.json").string();
  const fs::path a = dir.path() / "a.csv";
  const fs::path b = dir.path() / "b.csv";
  ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--out", a.string()}).code, cli::kExitOk);
  ASSERT_EQ(run_cli({"simulate", "--config", cfg, "--out", b.string()}).code, cli::kExitOk);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Simulate, UnwritableOutputIsAnError) {
  TempDir dir;
  const RunResult r = run_cli({"simulate", "--config", (kConfigs / "barrage.json").string(),
                               "--out", (dir.path() / "no" / "such" / "dir.csv").string()});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Mismatch, ZeroErrorGivesZeroDegradation) {
  TempDir dir;
  json doc = config_json("mismatch.json");
  doc["channel"]["Delta"] = json::array();
  for (int i = 0; i < 4; ++i) doc["channel"]["Delta"].push_back({0, 0, 0, 0});
  doc["simulation"]["slow_horizon"] = 1;
  doc["simulation"]["intermediate_per_slow"] = 3;
  const fs::path cfg = dir.write("zero.json", doc.dump());
  const RunResult r = run_cli({"mismatch", "--config", cfg.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  EXPECT_NE(line.find("radar_degradation"), std::string::npos);
  int n = 0;
  while (std::getline(rows, line)) {
    ++n;
    EXPECT_EQ(line.substr(line.size() - 4), ",0,0") << line;
  }
  EXPECT_EQ(n, 3);
}

TEST(Mismatch, NeedsJammerEstimate) {
  const RunResult r = run_cli({"mismatch", "--config", (kConfigs / "barrage.json").string()});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("config error"), std::string::npos);
}

TEST(Compare, IdenticalConfigsHaveZeroGap) {
  const std::string cfg = (kConfigs / "barrage.json").string();
  const RunResult r = run_cli({"compare", "--config", cfg, cfg});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  EXPECT_NE(line.find("utility_gap"), std::string::npos);
  int n = 0;
  while (std::getline(rows, line)) {
    ++n;
    EXPECT_EQ(line.substr(line.size() - 2), ",0") << line;
  }
  EXPECT_EQ(n, 32);
  EXPECT_EQ(run_cli({"compare", "--config", cfg}).code, cli::kExitError);
}
