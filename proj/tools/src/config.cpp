#include "eccm_cli/cli.hpp"

#include "eccm/presets.hpp"
#include "logging.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace eccm::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& ptr, const std::string& what) {
  throw ConfigError(fmt::format("{}: {}", ptr.empty() ? "/" : ptr, what));
}

void allow_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(ptr, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) fail(ptr + "/" + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key)) fail(ptr + "/" + key, "missing required key");
  return obj.at(key);
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ptr, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& ptr) {
  const double v = number(j, ptr);
  if (!(v > 0.0)) fail(ptr, "expected a positive number");
  return v;
}

int count(const json& j, const std::string& ptr) {
  if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<long long>() > 1000000) {
    fail(ptr, "expected an integer >= 1");
  }
  return static_cast<int>(j.get<long long>());
}

// Matrix as an array of rows, or {"rows", "cols", "data"} in row-major order,
// or {"rows", "cols", "diagonal"} with a scalar or per-entry diagonal.
Eigen::MatrixXd matrix(const json& j, const std::string& ptr) {
  if (j.is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) fail(ptr, "matrix has no rows");
    if (!j[0].is_array()) fail(ptr + "/0", "expected an array of numbers");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& row = j[static_cast<std::size_t>(r)];
      const std::string rp = fmt::format("{}/{}", ptr, r);
      if (!row.is_array()) fail(rp, "expected an array of numbers");
      if (static_cast<Eigen::Index>(row.size()) != cols) {
        fail(rp, fmt::format("row has {} entries, expected {}", row.size(), cols));
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = number(row[static_cast<std::size_t>(c)], fmt::format("{}/{}", rp, c));
      }
    }
    return m;
  }
  allow_keys(j, ptr, {"rows", "cols", "data", "diagonal"});
  const int rows = count(require(j, ptr, "rows"), ptr + "/rows");
  const int cols = count(require(j, ptr, "cols"), ptr + "/cols");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (j.contains("data") == j.contains("diagonal")) {
    fail(ptr, "give exactly one of \"data\" or \"diagonal\"");
  }
  if (j.contains("data")) {
    const auto& data = j.at("data");
    if (!data.is_array() || data.size() != static_cast<std::size_t>(rows) * cols) {
      fail(ptr + "/data", fmt::format("expected {} numbers", static_cast<long>(rows) * cols));
    }
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const std::size_t k = static_cast<std::size_t>(r) * cols + c;
        m(r, c) = number(data[k], fmt::format("{}/data/{}", ptr, k));
      }
    }
    return m;
  }
  const auto& diag = j.at("diagonal");
  const int n = std::min(rows, cols);
  if (diag.is_array()) {
    if (diag.size() != static_cast<std::size_t>(n)) {
      fail(ptr + "/diagonal", fmt::format("expected {} numbers", n));
    }
    for (int i = 0; i < n; ++i) {
      m(i, i) = number(diag[static_cast<std::size_t>(i)], fmt::format("{}/diagonal/{}", ptr, i));
    }
  } else {
    m.diagonal().setConstant(number(diag, ptr + "/diagonal"));
  }
  return m;
}

void expect_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                  const std::string& ptr) {
  if (m.rows() != rows || m.cols() != cols) {
    fail(ptr, fmt::format("matrix is {}x{}, expected {}x{}", m.rows(), m.cols(), rows, cols));
  }
}

TrackingModel model(const json& j, const std::string& ptr) {
  if (!j.is_object()) fail(ptr, "expected an object");
  const auto& kind_json = require(j, ptr, "kind");
  if (!kind_json.is_string()) fail(ptr + "/kind", "expected \"barrage\" or \"deception\"");
  const std::string kind = kind_json.get<std::string>();
  if (kind == "barrage") {
    allow_keys(j, ptr, {"kind", "T", "A", "Q0", "C"});
  } else if (kind == "deception") {
    allow_keys(j, ptr, {"kind", "T", "A", "Q0", "B1", "B2", "C1", "C2"});
  } else {
    fail(ptr + "/kind", "expected \"barrage\" or \"deception\"");
  }
  const double period = positive(require(j, ptr, "T"), ptr + "/T");
  const Eigen::MatrixXd a = matrix(require(j, ptr, "A"), ptr + "/A");
  const Eigen::Index n = a.rows();
  expect_shape(a, n, n, ptr + "/A");
  const Eigen::MatrixXd q = matrix(require(j, ptr, "Q0"), ptr + "/Q0");
  expect_shape(q, n, n, ptr + "/Q0");
  try {
    if (kind == "barrage") {
      const Eigen::MatrixXd c = matrix(require(j, ptr, "C"), ptr + "/C");
      if (c.cols() != n) expect_shape(c, c.rows(), n, ptr + "/C");
      return KinematicsModel(a, q, c, period);
    }
    const Eigen::MatrixXd b1 = matrix(require(j, ptr, "B1"), ptr + "/B1");
    const Eigen::MatrixXd b2 = matrix(require(j, ptr, "B2"), ptr + "/B2");
    const Eigen::MatrixXd c1 = matrix(require(j, ptr, "C1"), ptr + "/C1");
    const Eigen::MatrixXd c2 = matrix(require(j, ptr, "C2"), ptr + "/C2");
    const Eigen::Index k = b2.rows();
    expect_shape(b2, k, k, ptr + "/B2");
    expect_shape(b1, k, n, ptr + "/B1");
    expect_shape(c1, c1.rows(), n, ptr + "/C1");
    expect_shape(c2, c1.rows(), k, ptr + "/C2");
    return DeceptionModel(a, b1, b2, c1, c2, q, period);
  } catch (const std::invalid_argument& e) {
    fail(ptr, e.what());
  }
}

Eigen::MatrixXd stochastic_rows(const Eigen::MatrixXd& raw, const std::string& ptr,
                                const char* what) {
  Eigen::MatrixXd p = raw;
  bool rescaled = false;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      if (p(r, c) < 0.0 || p(r, c) > 1.0) {
        fail(fmt::format("{}/{}/{}", ptr, r, c), fmt::format("{} entry outside [0, 1]", what));
      }
    }
    const double sum = p.row(r).sum();
    const double defect = std::abs(sum - 1.0);
    if (defect > presets::kPublishedRowDefect) {
      fail(fmt::format("{}/{}", ptr, r), fmt::format("{} row sums to {}", what, sum));
    }
    if (defect > kProbabilityTolerance) rescaled = true;
    p.row(r) /= sum;
  }
  if (rescaled) logger()->warn("{}: rows of {} rescaled to sum to one", ptr, what);
  return p;
}

struct ChannelSection {
  JammingChannel channel;
  std::optional<JammingChannel> jammer_belief;
};

ChannelSection channel(const json& j, const std::string& ptr) {
  allow_keys(j, ptr, {"grid", "P", "P_hat", "Delta"});
  const auto& grid_json = require(j, ptr, "grid");
  if (!grid_json.is_array() || grid_json.empty()) fail(ptr + "/grid", "expected a non-empty array");
  std::vector<double> levels;
  for (std::size_t i = 0; i < grid_json.size(); ++i) {
    levels.push_back(positive(grid_json[i], fmt::format("{}/grid/{}", ptr, i)));
    if (i > 0 && levels[i] < levels[i - 1]) {
      fail(fmt::format("{}/grid/{}", ptr, i), "grid must be non-decreasing");
    }
  }
  const auto m = static_cast<Eigen::Index>(levels.size());
  const Eigen::MatrixXd raw = matrix(require(j, ptr, "P"), ptr + "/P");
  expect_shape(raw, m, m, ptr + "/P");
  JammingGrid grid(levels);
  ChannelSection out{JammingChannel(grid, stochastic_rows(raw, ptr + "/P", "P")), std::nullopt};

  if (j.contains("P_hat") && j.contains("Delta")) fail(ptr, "give at most one of P_hat or Delta");
  if (j.contains("P_hat")) {
    const Eigen::MatrixXd hat = matrix(j.at("P_hat"), ptr + "/P_hat");
    expect_shape(hat, m, m, ptr + "/P_hat");
    out.jammer_belief = JammingChannel(grid, stochastic_rows(hat, ptr + "/P_hat", "P_hat"));
  } else if (j.contains("Delta")) {
    const Eigen::MatrixXd delta = matrix(j.at("Delta"), ptr + "/Delta");
    expect_shape(delta, m, m, ptr + "/Delta");
    out.jammer_belief =
        JammingChannel(grid, stochastic_rows(raw + delta, ptr + "/Delta", "P + Delta"));
  }
  return out;
}

}  // namespace

StrategyClass parse_mode(std::string_view mode) {
  if (mode == "full") return StrategyClass::Full;
  if (mode == "relaxed") return StrategyClass::Relaxed;
  if (mode == "affine") return StrategyClass::Affine;
  throw ConfigError(fmt::format("unknown mode '{}'; expected full, relaxed or affine", mode));
}

SimulationConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the offending character.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto before = text.substr(0, offset);
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(before.begin(), before.end(), '\n'));
    const auto last_nl = before.rfind('\n');
    const std::size_t column = last_nl == std::string_view::npos ? offset + 1 : offset - last_nl;
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(fmt::format("line {}, column {}: {}", line, column, what));
  }

  allow_keys(doc, "", {"model", "targets", "channel", "utility", "simulation"});
  if (doc.contains("model") == doc.contains("targets")) {
    fail("", "give exactly one of \"model\" or \"targets\"");
  }
  std::vector<WeightedTarget> targets;
  if (doc.contains("model")) {
    targets.push_back({model(doc.at("model"), "/model"), 1.0});
  } else {
    const auto& list = doc.at("targets");
    if (!list.is_array() || list.empty()) fail("/targets", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ptr = fmt::format("/targets/{}", i);
      allow_keys(list[i], ptr, {"model", "weight"});
      const double weight = number(require(list[i], ptr, "weight"), ptr + "/weight");
      if (weight < 0.0) fail(ptr + "/weight", "weight must be nonnegative");
      targets.push_back({model(require(list[i], ptr, "model"), ptr + "/model"), weight});
    }
  }

  ChannelSection ch = channel(require(doc, "", "channel"), "/channel");

  const auto& util = require(doc, "", "utility");
  allow_keys(util, "/utility", {"c1", "c2"});
  const UtilityParams params(positive(require(util, "/utility", "c1"), "/utility/c1"),
                             positive(require(util, "/utility", "c2"), "/utility/c2"));

  SimulationConfig config(std::move(targets), ch.channel, params);
  int scenario = 1;
  if (doc.contains("simulation")) {
    const auto& sim = doc.at("simulation");
    const std::string ptr = "/simulation";
    allow_keys(sim, ptr, {"slow_horizon", "intermediate_per_slow", "initial_sigma",
                          "strategy_mode", "mismatch_scenario"});
    if (sim.contains("slow_horizon")) {
      config.slow_horizon = count(sim.at("slow_horizon"), ptr + "/slow_horizon");
    }
    if (sim.contains("intermediate_per_slow")) {
      config.intermediate_per_slow =
          count(sim.at("intermediate_per_slow"), ptr + "/intermediate_per_slow");
    }
    if (sim.contains("initial_sigma")) {
      config.initial_sigma = positive(sim.at("initial_sigma"), ptr + "/initial_sigma");
    }
    if (sim.contains("strategy_mode")) {
      const auto& mode = sim.at("strategy_mode");
      if (!mode.is_string() || (mode != "full" && mode != "affine")) {
        fail(ptr + "/strategy_mode", "expected \"full\" or \"affine\"");
      }
      config.strategy_mode = parse_mode(mode.get<std::string>());
    }
    if (sim.contains("mismatch_scenario")) {
      const auto& s = sim.at("mismatch_scenario");
      if (!s.is_number_integer() || (s != 1 && s != 2)) {
        fail(ptr + "/mismatch_scenario", "expected 1 or 2");
      }
      scenario = s.get<int>();
    }
  }
  if (ch.jammer_belief) config.mismatch = MismatchSpec{*ch.jammer_belief, scenario};

  try {
    config.validate();
  } catch (const std::invalid_argument& e) {
    fail("", e.what());
  }
  return config;
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace eccm::cli
