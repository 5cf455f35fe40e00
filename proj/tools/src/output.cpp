#include "eccm_cli/cli.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

namespace eccm::cli {

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json level_json(std::size_t level, const std::optional<PapSolution>& sol,
                const JammingChannel& channel) {
  json entry = {{"level", level}, {"jamming_power", channel.grid()[level]},
                {"feasible", sol.has_value()}};
  if (!sol) return entry;
  entry["x_star"] = vector_json(sol->x_star.x);
  entry["pi_star"] = vector_json(sol->pi_star.pi);
  entry["radar_utility"] = sol->radar_value;
  entry["jammer_utility"] = sol->jammer_value;
  entry["multipliers"] = vector_json(sol->multipliers);
  entry["kkt_residual"] = sol->kkt_residual;
  entry["newton_steps"] = sol->newton_steps;
  if (sol->affine_coefficients) {
    entry["affine"] = {{"c3", (*sol->affine_coefficients)[0]},
                       {"c4", (*sol->affine_coefficients)[1]}};
  }
  return entry;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

void base_columns(const TraceRecord& r, std::string& line) {
  line += fmt::format("{},{},{},{},{},{},{},{}", r.t, r.n, num(r.lambda_max), num(r.snr_bar),
                      r.j_star, num(r.radar_utility), num(r.jammer_utility),
                      num(r.kkt_residual));
}

// Schema helpers: each appends a message when the check fails.
struct Checker {
  std::vector<std::string> errors;

  bool has(const json& obj, const std::string& ptr, const char* key) {
    if (obj.is_object() && obj.contains(key)) return true;
    errors.push_back(fmt::format("{}/{}: missing", ptr, key));
    return false;
  }
  void finite(const json& obj, const std::string& ptr, const char* key) {
    if (!has(obj, ptr, key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      errors.push_back(fmt::format("{}/{}: expected a finite number", ptr, key));
    }
  }
  void index(const json& obj, const std::string& ptr, const char* key, std::size_t bound) {
    if (!has(obj, ptr, key)) return;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() || v.get<std::size_t>() >= bound) {
      errors.push_back(fmt::format("{}/{}: expected a level index below {}", ptr, key, bound));
    }
  }
  void array(const json& obj, const std::string& ptr, const char* key, std::size_t size,
             bool positive) {
    if (!has(obj, ptr, key)) return;
    const auto& v = obj.at(key);
    if (!v.is_array() || v.size() != size) {
      errors.push_back(fmt::format("{}/{}: expected an array of {} numbers", ptr, key, size));
      return;
    }
    for (std::size_t i = 0; i < size; ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>()) ||
          (positive && !(v[i].get<double>() > 0.0))) {
        errors.push_back(fmt::format("{}/{}/{}: invalid entry", ptr, key, i));
      }
    }
  }
  void solution(const json& entry, const std::string& ptr, std::size_t m) {
    array(entry, ptr, "x_star", m, false);
    array(entry, ptr, "pi_star", m, true);
    array(entry, ptr, "multipliers", m, false);
    finite(entry, ptr, "radar_utility");
    finite(entry, ptr, "jammer_utility");
    finite(entry, ptr, "kkt_residual");
    if (entry.contains("affine")) {
      finite(entry.at("affine"), ptr + "/affine", "c3");
      finite(entry.at("affine"), ptr + "/affine", "c4");
    }
  }
};

}  // namespace

json structure_json(const StructureReport& report) {
  json out = {{"tp2", report.tp2.holds}, {"tail_convex", report.tail.holds}};
  if (report.tp2.witness) {
    const auto& w = *report.tp2.witness;
    out["tp2_witness"] = {{"i", w[0]}, {"j", w[1]}, {"m", w[2]}, {"n", w[3]}};
  }
  if (report.tail.witness) {
    out["tail_witness"] = {{"tail", report.tail.witness->tail},
                           {"level", report.tail.witness->level}};
  }
  return out;
}

json solution_json(const PapOutcome& outcome, const JammingChannel& channel,
                   CovarianceSummary sigma, StrategyClass mode) {
  json levels = json::array();
  for (const auto& l : outcome.levels) levels.push_back(level_json(l.level, l.solution, channel));
  return {{"sigma", sigma.value()},
          {"mode", to_string(mode)},
          {"grid", channel.grid().levels()},
          {"levels", std::move(levels)},
          {"winner", level_json(outcome.best.j_star, outcome.best, channel)}};
}

std::vector<std::string> validate_solution_json(const json& doc) {
  Checker c;
  if (!doc.is_object()) return {"/: expected an object"};
  c.finite(doc, "", "sigma");
  if (c.has(doc, "", "mode")) {
    const auto& mode = doc.at("mode");
    if (!mode.is_string() || (mode != "full" && mode != "relaxed" && mode != "affine")) {
      c.errors.push_back("/mode: expected full, relaxed or affine");
    }
  }
  std::size_t m = 0;
  if (c.has(doc, "", "grid")) {
    if (!doc.at("grid").is_array() || doc.at("grid").empty()) {
      c.errors.push_back("/grid: expected a non-empty array");
    } else {
      m = doc.at("grid").size();
    }
  }
  if (c.has(doc, "", "levels")) {
    const auto& levels = doc.at("levels");
    if (!levels.is_array() || levels.size() != m) {
      c.errors.push_back(fmt::format("/levels: expected {} entries", m));
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        const std::string ptr = fmt::format("/levels/{}", i);
        c.index(levels[i], ptr, "level", m);
        c.finite(levels[i], ptr, "jamming_power");
        if (c.has(levels[i], ptr, "feasible")) {
          if (!levels[i].at("feasible").is_boolean()) {
            c.errors.push_back(ptr + "/feasible: expected a boolean");
          } else if (levels[i].at("feasible").get<bool>()) {
            c.solution(levels[i], ptr, m);
          }
        }
      }
    }
  }
  if (c.has(doc, "", "winner")) {
    c.index(doc.at("winner"), "/winner", "level", std::max<std::size_t>(m, 1));
    c.solution(doc.at("winner"), "/winner", m);
  }
  return c.errors;
}

void write_trace_csv(const SimulationTrace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    std::string line;
    base_columns(r, line);
    out << line << '\n';
  }
}

void write_mismatch_csv(const MismatchTrace& trace, std::ostream& out) {
  out << kTraceHeader << ",radar_degradation,jammer_degradation\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    std::string line;
    base_columns(trace.driving.records[i], line);
    line += fmt::format(",{},{}", num(trace.records[i].radar_degradation),
                        num(trace.records[i].jammer_degradation));
    out << line << '\n';
  }
}

void write_compare_csv(const ComparisonTrace& trace, std::ostream& out) {
  out << kTraceHeader << ",utility_gap\n";
  for (std::size_t i = 0; i < trace.first.records.size(); ++i) {
    std::string line;
    base_columns(trace.first.records[i], line);
    line += "," + num(trace.utility_gap[i]);
    out << line << '\n';
  }
}

}  // namespace eccm::cli
