#pragma once

// JSON and CSV serialization. CSV values are printed with 6 decimals;
// JSON carries full double precision. Requires nlohmann/json.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "triway/experiments.hpp"
#include "triway/model.hpp"
#include "triway/region.hpp"
#include "triway/report.hpp"
#include "triway/sim.hpp"

namespace triway {

using Json = nlohmann::ordered_json;

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

// ---- configuration ----------------------------------------------------------

inline Json permutation_to_json(const UserPermutation& p) {
  return Json{{"canonical_to_original", p.mapping()}, {"identity", p.is_identity()}};
}

/// Reads {"g12", "g13", "g23", "power"}; canonicalizes and validates.
inline LoadedConfig config_from_json(const Json& j) {
  auto number = [&](const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("config: missing key '") + key + "'");
    if (!j.at(key).is_number()) throw ValidationError(std::string("config: key '") + key + "' must be a number");
    return j.at(key).get<double>();
  };
  return make_config(RawGains{number("g12"), number("g13"), number("g23")}, number("power"));
}

/// Flat object in canonical labels plus the permutation that produced them.
inline Json config_to_json(const LoadedConfig& c) {
  const auto& g = c.config.gains;
  return Json{{"g12", g.h3},
              {"g13", g.h2},
              {"g23", g.h1},
              {"power", c.config.power},
              {"permutation", permutation_to_json(c.permutation)}};
}

inline Json gains_to_json(const ChannelGains& g) { return Json{{"h1", g.h1}, {"h2", g.h2}, {"h3", g.h3}}; }

inline ChannelGains gains_from_json(const Json& j) {
  return {j.at("h1").get<double>(), j.at("h2").get<double>(), j.at("h3").get<double>()};
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LoadedConfig load_config_file(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

// ---- bound report -------------------------------------------------------------

inline Json to_json(const BoundReport& r) {
  const auto& c = r.cutset;
  return Json{{"config", {{"h1", r.config.gains.h1},
                          {"h2", r.config.gains.h2},
                          {"h3", r.config.gains.h3},
                          {"power", r.config.power}}},
              {"cutset",
               {{"out1", c.out1}, {"in1", c.in1}, {"out2", c.out2}, {"in2", c.in2}, {"out3", c.out3}, {"in3", c.in3}}},
              {"lemma1", r.lemma1},
              {"lemma2", r.lemma2},
              {"theorem2_upper", r.theorem2_upper},
              {"tightened_upper", r.tightened_upper},
              {"lp_upper", r.lp_upper},
              {"sum_upper", r.sum_upper},
              {"achievable_lower", r.achievable_lower},
              {"gap", r.gap},
              {"relay_lattice_rate", r.relay_lattice_rate},
              {"relay_direct_rate", r.relay_direct_rate},
              {"relay_improves", r.relay_improves}};
}

inline BoundReport bound_report_from_json(const Json& j) {
  BoundReport r;
  r.config.gains = gains_from_json(j.at("config"));
  r.config.power = j.at("config").at("power").get<double>();
  const auto& c = j.at("cutset");
  r.cutset = {c.at("out1").get<double>(), c.at("in1").get<double>(), c.at("out2").get<double>(),
              c.at("in2").get<double>(),  c.at("out3").get<double>(), c.at("in3").get<double>()};
  r.lemma1 = j.at("lemma1").get<double>();
  r.lemma2 = j.at("lemma2").get<double>();
  r.theorem2_upper = j.at("theorem2_upper").get<double>();
  r.tightened_upper = j.at("tightened_upper").get<double>();
  r.lp_upper = j.at("lp_upper").get<double>();
  r.sum_upper = j.at("sum_upper").get<double>();
  r.achievable_lower = j.at("achievable_lower").get<double>();
  r.gap = j.at("gap").get<double>();
  r.relay_lattice_rate = j.at("relay_lattice_rate").get<double>();
  r.relay_direct_rate = j.at("relay_direct_rate").get<double>();
  r.relay_improves = j.at("relay_improves").get<bool>();
  return r;
}

inline constexpr const char* kBoundReportCsvHeader =
    "h1,h2,h3,power,cutset_out1,cutset_in1,cutset_out2,cutset_in2,cutset_out3,cutset_in3,"
    "lemma1,lemma2,theorem2_upper,tightened_upper,lp_upper,sum_upper,achievable_lower,gap,"
    "relay_lattice_rate,relay_direct_rate,relay_improves";

inline std::string to_csv(const BoundReport& r) {
  const auto& c = r.cutset;
  const double vals[] = {r.config.gains.h1, r.config.gains.h2, r.config.gains.h3, r.config.power,
                         c.out1, c.in1, c.out2, c.in2, c.out3, c.in3,
                         r.lemma1, r.lemma2, r.theorem2_upper, r.tightened_upper, r.lp_upper, r.sum_upper,
                         r.achievable_lower, r.gap, r.relay_lattice_rate, r.relay_direct_rate};
  std::string out = std::string(kBoundReportCsvHeader) + "\n";
  for (double v : vals) out += fixed6(v) + ",";
  out += r.relay_improves ? "1\n" : "0\n";
  return out;
}

// ---- region / LP ----------------------------------------------------------------

inline Json to_json(const RateTuple& t) {
  Json j = Json::object();
  for (std::size_t k = 0; k < 6; ++k) j[RateTuple::names[k]] = t.r[k];
  return j;
}

inline Json to_json(const RateRegion& region) {
  Json arr = Json::array();
  for (const auto& c : region.constraints) arr.push_back(Json{{"label", c.label}, {"coeffs", c.coeffs}, {"rhs", c.rhs}});
  return Json{{"variables", RateTuple::names}, {"constraints", arr}};
}

inline Json to_json(const LpSolution& s) {
  return Json{{"status", to_string(s.status)},
              {"optimal_value", s.optimal_value},
              {"optimizer", to_json(s.optimizer)},
              {"tight_constraints", s.tight_constraints},
              {"duals", s.duals}};
}

// ---- simulation -------------------------------------------------------------------

inline constexpr const char* kTraceCsvHeader = "i,x1,x2,x3,y1,y2,y3,z1,z2,z3";

/// z columns hold the noise actually added at each receiver.
inline std::string trace_to_csv(const TransmissionTrace& t) {
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (std::size_t i = 0; i < t.n; ++i) {
    out += std::to_string(i + 1);
    for (const auto* seq : {&t.x, &t.y})
      for (const auto& v : *seq) out += "," + fixed6(v[i]);
    for (std::size_t u = 0; u < 3; ++u) out += "," + fixed6(t.noise_scale[u] * t.noise[u][i]);
    out += "\n";
  }
  return out;
}

inline Json to_json(const GenieVerdict& v) {
  return Json{{"max_rel_error", v.max_rel_error}, {"n", v.n}, {"seed", v.seed}, {"variant", to_string(v.variant)}};
}

// ---- experiments ----------------------------------------------------------------

inline Json spec_to_json(const SweepSpec& spec) {
  Json j;
  if (const auto* fixed = std::get_if<RawGains>(&spec.gains)) {
    j["gains"] = Json{{"g12", fixed->g12}, {"g13", fixed->g13}, {"g23", fixed->g23}};
  } else {
    const auto& e = std::get<RandomEnsemble>(spec.gains);
    j["gains"] = Json{{"ensemble", e.size}, {"stddev", e.stddev}};
  }
  j["powers"] = spec.power_grid();
  j["seed"] = spec.seed;
  Json b = Json::array();
  for (BoundKind k : spec.bounds) b.push_back(std::string(to_string(k)));
  j["bounds"] = b;
  j["use_lp"] = spec.use_lp;
  return j;
}

inline std::string sweep_csv_header(const SweepTable& t) {
  std::string h = "config,h1,h2,h3,power";
  for (BoundKind k : t.columns) h += "," + std::string(to_string(k));
  return h + ",lower,upper,gap";
}

/// Header-only when the table has no rows.
inline std::string to_csv(const SweepTable& t) {
  std::string out = sweep_csv_header(t) + "\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.config_index) + "," + fixed6(r.gains.h1) + "," + fixed6(r.gains.h2) + "," +
           fixed6(r.gains.h3) + "," + fixed6(r.power);
    for (double v : r.values) out += "," + fixed6(v);
    out += "," + fixed6(r.lower) + "," + fixed6(r.upper) + "," + fixed6(r.gap) + "\n";
  }
  return out;
}

inline Json to_json(const SweepTable& t) {
  Json cols = Json::array();
  for (BoundKind k : t.columns) cols.push_back(std::string(to_string(k)));
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back(Json{{"config", r.config_index},
                        {"gains", gains_to_json(r.gains)},
                        {"power", r.power},
                        {"values", r.values},
                        {"lower", r.lower},
                        {"upper", r.upper},
                        {"gap", r.gap}});
  return Json{{"columns", cols}, {"rows", rows}};
}

inline SweepTable sweep_table_from_json(const Json& j) {
  SweepTable t;
  for (const auto& c : j.at("columns")) {
    const auto k = bound_kind_from_string(c.get<std::string>());
    if (!k) throw std::invalid_argument("unknown bound column '" + c.get<std::string>() + "'");
    t.columns.push_back(*k);
  }
  for (const auto& r : j.at("rows")) {
    SweepRow row;
    row.config_index = r.at("config").get<std::size_t>();
    row.gains = gains_from_json(r.at("gains"));
    row.power = r.at("power").get<double>();
    row.values = r.at("values").get<std::vector<double>>();
    row.lower = r.at("lower").get<double>();
    row.upper = r.at("upper").get<double>();
    row.gap = r.at("gap").get<double>();
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Json to_json(const GapStatistics& s) {
  return Json{{"ensemble_size", s.ensemble_size},
              {"evaluations", s.evaluations},
              {"min_gap", s.min_gap},
              {"max_gap", s.max_gap},
              {"mean_gap", s.mean_gap},
              {"violations", s.violations},
              {"worst", {{"gains", gains_to_json(s.worst.gains)}, {"power", s.worst.power}}}};
}

inline GapStatistics gap_statistics_from_json(const Json& j) {
  GapStatistics s;
  s.ensemble_size = j.at("ensemble_size").get<std::size_t>();
  s.evaluations = j.at("evaluations").get<std::size_t>();
  s.min_gap = j.at("min_gap").get<double>();
  s.max_gap = j.at("max_gap").get<double>();
  s.mean_gap = j.at("mean_gap").get<double>();
  s.violations = j.at("violations").get<std::size_t>();
  s.worst.gains = gains_from_json(j.at("worst").at("gains"));
  s.worst.power = j.at("worst").at("power").get<double>();
  return s;
}

inline constexpr const char* kGapCsvHeader = "ensemble_size,evaluations,min_gap,max_gap,mean_gap,violations,worst_h1,worst_h2,worst_h3,worst_power";

inline std::string to_csv(const GapStatistics& s) {
  return std::string(kGapCsvHeader) + "\n" + std::to_string(s.ensemble_size) + "," + std::to_string(s.evaluations) +
         "," + fixed6(s.min_gap) + "," + fixed6(s.max_gap) + "," + fixed6(s.mean_gap) + "," +
         std::to_string(s.violations) + "," + fixed6(s.worst.gains.h1) + "," + fixed6(s.worst.gains.h2) + "," +
         fixed6(s.worst.gains.h3) + "," + fixed6(s.worst.power) + "\n";
}

/// Wraps an experiment result with the sweep settings, seed and version string.
inline Json envelope(const char* experiment, const SweepSpec& spec, Json result) {
  return Json{{"experiment", experiment},
              {"version", kVersion},
              {"seed", spec.seed},
              {"spec", spec_to_json(spec)},
              {"result", std::move(result)}};
}

enum class ExportFormat { csv, json };

inline void export_report(const SweepTable& t, const SweepSpec& spec, ExportFormat fmt,
                          const std::filesystem::path& path) {
  write_text_file(path, fmt == ExportFormat::csv ? to_csv(t) : envelope("sweep", spec, to_json(t)).dump(2) + "\n");
}

inline void export_report(const GapStatistics& s, const SweepSpec& spec, ExportFormat fmt,
                          const std::filesystem::path& path) {
  write_text_file(path,
                  fmt == ExportFormat::csv ? to_csv(s) : envelope("gap-ensemble", spec, to_json(s)).dump(2) + "\n");
}

}  // namespace triway
