#pragma once

// Config parsing (strict JSON: unknown keys rejected with their path) and the
// machine-readable outputs: scan CSVs, fidelity report and run manifest.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "stimclone/analysis.hpp"
#include "stimclone/experiment.hpp"
#include "stimclone/version.hpp"

namespace stimclone::io {

using json = nlohmann::json;
using detection::Basis;
using detection::Scheme;
using experiment::ExperimentConfig;
using experiment::RunMode;
using experiment::ScanResult;

// -- parsing helpers ----------------------------------------------------------

inline void reject_unknown_keys(const json& obj, const std::string& path,
                                const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError(path.empty() ? key + ": unknown key" : path + "." + key + ": unknown key");
    }
  }
}

inline double get_number(const json& obj, const std::string& path, const std::string& key,
                         double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(path + key + ": must be a number");
  return obj[key].get<double>();
}

inline Basis parse_basis(const std::string& name, const std::string& path) {
  if (name == "vh") return Basis::LinearVH;
  if (name == "45") return Basis::Linear45;
  if (name == "circ") return Basis::Circular;
  throw ConfigError(path + ": unknown basis '" + name + "' (expected vh|45|circ)");
}

inline RunMode parse_mode(const std::string& name, const std::string& path) {
  if (name == "exact") return RunMode::Exact;
  if (name == "mc") return RunMode::MonteCarlo;
  if (name == "both") return RunMode::Both;
  throw ConfigError(path + ": unknown mode '" + name + "' (expected exact|mc|both)");
}

inline std::optional<Jones> parse_polarization(const json& value, const std::string& path) {
  if (value.is_string()) {
    const std::string name = value.get<std::string>();
    if (name == "basis") return std::nullopt;  // follow the scanned basis
    if (name == "v") return jones_v();
    if (name == "h") return jones_h();
    if (name == "+45") return jones_diag();
    if (name == "-45") return jones_antidiag();
    if (name == "circ_l") return jones_circ_left();
    if (name == "circ_r") return jones_circ_right();
    throw ConfigError(path + ": unknown polarization '" + name + "'");
  }
  if (value.is_array() && value.size() == 2) {
    Jones j;
    for (int i = 0; i < 2; ++i) {
      if (!value[i].is_array() || value[i].size() != 2 || !value[i][0].is_number() ||
          !value[i][1].is_number()) {
        throw ConfigError(path + ": polarization components must be [re, im] pairs");
      }
      j[i] = Complex{value[i][0].get<double>(), value[i][1].get<double>()};
    }
    return j;
  }
  throw ConfigError(path + ": expected a polarization name or [[re,im],[re,im]]");
}

inline std::vector<double> parse_delay_grid(const json& value, const std::string& path) {
  std::vector<double> grid;
  if (value.is_array()) {
    for (const auto& v : value) {
      if (!v.is_number()) throw ConfigError(path + ": entries must be numbers");
      grid.push_back(v.get<double>());
    }
    return grid;
  }
  if (value.is_object()) {
    reject_unknown_keys(value, path, {"min", "max", "points"});
    for (const char* key : {"min", "max", "points"}) {
      if (!value.contains(key)) throw ConfigError(path + "." + key + ": required");
    }
    const double lo = value["min"].get<double>();
    const double hi = value["max"].get<double>();
    const int n = value["points"].get<int>();
    if (n < 1) throw ConfigError(path + ".points: must be >= 1");
    if (n == 1) return {lo};
    for (int i = 0; i < n; ++i) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return grid;
  }
  throw ConfigError(path + ": expected an array of delays or {min, max, points}");
}

inline ExperimentConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(root, "", {"pdc", "input", "overlap", "bases", "detector", "delay_grid_fs",
                                 "rep_rate_hz", "duration_per_point_s", "seed", "mode",
                                 "fidelity_gamma"});
  ExperimentConfig cfg;

  if (root.contains("pdc")) {
    const json& p = root["pdc"];
    if (!p.is_object()) throw ConfigError("pdc: must be an object");
    reject_unknown_keys(p, "pdc", {"kappa_t", "order", "dephasing"});
    cfg.pdc.kappa_t = get_number(p, "pdc.", "kappa_t", cfg.pdc.kappa_t);
    if (p.contains("order")) {
      if (!p["order"].is_number_integer()) throw ConfigError("pdc.order: must be an integer");
      cfg.pdc.order = p["order"].get<int>();
    }
    cfg.pdc.dephasing = get_number(p, "pdc.", "dephasing", cfg.pdc.dephasing);
  }

  if (root.contains("input")) {
    const json& in = root["input"];
    if (!in.is_object()) throw ConfigError("input: must be an object");
    reject_unknown_keys(in, "input", {"polarization", "photon_number"});
    if (in.contains("polarization")) {
      cfg.input_polarization = parse_polarization(in["polarization"], "input.polarization");
    }
    if (in.contains("photon_number")) {
      const json& pn = in["photon_number"];
      if (pn.is_string()) {
        if (pn.get<std::string>() != "exactly_one") {
          throw ConfigError("input.photon_number: expected 'exactly_one' or {poisson_mean}");
        }
        cfg.photon_number = pdc::PhotonNumberDistribution::exactly_one();
      } else if (pn.is_object()) {
        reject_unknown_keys(pn, "input.photon_number", {"poisson_mean"});
        if (!pn.contains("poisson_mean") || !pn["poisson_mean"].is_number()) {
          throw ConfigError("input.photon_number.poisson_mean: required number");
        }
        cfg.photon_number = pdc::PhotonNumberDistribution::poisson(pn["poisson_mean"].get<double>());
      } else {
        throw ConfigError("input.photon_number: expected 'exactly_one' or {poisson_mean}");
      }
    }
  }

  if (root.contains("overlap")) {
    const json& ov = root["overlap"];
    if (!ov.is_object()) throw ConfigError("overlap: must be an object");
    reject_unknown_keys(ov, "overlap", {"sigma_input_fs", "sigma_dc_fs"});
    cfg.overlap.sigma_input_fs = get_number(ov, "overlap.", "sigma_input_fs", cfg.overlap.sigma_input_fs);
    cfg.overlap.sigma_dc_fs = get_number(ov, "overlap.", "sigma_dc_fs", cfg.overlap.sigma_dc_fs);
  }

  if (root.contains("bases")) {
    if (!root["bases"].is_array() || root["bases"].empty()) {
      throw ConfigError("bases: must be a non-empty array");
    }
    cfg.bases.clear();
    for (const auto& b : root["bases"]) {
      if (!b.is_string()) throw ConfigError("bases: entries must be strings");
      cfg.bases.push_back(parse_basis(b.get<std::string>(), "bases"));
    }
  }

  if (root.contains("detector")) {
    const json& det = root["detector"];
    if (!det.is_object()) throw ConfigError("detector: must be an object");
    reject_unknown_keys(det, "detector", {"efficiency", "dark_count_prob"});
    cfg.detector.efficiency = get_number(det, "detector.", "efficiency", cfg.detector.efficiency);
    cfg.detector.dark_count_prob =
        get_number(det, "detector.", "dark_count_prob", cfg.detector.dark_count_prob);
  }

  if (root.contains("delay_grid_fs")) {
    cfg.delay_grid_fs = parse_delay_grid(root["delay_grid_fs"], "delay_grid_fs");
  }
  cfg.rep_rate_hz = get_number(root, "", "rep_rate_hz", cfg.rep_rate_hz);
  cfg.duration_per_point_s = get_number(root, "", "duration_per_point_s", cfg.duration_per_point_s);
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned() &&
        !(root["seed"].is_number_integer() && root["seed"].get<std::int64_t>() >= 0)) {
      throw ConfigError("seed: must be a non-negative integer");
    }
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("mode")) {
    if (!root["mode"].is_string()) throw ConfigError("mode: must be a string");
    cfg.mode = parse_mode(root["mode"].get<std::string>(), "mode");
  }
  if (root.contains("fidelity_gamma")) {
    if (!root["fidelity_gamma"].is_number()) throw ConfigError("fidelity_gamma: must be a number");
    cfg.fidelity_gamma = root["fidelity_gamma"].get<double>();
  }

  cfg.validate();
  return cfg;
}

// Accepts either a bare config document or a manifest written by this tool
// (whose embedded "config" snapshot is then used), so a manifest can be fed
// back to reproduce a run.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  if (root.is_object() && root.contains("tool") && root.contains("config")) {
    return config_from_json(root["config"]);
  }
  return config_from_json(root);
}

// -- serialization ------------------------------------------------------------

inline json jones_to_json(const Jones& j) {
  return json::array({json::array({j[0].real(), j[0].imag()}),
                      json::array({j[1].real(), j[1].imag()})});
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json root;
  root["pdc"] = {{"kappa_t", cfg.pdc.kappa_t}, {"order", cfg.pdc.order},
                 {"dephasing", cfg.pdc.dephasing}};
  json input;
  input["polarization"] = cfg.input_polarization ? jones_to_json(*cfg.input_polarization)
                                                 : json("basis");
  if (cfg.photon_number.kind == pdc::PhotonNumberDistribution::Kind::ExactlyOne) {
    input["photon_number"] = "exactly_one";
  } else {
    input["photon_number"] = {{"poisson_mean", cfg.photon_number.mean}};
  }
  root["input"] = input;
  root["overlap"] = {{"sigma_input_fs", cfg.overlap.sigma_input_fs},
                     {"sigma_dc_fs", cfg.overlap.sigma_dc_fs}};
  json bases = json::array();
  for (Basis b : cfg.bases) bases.push_back(detection::basis_name(b));
  root["bases"] = bases;
  root["detector"] = {{"efficiency", cfg.detector.efficiency},
                      {"dark_count_prob", cfg.detector.dark_count_prob}};
  root["delay_grid_fs"] = cfg.delay_grid_fs;
  root["rep_rate_hz"] = cfg.rep_rate_hz;
  root["duration_per_point_s"] = cfg.duration_per_point_s;
  root["seed"] = cfg.seed;
  root["mode"] = experiment::mode_name(cfg.mode);
  if (cfg.fidelity_gamma) root["fidelity_gamma"] = *cfg.fidelity_gamma;
  return root;
}

inline std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

inline std::string scan_csv_name(Basis basis) {
  return std::string("scan_") + detection::basis_name(basis) + ".csv";
}

// One row per (delay, scheme). sampled_count is 0 in exact mode;
// trigger_count is the expected trigger tally in exact mode and the sampled
// one otherwise.
inline void write_scan_csv(std::ostream& out, const ScanResult& scan, Basis basis) {
  const bool sampled = scan.config.mode != RunMode::Exact;
  out << "delay_fs,gamma,scheme,basis,expected_rate_hz,expected_count,sampled_count,trigger_count\n";
  for (Scheme scheme : experiment::kSchemeOrder) {
    for (const auto& rec : scan.records_for(basis, scheme)) {
      out << format_double(rec.delay_fs) << ',' << format_double(rec.gamma) << ','
          << detection::scheme_name(scheme) << ',' << detection::basis_name(basis) << ','
          << format_double(rec.expected_rate_hz) << ',' << format_double(rec.expected_count) << ','
          << rec.sampled_count << ',';
      if (sampled) {
        out << rec.sampled_trigger_count;
      } else {
        out << format_double(rec.expected_trigger_count);
      }
      out << '\n';
    }
  }
}

inline json fidelity_report_to_json(const analysis::FidelityReport& report) {
  json out;
  out["optimal_fidelity"] = report.optimal;
  out["anticlone_fidelity"] = report.anticlone;
  out["universality"] = {{"spread", report.spread},
                         {"spread_sigma", report.spread_sigma},
                         {"threshold", report.spread_threshold},
                         {"universal", report.universal}};
  json per_basis = json::array();
  for (const auto& bf : report.per_basis) {
    per_basis.push_back({{"basis", detection::basis_name(bf.basis)},
                         {"ratio", bf.ratio.ratio},
                         {"sigma_ratio", bf.ratio.sigma},
                         {"baseline_rate_hz", bf.ratio.baseline_rate_hz},
                         {"peak_rate_hz", bf.ratio.peak_rate_hz},
                         {"fidelity", bf.fidelity},
                         {"sigma_fidelity", bf.sigma}});
  }
  out["per_basis"] = per_basis;
  return out;
}

inline json make_manifest(const ExperimentConfig& cfg, const std::string& command,
                          const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "stimclone";
  m["version"] = kVersion;
  m["schema_version"] = kOutputSchemaVersion;
  m["command"] = command;
  m["seed"] = cfg.seed;
  m["mode"] = experiment::mode_name(cfg.mode);
  m["config"] = config_to_json(cfg);
  m["outputs"] = outputs;
  return m;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path.string());
  out << content;
}

}  // namespace stimclone::io
