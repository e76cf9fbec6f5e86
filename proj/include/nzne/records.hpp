#pragma once

// JSON-lines record format shared by the emulation engine and the oracles.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace nzne {

struct EmulationRecord {
  std::string schema = "nzne.record.v1";
  std::string mode;  // vmpo | pure | density | sv_trajectory | mg_trajectory
  std::string key;   // resumability hash; empty outside runner context
  double lambda = 0.0;
  long bond_dim = 0;  // 0 for oracle records
  std::map<std::string, double> observables;
  std::vector<double> partial_fidelities;
  double emulation_fidelity = 1.0;
  double log_emulation_fidelity = 0.0;
  std::vector<double> entropy_trace;  // optional, one entry per subcircuit
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  std::map<std::string, double> std_errors;  // trajectory modes only
};

inline nlohmann::json record_to_json(const EmulationRecord& r) {
  nlohmann::json j;
  j["schema"] = r.schema;
  j["mode"] = r.mode;
  if (!r.key.empty()) j["key"] = r.key;
  j["lambda"] = r.lambda;
  j["bond_dim"] = r.bond_dim;
  j["observables"] = r.observables;
  j["partial_fidelities"] = r.partial_fidelities;
  j["emulation_fidelity"] = r.emulation_fidelity;
  j["log_emulation_fidelity"] = r.log_emulation_fidelity;
  if (!r.entropy_trace.empty()) j["entropy_trace"] = r.entropy_trace;
  j["wall_time_s"] = r.wall_time_s;
  if (r.n_samples > 0) {
    j["seed"] = r.seed;
    j["n_samples"] = r.n_samples;
    j["std_errors"] = r.std_errors;
  }
  return j;
}

inline EmulationRecord record_from_json(const nlohmann::json& j) {
  EmulationRecord r;
  r.schema = j.value("schema", "nzne.record.v1");
  r.mode = j.at("mode").get<std::string>();
  r.key = j.value("key", "");
  r.lambda = j.at("lambda").get<double>();
  r.bond_dim = j.value("bond_dim", 0L);
  if (j.contains("observables")) {
    r.observables = j["observables"].get<std::map<std::string, double>>();
  }
  if (j.contains("partial_fidelities")) {
    r.partial_fidelities = j["partial_fidelities"].get<std::vector<double>>();
  }
  r.emulation_fidelity = j.value("emulation_fidelity", 1.0);
  r.log_emulation_fidelity = j.value("log_emulation_fidelity", 0.0);
  if (j.contains("entropy_trace")) {
    r.entropy_trace = j["entropy_trace"].get<std::vector<double>>();
  }
  r.wall_time_s = j.value("wall_time_s", 0.0);
  r.seed = j.value("seed", std::uint64_t{0});
  r.n_samples = j.value("n_samples", std::uint64_t{0});
  if (j.contains("std_errors")) {
    r.std_errors = j["std_errors"].get<std::map<std::string, double>>();
  }
  return r;
}

inline void append_record_jsonl(const std::string& path,
                                const EmulationRecord& r) {
  std::ofstream f(path, std::ios::app);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << record_to_json(r).dump() << '\n';
}

inline std::vector<EmulationRecord> read_records_jsonl(const std::string& path) {
  std::ifstream f(path);
  std::vector<EmulationRecord> out;
  if (!f) return out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

// Stable FNV-1a over a canonical identity string; used to skip completed
// grid points on resume.
inline std::string record_key(const std::string& circuit_id,
                              const std::string& mode, double lambda,
                              long bond_dim, std::uint64_t seed = 0,
                              std::uint64_t n_samples = 0) {
  std::ostringstream ss;
  ss.precision(17);
  ss << circuit_id << '|' << mode << '|' << lambda << '|' << bond_dim << '|'
     << seed << '|' << n_samples;
  const std::string s = ss.str();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

}  // namespace nzne
