#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kausal/complexity.hpp"
#include "kausal/errors.hpp"
#include "kausal/prng.hpp"

namespace kausal {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the canonical config text; stamped into every report.
uint64_t fnv1a64(const std::string& s);

// One parsed experiment invocation. Keys are flat, section-qualified
// ("thresholds.eps_zero"); the parser rejects keys outside the experiment's
// declared set, duplicate keys, and malformed lines.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::string> params;

  bool has(const std::string& key) const { return params.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& def) const;
  uint64_t get_u64(const std::string& key, uint64_t def) const;     // InvalidConfig on junk
  double get_double(const std::string& key, double def) const;     // InvalidConfig on junk
  Seed seed() const;             // "seed": decimal u64 or 64-hex-char key; default 1
  Thresholds thresholds() const; // [thresholds] overrides on the defaults
  std::string compressor_id() const;  // [compressor] id; only "lz77b" is bundled
  std::string canonical() const;      // experiment line + sorted key=value lines
  std::string hash_hex() const;       // fnv1a64(canonical()) as 16 hex chars
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& experiment);
ExperimentConfig parse_config_file(const std::string& path, const std::string& experiment);
std::vector<std::string> experiment_names();

// Everything an experiment produced. report_json is the full deterministic
// payload (identical config => identical bytes); wall-clock time is kept out
// of it and written to a separate timings file.
struct RunReport {
  std::string experiment;
  std::string version;
  std::string config_hash;
  bool pass = false;
  std::vector<std::pair<std::string, bool>> verdicts;
  std::string report_json;
  std::vector<std::pair<std::string, std::string>> tables;  // file name -> CSV text
  double total_seconds = 0.0;
};

RunReport run(const ExperimentConfig& cfg);

// Writes report.json, timings.json, and the CSV tables into out_dir (created
// if needed). Each file lands atomically via a rename.
void write_report(const RunReport& r, const std::string& out_dir);

// Byte-compares every golden file against its counterpart in report_dir,
// ignoring timings.json. Missing or differing files raise GoldenMismatch with
// a unified diff of the first mismatch.
void verify_golden(const std::string& report_dir, const std::string& golden_dir);

}  // namespace kausal
