#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nldp/pathsim.hpp"

namespace nldp {

inline constexpr const char* kVersion = "nldp 0.1.0";

struct CheckSummary {
  std::string name;
  bool pass = true;
  double value = 0.0;
};

/// Everything needed to rerun an output file: the config digest, seed,
/// simulation parameters and the operation, plus timing and check outcomes.
struct RunManifest {
  std::string config_digest;
  std::uint64_t master_seed = 0;
  SimConfig cfg;
  /// Operation-specific parameters (paths, h, alpha, workers, ...).
  nlohmann::json parameters = nlohmann::json::object();
  std::string operation;
  double wall_time_seconds = 0.0;
  std::string version = kVersion;
  std::vector<CheckSummary> checks;
};

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

nlohmann::json to_json(const SimConfig& cfg);
nlohmann::json to_json(const RunManifest& m);

std::string manifest_path(const std::string& output_path);
/// Writes the manifest next to `output_path`.
void write_manifest(const std::string& output_path, const RunManifest& m);

}  // namespace nldp
