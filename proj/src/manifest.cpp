#include "nldp/manifest.hpp"

#include <array>
#include <cstdio>
#include <memory>

#include <openssl/evp.h>

#include "nldp/csv.hpp"
#include "nldp/error.hpp"

namespace nldp {

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
    throw Error(ErrorKind::invalid_argument, "SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

nlohmann::json to_json(const SimConfig& cfg) {
  return {{"dt_base", cfg.dt_base},
          {"dt_boundary_factor", cfg.dt_boundary_factor},
          {"max_steps", cfg.max_steps},
          {"max_jumps", cfg.max_jumps},
          {"hazard_rule", cfg.hazard_rule == HazardRule::trapezoid ? "trapezoid" : "left_point"},
          {"exit_rule", cfg.exit_rule == ExitRule::first_exterior_sample ? "first_exterior_sample" : "bridge_corrected"}};
}

nlohmann::json to_json(const RunManifest& m) {
  nlohmann::json checks = nlohmann::json::array();
  bool all = true;
  for (const auto& c : m.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}});
    all = all && c.pass;
  }
  return {{"config_digest", {{"algorithm", "sha256"}, {"hex", m.config_digest}}},
          {"master_seed", m.master_seed},
          {"sim_config", to_json(m.cfg)},
          {"parameters", m.parameters},
          {"operation", m.operation},
          {"wall_time_seconds", m.wall_time_seconds},
          {"version", m.version},
          {"checks", checks},
          {"all_pass", all}};
}

std::string manifest_path(const std::string& output_path) { return output_path + ".manifest.json"; }

void write_manifest(const std::string& output_path, const RunManifest& m) {
  write_text_file(manifest_path(output_path), to_json(m).dump(2) + "\n");
}

}  // namespace nldp
