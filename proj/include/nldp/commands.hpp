#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace nldp {

enum ExitCode : int { kExitPass = 0, kExitValidation = 2, kExitSimulation = 3, kExitCheckFailed = 4 };

/// Command-line inputs shared by the subcommands. Unset values fall back to the
/// config's "run" section, then to built-in defaults.
struct CommandOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::string> points;
  std::optional<std::int64_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> h;
  std::optional<double> alpha;
  std::string which;
  int workers = 1;
};

inline constexpr std::int64_t kDefaultPaths = 10'000;
inline constexpr double kDefaultMesh = 1.0 / 64.0;
inline constexpr int kValidationSamples = 2000;

/// Each command writes its CSV and a manifest beside it and returns an ExitCode.
/// Failures print "error: <category> <Kind>: <message>" to `err`; precondition
/// failures leave no output file behind.
int cmd_solve(const CommandOptions& opts, std::ostream& err);
/// which: prop23, resolvent_identity, exit_scaling, kato_decay, alpha_decay.
int cmd_verify(const CommandOptions& opts, std::ostream& err);
int cmd_oracle(const CommandOptions& opts, std::ostream& err);
int cmd_compare(const CommandOptions& opts, std::ostream& err);

}  // namespace nldp
