#pragma once

// Scenario runner: one JSON config file describes one reproducible run.
//
//   {
//     "scenario": "<kind>",
//     "hbar": 1.0,
//     "seed": 42,
//     "output": {"dir": "out", "formats": ["csv", "json"]},
//     "checks": true,
//     "parameters": { ...kind specific... }
//   }
//
// Every parameter is validated before any computation starts. Outputs are
// written only inside the output directory, plus a manifest.json echoing the
// config, seed, version and wall time.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wvpath/errors.hpp"

namespace wvpath {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  exit_ok = 0,
  exit_validation = 1,
  exit_computation = 2,
  exit_invariant = 3,
};

/// Config problem; `field()` is the dotted path of the first offending entry.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ScenarioInfo {
  std::string kind;
  std::string description;
  nlohmann::json example;
};

/// The seven scenario kinds, in a fixed order.
std::vector<ScenarioInfo> list_scenarios();

struct RunOverrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;  // "csv" or "json"
};

struct ScenarioConfig {
  std::string kind;
  double hbar = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
  bool csv = true;
  bool json = true;
  bool checks = true;
  nlohmann::json parameters;
  nlohmann::json source;  // the config with overrides applied, echoed in the manifest
};

/// Parses the top level and validates every kind-specific parameter.
ScenarioConfig parse_config(const nlohmann::json& j, const RunOverrides& overrides = {});
ScenarioConfig load_config(const std::filesystem::path& file, const RunOverrides& overrides = {});

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct RunResult {
  int exit_code = exit_ok;
  std::string message;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<CheckResult> checks;
  nlohmann::json summary;
};

/// Runs an already validated config. Module errors come back as
/// exit_computation with the scenario named in the message.
RunResult run(const ScenarioConfig& config);

}  // namespace wvpath
