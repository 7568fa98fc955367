#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdl/analysis.hpp"
#include "fdl/sim.hpp"

namespace fdl {

using Json = nlohmann::json;

struct ConfigError {
  std::string path; // dotted config path, e.g. "controller.H1"
  std::string message;
};

/// Raised when a config fails validation; carries every violation found.
class ConfigInvalid : public std::runtime_error {
 public:
  explicit ConfigInvalid(std::vector<ConfigError> errors);
  [[nodiscard]] const std::vector<ConfigError>& errors() const { return errors_; }

 private:
  std::vector<ConfigError> errors_;
};

/// Raised for unreadable or unparseable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  Json source; // after overrides, as echoed into run metadata
  Scenario scenario;
  RunConfig run;
  AnalysisSettings analysis;
  std::string output_dir;
};

/// Reads and parses a JSON file. Throws IoError.
Json read_json_file(const std::filesystem::path& path);

/// "a.b.c=VALUE": VALUE is parsed as JSON, falling back to a plain string.
/// Intermediate objects are created as needed. Throws std::invalid_argument.
void apply_override(Json& config, const std::string& assignment);

/// Every violation in the document, with its config path. Empty means valid.
std::vector<ConfigError> validate_config(const Json& config);

/// Builds the runnable scenario. Throws ConfigInvalid.
ScenarioConfig load_config(const Json& config);

} // namespace fdl
