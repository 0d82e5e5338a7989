#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tvf/sim.hpp"

namespace tvf::config {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;
};

/// `[section]` headers followed by `key = value` lines. `#` and `;` start
/// comments; blank lines are ignored.
struct ConfigFile {
  std::string origin;  // file name used in diagnostics
  std::vector<Section> sections;

  /// Throws ConfigError on malformed lines.
  static ConfigFile parse(std::string_view text, std::string origin = "<config>");
  /// Throws ConfigError if the file cannot be read.
  static ConfigFile load(const std::filesystem::path& path);
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;  // already carries file, line, section and key
};

struct BuildResult {
  std::optional<sim::Scenario> scenario;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
};

/// Relative tolerance for the value/rate consistency check.
inline constexpr double kRateTolerance = 1e-6;

/// Builds a scenario and reports every problem found, not just the first.
/// With `deep_checks` the expressions are also evaluated over the horizon
/// and each rate expression is compared with the derivative of its value.
BuildResult build_scenario(const ConfigFile& file, bool deep_checks = true);

/// Convenience for callers that only want a valid scenario. Throws
/// ConfigError with the first error diagnostic.
sim::Scenario load_scenario(const std::filesystem::path& path);

std::string format(const Diagnostic& d);

}  // namespace tvf::config
