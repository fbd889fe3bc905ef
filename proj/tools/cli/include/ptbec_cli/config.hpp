#pragma once

// Scenario configuration: a flat "key = value" document, '#' starts a comment.
// Every scenario owns a fixed key set with defaults; anything else is rejected.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ptbec::cli {

enum class Scenario {
  Fig1NonOsciSweep,
  Fig2BlochTrajectories,
  Fig3SteadyDistributions,
  Fig4BbrSteadyComponents,
  Fig5PurityMaps,
  CustomPropagate,
  CustomSteady,
};

const std::vector<Scenario>& all_scenarios();
std::string_view scenario_name(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);
std::string_view scenario_summary(Scenario s);

/// Parse or validation failure. line() is 0 when the problem is not tied to
/// one line (missing key, conflict between two keys, bad override).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& message, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

using Value = std::variant<double, long, std::string, std::vector<double>>;

struct Entry {
  Value value;
  int line = 0;  ///< 0 when the value is a default
};

class ScenarioConfig {
 public:
  Scenario scenario() const noexcept { return scenario_; }

  double real(const std::string& key) const;
  int integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const std::vector<double>& list(const std::string& key) const;
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  bool user_set(const std::string& key) const;

  /// Microscopic U, resolved from whichever of U or g the document set.
  double interaction_U() const;
  /// Macroscopic g = U (N0 - 1), resolved the same way.
  double interaction_g() const;

  /// Resolved keys in the scenario's documented order.
  std::vector<std::pair<std::string, std::string>> echo() const;

  /// Replaces the value of `tolerance` (the --tolerance flag).
  void override_tolerance(double tol);

  friend ScenarioConfig parse_config(std::string_view text, std::optional<Scenario> expected);
  friend ScenarioConfig default_config(Scenario s);

 private:
  Scenario scenario_ = Scenario::Fig1NonOsciSweep;
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;

  void validate() const;
};

/// Parses and validates. The scenario comes from a `scenario` key, from
/// `expected`, or both (they must agree).
ScenarioConfig parse_config(std::string_view text, std::optional<Scenario> expected = std::nullopt);

ScenarioConfig default_config(Scenario s);

std::string format_value(const Value& v);

}  // namespace ptbec::cli
