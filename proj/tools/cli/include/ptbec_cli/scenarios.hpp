#pragma once

#include "ptbec_cli/config.hpp"
#include "ptbec_cli/output.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ptbec::cli {

/// In-memory result of one scenario: CSV/JSON bodies in write order and the
/// diagnostics that go into the manifest.
struct ScenarioOutput {
  std::vector<std::pair<std::string, std::string>> files;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

/// Runs the computation only. Output bodies depend on the config alone, not
/// on `threads`.
ScenarioOutput compute(const ScenarioConfig& config, int threads);

struct RunOptions {
  std::filesystem::path out_dir;
  int threads = 1;
};

struct RunResult {
  std::filesystem::path directory;
  std::vector<OutputFile> files;
  nlohmann::ordered_json manifest;
};

/// compute() plus fail-closed writing of the files and manifest.json. Engine
/// failures are rethrown with the scenario name prepended, keeping their
/// category (ptbec::EngineError or std::invalid_argument).
RunResult run(const ScenarioConfig& config, const RunOptions& options);

/// Evenly spaced grid; a single step yields {lo}.
std::vector<double> linspace(double lo, double hi, int steps);

}  // namespace ptbec::cli
