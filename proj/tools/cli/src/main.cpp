#include "ptbec_cli/config.hpp"
#include "ptbec_cli/scenarios.hpp"

#include "ptbec/errors.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitEngine = 3;
constexpr const char* kOutRootEnv = "PTBEC_OUT_ROOT";

struct Flags {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  double tolerance = 0.0;
  bool print_config = false;
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ptbec::cli::ConfigError("cannot open config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::filesystem::path output_dir(const Flags& f, ptbec::cli::Scenario s) {
  if (!f.out_dir.empty()) return f.out_dir;
  const char* root = std::getenv(kOutRootEnv);
  const std::filesystem::path base = (root && *root) ? root : "ptbec-out";
  return base / std::string(ptbec::cli::scenario_name(s));
}

int run_scenario(ptbec::cli::Scenario s, const Flags& f, CLI::App& sub) {
  using namespace ptbec::cli;
  ScenarioConfig config = f.config_path.empty() ? parse_config("", s) : parse_config(read_file(f.config_path), s);
  if (sub.count("--tolerance")) config.override_tolerance(f.tolerance);
  if (f.print_config) {
    for (const auto& [k, v] : config.echo()) std::cout << k << " = " << v << '\n';
    return kExitOk;
  }
  RunOptions opts;
  opts.out_dir = output_dir(f, s);
  opts.threads = f.threads > 0 ? f.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const RunResult r = run(config, opts);
  std::cout << "wrote " << r.files.size() << " file(s) and manifest.json to " << r.directory.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PT-symmetric two-mode condensate: scenario runner and data exporter"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PTBEC_VERSION);

  Flags flags;
  std::vector<std::pair<ptbec::cli::Scenario, CLI::App*>> subs;
  for (ptbec::cli::Scenario s : ptbec::cli::all_scenarios()) {
    CLI::App* sub = app.add_subcommand(std::string(ptbec::cli::scenario_name(s)),
                                       std::string(ptbec::cli::scenario_summary(s)));
    sub->add_option("--config", flags.config_path, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out_dir,
                    std::string("output directory (default: $") + kOutRootEnv + "/<scenario>, else ./ptbec-out/<scenario>)");
    sub->add_option("--threads", flags.threads, "worker threads for sweeps (default: hardware concurrency)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--tolerance", flags.tolerance, "override the scenario's numeric tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--print-config", flags.print_config, "print the resolved configuration and exit");
    subs.emplace_back(s, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (auto& [s, sub] : subs) {
      if (sub->parsed()) return run_scenario(s, flags, *sub);
    }
  } catch (const ptbec::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ptbec::EngineError& e) {
    std::cerr << "engine error: " << e.what() << '\n';
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEngine;
  }
  return kExitConfig;
}
