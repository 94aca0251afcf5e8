// Command-line front end: validate a config, run a pipeline, write reports.

#include <chrono>
#include <exception>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "zpdc/config.hpp"
#include "zpdc/csv.hpp"
#include "zpdc/pipelines.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitValidationError = 3;
constexpr int kExitRuntimeError = 4;

struct CliOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  std::string seed;
  std::string workers;
};

zpdc::RunConfig resolve_config(const CliOptions& cli) {
  zpdc::RunConfig config;
  if (!cli.config_path.empty()) config = zpdc::load_config_file(cli.config_path);
  for (const auto& assignment : cli.overrides) zpdc::apply_override(config, assignment);
  if (!cli.seed.empty()) zpdc::apply_override(config, "ensemble.seed=" + cli.seed);
  if (!cli.workers.empty()) zpdc::apply_override(config, "workers=" + cli.workers);
  return config;
}

int print_diagnostics(const std::vector<zpdc::Diagnostic>& diagnostics) {
  bool has_error = false;
  for (const auto& d : diagnostics) {
    const bool error = d.severity == zpdc::Diagnostic::Severity::Error;
    has_error |= error;
    std::cerr << (error ? "error" : "warning") << ": " << d.key << ": " << d.message << "\n";
  }
  return has_error ? kExitValidationError : 0;
}

int run_pipeline(const CliOptions& cli,
                 const std::function<zpdc::PipelineResult(const zpdc::RunConfig&)>& pipeline) {
  zpdc::RunConfig config;
  try {
    config = resolve_config(cli);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const auto diagnostics = zpdc::validate(config);
  if (print_diagnostics(diagnostics) != 0) return kExitValidationError;

  try {
    const auto start = std::chrono::steady_clock::now();
    zpdc::PipelineResult result = pipeline(config);
    const auto elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string manifest = zpdc::manifest_text(config);
    manifest += "wall_time_seconds = " + zpdc::format_double(elapsed) + "\n";
    result.files["manifest.txt"] = manifest;
    for (const auto& [name, content] : result.files)
      zpdc::atomic_write_file(cli.out_dir + "/" + name, content);
    for (const auto& message : result.messages) std::cout << message << "\n";
    for (const auto& [name, content] : result.files)
      std::cout << "wrote " << cli.out_dir << "/" << name << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic zeropoint-field simulator for type-II down-conversion"};
  app.require_subcommand(1);

  CliOptions cli;
  app.add_option("--config", cli.config_path, "config file (key = value lines)");
  app.add_option("--set", cli.overrides, "override, key=value (repeatable)")
      ->take_all();
  app.add_option("--seed", cli.seed, "master seed (shorthand for ensemble.seed)");
  app.add_option("--workers", cli.workers, "worker threads");
  app.add_option("--out", cli.out_dir, "output directory (default: out)");

  int exit_code = 0;
  const auto add = [&](const char* name, const char* description, auto pipeline) {
    auto* sub = app.add_subcommand(name, description);
    sub->fallthrough();
    sub->callback([&cli, &exit_code, pipeline] {
      exit_code = run_pipeline(cli, pipeline);
    });
  };

  auto* validate_cmd =
      app.add_subcommand("validate", "check the configuration and report diagnostics");
  validate_cmd->fallthrough();
  validate_cmd->callback([&cli, &exit_code] {
        try {
          const zpdc::RunConfig config = resolve_config(cli);
          exit_code = print_diagnostics(zpdc::validate(config));
          if (exit_code == 0) std::cout << "config ok\n";
        } catch (const std::exception& e) {
          std::cerr << "error: " << e.what() << "\n";
          exit_code = kExitConfigError;
        }
      });
  add("correlate", "cross-correlation scan against the analytic mode sums", zpdc::run_correlate);
  add("detect", "singles-rate window sweep and direct vs factorized joint rates",
      zpdc::run_detect);
  add("bell", "polarizer scan, contrast fit, CHSH and Clauser-Horne report", zpdc::run_bell);
  add("scan", "detection-rate scan over tau, window length or angle", zpdc::run_scan);
  add("dump-grid", "write the mode grid and the crystal map", zpdc::run_dump_grid);

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
