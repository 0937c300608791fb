#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "formsim/config_io.hpp"
#include "formsim/engine.hpp"
#include "formsim/log.hpp"
#include "formsim/telemetry.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& config_path, const std::string& out_path,
            const std::string& metrics_path) {
  const formsim::ScenarioConfig config = formsim::load_config(config_path);
  formsim::log_info("running '" + config.name + "' for " +
                    std::to_string(config.duration) + " s");
  const formsim::SimLog log = formsim::run(config);
  formsim::write_log(log, out_path);
  if (!metrics_path.empty()) {
    formsim::write_metrics(formsim::metrics(log), metrics_path);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"formsim — deterministic multi-UAV formation flight simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string metrics_path;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario config and write telemetry");
  run_cmd->add_option("--config", config_path, "Scenario configuration (JSON)")->required();
  run_cmd->add_option("--out", out_path, "Telemetry CSV to write")->required();
  run_cmd->add_option("--metrics", metrics_path, "Also write a metrics JSON here");

  std::string scenario_name;
  std::string emit_path;
  auto* scenario_cmd =
      app.add_subcommand("scenario", "Write a built-in scenario config");
  scenario_cmd->add_option("name", scenario_name, "One of the built-in scenario names")
      ->required();
  scenario_cmd->add_option("--emit", emit_path, "Config file to write")->required();

  std::string log_path;
  double tail_fraction = 0.25;
  auto* metrics_cmd =
      app.add_subcommand("metrics", "Print summary metrics of a telemetry file as JSON");
  metrics_cmd->add_option("--log", log_path, "Telemetry CSV to analyze")->required();
  metrics_cmd->add_option("--tail", tail_fraction,
                          "Trailing fraction of the run treated as steady state");

  std::string plot_log_path;
  std::string plot_dir;
  auto* plot_cmd =
      app.add_subcommand("plotdata", "Extract per-figure data series from a telemetry file");
  plot_cmd->add_option("--log", plot_log_path, "Telemetry CSV to read")->required();
  plot_cmd->add_option("--out", plot_dir, "Directory for the emitted series")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, out_path, metrics_path);
    if (*scenario_cmd) {
      formsim::write_config(formsim::builtin_scenario(scenario_name), emit_path);
      return kExitOk;
    }
    if (*metrics_cmd) {
      const formsim::SimLog log = formsim::read_log(log_path);
      std::cout << formsim::metrics_json(formsim::metrics(log, tail_fraction));
      return kExitOk;
    }
    if (*plot_cmd) {
      const formsim::SimLog log = formsim::read_log(plot_log_path);
      for (const std::string& path : formsim::write_plot_data(log, plot_dir)) {
        formsim::log_info("wrote " + path);
      }
      return kExitOk;
    }
  } catch (const formsim::ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const formsim::ValidationError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const formsim::EmptyLogError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitRuntime;
  }
  return kExitUsage;
}
