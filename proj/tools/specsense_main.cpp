// specsense: optimal periodic spectrum-sensing schedules for remote state
// estimation over an on/off channel.
//
//   specsense --command solve
//   specsense --config sweep.cfg --command sweep --output fig.csv
//   specsense --command validate --seed 7 --format json

#include <cstdlib>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "specsense/cli/commands.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("specsense");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SPECSENSE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept "off" when asked for.
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace specsense::cli;

  CLI::App app{"Energy-optimal spectrum sensing schedules for remote state estimation"};
  std::string config_path;
  std::string command_name = "solve";
  std::string output_path;
  std::string format_name;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  app.add_option("--config", config_path, "Experiment config (key = value lines)")
      ->check(CLI::ExistingFile);
  app.add_option("--command", command_name, "solve | sweep | validate")
      ->check(CLI::IsMember({"solve", "sweep", "validate"}));
  app.add_option("--output", output_path, "Output file (default: config output.path or stdout)");
  app.add_option("--format", format_name, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo master seed");
  app.add_option("--threads", threads, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  configure_logging();

  try {
    ExperimentConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
    if (*seed_opt) {
      if (!cfg.monte_carlo) cfg.monte_carlo.emplace();
      cfg.monte_carlo->master_seed = seed;
    }
    if (threads > 0) {
      if (!cfg.monte_carlo) cfg.monte_carlo.emplace();
      cfg.monte_carlo->threads = threads;
    }
    if (!output_path.empty()) cfg.output.path = output_path;
    if (!format_name.empty())
      cfg.output.format = format_name == "json" ? OutputFormat::Json : OutputFormat::Csv;

    const auto result = run_command(cfg, parse_command(command_name));
    std::cerr << result.report;
    if (cfg.output.path.empty())
      std::cout << render(result.table, cfg.output.format);
    else
      write_output(result.table, cfg.output.format, cfg.output.path);
    return result.exit_status;
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
}
