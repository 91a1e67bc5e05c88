#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specsense/errors.hpp"
#include "specsense/optimizer.hpp"

namespace specsense::cli {

/// Rejected configuration. line() is 0 when the problem is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(int line, std::string key, const std::string& message);

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

enum class SweepVariable { IdleProbability, EnergyRatio };

struct SweepSpec {
  SweepVariable variable = SweepVariable::IdleProbability;
  std::vector<double> values;
};

struct MonteCarloConfig {
  long trials = 1000;
  long horizon = 1000;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
};

enum class OutputFormat { Csv, Json };

struct OutputSpec {
  std::string path;  // empty: standard output
  OutputFormat format = OutputFormat::Csv;
};

struct ExperimentConfig {
  LinearSystem sys;
  double sampling_period = 1.0;  // only used for assumption diagnostics
  ChannelModel channel;
  SensingConfig sensing;  // sensing.tau unused
  double snr_db = -3.0;
  bool eps_f_override = false;
  EnergyParams energy;

  /// Explicit target; when absent the target is the average bound at
  /// (reference_gamma, reference_n) for the configured system.
  std::optional<CovarianceMatrix> P_bar;
  double reference_gamma = 0.7;
  int reference_n = 6;
  CovarianceOrder order = CovarianceOrder::Loewner;

  std::optional<SweepSpec> sweep;
  std::optional<MonteCarloConfig> monte_carlo;
  OutputSpec output;
};

/// Built-in defaults: the 2-state reference plant and channel used throughout
/// the test suite.
ExperimentConfig default_config();

/// Strict `key = value` parser. Blank lines and `#` comments are ignored;
/// values are JSON literals (numbers, arrays, strings) or bare words. Unknown
/// or repeated keys are rejected.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

CovarianceMatrix resolve_target(const ExperimentConfig& cfg);

ProblemSpec make_problem(const ExperimentConfig& cfg);

/// Problem spec with the given target matrix (used by sweeps, which keep the
/// base configuration's target fixed).
ProblemSpec make_problem(const ExperimentConfig& cfg, const CovarianceMatrix& P_bar);

/// Human-readable warnings for configurations that stretch the modelling
/// assumptions (sampling period vs. channel holding times, sensing time vs.
/// channel dynamics).
std::vector<std::string> assumption_warnings(const ExperimentConfig& cfg,
                                             std::optional<double> tau = std::nullopt);

}  // namespace specsense::cli
