#include "specsense/cli/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace specsense::cli {
namespace {

using nlohmann::json;

std::string describe(int line, const std::string& key, const std::string& message) {
  std::ostringstream os;
  if (line > 0) os << "line " << line << ": ";
  if (!key.empty()) os << "key '" << key << "': ";
  os << message;
  return os.str();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Drops a trailing '#' comment; '#' inside a quoted string is kept.
void strip_comment(std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) {
      line.erase(i);
      return;
    }
  }
}

json parse_value(const std::string& raw) {
  json v = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (!v.is_discarded()) return v;
  for (char c : raw)
    if (std::isspace(static_cast<unsigned char>(c)) || c == '[' || c == '{' || c == '"')
      throw std::invalid_argument("malformed value '" + raw + "'");
  return json(raw);
}

double as_number(const json& v) {
  if (!v.is_number()) throw std::invalid_argument("expected a number");
  return v.get<double>();
}

long as_integer(const json& v) {
  if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
  return v.get<long>();
}

std::string as_string(const json& v) {
  if (!v.is_string()) throw std::invalid_argument("expected a string");
  return v.get<std::string>();
}

Matrix as_matrix(const json& v) {
  if (!v.is_array() || v.empty()) throw std::invalid_argument("expected a non-empty nested array");
  const auto rows = v.size();
  if (!v[0].is_array() || v[0].empty()) throw std::invalid_argument("expected rows as arrays");
  const auto cols = v[0].size();
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols)
      throw std::invalid_argument("rows must all have " + std::to_string(cols) + " entries");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = as_number(v[i][j]);
  }
  return m;
}

std::vector<double> as_list(const json& v) {
  if (!v.is_array()) throw std::invalid_argument("expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x));
  return out;
}

MonteCarloConfig& mc(ExperimentConfig& c) {
  if (!c.monte_carlo) c.monte_carlo.emplace();
  return *c.monte_carlo;
}

SweepSpec& sweep(ExperimentConfig& c) {
  if (!c.sweep) c.sweep.emplace();
  return *c.sweep;
}

using Setter = std::function<void(ExperimentConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"system.A", [](auto& c, const json& v) { c.sys.A = as_matrix(v); }},
      {"system.C", [](auto& c, const json& v) { c.sys.C = as_matrix(v); }},
      {"system.Q", [](auto& c, const json& v) { c.sys.Q = as_matrix(v); }},
      {"system.R", [](auto& c, const json& v) { c.sys.R = as_matrix(v); }},
      {"system.sampling_period", [](auto& c, const json& v) { c.sampling_period = as_number(v); }},
      {"channel.alpha", [](auto& c, const json& v) { c.channel.alpha = as_number(v); }},
      {"channel.beta", [](auto& c, const json& v) { c.channel.beta = as_number(v); }},
      {"sensing.tau_max", [](auto& c, const json& v) { c.sensing.tau_max = as_number(v); }},
      {"sensing.bandwidth", [](auto& c, const json& v) { c.sensing.bandwidth = as_number(v); }},
      {"sensing.eps_d", [](auto& c, const json& v) { c.sensing.eps_d = as_number(v); }},
      {"sensing.eps_f",
       [](auto& c, const json& v) {
         c.sensing.eps_f = as_number(v);
         c.eps_f_override = true;
       }},
      {"sensing.snr_db", [](auto& c, const json& v) { c.snr_db = as_number(v); }},
      {"sensing.t_x", [](auto& c, const json& v) { c.sensing.t_x = as_number(v); }},
      {"energy.e_s", [](auto& c, const json& v) { c.energy.e_s = as_number(v); }},
      {"energy.e_tx", [](auto& c, const json& v) { c.energy.e_tx = as_number(v); }},
      {"target.P_bar", [](auto& c, const json& v) { c.P_bar = as_matrix(v); }},
      {"target.reference_gamma", [](auto& c, const json& v) { c.reference_gamma = as_number(v); }},
      {"target.reference_n",
       [](auto& c, const json& v) { c.reference_n = static_cast<int>(as_integer(v)); }},
      {"target.order",
       [](auto& c, const json& v) {
         const auto s = as_string(v);
         if (s == "loewner")
           c.order = CovarianceOrder::Loewner;
         else if (s == "trace")
           c.order = CovarianceOrder::Trace;
         else
           throw std::invalid_argument("expected 'loewner' or 'trace'");
       }},
      {"sweep.variable",
       [](auto& c, const json& v) {
         const auto s = as_string(v);
         if (s == "idle_probability")
           sweep(c).variable = SweepVariable::IdleProbability;
         else if (s == "energy_ratio")
           sweep(c).variable = SweepVariable::EnergyRatio;
         else
           throw std::invalid_argument("expected 'idle_probability' or 'energy_ratio'");
       }},
      {"sweep.values", [](auto& c, const json& v) { sweep(c).values = as_list(v); }},
      {"monte_carlo.trials", [](auto& c, const json& v) { mc(c).trials = as_integer(v); }},
      {"monte_carlo.horizon", [](auto& c, const json& v) { mc(c).horizon = as_integer(v); }},
      {"monte_carlo.master_seed",
       [](auto& c, const json& v) {
         if (!v.is_number_unsigned()) throw std::invalid_argument("expected a non-negative integer");
         mc(c).master_seed = v.get<std::uint64_t>();
       }},
      {"monte_carlo.threads",
       [](auto& c, const json& v) {
         const long t = as_integer(v);
         if (t < 1) throw std::invalid_argument("threads must be >= 1");
         mc(c).threads = static_cast<unsigned>(t);
       }},
      {"output.path", [](auto& c, const json& v) { c.output.path = as_string(v); }},
      {"output.format",
       [](auto& c, const json& v) {
         const auto s = as_string(v);
         if (s == "csv")
           c.output.format = OutputFormat::Csv;
         else if (s == "json")
           c.output.format = OutputFormat::Json;
         else
           throw std::invalid_argument("expected 'csv' or 'json'");
       }},
  };
  return table;
}

void require(bool ok, const std::string& invariant, const std::string& detail) {
  if (!ok) throw InvariantError(invariant, detail);
}

void check_invariants(const ExperimentConfig& c) {
  check_dimensions(c.sys);
  const auto report = validate_system(c.sys);
  for (const auto& chk : report.checks)
    require(chk.passed, "system." + chk.name, chk.evidence);
  require(c.sampling_period > 0.0, "system.sampling_period > 0",
          std::to_string(c.sampling_period));
  c.channel.validate();
  c.sensing.validate();
  c.energy.validate();
  require(c.reference_gamma >= 0.0 && c.reference_gamma <= 1.0,
          "0 <= target.reference_gamma <= 1", std::to_string(c.reference_gamma));
  require(c.reference_n >= 1, "target.reference_n >= 1", std::to_string(c.reference_n));
  if (c.P_bar) {
    if (c.P_bar->rows() != c.sys.state_dim() || c.P_bar->cols() != c.sys.state_dim())
      throw DimensionError("target.P_bar must match the state dimension");
    require(is_covariance(*c.P_bar), "target.P_bar symmetric PSD", "not a covariance");
  } else {
    require(is_stable(c.sys, c.reference_gamma, c.reference_n),
            "target reference (gamma, n) stable", "average bound would diverge");
  }
  if (c.sweep) {
    require(!c.sweep->values.empty(), "sweep.values non-empty", "no sweep values");
    for (double v : c.sweep->values) {
      if (c.sweep->variable == SweepVariable::IdleProbability)
        require(v > 0.0 && v < 1.0, "0 < sweep idle_probability < 1", std::to_string(v));
      else
        require(v > 0.0, "sweep energy_ratio > 0", std::to_string(v));
    }
  }
  if (c.monte_carlo) {
    require(c.monte_carlo->trials >= 1, "monte_carlo.trials >= 1",
            std::to_string(c.monte_carlo->trials));
    require(c.monte_carlo->horizon >= 1, "monte_carlo.horizon >= 1",
            std::to_string(c.monte_carlo->horizon));
  }
}

}  // namespace

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : Error(describe(line, key, message)), line_(line), key_(std::move(key)) {}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.sys.A = Matrix{{1.05, 0.0}, {1.0, 0.9}};
  c.sys.C = Matrix::Identity(2, 2);
  c.sys.Q = Matrix::Identity(2, 2);
  c.sys.R = 0.8 * Matrix::Identity(2, 2);
  c.sampling_period = 1.0;
  c.channel = {5.0, 20.0};
  c.snr_db = -3.0;
  c.sensing.tau = 0.0;
  c.sensing.tau_max = 0.02;
  c.sensing.bandwidth = 2e6;
  c.sensing.eps_d = 1.2;
  c.sensing.eps_f = busy_threshold_factor(c.sensing.eps_d, c.snr_db);
  c.sensing.t_x = 0.05;
  c.energy = {100.0, 100.0};
  return c;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg = default_config();
  std::map<std::string, int> seen;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_comment(line);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string raw = trim(std::string_view(body).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(line_no, key, "unknown key");
    if (!seen.emplace(key, line_no).second)
      throw ConfigError(line_no, key, "key given more than once");
    if (raw.empty()) throw ConfigError(line_no, key, "missing value");
    try {
      it->second(cfg, parse_value(raw));
    } catch (const std::exception& e) {
      throw ConfigError(line_no, key, e.what());
    }
  }
  if (!cfg.eps_f_override) cfg.sensing.eps_f = busy_threshold_factor(cfg.sensing.eps_d, cfg.snr_db);
  try {
    check_invariants(cfg);
  } catch (const InvariantError& e) {
    // Point at the line of the key the invariant names, if it was set.
    std::string key;
    for (const auto& [k, l] : seen)
      if (e.invariant().find(k) != std::string::npos && k.size() > key.size()) key = k;
    throw ConfigError(key.empty() ? 0 : seen.at(key), key, e.what());
  } catch (const DimensionError& e) {
    throw ConfigError(0, "", std::string("dimension mismatch: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

CovarianceMatrix resolve_target(const ExperimentConfig& cfg) {
  if (cfg.P_bar) return *cfg.P_bar;
  return average_bound(cfg.sys, cfg.reference_gamma, cfg.reference_n);
}

ProblemSpec make_problem(const ExperimentConfig& cfg, const CovarianceMatrix& P_bar) {
  ProblemSpec spec;
  spec.sys = cfg.sys;
  spec.channel = cfg.channel;
  spec.sensing = cfg.sensing;
  spec.sensing.tau = 0.0;
  spec.energy = cfg.energy;
  spec.P_bar = P_bar;
  spec.order = cfg.order;
  return spec;
}

ProblemSpec make_problem(const ExperimentConfig& cfg) {
  return make_problem(cfg, resolve_target(cfg));
}

std::vector<std::string> assumption_warnings(const ExperimentConfig& cfg,
                                             std::optional<double> tau) {
  std::vector<std::string> out;
  const double longest_mean_hold = std::max(1.0 / cfg.channel.alpha, 1.0 / cfg.channel.beta);
  if (cfg.sampling_period < 5.0 * longest_mean_hold) {
    std::ostringstream os;
    os << "sampling period " << cfg.sampling_period
       << " s is not much longer than the mean channel holding time " << longest_mean_hold
       << " s; per-step channel states are still drawn independently";
    out.push_back(os.str());
  }
  if (tau) {
    const double limit = 0.1 / std::max(cfg.channel.alpha, cfg.channel.beta);
    if (*tau > limit) {
      std::ostringstream os;
      os << "sensing time " << *tau << " s exceeds " << limit
         << " s; channel changes during sensing are not modelled";
      out.push_back(os.str());
    }
  }
  return out;
}

}  // namespace specsense::cli
