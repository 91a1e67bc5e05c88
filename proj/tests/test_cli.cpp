#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "doctest.h"
#include "specsense/cli/commands.hpp"
#include "specsense/cli/config.hpp"
#include "specsense/cli/output.hpp"

using namespace specsense;
using namespace specsense::cli;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error_message(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

double as_double(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  FAIL("cell is not numeric");
  return 0.0;
}

}  // namespace

TEST_CASE("empty configuration yields the reference defaults") {
  const auto cfg = parse_config("");
  CHECK(max_abs(cfg.sys.A - Matrix{{1.05, 0.0}, {1.0, 0.9}}) == 0.0);
  CHECK(max_abs(cfg.sys.C - Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(cfg.sys.Q - Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(cfg.sys.R - 0.8 * Matrix::Identity(2, 2)) == 0.0);
  CHECK(cfg.sampling_period == 1.0);
  CHECK(cfg.channel.alpha == 5.0);
  CHECK(cfg.channel.beta == 20.0);
  CHECK(cfg.sensing.eps_d == 1.2);
  CHECK(cfg.sensing.eps_f == doctest::Approx(0.799367309499746).epsilon(1e-13));
  CHECK(cfg.sensing.tau_max == 0.02);
  CHECK(cfg.sensing.bandwidth == 2e6);
  CHECK(cfg.sensing.t_x == 0.05);
  CHECK(cfg.energy.e_s == 100.0);
  CHECK(cfg.energy.e_tx == 100.0);
  CHECK(cfg.order == CovarianceOrder::Loewner);
  CHECK_FALSE(cfg.sweep.has_value());
  CHECK(max_abs(resolve_target(cfg) - average_bound(cfg.sys, 0.7, 6)) == 0.0);
}

TEST_CASE("configuration keys and value forms") {
  const auto cfg = parse_config(R"(
# plant
system.A = [[0.9, 0.1], [0, 0.8]]   # trailing comment
channel.alpha = 2.5
channel.beta = 10
sensing.snr_db = 0
sensing.eps_d = 1.3
energy.e_tx = 400
target.order = trace
target.P_bar = [[50, 0], [0, 60]]
sweep.variable = energy_ratio
sweep.values = [0.5, 1, 2]
monte_carlo.trials = 20
monte_carlo.master_seed = 18446744073709551615
output.format = json
output.path = "out #1.json"
)");
  CHECK(cfg.sys.A(0, 1) == 0.1);
  CHECK(cfg.channel.alpha == 2.5);
  CHECK(cfg.sensing.eps_f == doctest::Approx(0.65).epsilon(1e-14));
  CHECK(cfg.energy.e_tx == 400.0);
  CHECK(cfg.order == CovarianceOrder::Trace);
  REQUIRE(cfg.P_bar.has_value());
  CHECK((*cfg.P_bar)(1, 1) == 60.0);
  REQUIRE(cfg.sweep.has_value());
  CHECK(cfg.sweep->variable == SweepVariable::EnergyRatio);
  CHECK(cfg.sweep->values.size() == 3);
  REQUIRE(cfg.monte_carlo.has_value());
  CHECK(cfg.monte_carlo->trials == 20);
  CHECK(cfg.monte_carlo->master_seed == 18446744073709551615ull);
  CHECK(cfg.output.format == OutputFormat::Json);
  CHECK(cfg.output.path == "out #1.json");
}

TEST_CASE("explicit busy threshold overrides the SNR") {
  const auto cfg = parse_config("sensing.eps_f = 0.5\nsensing.snr_db = 10\n");
  CHECK(cfg.sensing.eps_f == 0.5);
  CHECK(cfg.eps_f_override);
}

TEST_CASE("configuration errors") {
  SUBCASE("invalid rate names the invariant") {
    const auto msg = config_error_message("channel.alpha = -1\n");
    CHECK(contains(msg, "channel.alpha > 0"));
    CHECK(contains(msg, "line 1"));
  }
  SUBCASE("unknown key") {
    const auto msg = config_error_message("\n\ngamma_target = 0.5\n");
    CHECK(contains(msg, "gamma_target"));
    CHECK(contains(msg, "line 3"));
  }
  SUBCASE("repeated key") {
    CHECK(contains(config_error_message("channel.beta = 3\nchannel.beta = 4\n"), "line 2"));
  }
  SUBCASE("malformed lines and values") {
    CHECK_FALSE(config_error_message("channel.alpha 5\n").empty());
    CHECK_FALSE(config_error_message("channel.alpha = [1,\n").empty());
    CHECK_FALSE(config_error_message("channel.alpha = fast\n").empty());
    CHECK_FALSE(config_error_message("monte_carlo.trials = 2.5\n").empty());
    CHECK_FALSE(config_error_message("target.order = spectral\n").empty());
    CHECK_FALSE(config_error_message("sweep.variable = bandwidth\n").empty());
  }
  SUBCASE("system invariants are prefixed") {
    CHECK(contains(config_error_message("system.C = [[0, 0], [0, 0]]\n"), "system.C_full_column_rank"));
    CHECK_FALSE(config_error_message("system.Q = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]\n").empty());
  }
  SUBCASE("sweep without values") {
    CHECK_FALSE(config_error_message("sweep.variable = idle_probability\n").empty());
  }
}

TEST_CASE("parse_command") {
  CHECK(parse_command("solve") == Command::Solve);
  CHECK(parse_command("sweep") == Command::Sweep);
  CHECK(parse_command("validate") == Command::Validate);
  CHECK_THROWS_AS(parse_command("plot"), Error);
}

TEST_CASE("solve command") {
  const auto result = run_command(parse_config(""), Command::Solve);
  CHECK(result.exit_status == 0);
  CHECK(result.table.columns == kSolutionColumns);
  REQUIRE(result.table.rows.size() == 1);
  const auto& row = result.table.rows[0];
  CHECK(as_double(row[0]) == doctest::Approx(0.8));
  CHECK(std::get<long long>(row[1]) == 4);
  CHECK(std::get<bool>(row[5]));
  CHECK(contains(result.report, "n = 4"));
}

TEST_CASE("infeasible solve exits nonzero and keeps diagnostics") {
  const auto result = run_command(parse_config("target.P_bar = [[0.5, 0], [0, 0.5]]\n"), Command::Solve);
  CHECK(result.exit_status != 0);
  REQUIRE(result.table.rows.size() == 1);
  CHECK_FALSE(std::get<bool>(result.table.rows[0][5]));
  CHECK_FALSE(result.report.empty());
}

TEST_CASE("sweep commands") {
  SUBCASE("idle probability") {
    const auto cfg = parse_config("sweep.values = [0.5, 0.8, 0.9]\n");
    const auto result = run_command(cfg, Command::Sweep);
    CHECK(result.exit_status == 0);
    CHECK(result.table.columns == kSolutionColumns);
    REQUIRE(result.table.rows.size() == 3);
    CHECK(as_double(result.table.rows[1][0]) == doctest::Approx(0.8));
    // p_I = 0.8 reproduces the base problem.
    const auto base = run_command(parse_config(""), Command::Solve);
    CHECK(as_double(result.table.rows[1][3]) ==
          doctest::Approx(as_double(base.table.rows[0][3])).epsilon(1e-12));
  }
  SUBCASE("energy ratio") {
    const auto cfg = parse_config("sweep.variable = energy_ratio\nsweep.values = [0.5, 2]\n");
    const auto result = run_command(cfg, Command::Sweep);
    CHECK(result.exit_status == 0);
    CHECK(result.table.columns.front() == "energy_ratio");
    REQUIRE(result.table.rows.size() == 2);
    CHECK(as_double(result.table.rows[0][0]) == 0.5);
  }
  SUBCASE("missing sweep section") {
    CHECK_THROWS_AS(run_command(parse_config(""), Command::Sweep), Error);
  }
}

TEST_CASE("validate command") {
  const auto cfg = parse_config("monte_carlo.trials = 40\nmonte_carlo.horizon = 400\nmonte_carlo.threads = 2\n");
  const auto result = run_command(cfg, Command::Validate);
  CHECK(result.exit_status == 0);
  CHECK(result.table.columns.front() == "quantity");
  REQUIRE(result.table.rows.size() == 4);
  CHECK(std::get<std::string>(result.table.rows[0][0]) == "gamma");
}

TEST_CASE("CSV and JSON rendering") {
  Table empty{kSolutionColumns, {}};
  CHECK(render_csv(empty) == "p_I,n_star,tau_star_s,phi_star,gamma_star,feasible\n");
  CHECK(render_json(empty) == "[]\n");

  Table t{{"x", "k", "ok", "name"},
          {{1.0 / 3.0, 7LL, true, std::string("a")}, {INFINITY, -2LL, false, std::string("b")}}};
  const auto csv = render_csv(t);
  CHECK(csv == "x,k,ok,name\n0.333333333333,7,true,a\ninf,-2,false,b\n");
  const auto parsed = nlohmann::json::parse(render_json(t));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0]["x"].get<double>() == 0.333333333333);
  CHECK(parsed[0]["k"].get<long long>() == 7);
  CHECK(parsed[0]["ok"].get<bool>());
  CHECK(parsed[1]["x"].is_null());
  CHECK(format_number(1e-5) == "1e-05");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("solve output round-trips through JSON to 12 significant digits") {
  const auto cfg = parse_config("");
  const auto sol = solve(make_problem(cfg));
  const auto result = run_command(cfg, Command::Solve);
  const auto parsed = nlohmann::json::parse(render_json(result.table));
  REQUIRE(parsed.size() == 1);
  const auto& row = parsed[0];
  auto same12 = [](double a, double b) { return format_number(a) == format_number(b); };
  CHECK(same12(row["p_I"].get<double>(), 0.8));
  CHECK(row["n_star"].get<int>() == sol.n_star);
  CHECK(same12(row["tau_star_s"].get<double>(), sol.tau_star));
  CHECK(same12(row["phi_star"].get<double>(), sol.phi_star));
  CHECK(same12(row["gamma_star"].get<double>(), sol.gamma_star));
  CHECK(row["feasible"].get<bool>());
  // The CSV carries the same text.
  CHECK(contains(render_csv(result.table), format_number(sol.phi_star)));
}

TEST_CASE("write_output") {
  const auto dir = std::filesystem::temp_directory_path() / "specsense_test_cli";
  std::filesystem::create_directories(dir);
  const auto result = run_command(parse_config(""), Command::Solve);
  for (auto format : {OutputFormat::Csv, OutputFormat::Json}) {
    write_output(result.table, format, dir / "a.out");
    write_output(result.table, format, dir / "b.out");
    const auto a = read_file(dir / "a.out");
    CHECK_FALSE(a.empty());
    CHECK(a == read_file(dir / "b.out"));
    CHECK(a == render(result.table, format));
  }
  std::filesystem::remove_all(dir);

  const std::string bad = "/nonexistent_dir_for_specsense/out.csv";
  try {
    write_output(result.table, OutputFormat::Csv, bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(contains(e.what(), bad));
  }
}

TEST_CASE("assumption warnings") {
  const auto cfg = parse_config("");
  CHECK(assumption_warnings(cfg).empty());
  CHECK_FALSE(assumption_warnings(cfg, 0.019).empty());
  CHECK_FALSE(assumption_warnings(parse_config("system.sampling_period = 0.1\n")).empty());
}
