#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace udpcert {

// Bad flags, unknown subcommands, unparsable numbers. Exit code 2.
class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Subcommand { certify, conditions, solve, bound, ideal, experiment };

struct CliConfig {
  Subcommand subcommand = Subcommand::certify;
  bool help_requested = false;
  std::string help_text;

  std::string matrix_path;
  std::string response_path;
  std::string target_path;
  std::string cert_path;
  std::string config_path;
  std::string out_path;
  std::string dump_trials_path;
  bool header = false;
  bool json_pretty = false;
  std::uint64_t seed = 0;

  // certify
  std::string method = "exact";  // exact | search
  double tol = 1e-4;
  int restarts = 64;
  int iters = 500;
  bool to_udp = false;
  double kappa0 = 0.45;

  // conditions
  long rip_S = 0;
  long re_S = 0;
  long compat_S = 0;
  double c0 = 1.0;
  int cone_restarts = 32;
  long falsify_budget = 0;
  long udp_S0 = 0;
  double udp_kappa0 = 0.0;
  double udp_Delta = 0.0;
  long h_S = 0;
  double h_kappa = 0.4;

  // solve
  std::string solver = "lasso";  // lasso | dantzig
  double lambda = 0.0;
  bool lambda_auto = false;
  double solve_tol = 1e-8;
  long max_iter = 100000;

  // bound / ideal
  double sigma = 0.0;
  double t = 1.0;
  std::string estimator = "lasso";
  std::vector<long> support;
  long mc_trials = 0;
};

// Parses argv (without the program name). Throws UsageError on bad usage;
// --help yields a config with help_requested set and the usage text filled.
CliConfig parse_args(const std::vector<std::string>& args);

// Runs the selected pipeline. The result document goes to `out` (or the
// configured output file); diagnostics go to `err`. Exit codes: 0 success,
// 1 computational failure, 3 when a requested tuning condition fails.
int dispatch(const CliConfig& config, std::ostream& out, std::ostream& err);

// parse_args + dispatch with usage errors mapped to exit code 2.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace udpcert
