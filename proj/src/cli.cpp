#include "udpcert/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "udpcert/csv.hpp"
#include "udpcert/json_io.hpp"

namespace udpcert {

namespace {

std::uint64_t default_seed_from_env() {
  const char* env = std::getenv("UDP_CERTIFY_SEED");
  if (env == nullptr) return 0;
  std::uint64_t value = 0;
  const char* end = env + std::string_view(env).size();
  const auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc() || ptr != end) {
    throw UsageError("UDP_CERTIFY_SEED is not an integer: '" + std::string(env) + "'");
  }
  return value;
}

std::vector<long> parse_support_list(const std::string& text) {
  std::vector<long> support;
  std::string current;
  auto flush = [&]() {
    if (current.empty()) return;
    long value = 0;
    const auto [ptr, ec] =
        std::from_chars(current.data(), current.data() + current.size(), value);
    if (ec != std::errc() || ptr != current.data() + current.size()) {
      throw UsageError("--support: '" + current + "' is not an integer index");
    }
    support.push_back(value);
    current.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else if (c != ' ') {
      current.push_back(c);
    }
  }
  flush();
  if (support.empty()) throw UsageError("--support: empty index list");
  return support;
}

void emit(const Json& doc, const CliConfig& config, std::ostream& out) {
  const std::string text = config.json_pretty ? doc.dump(2) : doc.dump();
  if (!config.out_path.empty()) {
    std::ofstream file(config.out_path);
    if (!file) throw std::runtime_error("cannot write '" + config.out_path + "'");
    file << text << '\n';
  } else {
    out << text << '\n';
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  Json j;
  in >> j;
  return j;
}

int dispatch_certify(const CliConfig& config, std::ostream& out, std::ostream& err) {
  const DesignMatrix d = decompose(read_csv_matrix(config.matrix_path, config.header));
  DistortionEstimate est;
  if (config.method == "exact") {
    est = distortion_exact(d, config.tol);
  } else if (config.method == "search") {
    est = distortion_search(d, config.restarts, config.iters, config.seed);
  } else {
    throw std::invalid_argument("certify: unknown method '" + config.method + "'");
  }
  if (est.method == DistortionMethod::trivial) {
    err << "warning: trivial kernel, distortion is 1 by convention\n";
  }

  if (!config.to_udp) {
    emit(to_json(est), config, out);
    return 0;
  }
  if (d.rank() < std::min(d.n(), d.p())) {
    throw std::runtime_error("certify: rank-deficient design cannot be certified");
  }
  const UdpCertificate cert =
      udp_from_distortion(est, smallest_singular(d), config.kappa0, d.p());
  if (cert.S0 == 0) {
    err << "warning: uninformative certificate (S0 = 0)\n";
  }
  Json doc;
  doc["distortion_estimate"] = to_json(est);
  doc["udp_certificate"] = to_json(cert);
  emit(doc, config, out);
  return 0;
}

int dispatch_conditions(const CliConfig& config, std::ostream& out, std::ostream& err) {
  const DesignMatrix d = decompose(read_csv_matrix(config.matrix_path, config.header));

  ConditionReport report;
  report.c0 = config.c0;
  report.kappa = config.h_kappa;
  report.S = std::max({config.rip_S, config.re_S, config.compat_S, config.h_S});

  if (config.rip_S > 0) report.rip_theta = rip_constant(d, config.rip_S);
  if (config.re_S > 0) {
    report.re_kappa_upper = cone_constant_estimate(
        d, config.re_S, config.c0, ConeKind::re, config.cone_restarts, config.seed);
  }
  if (config.compat_S > 0) {
    report.compat_phi_upper =
        cone_constant_estimate(d, config.compat_S, config.c0, ConeKind::compatibility,
                               config.cone_restarts, config.seed);
  }

  if (config.falsify_budget > 0) {
    UdpCertificate cert;
    bool have_cert = false;
    if (config.udp_S0 > 0) {
      cert.S0 = config.udp_S0;
      cert.kappa0 = config.udp_kappa0;
      cert.Delta = config.udp_Delta;
      cert.provenance = CertProvenance::assumed;
      have_cert = true;
    } else if (report.re_kappa_upper && *report.re_kappa_upper > 0.0) {
      cert = udp_from_cone(*report.re_kappa_upper, config.re_S, config.c0, ConeKind::re);
      have_cert = true;
    }
    if (have_cert) {
      report.udp_counterexample =
          udp_falsify(d, cert, config.falsify_budget, config.seed);
    } else {
      err << "warning: no certificate available to falsify; pass --udp-S0/--udp-kappa0/--udp-Delta or --re-S\n";
    }
    const long h_order = config.h_S > 0 ? config.h_S : report.S;
    if (h_order > 0) {
      report.h_counterexample =
          h_falsify(d, h_order, config.h_kappa, config.falsify_budget, config.seed);
    }
  }

  emit(to_json(report), config, out);
  return 0;
}

int dispatch_solve(const CliConfig& config, std::ostream& out, std::ostream&) {
  const DesignMatrix d = decompose(read_csv_matrix(config.matrix_path, config.header));
  const Eigen::VectorXd y = read_csv_vector(config.response_path, config.header);
  RegressionProblem prob{d, y, std::nullopt, std::nullopt};
  const SolverResult result =
      config.solver == "lasso"
          ? lasso(prob, config.lambda, config.solve_tol, config.max_iter)
          : dantzig(prob, config.lambda, config.solve_tol);
  emit(to_json(result), config, out);
  return result.status == SolveStatus::infeasible ? 1 : 0;
}

int dispatch_bound(const CliConfig& config, std::ostream& out, std::ostream& err) {
  const DesignMatrix d = decompose(read_csv_matrix(config.matrix_path, config.header));
  const Eigen::VectorXd beta_star = read_csv_vector(config.target_path, config.header);
  const UdpCertificate cert = certificate_from_json(read_json_file(config.cert_path));
  const Estimator estimator = estimator_from_name(config.estimator);
  const NoiseModel nm = noise_level(d, config.sigma, config.t);

  double lambda = config.lambda;
  if (config.lambda_auto) {
    const double denom = estimator == Estimator::lasso ? 1.0 - 2.0 * cert.kappa0
                                                       : 1.0 - 4.0 * cert.kappa0;
    // An out-of-range kappa0 cannot satisfy the tuning condition for any
    // lambda; a placeholder keeps the report well-defined.
    lambda = denom > 0.0 ? std::max(1.01 * nm.lambda0 / denom, 1e-12) : 1e-12;
  }

  const OracleBoundReport l1_report = l1_bound(beta_star, cert, lambda, nm.lambda0, estimator);
  const OracleBoundReport pred_report =
      pred_bound(beta_star, cert, lambda, nm.lambda0, estimator);
  const OracleBoundReport& selected = config.method == "pred" ? pred_report : l1_report;

  Json doc = to_json(selected);
  doc["noise_model"] = to_json(nm);
  emit(doc, config, out);
  if (!selected.tuning_ok) {
    err << "tuning condition fails: the requested theorem does not apply\n";
    return 3;
  }
  return 0;
}

int dispatch_ideal(const CliConfig& config, std::ostream& out, std::ostream&) {
  const DesignMatrix d = decompose(read_csv_matrix(config.matrix_path, config.header));
  const Eigen::VectorXd beta_star = read_csv_vector(config.target_path, config.header);
  const IdealBenchmark bench = ideal_benchmark(d, beta_star, config.sigma, config.support);
  Json doc;
  doc["benchmark"] = to_json(bench);
  if (config.mc_trials > 0) {
    doc["monte_carlo"] = to_json(monte_carlo_ideal(d, beta_star, config.sigma,
                                                   config.support, config.mc_trials,
                                                   config.seed));
  } else {
    doc["monte_carlo"] = nullptr;
  }
  emit(doc, config, out);
  return 0;
}

int dispatch_experiment(const CliConfig& config, std::ostream& out, std::ostream& err) {
  const ExperimentConfig exp_config =
      experiment_config_from_json(read_json_file(config.config_path));
  const bool keep_trials = !config.dump_trials_path.empty();
  const ExperimentReport report = run_experiment(exp_config, keep_trials);
  if (report.uninformative_certificate) {
    err << "warning: uninformative certificate (S0 = 0), no trials evaluated\n";
  }
  if (keep_trials) write_trials_csv(config.dump_trials_path, report.trial_log);
  emit(to_json(report), config, out);
  return 0;
}

}  // namespace

CliConfig parse_args(const std::vector<std::string>& args) {
  CliConfig config;
  config.seed = default_seed_from_env();

  CLI::App app{"Design certification and oracle-inequality toolkit for sparse regression"};
  app.require_subcommand(0, 1);
  app.allow_extras(true);  // unmatched tokens are reported by name below

  std::string lambda_text = "auto";
  std::string support_text;

  auto add_common = [&](CLI::App* sub, bool wants_matrix) {
    if (wants_matrix) {
      sub->add_option("--matrix", config.matrix_path, "design matrix CSV")->required();
      sub->add_flag("--header", config.header, "skip one CSV header line");
    }
    sub->add_option("--out", config.out_path, "write the JSON document here instead of stdout");
    sub->add_flag("--pretty", config.json_pretty, "indent the JSON output");
    sub->add_option("--seed", config.seed,
                    "random seed (default from UDP_CERTIFY_SEED when set)");
  };

  CLI::App* certify = app.add_subcommand("certify", "distortion estimate for ker(X)");
  add_common(certify, true);
  certify->add_option("--method", config.method, "exact | search")
      ->check(CLI::IsMember({"exact", "search"}));
  certify->add_option("--tol", config.tol, "bracket width for the exact method");
  certify->add_option("--restarts", config.restarts, "search restarts");
  certify->add_option("--iters", config.iters, "subgradient iterations per restart");
  certify->add_flag("--to-udp", config.to_udp, "chain into a UDP certificate");
  certify->add_option("--kappa0", config.kappa0, "certificate magnitude in (0, 1/2)");

  CLI::App* conditions = app.add_subcommand("conditions", "RIP/RE/Compatibility and falsifiers");
  add_common(conditions, true);
  conditions->add_option("--rip-S", config.rip_S, "compute theta_S exactly");
  conditions->add_option("--re-S", config.re_S, "estimate kappa(S, c0)");
  conditions->add_option("--compat-S", config.compat_S, "estimate phi(S, c0)");
  conditions->add_option("--c0", config.c0, "cone parameter");
  conditions->add_option("--restarts", config.cone_restarts, "cone search restarts");
  conditions->add_option("--falsify-budget", config.falsify_budget, "samples per falsifier");
  conditions->add_option("--udp-S0", config.udp_S0, "certificate order to falsify");
  conditions->add_option("--udp-kappa0", config.udp_kappa0, "certificate magnitude");
  conditions->add_option("--udp-Delta", config.udp_Delta, "certificate parameter");
  conditions->add_option("--h-S", config.h_S, "H condition order");
  conditions->add_option("--h-kappa", config.h_kappa, "H condition magnitude (< 1/2)");

  CLI::App* solve = app.add_subcommand("solve", "lasso or Dantzig selector");
  add_common(solve, true);
  solve->add_option("--response", config.response_path, "response vector CSV")->required();
  solve->add_option("--method", config.solver, "lasso | dantzig")
      ->check(CLI::IsMember({"lasso", "dantzig"}));
  solve->add_option("--lambda", config.lambda, "tuning parameter")->required();
  solve->add_option("--tol", config.solve_tol, "convergence tolerance");
  solve->add_option("--max-iter", config.max_iter, "sweep limit (lasso)");

  CLI::App* bound = app.add_subcommand("bound", "oracle-inequality right-hand sides");
  add_common(bound, true);
  bound->add_option("--target", config.target_path, "target vector CSV")->required();
  bound->add_option("--cert", config.cert_path, "UDP certificate JSON")->required();
  bound->add_option("--sigma", config.sigma, "noise standard deviation")->required();
  bound->add_option("--t", config.t, "noise calibration parameter (>= 1)");
  bound->add_option("--lambda", lambda_text, "auto | numeric value");
  bound->add_option("--estimator", config.estimator, "lasso | dantzig")
      ->check(CLI::IsMember({"lasso", "dantzig"}));
  bound->add_option("--kind", config.method, "l1 | pred")
      ->check(CLI::IsMember({"l1", "pred"}));

  CLI::App* ideal = app.add_subcommand("ideal", "ideal-oracle benchmark quantities");
  add_common(ideal, true);
  ideal->add_option("--target", config.target_path, "target vector CSV")->required();
  ideal->add_option("--sigma", config.sigma, "noise standard deviation")->required();
  ideal->add_option("--support", support_text, "comma-separated 0-based indices")->required();
  ideal->add_option("--trials", config.mc_trials, "Monte-Carlo trials (0 disables)");

  CLI::App* experiment = app.add_subcommand("experiment", "Monte-Carlo validation runs");
  add_common(experiment, false);
  experiment->add_option("--config", config.config_path, "experiment config JSON")->required();
  experiment->add_option("--dump-trials", config.dump_trials_path, "per-trial CSV path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    config.help_requested = true;
    const auto chosen = app.get_subcommands();
    config.help_text = chosen.empty() ? app.help() : chosen.front()->help();
    return config;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (!app.remaining(true).empty()) {
    throw UsageError("unknown argument '" + app.remaining(true).front() + "'");
  }
  if (app.get_subcommands().empty()) {
    throw UsageError("a subcommand is required (certify, conditions, solve, bound, ideal, experiment)");
  }

  if (certify->parsed()) {
    config.subcommand = Subcommand::certify;
    if (!(config.tol > 0.0)) throw UsageError("certify: --tol must be positive");
    if (config.to_udp && !(config.kappa0 > 0.0 && config.kappa0 < 0.5)) {
      throw UsageError("certify: --kappa0 must lie in (0, 1/2)");
    }
  } else if (conditions->parsed()) {
    config.subcommand = Subcommand::conditions;
  } else if (solve->parsed()) {
    config.subcommand = Subcommand::solve;
    if (config.solver == "lasso" && !(config.lambda > 0.0)) {
      throw UsageError("solve: --lambda must be positive for the lasso");
    }
    if (config.solver == "dantzig" && config.lambda < 0.0) {
      throw UsageError("solve: --lambda must be nonnegative for the Dantzig selector");
    }
  } else if (bound->parsed()) {
    config.subcommand = Subcommand::bound;
    if (config.method != "pred") config.method = "l1";
    if (lambda_text == "auto") {
      config.lambda_auto = true;
    } else {
      const auto [ptr, ec] = std::from_chars(
          lambda_text.data(), lambda_text.data() + lambda_text.size(), config.lambda);
      if (ec != std::errc() || ptr != lambda_text.data() + lambda_text.size()) {
        throw UsageError("bound: --lambda must be 'auto' or a number, got '" +
                         lambda_text + "'");
      }
      if (!(config.lambda > 0.0)) throw UsageError("bound: --lambda must be positive");
    }
  } else if (ideal->parsed()) {
    config.subcommand = Subcommand::ideal;
    config.support = parse_support_list(support_text);
  } else if (experiment->parsed()) {
    config.subcommand = Subcommand::experiment;
  }
  return config;
}

int dispatch(const CliConfig& config, std::ostream& out, std::ostream& err) {
  if (config.help_requested) {
    out << config.help_text;
    return 0;
  }
  try {
    switch (config.subcommand) {
      case Subcommand::certify: return dispatch_certify(config, out, err);
      case Subcommand::conditions: return dispatch_conditions(config, out, err);
      case Subcommand::solve: return dispatch_solve(config, out, err);
      case Subcommand::bound: return dispatch_bound(config, out, err);
      case Subcommand::ideal: return dispatch_ideal(config, out, err);
      case Subcommand::experiment: return dispatch_experiment(config, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CliConfig config;
  try {
    config = parse_args(args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return dispatch(config, out, err);
}

}  // namespace udpcert
