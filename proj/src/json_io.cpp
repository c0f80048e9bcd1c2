#include "udpcert/json_io.hpp"

#include <stdexcept>

namespace udpcert {

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

std::string method_name(DistortionMethod m) {
  switch (m) {
    case DistortionMethod::exact_grid: return "exact_grid";
    case DistortionMethod::randomized_witness: return "randomized_witness";
    case DistortionMethod::trivial: return "trivial";
  }
  return "trivial";
}

std::string provenance_name(CertProvenance p) {
  switch (p) {
    case CertProvenance::distortion: return "distortion";
    case CertProvenance::rip: return "rip";
    case CertProvenance::re: return "re";
    case CertProvenance::compatibility: return "compatibility";
    case CertProvenance::assumed: return "assumed";
  }
  return "assumed";
}

CertProvenance provenance_from_name(const std::string& name) {
  if (name == "distortion") return CertProvenance::distortion;
  if (name == "rip") return CertProvenance::rip;
  if (name == "re") return CertProvenance::re;
  if (name == "compatibility") return CertProvenance::compatibility;
  if (name == "assumed") return CertProvenance::assumed;
  throw std::invalid_argument("unknown certificate provenance '" + name + "'");
}

std::string status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::iteration_limit: return "iteration_limit";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "infeasible";
}

std::string theorem_name(BoundTheorem t) {
  switch (t) {
    case BoundTheorem::lasso_l1: return "lasso_l1";
    case BoundTheorem::lasso_pred: return "lasso_pred";
    case BoundTheorem::dantzig_l1: return "dantzig_l1";
    case BoundTheorem::dantzig_pred: return "dantzig_pred";
  }
  return "lasso_l1";
}

}  // namespace

std::string estimator_name(Estimator e) {
  return e == Estimator::lasso ? "lasso" : "dantzig";
}

Estimator estimator_from_name(const std::string& name) {
  if (name == "lasso") return Estimator::lasso;
  if (name == "dantzig") return Estimator::dantzig;
  throw std::invalid_argument("unknown estimator '" + name + "'");
}

Json to_json(const DistortionEstimate& est) {
  Json j;
  j["method"] = method_name(est.method);
  j["delta_lower"] = est.lower;
  j["delta_upper"] = est.upper;
  j["witness"] = to_std(est.witness);
  j["grid_resolution"] =
      est.grid_resolution ? Json(*est.grid_resolution) : Json(nullptr);
  return j;
}

Json to_json(const UdpCertificate& cert) {
  Json j;
  j["S0"] = cert.S0;
  j["kappa0"] = cert.kappa0;
  j["Delta"] = cert.Delta;
  j["provenance"] = provenance_name(cert.provenance);
  Json inputs = Json::object();
  if (cert.inputs.delta_upper) inputs["delta_upper"] = *cert.inputs.delta_upper;
  if (cert.inputs.rho_n) inputs["rho_n"] = *cert.inputs.rho_n;
  if (cert.inputs.theta_5s) inputs["theta_5S"] = *cert.inputs.theta_5s;
  if (cert.inputs.cone_constant) inputs["cone_constant"] = *cert.inputs.cone_constant;
  if (cert.inputs.c0) inputs["c0"] = *cert.inputs.c0;
  if (cert.inputs.p) inputs["p"] = *cert.inputs.p;
  j["inputs"] = inputs;
  return j;
}

UdpCertificate certificate_from_json(const Json& j) {
  UdpCertificate cert;
  cert.S0 = j.at("S0").get<long>();
  cert.kappa0 = j.at("kappa0").get<double>();
  cert.Delta = j.at("Delta").get<double>();
  cert.provenance = provenance_from_name(j.value("provenance", "assumed"));
  if (j.contains("inputs")) {
    const Json& inputs = j.at("inputs");
    if (inputs.contains("delta_upper")) cert.inputs.delta_upper = inputs.at("delta_upper").get<double>();
    if (inputs.contains("rho_n")) cert.inputs.rho_n = inputs.at("rho_n").get<double>();
    if (inputs.contains("theta_5S")) cert.inputs.theta_5s = inputs.at("theta_5S").get<double>();
    if (inputs.contains("cone_constant")) cert.inputs.cone_constant = inputs.at("cone_constant").get<double>();
    if (inputs.contains("c0")) cert.inputs.c0 = inputs.at("c0").get<double>();
    if (inputs.contains("p")) cert.inputs.p = inputs.at("p").get<long>();
  }
  return cert;
}

Json to_json(const Counterexample& ce) {
  Json j;
  j["gamma"] = to_std(ce.gamma);
  j["subset"] = ce.subset;
  j["violation"] = ce.violation;
  return j;
}

Json to_json(const ConditionReport& report) {
  Json j;
  j["rip_theta"] = report.rip_theta ? Json(*report.rip_theta) : Json(nullptr);
  j["re_kappa_upper"] =
      report.re_kappa_upper ? Json(*report.re_kappa_upper) : Json(nullptr);
  j["compat_phi_upper"] =
      report.compat_phi_upper ? Json(*report.compat_phi_upper) : Json(nullptr);
  j["udp_counterexample"] =
      report.udp_counterexample ? to_json(*report.udp_counterexample) : Json(nullptr);
  j["h_counterexample"] =
      report.h_counterexample ? to_json(*report.h_counterexample) : Json(nullptr);
  Json params;
  params["S"] = report.S;
  params["c0"] = report.c0;
  params["kappa"] = report.kappa;
  j["parameters"] = params;
  return j;
}

Json to_json(const SolverResult& result) {
  Json j;
  j["estimate"] = to_std(result.estimate);
  j["lambda"] = result.lambda;
  j["objective"] = result.objective;
  j["kkt_residual"] = result.kkt_residual;
  j["iterations"] = result.iterations;
  j["status"] = status_name(result.status);
  return j;
}

Json to_json(const NoiseModel& nm) {
  Json j;
  j["sigma"] = nm.sigma;
  j["t"] = nm.t;
  j["lambda0"] = nm.lambda0;
  j["prob_floor"] = nm.prob_floor;
  j["col_norm_max"] = nm.col_norm_max;
  return j;
}

Json to_json(const OracleBoundReport& report) {
  Json j;
  j["theorem"] = theorem_name(report.theorem);
  j["tuning_ok"] = report.tuning_ok;
  j["bound"] = report.bound ? Json(*report.bound) : Json(nullptr);
  j["prefactor"] = report.prefactor ? Json(*report.prefactor) : Json(nullptr);
  j["minimizing_s"] = report.minimizing_s;
  j["minimizing_subset"] = report.minimizing_subset;
  j["lambda"] = report.lambda;
  j["lambda0"] = report.lambda0;
  Json per_s = Json::array();
  for (const auto& [s, value] : report.per_s) per_s.push_back(Json::array({s, value}));
  j["per_s"] = per_s;
  return j;
}

Json to_json(const MultFactors& mf) {
  Json j;
  j["c_mult"] = mf.c_mult;
  j["c_mult_prime"] = mf.c_mult_prime;
  j["c_mult_optimal"] =
      mf.c_mult_optimal ? Json(*mf.c_mult_optimal) : Json(nullptr);
  j["c_mult_prime_optimal"] =
      mf.c_mult_prime_optimal ? Json(*mf.c_mult_prime_optimal) : Json(nullptr);
  return j;
}

Json to_json(const IdealBenchmark& bench) {
  Json j;
  j["trace_term"] = bench.trace_term;
  j["pred_term"] = bench.pred_term;
  j["l1_benchmark"] = bench.l1_benchmark;
  j["pred_benchmark"] = bench.pred_benchmark;
  return j;
}

Json to_json(const IdealMonteCarlo& mc) {
  Json j;
  j["empirical_est_sq"] = mc.empirical_est_sq;
  j["empirical_pred_sq"] = mc.empirical_pred_sq;
  j["trace_term"] = mc.trace_term;
  j["pred_term"] = mc.pred_term;
  j["rel_dev_est"] = mc.rel_dev_est;
  j["rel_dev_pred"] = mc.rel_dev_pred;
  return j;
}

Json to_json(const TrialRecord& rec) {
  Json j;
  j["seed"] = rec.seed;
  j["noise_event_held"] = rec.noise_event_held;
  j["l1_error"] = rec.l1_error;
  j["pred_error"] = rec.pred_error;
  j["bound_l1"] = rec.bound_l1;
  j["bound_pred"] = rec.bound_pred;
  j["violated"] = rec.violated;
  j["appendix_diag_ok"] = rec.appendix_diag_ok;
  return j;
}

Json to_json(const ExperimentConfig& config) {
  Json j;
  j["n"] = config.n;
  j["p"] = config.p;
  j["s"] = config.s;
  j["sigma"] = config.sigma;
  j["t"] = config.t;
  j["kappa0"] = config.kappa0;
  j["lambda_rule"] = config.lambda_rule;
  j["estimator"] = estimator_name(config.estimator);
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["certificate_source"] = config.certificate_source;
  j["amplitude"] = config.amplitude;
  j["normalize"] = config.normalize;
  j["distortion_tol"] = config.distortion_tol;
  j["restarts"] = config.restarts;
  j["assumed_S0"] = config.assumed_S0;
  j["assumed_Delta"] = config.assumed_Delta;
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig config;
  config.n = j.at("n").get<long>();
  config.p = j.at("p").get<long>();
  config.s = j.at("s").get<long>();
  config.sigma = j.at("sigma").get<double>();
  config.t = j.at("t").get<double>();
  config.kappa0 = j.at("kappa0").get<double>();
  config.lambda_rule = j.at("lambda_rule").get<double>();
  config.estimator = estimator_from_name(j.at("estimator").get<std::string>());
  config.trials = j.at("trials").get<long>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.certificate_source = j.at("certificate_source").get<std::string>();
  config.amplitude = j.value("amplitude", 5.0);
  config.normalize = j.value("normalize", false);
  config.distortion_tol = j.value("distortion_tol", 1e-4);
  config.restarts = j.value("restarts", 64);
  config.assumed_S0 = j.value("assumed_S0", 0L);
  config.assumed_Delta = j.value("assumed_Delta", 0.0);
  return config;
}

Json to_json(const ExperimentReport& report) {
  Json j;
  j["trials"] = report.trials;
  j["event_frequency"] = report.event_frequency;
  j["prob_floor"] = report.prob_floor;
  j["violations"] = report.violations;
  j["appendix_diag_failures"] = report.appendix_diag_failures;
  j["mean_l1_error"] = report.mean_l1_error;
  j["median_l1_error"] = report.median_l1_error;
  j["mean_pred_error"] = report.mean_pred_error;
  j["median_pred_error"] = report.median_pred_error;
  j["mean_bound_l1"] = report.mean_bound_l1;
  j["median_bound_l1"] = report.median_bound_l1;
  j["mean_bound_pred"] = report.mean_bound_pred;
  j["median_bound_pred"] = report.median_bound_pred;
  j["uninformative_certificate"] = report.uninformative_certificate;
  j["lambda_floor_applied"] = report.lambda_floor_applied;
  j["certificate"] = to_json(report.certificate);
  j["config"] = to_json(report.config);
  return j;
}

}  // namespace udpcert
