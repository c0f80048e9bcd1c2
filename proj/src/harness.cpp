#include "udpcert/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "udpcert/distortion.hpp"
#include "udpcert/rng.hpp"
#include "udpcert/solvers.hpp"

namespace udpcert {

namespace {

constexpr double kLambdaFloor = 1e-12;  // keeps sigma = 0 pipelines defined

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Tightest instance of the residual diagnostic: the subset minimizing
// ||h_S||_1 + ||beta*_{S^c}||_1 collects exactly the coordinates where
// |h_i| < |beta*_i|.
double diag_rhs_minimum(const Eigen::VectorXd& h, const Eigen::VectorXd& beta_star) {
  double rhs = beta_star.lpNorm<1>();
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    rhs += std::min(0.0, std::abs(h(i)) - std::abs(beta_star(i)));
  }
  return rhs;
}

}  // namespace

DesignMatrix gen_gaussian_design(long n, long p, bool normalize,
                                 std::uint64_t seed) {
  if (n < 1 || p < n) throw std::invalid_argument("gen_gaussian_design: requires 1 <= n <= p");
  Rng rng(seed);
  Eigen::MatrixXd X(n, p);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < p; ++j) X(i, j) = rng.gaussian();
  }
  if (normalize) {
    for (long j = 0; j < p; ++j) {
      const double norm = X.col(j).norm();
      if (norm > 0.0) X.col(j) /= norm;
    }
  }
  return decompose(X);
}

Eigen::VectorXd gen_sparse_target(long p, long s, double amplitude,
                                  std::uint64_t seed) {
  if (p < 1 || s < 1 || s > p) {
    throw std::invalid_argument("gen_sparse_target: requires 1 <= s <= p");
  }
  if (!(amplitude > 0.0)) {
    throw std::invalid_argument("gen_sparse_target: amplitude must be positive");
  }
  Rng rng(seed);
  std::vector<long> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0L);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (long i = 0; i < s; ++i) {
    const long j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    beta(idx[static_cast<std::size_t>(i)]) = rng.uniform() < 0.5 ? amplitude : -amplitude;
  }
  return beta;
}

TrialRecord run_trial(const DesignMatrix& d, const Eigen::VectorXd& beta_star,
                      const UdpCertificate& cert, double sigma, double t,
                      double lambda_rule, Estimator estimator,
                      std::uint64_t seed) {
  if (!(lambda_rule > 1.0)) {
    throw std::invalid_argument("run_trial: lambda_rule must exceed 1");
  }
  if (beta_star.size() != d.p()) {
    throw std::invalid_argument("run_trial: target dimension mismatch");
  }
  const double kappa_cap = estimator == Estimator::lasso ? 0.5 : 0.25;
  if (!(cert.kappa0 > 0.0 && cert.kappa0 < kappa_cap)) {
    throw std::invalid_argument(
        "run_trial: certificate magnitude outside the estimator's range");
  }

  const NoiseModel nm = noise_level(d, sigma, t);
  Rng rng(seed);
  const Eigen::VectorXd eps = sigma * rng.gaussian_vector(d.n());
  const Eigen::VectorXd y = d.entries() * beta_star + eps;

  TrialRecord rec;
  rec.seed = seed;
  rec.noise_event_held =
      (d.entries().transpose() * eps).lpNorm<Eigen::Infinity>() <= nm.lambda0;

  const double kappa_mult = estimator == Estimator::lasso ? 2.0 : 4.0;
  const double lambda =
      std::max(lambda_rule * nm.lambda0 / (1.0 - kappa_mult * cert.kappa0),
               kLambdaFloor);

  RegressionProblem prob{d, y, beta_star, sigma};
  const SolverResult solved = estimator == Estimator::lasso
                                  ? lasso(prob, lambda)
                                  : dantzig(prob, lambda);

  const Eigen::VectorXd h = solved.estimate - beta_star;
  rec.l1_error = h.lpNorm<1>();
  rec.pred_error = (d.entries() * h).norm();

  const OracleBoundReport l1_report =
      l1_bound(beta_star, cert, lambda, nm.lambda0, estimator);
  const OracleBoundReport pred_report =
      pred_bound(beta_star, cert, lambda, nm.lambda0, estimator);
  rec.bound_l1 = l1_report.bound.value();
  rec.bound_pred = pred_report.bound.value();
  rec.violated = rec.noise_event_held &&
                 (rec.l1_error > rec.bound_l1 || rec.pred_error > rec.bound_pred);

  if (rec.noise_event_held) {
    const double image_sq = (d.entries() * h).squaredNorm();
    const double lhs =
        estimator == Estimator::lasso
            ? (0.5 * image_sq + (lambda - nm.lambda0) * rec.l1_error) / (2.0 * lambda)
            : (image_sq + (lambda - nm.lambda0) * rec.l1_error) / (4.0 * lambda);
    rec.appendix_diag_ok = lhs <= diag_rhs_minimum(h, beta_star) + 1e-7;
  }
  return rec;
}

ExperimentReport run_experiment(const ExperimentConfig& config, bool keep_trials) {
  if (config.trials < 0) throw std::invalid_argument("run_experiment: negative trial count");
  if (config.s < 1 || config.s > config.p) {
    throw std::invalid_argument("run_experiment: sparsity out of range");
  }

  const DesignMatrix design =
      gen_gaussian_design(config.n, config.p, config.normalize, config.seed);
  const Eigen::VectorXd beta_star =
      gen_sparse_target(config.p, config.s, config.amplitude, config.seed + 1);

  UdpCertificate cert;
  if (config.certificate_source == "exact") {
    const DistortionEstimate est = distortion_exact(design, config.distortion_tol);
    cert = udp_from_distortion(est, smallest_singular(design), config.kappa0,
                               config.p);
  } else if (config.certificate_source == "search") {
    const DistortionEstimate est =
        distortion_search(design, config.restarts, 500, config.seed);
    cert = udp_from_distortion(est, smallest_singular(design), config.kappa0,
                               config.p);
  } else if (config.certificate_source == "assumed") {
    cert.S0 = config.assumed_S0;
    cert.kappa0 = config.kappa0;
    cert.Delta = config.assumed_Delta;
    cert.provenance = CertProvenance::assumed;
  } else {
    throw std::invalid_argument("run_experiment: unknown certificate_source '" +
                                config.certificate_source + "'");
  }

  ExperimentReport report;
  report.config = config;
  report.certificate = cert;
  report.prob_floor = noise_level(design, config.sigma, config.t).prob_floor;
  report.lambda_floor_applied = config.sigma == 0.0;
  report.uninformative_certificate = cert.S0 <= 0;
  if (report.uninformative_certificate) return report;  // nothing to evaluate

  std::vector<double> l1_errors, pred_errors, l1_bounds, pred_bounds;
  long events = 0;
  for (long i = 0; i < config.trials; ++i) {
    const TrialRecord rec =
        run_trial(design, beta_star, cert, config.sigma, config.t,
                  config.lambda_rule, config.estimator, config.seed + 2 + i);
    events += rec.noise_event_held ? 1 : 0;
    report.violations += rec.violated ? 1 : 0;
    report.appendix_diag_failures += rec.appendix_diag_ok ? 0 : 1;
    l1_errors.push_back(rec.l1_error);
    pred_errors.push_back(rec.pred_error);
    l1_bounds.push_back(rec.bound_l1);
    pred_bounds.push_back(rec.bound_pred);
    if (keep_trials) report.trial_log.push_back(rec);
  }
  report.trials = config.trials;
  report.event_frequency =
      config.trials > 0 ? static_cast<double>(events) / static_cast<double>(config.trials)
                        : 0.0;
  report.mean_l1_error = mean_of(l1_errors);
  report.median_l1_error = median_of(l1_errors);
  report.mean_pred_error = mean_of(pred_errors);
  report.median_pred_error = median_of(pred_errors);
  report.mean_bound_l1 = mean_of(l1_bounds);
  report.median_bound_l1 = median_of(l1_bounds);
  report.mean_bound_pred = mean_of(pred_bounds);
  report.median_bound_pred = median_of(pred_bounds);
  return report;
}

IdealMonteCarlo monte_carlo_ideal(const DesignMatrix& d,
                                  const Eigen::VectorXd& beta_star,
                                  double sigma,
                                  const std::vector<long>& support,
                                  long trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("monte_carlo_ideal: trials must be positive");
  const IdealBenchmark bench = ideal_benchmark(d, beta_star, sigma, support);

  Eigen::VectorXd beta_restricted = Eigen::VectorXd::Zero(d.p());
  for (long i : support) beta_restricted(i) = beta_star(i);
  const Eigen::VectorXd signal = d.entries() * beta_restricted;

  double est_sq = 0.0;
  double pred_sq = 0.0;
  for (long i = 0; i < trials; ++i) {
    Rng rng(seed + static_cast<std::uint64_t>(i));
    const Eigen::VectorXd eps = sigma * rng.gaussian_vector(d.n());
    RegressionProblem prob{d, signal + eps, std::nullopt, sigma};
    const Eigen::VectorXd ideal = oracle_ls(prob, support);
    est_sq += (ideal - beta_restricted).squaredNorm();
    pred_sq += (d.entries() * (ideal - beta_restricted)).squaredNorm();
  }

  IdealMonteCarlo mc;
  mc.empirical_est_sq = est_sq / static_cast<double>(trials);
  mc.empirical_pred_sq = pred_sq / static_cast<double>(trials);
  mc.trace_term = bench.trace_term;
  mc.pred_term = bench.pred_term;
  mc.rel_dev_est = bench.trace_term > 0.0
                       ? std::abs(mc.empirical_est_sq - bench.trace_term) / bench.trace_term
                       : mc.empirical_est_sq;
  mc.rel_dev_pred = bench.pred_term > 0.0
                        ? std::abs(mc.empirical_pred_sq - bench.pred_term) / bench.pred_term
                        : mc.empirical_pred_sq;
  return mc;
}

}  // namespace udpcert
