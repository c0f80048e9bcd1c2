#include "udpcert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

namespace udpcert {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct TailTable {
  std::vector<long> order;     // indices of |beta*| in decreasing magnitude
  std::vector<double> tails;   // tails[s] = ||beta*_{S_s^c}||_1 for the top-s subset
};

TailTable build_tails(const Eigen::VectorXd& beta_star) {
  TailTable table;
  table.order.resize(static_cast<std::size_t>(beta_star.size()));
  std::iota(table.order.begin(), table.order.end(), 0L);
  std::stable_sort(table.order.begin(), table.order.end(), [&](long a, long b) {
    return std::abs(beta_star(a)) > std::abs(beta_star(b));
  });
  table.tails.resize(static_cast<std::size_t>(beta_star.size()) + 1);
  double tail = beta_star.lpNorm<1>();
  table.tails[0] = tail;
  for (std::size_t s = 0; s < table.order.size(); ++s) {
    tail -= std::abs(beta_star(table.order[s]));
    table.tails[s + 1] = std::max(tail, 0.0);
  }
  return table;
}

OracleBoundReport evaluate_bound(const Eigen::VectorXd& beta_star,
                                 const UdpCertificate& cert, double lambda,
                                 double lambda0, Estimator estimator,
                                 bool prediction) {
  if (cert.S0 <= 0) {
    throw std::runtime_error("bound: certificate is uninformative (S0 = 0)");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("bound: lambda must be positive");
  if (lambda0 < 0.0) throw std::invalid_argument("bound: lambda0 must be nonnegative");
  if (beta_star.size() < 1) throw std::invalid_argument("bound: empty target");

  const bool is_lasso = estimator == Estimator::lasso;
  OracleBoundReport report;
  report.theorem = prediction
                       ? (is_lasso ? BoundTheorem::lasso_pred : BoundTheorem::dantzig_pred)
                       : (is_lasso ? BoundTheorem::lasso_l1 : BoundTheorem::dantzig_l1);
  report.lambda = lambda;
  report.lambda0 = lambda0;

  const double kappa_cap = is_lasso ? 0.5 : 0.25;
  const double kappa_mult = is_lasso ? 2.0 : 4.0;
  const double margin = (1.0 - lambda0 / lambda) - kappa_mult * cert.kappa0;
  // Both inequalities are strict; callers wanting the threshold add margin.
  report.tuning_ok =
      cert.kappa0 > 0.0 && cert.kappa0 < kappa_cap && margin > 0.0;

  const TailTable tails = build_tails(beta_star);
  const long s_max = std::min<long>(cert.S0, beta_star.size());
  report.per_s.reserve(static_cast<std::size_t>(s_max));
  double best = std::numeric_limits<double>::infinity();
  long best_s = 0;
  for (long s = 1; s <= s_max; ++s) {
    const double tail = tails.tails[static_cast<std::size_t>(s)];
    const double value =
        prediction
            ? 4.0 * lambda * cert.Delta * std::sqrt(static_cast<double>(s)) +
                  tail / (cert.Delta * std::sqrt(static_cast<double>(s)))
            : lambda * cert.Delta * cert.Delta * static_cast<double>(s) + tail;
    report.per_s.emplace_back(s, value);
    if (value < best) {
      best = value;
      best_s = s;
    }
  }
  report.minimizing_s = best_s;
  report.minimizing_subset.assign(tails.order.begin(), tails.order.begin() + best_s);
  std::sort(report.minimizing_subset.begin(), report.minimizing_subset.end());

  if (report.tuning_ok) {
    const double prefactor = prediction ? 1.0 : kappa_mult / margin;
    report.prefactor = prefactor;
    report.bound = prefactor * best;
  }
  return report;
}

}  // namespace

NoiseModel noise_level(const DesignMatrix& d, double sigma, double t) {
  if (d.p() < 2) throw std::invalid_argument("noise_level: requires p >= 2");
  if (sigma < 0.0) throw std::invalid_argument("noise_level: sigma must be nonnegative");
  if (!(t >= 1.0)) throw std::invalid_argument("noise_level: t must be at least 1");

  const double log_p = std::log(static_cast<double>(d.p()));
  NoiseModel nm;
  nm.sigma = sigma;
  nm.t = t;
  nm.col_norm_max = d.column_norm_max();
  nm.lambda0 = (1.0 + t) * nm.col_norm_max * sigma * std::sqrt(log_p);
  nm.prob_floor = 1.0 - std::sqrt(2.0) /
                            ((1.0 + t) * std::sqrt(kPi * log_p) *
                             std::pow(static_cast<double>(d.p()),
                                      (1.0 + t) * (1.0 + t) / 2.0 - 1.0));
  return nm;
}

OracleBoundReport l1_bound(const Eigen::VectorXd& beta_star,
                           const UdpCertificate& cert, double lambda,
                           double lambda0, Estimator estimator) {
  return evaluate_bound(beta_star, cert, lambda, lambda0, estimator, false);
}

OracleBoundReport pred_bound(const Eigen::VectorXd& beta_star,
                             const UdpCertificate& cert, double lambda,
                             double lambda0, Estimator estimator) {
  return evaluate_bound(beta_star, cert, lambda, lambda0, estimator, true);
}

MultFactors mult_factors(double delta, double rho_n, long n, long p,
                         std::optional<double> C) {
  if (!(rho_n > 0.0)) throw std::invalid_argument("mult_factors: rho_n must be positive");
  if (n < 2 || p < n) throw std::invalid_argument("mult_factors: requires 2 <= n <= p");
  if (!(delta > 0.0)) throw std::invalid_argument("mult_factors: delta must be positive");

  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);
  const double root_log_p = std::sqrt(std::log(dp));

  MultFactors mf;
  mf.c_mult = delta * delta * root_log_p / rho_n;
  mf.c_mult_prime = delta * root_log_p / rho_n;
  if (C) {
    if (!(*C > 0.0)) throw std::invalid_argument("mult_factors: C must be positive");
    const double log_ratio = 1.0 + std::log(dp / dn);
    mf.c_mult_optimal = *C * dp * log_ratio * root_log_p / (dn * rho_n);
    mf.c_mult_prime_optimal =
        *C * std::sqrt(dp * std::log(dp) * log_ratio) / (rho_n * std::sqrt(dn));
  }
  return mf;
}

IdealBenchmark ideal_benchmark(const DesignMatrix& d,
                               const Eigen::VectorXd& beta_star, double sigma,
                               const std::vector<long>& support) {
  if (support.empty()) throw std::invalid_argument("ideal_benchmark: support must be nonempty");
  if (beta_star.size() != d.p()) {
    throw std::invalid_argument("ideal_benchmark: target dimension mismatch");
  }
  if (sigma < 0.0) throw std::invalid_argument("ideal_benchmark: sigma must be nonnegative");

  std::vector<long> sorted = support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("ideal_benchmark: duplicate support index");
  }
  if (sorted.front() < 0 || sorted.back() >= d.p()) {
    throw std::invalid_argument("ideal_benchmark: support index out of range");
  }

  const auto s = static_cast<Eigen::Index>(sorted.size());
  Eigen::MatrixXd sub(d.n(), s);
  for (Eigen::Index j = 0; j < s; ++j) sub.col(j) = d.entries().col(sorted[static_cast<std::size_t>(j)]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
  if (svd.singularValues()(s - 1) <= 1e-10 * d.largest_singular()) {
    throw std::runtime_error("ideal_benchmark: restricted design is rank-deficient");
  }
  // Trace((X_S^T X_S)^{-1}) through the restricted spectrum.
  const double trace_inverse_gram =
      svd.singularValues().array().square().inverse().sum();

  double tail = beta_star.lpNorm<1>();
  for (long i : sorted) tail -= std::abs(beta_star(i));
  tail = std::max(tail, 0.0);

  const double rho_1 = d.largest_singular();
  IdealBenchmark bench;
  bench.trace_term = trace_inverse_gram * sigma * sigma;
  bench.pred_term = sigma * sigma * static_cast<double>(s);
  bench.l1_benchmark = sigma * static_cast<double>(s) / rho_1 + tail;
  bench.pred_benchmark = sigma * std::sqrt(static_cast<double>(s)) + rho_1 * tail;
  return bench;
}

}  // namespace udpcert
