#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "udpcert/conditions.hpp"
#include "udpcert/linalg.hpp"

namespace udpcert {

// Gaussian noise calibration:
//   lambda0 = (1 + t) ||X||_{2,inf} sigma sqrt(log p)
//   prob_floor = 1 - sqrt(2) / ((1+t) sqrt(pi log p) p^{(1+t)^2/2 - 1}),
// a lower bound on P(||X^T eps||_inf <= lambda0). prob_floor is stored
// unclamped; consumers clamp at 0 for interpretation.
struct NoiseModel {
  double sigma = 0.0;
  double t = 1.0;
  double lambda0 = 0.0;
  double prob_floor = 0.0;
  double col_norm_max = 0.0;
};

NoiseModel noise_level(const DesignMatrix& d, double sigma, double t);

enum class Estimator { lasso, dantzig };
enum class BoundTheorem { lasso_l1, lasso_pred, dantzig_l1, dantzig_pred };

struct OracleBoundReport {
  BoundTheorem theorem = BoundTheorem::lasso_l1;
  std::optional<double> bound;        // absent when tuning_ok is false
  long minimizing_s = 0;
  std::vector<long> minimizing_subset;
  std::optional<double> prefactor;
  bool tuning_ok = false;
  std::vector<std::pair<long, double>> per_s;
  double lambda = 0.0;
  double lambda0 = 0.0;
};

// l1-risk bound:
//   lasso:   [2 / ((1 - lambda0/lambda) - 2 kappa0)] min_s (lambda Delta^2 s + tail_s)
//   Dantzig: [4 / ((1 - lambda0/lambda) - 4 kappa0)] min_s (lambda Delta^2 s + tail_s)
// where tail_s = ||beta*_{S^c}||_1 for the top-s subset of |beta*|, which
// minimizes the tail at fixed s. Tuning requires kappa0 < 1/2 and
// lambda > lambda0 / (1 - 2 kappa0) for the lasso (1/4 and 4 kappa0 for the
// Dantzig selector), strictly. A violated tuning condition yields a report
// with tuning_ok = false and no bound; S0 = 0 is an error.
OracleBoundReport l1_bound(const Eigen::VectorXd& beta_star,
                           const UdpCertificate& cert, double lambda,
                           double lambda0, Estimator estimator);

// Prediction bound min_s [4 lambda Delta sqrt(s) + tail_s / (Delta sqrt(s))],
// the same expression for both estimators; the tuning conditions match
// l1_bound, which is why lambda0 appears in the signature.
OracleBoundReport pred_bound(const Eigen::VectorXd& beta_star,
                             const UdpCertificate& cert, double lambda,
                             double lambda0, Estimator estimator);

struct MultFactors {
  double c_mult = 0.0;        // delta^2 sqrt(log p) / rho_n
  double c_mult_prime = 0.0;  // delta sqrt(log p) / rho_n
  // Optimal-distortion forms, reported when C is supplied:
  //   C p (1 + log(p/n)) sqrt(log p) / (n rho_n)
  //   C sqrt(p log p (1 + log(p/n))) / (rho_n sqrt(n))
  std::optional<double> c_mult_optimal;
  std::optional<double> c_mult_prime_optimal;
};

MultFactors mult_factors(double delta, double rho_n, long n, long p,
                         std::optional<double> C = std::nullopt);

// Ideal-oracle benchmark quantities for a known support S:
//   trace_term     = Trace((X_S^T X_S)^{-1}) sigma^2   (exact E||b^ideal - b*_S||^2)
//   pred_term      = sigma^2 |S|                        (exact E||X b^ideal - X b*_S||^2)
//   l1_benchmark   = sigma |S| / rho_1 + ||beta*_{S^c}||_1
//   pred_benchmark = sigma sqrt(|S|) + rho_1 ||beta*_{S^c}||_1
struct IdealBenchmark {
  double trace_term = 0.0;
  double pred_term = 0.0;
  double l1_benchmark = 0.0;
  double pred_benchmark = 0.0;
};

IdealBenchmark ideal_benchmark(const DesignMatrix& d,
                               const Eigen::VectorXd& beta_star, double sigma,
                               const std::vector<long>& support);

}  // namespace udpcert
