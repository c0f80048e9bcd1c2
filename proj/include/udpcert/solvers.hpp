#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "udpcert/linalg.hpp"

namespace udpcert {

enum class SolveStatus { converged, iteration_limit, infeasible };

struct SolverResult {
  Eigen::VectorXd estimate;
  double lambda = 0.0;
  // lasso: 0.5 ||X b - y||^2 + lambda ||b||_1; Dantzig: ||b||_1.
  double objective = 0.0;
  // lasso: max_j KKT violation; Dantzig: max(0, ||X^T(y - X b)||_inf - lambda).
  double kkt_residual = 0.0;
  long iterations = 0;
  SolveStatus status = SolveStatus::converged;
};

struct RegressionProblem {
  DesignMatrix design;
  Eigen::VectorXd response;
  std::optional<Eigen::VectorXd> true_target;
  std::optional<double> noise_sd;
};

// Cyclic coordinate descent on 0.5 ||X b - y||^2 + lambda ||b||_1 from b = 0.
// Converged means the KKT residual is at most tol; the objective never
// increases across sweeps. Zero columns keep a zero coefficient.
SolverResult lasso(const RegressionProblem& prob, double lambda,
                   double tol = 1e-8, long max_iter = 100000);

// Dantzig selector min ||b||_1 s.t. ||X^T(y - X b)||_inf <= lambda, solved as
// a split-variable LP by two-phase dense simplex with Bland's rule, which is
// deterministic and cannot cycle.
SolverResult dantzig(const RegressionProblem& prob, double lambda,
                     double tol = 1e-9);

// Least squares restricted to `support` (0-based column indices), zero
// elsewhere. The restricted design must have full column rank.
Eigen::VectorXd oracle_ls(const RegressionProblem& prob,
                          const std::vector<long>& support);

// sign(v_i) max(|v_i| - lambda, 0); ties at |v_i| = lambda map to 0.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double lambda);

}  // namespace udpcert
