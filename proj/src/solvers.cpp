#include "udpcert/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/SVD>

namespace udpcert {

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// max_j of |g_j - lambda sign(b_j)| on the active set and max(0, |g_j| - lambda)
// off it, where g = X^T (y - X b).
double lasso_kkt_residual(const Eigen::VectorXd& gradient,
                          const Eigen::VectorXd& beta, double lambda) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) {
      worst = std::max(worst, std::abs(gradient(j) - lambda * sign_of(beta(j))));
    } else {
      worst = std::max(worst, std::abs(gradient(j)) - lambda);
    }
  }
  return std::max(worst, 0.0);
}

// --- dense two-phase primal simplex, Bland's rule ---------------------------
//
// min c^T x  s.t.  A x <= b, x >= 0. Bland's entering/leaving choices make the
// pivot sequence deterministic and cycle-free.

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  long pivots = 0;
  bool optimal = false;
  std::string note;
};

// The tableau carries an explicit reduced-cost row (index num_rows_) that is
// re-priced at the start of each phase and then maintained by the pivots.
// Rows are equilibrated to unit max magnitude up front, and the returned
// point is re-solved from the final basis against the original data, so
// accumulated tableau drift cannot leak into the solution.
class SimplexTableau {
 public:
  SimplexTableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                 const Eigen::VectorXd& c)
      : num_structural_(A.cols()), num_rows_(A.rows()), matrix_(A), rhs_in_(b),
        costs_(c) {
    long artificials = 0;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
      if (b(i) < 0.0) ++artificials;
    }
    first_artificial_ = num_structural_ + num_rows_;
    const long total = first_artificial_ + artificials;
    table_.setZero(num_rows_ + 1, total + 1);
    basis_.resize(static_cast<std::size_t>(num_rows_));

    long art = 0;
    for (long i = 0; i < num_rows_; ++i) {
      const double magnitude =
          std::max(A.row(i).cwiseAbs().maxCoeff(), std::abs(b(i)));
      const double scale = magnitude > 0.0 ? 1.0 / magnitude : 1.0;
      const double flip = (b(i) < 0.0 ? -1.0 : 1.0) * scale;
      table_.row(i).head(num_structural_) = flip * A.row(i);
      table_(i, num_structural_ + i) = flip;  // slack
      table_(i, total) = flip * b(i);
      if (b(i) < 0.0) {
        const long col = first_artificial_ + art++;
        table_(i, col) = 1.0;
        basis_[static_cast<std::size_t>(i)] = col;
      } else {
        basis_[static_cast<std::size_t>(i)] = num_structural_ + i;
      }
    }
  }

  LpSolution solve(long max_pivots) {
    LpSolution result;

    // Phase 1: minimize the artificial mass.
    if (first_artificial_ < total_cols()) {
      Eigen::VectorXd phase1_costs = Eigen::VectorXd::Zero(total_cols());
      phase1_costs.tail(total_cols() - first_artificial_).setOnes();
      start_phase(phase1_costs);
      const bool ok = iterate(total_cols(), max_pivots, result.pivots);
      const double infeasibility = -table_(num_rows_, table_.cols() - 1);
      if (!ok || infeasibility > 1e-7) {
        result.note = ok ? "phase 1 ended with positive artificial mass"
                         : "phase 1 pivot budget exhausted";
        return result;
      }
      purge_artificials();
    }

    Eigen::VectorXd phase2_costs = Eigen::VectorXd::Zero(total_cols());
    phase2_costs.head(num_structural_) = costs_;
    start_phase(phase2_costs);
    const bool ok = iterate(first_artificial_, max_pivots, result.pivots);
    if (!ok) {
      result.note = "phase 2 pivot budget exhausted";
      return result;
    }

    result.x = resolve_from_basis();
    result.objective = costs_.dot(result.x);
    result.optimal = true;
    return result;
  }

 private:
  long total_cols() const { return table_.cols() - 1; }
  double rhs(long i) const { return table_(i, table_.cols() - 1); }

  // The basis is combinatorial; its values are re-derived from the original
  // (unscaled) data. Slack column ids encode original row numbers, so removed
  // redundant rows only make the solve consistently overdetermined.
  Eigen::VectorXd resolve_from_basis() const {
    const long k = num_rows_;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(matrix_.rows(), k);
    for (long i = 0; i < k; ++i) {
      const long var = basis_[static_cast<std::size_t>(i)];
      if (var < num_structural_) {
        system.col(i) = matrix_.col(var);
      } else {
        system(var - num_structural_, i) = 1.0;
      }
    }
    const Eigen::VectorXd values = system.colPivHouseholderQr().solve(rhs_in_);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(num_structural_);
    for (long i = 0; i < k; ++i) {
      const long var = basis_[static_cast<std::size_t>(i)];
      if (var < num_structural_) x(var) = std::max(values(i), 0.0);
    }
    return x;
  }

  void start_phase(const Eigen::VectorXd& costs) {
    table_.row(num_rows_).head(total_cols()) = costs;
    table_(num_rows_, total_cols()) = 0.0;
    for (long i = 0; i < num_rows_; ++i) {
      const double basic_cost = costs(basis_[static_cast<std::size_t>(i)]);
      if (basic_cost != 0.0) table_.row(num_rows_) -= basic_cost * table_.row(i);
    }
  }

  bool iterate(long enterable_cols, long max_pivots, long& pivots) {
    constexpr double kReducedTol = 1e-9;
    constexpr double kPivotTol = 1e-9;  // rows are equilibrated to unit scale
    while (pivots < max_pivots) {
      // Bland: the lowest-index improving column enters. Basic columns carry
      // an exact zero reduced cost, so no membership check is needed.
      long entering = -1;
      for (long j = 0; j < enterable_cols; ++j) {
        if (table_(num_rows_, j) < -kReducedTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      // Ratio test; ties resolved toward the smallest basis variable (Bland).
      long leaving_row = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (long i = 0; i < num_rows_; ++i) {
        const double coef = table_(i, entering);
        if (coef > kPivotTol) {
          const double ratio = rhs(i) / coef;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && leaving_row >= 0 &&
               basis_[static_cast<std::size_t>(i)] <
                   basis_[static_cast<std::size_t>(leaving_row)])) {
            best_ratio = ratio;
            leaving_row = i;
          }
        }
      }
      if (leaving_row < 0) return false;  // unbounded direction
      pivot(leaving_row, entering);
      ++pivots;
    }
    return false;
  }

  void pivot(long row, long col) {
    table_.row(row) /= table_(row, col);
    for (long i = 0; i <= num_rows_; ++i) {
      if (i == row) continue;
      const double factor = table_(i, col);
      if (factor != 0.0) table_.row(i) -= factor * table_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = col;
  }

  bool is_basic(long j) const {
    return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
  }

  // After phase 1 any artificial still basic sits at zero: pivot it onto a
  // structural or slack column, or drop the row as redundant.
  void purge_artificials() {
    for (long i = num_rows_ - 1; i >= 0; --i) {
      if (basis_[static_cast<std::size_t>(i)] < first_artificial_) continue;
      long col = -1;
      for (long j = 0; j < first_artificial_; ++j) {
        if (std::abs(table_(i, j)) > 1e-9 && !is_basic(j)) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        remove_row(i);
      }
    }
  }

  void remove_row(long row) {
    const long last = num_rows_ - 1;
    if (row != last) table_.row(row).swap(table_.row(last));
    table_.row(last).swap(table_.row(last + 1));  // cost row moves up
    basis_[static_cast<std::size_t>(row)] = basis_[static_cast<std::size_t>(last)];
    table_.conservativeResize(last + 1, Eigen::NoChange);
    basis_.resize(static_cast<std::size_t>(last));
    num_rows_ = last;
  }

  long num_structural_;
  long num_rows_;
  long first_artificial_;
  Eigen::MatrixXd matrix_;  // original constraint data for the basis re-solve
  Eigen::VectorXd rhs_in_;
  Eigen::VectorXd costs_;
  Eigen::MatrixXd table_;  // num_rows_ constraint rows plus the cost row
  std::vector<long> basis_;
};

}  // namespace

SolverResult lasso(const RegressionProblem& prob, double lambda, double tol,
                   long max_iter) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lasso: lambda must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("lasso: tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("lasso: max_iter must be positive");
  const Eigen::MatrixXd& X = prob.design.entries();
  const Eigen::VectorXd& y = prob.response;
  if (y.size() != X.rows()) throw std::invalid_argument("lasso: response dimension mismatch");

  const Eigen::Index p = X.cols();
  const Eigen::VectorXd col_sq = X.colwise().squaredNorm();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = y;

  SolverResult result;
  result.lambda = lambda;
  result.status = SolveStatus::iteration_limit;

  long sweep = 0;
  for (sweep = 1; sweep <= max_iter; ++sweep) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) <= 0.0) continue;  // zero column keeps a zero coefficient
      const double marginal = X.col(j).dot(residual) + col_sq(j) * beta(j);
      const double updated =
          sign_of(marginal) * std::max(std::abs(marginal) - lambda, 0.0) / col_sq(j);
      if (updated != beta(j)) {
        residual += X.col(j) * (beta(j) - updated);
        beta(j) = updated;
      }
    }
    if (sweep % 64 == 0) residual = y - X * beta;  // shed accumulated drift
    const double kkt = lasso_kkt_residual(X.transpose() * residual, beta, lambda);
    if (kkt <= tol) {
      result.status = SolveStatus::converged;
      break;
    }
  }

  residual = y - X * beta;
  result.estimate = beta;
  result.kkt_residual = lasso_kkt_residual(X.transpose() * residual, beta, lambda);
  result.objective = 0.5 * residual.squaredNorm() + lambda * beta.lpNorm<1>();
  result.iterations = std::min(sweep, max_iter);
  if (result.kkt_residual <= tol) result.status = SolveStatus::converged;
  return result;
}

SolverResult dantzig(const RegressionProblem& prob, double lambda, double tol) {
  if (lambda < 0.0) throw std::invalid_argument("dantzig: lambda must be nonnegative");
  if (!(tol > 0.0)) throw std::invalid_argument("dantzig: tol must be positive");
  const Eigen::MatrixXd& X = prob.design.entries();
  const Eigen::VectorXd& y = prob.response;
  if (y.size() != X.rows()) throw std::invalid_argument("dantzig: response dimension mismatch");

  const Eigen::Index p = X.cols();
  const Eigen::MatrixXd gram = X.transpose() * X;
  const Eigen::VectorXd corr = X.transpose() * y;

  // Split beta = u - v, u, v >= 0:  min 1^T (u; v)  s.t.
  //   [ G -G; -G G ] (u; v) <= (corr + lambda; lambda - corr).
  Eigen::MatrixXd A(2 * p, 2 * p);
  A.topLeftCorner(p, p) = gram;
  A.topRightCorner(p, p) = -gram;
  A.bottomLeftCorner(p, p) = -gram;
  A.bottomRightCorner(p, p) = gram;
  Eigen::VectorXd b(2 * p);
  b.head(p) = corr.array() + lambda;
  b.tail(p) = lambda - corr.array();
  const Eigen::VectorXd costs = Eigen::VectorXd::Ones(2 * p);

  SimplexTableau tableau(A, b, costs);
  const LpSolution lp = tableau.solve(200000 + 200 * p);

  SolverResult result;
  result.lambda = lambda;
  if (!lp.optimal) {
    result.estimate = Eigen::VectorXd::Zero(p);
    result.status = SolveStatus::infeasible;
    result.kkt_residual = std::numeric_limits<double>::infinity();
    result.iterations = lp.pivots;
    result.objective = 0.0;
    return result;
  }

  const Eigen::VectorXd beta = lp.x.head(p) - lp.x.tail(p);
  const double feasibility =
      std::max(0.0, (X.transpose() * (y - X * beta)).lpNorm<Eigen::Infinity>() - lambda);
  result.estimate = beta;
  result.objective = beta.lpNorm<1>();
  result.kkt_residual = feasibility;
  result.iterations = lp.pivots;
  result.status =
      feasibility <= tol ? SolveStatus::converged : SolveStatus::infeasible;
  return result;
}

Eigen::VectorXd oracle_ls(const RegressionProblem& prob,
                          const std::vector<long>& support) {
  if (support.empty()) throw std::invalid_argument("oracle_ls: support must be nonempty");
  const Eigen::MatrixXd& X = prob.design.entries();
  const Eigen::VectorXd& y = prob.response;
  if (y.size() != X.rows()) throw std::invalid_argument("oracle_ls: response dimension mismatch");

  std::vector<long> sorted = support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("oracle_ls: duplicate support index");
  }
  if (sorted.front() < 0 || sorted.back() >= X.cols()) {
    throw std::invalid_argument("oracle_ls: support index out of range");
  }

  const auto s = static_cast<Eigen::Index>(sorted.size());
  Eigen::MatrixXd sub(X.rows(), s);
  for (Eigen::Index j = 0; j < s; ++j) sub.col(j) = X.col(sorted[static_cast<std::size_t>(j)]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(s - 1) <= 1e-10 * prob.design.largest_singular()) {
    throw std::runtime_error("oracle_ls: restricted design is rank-deficient");
  }
  const Eigen::VectorXd coeffs = svd.solve(y);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index j = 0; j < s; ++j) beta(sorted[static_cast<std::size_t>(j)]) = coeffs(j);
  return beta;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("soft_threshold: lambda must be nonnegative");
  return v.unaryExpr([lambda](double x) {
    return sign_of(x) * std::max(std::abs(x) - lambda, 0.0);
  });
}

}  // namespace udpcert
