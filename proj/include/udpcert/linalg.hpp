#pragma once

#include <Eigen/Core>

namespace udpcert {

// Dense design matrix with cached SVD factors, kernel basis and column norms.
// Built through decompose(); immutable afterwards and safe to share.
class DesignMatrix {
 public:
  const Eigen::MatrixXd& entries() const { return entries_; }
  Eigen::Index n() const { return entries_.rows(); }
  Eigen::Index p() const { return entries_.cols(); }
  Eigen::Index rank() const { return singular_values_.size(); }
  Eigen::Index kernel_dim() const { return kernel_basis_.cols(); }

  // rho_1 >= ... >= rho_r > 0.
  const Eigen::VectorXd& singular_values() const { return singular_values_; }
  // Orthonormal columns spanning ker(X), p x (p - r).
  const Eigen::MatrixXd& kernel_basis() const { return kernel_basis_; }
  double column_norm_max() const { return column_norm_max_; }
  double largest_singular() const { return singular_values_(0); }

  // Thin SVD factors: entries ~ factor_u * diag(singular_values) * factor_v^T.
  const Eigen::MatrixXd& factor_u() const { return factor_u_; }
  const Eigen::MatrixXd& factor_v() const { return factor_v_; }

 private:
  friend DesignMatrix decompose(const Eigen::MatrixXd&, double);
  DesignMatrix() = default;

  Eigen::MatrixXd entries_;
  Eigen::VectorXd singular_values_;
  Eigen::MatrixXd kernel_basis_;
  Eigen::MatrixXd factor_u_;
  Eigen::MatrixXd factor_v_;
  double column_norm_max_ = 0.0;
};

// Factorizes a dense matrix. Singular values at or below rank_tol times the
// largest one are dropped and reduce the rank; a rank-zero matrix is rejected.
// Kernel basis vectors are sign-normalized (first nonzero entry positive) so
// identical inputs produce identical outputs.
DesignMatrix decompose(const Eigen::MatrixXd& entries, double rank_tol = 1e-10);

// Smallest retained singular value rho_r.
double smallest_singular(const DesignMatrix& d);

// max_j ||X_j||_2 over the columns of X.
double column_norm_max(const DesignMatrix& d);

}  // namespace udpcert
