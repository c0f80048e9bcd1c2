#include "udpcert/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <Eigen/SVD>

namespace udpcert {

DesignMatrix decompose(const Eigen::MatrixXd& entries, double rank_tol) {
  if (entries.rows() < 1 || entries.cols() < 1) {
    throw std::invalid_argument("decompose: matrix must have at least one row and one column");
  }
  if (!entries.allFinite()) {
    throw std::invalid_argument("decompose: non-finite entry");
  }
  if (!(rank_tol > 0.0)) {
    throw std::invalid_argument("decompose: rank_tol must be positive");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(entries,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = rank_tol * sv(0);
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff) ++r;
  if (r == 0) {
    throw std::runtime_error("decompose: matrix has rank zero, nothing to certify");
  }

  DesignMatrix d;
  d.entries_ = entries;
  d.singular_values_ = sv.head(r);
  d.factor_u_ = svd.matrixU().leftCols(r);
  d.factor_v_ = svd.matrixV().leftCols(r);

  const Eigen::Index p = entries.cols();
  Eigen::MatrixXd kernel = svd.matrixV().rightCols(p - r);
  // Canonical sign: first entry of visible magnitude is made positive, so the
  // basis is a pure function of the input bytes.
  for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
    for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
      if (std::abs(kernel(i, j)) > 1e-14) {
        if (kernel(i, j) < 0.0) kernel.col(j) = -kernel.col(j);
        break;
      }
    }
  }
  d.kernel_basis_ = std::move(kernel);
  d.column_norm_max_ = entries.colwise().norm().maxCoeff();
  return d;
}

double smallest_singular(const DesignMatrix& d) {
  if (d.rank() < 1) throw std::runtime_error("smallest_singular: rank-zero matrix");
  return d.singular_values()(d.rank() - 1);
}

double column_norm_max(const DesignMatrix& d) { return d.column_norm_max(); }

}  // namespace udpcert
