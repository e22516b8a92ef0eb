#ifndef STEERBIAS_LINALG_HPP
#define STEERBIAS_LINALG_HPP

#include <Eigen/Dense>

#include "steerbias/errors.hpp"

namespace steerbias {

// Scale-relative singular/eigen value cutoff shared by every rank decision
// in the library (null spaces, ranges, matrix square roots).
inline constexpr double kRankCutoff = 1e-9;

/// Orthonormal basis (as columns) of ker(A). Returns a d x 0 matrix when the
/// kernel is trivial.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankCutoff * smax) ++rank;
  }
  return svd.matrixV().rightCols(a.cols() - rank);
}

/// Orthonormal basis (as columns) of range(A).
inline Eigen::MatrixXd range_basis(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankCutoff * smax) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

/// Symmetric square root of a symmetric positive-definite matrix via
/// eigendecomposition. Throws validation_error when the input is numerically
/// singular or indefinite.
inline Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  if (es.info() != Eigen::Success) {
    throw validation_error("symmetric_sqrt: eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double emax = ev(ev.size() - 1);
  if (emax <= 0.0 || ev(0) <= kRankCutoff * emax) {
    throw validation_error("symmetric_sqrt: matrix numerically singular (min eigenvalue " +
                           std::to_string(ev(0)) + ")");
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace steerbias

#endif  // STEERBIAS_LINALG_HPP
