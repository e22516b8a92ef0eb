#ifndef STEERBIAS_REPRESENTATION_HPP
#define STEERBIAS_REPRESENTATION_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "steerbias/errors.hpp"
#include "steerbias/group.hpp"
#include "steerbias/linalg.hpp"

namespace steerbias {

inline constexpr int kMaxRepDim = 512;

// Default per-entry tolerance for the homomorphism check ||rho(g)rho(h) - rho(gh)||.
inline constexpr double kHomomorphismTol = 1e-10;

/// A real matrix representation of a finite group: one invertible dim x dim
/// matrix per element. Construction validates the homomorphism property and
/// invertibility; instances are immutable.
class Representation {
 public:
  Representation(FiniteGroup group, std::vector<Eigen::MatrixXd> mats,
                 double hom_tol = kHomomorphismTol)
      : group_(std::move(group)), mats_(std::move(mats)) {
    const int n = group_.order();
    if (static_cast<int>(mats_.size()) != n)
      throw validation_error("representation: expected " + std::to_string(n) + " matrices, got " +
                             std::to_string(mats_.size()));
    dim_ = static_cast<int>(mats_[0].rows());
    if (dim_ < 1 || dim_ > kMaxRepDim)
      throw validation_error("representation: dimension " + std::to_string(dim_) +
                             " outside [1, " + std::to_string(kMaxRepDim) + "]");
    for (int g = 0; g < n; ++g) {
      if (mats_[g].rows() != dim_ || mats_[g].cols() != dim_)
        throw validation_error("representation: matrix for element " + std::to_string(g) +
                               " is not " + std::to_string(dim_) + "x" + std::to_string(dim_));
      if (!mats_[g].allFinite())
        throw validation_error("representation: matrix for element " + std::to_string(g) +
                               " has non-finite entries");
    }

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim_, dim_);
    if (((mats_[group_.identity()] - eye).cwiseAbs().maxCoeff()) > hom_tol)
      throw validation_error("representation: matrix at identity element differs from I");

    double worst = 0.0;
    int worst_g = 0, worst_h = 0;
    for (int g = 0; g < n; ++g) {
      for (int h = 0; h < n; ++h) {
        const double r =
            (mats_[g] * mats_[h] - mats_[group_.mul(g, h)]).cwiseAbs().maxCoeff();
        if (r > worst) { worst = r; worst_g = g; worst_h = h; }
      }
    }
    if (worst > hom_tol)
      throw validation_error("representation: homomorphism violated, worst pair (" +
                             std::to_string(worst_g) + "," + std::to_string(worst_h) +
                             ") residual " + std::to_string(worst));

    for (int g = 0; g < n; ++g) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(mats_[g]);
      if (!lu.isInvertible())
        throw validation_error("representation: matrix for element " + std::to_string(g) +
                               " is numerically singular");
    }
  }

  /// Permutation action of the group on functions over itself: the matrix of
  /// g maps basis vector e_h to e_{gh}.
  static Representation regular(const FiniteGroup& group) {
    const int n = group.order();
    std::vector<Eigen::MatrixXd> mats(n, Eigen::MatrixXd::Zero(n, n));
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h) mats[g](group.mul(g, h), h) = 1.0;
    return Representation(group, std::move(mats));
  }

  /// Identity action on R^dim.
  static Representation trivial(const FiniteGroup& group, int dim) {
    std::vector<Eigen::MatrixXd> mats(group.order(), Eigen::MatrixXd::Identity(dim, dim));
    return Representation(group, std::move(mats));
  }

  const FiniteGroup& group() const { return group_; }
  int dim() const { return dim_; }
  const Eigen::MatrixXd& mat(int g) const { return mats_[g]; }

  /// True iff every matrix is orthogonal: ||rho(g)^T rho(g) - I||_inf <= tol.
  bool is_unitary(double tol = 1e-8) const {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim_, dim_);
    for (const auto& m : mats_)
      if ((m.transpose() * m - eye).cwiseAbs().maxCoeff() > tol) return false;
    return true;
  }

  /// Mean of the group orbit of x: (1/|G|) sum_g rho(g) x.
  Eigen::VectorXd orbit_average(const Eigen::VectorXd& x) const {
    if (x.size() != dim_)
      throw std::invalid_argument("orbit_average: vector size " + std::to_string(x.size()) +
                                  " != representation dim " + std::to_string(dim_));
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
    for (const auto& m : mats_) acc += m * x;
    return acc / static_cast<double>(group_.order());
  }

  /// The averaging operator A = (1/|G|) sum_g rho(g).
  Eigen::MatrixXd averaging_operator() const {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim_, dim_);
    for (const auto& m : mats_) acc += m;
    return acc / static_cast<double>(group_.order());
  }

  /// A^T = (1/|G|) sum_g rho(g)^T. Idempotent; its range is the subspace of
  /// invariant linear predictors.
  Eigen::MatrixXd invariant_projector() const { return averaging_operator().transpose(); }

  /// Orthonormal basis (columns) of the invariant predictor subspace
  /// {b : b^T rho(g) x = b^T x for all g, x}, computed as the joint kernel of
  /// the stacked blocks I - rho(g)^T. May have zero columns.
  Eigen::MatrixXd invariant_subspace_basis(double tol = 1e-8) const {
    const int n = group_.order();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim_, dim_);
    Eigen::MatrixXd stacked(static_cast<Eigen::Index>(n) * dim_, dim_);
    for (int g = 0; g < n; ++g)
      stacked.middleRows(static_cast<Eigen::Index>(g) * dim_, dim_) = eye - mats_[g].transpose();
    Eigen::MatrixXd basis = null_space(stacked);
    for (Eigen::Index k = 0; k < basis.cols(); ++k)
      if ((stacked * basis.col(k)).cwiseAbs().maxCoeff() > tol)
        throw validation_error("invariant_subspace_basis: basis vector exceeds tolerance");
    return basis;
  }

  /// Symmetric positive-definite square root of the averaged Gram matrix
  /// (1/|G|) sum_g rho(g)^T rho(g). Equals I for unitary representations.
  Eigen::MatrixXd gram_sqrt() const {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim_, dim_);
    for (const auto& m : mats_) gram += m.transpose() * m;
    gram /= static_cast<double>(group_.order());
    // Symmetrize against round-off before the eigendecomposition.
    gram = 0.5 * (gram + gram.transpose()).eval();
    return symmetric_sqrt(gram);
  }

  bool operator==(const Representation& o) const {
    if (!(group_ == o.group_) || dim_ != o.dim_) return false;
    for (std::size_t i = 0; i < mats_.size(); ++i)
      if (mats_[i] != o.mats_[i]) return false;
    return true;
  }

 private:
  FiniteGroup group_;
  int dim_ = 0;
  std::vector<Eigen::MatrixXd> mats_;
};

}  // namespace steerbias

#endif  // STEERBIAS_REPRESENTATION_HPP
