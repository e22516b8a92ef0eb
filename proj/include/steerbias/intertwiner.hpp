#ifndef STEERBIAS_INTERTWINER_HPP
#define STEERBIAS_INTERTWINER_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "steerbias/errors.hpp"
#include "steerbias/linalg.hpp"
#include "steerbias/representation.hpp"

namespace steerbias {

/// Largest per-element residual of the commutation property
/// ||M rho_in(g) - rho_out(g) M||_inf over all g.
inline double check_equivariance(const Eigen::MatrixXd& m, const Representation& rep_in,
                                 const Representation& rep_out) {
  if (m.rows() != rep_out.dim() || m.cols() != rep_in.dim())
    throw std::invalid_argument("check_equivariance: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " +
                                std::to_string(rep_out.dim()) + "x" + std::to_string(rep_in.dim()));
  double worst = 0.0;
  for (int g = 0; g < rep_in.group().order(); ++g) {
    const double r = (m * rep_in.mat(g) - rep_out.mat(g) * m).cwiseAbs().maxCoeff();
    if (r > worst) worst = r;
  }
  return worst;
}

/// A linearly independent set of maps commuting with a pair of
/// representations of the same group, used to parameterize steerable layers.
/// compute() returns a full basis, orthonormal under the flattened Frobenius
/// inner product.
class IntertwinerBasis {
 public:
  IntertwinerBasis(Representation rep_in, Representation rep_out,
                   std::vector<Eigen::MatrixXd> mats, double tol = 1e-8)
      : rep_in_(std::move(rep_in)), rep_out_(std::move(rep_out)), mats_(std::move(mats)) {
    if (!(rep_in_.group() == rep_out_.group()))
      throw std::invalid_argument("intertwiner basis: representations have different groups");
    for (std::size_t j = 0; j < mats_.size(); ++j) {
      const double r = check_equivariance(mats_[j], rep_in_, rep_out_);
      if (r > tol)
        throw validation_error("intertwiner basis: element " + std::to_string(j) +
                               " has equivariance residual " + std::to_string(r));
    }
    if (!mats_.empty()) {
      Eigen::MatrixXd flat(static_cast<Eigen::Index>(rep_out_.dim()) * rep_in_.dim(),
                           static_cast<Eigen::Index>(mats_.size()));
      for (std::size_t j = 0; j < mats_.size(); ++j)
        flat.col(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const Eigen::VectorXd>(mats_[j].data(), flat.rows());
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(flat);
      const Eigen::VectorXd& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= kRankCutoff * sv(0))
        throw validation_error("intertwiner basis: elements are linearly dependent");
    }
  }

  /// Full basis of the commutant, from the kernel of the stacked linear
  /// system M rho_in(g) - rho_out(g) M = 0 over all g (M flattened
  /// column-major; rank decided at the scale-relative cutoff).
  static IntertwinerBasis compute(const Representation& rep_in, const Representation& rep_out) {
    if (!(rep_in.group() == rep_out.group()))
      throw std::invalid_argument("intertwiner basis: representations have different groups");
    const int di = rep_in.dim();
    const int dout = rep_out.dim();
    const int n = rep_in.group().order();
    const Eigen::Index vdim = static_cast<Eigen::Index>(di) * dout;

    // vec(M rho_in(g)) = (rho_in(g)^T kron I) vec(M) and
    // vec(rho_out(g) M) = (I kron rho_out(g)) vec(M), column-major.
    Eigen::MatrixXd constraints(static_cast<Eigen::Index>(n) * vdim, vdim);
    constraints.setZero();
    for (int g = 0; g < n; ++g) {
      const Eigen::MatrixXd& a = rep_in.mat(g);
      const Eigen::MatrixXd& b = rep_out.mat(g);
      auto block = constraints.middleRows(static_cast<Eigen::Index>(g) * vdim, vdim);
      for (int ci = 0; ci < di; ++ci) {
        for (int cj = 0; cj < di; ++cj) {
          const double w = a(cj, ci);  // entry (ci, cj) of rho_in(g)^T
          if (w != 0.0)
            block.block(static_cast<Eigen::Index>(ci) * dout,
                        static_cast<Eigen::Index>(cj) * dout, dout, dout) +=
                w * Eigen::MatrixXd::Identity(dout, dout);
        }
        block.block(static_cast<Eigen::Index>(ci) * dout, static_cast<Eigen::Index>(ci) * dout,
                    dout, dout) -= b;
      }
    }

    const Eigen::MatrixXd kernel = null_space(constraints);
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(kernel.cols());
    for (Eigen::Index k = 0; k < kernel.cols(); ++k)
      mats.emplace_back(Eigen::Map<const Eigen::MatrixXd>(kernel.col(k).data(), dout, di));
    return IntertwinerBasis(rep_in, rep_out, std::move(mats));
  }

  int count() const { return static_cast<int>(mats_.size()); }
  const Eigen::MatrixXd& mat(int j) const { return mats_[j]; }
  const std::vector<Eigen::MatrixXd>& mats() const { return mats_; }
  const Representation& rep_in() const { return rep_in_; }
  const Representation& rep_out() const { return rep_out_; }

  /// Linear combination sum_j w_j psi_j.
  Eigen::MatrixXd combine(const Eigen::VectorXd& w) const {
    if (w.size() != count())
      throw std::invalid_argument("combine: got " + std::to_string(w.size()) +
                                  " coefficients for basis of size " + std::to_string(count()));
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rep_out_.dim(), rep_in_.dim());
    for (int j = 0; j < count(); ++j) acc += w(j) * mats_[j];
    return acc;
  }

  /// Frobenius-inner-product coordinates of a map against the basis.
  Eigen::VectorXd project(const Eigen::MatrixXd& m) const {
    Eigen::VectorXd coeffs(count());
    for (int j = 0; j < count(); ++j) coeffs(j) = (mats_[j].array() * m.array()).sum();
    return coeffs;
  }

 private:
  Representation rep_in_;
  Representation rep_out_;
  std::vector<Eigen::MatrixXd> mats_;
};

}  // namespace steerbias

#endif  // STEERBIAS_INTERTWINER_HPP
