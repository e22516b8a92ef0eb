#ifndef STEERBIAS_SVM_HPP
#define STEERBIAS_SVM_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "steerbias/dataset.hpp"
#include "steerbias/linalg.hpp"
#include "steerbias/representation.hpp"

namespace steerbias {

/// Solution of a hard-margin max-L2-margin problem. gamma is empty and
/// feasible is false when the data admits no separator.
struct MaxMarginSolution {
  Eigen::VectorXd gamma;
  Eigen::VectorXd duals;
  double objective = 0.0;  // value of the minimized quadratic at gamma
  bool feasible = false;
  long solver_iters = 0;
};

/// KKT residuals of a candidate primal/dual pair for
/// min ||gamma||^2 s.t. y_i <x_i, gamma> >= 1.
struct MaxMarginCertificate {
  double primal_residual = 0.0;        // max_i max(0, 1 - y_i <x_i, gamma>)
  double stationarity_residual = 0.0;  // ||gamma - sum_i alpha_i y_i x_i||
  double slackness_residual = 0.0;     // max_i alpha_i * max(0, y_i <x_i, gamma> - 1)
  bool passed = false;

  double max_residual() const {
    return std::max({primal_residual, stationarity_residual, slackness_residual});
  }
};

inline MaxMarginCertificate kkt_certify(const LabeledDataset& s, const Eigen::VectorXd& gamma,
                                        const Eigen::VectorXd& duals, double tol = 1e-6) {
  if (gamma.size() != s.dim())
    throw std::invalid_argument("kkt_certify: gamma size != dataset dim");
  if (duals.size() != s.size())
    throw std::invalid_argument("kkt_certify: need one dual per data point");
  MaxMarginCertificate cert;
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(s.dim());
  for (int i = 0; i < s.size(); ++i) {
    const double yi = static_cast<double>(s[i].y);
    const double m = yi * s[i].x.dot(gamma);
    cert.primal_residual = std::max(cert.primal_residual, 1.0 - m);
    cert.slackness_residual = std::max(cert.slackness_residual, duals(i) * std::max(0.0, m - 1.0));
    combo += duals(i) * yi * s[i].x;
  }
  cert.primal_residual = std::max(cert.primal_residual, 0.0);
  cert.stationarity_residual = (gamma - combo).norm();
  cert.passed = cert.max_residual() <= tol && duals.minCoeff() >= -tol;
  return cert;
}

namespace detail {

/// Primal active-set refinement for min ||gamma||^2 s.t. signed_x gamma >= 1,
/// warm-started at a strictly feasible point. Iterates stay feasible: each
/// move solves the minimum-norm problem with equality on the working set,
/// walks toward it until a blocking constraint joins, and retires working
/// constraints whose dual turns negative. On success gamma_out is exactly
/// the span combination signed_x^T duals_out of the final working set.
inline bool primal_active_set(const Eigen::MatrixXd& signed_x, Eigen::VectorXd gamma,
                              Eigen::VectorXd& duals_out, Eigen::VectorXd& gamma_out) {
  const int n = static_cast<int>(signed_x.rows());
  Eigen::VectorXd margins = signed_x * gamma;
  if (margins.minCoeff() < 1.0 - 1e-9) return false;  // start not feasible

  std::vector<int> work;
  for (int i = 0; i < n; ++i)
    if (margins(i) <= 1.0 + 1e-9) work.push_back(i);

  const int max_moves = 4 * n + 64;
  for (int move = 0; move < max_moves; ++move) {
    const int m = static_cast<int>(work.size());
    Eigen::VectorXd target;
    Eigen::VectorXd lambda;
    if (m == 0) {
      target = Eigen::VectorXd::Zero(gamma.size());
      lambda = Eigen::VectorXd();
    } else {
      Eigen::MatrixXd aw(m, signed_x.cols());
      for (int a = 0; a < m; ++a) aw.row(a) = signed_x.row(work[a]);
      const Eigen::MatrixXd gram = aw * aw.transpose();
      // Consistent by construction: the current gamma satisfies the
      // equalities, so 1 is in the range of the working-set Gram.
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
      lambda = cod.solve(Eigen::VectorXd::Ones(m));
      target = aw.transpose() * lambda;
    }

    if ((target - gamma).norm() <= 1e-12 * (1.0 + gamma.norm())) {
      // At the working-set minimizer: optimal iff all duals are nonnegative.
      int drop = -1;
      double most_negative = -1e-12;
      for (int a = 0; a < m; ++a)
        if (lambda(a) < most_negative) { most_negative = lambda(a); drop = a; }
      if (drop < 0) {
        duals_out = Eigen::VectorXd::Zero(n);
        for (int a = 0; a < m; ++a) duals_out(work[a]) = std::max(0.0, lambda(a));
        gamma_out = m == 0 ? target : gamma;
        return m > 0;  // m == 0 would mean gamma = 0, never feasible here
      }
      work.erase(work.begin() + drop);
      continue;
    }

    // Walk toward the working-set minimizer until a new constraint blocks.
    const Eigen::VectorXd dir = target - gamma;
    const Eigen::VectorXd ddir = signed_x * dir;
    double tau = 1.0;
    int block = -1;
    for (int i = 0; i < n; ++i) {
      if (ddir(i) >= -1e-14) continue;
      if (std::find(work.begin(), work.end(), i) != work.end()) continue;
      const double ti = (1.0 - margins(i)) / ddir(i);
      if (ti < tau) { tau = ti; block = i; }
    }
    if (tau < 0.0) tau = 0.0;
    gamma += tau * dir;
    margins += tau * ddir;
    if (block >= 0) work.push_back(block);
  }
  return false;
}

}  // namespace detail

/// Hard-margin SVM: min ||gamma||^2 s.t. y_i <x_i, gamma> >= 1, solved
/// through the dual box-constrained QP
///   max sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j <x_i, x_j>,
///   alpha >= 0
/// by projected gradient ascent with step 1/lambda_max, with periodic
/// active-set polishing that solves the equality system on the detected
/// support. Feasibility is certified by the KKT residuals; the solver
/// reports feasible=false when the dual objective diverges or the iteration
/// budget runs out without a certificate.
inline MaxMarginSolution max_margin(const LabeledDataset& s, double tol = 1e-8) {
  const int n = s.size();
  const int d = s.dim();
  MaxMarginSolution sol;
  sol.duals = Eigen::VectorXd::Zero(n);

  for (int i = 0; i < n; ++i) {
    if (s[i].x.norm() == 0.0) return sol;  // zero input can never reach margin 1
  }

  Eigen::MatrixXd signed_x(n, d);
  for (int i = 0; i < n; ++i) signed_x.row(i) = static_cast<double>(s[i].y) * s[i].x.transpose();
  const Eigen::MatrixXd q = signed_x * signed_x.transpose();
  double xmax = 0.0;
  for (int i = 0; i < n; ++i) xmax = std::max(xmax, s[i].x.norm());

  // Largest eigenvalue of Q by power iteration.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
  double lambda_max = 0.0;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd qv = q * v;
    const double nrm = qv.norm();
    if (nrm == 0.0) break;
    v = qv / nrm;
    lambda_max = nrm;
  }
  if (lambda_max <= 0.0) lambda_max = q.trace() + 1.0;
  const double step = 1.0 / (1.01 * lambda_max);

  const long max_iters = 1000000;
  const int polish_every = 250;
  const double divergence_cap = 1.0 / (tol * tol);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  for (long iter = 1; iter <= max_iters; ++iter) {
    alpha = (alpha + step * (ones - q * alpha)).cwiseMax(0.0);

    if (iter % polish_every == 0 || iter == max_iters) {
      // Once a candidate separates, rescale it to a feasible point and
      // refine with the primal active set. Two candidates are tried: the
      // dual iterate's primal image, and (on the first checkpoint) the
      // least-squares separator, which shortcuts well-conditioned instances.
      std::vector<Eigen::VectorXd> candidates;
      candidates.push_back(signed_x.transpose() * alpha);
      if (iter == polish_every) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(signed_x);
        candidates.push_back(cod.solve(ones));
      }
      for (const Eigen::VectorXd& candidate : candidates) {
        const double mmin = (signed_x * candidate).minCoeff();
        if (mmin <= 1e-12) continue;
        Eigen::VectorXd duals, gamma;
        if (!detail::primal_active_set(signed_x, candidate / mmin, duals, gamma)) continue;
        const MaxMarginCertificate cert = kkt_certify(s, gamma, duals, tol);
        if (cert.passed) {
          sol.gamma = gamma;
          sol.duals = duals;
          sol.objective = gamma.squaredNorm();
          sol.feasible = true;
          sol.solver_iters = iter;
          return sol;
        }
      }
      const double dual_obj = alpha.sum() - 0.5 * alpha.dot(q * alpha);
      if (dual_obj > divergence_cap) {
        sol.solver_iters = iter;
        return sol;  // unbounded dual: no separator exists
      }
      // Recession certificate: the dual is unbounded iff some alpha >= 0 with
      // sum(alpha) > 0 maps to (nearly) zero through the signed data matrix,
      // i.e. the origin lies in the convex hull of {y_i x_i}. The ascent
      // iterates grow along such a direction when the data is not separable.
      const double asum = alpha.sum();
      if (asum > 1e3 && (signed_x.transpose() * alpha).norm() <= 1e-10 * asum * xmax) {
        sol.solver_iters = iter;
        return sol;
      }
    }
  }
  sol.solver_iters = max_iters;
  return sol;  // budget exhausted without certificate
}

/// Max-margin classifier restricted to the invariant predictor subspace,
/// minimizing the norm of the projection onto range(A) (A the averaging
/// operator). For unitary representations this reduces to the plain
/// max-L2-margin problem in invariant coordinates; in general the quadratic
/// B^T U U^T B is positive definite on the subspace, and a symmetric square
/// root change of variables turns the problem into a standard hard-margin
/// solve. Returns the solution in original coordinates.
inline MaxMarginSolution invariant_max_margin(const LabeledDataset& s, const Representation& rep,
                                              double tol = 1e-8) {
  if (rep.dim() != s.dim())
    throw std::invalid_argument("invariant_max_margin: representation dim != dataset dim");
  MaxMarginSolution sol;
  sol.duals = Eigen::VectorXd::Zero(s.size());
  const Eigen::MatrixXd basis = rep.invariant_subspace_basis();
  if (basis.cols() == 0) return sol;  // only the zero predictor is invariant

  const Eigen::MatrixXd range = range_basis(rep.averaging_operator());
  const Eigen::MatrixXd proj_coords = range.transpose() * basis;
  const Eigen::MatrixXd quad = proj_coords.transpose() * proj_coords;
  const Eigen::MatrixXd root = symmetric_sqrt(0.5 * (quad + quad.transpose()));
  const Eigen::MatrixXd root_inv = root.inverse();

  std::vector<LabeledPoint> reduced;
  reduced.reserve(s.size());
  for (int i = 0; i < s.size(); ++i)
    reduced.push_back({root_inv * (basis.transpose() * s[i].x), s[i].y});
  const MaxMarginSolution inner = max_margin(LabeledDataset(std::move(reduced)), tol);
  sol.solver_iters = inner.solver_iters;
  if (!inner.feasible) return sol;

  sol.gamma = basis * (root_inv * inner.gamma);
  sol.duals = inner.duals;
  sol.objective = inner.objective;
  sol.feasible = true;
  return sol;
}

/// Smallest signed margin min_i y_i <beta, x_i> of a unit-norm classifier.
inline double margin(const LabeledDataset& s, const Eigen::VectorXd& beta_unit) {
  if (beta_unit.size() != s.dim())
    throw std::invalid_argument("margin: classifier size != dataset dim");
  if (std::abs(beta_unit.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("margin: classifier must have unit norm");
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i)
    m = std::min(m, static_cast<double>(s[i].y) * beta_unit.dot(s[i].x));
  return m;
}

/// The limit direction a steerable network converges to: the transposed
/// averaging operator applied to the max-margin solution of the
/// orbit-averaged data, normalized. For unitary representations this equals
/// the invariant max-margin direction.
inline Eigen::VectorXd theory_direction_steerable(const LabeledDataset& s,
                                                  const Representation& rep, double tol = 1e-8) {
  const MaxMarginSolution sol = max_margin(transform_dataset(rep, s), tol);
  if (!sol.feasible)
    throw std::runtime_error("theory_direction_steerable: orbit-averaged data is not separable");
  const Eigen::VectorXd beta = rep.invariant_projector() * sol.gamma;
  const double nrm = beta.norm();
  if (nrm <= 0.0)
    throw std::runtime_error("theory_direction_steerable: projected direction vanished");
  return beta / nrm;
}

/// High-probability test-error bound for the invariant max-margin direction:
/// 2 r_bar beta0_norm / sqrt(n) + sqrt(log(1/delta) / (2n)).
inline double generalization_bound(long n, double delta, double r_bar, double beta0_norm) {
  if (n < 1) throw std::invalid_argument("generalization_bound: n must be >= 1");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("generalization_bound: delta must be in (0, 1]");
  if (r_bar < 0 || beta0_norm < 0)
    throw std::invalid_argument("generalization_bound: radii and norms must be nonnegative");
  const double nn = static_cast<double>(n);
  return 2.0 * r_bar * beta0_norm / std::sqrt(nn) + std::sqrt(std::log(1.0 / delta) / (2.0 * nn));
}

}  // namespace steerbias

#endif  // STEERBIAS_SVM_HPP
