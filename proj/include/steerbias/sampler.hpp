#ifndef STEERBIAS_SAMPLER_HPP
#define STEERBIAS_SAMPLER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "steerbias/dataset.hpp"
#include "steerbias/representation.hpp"
#include "steerbias/rng.hpp"

namespace steerbias {

namespace detail {

inline Eigen::VectorXd ball_point(std::mt19937_64& rng, int dim, double radius) {
  Eigen::VectorXd x(dim);
  double nrm2 = 0.0;
  do {
    for (int i = 0; i < dim; ++i) x(i) = standard_normal(rng);
    nrm2 = x.squaredNorm();
  } while (nrm2 == 0.0);
  const double r = radius * std::pow(uniform_unit(rng), 1.0 / static_cast<double>(dim));
  return x * (r / std::sqrt(nrm2));
}

}  // namespace detail

/// Book-keeping for rejection sampling; throws once the rejection rate
/// exceeds 99.9% over a meaningful number of proposals.
struct SamplerBudget {
  long attempts = 0;
  long accepted = 0;

  void rejected() {
    ++attempts;
    if (attempts >= 10000 && (accepted + 1) * 1000L < attempts)
      throw std::runtime_error("sampler starved: rejection rate > 99.9% (radius too small "
                               "against ||beta0||)");
  }
  void ok() {
    ++attempts;
    ++accepted;
  }
};

/// One draw of the margin-separated law: x uniform in the radius ball
/// conditioned on |<x, beta0>| >= 1, labeled by the sign, then pushed
/// through a uniformly random group element. beta0 is invariant, so the
/// group action preserves every margin.
inline LabeledPoint sample_separable_point(const Representation& rep,
                                           const Eigen::VectorXd& beta0, double radius,
                                           std::mt19937_64& rng, SamplerBudget& budget) {
  for (;;) {
    Eigen::VectorXd x = detail::ball_point(rng, rep.dim(), radius);
    const double m = x.dot(beta0);
    if (std::abs(m) < 1.0) {
      budget.rejected();
      continue;
    }
    budget.ok();
    const int g = uniform_index(rng, rep.group().order());
    return {rep.mat(g) * x, m > 0 ? 1 : -1};
  }
}

/// n i.i.d. draws of the margin-separated law for any representation whose
/// invariant subspace contains beta0. Every returned point satisfies
/// y <x, beta0> >= 1.
inline LabeledDataset sample_separable(const Representation& rep, const Eigen::VectorXd& beta0,
                                       int n, double radius, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_separable: n must be >= 1");
  if (beta0.size() != rep.dim())
    throw std::invalid_argument("sample_separable: beta0 size != representation dim");
  const double nrm = beta0.norm();
  if (nrm <= 0.0) throw std::invalid_argument("sample_separable: beta0 must be nonzero");
  const Eigen::VectorXd projected = rep.invariant_projector() * beta0;
  if ((projected - beta0).norm() > 1e-8 * (1.0 + nrm))
    throw std::invalid_argument("sample_separable: beta0 is not invariant under the group action");
  if (radius * nrm < 1.0)
    throw std::runtime_error("sampler starved: radius " + std::to_string(radius) +
                             " cannot reach margin 1 against ||beta0|| = " + std::to_string(nrm));

  std::mt19937_64 rng(seed);
  SamplerBudget budget;
  std::vector<LabeledPoint> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(sample_separable_point(rep, beta0, radius, rng, budget));
  return LabeledDataset(std::move(pts));
}

/// sample_separable restricted to unitary representations, the setting in
/// which the sampled law is exactly group-invariant (orthogonal maps
/// preserve the ball and the margin band).
inline LabeledDataset sample_invariant_separable(const Representation& rep,
                                                 const Eigen::VectorXd& beta0, int n,
                                                 double radius, std::uint64_t seed) {
  if (!rep.is_unitary(1e-8))
    throw std::invalid_argument("sample_invariant_separable: representation must act unitarily");
  return sample_separable(rep, beta0, n, radius, seed);
}

}  // namespace steerbias

#endif  // STEERBIAS_SAMPLER_HPP
