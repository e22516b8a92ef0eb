// Acceptance suite: end-to-end checks of the toolkit's headline behaviors,
// one printed pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "steerbias/scenario.hpp"
#include "test_oracles.hpp"

using namespace steerbias;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Criterion {
  std::string name;
  double time_limit_sec;
  std::function<bool(std::string&)> run;
};

LabeledDataset one_point(double a, double b, int y) {
  VectorXd x(2);
  x << a, b;
  return LabeledDataset(std::vector<LabeledPoint>{{x, y}});
}

FlowConfig acceptance_flow(std::uint64_t seed) {
  FlowConfig cfg = scenario_flow_defaults();
  cfg.seed = seed;
  cfg.max_steps = 60000;
  return cfg;
}

// ---------------------------------------------------------------------------
// 1. Exact SVM-side reproduction of the shear-reflection example.
bool criterion_svm_exact(std::string& detail) {
  const Representation rep = shear_reflection_rep();
  const MaxMarginSolution one = max_margin(one_point(0, 3, 1), 1e-8);
  const MaxMarginSolution two =
      max_margin(augment_dataset(rep, one_point(1, 2, 1)), 1e-8);
  if (!one.feasible || !two.feasible) {
    detail = "solver reported infeasible";
    return false;
  }
  const double e1 = std::max(std::abs(one.gamma(0) - 0.0), std::abs(one.gamma(1) - 1.0 / 3.0));
  const double e2 = std::max(std::abs(two.gamma(0) - 0.2), std::abs(two.gamma(1) - 0.4));
  const VectorXd projected = rep.invariant_projector() * one.gamma;
  const double e3 =
      std::max(std::abs(projected(0) - 1.0 / 3.0), std::abs(projected(1) - 1.0 / 3.0));
  char buf[160];
  std::snprintf(buf, sizeof buf, "|gamma1 err|=%.2e |gamma_aug err|=%.2e |proj err|=%.2e", e1, e2,
                e3);
  detail = buf;
  return e1 <= 1e-6 && e2 <= 1e-6 && e3 <= 1e-10;
}

// ---------------------------------------------------------------------------
// 2. Training reproduction of the same example: steerable vs augmented FC.
bool criterion_training_example(std::string& detail) {
  const Representation rep = shear_reflection_rep();
  const LabeledDataset s = one_point(1, 2, 1);
  const TrainTrace steer =
      run_gradient_flow(NetworkSpec::steerable(rep, {2, 4, 4}), s, acceptance_flow(101));
  const TrainTrace fc = run_gradient_flow(NetworkSpec::fc({2, 4, 4}), augment_dataset(rep, s),
                                          acceptance_flow(102));
  if (!steer.converged || !fc.converged) {
    detail = "training did not converge";
    return false;
  }
  const VectorXd diag = VectorXd::Constant(2, 1.0 / std::sqrt(2.0));
  VectorXd skew(2);
  skew << 1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0);
  const double cos_steer = steer.final_direction.dot(diag);
  const double cos_fc = fc.final_direction.dot(skew);
  const double cross = steer.final_direction.dot(fc.final_direction);
  char buf[160];
  std::snprintf(buf, sizeof buf, "cos_steer=%.4f cos_fc=%.4f cross=%.4f", cos_steer, cos_fc,
                cross);
  detail = buf;
  return cos_steer >= 0.99 && cos_fc >= 0.99 && cross <= 0.999;
}

// ---------------------------------------------------------------------------
// Shared instance set for criteria 3 and 4: ten reversal-on-R^4 and ten
// shift-on-R^8 instances with n drawn in [4, 16].
Scenario unitary_instances(const std::string& builtin, int order, int dim, std::uint64_t seed) {
  Scenario sc;
  sc.kind = ScenarioKind::ImplicitBias;
  sc.rep.builtin = builtin;
  sc.rep.order = order;
  sc.rep.dim = dim;
  sc.dataset.n_min = 4;
  sc.dataset.n_max = 16;
  sc.dataset.radius = 5.0;
  sc.dataset.beta0_norm = 2.0;
  sc.trials = 10;
  sc.seed = seed;
  sc.align_tol = 0.01;
  sc.flow = acceptance_flow(0);
  return sc;
}

bool criterion_implicit_bias(std::string& detail) {
  int pass = 0, inconclusive = 0, total = 0;
  for (const char* arch : {"steerable", "gcnn"}) {
    for (int half = 0; half < 2; ++half) {
      Scenario sc = half == 0 ? unitary_instances("reversal", 2, 4, 1001)
                              : unitary_instances("cyclic_shift", 4, 8, 1002);
      sc.arch = arch;
      const ScenarioReport report = run_scenario(sc);
      pass += report.passed;
      inconclusive += report.inconclusive;
      total += sc.trials;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "aligned %d/%d (%d inconclusive)", pass, total, inconclusive);
  detail = buf;
  // 20 instances x 2 architectures; at most one non-converged run forgiven
  return pass >= total - 1 && (total - pass) == inconclusive;
}

bool criterion_augmentation_equivalence(std::string& detail) {
  int pass = 0, inconclusive = 0, total = 0;
  for (int half = 0; half < 2; ++half) {
    Scenario sc = half == 0 ? unitary_instances("reversal", 2, 4, 1001)
                            : unitary_instances("cyclic_shift", 4, 8, 1002);
    sc.kind = ScenarioKind::AugmentationEquivalence;
    const ScenarioReport report = run_scenario(sc);
    pass += report.passed;
    inconclusive += report.inconclusive;
    total += sc.trials;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "agreed %d/%d (%d inconclusive)", pass, total, inconclusive);
  detail = buf;
  return pass + inconclusive == total && pass >= total - 1;
}

// ---------------------------------------------------------------------------
// 5. Non-unitary equivalence through the twisted inner product.
bool criterion_modified_inner_product(std::string& detail) {
  Scenario sc;
  sc.kind = ScenarioKind::ModifiedInnerProduct;
  sc.rep.builtin = "shear_reflection";
  sc.dataset.n = 6;
  sc.dataset.radius = 6.0;
  sc.dataset.beta0_norm = 2.0;
  sc.trials = 5;
  sc.seed = 2025;
  sc.align_tol = 0.01;
  sc.flow = acceptance_flow(0);
  const ScenarioReport report = run_scenario(sc);
  char buf[120];
  std::snprintf(buf, sizeof buf, "aligned %d/%d", report.passed, sc.trials);
  detail = buf;
  return report.passed == sc.trials;
}

// ---------------------------------------------------------------------------
// 6. Margin dominance from the exact SVM solutions.
bool criterion_margin_dominance(std::string& detail) {
  Scenario sc;
  sc.kind = ScenarioKind::MarginComparison;
  sc.rep.builtin = "cyclic_shift";
  sc.rep.order = 4;
  sc.rep.dim = 8;
  sc.dataset.n_min = 4;
  sc.dataset.n_max = 16;
  sc.trials = 100;
  sc.seed = 31;
  const ScenarioReport report = run_scenario(sc);
  char buf[120];
  std::snprintf(buf, sizeof buf, "dominated %d/%d", report.passed, sc.trials);
  detail = buf;
  return report.passed == sc.trials;
}

// ---------------------------------------------------------------------------
// 7. Test-error bound over fresh draws, with mean error falling in n.
bool criterion_generalization(std::string& detail) {
  std::vector<double> means;
  bool all_counts_ok = true;
  std::string counts;
  for (int n : {50, 200, 800}) {
    Scenario sc;
    sc.kind = ScenarioKind::Generalization;
    sc.rep.builtin = "cyclic_shift";
    sc.rep.order = 4;
    sc.rep.dim = 8;
    sc.dataset.n = n;
    sc.dataset.radius = 20.0;
    sc.dataset.beta0_norm = 2.0;
    sc.trials = 50;
    sc.seed = 7;
    sc.delta = 0.1;
    sc.test_samples = 10000;
    sc.rbar_samples = 100000;
    sc.flow = acceptance_flow(0);
    const ScenarioReport report = run_scenario(sc);
    double mean = 0.0;
    for (const TrialRecord& t : report.trials) mean += std::isfinite(t.test_error) ? t.test_error : 1.0;
    means.push_back(mean / sc.trials);
    counts += (counts.empty() ? "" : "/") + std::to_string(report.passed);
    if (report.passed < 45) all_counts_ok = false;
  }
  const bool decreasing =
      means[0] >= means[1] - 1e-12 && means[1] >= means[2] - 1e-12 && means[0] > means[2];
  char buf[200];
  std::snprintf(buf, sizeof buf, "bounded %s of 50 each; mean err %.4f -> %.4f -> %.4f",
                counts.c_str(), means[0], means[1], means[2]);
  detail = buf;
  return all_counts_ok && decreasing;
}

// ---------------------------------------------------------------------------
// 8. Property sweep across modules.
bool criterion_properties(std::string& detail) {
  std::mt19937_64 rng(4242);
  int checks = 0;

  // homomorphism and equivariance residuals
  for (int t = 0; t < 5; ++t) {
    const int m = 2 + uniform_index(rng, 3);
    const Representation rep = steerbias::oracles::random_permutation_rep(rng, m, 2 * m);
    for (int g = 0; g < m; ++g)
      for (int h = 0; h < m; ++h)
        if ((rep.mat(g) * rep.mat(h) - rep.mat(rep.group().mul(g, h))).cwiseAbs().maxCoeff() >
            1e-8) {
          detail = "homomorphism residual";
          return false;
        }
    const Representation out = steerbias::oracles::random_permutation_rep(rng, m, m);
    const IntertwinerBasis basis = IntertwinerBasis::compute(rep, out);
    for (int j = 0; j < basis.count(); ++j)
      if (check_equivariance(basis.mat(j), rep, out) > 1e-8) {
        detail = "equivariance residual";
        return false;
      }
    ++checks;
  }

  // projector idempotence and unitary norm contraction
  for (int t = 0; t < 5; ++t) {
    const Representation rep = steerbias::oracles::random_permutation_rep(rng, 4, 8);
    const MatrixXd at = rep.invariant_projector();
    if ((at * at - at).cwiseAbs().maxCoeff() > 1e-8) {
      detail = "projector idempotence";
      return false;
    }
    for (int k = 0; k < 200; ++k) {
      VectorXd x(8);
      for (int i = 0; i < 8; ++i) x(i) = standard_normal(rng);
      if (rep.orbit_average(x).norm() > x.norm() + 1e-12) {
        detail = "norm contraction";
        return false;
      }
    }
    ++checks;
  }

  // L-homogeneity and invariance for the three architectures
  {
    const Representation rep = reversal_rep(4);
    const std::vector<NetworkSpec> specs = {NetworkSpec::fc({4, 3, 3}),
                                            NetworkSpec::gcnn(rep, {4, 3, 3}),
                                            NetworkSpec::steerable(rep, {4, 3, 3})};
    for (const NetworkSpec& spec : specs) {
      const NetworkWeights w = random_weights(spec, rng, 0.6);
      const VectorXd flat = flatten_weights(spec, w);
      VectorXd x(4);
      for (int i = 0; i < 4; ++i) x(i) = standard_normal(rng);
      const double f = forward(spec, w, x);
      for (double nu : {0.5, 2.0, 10.0}) {
        const double fnu = forward(spec, unflatten_weights(spec, nu * flat), x);
        if (std::abs(fnu - std::pow(nu, 3) * f) > 1e-8 * std::pow(nu, 3) * (1.0 + std::abs(f))) {
          detail = "L-homogeneity";
          return false;
        }
      }
      if (spec.kind() != NetworkKind::FC) {
        for (int k = 0; k < 50; ++k) {
          VectorXd z(4);
          for (int i = 0; i < 4; ++i) z(i) = standard_normal(rng);
          const int g = uniform_index(rng, 2);
          const double fz = forward(spec, w, z);
          if (std::abs(forward(spec, w, rep.mat(g) * z) - fz) > 1e-8 * (1.0 + std::abs(fz))) {
            detail = "network invariance";
            return false;
          }
        }
      }
      ++checks;
    }
  }

  // analytic gradient vs finite differences
  {
    const Representation rep = reversal_rep(4);
    VectorXd a(4), b(4);
    a << 1, -2, 0.5, 3;
    b << -1, 0.25, 2, -0.5;
    const LabeledDataset s(std::vector<LabeledPoint>{{a, 1}, {b, -1}});
    for (const NetworkSpec& spec : {NetworkSpec::fc({4, 3, 3}), NetworkSpec::gcnn(rep, {4, 3, 3}),
                                    NetworkSpec::steerable(rep, {4, 3, 3})}) {
      const NetworkWeights w = random_weights(spec, rng, 0.5);
      if (steerbias::oracles::gradient_fd_error(spec, w, s) > 1e-5) {
        detail = "gradient finite differences";
        return false;
      }
      ++checks;
    }
  }

  // solver vs brute-force oracle, KKT certificates, duality identity
  int separable = 0;
  while (separable < 200) {
    const int n = 1 + uniform_index(rng, 6);
    const int d = 1 + uniform_index(rng, 3);
    const LabeledDataset s = steerbias::oracles::random_dataset(rng, n, d);
    const auto oracle = steerbias::oracles::brute_force_max_margin(s);
    const MaxMarginSolution sol = max_margin(s, 1e-8);
    if (sol.feasible != oracle.has_value()) {
      detail = "separability disagreement";
      return false;
    }
    if (!oracle) continue;
    ++separable;
    if ((sol.gamma - *oracle).norm() > 1e-4) {
      detail = "oracle deviation";
      return false;
    }
    const MaxMarginCertificate cert = kkt_certify(s, sol.gamma, sol.duals, 1e-6);
    if (!cert.passed) {
      detail = "KKT certificate";
      return false;
    }
    if (std::abs(sol.duals.sum() - sol.gamma.squaredNorm()) > 1e-6) {
      detail = "duality identity";
      return false;
    }
    ++checks;
  }

  detail = std::to_string(checks) + " property groups held";
  return true;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1. exact SVM values of the shear-reflection example", 1.0, criterion_svm_exact},
      {"2. training reproduction of the shear-reflection example", 120.0,
       criterion_training_example},
      {"3. trained directions match the max-margin theory (20 instances x 2 archs)", 900.0,
       criterion_implicit_bias},
      {"4. steerable-on-original equals FC-on-augmented (unitary)", 900.0,
       criterion_augmentation_equivalence},
      {"5. twisted inner product restores equivalence (non-unitary)", 900.0,
       criterion_modified_inner_product},
      {"6. margin dominance on 100 seeded unitary trials", 60.0, criterion_margin_dominance},
      {"7. test-error bound and shrinking error (n = 50/200/800)", 1200.0,
       criterion_generalization},
      {"8. property suites across all modules", 300.0, criterion_properties},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double sec =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count() /
        1000.0;
    if (sec > c.time_limit_sec) {
      ok = false;
      detail += " [exceeded time limit]";
    }
    std::printf("[%s] %s (%.2f s) %s\n", ok ? "PASS" : "FAIL", c.name.c_str(), sec,
                detail.c_str());
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
