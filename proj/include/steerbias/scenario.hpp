#ifndef STEERBIAS_SCENARIO_HPP
#define STEERBIAS_SCENARIO_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "steerbias/flow.hpp"
#include "steerbias/sampler.hpp"
#include "steerbias/serialize.hpp"
#include "steerbias/svm.hpp"

namespace steerbias {

inline constexpr const char* kVersion = "steerbias 0.1.0";

enum class ScenarioKind {
  ImplicitBias,
  AugmentationEquivalence,
  NonunitaryCounterexample,
  ModifiedInnerProduct,
  MarginComparison,
  Generalization,
};

inline std::string scenario_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ImplicitBias: return "implicit-bias";
    case ScenarioKind::AugmentationEquivalence: return "augmentation-equivalence";
    case ScenarioKind::NonunitaryCounterexample: return "nonunitary-counterexample";
    case ScenarioKind::ModifiedInnerProduct: return "modified-inner-product";
    case ScenarioKind::MarginComparison: return "margin-comparison";
    case ScenarioKind::Generalization: return "generalization";
  }
  return "?";
}

inline ScenarioKind scenario_kind_from_name(const std::string& name) {
  for (ScenarioKind k :
       {ScenarioKind::ImplicitBias, ScenarioKind::AugmentationEquivalence,
        ScenarioKind::NonunitaryCounterexample, ScenarioKind::ModifiedInnerProduct,
        ScenarioKind::MarginComparison, ScenarioKind::Generalization})
    if (scenario_name(k) == name) return k;
  throw std::invalid_argument("unknown scenario name '" + name + "'");
}

// ---------------------------------------------------------------------------
// Built-in representations used by scenario configs and tests.

/// Z_2 acting on R^dim by reversing coordinate order (a unitary permutation
/// action; on R^2 this is the swap matrix).
inline Representation reversal_rep(int dim) {
  Eigen::MatrixXd rev = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) rev(dim - 1 - i, i) = 1.0;
  std::vector<Eigen::MatrixXd> mats{Eigen::MatrixXd::Identity(dim, dim), std::move(rev)};
  return Representation(FiniteGroup::cyclic(2), std::move(mats));
}

/// Z_order acting on R^dim by cyclically shifting blocks of dim/order
/// coordinates (unitary). order must divide dim.
inline Representation cyclic_shift_rep(int order, int dim) {
  if (order < 1 || dim < 1 || dim % order != 0)
    throw std::invalid_argument("cyclic_shift_rep: order must divide dim");
  const int block = dim / order;
  std::vector<Eigen::MatrixXd> mats;
  for (int k = 0; k < order; ++k) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) m((i + k * block) % dim, i) = 1.0;
    mats.push_back(std::move(m));
  }
  return Representation(FiniteGroup::cyclic(order), std::move(mats));
}

/// The non-unitary Z_2 action on R^2 whose non-identity element is the
/// reflection about the second axis conjugated by a shear:
/// [[-1, 0], [2, 1]].
inline Representation shear_reflection_rep() {
  Eigen::MatrixXd m(2, 2);
  m << -1.0, 0.0, 2.0, 1.0;
  std::vector<Eigen::MatrixXd> mats{Eigen::MatrixXd::Identity(2, 2), std::move(m)};
  return Representation(FiniteGroup::cyclic(2), std::move(mats));
}

inline Representation builtin_representation(const std::string& name, int order, int dim) {
  if (name == "reversal") return reversal_rep(dim);
  if (name == "cyclic_shift") return cyclic_shift_rep(order, dim);
  if (name == "regular") return Representation::regular(FiniteGroup::cyclic(order));
  if (name == "shear_reflection") return shear_reflection_rep();
  if (name == "trivial") return Representation::trivial(FiniteGroup::cyclic(order), dim);
  throw std::invalid_argument("unknown builtin representation '" + name + "'");
}

// ---------------------------------------------------------------------------
// Scenario configuration.

struct RepSource {
  std::string file;     // path to a representation json, or
  std::string builtin;  // one of the builtin names above
  int order = 2;
  int dim = 2;

  Representation load() const {
    if (!file.empty()) return rep_from_json(read_json_file(file));
    if (!builtin.empty()) return builtin_representation(builtin, order, dim);
    throw std::invalid_argument("rep source: provide either 'file' or 'builtin'");
  }
};

struct DatasetSource {
  std::string file;  // fixed dataset for every trial, or sampler parameters:
  int n = 8;
  int n_min = 0, n_max = 0;  // when n_max > 0, n is drawn per trial in [n_min, n_max]
  double radius = 5.0;
  double beta0_norm = 2.0;
  Eigen::VectorXd beta0;  // optional explicit separator (must be invariant)
};

/// Scenario-level flow defaults differ from the bare FlowConfig ones: the
/// adaptive step grows so quickly after separation that the step budget, not
/// the effective-time budget, should bind, and snapshots are taken densely
/// enough for the convergence test to fire within that budget.
inline FlowConfig scenario_flow_defaults() {
  FlowConfig cfg;
  cfg.max_time = 1e300;
  cfg.max_steps = 100000;
  cfg.snapshot_interval = 200;
  return cfg;
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::ImplicitBias;
  std::string arch = "steerable";  // steerable | gcnn | fc
  RepSource rep;
  DatasetSource dataset;
  FlowConfig flow = scenario_flow_defaults();
  int trials = 1;
  std::uint64_t seed = 0;
  double align_tol = 0.01;  // trained-vs-theory passes at cosine >= 1 - align_tol
  double svm_tol = 1e-6;
  std::vector<int> hidden_dims = {4, 4};
  double min_pass_fraction = 1.0;
  int allowed_failures = 0;
  // generalization only:
  int test_samples = 10000;
  long rbar_samples = 100000;
  double delta = 0.1;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
    if (align_tol <= 0 || svm_tol <= 0)
      throw std::invalid_argument("scenario: tolerances must be positive");
    if (arch != "steerable" && arch != "gcnn" && arch != "fc")
      throw std::invalid_argument("scenario: arch must be steerable, gcnn or fc");
    if (hidden_dims.empty()) throw std::invalid_argument("scenario: hidden_dims must be nonempty");
    flow.validate();
  }
};

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  std::string status;  // pass | fail | inconclusive
  double cosine = std::numeric_limits<double>::quiet_NaN();
  double cosine_fc = std::numeric_limits<double>::quiet_NaN();
  double cross_cosine = std::numeric_limits<double>::quiet_NaN();
  double margin_steer = std::numeric_limits<double>::quiet_NaN();
  double margin_fc = std::numeric_limits<double>::quiet_NaN();
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double r_bar = std::numeric_limits<double>::quiet_NaN();
  int resamples = 0;
  std::string note;
};

struct ScenarioReport {
  std::string scenario;
  std::string arch;
  json config_echo;
  std::vector<TrialRecord> trials;
  int passed = 0, failed = 0, inconclusive = 0;
  bool all_pass = false;
  std::string version = kVersion;
};

// ---------------------------------------------------------------------------
// Scenario JSON.

inline FlowConfig flow_from_json(const json& j) {
  FlowConfig cfg = scenario_flow_defaults();
  if (j.contains("max_time")) cfg.max_time = j.at("max_time").get<double>();
  if (j.contains("base_step")) cfg.base_step = j.at("base_step").get<double>();
  if (j.contains("step_mode")) {
    const std::string m = j.at("step_mode").get<std::string>();
    if (m == "fixed") cfg.step_mode = StepMode::Fixed;
    else if (m == "loss-adaptive") cfg.step_mode = StepMode::LossAdaptive;
    else throw std::invalid_argument("flow json: step_mode must be 'fixed' or 'loss-adaptive'");
  }
  if (j.contains("direction_tol")) cfg.direction_tol = j.at("direction_tol").get<double>();
  if (j.contains("snapshot_interval")) cfg.snapshot_interval = j.at("snapshot_interval").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("max_steps")) cfg.max_steps = j.at("max_steps").get<long>();
  if (j.contains("post_convergence_snapshots"))
    cfg.post_convergence_snapshots = j.at("post_convergence_snapshots").get<int>();
  if (j.contains("init_scale")) cfg.init_scale = j.at("init_scale").get<double>();
  return cfg;
}

inline json flow_to_json(const FlowConfig& cfg) {
  return json{{"max_time", cfg.max_time},
              {"base_step", cfg.base_step},
              {"step_mode", cfg.step_mode == StepMode::Fixed ? "fixed" : "loss-adaptive"},
              {"direction_tol", cfg.direction_tol},
              {"snapshot_interval", cfg.snapshot_interval},
              {"seed", cfg.seed},
              {"max_steps", cfg.max_steps},
              {"post_convergence_snapshots", cfg.post_convergence_snapshots},
              {"init_scale", cfg.init_scale}};
}

inline Scenario scenario_from_json(const json& j) {
  Scenario sc;
  sc.kind = scenario_kind_from_name(j.at("name").get<std::string>());
  if (j.contains("arch")) sc.arch = j.at("arch").get<std::string>();
  if (j.contains("rep")) {
    const json& r = j.at("rep");
    if (r.contains("file")) sc.rep.file = r.at("file").get<std::string>();
    if (r.contains("builtin")) sc.rep.builtin = r.at("builtin").get<std::string>();
    if (r.contains("order")) sc.rep.order = r.at("order").get<int>();
    if (r.contains("dim")) sc.rep.dim = r.at("dim").get<int>();
  }
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    if (d.contains("file")) sc.dataset.file = d.at("file").get<std::string>();
    if (d.contains("n")) sc.dataset.n = d.at("n").get<int>();
    if (d.contains("n_range")) {
      sc.dataset.n_min = d.at("n_range").at(0).get<int>();
      sc.dataset.n_max = d.at("n_range").at(1).get<int>();
    }
    if (d.contains("radius")) sc.dataset.radius = d.at("radius").get<double>();
    if (d.contains("beta0_norm")) sc.dataset.beta0_norm = d.at("beta0_norm").get<double>();
    if (d.contains("beta0")) sc.dataset.beta0 = vector_from_json(d.at("beta0"), "dataset beta0");
  }
  if (j.contains("flow")) sc.flow = flow_from_json(j.at("flow"));
  if (j.contains("trials")) sc.trials = j.at("trials").get<int>();
  if (j.contains("seed")) sc.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("align_tol")) sc.align_tol = j.at("align_tol").get<double>();
  if (j.contains("svm_tol")) sc.svm_tol = j.at("svm_tol").get<double>();
  if (j.contains("hidden_dims")) sc.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
  if (j.contains("test_samples")) sc.test_samples = j.at("test_samples").get<int>();
  if (j.contains("rbar_samples")) sc.rbar_samples = j.at("rbar_samples").get<long>();
  if (j.contains("delta")) sc.delta = j.at("delta").get<double>();
  // Aggregate pass policy: strict by default, lenient where the math is
  // statistical (high-probability bound) or asymptotic (slow directional
  // convergence).
  switch (sc.kind) {
    case ScenarioKind::Generalization: sc.min_pass_fraction = 0.9; break;
    case ScenarioKind::ImplicitBias:
    case ScenarioKind::AugmentationEquivalence: sc.min_pass_fraction = 0.95; break;
    default: sc.min_pass_fraction = 1.0; break;
  }
  if (j.contains("min_pass_fraction"))
    sc.min_pass_fraction = j.at("min_pass_fraction").get<double>();
  if (sc.kind == ScenarioKind::Generalization)
    sc.allowed_failures =
        sc.trials - static_cast<int>(std::ceil(sc.min_pass_fraction * sc.trials - 1e-9));
  if (j.contains("allowed_failures")) sc.allowed_failures = j.at("allowed_failures").get<int>();
  sc.validate();
  return sc;
}

inline json scenario_to_json(const Scenario& sc) {
  json rep;
  if (!sc.rep.file.empty()) rep["file"] = sc.rep.file;
  if (!sc.rep.builtin.empty()) {
    rep["builtin"] = sc.rep.builtin;
    rep["order"] = sc.rep.order;
    rep["dim"] = sc.rep.dim;
  }
  json ds;
  if (!sc.dataset.file.empty()) ds["file"] = sc.dataset.file;
  ds["n"] = sc.dataset.n;
  if (sc.dataset.n_max > 0) ds["n_range"] = json::array({sc.dataset.n_min, sc.dataset.n_max});
  ds["radius"] = sc.dataset.radius;
  ds["beta0_norm"] = sc.dataset.beta0_norm;
  if (sc.dataset.beta0.size() > 0) ds["beta0"] = vector_to_json(sc.dataset.beta0);
  return json{{"name", scenario_name(sc.kind)},
              {"arch", sc.arch},
              {"rep", std::move(rep)},
              {"dataset", std::move(ds)},
              {"flow", flow_to_json(sc.flow)},
              {"trials", sc.trials},
              {"seed", sc.seed},
              {"align_tol", sc.align_tol},
              {"svm_tol", sc.svm_tol},
              {"hidden_dims", sc.hidden_dims},
              {"min_pass_fraction", sc.min_pass_fraction},
              {"allowed_failures", sc.allowed_failures},
              {"test_samples", sc.test_samples},
              {"rbar_samples", sc.rbar_samples},
              {"delta", sc.delta}};
}

// ---------------------------------------------------------------------------
// Trial machinery.

namespace detail {

inline NetworkSpec make_net(const std::string& arch, const Representation& rep,
                            const std::vector<int>& hidden, int input_dim) {
  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  if (arch == "steerable") return NetworkSpec::steerable(rep, std::move(dims));
  if (arch == "gcnn") return NetworkSpec::gcnn(rep, std::move(dims));
  return NetworkSpec::fc(std::move(dims));
}

/// Default separating direction: the invariant-subspace combination of all
/// basis vectors, scaled to the requested norm.
inline Eigen::VectorXd default_beta0(const Representation& rep, double norm) {
  const Eigen::MatrixXd basis = rep.invariant_subspace_basis();
  if (basis.cols() == 0)
    throw std::invalid_argument("scenario: representation has no invariant directions to separate");
  Eigen::VectorXd b = basis * Eigen::VectorXd::Ones(basis.cols());
  if (b.norm() < 1e-12) b = basis.col(0);
  return b * (norm / b.norm());
}

inline Eigen::VectorXd scenario_beta0(const Scenario& sc, const Representation& rep) {
  if (sc.dataset.beta0.size() > 0) return sc.dataset.beta0;
  return default_beta0(rep, sc.dataset.beta0_norm);
}

inline int trial_n(const Scenario& sc, std::mt19937_64& rng) {
  if (sc.dataset.n_max > 0)
    return sc.dataset.n_min + uniform_index(rng, sc.dataset.n_max - sc.dataset.n_min + 1);
  return sc.dataset.n;
}

/// Per-trial dataset: a file source is shared across trials, a sampler
/// source is redrawn per trial. Draws that are not separable inside the
/// invariant subspace are resampled with a logged count.
inline LabeledDataset trial_dataset(const Scenario& sc, const Representation& rep,
                                    std::uint64_t data_seed, TrialRecord& rec) {
  if (!sc.dataset.file.empty()) return dataset_from_json(read_json_file(sc.dataset.file));
  const Eigen::VectorXd beta0 = scenario_beta0(sc, rep);
  std::mt19937_64 nrng(mix_seed(data_seed, 77));
  for (int attempt = 0; attempt < 50; ++attempt) {
    const int n = trial_n(sc, nrng);
    LabeledDataset s =
        sample_separable(rep, beta0, n, sc.dataset.radius, mix_seed(data_seed, attempt));
    if (invariant_max_margin(s, rep, sc.svm_tol).feasible) return s;
    ++rec.resamples;
  }
  throw std::runtime_error("scenario: 50 consecutive draws were not separable");
}

inline FlowConfig trial_flow(const Scenario& sc, std::uint64_t seed) {
  FlowConfig cfg = sc.flow;
  cfg.seed = seed;
  return cfg;
}

inline double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); }

}  // namespace detail

// ---------------------------------------------------------------------------
// The six experiment kinds. Each reproduces one statement at desk scale; a
// trial can pass, fail, or be inconclusive when training did not converge.

inline TrialRecord run_trial(const Scenario& sc, const Representation& rep, int index,
                             double r_bar = std::numeric_limits<double>::quiet_NaN()) {
  TrialRecord rec;
  rec.index = index;
  rec.seed = mix_seed(sc.seed, static_cast<std::uint64_t>(index));
  const std::uint64_t data_seed = mix_seed(rec.seed, 0);
  const std::uint64_t flow_seed_a = mix_seed(rec.seed, 1);
  const std::uint64_t flow_seed_b = mix_seed(rec.seed, 2);
  const std::uint64_t test_seed = mix_seed(rec.seed, 3);

  switch (sc.kind) {
    case ScenarioKind::ImplicitBias: {
      const LabeledDataset s = detail::trial_dataset(sc, rep, data_seed, rec);
      const Eigen::VectorXd theory = theory_direction_steerable(s, rep, sc.svm_tol);
      const NetworkSpec spec = detail::make_net(sc.arch, rep, sc.hidden_dims, s.dim());
      const TrainTrace trace = run_gradient_flow(spec, s, detail::trial_flow(sc, flow_seed_a));
      if (!trace.converged) {
        rec.status = "inconclusive";
        rec.note = trace.diagnostic;
        return rec;
      }
      rec.cosine = detail::cosine(trace.final_direction, theory);
      rec.status = rec.cosine >= 1.0 - sc.align_tol ? "pass" : "fail";
      return rec;
    }

    case ScenarioKind::AugmentationEquivalence: {
      const LabeledDataset s = detail::trial_dataset(sc, rep, data_seed, rec);
      const NetworkSpec steer = detail::make_net("steerable", rep, sc.hidden_dims, s.dim());
      const NetworkSpec fc = detail::make_net("fc", rep, sc.hidden_dims, s.dim());
      const TrainTrace ts = run_gradient_flow(steer, s, detail::trial_flow(sc, flow_seed_a));
      const TrainTrace tf = run_gradient_flow(fc, augment_dataset(rep, s),
                                              detail::trial_flow(sc, flow_seed_b));
      if (!ts.converged || !tf.converged) {
        rec.status = "inconclusive";
        rec.note = !ts.converged ? ts.diagnostic : tf.diagnostic;
        return rec;
      }
      rec.cosine = detail::cosine(ts.final_direction, tf.final_direction);
      rec.status = rec.cosine >= 1.0 - sc.align_tol ? "pass" : "fail";
      return rec;
    }

    case ScenarioKind::NonunitaryCounterexample: {
      // One-point data set under the shear-reflection action: the steerable
      // limit is (1,1)/sqrt(2) while augmented fully-connected training
      // lands on (1,2)/sqrt(5); the two must not coincide.
      Eigen::VectorXd x(2);
      x << 1.0, 2.0;
      const LabeledDataset s(std::vector<LabeledPoint>{{x, 1}});
      const NetworkSpec steer = detail::make_net("steerable", rep, sc.hidden_dims, 2);
      const NetworkSpec fc = detail::make_net("fc", rep, sc.hidden_dims, 2);
      const TrainTrace ts = run_gradient_flow(steer, s, detail::trial_flow(sc, flow_seed_a));
      const TrainTrace tf = run_gradient_flow(fc, augment_dataset(rep, s),
                                              detail::trial_flow(sc, flow_seed_b));
      if (!ts.converged || !tf.converged) {
        rec.status = "inconclusive";
        rec.note = !ts.converged ? ts.diagnostic : tf.diagnostic;
        return rec;
      }
      Eigen::VectorXd steer_target(2), fc_target(2);
      steer_target << 1.0, 1.0;
      fc_target << 1.0, 2.0;
      rec.cosine = detail::cosine(ts.final_direction, steer_target.normalized());
      rec.cosine_fc = detail::cosine(tf.final_direction, fc_target.normalized());
      rec.cross_cosine = detail::cosine(ts.final_direction, tf.final_direction);
      const bool ok = rec.cosine >= 1.0 - sc.align_tol && rec.cosine_fc >= 1.0 - sc.align_tol &&
                      rec.cross_cosine <= 0.999;
      rec.status = ok ? "pass" : "fail";
      return rec;
    }

    case ScenarioKind::ModifiedInnerProduct: {
      const LabeledDataset s = detail::trial_dataset(sc, rep, data_seed, rec);
      const NetworkSpec steer = detail::make_net("steerable", rep, sc.hidden_dims, s.dim());
      const TrainTrace ts = run_gradient_flow(steer, s, detail::trial_flow(sc, flow_seed_a));
      std::vector<int> fc_dims;
      fc_dims.push_back(s.dim());
      fc_dims.insert(fc_dims.end(), sc.hidden_dims.begin(), sc.hidden_dims.end());
      const TrainTrace tm =
          modified_fc_flow(s, rep, detail::trial_flow(sc, flow_seed_b), fc_dims);
      if (!ts.converged || !tm.converged) {
        rec.status = "inconclusive";
        rec.note = !ts.converged ? ts.diagnostic : tm.diagnostic;
        return rec;
      }
      const Eigen::VectorXd mapped = (rep.gram_sqrt() * tm.final_direction).normalized();
      rec.cosine = detail::cosine(mapped, ts.final_direction);
      rec.status = rec.cosine >= 1.0 - sc.align_tol ? "pass" : "fail";
      return rec;
    }

    case ScenarioKind::MarginComparison: {
      // Exact SVM route: both limit directions are computed as max-margin
      // solutions, so no training noise enters the comparison.
      const LabeledDataset s = detail::trial_dataset(sc, rep, data_seed, rec);
      const MaxMarginSolution inv = invariant_max_margin(s, rep, sc.svm_tol);
      const MaxMarginSolution fc = max_margin(s, sc.svm_tol);
      if (!inv.feasible || !fc.feasible) {
        rec.status = "inconclusive";
        rec.note = "svm infeasible";
        return rec;
      }
      const LabeledDataset aug = augment_dataset(rep, s);
      rec.margin_steer = margin(aug, inv.gamma.normalized());
      rec.margin_fc = margin(aug, fc.gamma.normalized());
      rec.status = rec.margin_steer >= rec.margin_fc - 1e-6 ? "pass" : "fail";
      return rec;
    }

    case ScenarioKind::Generalization: {
      const Eigen::VectorXd beta0 = detail::scenario_beta0(sc, rep);
      const LabeledDataset s = detail::trial_dataset(sc, rep, data_seed, rec);
      const NetworkSpec spec = detail::make_net(sc.arch, rep, sc.hidden_dims, s.dim());
      const TrainTrace trace = run_gradient_flow(spec, s, detail::trial_flow(sc, flow_seed_a));
      if (!trace.converged) {
        rec.status = "inconclusive";
        rec.note = trace.diagnostic;
        return rec;
      }
      std::mt19937_64 rng(test_seed);
      SamplerBudget budget;
      long wrong = 0;
      for (int k = 0; k < sc.test_samples; ++k) {
        const LabeledPoint p =
            sample_separable_point(rep, beta0, sc.dataset.radius, rng, budget);
        const double pred = trace.final_direction.dot(p.x);
        if ((pred >= 0 ? 1 : -1) != p.y) ++wrong;
      }
      rec.test_error = static_cast<double>(wrong) / static_cast<double>(sc.test_samples);
      rec.r_bar = r_bar;
      rec.bound = generalization_bound(s.size(), sc.delta, r_bar, beta0.norm());
      rec.status = rec.test_error <= rec.bound ? "pass" : "fail";
      return rec;
    }
  }
  throw std::logic_error("run_trial: unknown scenario kind");
}

// ---------------------------------------------------------------------------

inline int thread_budget() {
  if (const char* env = std::getenv("STEERBIAS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs every trial (in parallel up to STEERBIAS_THREADS) and aggregates.
/// Identical scenarios produce identical reports: each trial is seeded from
/// (scenario seed, trial index) alone.
inline ScenarioReport run_scenario(const Scenario& sc) {
  sc.validate();
  ScenarioReport report;
  report.scenario = scenario_name(sc.kind);
  report.arch = sc.arch;
  report.config_echo = scenario_to_json(sc);

  Representation rep =
      sc.kind == ScenarioKind::NonunitaryCounterexample && sc.rep.file.empty() &&
              sc.rep.builtin.empty()
          ? shear_reflection_rep()
          : sc.rep.load();
  if ((sc.kind == ScenarioKind::AugmentationEquivalence ||
       sc.kind == ScenarioKind::MarginComparison || sc.kind == ScenarioKind::Generalization) &&
      !rep.is_unitary(1e-8))
    throw std::invalid_argument("scenario '" + report.scenario +
                                "' requires a unitary representation");

  // The transformed-radius estimate depends only on the sampling law, not on
  // the trial, so it is measured once.
  double r_bar = std::numeric_limits<double>::quiet_NaN();
  if (sc.kind == ScenarioKind::Generalization) {
    const Eigen::VectorXd beta0 = detail::scenario_beta0(sc, rep);
    std::mt19937_64 rng(mix_seed(sc.seed, 0x52424152ULL));
    SamplerBudget budget;
    r_bar = 0.0;
    for (long k = 0; k < sc.rbar_samples; ++k) {
      const LabeledPoint p = sample_separable_point(rep, beta0, sc.dataset.radius, rng, budget);
      r_bar = std::max(r_bar, rep.orbit_average(p.x).norm());
    }
  }

  report.trials.resize(sc.trials);
  const int workers = std::min(thread_budget(), sc.trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= sc.trials) return;
      TrialRecord rec;
      try {
        rec = run_trial(sc, rep, i, r_bar);
      } catch (const std::exception& e) {
        rec.index = i;
        rec.seed = mix_seed(sc.seed, static_cast<std::uint64_t>(i));
        rec.status = "inconclusive";
        rec.note = e.what();
      }
      report.trials[i] = std::move(rec);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const TrialRecord& rec : report.trials) {
    if (rec.status == "pass") ++report.passed;
    else if (rec.status == "fail") ++report.failed;
    else ++report.inconclusive;
  }
  const int needed = static_cast<int>(std::ceil(sc.min_pass_fraction * sc.trials - 1e-9));
  report.all_pass = report.failed <= sc.allowed_failures && report.passed >= needed;
  return report;
}

// ---------------------------------------------------------------------------
// Report emission: deterministic bytes for identical reports.

inline json trial_to_json(const TrialRecord& rec) {
  json j{{"index", rec.index}, {"seed", rec.seed}, {"status", rec.status},
         {"resamples", rec.resamples}};
  auto put = [&j](const char* key, double v) {
    if (std::isfinite(v)) j[key] = v;
  };
  put("cosine", rec.cosine);
  put("cosine_fc", rec.cosine_fc);
  put("cross_cosine", rec.cross_cosine);
  put("margin_steer", rec.margin_steer);
  put("margin_fc", rec.margin_fc);
  put("test_error", rec.test_error);
  put("bound", rec.bound);
  put("r_bar", rec.r_bar);
  if (!rec.note.empty()) j["note"] = rec.note;
  return j;
}

inline json report_to_json(const ScenarioReport& report) {
  json trials = json::array();
  for (const TrialRecord& rec : report.trials) trials.push_back(trial_to_json(rec));
  return json{{"scenario", report.scenario},
              {"arch", report.arch},
              {"config", report.config_echo},
              {"summary",
               json{{"trials", static_cast<int>(report.trials.size())},
                    {"passed", report.passed},
                    {"failed", report.failed},
                    {"inconclusive", report.inconclusive},
                    {"all_pass", report.all_pass}}},
              {"trials", std::move(trials)},
              {"version", report.version}};
}

inline std::string report_to_csv(const ScenarioReport& report) {
  std::ostringstream os;
  os << "index,seed,status,cosine,cosine_fc,cross_cosine,margin_steer,margin_fc,test_error,"
        "bound,r_bar,resamples\n";
  char buf[512];
  for (const TrialRecord& r : report.trials) {
    std::snprintf(buf, sizeof buf,
                  "%d,%llu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.index,
                  static_cast<unsigned long long>(r.seed), r.status.c_str(), r.cosine, r.cosine_fc,
                  r.cross_cosine, r.margin_steer, r.margin_fc, r.test_error, r.bound, r.r_bar,
                  r.resamples);
    os << buf;
  }
  return os.str();
}

enum class ReportFormat { Json, Csv };

inline void emit_report(const ScenarioReport& report, ReportFormat format,
                        const std::string& path) {
  if (format == ReportFormat::Json)
    write_text_file(path, report_to_json(report).dump(2) + "\n");
  else
    write_text_file(path, report_to_csv(report));
}

}  // namespace steerbias

#endif  // STEERBIAS_SCENARIO_HPP
