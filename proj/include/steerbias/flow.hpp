#ifndef STEERBIAS_FLOW_HPP
#define STEERBIAS_FLOW_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "steerbias/dataset.hpp"
#include "steerbias/network.hpp"
#include "steerbias/rng.hpp"

namespace steerbias {

enum class StepMode { Fixed, LossAdaptive };

struct FlowConfig {
  double max_time = 1e7;       // effective integration time budget
  double base_step = 0.01;
  StepMode step_mode = StepMode::LossAdaptive;
  double direction_tol = 1e-6;  // cosine-distance threshold between snapshots
  int snapshot_interval = 1000;  // accepted steps between snapshots
  std::uint64_t seed = 0;
  long max_steps = 2000000;  // iteration budget
  int post_convergence_snapshots = 0;  // keep integrating after the flag
  double init_scale = 0.5;   // halved until the initial loss is <= n*e
  // Trust cap on a single step's weight movement, relative to 1 + ||W||. The
  // adaptive step grows like 1/loss, and without the cap the late-phase
  // moves of an L-homogeneous network grow like ||W||^{L-1} and the Euler
  // path stops tracking the flow's direction path.
  double relative_step_cap = 0.002;

  void validate() const {
    if (max_time <= 0 || base_step <= 0 || direction_tol <= 0 || snapshot_interval < 1 ||
        max_steps < 1 || init_scale <= 0 || relative_step_cap <= 0)
      throw std::invalid_argument("flow config: steps, times and tolerances must be positive");
  }
};

/// Time series of one gradient-flow integration. Directions are unit copies
/// of the parameterized predictor at snapshot times; separation_time is the
/// first effective time with loss < 1.
struct TrainTrace {
  std::vector<double> snapshot_times;
  std::vector<double> losses;
  std::vector<Eigen::VectorXd> directions;
  std::optional<double> separation_time;
  bool converged = false;
  Eigen::VectorXd final_direction;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  long steps = 0;
  std::string diagnostic;
};

/// Raised when integration cannot proceed (non-finite loss at the initial
/// weights). Carries whatever trace had been accumulated.
class flow_error : public std::runtime_error {
 public:
  flow_error(const std::string& what, TrainTrace state)
      : std::runtime_error(what), last_state(std::move(state)) {}
  TrainTrace last_state;
};

/// Empirical exponential loss of a bare linear predictor. Overflowing terms
/// clamp the result to +infinity.
inline double exp_loss(const Eigen::VectorXd& beta, const LabeledDataset& s) {
  if (beta.size() != s.dim())
    throw std::invalid_argument("exp_loss: predictor size " + std::to_string(beta.size()) +
                                " != dataset dim " + std::to_string(s.dim()));
  double loss = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const double a = -static_cast<double>(s[i].y) * beta.dot(s[i].x);
    if (a > 709.0) return std::numeric_limits<double>::infinity();
    loss += std::exp(a);
  }
  return loss;
}

// Floor for the adaptive step's loss divisor. It only guards against
// division by a denormal: any floor large enough to bind before the loss
// underflows (say 1e-12) freezes the time rescaling while the predictor is
// still far from its limit, and the late phase degenerates back to the
// logarithmic crawl of the raw flow.
inline constexpr double kLossFloor = 1e-280;

/// Integrates dW/dt = -grad L(W; S) with explicit Euler steps from the given
/// initial weights. In loss-adaptive mode the step is base_step / max(loss,
/// floor), a pure time reparameterization that leaves the predictor's
/// direction path unchanged while keeping late-phase progress possible; any
/// step that would increase the loss is retried at half length. Convergence
/// is declared on the predictor direction: once the data is separated
/// (loss < 1) and the direction moves less than direction_tol in cosine
/// distance between consecutive snapshots.
inline TrainTrace run_gradient_flow(const NetworkSpec& spec, const NetworkWeights& init_weights,
                                    const LabeledDataset& s, const FlowConfig& cfg) {
  cfg.validate();
  TrainTrace trace;

  Eigen::VectorXd w = flatten_weights(spec, init_weights);
  double loss;
  Eigen::VectorXd grad;
  try {
    LossGradient lg = network_loss_and_gradient(spec, unflatten_weights(spec, w), s);
    loss = lg.loss;
    grad = flatten_weights(spec, lg.grad);
  } catch (const std::overflow_error& e) {
    throw flow_error(std::string("gradient flow: loss not finite at init: ") + e.what(),
                     std::move(trace));
  }
  if (!std::isfinite(loss))
    throw flow_error("gradient flow: loss not finite at init", std::move(trace));

  const double accept_slack = 1e-12;
  double t = 0.0;
  double scale = 1.0;

  auto direction_of = [&](const Eigen::VectorXd& flat) {
    Eigen::VectorXd beta = fast_predictor(spec, unflatten_weights(spec, flat));
    const double nrm = beta.norm();
    return nrm > 0.0 ? Eigen::VectorXd(beta / nrm) : Eigen::VectorXd::Zero(beta.size()).eval();
  };

  auto snapshot = [&]() {
    trace.snapshot_times.push_back(t);
    trace.losses.push_back(loss);
    trace.directions.push_back(direction_of(w));
  };
  snapshot();
  if (loss < 1.0 && !trace.separation_time) trace.separation_time = t;

  int since_snapshot = 0;
  int post_snapshots_left = cfg.post_convergence_snapshots;
  bool flagged = false;

  while (trace.steps < cfg.max_steps && t < cfg.max_time) {
    double step = cfg.base_step * scale;
    if (cfg.step_mode == StepMode::LossAdaptive) {
      step /= std::max(loss, kLossFloor);
      const double grad_norm = grad.norm();
      const double cap = cfg.relative_step_cap * (1.0 + w.norm());
      if (grad_norm * step > cap) step = cap / grad_norm;
    }

    const Eigen::VectorXd w_try = w - step * grad;
    double loss_try = std::numeric_limits<double>::infinity();
    Eigen::VectorXd grad_try;
    bool ok = true;
    try {
      LossGradient lg = network_loss_and_gradient(spec, unflatten_weights(spec, w_try), s);
      loss_try = lg.loss;
      grad_try = flatten_weights(spec, lg.grad);
      ok = std::isfinite(loss_try);
    } catch (const std::overflow_error&) {
      ok = false;
    }

    if (!ok || loss_try > loss + accept_slack) {
      scale *= 0.5;
      if (scale < 1e-18) {
        trace.diagnostic = "step collapsed below 1e-18 of base";
        break;
      }
      continue;
    }

    w = w_try;
    loss = loss_try;
    grad = std::move(grad_try);
    t += step;
    ++trace.steps;
    scale = std::min(1.0, scale * 2.0);
    if (loss < 1.0 && !trace.separation_time) trace.separation_time = t;

    if (++since_snapshot == cfg.snapshot_interval) {
      since_snapshot = 0;
      const Eigen::VectorXd prev = trace.directions.back();
      snapshot();
      const Eigen::VectorXd& cur = trace.directions.back();
      const double cos_dist = 1.0 - prev.dot(cur);
      if (!flagged && trace.separation_time && cos_dist < cfg.direction_tol) {
        flagged = true;
        trace.converged = true;
      }
      if (flagged) {
        if (post_snapshots_left == 0) break;
        --post_snapshots_left;
      }
    }
  }

  if (trace.snapshot_times.back() != t) snapshot();
  trace.final_direction = trace.directions.back();
  trace.final_loss = loss;
  if (!trace.converged && trace.diagnostic.empty()) {
    trace.diagnostic = trace.separation_time
                           ? "direction not settled within budget"
                           : "never separated within budget (data may not be separable by an "
                             "invariant predictor)";
  }
  return trace;
}

/// Seeds uniform [-init_scale, init_scale] weights, halving the scale until
/// the initial loss is at most n*e, then integrates.
inline TrainTrace run_gradient_flow(const NetworkSpec& spec, const LabeledDataset& s,
                                    const FlowConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  NetworkWeights w0 = random_weights(spec, rng, cfg.init_scale);
  const double target = static_cast<double>(s.size()) * std::exp(1.0);
  Eigen::VectorXd flat = flatten_weights(spec, w0);
  for (int k = 0; k < 200; ++k) {
    double l0 = std::numeric_limits<double>::infinity();
    try {
      l0 = network_loss(spec, unflatten_weights(spec, flat), s);
    } catch (const std::overflow_error&) {
    }
    if (l0 <= target) break;
    flat *= 0.5;
  }
  return run_gradient_flow(spec, unflatten_weights(spec, flat), s, cfg);
}

/// Fully-connected gradient flow on the group-augmented data under the inner
/// product twisted by the representation's Gram square root: the loss equals
/// the plain exponential loss on {(Q rho(g) x_i, y_i)} with Q the Gram square
/// root, so the flow integrates exactly that. The trace's final_direction is
/// the limit direction estimate of the modified-loss fully-connected
/// predictor; mapping it through Q recovers the steerable limit direction.
inline TrainTrace modified_fc_flow(const LabeledDataset& s, const Representation& rep,
                                   const FlowConfig& cfg, std::vector<int> fc_dims = {}) {
  const Eigen::MatrixXd q = rep.gram_sqrt();
  const LabeledDataset aug = augment_dataset(rep, s);
  std::vector<LabeledPoint> twisted;
  twisted.reserve(aug.size());
  for (int i = 0; i < aug.size(); ++i) twisted.push_back({q * aug[i].x, aug[i].y});
  if (fc_dims.empty()) fc_dims = {s.dim(), 4, 4};
  if (fc_dims[0] != s.dim())
    throw std::invalid_argument("modified_fc_flow: fc_dims[0] must equal the dataset dimension");
  return run_gradient_flow(NetworkSpec::fc(std::move(fc_dims)),
                           LabeledDataset(std::move(twisted)), cfg);
}

}  // namespace steerbias

#endif  // STEERBIAS_FLOW_HPP
