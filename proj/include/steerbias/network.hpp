#ifndef STEERBIAS_NETWORK_HPP
#define STEERBIAS_NETWORK_HPP

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "steerbias/dataset.hpp"
#include "steerbias/errors.hpp"
#include "steerbias/intertwiner.hpp"
#include "steerbias/representation.hpp"
#include "steerbias/rng.hpp"

namespace steerbias {

enum class NetworkKind { FC, GCNN, Steerable };

/// Regular permutation action on width-many channels of functions over the
/// group: block permutation matrices of size width*|G|, element blocks
/// ordered group-major (block g holds channel values at g).
inline Representation regular_channels(const FiniteGroup& group, int width) {
  const int n = group.order();
  const Eigen::Index d = static_cast<Eigen::Index>(width) * n;
  std::vector<Eigen::MatrixXd> mats(n, Eigen::MatrixXd::Zero(d, d));
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      mats[g].block(static_cast<Eigen::Index>(group.mul(g, h)) * width,
                    static_cast<Eigen::Index>(h) * width, width, width) =
          Eigen::MatrixXd::Identity(width, width);
  return Representation(group, std::move(mats));
}

/// Architecture description for the three linear network families. The
/// output dimension is always 1; depth L counts all layers including the
/// final one. For GCNN and steerable networks the first layer is the lifting
/// map x |-> (w_1^T rho_0(g^-1) x)_g, and steerable hidden layers are
/// parameterized in a precomputed intertwiner basis.
class NetworkSpec {
 public:
  static NetworkSpec fc(std::vector<int> dims) {
    NetworkSpec s;
    s.kind_ = NetworkKind::FC;
    s.init_dims_(std::move(dims));
    return s;
  }

  static NetworkSpec gcnn(Representation input_rep, std::vector<int> dims) {
    NetworkSpec s;
    s.kind_ = NetworkKind::GCNN;
    s.init_dims_(std::move(dims));
    if (s.layer_dims_[0] != input_rep.dim())
      throw std::invalid_argument("gcnn: dims[0] != input representation dimension");
    s.input_rep_ = std::move(input_rep);
    return s;
  }

  /// Steerable network with regular representations (of the given channel
  /// widths) on every hidden layer.
  static NetworkSpec steerable(Representation input_rep, std::vector<int> dims) {
    NetworkSpec s;
    s.kind_ = NetworkKind::Steerable;
    s.init_dims_(std::move(dims));
    if (s.layer_dims_[0] != input_rep.dim())
      throw std::invalid_argument("steerable: dims[0] != input representation dimension");
    s.input_rep_ = std::move(input_rep);
    const FiniteGroup& grp = s.input_rep_->group();
    std::vector<Representation> reps;  // layers 1..L-1
    for (int l = 1; l < s.depth(); ++l) reps.push_back(regular_channels(grp, s.layer_dims_[l]));
    s.finish_steerable_(std::move(reps));
    return s;
  }

  /// Steerable network with caller-chosen representations on layers
  /// 2..L-1 (the first layer always lifts to the regular representation of
  /// width d1, the last maps to the trivial representation on R).
  static NetworkSpec steerable_custom(Representation input_rep, int d1,
                                      std::vector<Representation> mid_reps) {
    NetworkSpec s;
    s.kind_ = NetworkKind::Steerable;
    const FiniteGroup& grp = input_rep.group();
    std::vector<Representation> reps;
    reps.push_back(regular_channels(grp, d1));
    for (auto& r : mid_reps) {
      if (!(r.group() == grp))
        throw std::invalid_argument("steerable_custom: hidden representation group mismatch");
      reps.push_back(std::move(r));
    }
    std::vector<int> dims;
    dims.push_back(input_rep.dim());
    dims.push_back(d1);
    for (std::size_t i = 1; i < reps.size(); ++i) dims.push_back(reps[i].dim());
    s.init_dims_(std::move(dims));
    s.input_rep_ = std::move(input_rep);
    s.finish_steerable_(std::move(reps));
    return s;
  }

  NetworkKind kind() const { return kind_; }
  int depth() const { return static_cast<int>(layer_dims_.size()); }  // L
  const std::vector<int>& layer_dims() const { return layer_dims_; }
  int input_dim() const { return layer_dims_[0]; }
  const Representation& input_rep() const {
    if (!input_rep_) throw std::logic_error("network spec has no input representation");
    return *input_rep_;
  }
  bool has_input_rep() const { return input_rep_.has_value(); }
  int group_order() const { return input_rep_ ? input_rep_->group().order() : 1; }

  /// Steerable only: basis of layer l in 2..L.
  const IntertwinerBasis& basis(int l) const { return bases_.at(l - 2); }
  /// Steerable only: representation carried by layer l in 1..L-1.
  const Representation& layer_rep(int l) const { return steer_reps_.at(l - 1); }

 private:
  void init_dims_(std::vector<int> dims) {
    if (dims.size() < 2)
      throw std::invalid_argument("network spec: need at least 2 layers (input dim + one width)");
    for (int d : dims)
      if (d < 1) throw std::invalid_argument("network spec: layer dimensions must be positive");
    layer_dims_ = std::move(dims);
  }

  void finish_steerable_(std::vector<Representation> reps) {
    steer_reps_ = std::move(reps);
    const Representation out_triv = Representation::trivial(input_rep_->group(), 1);
    for (int l = 2; l <= depth(); ++l) {
      const Representation& in = steer_reps_[l - 2];
      const Representation& out = (l <= depth() - 1) ? steer_reps_[l - 1] : out_triv;
      bases_.push_back(IntertwinerBasis::compute(in, out));
    }
  }

  NetworkKind kind_ = NetworkKind::FC;
  std::vector<int> layer_dims_;
  std::optional<Representation> input_rep_;
  std::vector<Representation> steer_reps_;  // steerable layers 1..L-1
  std::vector<IntertwinerBasis> bases_;     // steerable layers 2..L
};

/// Per-layer trainable tensors. Which fields are populated depends on the
/// architecture:
///   FC        : w1 (d0 x d1), fc_hidden[l-2] (d_{l-1} x d_l), w_out (d_{L-1})
///   GCNN      : w1 (lifting, d0 x d1), conv_hidden[l-2][g] (d_{l-1} x d_l),
///               w_out (d_{L-1})
///   Steerable : w1 (lifting, d0 x d1), coeffs[l-2] in R^{N_l} for l = 2..L
struct NetworkWeights {
  Eigen::MatrixXd w1;
  std::vector<Eigen::MatrixXd> fc_hidden;
  std::vector<std::vector<Eigen::MatrixXd>> conv_hidden;
  std::vector<Eigen::VectorXd> coeffs;
  Eigen::VectorXd w_out;
};

inline NetworkWeights zero_weights(const NetworkSpec& spec) {
  NetworkWeights w;
  const auto& d = spec.layer_dims();
  const int L = spec.depth();
  w.w1 = Eigen::MatrixXd::Zero(d[0], d[1]);
  switch (spec.kind()) {
    case NetworkKind::FC:
      for (int l = 2; l <= L - 1; ++l) w.fc_hidden.push_back(Eigen::MatrixXd::Zero(d[l - 1], d[l]));
      w.w_out = Eigen::VectorXd::Zero(d[L - 1]);
      break;
    case NetworkKind::GCNN:
      for (int l = 2; l <= L - 1; ++l)
        w.conv_hidden.emplace_back(spec.group_order(), Eigen::MatrixXd::Zero(d[l - 1], d[l]));
      w.w_out = Eigen::VectorXd::Zero(d[L - 1]);
      break;
    case NetworkKind::Steerable:
      for (int l = 2; l <= L; ++l) w.coeffs.push_back(Eigen::VectorXd::Zero(spec.basis(l).count()));
      break;
  }
  return w;
}

namespace detail {

template <typename Fn>
void for_each_param(const NetworkSpec& spec, NetworkWeights& w, Fn&& fn) {
  for (Eigen::Index i = 0; i < w.w1.size(); ++i) fn(w.w1.data()[i]);
  for (auto& m : w.fc_hidden)
    for (Eigen::Index i = 0; i < m.size(); ++i) fn(m.data()[i]);
  for (auto& layer : w.conv_hidden)
    for (auto& m : layer)
      for (Eigen::Index i = 0; i < m.size(); ++i) fn(m.data()[i]);
  for (auto& v : w.coeffs)
    for (Eigen::Index i = 0; i < v.size(); ++i) fn(v.data()[i]);
  for (Eigen::Index i = 0; i < w.w_out.size(); ++i) fn(w.w_out.data()[i]);
  (void)spec;
}

inline void check_weights(const NetworkSpec& spec, const NetworkWeights& w) {
  const auto& d = spec.layer_dims();
  const int L = spec.depth();
  auto bad = [](const std::string& what) { return std::invalid_argument("weights: " + what); };
  if (w.w1.rows() != d[0] || w.w1.cols() != d[1]) throw bad("w1 shape mismatch");
  if (!w.w1.allFinite()) throw bad("w1 has non-finite entries");
  switch (spec.kind()) {
    case NetworkKind::FC:
      if (static_cast<int>(w.fc_hidden.size()) != L - 2) throw bad("hidden layer count mismatch");
      for (int l = 2; l <= L - 1; ++l) {
        const auto& m = w.fc_hidden[l - 2];
        if (m.rows() != d[l - 1] || m.cols() != d[l])
          throw bad("hidden layer " + std::to_string(l) + " shape mismatch");
        if (!m.allFinite()) throw bad("hidden layer has non-finite entries");
      }
      if (w.w_out.size() != d[L - 1]) throw bad("output layer shape mismatch");
      if (!w.w_out.allFinite()) throw bad("output layer has non-finite entries");
      break;
    case NetworkKind::GCNN:
      if (static_cast<int>(w.conv_hidden.size()) != L - 2) throw bad("hidden layer count mismatch");
      for (int l = 2; l <= L - 1; ++l) {
        const auto& layer = w.conv_hidden[l - 2];
        if (static_cast<int>(layer.size()) != spec.group_order())
          throw bad("hidden layer " + std::to_string(l) + " group axis mismatch");
        for (const auto& m : layer) {
          if (m.rows() != d[l - 1] || m.cols() != d[l])
            throw bad("hidden layer " + std::to_string(l) + " shape mismatch");
          if (!m.allFinite()) throw bad("hidden layer has non-finite entries");
        }
      }
      if (w.w_out.size() != d[L - 1]) throw bad("output layer shape mismatch");
      if (!w.w_out.allFinite()) throw bad("output layer has non-finite entries");
      break;
    case NetworkKind::Steerable:
      if (static_cast<int>(w.coeffs.size()) != L - 1) throw bad("coefficient vector count mismatch");
      for (int l = 2; l <= L; ++l) {
        if (w.coeffs[l - 2].size() != spec.basis(l).count())
          throw bad("layer " + std::to_string(l) + " coefficient count mismatch");
        if (!w.coeffs[l - 2].allFinite()) throw bad("coefficients have non-finite entries");
      }
      break;
  }
}

/// Lifting layer: column g holds w1^T rho_0(g^-1) x.
inline Eigen::MatrixXd lift(const NetworkSpec& spec, const Eigen::MatrixXd& w1,
                            const Eigen::VectorXd& x) {
  const Representation& rep = spec.input_rep();
  const FiniteGroup& grp = rep.group();
  Eigen::MatrixXd out(w1.cols(), grp.order());
  for (int g = 0; g < grp.order(); ++g) out.col(g) = w1.transpose() * (rep.mat(grp.inverse(g)) * x);
  return out;
}

}  // namespace detail

inline std::size_t param_count(const NetworkSpec& spec) {
  NetworkWeights w = zero_weights(spec);
  std::size_t n = 0;
  detail::for_each_param(spec, w, [&n](double&) { ++n; });
  return n;
}

inline Eigen::VectorXd flatten_weights(const NetworkSpec& spec, const NetworkWeights& w) {
  Eigen::VectorXd v(param_count(spec));
  Eigen::Index i = 0;
  detail::for_each_param(spec, const_cast<NetworkWeights&>(w), [&](double& p) { v(i++) = p; });
  return v;
}

inline NetworkWeights unflatten_weights(const NetworkSpec& spec, const Eigen::VectorXd& v) {
  NetworkWeights w = zero_weights(spec);
  Eigen::Index i = 0;
  detail::for_each_param(spec, w, [&](double& p) { p = v(i++); });
  if (i != v.size())
    throw std::invalid_argument("unflatten_weights: vector length does not match parameter count");
  return w;
}

/// I.i.d. uniform [-scale, scale] initialization.
inline NetworkWeights random_weights(const NetworkSpec& spec, std::mt19937_64& rng, double scale) {
  NetworkWeights w = zero_weights(spec);
  detail::for_each_param(spec, w, [&](double& p) { p = uniform_in(rng, -scale, scale); });
  return w;
}

/// Evaluates the network at x. For GCNN/steerable networks the result is
/// invariant to the input group action by construction.
inline double forward(const NetworkSpec& spec, const NetworkWeights& w, const Eigen::VectorXd& x) {
  detail::check_weights(spec, w);
  if (x.size() != spec.input_dim())
    throw std::invalid_argument("forward: input size " + std::to_string(x.size()) +
                                " != network input dim " + std::to_string(spec.input_dim()));
  const int L = spec.depth();
  switch (spec.kind()) {
    case NetworkKind::FC: {
      Eigen::VectorXd v = w.w1.transpose() * x;
      for (const auto& m : w.fc_hidden) v = m.transpose() * v;
      return w.w_out.dot(v);
    }
    case NetworkKind::GCNN: {
      const FiniteGroup& grp = spec.input_rep().group();
      const int n = grp.order();
      Eigen::MatrixXd act = detail::lift(spec, w.w1, x);
      for (const auto& layer : w.conv_hidden) {
        Eigen::MatrixXd next(layer[0].cols(), n);
        next.setZero();
        for (int g = 0; g < n; ++g)
          for (int h = 0; h < n; ++h)
            next.col(g) += layer[grp.mul(grp.inverse(h), g)].transpose() * act.col(h);
        act = std::move(next);
      }
      return w.w_out.dot(act.rowwise().sum()) / static_cast<double>(n);
    }
    case NetworkKind::Steerable: {
      const Eigen::MatrixXd lifted = detail::lift(spec, w.w1, x);
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(lifted.data(), lifted.size());
      for (int l = 2; l <= L; ++l) v = (spec.basis(l).combine(w.coeffs[l - 2]) * v).eval();
      return v(0);
    }
  }
  throw std::logic_error("forward: unknown network kind");
}

/// The linear predictor beta realized by the network: beta_j = f(e_j), so
/// that f(x) = <x, beta> for every x. For GCNN/steerable networks beta lies
/// in the invariant predictor subspace.
inline Eigen::VectorXd extract_predictor(const NetworkSpec& spec, const NetworkWeights& w) {
  const int d0 = spec.input_dim();
  Eigen::VectorXd beta(d0);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(d0);
  for (int j = 0; j < d0; ++j) {
    e(j) = 1.0;
    beta(j) = forward(spec, w, e);
    e(j) = 0.0;
  }
  return beta;
}

namespace detail {

/// Combined dense layer matrices of a steerable network (layers 2..L),
/// built once per weight vector so that repeated evaluations against the
/// same weights do not re-expand the intertwiner basis.
inline std::vector<Eigen::MatrixXd> steerable_layer_mats(const NetworkSpec& spec,
                                                         const NetworkWeights& w) {
  std::vector<Eigen::MatrixXd> mats;
  for (int l = 2; l <= spec.depth(); ++l) mats.push_back(spec.basis(l).combine(w.coeffs[l - 2]));
  return mats;
}

/// The realized predictor by one reverse sweep: propagate the output
/// sensitivity down to the first layer and pull it back through the lifting
/// map (or the first matrix, for FC). Equal to evaluating the network on the
/// standard basis, at the cost of a single pass.
inline Eigen::VectorXd predictor_reverse(const NetworkSpec& spec, const NetworkWeights& w,
                                         const std::vector<Eigen::MatrixXd>* steer_mats) {
  const int L = spec.depth();
  switch (spec.kind()) {
    case NetworkKind::FC: {
      Eigen::VectorXd s = w.w_out;
      for (int l = L - 1; l >= 2; --l) s = (w.fc_hidden[l - 2] * s).eval();
      return w.w1 * s;
    }
    case NetworkKind::GCNN: {
      const Representation& rep = spec.input_rep();
      const FiniteGroup& grp = rep.group();
      const int n = grp.order();
      Eigen::MatrixXd s(w.w_out.size(), n);
      for (int g = 0; g < n; ++g) s.col(g) = w.w_out / static_cast<double>(n);
      for (int l = L - 1; l >= 2; --l) {
        const auto& layer = w.conv_hidden[l - 2];
        Eigen::MatrixXd sprev = Eigen::MatrixXd::Zero(layer[0].rows(), n);
        for (int h = 0; h < n; ++h)
          for (int k = 0; k < n; ++k) sprev.col(h) += layer[k] * s.col(grp.mul(h, k));
        s = std::move(sprev);
      }
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(spec.input_dim());
      for (int g = 0; g < n; ++g)
        beta += rep.mat(grp.inverse(g)).transpose() * (w.w1 * s.col(g));
      return beta;
    }
    case NetworkKind::Steerable: {
      const Representation& rep = spec.input_rep();
      const FiniteGroup& grp = rep.group();
      Eigen::VectorXd s = Eigen::VectorXd::Ones(1);
      for (int l = L; l >= 2; --l) s = ((*steer_mats)[l - 2].transpose() * s).eval();
      const int d1 = spec.layer_dims()[1];
      Eigen::Map<const Eigen::MatrixXd> s1(s.data(), d1, grp.order());
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(spec.input_dim());
      for (int g = 0; g < grp.order(); ++g)
        beta += rep.mat(grp.inverse(g)).transpose() * (w.w1 * s1.col(g));
      return beta;
    }
  }
  throw std::logic_error("predictor_reverse: unknown network kind");
}

/// Gradient of W |-> f(r; W) for a fixed input r, by reverse accumulation
/// through the linear layers. steer_mats carries the pre-combined steerable
/// layer matrices (unused for FC/GCNN).
inline NetworkWeights backward(const NetworkSpec& spec, const NetworkWeights& w,
                               const Eigen::VectorXd& r,
                               const std::vector<Eigen::MatrixXd>* steer_mats) {
  NetworkWeights grad = zero_weights(spec);
  const int L = spec.depth();
  switch (spec.kind()) {
    case NetworkKind::FC: {
      std::vector<Eigen::VectorXd> act(L);  // act[l] = output of layer l; act[0] = input
      act[0] = r;
      act[1] = w.w1.transpose() * r;
      for (int l = 2; l <= L - 1; ++l) act[l] = w.fc_hidden[l - 2].transpose() * act[l - 1];
      grad.w_out = act[L - 1];
      Eigen::VectorXd s = w.w_out;  // sensitivity of f wrt act[l]
      for (int l = L - 1; l >= 2; --l) {
        grad.fc_hidden[l - 2] = act[l - 1] * s.transpose();
        s = (w.fc_hidden[l - 2] * s).eval();
      }
      grad.w1 = act[0] * s.transpose();
      return grad;
    }
    case NetworkKind::GCNN: {
      const FiniteGroup& grp = spec.input_rep().group();
      const int n = grp.order();
      std::vector<Eigen::MatrixXd> act(L - 1);  // act[l-1] = output of layer l, d_l x |G|
      act[0] = lift(spec, w.w1, r);
      for (int l = 2; l <= L - 1; ++l) {
        const auto& layer = w.conv_hidden[l - 2];
        Eigen::MatrixXd next(layer[0].cols(), n);
        next.setZero();
        for (int g = 0; g < n; ++g)
          for (int h = 0; h < n; ++h)
            next.col(g) += layer[grp.mul(grp.inverse(h), g)].transpose() * act[l - 2].col(h);
        act[l - 1] = std::move(next);
      }
      grad.w_out = act[L - 2].rowwise().sum() / static_cast<double>(n);
      Eigen::MatrixXd s(w.w_out.size(), n);  // sensitivity wrt layer output columns
      for (int g = 0; g < n; ++g) s.col(g) = w.w_out / static_cast<double>(n);
      for (int l = L - 1; l >= 2; --l) {
        const auto& layer = w.conv_hidden[l - 2];
        auto& glayer = grad.conv_hidden[l - 2];
        for (int k = 0; k < n; ++k) {
          for (int h = 0; h < n; ++h) glayer[k] += act[l - 2].col(h) * s.col(grp.mul(h, k)).transpose();
        }
        Eigen::MatrixXd sprev(layer[0].rows(), n);
        sprev.setZero();
        for (int h = 0; h < n; ++h)
          for (int k = 0; k < n; ++k) sprev.col(h) += layer[k] * s.col(grp.mul(h, k));
        s = std::move(sprev);
      }
      const Representation& rep = spec.input_rep();
      for (int g = 0; g < n; ++g)
        grad.w1 += (rep.mat(grp.inverse(g)) * r) * s.col(g).transpose();
      return grad;
    }
    case NetworkKind::Steerable: {
      std::vector<Eigen::VectorXd> act(L);  // act[l] for l = 1..L-1; act[L] is never needed
      const Eigen::MatrixXd lifted = lift(spec, w.w1, r);
      act[1] = Eigen::Map<const Eigen::VectorXd>(lifted.data(), lifted.size());
      for (int l = 2; l <= L - 1; ++l) act[l] = (*steer_mats)[l - 2] * act[l - 1];
      Eigen::VectorXd s = Eigen::VectorXd::Ones(1);
      for (int l = L; l >= 2; --l) {
        const IntertwinerBasis& basis = spec.basis(l);
        // d f / d w_l^j = <s, psi_j act> = <psi_j, s act^T>_F
        const Eigen::MatrixXd outer = s * act[l - 1].transpose();
        for (int j = 0; j < basis.count(); ++j)
          grad.coeffs[l - 2](j) = (basis.mat(j).array() * outer.array()).sum();
        s = ((*steer_mats)[l - 2].transpose() * s).eval();
      }
      const Representation& rep = spec.input_rep();
      const FiniteGroup& grp = rep.group();
      const int d1 = spec.layer_dims()[1];
      Eigen::Map<const Eigen::MatrixXd> s1(s.data(), d1, grp.order());
      for (int g = 0; g < grp.order(); ++g)
        grad.w1 += (rep.mat(grp.inverse(g)) * r) * s1.col(g).transpose();
      return grad;
    }
  }
  throw std::logic_error("backward: unknown network kind");
}

}  // namespace detail

/// The realized predictor computed in a single reverse sweep; agrees with
/// extract_predictor (which it is property-tested against) but costs one
/// pass instead of d_0 forward evaluations.
inline Eigen::VectorXd fast_predictor(const NetworkSpec& spec, const NetworkWeights& w) {
  if (spec.kind() == NetworkKind::Steerable) {
    const std::vector<Eigen::MatrixXd> mats = detail::steerable_layer_mats(spec, w);
    return detail::predictor_reverse(spec, w, &mats);
  }
  return detail::predictor_reverse(spec, w, nullptr);
}

/// Empirical exponential-loss value sum_i exp(-y_i f(x_i; W)). Throws
/// std::overflow_error when a term overflows double range.
inline double network_loss(const NetworkSpec& spec, const NetworkWeights& w,
                           const LabeledDataset& s) {
  detail::check_weights(spec, w);
  const Eigen::VectorXd beta = fast_predictor(spec, w);
  double loss = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    const double a = -static_cast<double>(s[i].y) * beta.dot(s[i].x);
    if (a > 709.0) throw std::overflow_error("network_loss: exponential overflow, rescale init");
    loss += std::exp(a);
  }
  return loss;
}

struct LossGradient {
  double loss;
  NetworkWeights grad;
};

/// Loss and its analytic gradient in one pass. Uses the linearity of the
/// network in its input: the weighted residual sum of the data points is
/// pushed through a single reverse sweep.
inline LossGradient network_loss_and_gradient(const NetworkSpec& spec, const NetworkWeights& w,
                                              const LabeledDataset& s) {
  detail::check_weights(spec, w);
  if (s.dim() != spec.input_dim())
    throw std::invalid_argument("loss: dataset dim != network input dim");
  std::vector<Eigen::MatrixXd> steer_mats;
  const std::vector<Eigen::MatrixXd>* mats = nullptr;
  if (spec.kind() == NetworkKind::Steerable) {
    steer_mats = detail::steerable_layer_mats(spec, w);
    mats = &steer_mats;
  }
  const Eigen::VectorXd beta = detail::predictor_reverse(spec, w, mats);
  double loss = 0.0;
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(s.dim());
  for (int i = 0; i < s.size(); ++i) {
    const double yi = static_cast<double>(s[i].y);
    const double a = -yi * beta.dot(s[i].x);
    if (a > 709.0)
      throw std::overflow_error("network_loss_and_gradient: exponential overflow, rescale init");
    const double e = std::exp(a);
    loss += e;
    residual -= yi * e * s[i].x;
  }
  return {loss, detail::backward(spec, w, residual, mats)};
}

/// Analytic gradient of the empirical exponential loss with respect to every
/// trainable tensor.
inline NetworkWeights gradient(const NetworkSpec& spec, const NetworkWeights& w,
                               const LabeledDataset& s) {
  return network_loss_and_gradient(spec, w, s).grad;
}

}  // namespace steerbias

#endif  // STEERBIAS_NETWORK_HPP
