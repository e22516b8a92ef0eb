#ifndef STEERBIAS_SERIALIZE_HPP
#define STEERBIAS_SERIALIZE_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "steerbias/dataset.hpp"
#include "steerbias/flow.hpp"
#include "steerbias/group.hpp"
#include "steerbias/intertwiner.hpp"
#include "steerbias/network.hpp"
#include "steerbias/representation.hpp"
#include "steerbias/svm.hpp"

namespace steerbias {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Matrix helpers: matrices travel as flat row-major arrays.

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

inline Eigen::MatrixXd matrix_from_json(const json& a, Eigen::Index rows, Eigen::Index cols,
                                        const std::string& what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != rows * cols)
    throw std::invalid_argument(what + ": expected flat row-major array of " +
                                std::to_string(rows * cols) + " numbers");
  Eigen::MatrixXd m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = a[k++].get<double>();
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Eigen::VectorXd vector_from_json(const json& a, const std::string& what) {
  if (!a.is_array()) throw std::invalid_argument(what + ": expected array of numbers");
  Eigen::VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  return v;
}

// ---------------------------------------------------------------------------
// Groups: {"order": n, "mul": [[...], ...]}

inline json group_to_json(const FiniteGroup& g) {
  json mul = json::array();
  for (int i = 0; i < g.order(); ++i) {
    json row = json::array();
    for (int j = 0; j < g.order(); ++j) row.push_back(g.mul(i, j));
    mul.push_back(std::move(row));
  }
  return json{{"order", g.order()}, {"mul", std::move(mul)}};
}

inline FiniteGroup group_from_json(const json& j) {
  if (!j.contains("order") || !j.contains("mul"))
    throw std::invalid_argument("group json: expected fields {order, mul}");
  const int n = j.at("order").get<int>();
  std::vector<std::vector<int>> table;
  for (const auto& row : j.at("mul")) table.push_back(row.get<std::vector<int>>());
  if (static_cast<int>(table.size()) != n)
    throw std::invalid_argument("group json: mul table size does not match order");
  return FiniteGroup::from_table(table);
}

// ---------------------------------------------------------------------------
// Representations: {"group": {...}, "dim": d, "mats": [flat row-major, ...]}

inline json rep_to_json(const Representation& rep) {
  json mats = json::array();
  for (int g = 0; g < rep.group().order(); ++g) mats.push_back(matrix_to_json(rep.mat(g)));
  return json{{"group", group_to_json(rep.group())}, {"dim", rep.dim()}, {"mats", std::move(mats)}};
}

inline Representation rep_from_json(const json& j, double hom_tol = kHomomorphismTol) {
  if (!j.contains("group") || !j.contains("dim") || !j.contains("mats"))
    throw std::invalid_argument("representation json: expected fields {group, dim, mats}");
  FiniteGroup g = group_from_json(j.at("group"));
  const int d = j.at("dim").get<int>();
  const json& mats = j.at("mats");
  if (static_cast<int>(mats.size()) != g.order())
    throw std::invalid_argument("representation json: need one matrix per group element");
  std::vector<Eigen::MatrixXd> m;
  m.reserve(mats.size());
  for (std::size_t k = 0; k < mats.size(); ++k)
    m.push_back(matrix_from_json(mats[k], d, d, "representation json: mats[" + std::to_string(k) + "]"));
  return Representation(std::move(g), std::move(m), hom_tol);
}

/// FNV-1a hash of the canonical JSON encoding; used to reference
/// representations from derived artifacts.
inline std::string content_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline std::string rep_content_hash(const Representation& rep) {
  return content_hash(rep_to_json(rep));
}

// ---------------------------------------------------------------------------
// Datasets: {"dim": d, "points": [{"x": [...], "y": 1}, ...]}

inline json dataset_to_json(const LabeledDataset& s) {
  json pts = json::array();
  for (int i = 0; i < s.size(); ++i)
    pts.push_back(json{{"x", vector_to_json(s[i].x)}, {"y", s[i].y}});
  return json{{"dim", s.dim()}, {"points", std::move(pts)}};
}

inline LabeledDataset dataset_from_json(const json& j) {
  if (!j.contains("dim") || !j.contains("points"))
    throw std::invalid_argument("dataset json: expected fields {dim, points}");
  const int d = j.at("dim").get<int>();
  std::vector<LabeledPoint> pts;
  for (const auto& p : j.at("points")) {
    Eigen::VectorXd x = vector_from_json(p.at("x"), "dataset json: x");
    if (x.size() != d) throw std::invalid_argument("dataset json: point dimension != dim");
    pts.push_back({std::move(x), p.at("y").get<int>()});
  }
  return LabeledDataset(std::move(pts));
}

// ---------------------------------------------------------------------------
// Intertwiner bases reference their representations by content hash.

inline json intertwiner_basis_to_json(const IntertwinerBasis& b) {
  json mats = json::array();
  for (int j = 0; j < b.count(); ++j) mats.push_back(matrix_to_json(b.mat(j)));
  return json{{"rep_in", rep_content_hash(b.rep_in())},
              {"rep_out", rep_content_hash(b.rep_out())},
              {"rows", b.rep_out().dim()},
              {"cols", b.rep_in().dim()},
              {"count", b.count()},
              {"mats", std::move(mats)}};
}

// ---------------------------------------------------------------------------
// Network specs and weights.

inline std::string kind_name(NetworkKind k) {
  switch (k) {
    case NetworkKind::FC: return "fc";
    case NetworkKind::GCNN: return "gcnn";
    case NetworkKind::Steerable: return "steerable";
  }
  return "?";
}

inline json netspec_to_json(const NetworkSpec& spec) {
  json j{{"kind", kind_name(spec.kind())}, {"layer_dims", spec.layer_dims()}};
  if (spec.has_input_rep()) j["rep"] = rep_to_json(spec.input_rep());
  return j;
}

inline NetworkSpec netspec_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  std::vector<int> dims = j.at("layer_dims").get<std::vector<int>>();
  if (kind == "fc") return NetworkSpec::fc(std::move(dims));
  Representation rep = rep_from_json(j.at("rep"));
  if (kind == "gcnn") return NetworkSpec::gcnn(std::move(rep), std::move(dims));
  if (kind == "steerable") return NetworkSpec::steerable(std::move(rep), std::move(dims));
  throw std::invalid_argument("network json: unknown kind '" + kind + "'");
}

/// Weight tensors as flat row-major arrays; GCNN hidden tensors use index
/// order (input channel, output channel, group element), group axis last.
inline json weights_to_json(const NetworkSpec& spec, const NetworkWeights& w) {
  json j{{"kind", kind_name(spec.kind())}, {"w1", matrix_to_json(w.w1)}};
  switch (spec.kind()) {
    case NetworkKind::FC: {
      json hidden = json::array();
      for (const auto& m : w.fc_hidden) hidden.push_back(matrix_to_json(m));
      j["hidden"] = std::move(hidden);
      j["w_out"] = vector_to_json(w.w_out);
      break;
    }
    case NetworkKind::GCNN: {
      json hidden = json::array();
      for (const auto& layer : w.conv_hidden) {
        json flat = json::array();
        const Eigen::Index rows = layer[0].rows(), cols = layer[0].cols();
        for (Eigen::Index i = 0; i < rows; ++i)
          for (Eigen::Index c = 0; c < cols; ++c)
            for (const auto& m : layer) flat.push_back(m(i, c));
        hidden.push_back(std::move(flat));
      }
      j["hidden"] = std::move(hidden);
      j["w_out"] = vector_to_json(w.w_out);
      break;
    }
    case NetworkKind::Steerable: {
      json coeffs = json::array();
      for (const auto& v : w.coeffs) coeffs.push_back(vector_to_json(v));
      j["coeffs"] = std::move(coeffs);
      break;
    }
  }
  return j;
}

inline NetworkWeights weights_from_json(const NetworkSpec& spec, const json& j) {
  NetworkWeights w = zero_weights(spec);
  const auto& d = spec.layer_dims();
  w.w1 = matrix_from_json(j.at("w1"), d[0], d[1], "weights json: w1");
  const int L = spec.depth();
  switch (spec.kind()) {
    case NetworkKind::FC: {
      const json& hidden = j.at("hidden");
      if (static_cast<int>(hidden.size()) != L - 2)
        throw std::invalid_argument("weights json: hidden layer count mismatch");
      for (int l = 2; l <= L - 1; ++l)
        w.fc_hidden[l - 2] =
            matrix_from_json(hidden[l - 2], d[l - 1], d[l], "weights json: hidden");
      w.w_out = vector_from_json(j.at("w_out"), "weights json: w_out");
      break;
    }
    case NetworkKind::GCNN: {
      const json& hidden = j.at("hidden");
      if (static_cast<int>(hidden.size()) != L - 2)
        throw std::invalid_argument("weights json: hidden layer count mismatch");
      const int n = spec.group_order();
      for (int l = 2; l <= L - 1; ++l) {
        const json& flat = hidden[l - 2];
        const Eigen::Index rows = d[l - 1], cols = d[l];
        if (static_cast<Eigen::Index>(flat.size()) != rows * cols * n)
          throw std::invalid_argument("weights json: hidden tensor size mismatch");
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < rows; ++i)
          for (Eigen::Index c = 0; c < cols; ++c)
            for (int g = 0; g < n; ++g) w.conv_hidden[l - 2][g](i, c) = flat[k++].get<double>();
      }
      w.w_out = vector_from_json(j.at("w_out"), "weights json: w_out");
      break;
    }
    case NetworkKind::Steerable: {
      const json& coeffs = j.at("coeffs");
      if (static_cast<int>(coeffs.size()) != L - 1)
        throw std::invalid_argument("weights json: coefficient vector count mismatch");
      for (int l = 2; l <= L; ++l) {
        w.coeffs[l - 2] = vector_from_json(coeffs[l - 2], "weights json: coeffs");
        if (w.coeffs[l - 2].size() != spec.basis(l).count())
          throw std::invalid_argument("weights json: coefficient count mismatch at layer " +
                                      std::to_string(l));
      }
      break;
    }
  }
  detail::check_weights(spec, w);
  return w;
}

// ---------------------------------------------------------------------------
// SVM solutions and certificates.

inline json solution_to_json(const MaxMarginSolution& sol) {
  return json{{"feasible", sol.feasible},
              {"gamma", vector_to_json(sol.gamma)},
              {"duals", vector_to_json(sol.duals)},
              {"objective", sol.objective},
              {"solver_iters", sol.solver_iters}};
}

inline json certificate_to_json(const MaxMarginCertificate& cert) {
  return json{{"primal_residual", cert.primal_residual},
              {"stationarity_residual", cert.stationarity_residual},
              {"slackness_residual", cert.slackness_residual},
              {"passed", cert.passed}};
}

// ---------------------------------------------------------------------------
// Training traces: JSON is downsampled to at most max_points snapshots; CSV
// has one row per snapshot with loss and direction-movement columns.

inline json trace_to_json(const TrainTrace& trace, std::size_t max_points = 1000) {
  const std::size_t n = trace.snapshot_times.size();
  std::vector<std::size_t> keep;
  if (n <= max_points) {
    for (std::size_t i = 0; i < n; ++i) keep.push_back(i);
  } else {
    const double stride = static_cast<double>(n - 1) / static_cast<double>(max_points - 1);
    for (std::size_t k = 0; k < max_points; ++k)
      keep.push_back(static_cast<std::size_t>(k * stride + 0.5));
    keep.back() = n - 1;
  }
  json times = json::array(), losses = json::array(), moves = json::array();
  for (std::size_t idx : keep) {
    times.push_back(trace.snapshot_times[idx]);
    losses.push_back(trace.losses[idx]);
    const double move =
        idx == 0 ? 0.0 : 1.0 - trace.directions[idx - 1].dot(trace.directions[idx]);
    moves.push_back(move);
  }
  json j{{"times", std::move(times)},
         {"losses", std::move(losses)},
         {"direction_moves", std::move(moves)},
         {"converged", trace.converged},
         {"final_direction", vector_to_json(trace.final_direction)},
         {"final_loss", trace.final_loss},
         {"steps", trace.steps}};
  if (trace.separation_time) j["separation_time"] = *trace.separation_time;
  if (!trace.diagnostic.empty()) j["diagnostic"] = trace.diagnostic;
  return j;
}

inline void trace_to_csv(const TrainTrace& trace, std::ostream& os) {
  os << "snapshot,time,loss,direction_cos_move\n";
  char buf[128];
  for (std::size_t i = 0; i < trace.snapshot_times.size(); ++i) {
    const double move = i == 0 ? 0.0 : 1.0 - trace.directions[i - 1].dot(trace.directions[i]);
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, trace.snapshot_times[i],
                  trace.losses[i], move);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Small file helpers with path context in errors.

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("cannot parse " + path + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace steerbias

#endif  // STEERBIAS_SERIALIZE_HPP
