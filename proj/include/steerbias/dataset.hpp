#ifndef STEERBIAS_DATASET_HPP
#define STEERBIAS_DATASET_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "steerbias/errors.hpp"
#include "steerbias/representation.hpp"

namespace steerbias {

struct LabeledPoint {
  Eigen::VectorXd x;
  int y;  // +1 or -1
};

/// A binary classification sample: n >= 1 points of a common dimension with
/// labels in {+1, -1}.
class LabeledDataset {
 public:
  explicit LabeledDataset(std::vector<LabeledPoint> points) : points_(std::move(points)) {
    if (points_.empty()) throw validation_error("dataset: needs at least one point");
    dim_ = static_cast<int>(points_[0].x.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].x.size() != dim_)
        throw validation_error("dataset: point " + std::to_string(i) + " has dimension " +
                               std::to_string(points_[i].x.size()) + ", expected " +
                               std::to_string(dim_));
      if (!points_[i].x.allFinite())
        throw validation_error("dataset: point " + std::to_string(i) + " has non-finite entries");
      if (points_[i].y != 1 && points_[i].y != -1)
        throw validation_error("dataset: point " + std::to_string(i) + " has label " +
                               std::to_string(points_[i].y) + ", expected +1 or -1");
    }
  }

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(points_.size()); }
  const LabeledPoint& operator[](int i) const { return points_[i]; }
  const std::vector<LabeledPoint>& points() const { return points_; }

 private:
  std::vector<LabeledPoint> points_;
  int dim_ = 0;
};

/// Replaces each point by its full group orbit {(rho(g) x_i, y_i)}, ordered
/// sample-major (all images of x_0 first, in group-element order).
inline LabeledDataset augment_dataset(const Representation& rep, const LabeledDataset& s) {
  if (rep.dim() != s.dim())
    throw std::invalid_argument("augment_dataset: representation dim " + std::to_string(rep.dim()) +
                                " != dataset dim " + std::to_string(s.dim()));
  std::vector<LabeledPoint> out;
  out.reserve(static_cast<std::size_t>(s.size()) * rep.group().order());
  for (int i = 0; i < s.size(); ++i)
    for (int g = 0; g < rep.group().order(); ++g)
      out.push_back({rep.mat(g) * s[i].x, s[i].y});
  return LabeledDataset(std::move(out));
}

/// Replaces each input by its orbit average; labels unchanged.
inline LabeledDataset transform_dataset(const Representation& rep, const LabeledDataset& s) {
  if (rep.dim() != s.dim())
    throw std::invalid_argument("transform_dataset: representation dim " +
                                std::to_string(rep.dim()) + " != dataset dim " +
                                std::to_string(s.dim()));
  std::vector<LabeledPoint> out;
  out.reserve(s.size());
  for (int i = 0; i < s.size(); ++i) out.push_back({rep.orbit_average(s[i].x), s[i].y});
  return LabeledDataset(std::move(out));
}

}  // namespace steerbias

#endif  // STEERBIAS_DATASET_HPP
