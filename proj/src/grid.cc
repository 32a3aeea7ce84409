#include "reachsynth/grid.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reachsynth {

BoxGrid::BoxGrid(std::vector<Interval> box, int points_per_axis, Kind kind)
    : box_(std::move(box)), per_axis_(points_per_axis), kind_(kind) {
  if (box_.empty()) throw std::invalid_argument("BoxGrid: empty box");
  const int min_points = kind == Kind::kVertex ? 2 : 1;
  if (per_axis_ < min_points) {
    throw std::invalid_argument("BoxGrid: too few points per axis");
  }
  for (const Interval& iv : box_) {
    if (!(iv.hi > iv.lo)) throw std::invalid_argument("BoxGrid: empty interval");
    const double width = iv.hi - iv.lo;
    const double step = kind == Kind::kVertex ? width / (per_axis_ - 1)
                                              : width / per_axis_;
    step_.push_back(step);
    size_ *= per_axis_;
    cell_volume_ *= step;
  }
}

void BoxGrid::Point(std::int64_t index, double* out) const {
  for (int d = dim() - 1; d >= 0; --d) {
    const std::int64_t k = index % per_axis_;
    index /= per_axis_;
    const double offset = kind_ == Kind::kVertex ? 0.0 : 0.5;
    out[d] = box_[d].lo + (static_cast<double>(k) + offset) * step_[d];
  }
}

std::vector<double> BoxGrid::Point(std::int64_t index) const {
  std::vector<double> p(dim());
  Point(index, p.data());
  return p;
}

int PointsPerAxisForBudget(int dim, int resolution) {
  if (dim <= 2) return resolution;
  const double total = static_cast<double>(resolution) * resolution;
  return std::max(5, static_cast<int>(std::floor(std::pow(total, 1.0 / dim))));
}

}  // namespace reachsynth
