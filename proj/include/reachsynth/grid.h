#pragma once

#include <cstdint>
#include <vector>

#include "reachsynth/problem.h"

namespace reachsynth {

/// Tensor grid over a box. Vertex grids include both endpoints of every
/// axis; midpoint grids place points at cell centres (quadrature).
class BoxGrid {
 public:
  enum class Kind { kVertex, kMidpoint };

  BoxGrid(std::vector<Interval> box, int points_per_axis, Kind kind);

  int dim() const { return static_cast<int>(box_.size()); }
  int points_per_axis() const { return per_axis_; }
  std::int64_t size() const { return size_; }
  /// Volume of one cell (midpoint grids) or spacing product (vertex grids).
  double cell_volume() const { return cell_volume_; }

  void Point(std::int64_t index, double* out) const;
  std::vector<double> Point(std::int64_t index) const;

 private:
  std::vector<Interval> box_;
  int per_axis_;
  Kind kind_;
  std::int64_t size_ = 1;
  double cell_volume_ = 1.0;
  std::vector<double> step_;
};

/// Points per axis keeping roughly resolution^2 points in any dimension.
int PointsPerAxisForBudget(int dim, int resolution);

}  // namespace reachsynth
