#pragma once

#include <vector>

#include <Eigen/Dense>

#include "reachsynth/grid.h"
#include "reachsynth/polynomial.h"

namespace reachsynth {

/// Hot loops come in two flavours: an OpenMP version and a plain serial
/// reference used by the tests and the benchmark. Both accumulate one partial
/// per slab of the outermost grid axis and merge the partials in slab order,
/// so their results are bitwise identical.

/// sum over midpoint-grid points with weight(x) > 0 of phi(x) phi(x)^T * dV.
Eigen::MatrixXd MaskedGramSerial(const BoxGrid& grid,
                                 const CompiledPolynomial& weight,
                                 const std::vector<CompiledPolynomial>& phi);
Eigen::MatrixXd MaskedGramParallel(const BoxGrid& grid,
                                   const CompiledPolynomial& weight,
                                   const std::vector<CompiledPolynomial>& phi);

struct GridMinimum {
  bool empty = true;  // no grid point satisfied the region generators
  double value = 0;
  std::vector<double> argmin;
  std::int64_t points = 0;
};

/// min of expr over grid points where every generator is >= 0.
GridMinimum RegionMinimumSerial(const BoxGrid& grid,
                                const CompiledPolynomial& expr,
                                const std::vector<CompiledPolynomial>& region);
GridMinimum RegionMinimumParallel(
    const BoxGrid& grid, const CompiledPolynomial& expr,
    const std::vector<CompiledPolynomial>& region);

}  // namespace reachsynth
