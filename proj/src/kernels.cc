#include "reachsynth/kernels.h"

#include <limits>

namespace reachsynth {

namespace {

int MaxPower(const CompiledPolynomial& w,
             const std::vector<CompiledPolynomial>& list) {
  int p = w.max_power();
  for (const auto& q : list) p = std::max(p, q.max_power());
  return p;
}

std::int64_t SlabSize(const BoxGrid& grid) {
  return grid.size() / grid.points_per_axis();
}

// Accumulates one slab of the outermost axis into `out`.
void GramSlab(const BoxGrid& grid, const CompiledPolynomial& weight,
              const std::vector<CompiledPolynomial>& phi, int slab,
              int max_power, Eigen::MatrixXd& out) {
  const int f = static_cast<int>(phi.size());
  const int stride = max_power + 1;
  const std::int64_t per_slab = SlabSize(grid);
  std::vector<double> x(grid.dim()), powers;
  Eigen::VectorXd v(f);
  out.setZero(f, f);
  for (std::int64_t i = slab * per_slab; i < (slab + 1) * per_slab; ++i) {
    grid.Point(i, x.data());
    FillPowerTable(x, max_power, powers);
    if (weight.EvaluateWithPowers(powers.data(), stride) <= 0) continue;
    for (int a = 0; a < f; ++a) {
      v(a) = phi[a].EvaluateWithPowers(powers.data(), stride);
    }
    out.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }
}

void MinSlab(const BoxGrid& grid, const CompiledPolynomial& expr,
             const std::vector<CompiledPolynomial>& region, int slab,
             int max_power, GridMinimum& out) {
  const int stride = max_power + 1;
  const std::int64_t per_slab = SlabSize(grid);
  std::vector<double> x(grid.dim()), powers;
  out = GridMinimum{};
  out.value = std::numeric_limits<double>::infinity();
  for (std::int64_t i = slab * per_slab; i < (slab + 1) * per_slab; ++i) {
    grid.Point(i, x.data());
    FillPowerTable(x, max_power, powers);
    bool inside = true;
    for (const auto& g : region) {
      if (g.EvaluateWithPowers(powers.data(), stride) < 0) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    ++out.points;
    const double v = expr.EvaluateWithPowers(powers.data(), stride);
    if (out.empty || v < out.value) {
      out.empty = false;
      out.value = v;
      out.argmin = x;
    }
  }
}

Eigen::MatrixXd MergeGram(std::vector<Eigen::MatrixXd>& partials, int f,
                          double dv) {
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(f, f);
  for (const auto& p : partials) total += p;
  total = total.selfadjointView<Eigen::Lower>();
  return total * dv;
}

GridMinimum MergeMin(const std::vector<GridMinimum>& partials) {
  GridMinimum best;
  for (const auto& p : partials) {
    best.points += p.points;
    if (p.empty) continue;
    if (best.empty || p.value < best.value) {
      best.empty = false;
      best.value = p.value;
      best.argmin = p.argmin;
    }
  }
  return best;
}

}  // namespace

Eigen::MatrixXd MaskedGramSerial(const BoxGrid& grid,
                                 const CompiledPolynomial& weight,
                                 const std::vector<CompiledPolynomial>& phi) {
  const int slabs = grid.points_per_axis();
  const int mp = MaxPower(weight, phi);
  std::vector<Eigen::MatrixXd> partials(slabs);
  for (int s = 0; s < slabs; ++s) GramSlab(grid, weight, phi, s, mp, partials[s]);
  return MergeGram(partials, static_cast<int>(phi.size()), grid.cell_volume());
}

Eigen::MatrixXd MaskedGramParallel(const BoxGrid& grid,
                                   const CompiledPolynomial& weight,
                                   const std::vector<CompiledPolynomial>& phi) {
  const int slabs = grid.points_per_axis();
  const int mp = MaxPower(weight, phi);
  std::vector<Eigen::MatrixXd> partials(slabs);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < slabs; ++s) GramSlab(grid, weight, phi, s, mp, partials[s]);
  return MergeGram(partials, static_cast<int>(phi.size()), grid.cell_volume());
}

GridMinimum RegionMinimumSerial(const BoxGrid& grid,
                                const CompiledPolynomial& expr,
                                const std::vector<CompiledPolynomial>& region) {
  const int slabs = grid.points_per_axis();
  const int mp = MaxPower(expr, region);
  std::vector<GridMinimum> partials(slabs);
  for (int s = 0; s < slabs; ++s) MinSlab(grid, expr, region, s, mp, partials[s]);
  return MergeMin(partials);
}

GridMinimum RegionMinimumParallel(
    const BoxGrid& grid, const CompiledPolynomial& expr,
    const std::vector<CompiledPolynomial>& region) {
  const int slabs = grid.points_per_axis();
  const int mp = MaxPower(expr, region);
  std::vector<GridMinimum> partials(slabs);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < slabs; ++s) MinSlab(grid, expr, region, s, mp, partials[s]);
  return MergeMin(partials);
}

}  // namespace reachsynth
