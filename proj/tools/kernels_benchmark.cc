// Serial reference kernels against their OpenMP versions.

#include <string>

#include <benchmark/benchmark.h>

#include "reachsynth/grid.h"
#include "reachsynth/kernels.h"
#include "reachsynth/problem.h"
#include "reachsynth/validate.h"

namespace reachsynth {
namespace {

const std::vector<std::string> kXY = {"x", "y"};

Polynomial P(const std::string& s) { return ParsePolynomial(s, kXY); }

ReachAvoidProblem Load(const std::string& name) {
  return LoadProblem(std::string(REACHSYNTH_PROBLEM_DIR) + "/" + name);
}

std::vector<CompiledPolynomial> Phi() {
  std::vector<CompiledPolynomial> phi;
  for (const auto& m : MonomialBasis(2, 3)) {
    Polynomial p(2);
    p.AddTerm(m, 1.0);
    phi.emplace_back(p);
  }
  return phi;
}

template <bool kParallel>
void BM_MaskedGram(benchmark::State& state) {
  const BoxGrid grid({{-1.5, 1.5}, {-1.5, 1.5}}, static_cast<int>(state.range(0)),
                     BoxGrid::Kind::kMidpoint);
  const CompiledPolynomial w(P("1 - x^2 - y^2"));
  const auto phi = Phi();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kParallel ? MaskedGramParallel(grid, w, phi)
                                       : MaskedGramSerial(grid, w, phi));
  }
}
BENCHMARK(BM_MaskedGram<false>)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaskedGram<true>)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

template <bool kParallel>
void BM_RegionMinimum(benchmark::State& state) {
  const BoxGrid grid({{-1.5, 1.5}, {-1.5, 1.5}}, static_cast<int>(state.range(0)),
                     BoxGrid::Kind::kVertex);
  const CompiledPolynomial e(P("x^4 - 3*x^2*y + y^3 - x*y + 0.5"));
  const std::vector<CompiledPolynomial> region = {CompiledPolynomial(P("1 - x^2 - y^2")),
                                                  CompiledPolynomial(P("x^2 + y^2 - 0.01"))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kParallel ? RegionMinimumParallel(grid, e, region)
                                       : RegionMinimumSerial(grid, e, region));
  }
}
BENCHMARK(BM_RegionMinimum<false>)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegionMinimum<true>)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

template <bool kParallel>
void BM_Trajectories(benchmark::State& state) {
  const auto p = Load("ex3.ra");
  const std::vector<Polynomial> u = {P("-3*x - y"), P("-3*x - 2*y")};
  const auto starts = SeedStates(p, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kParallel ? SimulateBatchParallel(p, u, starts)
                                       : SimulateBatchSerial(p, u, starts));
  }
}
BENCHMARK(BM_Trajectories<false>)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Trajectories<true>)->Arg(100)->Unit(benchmark::kMillisecond);

template <bool kParallel>
void BM_MonteCarlo(benchmark::State& state) {
  const auto p = Load("ex5.ra");
  const std::vector<Polynomial> u = {P("0"), P("0")};
  const std::vector<double> x0 = {-0.3, 0.2};
  const int paths = static_cast<int>(state.range(0));
  StochasticOptions o;
  o.dt = 1e-2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kParallel ? EstimateReachProbability(p, u, x0, p.h, paths, o)
                  : EstimateReachProbabilitySerial(p, u, x0, p.h, paths, o));
  }
}
BENCHMARK(BM_MonteCarlo<false>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo<true>)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace reachsynth

BENCHMARK_MAIN();
