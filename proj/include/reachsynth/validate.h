#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reachsynth/problem.h"
#include "reachsynth/synthesis.h"

namespace reachsynth {

// ----- grid residuals --------------------------------------------------------

struct ResidualEntry {
  std::string label;
  /// No grid point of the region; min and argmin are then meaningless.
  bool empty = true;
  double min = 0;
  std::vector<double> argmin;
  std::int64_t points = 0;
};

/// min of each expression over the vertex grid points of its region.
std::vector<ResidualEntry> GridCheck(
    const std::vector<CertifiedConstraint>& exprs,
    const std::vector<Interval>& box, int resolution = 201);

// ----- deterministic trajectories --------------------------------------------

enum class OutcomeKind { kReached, kLeftSafe, kTimeout, kDiverged };
const char* ToString(OutcomeKind k);

struct TrajectoryOutcome {
  OutcomeKind kind = OutcomeKind::kTimeout;
  std::optional<double> hit_time;
  double final_time = 0;
  std::vector<double> times;             // decimated samples
  std::vector<std::vector<double>> path;  // state at each sample
};

struct SimulationOptions {
  double dt = 1e-3;
  double horizon = 100;
  double diverge_radius = 1e6;
  double event_tol = 1e-6;
  /// Keep every record_every-th step (plus the first and last state).
  int record_every = 10;
};

/// RK4 on x' = f + g u(x) until the target is hit, h <= 0, divergence or
/// the horizon. Throws std::invalid_argument when h(x0) <= 0 and x0 is
/// outside the target.
TrajectoryOutcome SimulateOde(const ReachAvoidProblem& p,
                              const std::vector<Polynomial>& u,
                              std::span<const double> x0,
                              const SimulationOptions& opts = {});

/// `count` interior initial states: midpoints of the coarsest k x k grid of
/// the bounding box with at least `count` points in {h > 0}, thinned evenly.
std::vector<std::vector<double>> SeedStates(const ReachAvoidProblem& p,
                                            int count = 100);

/// Batch of independent ODE runs; serial reference and OpenMP version.
std::vector<TrajectoryOutcome> SimulateBatchSerial(
    const ReachAvoidProblem& p, const std::vector<Polynomial>& u,
    const std::vector<std::vector<double>>& starts,
    const SimulationOptions& opts = {});
std::vector<TrajectoryOutcome> SimulateBatchParallel(
    const ReachAvoidProblem& p, const std::vector<Polynomial>& u,
    const std::vector<std::vector<double>>& starts,
    const SimulationOptions& opts = {});

struct CertificateCheck {
  bool pass = true;
  double worst_margin = 0;
};

/// h(x(t)) >= e^{lambda t} h(x0) - 1e-6 on every sample in closure(C \ X_r)
/// up to the target hit.
CertificateCheck CheckExponentialCertificate(const TrajectoryOutcome& traj,
                                             const ReachAvoidProblem& p,
                                             double lambda);

/// w(x(t)) - w(x0) >= h(x0) t - 1e-6 and h non-decreasing (within 1e-6) on
/// every sample up to the target hit.
CertificateCheck CheckAsymptoticCertificate(const TrajectoryOutcome& traj,
                                            const ReachAvoidProblem& p,
                                            const Polynomial& w);

// ----- stochastic paths -------------------------------------------------------

struct StochasticOptions {
  double dt = 1e-3;
  double horizon = 100;
  double diverge_radius = 1e6;
  std::uint64_t global_seed = 42;
  int record_every = 0;  // 0 keeps only the first and last state
};

/// Standard normal keyed by (global_seed, path_seed, step, component); no
/// state, so paths are reproducible in any order.
double CounterNormal(std::uint64_t global_seed, std::uint64_t path_seed,
                     std::uint64_t step, std::uint64_t component);

/// Euler-Maruyama path of the closed loop, stopped on leaving C \ X_r.
/// Touching h = 0 counts as leaving C.
TrajectoryOutcome SimulateSdeStopped(const ReachAvoidProblem& p,
                                     const std::vector<Polynomial>& u,
                                     std::span<const double> x0,
                                     std::uint64_t path_seed,
                                     const StochasticOptions& opts = {});

struct ReachEstimate {
  double p_hat = 0;
  double se = 0;
  double bound = 0;  // h_cert(x0)
  bool bound_ok = false;
  int reached = 0;
  int paths = 0;
};

/// Fraction of M stopped paths that reach the target, compared against
/// h_cert(x0) - 3 se. Throws std::invalid_argument when h(x0) <= 0.
ReachEstimate EstimateReachProbabilitySerial(
    const ReachAvoidProblem& p, const std::vector<Polynomial>& u,
    std::span<const double> x0, const Polynomial& h_cert, int paths = 10000,
    const StochasticOptions& opts = {});
ReachEstimate EstimateReachProbability(const ReachAvoidProblem& p,
                                       const std::vector<Polynomial>& u,
                                       std::span<const double> x0,
                                       const Polynomial& h_cert,
                                       int paths = 10000,
                                       const StochasticOptions& opts = {});

struct DynkinResult {
  double lhs = 0;  // E[v(x(tau))]
  double rhs = 0;  // v(x0) + E[int_0^tau L v ds]
  double residual = 0;
  double se = 0;
  bool pass = false;
};

/// Monte Carlo check of E[v(x(tau))] = v(x0) + E[int_0^tau L_{v,u} ds] with
/// tau the exit time of C \ X_r capped at t_stop.
DynkinResult CheckDynkin(const ReachAvoidProblem& p,
                         const std::vector<Polynomial>& u, const Polynomial& v,
                         std::span<const double> x0, int paths, double t_stop,
                         const StochasticOptions& opts = {});

// ----- norm and exports -------------------------------------------------------

/// sqrt of the midpoint quadrature of (u - k)^T (u - k) over {h > 0}, on the
/// same grid as MomentObjective. Throws std::domain_error on an empty region.
double ControllerNorm(const std::vector<Polynomial>& u,
                      const std::vector<Polynomial>& k, const Polynomial& h,
                      const std::vector<Interval>& box, int resolution = 201);

/// path_id,t,x1..xn
std::string TrajectoriesCsv(const std::vector<TrajectoryOutcome>& runs,
                            const std::vector<std::string>& state_names);
/// x1..xn,dx1..dxn on a points_per_axis grid of the bounding box.
std::string VectorFieldCsv(const ReachAvoidProblem& p,
                           const std::vector<Polynomial>& u,
                           int points_per_axis = 21);

// ----- report -----------------------------------------------------------------

struct ValidationOptions {
  int grid_resolution = 201;
  int quadrature_resolution = 201;
  int trajectories = 100;
  SimulationOptions ode;
  StochasticOptions sde;
  int mc_paths = 10000;
  std::vector<std::vector<double>> mc_starts;  // empty: seed states
  int mc_starts_default = 3;
};

struct ValidationReport {
  std::vector<ResidualEntry> residuals;
  double min_residual = 0;  // over non-empty regions
  int reached = 0, left_safe = 0, timeout = 0, diverged = 0;
  int certificate_checked = 0, certificate_passed = 0;
  struct McEntry {
    std::vector<double> x0;
    ReachEstimate estimate;
  };
  std::vector<McEntry> monte_carlo;
  double norm = 0;
  std::vector<TrajectoryOutcome> runs;

  int total_runs() const { return reached + left_safe + timeout + diverged; }
};

/// Grid residuals, trajectories (deterministic) or Monte Carlo (stochastic),
/// certificate replay and the norm for a synthesis result.
ValidationReport Validate(const ReachAvoidProblem& p, const SynthesisResult& r,
                          const ValidationOptions& opts = {});

}  // namespace reachsynth
