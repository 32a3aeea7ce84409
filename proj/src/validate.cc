#include "reachsynth/validate.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "reachsynth/grid.h"
#include "reachsynth/kernels.h"
#include "reachsynth/lie.h"

namespace reachsynth {

const char* ToString(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::kReached: return "reached";
    case OutcomeKind::kLeftSafe: return "left_safe";
    case OutcomeKind::kTimeout: return "timeout";
    case OutcomeKind::kDiverged: return "diverged";
  }
  return "unknown";
}

std::vector<ResidualEntry> GridCheck(
    const std::vector<CertifiedConstraint>& exprs,
    const std::vector<Interval>& box, int resolution) {
  const int n = static_cast<int>(box.size());
  const BoxGrid grid(box, PointsPerAxisForBudget(n, resolution),
                     BoxGrid::Kind::kVertex);
  std::vector<ResidualEntry> out;
  for (const auto& c : exprs) {
    std::vector<CompiledPolynomial> region;
    for (const auto& g : c.region.generators) region.emplace_back(g);
    const GridMinimum m =
        RegionMinimumParallel(grid, CompiledPolynomial(c.expression), region);
    ResidualEntry e;
    e.label = c.label;
    e.empty = m.empty;
    e.min = m.value;
    e.argmin = m.argmin;
    e.points = m.points;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

struct ClosedLoop {
  ClosedLoop(const ReachAvoidProblem& p, const std::vector<Polynomial>& u)
      : n(p.n()), h(p.h), h_r(p.h_r) {
    if (static_cast<int>(u.size()) != p.m()) {
      throw std::invalid_argument("controller has the wrong number of outputs");
    }
    for (const auto& d : ClosedLoopDrift(p.system, u)) drift.emplace_back(d);
    if (p.system.sigma) {
      noise = p.system.noise_dim();
      for (const auto& row : *p.system.sigma) {
        for (const auto& s : row) sigma.emplace_back(s);
      }
    }
  }

  void Drift(const double* x, double* out) const {
    const std::span<const double> xs(x, n);
    for (int i = 0; i < n; ++i) out[i] = drift[i](xs);
  }

  bool InTarget(std::span<const double> x) const { return h_r(x) < 0; }
  bool Outside(std::span<const double> x) const { return h(x) <= 0; }

  int n;
  int noise = 0;
  CompiledPolynomial h, h_r;
  std::vector<CompiledPolynomial> drift;
  std::vector<CompiledPolynomial> sigma;  // row-major n x noise
};

void Rk4(const ClosedLoop& cl, const std::vector<double>& x, double dt,
         std::vector<double>& out) {
  const int n = cl.n;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  cl.Drift(x.data(), k1.data());
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
  cl.Drift(tmp.data(), k2.data());
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
  cl.Drift(tmp.data(), k3.data());
  for (int i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
  cl.Drift(tmp.data(), k4.data());
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

bool Finite(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double Norm(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void Record(TrajectoryOutcome& out, double t, const std::vector<double>& x) {
  out.times.push_back(t);
  out.path.push_back(x);
}

TrajectoryOutcome Simulate(const ClosedLoop& cl, std::span<const double> x0,
                           const SimulationOptions& opts) {
  if (static_cast<int>(x0.size()) != cl.n) {
    throw std::invalid_argument("initial state has the wrong dimension");
  }
  if (!(opts.dt > 0) || !(opts.horizon > 0)) {
    throw std::invalid_argument("dt and horizon must be positive");
  }
  TrajectoryOutcome out;
  std::vector<double> x(x0.begin(), x0.end());
  Record(out, 0.0, x);
  if (cl.InTarget(x)) {
    out.kind = OutcomeKind::kReached;
    out.hit_time = 0.0;
    return out;
  }
  if (cl.Outside(x)) {
    throw std::invalid_argument("initial state is outside the safe set");
  }
  const auto steps = static_cast<std::int64_t>(std::ceil(opts.horizon / opts.dt - 1e-9));
  const int every = std::max(1, opts.record_every);
  std::vector<double> next, probe;
  double t = 0;
  for (std::int64_t step = 1; step <= steps; ++step) {
    const double h = std::min(opts.dt, opts.horizon - t);
    Rk4(cl, x, h, next);
    if (!Finite(next)) {
      out.kind = OutcomeKind::kDiverged;
      out.final_time = t + h;
      return out;
    }
    const bool hit = cl.InTarget(next);
    const bool exit = cl.Outside(next);
    if (hit || exit) {
      // Earliest event time inside this step.
      double lo = 0, hi = h;
      probe = next;
      while (hi - lo > opts.event_tol) {
        const double mid = 0.5 * (lo + hi);
        Rk4(cl, x, mid, probe);
        if (cl.InTarget(probe) || cl.Outside(probe)) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      Rk4(cl, x, hi, probe);
      out.kind = cl.Outside(probe) ? OutcomeKind::kLeftSafe : OutcomeKind::kReached;
      out.hit_time = t + hi;
      out.final_time = t + hi;
      Record(out, t + hi, probe);
      return out;
    }
    t += h;
    x.swap(next);
    if (Norm(x) > opts.diverge_radius) {
      out.kind = OutcomeKind::kDiverged;
      out.final_time = t;
      Record(out, t, x);
      return out;
    }
    if (step % every == 0) Record(out, t, x);
  }
  out.kind = OutcomeKind::kTimeout;
  out.final_time = t;
  if (out.times.back() != t) Record(out, t, x);
  return out;
}

}  // namespace

TrajectoryOutcome SimulateOde(const ReachAvoidProblem& p,
                              const std::vector<Polynomial>& u,
                              std::span<const double> x0,
                              const SimulationOptions& opts) {
  return Simulate(ClosedLoop(p, u), x0, opts);
}

std::vector<std::vector<double>> SeedStates(const ReachAvoidProblem& p,
                                            int count) {
  if (count <= 0) return {};
  const CompiledPolynomial h(p.h);
  for (int k = static_cast<int>(std::ceil(std::sqrt(count)));; ++k) {
    const BoxGrid grid(p.bounding_box, k, BoxGrid::Kind::kMidpoint);
    std::vector<std::vector<double>> inside;
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      std::vector<double> x = grid.Point(i);
      if (h(x) > 0) inside.push_back(std::move(x));
    }
    if (static_cast<int>(inside.size()) >= count) {
      std::vector<std::vector<double>> out;
      const auto total = static_cast<std::int64_t>(inside.size());
      for (int i = 0; i < count; ++i) out.push_back(inside[i * total / count]);
      return out;
    }
    if (k > 4096) throw std::domain_error("SeedStates: safe set too small");
  }
}

std::vector<TrajectoryOutcome> SimulateBatchSerial(
    const ReachAvoidProblem& p, const std::vector<Polynomial>& u,
    const std::vector<std::vector<double>>& starts,
    const SimulationOptions& opts) {
  const ClosedLoop cl(p, u);
  std::vector<TrajectoryOutcome> out;
  out.reserve(starts.size());
  for (const auto& x0 : starts) out.push_back(Simulate(cl, x0, opts));
  return out;
}

std::vector<TrajectoryOutcome> SimulateBatchParallel(
    const ReachAvoidProblem& p, const std::vector<Polynomial>& u,
    const std::vector<std::vector<double>>& starts,
    const SimulationOptions& opts) {
  const ClosedLoop cl(p, u);
  const auto count = static_cast<std::int64_t>(starts.size());
  std::vector<TrajectoryOutcome> out(count);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) out[i] = Simulate(cl, starts[i], opts);
  return out;
}

namespace {

constexpr double kCertificateTol = 1e-6;

// Samples up to the target hit that lie in closure(C \ X_r).
template <class F>
CertificateCheck ReplayCertificate(const TrajectoryOutcome& traj,
                                   const ReachAvoidProblem& p, F margin) {
  CertificateCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  if (traj.path.empty()) return out;
  const CompiledPolynomial h(p.h), hr(p.h_r);
  for (std::size_t k = 0; k < traj.path.size(); ++k) {
    const auto& x = traj.path[k];
    if (hr(x) < 0 || h(x) < 0) continue;
    out.worst_margin = std::min(out.worst_margin, margin(k));
  }
  if (!std::isfinite(out.worst_margin)) out.worst_margin = 0;
  out.pass = out.worst_margin >= -kCertificateTol;
  return out;
}

}  // namespace

CertificateCheck CheckExponentialCertificate(const TrajectoryOutcome& traj,
                                             const ReachAvoidProblem& p,
                                             double lambda) {
  const CompiledPolynomial h(p.h);
  if (traj.path.empty()) return {};
  const double h0 = h(traj.path.front());
  return ReplayCertificate(traj, p, [&](std::size_t k) {
    return h(traj.path[k]) - std::exp(lambda * traj.times[k]) * h0;
  });
}

CertificateCheck CheckAsymptoticCertificate(const TrajectoryOutcome& traj,
                                            const ReachAvoidProblem& p,
                                            const Polynomial& w) {
  const CompiledPolynomial h(p.h), wc(w);
  if (traj.path.empty()) return {};
  const double h0 = h(traj.path.front());
  const double w0 = wc(traj.path.front());
  double prev_h = h0;
  return ReplayCertificate(traj, p, [&](std::size_t k) {
    const double hk = h(traj.path[k]);
    const double growth = wc(traj.path[k]) - w0 - h0 * traj.times[k];
    const double monotone = hk - prev_h;
    prev_h = hk;
    return std::min(growth, monotone);
  });
}

// ----- stochastic ---------------------------------------------------------------

namespace {

std::uint64_t SplitMix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double ToUnit(std::uint64_t bits) {
  // (0, 1]: never zero, so the logarithm below is finite.
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double CounterNormal(std::uint64_t global_seed, std::uint64_t path_seed,
                     std::uint64_t step, std::uint64_t component) {
  std::uint64_t key = SplitMix(global_seed);
  key = SplitMix(key ^ path_seed);
  key = SplitMix(key ^ step);
  key = SplitMix(key ^ component);
  const double u1 = ToUnit(SplitMix(key ^ 0x5851f42d4c957f2dULL));
  const double u2 = ToUnit(SplitMix(key ^ 0x14057b7ef767814fULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Euler-Maruyama until exit of C \ X_r or t_stop; on_step(x, dt) sees the
// state at the start of each step.
template <class F>
TrajectoryOutcome RunEm(const ClosedLoop& cl, std::span<const double> x0,
                        std::uint64_t path_seed, const StochasticOptions& opts,
                        double t_stop, F on_step) {
  if (static_cast<int>(x0.size()) != cl.n) {
    throw std::invalid_argument("initial state has the wrong dimension");
  }
  TrajectoryOutcome out;
  std::vector<double> x(x0.begin(), x0.end());
  Record(out, 0.0, x);
  if (cl.InTarget(x)) {
    out.kind = OutcomeKind::kReached;
    out.hit_time = 0.0;
    return out;
  }
  if (cl.Outside(x)) {
    throw std::invalid_argument("initial state is outside the safe set");
  }
  const int n = cl.n;
  const double sqdt = std::sqrt(opts.dt);
  std::vector<double> drift(n), xi(cl.noise), next(n);
  const auto steps = static_cast<std::int64_t>(std::ceil(t_stop / opts.dt - 1e-9));
  double t = 0;
  for (std::int64_t step = 0; step < steps; ++step) {
    const double dt = std::min(opts.dt, t_stop - t);
    const double sq = dt == opts.dt ? sqdt : std::sqrt(dt);
    on_step(x, dt);
    cl.Drift(x.data(), drift.data());
    for (int j = 0; j < cl.noise; ++j) {
      xi[j] = CounterNormal(opts.global_seed, path_seed,
                            static_cast<std::uint64_t>(step), j);
    }
    for (int i = 0; i < n; ++i) {
      double v = x[i] + drift[i] * dt;
      for (int j = 0; j < cl.noise; ++j) {
        v += cl.sigma[i * cl.noise + j](x) * sq * xi[j];
      }
      next[i] = v;
    }
    t += dt;
    x.swap(next);
    if (!Finite(x) || Norm(x) > opts.diverge_radius) {
      out.kind = OutcomeKind::kDiverged;
      out.final_time = t;
      Record(out, t, x);
      return out;
    }
    if (cl.InTarget(x) || cl.Outside(x)) {
      out.kind = cl.Outside(x) ? OutcomeKind::kLeftSafe : OutcomeKind::kReached;
      out.hit_time = t;
      out.final_time = t;
      Record(out, t, x);
      return out;
    }
    if (opts.record_every > 0 && (step + 1) % opts.record_every == 0) {
      Record(out, t, x);
    }
  }
  out.kind = OutcomeKind::kTimeout;
  out.final_time = t;
  Record(out, t, x);
  return out;
}

ClosedLoop StochasticLoop(const ReachAvoidProblem& p,
                          const std::vector<Polynomial>& u) {
  if (!p.system.stochastic()) {
    throw std::invalid_argument("problem has no diffusion term");
  }
  return ClosedLoop(p, u);
}

ReachEstimate Summarise(int reached, int paths, double bound) {
  ReachEstimate e;
  e.reached = reached;
  e.paths = paths;
  e.p_hat = paths ? static_cast<double>(reached) / paths : 0.0;
  e.se = paths ? std::sqrt(e.p_hat * (1.0 - e.p_hat) / paths) : 0.0;
  e.bound = bound;
  e.bound_ok = e.p_hat >= bound - 3.0 * e.se;
  return e;
}

void RequireInside(const ReachAvoidProblem& p, std::span<const double> x0) {
  if (CompiledPolynomial(p.h)(x0) <= 0) {
    throw std::invalid_argument("initial state is outside the safe set");
  }
}

}  // namespace

TrajectoryOutcome SimulateSdeStopped(const ReachAvoidProblem& p,
                                     const std::vector<Polynomial>& u,
                                     std::span<const double> x0,
                                     std::uint64_t path_seed,
                                     const StochasticOptions& opts) {
  return RunEm(StochasticLoop(p, u), x0, path_seed, opts, opts.horizon,
               [](const std::vector<double>&, double) {});
}

ReachEstimate EstimateReachProbabilitySerial(
    const ReachAvoidProblem& p, const std::vector<Polynomial>& u,
    std::span<const double> x0, const Polynomial& h_cert, int paths,
    const StochasticOptions& opts) {
  RequireInside(p, x0);
  const ClosedLoop cl = StochasticLoop(p, u);
  StochasticOptions o = opts;
  o.record_every = 0;
  int reached = 0;
  for (int i = 0; i < paths; ++i) {
    const auto r = RunEm(cl, x0, static_cast<std::uint64_t>(i), o, o.horizon,
                         [](const std::vector<double>&, double) {});
    if (r.kind == OutcomeKind::kReached) ++reached;
  }
  return Summarise(reached, paths, CompiledPolynomial(h_cert)(x0));
}

ReachEstimate EstimateReachProbability(const ReachAvoidProblem& p,
                                       const std::vector<Polynomial>& u,
                                       std::span<const double> x0,
                                       const Polynomial& h_cert, int paths,
                                       const StochasticOptions& opts) {
  RequireInside(p, x0);
  const ClosedLoop cl = StochasticLoop(p, u);
  StochasticOptions o = opts;
  o.record_every = 0;
  int reached = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : reached)
  for (int i = 0; i < paths; ++i) {
    const auto r = RunEm(cl, x0, static_cast<std::uint64_t>(i), o, o.horizon,
                         [](const std::vector<double>&, double) {});
    if (r.kind == OutcomeKind::kReached) ++reached;
  }
  return Summarise(reached, paths, CompiledPolynomial(h_cert)(x0));
}

DynkinResult CheckDynkin(const ReachAvoidProblem& p,
                         const std::vector<Polynomial>& u, const Polynomial& v,
                         std::span<const double> x0, int paths, double t_stop,
                         const StochasticOptions& opts) {
  if (paths < 2) throw std::invalid_argument("CheckDynkin: need at least 2 paths");
  const ClosedLoop cl = StochasticLoop(p, u);
  const CompiledPolynomial vc(v);
  const CompiledPolynomial gen(GeneratorFixed(v, p.system, u, true));
  const double v0 = vc(x0);
  StochasticOptions o = opts;
  o.record_every = 0;
  std::vector<double> end_value(paths), diff(paths);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < paths; ++i) {
    double integral = 0;
    const auto r = RunEm(cl, x0, static_cast<std::uint64_t>(i), o, t_stop,
                         [&](const std::vector<double>& x, double dt) {
                           integral += gen(x) * dt;
                         });
    end_value[i] = vc(r.path.back());
    diff[i] = end_value[i] - v0 - integral;
  }
  // Reduced in path order, so the result does not depend on the schedule.
  double lhs = 0, mean_diff = 0;
  for (int i = 0; i < paths; ++i) {
    lhs += end_value[i];
    mean_diff += diff[i];
  }
  lhs /= paths;
  mean_diff /= paths;
  double var = 0;
  for (int i = 0; i < paths; ++i) var += (diff[i] - mean_diff) * (diff[i] - mean_diff);
  var /= (paths - 1);
  DynkinResult out;
  out.lhs = lhs;
  out.rhs = lhs - mean_diff;
  out.residual = std::abs(mean_diff);
  out.se = std::sqrt(var / paths);
  out.pass = out.residual <= 4.0 * out.se + 0.01 * (1.0 + std::abs(lhs));
  return out;
}

// ----- norm and exports ---------------------------------------------------------

double ControllerNorm(const std::vector<Polynomial>& u,
                      const std::vector<Polynomial>& k, const Polynomial& h,
                      const std::vector<Interval>& box, int resolution) {
  if (u.size() != k.size()) throw std::invalid_argument("ControllerNorm: size mismatch");
  const int n = static_cast<int>(box.size());
  std::vector<CompiledPolynomial> phi;
  phi.emplace_back(Polynomial::Constant(n, 1.0));
  for (std::size_t j = 0; j < u.size(); ++j) phi.emplace_back(u[j] - k[j]);
  const BoxGrid grid(box, PointsPerAxisForBudget(n, resolution),
                     BoxGrid::Kind::kMidpoint);
  const Eigen::MatrixXd g = MaskedGramParallel(grid, CompiledPolynomial(h), phi);
  if (g(0, 0) <= 0) {
    throw std::domain_error("ControllerNorm: no quadrature point with h > 0");
  }
  double s = 0;
  for (std::size_t j = 1; j < phi.size(); ++j) s += g(j, j);
  return std::sqrt(std::max(0.0, s));
}

std::string TrajectoriesCsv(const std::vector<TrajectoryOutcome>& runs,
                            const std::vector<std::string>& state_names) {
  std::ostringstream os;
  os.precision(10);
  os << "path_id,t";
  for (const auto& s : state_names) os << ',' << s;
  os << '\n';
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t k = 0; k < runs[r].path.size(); ++k) {
      os << r << ',' << runs[r].times[k];
      for (double v : runs[r].path[k]) os << ',' << v;
      os << '\n';
    }
  }
  return os.str();
}

std::string VectorFieldCsv(const ReachAvoidProblem& p,
                           const std::vector<Polynomial>& u,
                           int points_per_axis) {
  const ClosedLoop cl(p, u);
  const BoxGrid grid(p.bounding_box, points_per_axis, BoxGrid::Kind::kVertex);
  std::ostringstream os;
  os.precision(10);
  for (std::size_t i = 0; i < p.state_names.size(); ++i) {
    os << (i ? "," : "") << p.state_names[i];
  }
  for (const auto& s : p.state_names) os << ",d" << s;
  os << '\n';
  std::vector<double> d(p.n());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    const std::vector<double> x = grid.Point(i);
    cl.Drift(x.data(), d.data());
    for (int j = 0; j < p.n(); ++j) os << (j ? "," : "") << x[j];
    for (double v : d) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

// ----- report ---------------------------------------------------------------------

ValidationReport Validate(const ReachAvoidProblem& p, const SynthesisResult& r,
                          const ValidationOptions& opts) {
  ValidationReport rep;
  rep.residuals = GridCheck(r.constraints, p.bounding_box, opts.grid_resolution);
  rep.min_residual = std::numeric_limits<double>::infinity();
  for (const auto& e : rep.residuals) {
    if (!e.empty) rep.min_residual = std::min(rep.min_residual, e.min);
  }
  if (!std::isfinite(rep.min_residual)) rep.min_residual = 0;
  if (r.controller.empty()) return rep;
  rep.norm = ControllerNorm(r.controller, p.nominal, p.h, p.bounding_box,
                            opts.quadrature_resolution);

  if (!p.system.stochastic()) {
    rep.runs = SimulateBatchParallel(p, r.controller,
                                     SeedStates(p, opts.trajectories), opts.ode);
    for (const auto& run : rep.runs) {
      switch (run.kind) {
        case OutcomeKind::kReached: ++rep.reached; break;
        case OutcomeKind::kLeftSafe: ++rep.left_safe; break;
        case OutcomeKind::kTimeout: ++rep.timeout; break;
        case OutcomeKind::kDiverged: ++rep.diverged; break;
      }
    }
    const bool exponential = r.method == Method::kExponential && r.rate;
    const bool asymptotic = r.method == Method::kAsymptotic && r.w;
    if (r.status == SynthesisStatus::kFull && (exponential || asymptotic)) {
      for (const auto& run : rep.runs) {
        const CertificateCheck c =
            exponential ? CheckExponentialCertificate(run, p, *r.rate)
                        : CheckAsymptoticCertificate(run, p, *r.w);
        ++rep.certificate_checked;
        if (c.pass) ++rep.certificate_passed;
      }
    }
    return rep;
  }

  std::vector<std::vector<double>> starts = opts.mc_starts;
  if (starts.empty()) starts = SeedStates(p, opts.mc_starts_default);
  const Polynomial& h_cert = r.h_prime ? *r.h_prime : p.h;
  for (const auto& x0 : starts) {
    rep.monte_carlo.push_back(
        {x0, EstimateReachProbability(p, r.controller, x0, h_cert, opts.mc_paths,
                                      opts.sde)});
  }
  return rep;
}

}  // namespace reachsynth
