#include "reachsynth/synthesis.h"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "reachsynth/grid.h"
#include "reachsynth/lie.h"

namespace reachsynth {

const char* ToString(Method m) {
  switch (m) {
    case Method::kExponential: return "exponential";
    case Method::kAsymptotic: return "asymptotic";
    case Method::kLax: return "lax";
    case Method::kStochExponential: return "stoch_exponential";
    case Method::kStochAsymptotic: return "stoch_asymptotic";
  }
  return "unknown";
}

std::optional<Method> ParseMethod(const std::string& s) {
  for (Method m : {Method::kExponential, Method::kAsymptotic, Method::kLax,
                   Method::kStochExponential, Method::kStochAsymptotic}) {
    if (s == ToString(m)) return m;
  }
  return std::nullopt;
}

bool IsStochastic(Method m) {
  return m == Method::kStochExponential || m == Method::kStochAsymptotic;
}

const char* ToString(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kFull: return "full_reach_avoid";
    case SynthesisStatus::kTightened: return "tightened_reach_avoid";
    case SynthesisStatus::kSafeOnly: return "safe_only";
    case SynthesisStatus::kFailed: return "failed";
  }
  return "unknown";
}

void SynthesisOptions::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("SynthesisOptions: ") + what);
  };
  require(xi0 > 0, "xi0 must be > 0");
  require(eps0 > 0, "eps0 must be > 0");
  require(eps_prime > 0, "eps_prime must be > 0");
  require(eps_star > 0, "eps_star must be > 0");
  require(c_penalty > 0, "c_penalty must be > 0");
  require(mult_degree >= 0, "mult_degree must be >= 0");
  require(w_degree >= 1, "w_degree must be >= 1");
  require(max_alternations >= 1, "max_alternations must be >= 1");
  require(eps_strict >= 0, "eps_strict must be >= 0");
  require(w_coef_bound > 0, "w_coef_bound must be > 0");
  require(beta_max > 0, "beta_max must be > 0");
  require(quadrature_resolution >= 2, "quadrature_resolution must be >= 2");
}

Polynomial ExponentialHPrime(const Polynomial& h, double lambda, double delta) {
  return h - Polynomial::Constant(h.n_vars(), delta / lambda);
}

Polynomial StochExponentialHPrime(const Polynomial& h, double alpha,
                                  double delta) {
  return (h.Scale(alpha) - Polynomial::Constant(h.n_vars(), delta))
      .Scale(1.0 / (alpha - delta));
}

Polynomial AsymptoticHPrime(const Polynomial& h, double delta) {
  return h - Polynomial::Constant(h.n_vars(), delta);
}

Polynomial StochAsymptoticHPrime(const Polynomial& h, double delta) {
  return (h - Polynomial::Constant(h.n_vars(), delta)).Scale(1.0 / (1.0 - delta));
}

bool SampledIntersectionNonempty(const Polynomial& h_prime,
                                 const ReachAvoidProblem& p, int resolution) {
  const BoxGrid grid(p.bounding_box, PointsPerAxisForBudget(p.n(), resolution),
                     BoxGrid::Kind::kVertex);
  const CompiledPolynomial hp(h_prime), hr(p.h_r);
  std::vector<double> x(p.n());
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    grid.Point(i, x.data());
    if (hp(x) > 0 && hr(x) < 0) return true;
  }
  return false;
}

SynthesisStatus ClassifyExponential(double delta, const Polynomial& h_prime,
                                    const ReachAvoidProblem& p) {
  if (delta <= kDeltaZero) return SynthesisStatus::kFull;
  return SampledIntersectionNonempty(h_prime, p) ? SynthesisStatus::kTightened
                                                 : SynthesisStatus::kFailed;
}

namespace {

struct Context {
  Context(const ReachAvoidProblem& problem, const SynthesisOptions& options)
      : p(problem),
        o(options),
        tmpl(problem.n(), problem.m(), problem.template_degree),
        stochastic(IsStochastic(options.method)) {
    o.Validate();
    if (stochastic && !p.system.stochastic()) {
      throw std::invalid_argument("stochastic method needs a sigma entry");
    }
    objective = MomentObjective(tmpl, p.nominal, p.h, p.bounding_box,
                                o.quadrature_resolution);
    lie_h = LieOf(p.h);
    w_basis = MonomialBasis(p.n(), o.w_degree);
    smt = SafeMinusTarget(p);
    band = BandMinusTarget(p, o.eps0);
    closure = SafeClosure(p);
  }

  // Generator of a fixed polynomial, affine in the template coefficients.
  AffineInCoefficients LieOf(const Polynomial& v) const {
    AffineInCoefficients a = LieDerivativeOde(v, p.system, tmpl);
    if (stochastic) a.constant_part += DiffusionTerm(v, p.system);
    return a;
  }

  double Norm(const std::vector<double>& c) const {
    return std::sqrt(std::max(0.0, objective.Evaluate(c)));
  }

  std::vector<Polynomial> Controller(const std::vector<double>& c) const {
    return tmpl.Instantiate(c);
  }

  const ReachAvoidProblem& p;
  const SynthesisOptions& o;
  ControllerTemplate tmpl;
  bool stochastic;
  QuadraticObjective objective;
  AffineInCoefficients lie_h;
  std::vector<Monomial> w_basis;
  SemialgebraicRegion smt, band, closure;
};

Polynomial Const(const Context& ctx, double v) {
  return Polynomial::Constant(ctx.p.n(), v);
}

SosProgram NewProgram(const Context& ctx) {
  return SosProgram(ctx.p.n(), ctx.o.mult_degree, ctx.o.max_gram_degree);
}

// Template coefficients occupy variables [0, num_coefficients).
void AddController(SosProgram& prog, const Context& ctx) {
  const int first = prog.NewVariables(ctx.tmpl.num_coefficients(), "c");
  if (first != 0) throw std::logic_error("controller variables must come first");
  prog.SetNormCost(ctx.objective, first);
  for (int j = 0; j < ctx.p.m(); ++j) {
    const InputRange& r = ctx.p.inputs[j];
    const std::string name = ctx.p.input_names[j];
    if (r.hi) {
      AffineInCoefficients e(Const(ctx, *r.hi));
      for (int b = 0; b < ctx.tmpl.basis_size(); ++b) {
        e.AddLinear(ctx.tmpl.index(j, b),
                    Polynomial::FromMonomial(ctx.tmpl.basis()[b], -1.0));
      }
      prog.AddNonnegative(e, ctx.closure, "input_hi:" + name);
    }
    if (r.lo) {
      AffineInCoefficients e(Const(ctx, -*r.lo));
      for (int b = 0; b < ctx.tmpl.basis_size(); ++b) {
        e.AddLinear(ctx.tmpl.index(j, b), Polynomial::FromMonomial(ctx.tmpl.basis()[b]));
      }
      prog.AddNonnegative(e, ctx.closure, "input_lo:" + name);
    }
  }
}

std::vector<double> Coefficients(const SosSolution& s, const Context& ctx) {
  return {s.values.begin(), s.values.begin() + ctx.tmpl.num_coefficients()};
}

std::vector<int> BlockSizes(const SosProgram& prog) {
  std::vector<int> out;
  for (const auto& b : prog.Lower().sdp.blocks) {
    out.push_back(b.diagonal ? -b.size : b.size);
  }
  return out;
}

void AddInputConstraints(std::vector<CertifiedConstraint>& out, const Context& ctx,
                         const std::vector<Polynomial>& u) {
  for (int j = 0; j < ctx.p.m(); ++j) {
    const InputRange& r = ctx.p.inputs[j];
    const std::string name = ctx.p.input_names[j];
    if (r.hi) out.push_back({"input_hi:" + name, Const(ctx, *r.hi) - u[j], ctx.closure});
    if (r.lo) out.push_back({"input_lo:" + name, u[j] - Const(ctx, *r.lo), ctx.closure});
  }
}

// One candidate controller with its certificate.
struct Candidate {
  bool valid = false;
  std::vector<double> c;
  double delta = std::numeric_limits<double>::infinity();
  double norm = std::numeric_limits<double>::infinity();
  std::optional<double> rate;
  std::optional<double> beta;
  std::optional<Polynomial> w;
};

// Lower delta wins (beyond the zero tolerance); ties go to the smaller norm.
bool Better(const Candidate& a, const Candidate& b) {
  if (!a.valid) return false;
  if (!b.valid) return true;
  const double da = a.delta <= kDeltaZero ? 0.0 : a.delta;
  const double db = b.delta <= kDeltaZero ? 0.0 : b.delta;
  if (da != db) return da < db;
  return a.norm < b.norm;
}

void Record(SynthesisResult& r, int it, const std::string& program,
            SdpStatus st, double delta, double norm, bool accepted) {
  r.trace.push_back({it, program, st, delta, norm, accepted});
}

// ----- programs -------------------------------------------------------------

SosProgram ExponentialProgram(const Context& ctx, int* rate_var, int* delta_var) {
  SosProgram prog = NewProgram(ctx);
  AddController(prog, ctx);
  const int rate = prog.NewVariable(ctx.stochastic ? "alpha" : "lambda");
  const int delta = prog.NewVariable("delta");
  AffineInCoefficients e = ctx.lie_h;
  e.AddLinear(rate, -ctx.p.h);
  e.AddLinear(delta, Const(ctx, 1.0));
  prog.AddNonnegative(e, ctx.smt, ctx.stochastic ? "s_qu" : "qu");
  prog.AddLowerBound(rate, ctx.o.xi0);
  prog.AddLowerBound(delta, 0.0);
  if (ctx.stochastic) {
    // delta < alpha, with xi0 as the margin.
    prog.AddLinearInequality({{rate, 1.0}, {delta, -1.0}}, -ctx.o.xi0);
  }
  prog.AddLinearCost(delta, ctx.o.c_penalty);
  *rate_var = rate;
  *delta_var = delta;
  return prog;
}

SosProgram SafeProgram(const Context& ctx, const SemialgebraicRegion& region,
                       const std::string& label) {
  SosProgram prog = NewProgram(ctx);
  AddController(prog, ctx);
  prog.AddNonnegative(ctx.lie_h, region, label);
  return prog;
}

enum class Mode { kAsymptotic, kLax };

// Fits w (and delta) for a fixed controller.
SosProgram WFitProgram(const Context& ctx, const std::vector<double>& c, Mode mode,
                       int* w_first, int* delta_var) {
  SosProgram prog = NewProgram(ctx);
  const int nw = static_cast<int>(ctx.w_basis.size());
  const int first = prog.NewVariables(nw, "w");
  const int delta = prog.NewVariable("delta");
  const auto u = ctx.Controller(c);
  AffineInCoefficients e(mode == Mode::kAsymptotic ? -ctx.p.h
                                                   : Const(ctx, -ctx.o.eps_strict));
  for (int b = 0; b < nw; ++b) {
    e.AddLinear(first + b, GeneratorFixed(Polynomial::FromMonomial(ctx.w_basis[b]),
                                          ctx.p.system, u, ctx.stochastic));
    prog.AddLowerBound(first + b, -ctx.o.w_coef_bound);
    prog.AddUpperBound(first + b, ctx.o.w_coef_bound);
  }
  e.AddLinear(delta, Const(ctx, 1.0));
  prog.AddNonnegative(e, ctx.smt, mode == Mode::kAsymptotic ? "step_2" : "im_1");
  prog.AddLowerBound(delta, 0.0);
  if (ctx.stochastic) prog.AddUpperBound(delta, 1.0 - ctx.o.eps_strict);
  prog.AddLinearCost(delta, ctx.o.c_penalty);
  *w_first = first;
  *delta_var = delta;
  return prog;
}

// Re-optimises the controller for a fixed w.
SosProgram UStepProgram(const Context& ctx, const Polynomial& w, Mode mode,
                        int* delta_var, int* beta_var) {
  SosProgram prog = NewProgram(ctx);
  AddController(prog, ctx);
  const int delta = prog.NewVariable("delta");
  if (mode == Mode::kAsymptotic) {
    prog.AddNonnegative(ctx.lie_h, ctx.smt, "safety");
    AffineInCoefficients e = ctx.LieOf(w);
    e.constant_part -= ctx.p.h;
    e.AddLinear(delta, Const(ctx, 1.0));
    prog.AddNonnegative(e, ctx.smt, ctx.stochastic ? "s_im_2" : "q_P_r");
    *beta_var = -1;
  } else {
    const int beta = prog.NewVariable("beta");
    AffineInCoefficients s = ctx.lie_h;
    s.AddLinear(beta, ctx.p.h);
    prog.AddNonnegative(s, ctx.band, "safety_band");
    AffineInCoefficients e = ctx.LieOf(w);
    e.constant_part -= Const(ctx, ctx.o.eps_strict);
    e.AddLinear(delta, Const(ctx, 1.0));
    prog.AddNonnegative(e, ctx.smt, "im_2");
    prog.AddLowerBound(beta, 0.0);
    prog.AddUpperBound(beta, ctx.o.beta_max);
    *beta_var = beta;
  }
  prog.AddLowerBound(delta, 0.0);
  if (ctx.stochastic) prog.AddUpperBound(delta, 1.0 - ctx.o.eps_strict);
  prog.AddLinearCost(delta, ctx.o.c_penalty);
  *delta_var = delta;
  return prog;
}

Polynomial WFromSolution(const Context& ctx, const SosSolution& s, int first) {
  Polynomial w(ctx.p.n());
  for (std::size_t b = 0; b < ctx.w_basis.size(); ++b) {
    w.AddTerm(ctx.w_basis[b], s.value(first + static_cast<int>(b)));
  }
  return w;
}

SosSolution Run(const SosProgram& prog, const Context& ctx,
                SynthesisResult& result) {
  if (result.first_program_blocks.empty()) {
    result.first_program_blocks = BlockSizes(prog);
  }
  SosSolution s = prog.Solve(ctx.o.sdp);
  if (ctx.o.on_solve) ctx.o.on_solve(prog, s);
  return s;
}

bool Ok(const SosSolution& s) { return s.status == SdpStatus::kOptimal; }

// ----- result assembly -------------------------------------------------------

void Fill(SynthesisResult& r, const Context& ctx, const Candidate& cand) {
  r.coefficients = cand.c;
  r.controller = ctx.Controller(cand.c);
  r.delta = cand.delta <= kDeltaZero ? std::max(cand.delta, 0.0) : cand.delta;
  r.norm = ctx.Norm(cand.c);
  r.rate = cand.rate;
  r.beta = cand.beta;
  r.w = cand.w;
}

void CertifyExponential(SynthesisResult& r, const Context& ctx) {
  const Polynomial lie = ctx.lie_h.Instantiate(r.coefficients);
  r.constraints.push_back(
      {ctx.stochastic ? "s_qu" : "qu",
       lie - ctx.p.h.Scale(*r.rate) + Const(ctx, r.delta), ctx.smt});
  AddInputConstraints(r.constraints, ctx, r.controller);
}

void CertifyAlternation(SynthesisResult& r, const Context& ctx, Mode mode) {
  const Polynomial lie_h = ctx.lie_h.Instantiate(r.coefficients);
  const Polynomial lie_w =
      GeneratorFixed(*r.w, ctx.p.system, r.controller, ctx.stochastic);
  if (mode == Mode::kAsymptotic) {
    r.constraints.push_back({"safety", lie_h, ctx.smt});
    r.constraints.push_back(
        {"reachability", lie_w - ctx.p.h + Const(ctx, r.delta), ctx.smt});
  } else {
    r.constraints.push_back(
        {"safety_band", lie_h + ctx.p.h.Scale(r.beta.value_or(0.0)), ctx.band});
    r.constraints.push_back(
        {"reachability", lie_w + Const(ctx, r.delta), ctx.smt});
  }
  AddInputConstraints(r.constraints, ctx, r.controller);
}

// Algorithms 1-3: alternate a w-fit and a controller re-optimisation.
Candidate Alternate(const Context& ctx, Mode mode, Candidate current,
                    SynthesisResult& result) {
  Candidate best = current;
  int worse_rounds = 0;
  double prev_measure = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= ctx.o.max_alternations; ++it) {
    result.iterations = it;
    int w_first = 0, d_var = 0;
    const SosProgram fit = WFitProgram(ctx, current.c, mode, &w_first, &d_var);
    const SosSolution fs = Run(fit, ctx, result);
    const std::string fit_name = mode == Mode::kAsymptotic ? "step_2" : "im_1";
    if (!Ok(fs)) {
      Record(result, it, fit_name, fs.status, 0, current.norm, false);
      result.diagnostics.push_back(fit_name + " failed: " + ToString(fs.status));
      break;
    }
    Candidate fitted = current;
    fitted.w = WFromSolution(ctx, fs, w_first);
    fitted.delta = std::max(0.0, fs.value(d_var));
    fitted.valid = true;
    fitted.rate.reset();
    Record(result, it, fit_name, fs.status, fitted.delta, fitted.norm, true);
    if (Better(fitted, best)) best = fitted;

    int beta_var = -1;
    const SosProgram step = UStepProgram(ctx, *fitted.w, mode, &d_var, &beta_var);
    const SosSolution us = Run(step, ctx, result);
    const std::string step_name =
        mode == Mode::kLax ? "im_2" : (ctx.stochastic ? "s_im_2" : "q_P_r");
    if (!Ok(us)) {
      Record(result, it, step_name, us.status, 0, 0, false);
      result.diagnostics.push_back(step_name + " failed: " + ToString(us.status));
      break;
    }
    Candidate next;
    next.valid = true;
    next.c = Coefficients(us, ctx);
    next.delta = std::max(0.0, us.value(d_var));
    next.norm = ctx.Norm(next.c);
    next.w = fitted.w;
    if (beta_var >= 0) next.beta = us.value(beta_var);
    Record(result, it, step_name, us.status, next.delta, next.norm, true);
    if (Better(next, best)) best = next;

    const bool both_zero = fitted.delta <= kDeltaZero && next.delta <= kDeltaZero;
    bool keep_going;
    double measure;
    if (both_zero) {
      keep_going = next.norm - current.norm <= -ctx.o.eps_prime;
      measure = next.norm;
    } else {
      keep_going = next.delta - fitted.delta <= -ctx.o.eps_star;
      measure = next.delta;
    }
    if (measure > prev_measure) {
      if (++worse_rounds >= 2) {
        result.diagnostics.push_back(
            "alternation diverging; returning best iterate");
        break;
      }
    } else {
      worse_rounds = 0;
    }
    prev_measure = measure;
    current = next;
    if (!keep_going) break;
  }
  return best;
}

SynthesisResult Failed(Method m, const std::string& why) {
  SynthesisResult r;
  r.method = m;
  r.status = SynthesisStatus::kFailed;
  r.diagnostics.push_back(why);
  return r;
}

SynthesisResult RunExponential(const Context& ctx) {
  SynthesisResult r;
  r.method = ctx.o.method;
  int rate = 0, delta = 0;
  const SosProgram prog = ExponentialProgram(ctx, &rate, &delta);
  const SosSolution s = Run(prog, ctx, r);
  const char* name = ctx.stochastic ? "s_qu" : "qu";
  if (!Ok(s)) {
    Record(r, 0, name, s.status, 0, 0, false);
    r.status = SynthesisStatus::kFailed;
    r.diagnostics.push_back(std::string(name) + " failed: " + ToString(s.status));
    return r;
  }
  Candidate c;
  c.valid = true;
  c.c = Coefficients(s, ctx);
  c.delta = std::max(0.0, s.value(delta));
  c.rate = s.value(rate);
  c.norm = ctx.Norm(c.c);
  Record(r, 0, name, s.status, c.delta, c.norm, true);
  Fill(r, ctx, c);
  if (ctx.stochastic) {
    r.h_prime = r.delta <= kDeltaZero ? ctx.p.h
                                      : StochExponentialHPrime(ctx.p.h, *r.rate, r.delta);
  } else {
    r.h_prime = r.delta <= kDeltaZero ? ctx.p.h
                                      : ExponentialHPrime(ctx.p.h, *r.rate, r.delta);
  }
  r.status = ClassifyExponential(r.delta, *r.h_prime, ctx.p);
  if (r.status == SynthesisStatus::kFull) r.h_prime.reset();
  if (r.status == SynthesisStatus::kFailed) {
    r.diagnostics.push_back("tightened set does not meet the target set");
  }
  CertifyExponential(r, ctx);
  return r;
}

SynthesisResult RunAsymptotic(const Context& ctx) {
  SynthesisResult exp_result = RunExponential(ctx);
  SynthesisResult r;
  r.method = ctx.o.method;
  r.first_program_blocks = exp_result.first_program_blocks;
  r.trace = exp_result.trace;
  Candidate seed;
  if (exp_result.delta <= kDeltaZero && exp_result.rate &&
      exp_result.status == SynthesisStatus::kFull) {
    // Case 1: w = h / lambda certifies the exponential controller.
    seed.valid = true;
    seed.c = exp_result.coefficients;
    seed.delta = 0.0;
    seed.norm = exp_result.norm;
    seed.w = ctx.p.h.Scale(1.0 / *exp_result.rate);
  } else {
    // Case 2: start from a safe controller.
    const SosProgram prog = SafeProgram(ctx, ctx.smt, "step_1");
    const SosSolution s = Run(prog, ctx, r);
    if (!Ok(s)) {
      Record(r, 0, "step_1", s.status, 0, 0, false);
      r.status = SynthesisStatus::kFailed;
      r.diagnostics.push_back(std::string("step_1 failed: ") + ToString(s.status));
      return r;
    }
    seed.c = Coefficients(s, ctx);
    seed.norm = ctx.Norm(seed.c);
    Record(r, 0, "step_1", s.status, 0, seed.norm, true);
  }
  const Candidate best = Alternate(ctx, Mode::kAsymptotic, seed, r);
  if (!best.valid) {
    // Safety still holds for the step_1 controller.
    Candidate safe = seed;
    Fill(r, ctx, safe);
    r.delta = std::numeric_limits<double>::infinity();
    r.status = SynthesisStatus::kSafeOnly;
    r.constraints.push_back({"safety", ctx.lie_h.Instantiate(r.coefficients), ctx.smt});
    AddInputConstraints(r.constraints, ctx, r.controller);
    return r;
  }
  Fill(r, ctx, best);
  if (r.delta <= kDeltaZero) {
    r.status = SynthesisStatus::kFull;
  } else {
    r.h_prime = ctx.stochastic ? StochAsymptoticHPrime(ctx.p.h, r.delta)
                               : AsymptoticHPrime(ctx.p.h, r.delta);
    r.status = SampledIntersectionNonempty(*r.h_prime, ctx.p)
                   ? SynthesisStatus::kTightened
                   : SynthesisStatus::kSafeOnly;
  }
  CertifyAlternation(r, ctx, Mode::kAsymptotic);
  return r;
}

SynthesisResult RunLax(const Context& ctx) {
  SynthesisOptions asym_opts = ctx.o;
  asym_opts.method = Method::kAsymptotic;
  const Context asym_ctx(ctx.p, asym_opts);
  const SynthesisResult asym = RunAsymptotic(asym_ctx);
  SynthesisResult r;
  r.method = ctx.o.method;
  r.trace = asym.trace;
  r.first_program_blocks.clear();
  // Both seeds satisfy the band safety condition with beta = 0.
  Candidate seed;
  seed.beta = 0.0;
  if (asym.status == SynthesisStatus::kFull) {
    seed.c = asym.coefficients;
    seed.norm = asym.norm;
  } else {
    const SosProgram prog = SafeProgram(ctx, ctx.band, "im_0");
    const SosSolution s = Run(prog, ctx, r);
    if (!Ok(s)) {
      Record(r, 0, "im_0", s.status, 0, 0, false);
      r.status = SynthesisStatus::kFailed;
      r.diagnostics.push_back(std::string("im_0 failed: ") + ToString(s.status));
      return r;
    }
    seed.c = Coefficients(s, ctx);
    seed.norm = ctx.Norm(seed.c);
    Record(r, 0, "im_0", s.status, 0, seed.norm, true);
  }
  const Candidate best = Alternate(ctx, Mode::kLax, seed, r);
  if (!best.valid) {
    Fill(r, ctx, seed);
    r.delta = std::numeric_limits<double>::infinity();
    r.status = SynthesisStatus::kSafeOnly;
    r.constraints.push_back({"safety_band", ctx.lie_h.Instantiate(r.coefficients), ctx.band});
    AddInputConstraints(r.constraints, ctx, r.controller);
    return r;
  }
  Fill(r, ctx, best);
  r.status = r.delta <= kDeltaZero ? SynthesisStatus::kFull : SynthesisStatus::kSafeOnly;
  CertifyAlternation(r, ctx, Mode::kLax);
  return r;
}

}  // namespace

SynthesisResult SynthExponential(const ReachAvoidProblem& p,
                                 const SynthesisOptions& o) {
  SynthesisOptions opts = o;
  opts.method = Method::kExponential;
  return RunExponential(Context(p, opts));
}

SynthesisResult SynthAsymptotic(const ReachAvoidProblem& p,
                                const SynthesisOptions& o) {
  SynthesisOptions opts = o;
  opts.method = Method::kAsymptotic;
  return RunAsymptotic(Context(p, opts));
}

SynthesisResult SynthLax(const ReachAvoidProblem& p, const SynthesisOptions& o) {
  SynthesisOptions opts = o;
  opts.method = Method::kLax;
  return RunLax(Context(p, opts));
}

SynthesisResult SynthStochExponential(const ReachAvoidProblem& p,
                                      const SynthesisOptions& o) {
  SynthesisOptions opts = o;
  opts.method = Method::kStochExponential;
  return RunExponential(Context(p, opts));
}

SynthesisResult SynthStochAsymptotic(const ReachAvoidProblem& p,
                                     const SynthesisOptions& o) {
  SynthesisOptions opts = o;
  opts.method = Method::kStochAsymptotic;
  return RunAsymptotic(Context(p, opts));
}

SynthesisResult Synthesize(const ReachAvoidProblem& problem,
                           const SynthesisOptions& options) {
  switch (options.method) {
    case Method::kExponential: return SynthExponential(problem, options);
    case Method::kAsymptotic: return SynthAsymptotic(problem, options);
    case Method::kLax: return SynthLax(problem, options);
    case Method::kStochExponential: return SynthStochExponential(problem, options);
    case Method::kStochAsymptotic: return SynthStochAsymptotic(problem, options);
  }
  return Failed(options.method, "unknown method");
}

SosProgram FirstProgram(const ReachAvoidProblem& p, const SynthesisOptions& o) {
  const Context ctx(p, o);
  switch (o.method) {
    case Method::kExponential:
    case Method::kStochExponential: {
      int rate = 0, delta = 0;
      return ExponentialProgram(ctx, &rate, &delta);
    }
    case Method::kAsymptotic:
    case Method::kStochAsymptotic:
      return SafeProgram(ctx, ctx.smt, "step_1");
    case Method::kLax:
      return SafeProgram(ctx, ctx.band, "im_0");
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace reachsynth
