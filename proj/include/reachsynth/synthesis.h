#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reachsynth/problem.h"
#include "reachsynth/sdp.h"
#include "reachsynth/sos.h"

namespace reachsynth {

enum class Method {
  kExponential,
  kAsymptotic,
  kLax,
  kStochExponential,
  kStochAsymptotic,
};

const char* ToString(Method m);
/// Accepts exponential, asymptotic, lax, stoch_exponential, stoch_asymptotic.
std::optional<Method> ParseMethod(const std::string& s);
bool IsStochastic(Method m);

enum class SynthesisStatus { kFull, kTightened, kSafeOnly, kFailed };
const char* ToString(SynthesisStatus s);

struct SynthesisOptions {
  Method method = Method::kExponential;
  double xi0 = 1e-3;
  double eps_prime = 1e-3;
  double eps_star = 1e-3;
  double eps0 = 1e-3;
  double c_penalty = 1e6;
  int mult_degree = 2;
  int w_degree = 4;
  int max_alternations = 20;
  /// Margin for strict inequalities (expr > 0 becomes expr >= eps_strict).
  double eps_strict = 1e-6;
  /// |w_b| <= w_coef_bound for every coefficient of w.
  double w_coef_bound = 1e4;
  /// 0 <= beta <= beta_max in the lax programs.
  double beta_max = 1e3;
  int quadrature_resolution = 201;
  int max_gram_degree = 6;
  SdpOptions sdp;
  /// Called after every SDP the method solves.
  std::function<void(const SosProgram&, const SosSolution&)> on_solve;

  /// Throws std::invalid_argument on out-of-range values.
  void Validate() const;
};

/// One polynomial condition certified by the final program, with the solved
/// parameters substituted; replayed by the grid checks.
struct CertifiedConstraint {
  std::string label;
  Polynomial expression;
  SemialgebraicRegion region;
};

struct IterationRecord {
  int iteration = 0;
  std::string program;
  SdpStatus sdp_status = SdpStatus::kOptimal;
  double delta = 0;
  double norm = 0;
  bool accepted = true;
};

struct SynthesisResult {
  Method method = Method::kExponential;
  SynthesisStatus status = SynthesisStatus::kFailed;
  std::vector<double> coefficients;
  std::vector<Polynomial> controller;
  std::optional<double> rate;  // lambda or alpha
  std::optional<double> beta;
  double delta = 0;
  std::optional<Polynomial> w;
  double norm = 0;
  std::optional<Polynomial> h_prime;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::vector<CertifiedConstraint> constraints;
  std::vector<std::string> diagnostics;
  /// Block sizes of the first program solved (negative = diagonal block).
  std::vector<int> first_program_blocks;
};

/// Deltas at or below this count as zero.
inline constexpr double kDeltaZero = 1e-9;

SynthesisResult Synthesize(const ReachAvoidProblem& problem,
                           const SynthesisOptions& options);

SynthesisResult SynthExponential(const ReachAvoidProblem& p,
                                 const SynthesisOptions& o);
SynthesisResult SynthAsymptotic(const ReachAvoidProblem& p,
                                const SynthesisOptions& o);
SynthesisResult SynthLax(const ReachAvoidProblem& p, const SynthesisOptions& o);
SynthesisResult SynthStochExponential(const ReachAvoidProblem& p,
                                      const SynthesisOptions& o);
SynthesisResult SynthStochAsymptotic(const ReachAvoidProblem& p,
                                     const SynthesisOptions& o);

/// Classification helpers (Propositions for each method).
Polynomial ExponentialHPrime(const Polynomial& h, double lambda, double delta);
Polynomial StochExponentialHPrime(const Polynomial& h, double alpha, double delta);
Polynomial AsymptoticHPrime(const Polynomial& h, double delta);
Polynomial StochAsymptoticHPrime(const Polynomial& h, double delta);

/// Grid sample of {h' > 0} intersected with {h_r < 0}.
bool SampledIntersectionNonempty(const Polynomial& h_prime,
                                 const ReachAvoidProblem& p,
                                 int resolution = 201);

/// Status for an exponential-type result given its tightened h'.
SynthesisStatus ClassifyExponential(double delta, const Polynomial& h_prime,
                                    const ReachAvoidProblem& p);

/// The first program each method solves, for export: `qu` (exponential),
/// `step_1` (asymptotic), `im_0` (lax), `s_qu` (stochastic exponential),
/// stochastic `step_1` (stochastic asymptotic).
SosProgram FirstProgram(const ReachAvoidProblem& p, const SynthesisOptions& o);

}  // namespace reachsynth
