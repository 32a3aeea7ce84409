#pragma once

#include <map>
#include <vector>

#include "reachsynth/polynomial.h"
#include "reachsynth/problem.h"

namespace reachsynth {

/// Polynomial-valued expression affine in a vector of scalar unknowns:
/// constant_part + sum_i c_i * linear_part[i].
struct AffineInCoefficients {
  Polynomial constant_part;
  std::map<int, Polynomial> linear_part;

  explicit AffineInCoefficients(int n_vars = 0) : constant_part(n_vars) {}
  explicit AffineInCoefficients(Polynomial constant)
      : constant_part(std::move(constant)) {}

  int n_vars() const { return constant_part.n_vars(); }
  int degree() const;

  Polynomial Instantiate(const std::vector<double>& coeffs) const;

  AffineInCoefficients operator+(const AffineInCoefficients& other) const;
  AffineInCoefficients operator-(const AffineInCoefficients& other) const;
  AffineInCoefficients Scale(double c) const;
  /// Adds c * p to the coefficient of unknown `index`.
  void AddLinear(int index, const Polynomial& p);
  /// Renumbers unknowns i -> i + offset.
  AffineInCoefficients Shifted(int offset) const;
};

/// L_{v,u} = grad(v) . (f + g u) with u drawn from `tmpl`; the linear part for
/// coefficient (output j, basis b) is (grad(v) . g[:, j]) * b.
AffineInCoefficients LieDerivativeOde(const Polynomial& v,
                                      const AffineControlSystem& sys,
                                      const ControllerTemplate& tmpl);

/// Infinitesimal generator: LieDerivativeOde plus 1/2 tr(sigma^T Hess(v) sigma)
/// in the constant part. Throws if the system has no diffusion term.
AffineInCoefficients GeneratorSde(const Polynomial& v,
                                  const AffineControlSystem& sys,
                                  const ControllerTemplate& tmpl);

/// 1/2 tr(sigma^T Hess(v) sigma).
Polynomial DiffusionTerm(const Polynomial& v, const AffineControlSystem& sys);

/// Generator of v under a fixed controller u (m polynomials). The diffusion
/// term is included iff `with_diffusion` and the system is stochastic.
Polynomial GeneratorFixed(const Polynomial& v, const AffineControlSystem& sys,
                          const std::vector<Polynomial>& u,
                          bool with_diffusion);

/// Closed-loop drift f + g u, one polynomial per state.
std::vector<Polynomial> ClosedLoopDrift(const AffineControlSystem& sys,
                                        const std::vector<Polynomial>& u);

}  // namespace reachsynth
