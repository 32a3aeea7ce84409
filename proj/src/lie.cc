#include "reachsynth/lie.h"

#include <algorithm>
#include <stdexcept>

namespace reachsynth {

int AffineInCoefficients::degree() const {
  int d = constant_part.degree();
  for (const auto& [i, p] : linear_part) d = std::max(d, p.degree());
  return d;
}

Polynomial AffineInCoefficients::Instantiate(
    const std::vector<double>& coeffs) const {
  Polynomial r = constant_part;
  for (const auto& [i, p] : linear_part) {
    if (i < 0 || i >= static_cast<int>(coeffs.size())) {
      throw std::out_of_range("AffineInCoefficients: coefficient index " +
                              std::to_string(i) + " out of range");
    }
    r += p.Scale(coeffs[i]);
  }
  return r;
}

void AffineInCoefficients::AddLinear(int index, const Polynomial& p) {
  if (p.is_zero()) return;
  auto [it, inserted] = linear_part.try_emplace(index, p);
  if (!inserted) {
    it->second += p;
    if (it->second.is_zero()) linear_part.erase(it);
  }
}

AffineInCoefficients AffineInCoefficients::operator+(
    const AffineInCoefficients& other) const {
  AffineInCoefficients r(*this);
  r.constant_part += other.constant_part;
  for (const auto& [i, p] : other.linear_part) r.AddLinear(i, p);
  return r;
}

AffineInCoefficients AffineInCoefficients::operator-(
    const AffineInCoefficients& other) const {
  return *this + other.Scale(-1.0);
}

AffineInCoefficients AffineInCoefficients::Scale(double c) const {
  AffineInCoefficients r(constant_part.Scale(c));
  for (const auto& [i, p] : linear_part) r.AddLinear(i, p.Scale(c));
  return r;
}

AffineInCoefficients AffineInCoefficients::Shifted(int offset) const {
  AffineInCoefficients r(constant_part);
  for (const auto& [i, p] : linear_part) r.linear_part.emplace(i + offset, p);
  return r;
}

namespace {

void CheckSystem(const Polynomial& v, const AffineControlSystem& sys) {
  if (v.n_vars() != sys.n || static_cast<int>(sys.f.size()) != sys.n ||
      static_cast<int>(sys.g.size()) != sys.n) {
    throw std::invalid_argument("Lie derivative: dimension mismatch");
  }
  for (const auto& row : sys.g) {
    if (static_cast<int>(row.size()) != sys.m) {
      throw std::invalid_argument("Lie derivative: g has wrong column count");
    }
  }
}

}  // namespace

AffineInCoefficients LieDerivativeOde(const Polynomial& v,
                                      const AffineControlSystem& sys,
                                      const ControllerTemplate& tmpl) {
  CheckSystem(v, sys);
  if (tmpl.n_vars() != sys.n || tmpl.n_outputs() != sys.m) {
    throw std::invalid_argument("Lie derivative: template shape mismatch");
  }
  const auto grad = v.Gradient();
  AffineInCoefficients out(sys.n);
  for (int i = 0; i < sys.n; ++i) out.constant_part += grad[i] * sys.f[i];
  for (int j = 0; j < sys.m; ++j) {
    Polynomial dv_gj(sys.n);
    for (int i = 0; i < sys.n; ++i) dv_gj += grad[i] * sys.g[i][j];
    if (dv_gj.is_zero()) continue;
    for (int b = 0; b < tmpl.basis_size(); ++b) {
      out.AddLinear(tmpl.index(j, b),
                    dv_gj * Polynomial::FromMonomial(tmpl.basis()[b]));
    }
  }
  return out;
}

Polynomial DiffusionTerm(const Polynomial& v, const AffineControlSystem& sys) {
  if (!sys.sigma) throw std::invalid_argument("system has no diffusion term");
  const auto& sigma = *sys.sigma;
  const auto hess = v.Hessian();
  Polynomial acc(sys.n);
  const int k = sys.noise_dim();
  // tr(sigma^T H sigma) = sum_c sum_{a,b} sigma[a][c] H[a][b] sigma[b][c]
  for (int c = 0; c < k; ++c) {
    for (int a = 0; a < sys.n; ++a) {
      if (sigma[a][c].is_zero()) continue;
      for (int b = 0; b < sys.n; ++b) {
        if (sigma[b][c].is_zero() || hess[a][b].is_zero()) continue;
        acc += sigma[a][c] * hess[a][b] * sigma[b][c];
      }
    }
  }
  return acc.Scale(0.5);
}

AffineInCoefficients GeneratorSde(const Polynomial& v,
                                  const AffineControlSystem& sys,
                                  const ControllerTemplate& tmpl) {
  if (!sys.sigma) {
    throw std::invalid_argument("GeneratorSde: system has no sigma");
  }
  AffineInCoefficients out = LieDerivativeOde(v, sys, tmpl);
  out.constant_part += DiffusionTerm(v, sys);
  return out;
}

std::vector<Polynomial> ClosedLoopDrift(const AffineControlSystem& sys,
                                        const std::vector<Polynomial>& u) {
  if (static_cast<int>(u.size()) != sys.m) {
    throw std::invalid_argument("ClosedLoopDrift: controller has wrong size");
  }
  std::vector<Polynomial> drift = sys.f;
  for (int i = 0; i < sys.n; ++i) {
    for (int j = 0; j < sys.m; ++j) drift[i] += sys.g[i][j] * u[j];
  }
  return drift;
}

Polynomial GeneratorFixed(const Polynomial& v, const AffineControlSystem& sys,
                          const std::vector<Polynomial>& u,
                          bool with_diffusion) {
  CheckSystem(v, sys);
  const auto grad = v.Gradient();
  const auto drift = ClosedLoopDrift(sys, u);
  Polynomial out(sys.n);
  for (int i = 0; i < sys.n; ++i) out += grad[i] * drift[i];
  if (with_diffusion && sys.stochastic()) out += DiffusionTerm(v, sys);
  return out;
}

}  // namespace reachsynth
