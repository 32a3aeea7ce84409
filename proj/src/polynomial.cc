#include "reachsynth/polynomial.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace reachsynth {

Monomial::Monomial(std::vector<int> exponents)
    : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("negative monomial exponent");
  }
  degree_ = std::accumulate(exponents_.begin(), exponents_.end(), 0);
}

Monomial Monomial::Variable(int n_vars, int index, int power) {
  if (index < 0 || index >= n_vars) {
    throw std::out_of_range("variable index out of range");
  }
  std::vector<int> e(n_vars, 0);
  e[index] = power;
  return Monomial(std::move(e));
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (n_vars() != other.n_vars()) {
    throw std::invalid_argument("monomial variable-count mismatch");
  }
  std::vector<int> e(exponents_);
  for (int i = 0; i < n_vars(); ++i) e[i] += other.exponents_[i];
  return Monomial(std::move(e));
}

bool Monomial::operator<(const Monomial& other) const {
  if (degree_ != other.degree_) return degree_ < other.degree_;
  // Larger leading exponent sorts first within a degree.
  return exponents_ > other.exponents_;
}

std::string Monomial::ToString(const std::vector<std::string>& names) const {
  std::string out;
  for (int i = 0; i < n_vars(); ++i) {
    if (exponents_[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += names.at(i);
    if (exponents_[i] > 1) out += "^" + std::to_string(exponents_[i]);
  }
  return out.empty() ? "1" : out;
}

namespace {

void EnumerateDegree(int n_vars, int var, int remaining, std::vector<int>& e,
                     std::vector<Monomial>& out) {
  if (var == n_vars - 1) {
    e[var] = remaining;
    out.emplace_back(e);
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    e[var] = k;
    EnumerateDegree(n_vars, var + 1, remaining - k, e, out);
  }
  e[var] = 0;
}

}  // namespace

std::vector<Monomial> MonomialBasis(int n_vars, int max_degree) {
  if (n_vars < 1 || max_degree < 0) {
    throw std::invalid_argument("MonomialBasis: need n_vars >= 1, degree >= 0");
  }
  std::vector<Monomial> out;
  std::vector<int> e(n_vars, 0);
  for (int d = 0; d <= max_degree; ++d) EnumerateDegree(n_vars, 0, d, e, out);
  return out;
}

Polynomial::Polynomial(int n_vars, TermMap terms)
    : n_vars_(n_vars), terms_(std::move(terms)) {
  for (const auto& [m, c] : terms_) {
    if (m.n_vars() != n_vars_) {
      throw std::invalid_argument("monomial length differs from n_vars");
    }
  }
  Prune();
}

Polynomial Polynomial::Constant(int n_vars, double c) {
  Polynomial p(n_vars);
  p.AddTerm(Monomial(n_vars), c);
  return p;
}

Polynomial Polynomial::Variable(int n_vars, int index) {
  return FromMonomial(Monomial::Variable(n_vars, index), 1.0);
}

Polynomial Polynomial::FromMonomial(const Monomial& m, double c) {
  Polynomial p(m.n_vars());
  p.AddTerm(m, c);
  return p;
}

int Polynomial::degree() const {
  // Map is graded, so the last key has maximal degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::CheckSameRing(const Polynomial& other) const {
  if (n_vars_ != other.n_vars_) {
    throw std::invalid_argument("polynomial variable-count mismatch: " +
                                std::to_string(n_vars_) + " vs " +
                                std::to_string(other.n_vars_));
  }
}

void Polynomial::Prune() {
  std::erase_if(terms_, [](const auto& kv) {
    return std::abs(kv.second) < kPruneThreshold;
  });
}

void Polynomial::AddTerm(const Monomial& m, double c) {
  if (m.n_vars() != n_vars_) {
    throw std::invalid_argument("polynomial variable-count mismatch");
  }
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kPruneThreshold) terms_.erase(it);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  CheckSameRing(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  CheckSameRing(other);
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  Polynomial r(*this);
  r += other;
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  Polynomial r(*this);
  r -= other;
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  CheckSameRing(other);
  Polynomial r(n_vars_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : other.terms_) {
      auto [it, inserted] = r.terms_.try_emplace(ma * mb, ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  r.Prune();
  return r;
}

Polynomial Polynomial::Scale(double c) const {
  Polynomial r(n_vars_);
  for (const auto& [m, v] : terms_) r.AddTerm(m, c * v);
  return r;
}

Polynomial Polynomial::Differentiate(int var_index) const {
  if (var_index < 0 || var_index >= n_vars_) {
    throw std::out_of_range("Differentiate: variable index " +
                            std::to_string(var_index) + " out of range");
  }
  Polynomial r(n_vars_);
  for (const auto& [m, c] : terms_) {
    const int e = m.exponent(var_index);
    if (e == 0) continue;
    std::vector<int> exps = m.exponents();
    exps[var_index] -= 1;
    r.AddTerm(Monomial(std::move(exps)), c * e);
  }
  return r;
}

std::vector<Polynomial> Polynomial::Gradient() const {
  std::vector<Polynomial> g;
  g.reserve(n_vars_);
  for (int i = 0; i < n_vars_; ++i) g.push_back(Differentiate(i));
  return g;
}

std::vector<std::vector<Polynomial>> Polynomial::Hessian() const {
  const auto grad = Gradient();
  std::vector<std::vector<Polynomial>> hess(n_vars_,
                                            std::vector<Polynomial>(n_vars_));
  for (int i = 0; i < n_vars_; ++i) {
    for (int j = i; j < n_vars_; ++j) {
      hess[i][j] = grad[i].Differentiate(j);
      hess[j][i] = hess[i][j];
    }
  }
  return hess;
}

double Polynomial::Evaluate(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != n_vars_) {
    throw std::invalid_argument("Evaluate: point has " +
                                std::to_string(point.size()) +
                                " entries, expected " + std::to_string(n_vars_));
  }
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c;
    for (int i = 0; i < n_vars_; ++i) {
      for (int k = 0; k < m.exponent(i); ++k) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

std::string Polynomial::ToString(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os << std::setprecision(17);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    const bool neg = c < 0;
    const double mag = std::abs(c);
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    first = false;
    if (m.degree() == 0) {
      os << mag;
    } else if (mag == 1.0) {
      os << m.ToString(names);
    } else {
      os << mag << "*" << m.ToString(names);
    }
  }
  return os.str();
}

std::vector<std::string> DefaultVariableNames(int n_vars) {
  if (n_vars <= 3) {
    static const char* kNames[] = {"x", "y", "z"};
    return {kNames, kNames + n_vars};
  }
  std::vector<std::string> names;
  for (int i = 0; i < n_vars; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p)
    : n_vars_(p.n_vars()) {
  for (const auto& [m, c] : p.terms()) {
    coefficients_.push_back(c);
    for (int e : m.exponents()) {
      exponents_.push_back(e);
      max_power_ = std::max(max_power_, e);
    }
  }
}

double CompiledPolynomial::EvaluateWithPowers(const double* powers,
                                              int stride) const {
  double sum = 0.0;
  const int* e = exponents_.data();
  for (double c : coefficients_) {
    double term = c;
    for (int v = 0; v < n_vars_; ++v) term *= powers[v * stride + e[v]];
    sum += term;
    e += n_vars_;
  }
  return sum;
}

double CompiledPolynomial::operator()(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != n_vars_) {
    throw std::invalid_argument("CompiledPolynomial: dimension mismatch");
  }
  std::vector<double> powers;
  FillPowerTable(point, max_power_, powers);
  return EvaluateWithPowers(powers.data(), max_power_ + 1);
}

void FillPowerTable(std::span<const double> point, int max_power,
                    std::vector<double>& powers) {
  const int stride = max_power + 1;
  powers.resize(point.size() * stride);
  for (std::size_t v = 0; v < point.size(); ++v) {
    double* row = powers.data() + v * stride;
    row[0] = 1.0;
    for (int k = 1; k <= max_power; ++k) row[k] = row[k - 1] * point[v];
  }
}

}  // namespace reachsynth
