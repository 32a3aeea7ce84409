#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace reachsynth {

/// Exponent vector of a single monomial x_0^e_0 * ... * x_{n-1}^e_{n-1}.
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(int n_vars) : exponents_(n_vars, 0) {}
  explicit Monomial(std::vector<int> exponents);

  static Monomial Variable(int n_vars, int index, int power = 1);

  int n_vars() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  int exponent(int i) const { return exponents_[i]; }
  const std::vector<int>& exponents() const { return exponents_; }

  Monomial operator*(const Monomial& other) const;

  /// Graded lexicographic order: lower total degree first, then x_0 before
  /// x_1 within a degree (so the degree-1 block reads x, y, ...).
  bool operator<(const Monomial& other) const;
  bool operator==(const Monomial& other) const {
    return exponents_ == other.exponents_;
  }

  std::string ToString(const std::vector<std::string>& names) const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// All monomials of total degree <= max_degree in graded-lex order.
std::vector<Monomial> MonomialBasis(int n_vars, int max_degree);

/// Sparse multivariate polynomial with double coefficients. Terms with
/// |c| < kPruneThreshold are dropped after every arithmetic operation.
class Polynomial {
 public:
  static constexpr double kPruneThreshold = 1e-14;
  using TermMap = std::map<Monomial, double>;

  Polynomial() = default;
  explicit Polynomial(int n_vars) : n_vars_(n_vars) {}
  Polynomial(int n_vars, TermMap terms);

  static Polynomial Constant(int n_vars, double c);
  static Polynomial Variable(int n_vars, int index);
  static Polynomial FromMonomial(const Monomial& m, double c = 1.0);

  int n_vars() const { return n_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  double coefficient(const Monomial& m) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator-() const { return Scale(-1.0); }
  Polynomial Scale(double c) const;
  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);

  /// Adds c * m in place (pruned).
  void AddTerm(const Monomial& m, double c);

  Polynomial Differentiate(int var_index) const;
  std::vector<Polynomial> Gradient() const;
  /// Symmetric n x n matrix of second partials, stored row-major.
  std::vector<std::vector<Polynomial>> Hessian() const;

  double Evaluate(std::span<const double> point) const;

  /// Printable form accepted back by ParsePolynomial.
  std::string ToString(const std::vector<std::string>& names) const;

  bool operator==(const Polynomial& other) const {
    return n_vars_ == other.n_vars_ && terms_ == other.terms_;
  }

 private:
  void CheckSameRing(const Polynomial& other) const;
  void Prune();

  int n_vars_ = 0;
  TermMap terms_;
};

inline Polynomial operator*(double c, const Polynomial& p) {
  return p.Scale(c);
}

/// Default variable names x0, x1, ... (or x, y, z for n <= 3).
std::vector<std::string> DefaultVariableNames(int n_vars);

/// Flat, allocation-free evaluator for hot loops (grids, simulation).
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);

  int n_vars() const { return n_vars_; }
  int max_power() const { return max_power_; }
  double operator()(std::span<const double> point) const;
  /// Evaluates against a power table with powers[v*stride+k] = x_v^k and
  /// stride > max_power(); no allocation.
  double EvaluateWithPowers(const double* powers, int stride) const;

 private:
  int n_vars_ = 0;
  int max_power_ = 0;
  std::vector<double> coefficients_;
  std::vector<int> exponents_;  // term-major, n_vars_ per term
};

/// Fills powers[v*(max_power+1)+k] = x_v^k (stride max_power+1).
void FillPowerTable(std::span<const double> point, int max_power,
                    std::vector<double>& powers);

}  // namespace reachsynth
