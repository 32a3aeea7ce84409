#include "reachsynth/polynomial.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "reachsynth/problem.h"

namespace reachsynth {
namespace {

const std::vector<std::string> kXY = {"x", "y"};

Polynomial P(const std::string& text) { return ParsePolynomial(text, kXY); }

Polynomial RandomPolynomial(std::mt19937_64& rng, int n, int degree) {
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::bernoulli_distribution keep(0.6);
  Polynomial p(n);
  for (const auto& m : MonomialBasis(n, degree)) {
    if (keep(rng)) p.AddTerm(m, coef(rng));
  }
  return p;
}

long Binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

TEST(MonomialTest, BasisOrderAndSize) {
  const auto b = MonomialBasis(2, 1);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0], Monomial(std::vector<int>{0, 0}));
  EXPECT_EQ(b[1], Monomial(std::vector<int>{1, 0}));
  EXPECT_EQ(b[2], Monomial(std::vector<int>{0, 1}));
  const auto b2 = MonomialBasis(2, 2);
  EXPECT_EQ(b2[3], Monomial(std::vector<int>{2, 0}));
  EXPECT_EQ(b2[4], Monomial(std::vector<int>{1, 1}));
  EXPECT_EQ(b2[5], Monomial(std::vector<int>{0, 2}));
  for (int n = 1; n <= 4; ++n) {
    for (int d = 0; d <= 5; ++d) {
      const auto basis = MonomialBasis(n, d);
      EXPECT_EQ(static_cast<long>(basis.size()), Binomial(n + d, d));
      for (std::size_t i = 1; i < basis.size(); ++i) {
        EXPECT_TRUE(basis[i - 1] < basis[i]);
      }
    }
  }
}

TEST(MonomialTest, RejectsNegativeExponent) {
  EXPECT_THROW(Monomial(std::vector<int>{1, -1}), std::invalid_argument);
}

TEST(PolynomialTest, EvaluateMatchesClosedForm) {
  const Polynomial p = P("1 - x^2 - y^2 + 3*x*y^3");
  for (double x : {-1.3, 0.0, 0.4}) {
    for (double y : {-0.7, 0.25, 2.0}) {
      const double expected = 1 - x * x - y * y + 3 * x * y * y * y;
      const double pt[] = {x, y};
      EXPECT_NEAR(p.Evaluate(pt), expected, 1e-12);
      EXPECT_NEAR(CompiledPolynomial(p)(pt), expected, 1e-12);
    }
  }
}

TEST(PolynomialTest, ArithmeticAgreesPointwise) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial a = RandomPolynomial(rng, 3, 3);
    const Polynomial b = RandomPolynomial(rng, 3, 2);
    const double pt[] = {u(rng), u(rng), u(rng)};
    const double av = a.Evaluate(pt), bv = b.Evaluate(pt);
    EXPECT_NEAR((a + b).Evaluate(pt), av + bv, 1e-10);
    EXPECT_NEAR((a - b).Evaluate(pt), av - bv, 1e-10);
    EXPECT_NEAR((a * b).Evaluate(pt), av * bv, 1e-9);
    EXPECT_NEAR(a.Scale(-2.5).Evaluate(pt), -2.5 * av, 1e-10);
    EXPECT_LE((a * b).degree(), a.degree() + b.degree());
  }
}

TEST(PolynomialTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial p = RandomPolynomial(rng, 2, 4);
    const auto grad = p.Gradient();
    const auto hess = p.Hessian();
    double pt[] = {u(rng), u(rng)};
    const double h = 1e-5;
    for (int i = 0; i < 2; ++i) {
      double plus[] = {pt[0], pt[1]}, minus[] = {pt[0], pt[1]};
      plus[i] += h;
      minus[i] -= h;
      const double fd = (p.Evaluate(plus) - p.Evaluate(minus)) / (2 * h);
      EXPECT_NEAR(grad[i].Evaluate(pt), fd, 1e-6);
      for (int j = 0; j < 2; ++j) {
        const double fd2 =
            (grad[j].Evaluate(plus) - grad[j].Evaluate(minus)) / (2 * h);
        EXPECT_NEAR(hess[i][j].Evaluate(pt), fd2, 1e-6);
      }
    }
    EXPECT_EQ(hess[0][1], hess[1][0]);
  }
}

TEST(PolynomialTest, PrunesTinyCoefficients) {
  Polynomial p = P("x + y");
  p.AddTerm(Monomial::Variable(2, 0), -1.0 + 1e-15);
  EXPECT_EQ(p.terms().size(), 1u);
  EXPECT_TRUE((P("x") - P("x")).is_zero());
  EXPECT_EQ((P("x") - P("x")).degree(), 0);
}

TEST(PolynomialTest, RingMismatchThrows) {
  EXPECT_THROW(Polynomial::Variable(2, 0) + Polynomial::Variable(3, 0),
               std::invalid_argument);
  EXPECT_THROW(Polynomial::Variable(2, 2), std::out_of_range);
}

TEST(PolynomialTest, ToStringRoundTrips) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Polynomial p = RandomPolynomial(rng, 2, 4);
    const Polynomial q = ParsePolynomial(p.ToString(kXY), kXY);
    ASSERT_EQ(p.terms().size(), q.terms().size()) << p.ToString(kXY);
    for (const auto& [m, c] : p.terms()) {
      EXPECT_DOUBLE_EQ(q.coefficient(m), c);
    }
  }
  EXPECT_EQ(Polynomial(2).ToString(kXY), "0");
}

TEST(CompiledPolynomialTest, PowerTableEvaluation) {
  std::mt19937_64 rng(5);
  const Polynomial p = RandomPolynomial(rng, 3, 5);
  const CompiledPolynomial cp(p);
  std::vector<double> powers;
  const double pt[] = {0.3, -1.1, 0.8};
  FillPowerTable(pt, 6, powers);
  EXPECT_NEAR(cp.EvaluateWithPowers(powers.data(), 7), p.Evaluate(pt), 1e-12);
}

}  // namespace
}  // namespace reachsynth
