#include "reachsynth/sdp.h"

#include <random>

#include <gtest/gtest.h>

namespace reachsynth {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SdpBlock Block(int size, bool diagonal) {
  SdpBlock b;
  b.size = size;
  b.diagonal = diagonal;
  b.constant = MatrixXd::Zero(size, size);
  return b;
}

MatrixXd RandomSymmetric(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g;
  MatrixXd a(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) a(i, j) = g(rng);
  }
  return 0.5 * (a + a.transpose());
}

MatrixXd RandomPd(std::mt19937_64& rng, int k) {
  const MatrixXd a = RandomSymmetric(rng, k);
  return a * a.transpose() + 0.5 * MatrixXd::Identity(k, k);
}

// Strictly feasible primal and dual by construction, so an optimum exists.
SdpProblem RandomFeasible(std::mt19937_64& rng, int n_vars, std::vector<int> sizes) {
  SdpProblem p;
  p.n_vars = n_vars;
  p.objective = VectorXd::Zero(n_vars);
  std::normal_distribution<double> g;
  VectorXd y0(n_vars);
  for (int i = 0; i < n_vars; ++i) y0(i) = g(rng);
  for (int k : sizes) {
    SdpBlock b = Block(k, false);
    const MatrixXd x0 = RandomPd(rng, k);
    MatrixXd f = -RandomPd(rng, k);  // becomes -S0
    for (int i = 0; i < n_vars; ++i) {
      const MatrixXd a = RandomSymmetric(rng, k);
      b.terms.emplace_back(i, a);
      p.objective(i) += (a.array() * x0.array()).sum();
      f += y0(i) * a;
    }
    b.constant = f;  // F(y0) = sum y0 A - A0 = S0
    p.blocks.push_back(b);
  }
  return p;
}

TEST(SdpTest, DiagonalLinearProgram) {
  SdpProblem p;
  p.n_vars = 2;
  p.objective = VectorXd::Ones(2);
  SdpBlock b = Block(2, true);
  b.constant.diagonal() << 1.0, 2.0;
  MatrixXd e0 = MatrixXd::Zero(2, 2), e1 = MatrixXd::Zero(2, 2);
  e0(0, 0) = 1;
  e1(1, 1) = 1;
  b.terms = {{0, e0}, {1, e1}};
  p.blocks.push_back(b);
  const auto sol = SolveSdp(p);
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.primal_objective, 3.0, 1e-6);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
  EXPECT_NEAR(sol.y(1), 2.0, 1e-6);
}

TEST(SdpTest, TwoByTwoOffDiagonal) {
  SdpProblem p;
  p.n_vars = 1;
  p.objective = VectorXd::Ones(1);
  SdpBlock b = Block(2, false);
  b.constant << 0, -1, -1, 0;
  b.terms = {{0, MatrixXd::Identity(2, 2)}};
  p.blocks.push_back(b);
  const auto sol = SolveSdp(p);
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-6);
}

TEST(SdpTest, LargestEigenvalueAgreesWithEigensolver) {
  std::mt19937_64 rng(17);
  for (int k : {3, 5, 8}) {
    const MatrixXd m = RandomSymmetric(rng, k);
    SdpProblem p;
    p.n_vars = 1;
    p.objective = VectorXd::Ones(1);
    SdpBlock b = Block(k, false);
    b.constant = m;
    b.terms = {{0, MatrixXd::Identity(k, k)}};
    p.blocks.push_back(b);
    const auto sol = SolveSdp(p);
    ASSERT_EQ(sol.status, SdpStatus::kOptimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    EXPECT_NEAR(sol.y(0), es.eigenvalues()(k - 1), 1e-6);
  }
}

TEST(SdpTest, DetectsInfeasibility) {
  // y >= 1 and y <= 0.
  SdpProblem p;
  p.n_vars = 1;
  p.objective = VectorXd::Ones(1);
  SdpBlock b = Block(2, true);
  b.constant.diagonal() << 1.0, 0.0;
  MatrixXd a = MatrixXd::Zero(2, 2);
  a.diagonal() << 1.0, -1.0;
  b.terms = {{0, a}};
  p.blocks.push_back(b);
  EXPECT_EQ(SolveSdp(p).status, SdpStatus::kInfeasible);
}

TEST(SdpTest, DetectsUnboundedness) {
  // min y0 s.t. y1 - y0 >= 0.
  SdpProblem p;
  p.n_vars = 2;
  p.objective = VectorXd::Zero(2);
  p.objective(0) = 1.0;
  SdpBlock b = Block(1, true);
  b.terms = {{0, MatrixXd::Constant(1, 1, -1.0)}, {1, MatrixXd::Constant(1, 1, 1.0)}};
  p.blocks.push_back(b);
  EXPECT_EQ(SolveSdp(p).status, SdpStatus::kUnbounded);
}

TEST(SdpTest, NoVariables) {
  SdpProblem p;
  p.objective = VectorXd::Zero(0);
  SdpBlock b = Block(2, false);
  b.constant = -MatrixXd::Identity(2, 2);
  p.blocks.push_back(b);
  EXPECT_EQ(SolveSdp(p).status, SdpStatus::kOptimal);
  p.blocks[0].constant(0, 0) = 1.0;
  EXPECT_EQ(SolveSdp(p).status, SdpStatus::kInfeasible);
}

TEST(SdpTest, RandomProblemsSatisfyOptimalityConditions) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 8; ++trial) {
    const SdpProblem p = RandomFeasible(rng, 4 + trial, {3, 4, 2});
    SdpOptions opt;
    opt.trace = true;
    const auto sol = SolveSdp(p, opt);
    ASSERT_EQ(sol.status, SdpStatus::kOptimal) << "trial " << trial;
    EXPECT_LE(sol.duality_gap, 1e-7);
    for (std::size_t k = 0; k < p.blocks.size(); ++k) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> fs(p.BlockValue(k, sol.y));
      EXPECT_GE(fs.eigenvalues()(0), -1e-6);
      Eigen::SelfAdjointEigenSolver<MatrixXd> xs(sol.dual[k]);
      EXPECT_GE(xs.eigenvalues()(0), -1e-9);
    }
    EXPECT_LE(sol.max_constraint_violation, 1e-5);
    // Weak duality on iterates that are feasible to working precision.
    for (const auto& it : sol.trace) {
      if (it.primal_infeasibility <= 1e-8 && it.dual_infeasibility <= 1e-8) {
        EXPECT_GE(it.primal_objective - it.dual_objective,
                  -1e-7 * (1 + std::abs(it.primal_objective)));
      }
    }
  }
}

TEST(SdpTest, Deterministic) {
  std::mt19937_64 rng(5);
  const SdpProblem p = RandomFeasible(rng, 6, {4, 3});
  const auto a = SolveSdp(p);
  const auto b = SolveSdp(p);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.y, b.y);
}

TEST(SdpaTest, RoundTrip) {
  std::mt19937_64 rng(9);
  SdpProblem p = RandomFeasible(rng, 3, {3, 2});
  SdpBlock d = Block(2, true);
  d.constant.diagonal() << -1.0, 0.5;
  MatrixXd a = MatrixXd::Zero(2, 2);
  a.diagonal() << 1.0 / 3.0, 0.0;
  d.terms = {{1, a}};
  p.blocks.push_back(d);
  const std::string text = FormatSdpa(p);
  const SdpProblem q = ParseSdpa(text);
  ASSERT_EQ(q.n_vars, p.n_vars);
  ASSERT_EQ(q.blocks.size(), p.blocks.size());
  EXPECT_EQ(q.objective, p.objective);
  EXPECT_TRUE(q.blocks[2].diagonal);
  for (std::size_t k = 0; k < p.blocks.size(); ++k) {
    EXPECT_EQ(q.blocks[k].constant, p.blocks[k].constant);
    ASSERT_EQ(q.blocks[k].terms.size(), p.blocks[k].terms.size());
    for (std::size_t t = 0; t < p.blocks[k].terms.size(); ++t) {
      EXPECT_EQ(q.blocks[k].terms[t].first, p.blocks[k].terms[t].first);
      EXPECT_EQ(q.blocks[k].terms[t].second, p.blocks[k].terms[t].second);
    }
  }
  EXPECT_EQ(FormatSdpa(q), text);
}

TEST(SdpaTest, RejectsLowerTriangleWithLineNumber) {
  const std::string text = "1\n1\n2\n1.0\n0 1 1 1 1.0\n1 1 2 1 0.5\n";
  try {
    ParseSdpa(text);
    FAIL() << "expected error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 6"), std::string::npos);
  }
}

}  // namespace
}  // namespace reachsynth
