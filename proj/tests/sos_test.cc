#include "reachsynth/sos.h"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "reachsynth/grid.h"
#include "reachsynth/kernels.h"

namespace reachsynth {
namespace {

const std::vector<std::string> kX = {"x"};
const std::vector<std::string> kXY = {"x", "y"};

Polynomial P1(const std::string& s) { return ParsePolynomial(s, kX); }
Polynomial P2(const std::string& s) { return ParsePolynomial(s, kXY); }

TEST(SosProgramTest, ExplicitSquareIsFeasible) {
  SosProgram prog(1);
  prog.AddNonnegative(AffineInCoefficients(P1("1 + x^2")), {}, "sq");
  const auto sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  ASSERT_EQ(sol.certificates.size(), 1u);
  const auto& q = sol.certificates[0].gram;
  ASSERT_EQ(q.rows(), 2);
  EXPECT_NEAR(q(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(q(1, 1), 1.0, 1e-6);
  EXPECT_NEAR(q(0, 1), 0.0, 1e-6);
}

TEST(SosProgramTest, MultiplierCertifiesHalfLine) {
  SosProgram prog(1, /*mult_degree=*/0);
  prog.AddNonnegative(AffineInCoefficients(P1("x")), {{P1("x")}}, "x>=0");
  const auto sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  const auto& cert = sol.certificates[0];
  ASSERT_EQ(cert.multipliers.size(), 1u);
  EXPECT_NEAR(cert.multipliers[0].coefficient(Monomial(1)), 1.0, 1e-6);
}

TEST(SosProgramTest, NegativeConstantIsInfeasible) {
  SosProgram prog(2);
  prog.AddNonnegative(AffineInCoefficients(P2("-1")), {}, "neg");
  EXPECT_EQ(prog.Solve().status, SdpStatus::kInfeasible);
}

TEST(SosProgramTest, MinimizesUnivariateBound) {
  // min t s.t. x^2 - 2x + t >= 0 for all x  ->  t = 1.
  SosProgram prog(1);
  const int t = prog.NewVariable("t");
  AffineInCoefficients e(P1("x^2 - 2*x"));
  e.AddLinear(t, P1("1"));
  prog.AddNonnegative(e, {}, "bound");
  prog.AddLinearCost(t, 1.0);
  const auto sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.value(t), 1.0, 1e-6);
  EXPECT_NEAR(sol.objective, 1.0, 1e-6);
}

TEST(SosProgramTest, RegionRestrictsTheBound) {
  // min t s.t. t - x >= 0 on [-1, 1]  ->  t = 1; unrestricted it is unbounded.
  SosProgram prog(1);
  const int t = prog.NewVariable("t");
  AffineInCoefficients e(P1("-x"));
  e.AddLinear(t, P1("1"));
  prog.AddNonnegative(e, {{P1("1 - x^2")}}, "box");
  prog.AddLinearCost(t, 1.0);
  const auto sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.value(t), 1.0, 1e-5);

  SosProgram free_prog(1);
  const int t2 = free_prog.NewVariable("t");
  AffineInCoefficients e2(P1("-x"));
  e2.AddLinear(t2, P1("1"));
  free_prog.AddNonnegative(e2, {}, "line");
  free_prog.AddLinearCost(t2, 1.0);
  EXPECT_EQ(free_prog.Solve().status, SdpStatus::kInfeasible);
}

TEST(SosProgramTest, CertificatesHoldOnGrid) {
  // min t s.t. t + x*y >= 0 on the unit disc  ->  t = 1/2.
  SosProgram prog(2);
  const int t = prog.NewVariable("t");
  AffineInCoefficients e(P2("x*y"));
  e.AddLinear(t, P2("1"));
  const SemialgebraicRegion disc{{P2("1 - x^2 - y^2")}};
  prog.AddNonnegative(e, disc, "disc");
  prog.AddLinearCost(t, 1.0);
  const auto sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.value(t), 0.5, 1e-5);
  const auto& cert = sol.certificates[0];
  EXPECT_GE(cert.MinGramEigenvalue(), -1e-8);
  const BoxGrid grid({{-1, 1}, {-1, 1}}, 201, BoxGrid::Kind::kVertex);
  const auto res = RegionMinimumSerial(grid, CompiledPolynomial(cert.Residual()),
                                       {CompiledPolynomial(disc.generators[0])});
  EXPECT_GE(res.value, -1e-6);
}

TEST(SosProgramTest, AddingGeneratorsOnlyHelps) {
  // 1 - x^2 >= 0 fails on R but holds on [-1, 1].
  SosProgram whole(1);
  whole.AddNonnegative(AffineInCoefficients(P1("1 - x^2")), {}, "r");
  EXPECT_EQ(whole.Solve().status, SdpStatus::kInfeasible);
  SosProgram box(1);
  box.AddNonnegative(AffineInCoefficients(P1("1 - x^2")), {{P1("1 - x^2")}}, "b");
  EXPECT_EQ(box.Solve().status, SdpStatus::kOptimal);
}

TEST(SosProgramTest, DegreeCapEnforced) {
  SosProgram prog(1, 2, /*max_gram_degree=*/2);
  prog.AddNonnegative(AffineInCoefficients(P1("x^6 + 1")), {}, "big");
  EXPECT_THROW(prog.Lower(), std::invalid_argument);
}

TEST(SosProgramTest, LoweringIsDeterministic) {
  auto build = [] {
    SosProgram prog(2);
    const int t = prog.NewVariable("t");
    AffineInCoefficients e(P2("x*y + x^3"));
    e.AddLinear(t, P2("1 + y^2"));
    prog.AddNonnegative(e, {{P2("1 - x^2 - y^2"), P2("x")}}, "c");
    prog.AddLowerBound(t, 0.0);
    prog.AddLinearCost(t, 1.0);
    return FormatSdpa(prog.Lower().sdp);
  };
  EXPECT_EQ(build(), build());
}

TEST(MomentObjectiveTest, UnitDiscMoments) {
  const ControllerTemplate tmpl(2, 2, 1);
  const std::vector<Polynomial> k = {Polynomial(2), Polynomial(2)};
  const auto q = MomentObjective(tmpl, k, P2("1 - x^2 - y^2"),
                                 {{-1.5, 1.5}, {-1.5, 1.5}}, 401);
  const double pi = std::numbers::pi;
  EXPECT_NEAR(q.channel_gram(0, 0), pi, 0.005 * pi);
  EXPECT_NEAR(q.channel_gram(1, 1), pi / 4, 0.005 * pi / 4);
  EXPECT_NEAR(q.channel_gram(2, 2), pi / 4, 0.005 * pi / 4);
  EXPECT_NEAR(q.channel_gram(0, 1), 0.0, 1e-9);
  EXPECT_NEAR(q.channel_gram(1, 2), 0.0, 1e-9);
  EXPECT_EQ(q.constant, 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.channel_gram);
  EXPECT_GE(es.eigenvalues()(0), -1e-10);
}

TEST(MomentObjectiveTest, VanishesAtNominal) {
  const ControllerTemplate tmpl(2, 2, 1);
  const std::vector<double> c0 = {0.3, -1.0, 0.5, 2.0, 0.25, -0.75};
  const auto k = tmpl.Instantiate(c0);
  const auto q = MomentObjective(tmpl, k, P2("1 - x^2 - y^2"),
                                 {{-1.5, 1.5}, {-1.5, 1.5}}, 201);
  EXPECT_LE(std::abs(q.Evaluate(c0)), 1e-9);
  EXPECT_GT(q.Evaluate(std::vector<double>(6, 0.0)), 0.1);
}

TEST(MomentObjectiveTest, EmptyRegionThrows) {
  const ControllerTemplate tmpl(2, 1, 0);
  EXPECT_THROW(MomentObjective(tmpl, {Polynomial(2)}, P2("-1 - x^2"),
                               {{-1, 1}, {-1, 1}}, 51),
               std::domain_error);
}

TEST(KernelTest, ParallelMatchesSerialBitwise) {
  const BoxGrid grid({{-1.5, 1.5}, {-1.5, 1.5}}, 151, BoxGrid::Kind::kMidpoint);
  const CompiledPolynomial w(P2("1 - x^2 - y^2"));
  std::vector<CompiledPolynomial> phi;
  for (const auto& m : MonomialBasis(2, 2)) phi.emplace_back(Polynomial::FromMonomial(m));
  EXPECT_EQ(MaskedGramSerial(grid, w, phi), MaskedGramParallel(grid, w, phi));
  const CompiledPolynomial e(P2("x*y - 0.3*x"));
  const auto a = RegionMinimumSerial(grid, e, {w});
  const auto b = RegionMinimumParallel(grid, e, {w});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.argmin, b.argmin);
  EXPECT_EQ(a.points, b.points);
}

}  // namespace
}  // namespace reachsynth
