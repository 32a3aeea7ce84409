#include "reachsynth/validate.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "reachsynth/lie.h"

namespace reachsynth {
namespace {

const std::vector<std::string> kXY = {"x", "y"};

Polynomial P(const std::string& s) { return ParsePolynomial(s, kXY); }

ReachAvoidProblem Load(const std::string& name) {
  return LoadProblem(std::string(REACHSYNTH_PROBLEM_DIR) + "/" + name);
}

// dx = dW on the unit disc; the target sits off the x axis so paths started
// on it exit through the symmetric interval |x| = 1.
ReachAvoidProblem MartingaleProblem() {
  return ParseProblem(R"(
[system]
vars = x y
inputs = u1
f = "0", "0"
g = [ "0" ; "0" ]
sigma = [ "1" ; "0" ]

[sets]
safe_h = "1 - x^2 - y^2"
target_hr = "x^2 + (y - 0.9)^2 - 0.0001"
bounding_box = [-1.5, 1.5] x [-1.5, 1.5]

[inputs]
u1 = free

[nominal]
k = "0"

[template]
degree = 1
)");
}

TEST(GridCheckTest, ExampleOneLaxConditions) {
  const auto p = Load("ex1.ra");
  const std::vector<Polynomial> u = {P("0")};
  const Polynomial w = P("-(x - 0.3)^2 - y^2");
  const double beta = 2.0, eps0 = 0.01;
  std::vector<CertifiedConstraint> exprs = {
      {"reach", GeneratorFixed(w, p.system, u, false), SafeMinusTarget(p)},
      {"band", GeneratorFixed(p.h, p.system, u, false) + beta * p.h,
       BandMinusTarget(p, eps0)},
  };
  const auto res = GridCheck(exprs, p.bounding_box, 401);
  ASSERT_EQ(res.size(), 2u);
  // 2(x-0.3)^2 + 2y^2 is smallest on the target circle: 0.02.
  EXPECT_FALSE(res[0].empty);
  EXPECT_GE(res[0].min, 0.019);
  EXPECT_LT(res[0].min, 0.025);
  // Residual reduces to 2 - 0.6x on the band, minimum near x = 1.
  EXPECT_FALSE(res[1].empty);
  EXPECT_GE(res[1].min, 1.39);
  EXPECT_LT(res[1].min, 1.41);
  EXPECT_GT(res[1].argmin[0], 0.98);
}

TEST(GridCheckTest, ConstantAndEmptyRegions) {
  const std::vector<Interval> box = {{-1, 1}, {-1, 1}};
  std::vector<CertifiedConstraint> exprs = {
      {"neg", P("-1"), {{P("1 - x^2 - y^2")}}},
      {"nowhere", P("x"), {{P("-1 - x^2")}}},
  };
  const auto res = GridCheck(exprs, box, 51);
  EXPECT_FALSE(res[0].empty);
  EXPECT_EQ(res[0].min, -1.0);
  EXPECT_TRUE(res[1].empty);
  EXPECT_EQ(res[1].points, 0);
}

TEST(SimulateOdeTest, StraightLineHitsTarget) {
  const auto p = Load("ex2.ra");
  const std::vector<double> x0 = {-0.5, 0.0};
  const auto out = SimulateOde(p, {P("1"), P("0")}, x0);
  ASSERT_EQ(out.kind, OutcomeKind::kReached);
  ASSERT_TRUE(out.hit_time);
  // 0.01(x - 0.9)^2 < 0.01 once x > -0.1.
  EXPECT_NEAR(*out.hit_time, 0.4, 2e-6);
  EXPECT_LT(CompiledPolynomial(p.h_r)(out.path.back()), 0);
  const CompiledPolynomial h(p.h);
  for (const auto& x : out.path) EXPECT_GT(h(x), 0);
}

TEST(SimulateOdeTest, StartInsideTargetIsImmediate) {
  const auto p = Load("ex2.ra");
  const std::vector<double> x0 = {0.9, 0.0};
  const auto out = SimulateOde(p, {P("0"), P("0")}, x0);
  EXPECT_EQ(out.kind, OutcomeKind::kReached);
  EXPECT_EQ(*out.hit_time, 0.0);
}

TEST(SimulateOdeTest, StartOutsideSafeSetRejected) {
  const auto p = Load("ex2.ra");
  const std::vector<double> x0 = {0.0, 1.2};
  EXPECT_THROW(SimulateOde(p, {P("0"), P("0")}, x0), std::invalid_argument);
}

TEST(SimulateOdeTest, UnstableLinearDriftLeavesDisc) {
  const auto p = Load("ex3.ra");
  const std::vector<double> x0 = {0.5, 0.5};
  const auto out = SimulateOde(p, {P("0"), P("0")}, x0);
  ASSERT_EQ(out.kind, OutcomeKind::kLeftSafe);

  // Oracle: x(t) = V exp(D t) V^-1 x0 for x' = A x, exit where |x| = 1.
  Eigen::Matrix2d a;
  a << 2, 1, 3, 1;
  const Eigen::EigenSolver<Eigen::Matrix2d> es(a);
  const Eigen::Matrix2d v = es.eigenvectors().real();
  const Eigen::Vector2d d = es.eigenvalues().real();
  const Eigen::Vector2d c = v.inverse() * Eigen::Vector2d(0.5, 0.5);
  auto radius2 = [&](double t) {
    const Eigen::Vector2d e(std::exp(d(0) * t) * c(0), std::exp(d(1) * t) * c(1));
    return (v * e).squaredNorm();
  };
  double lo = 0, hi = 1;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (radius2(mid) >= 1 ? hi : lo) = mid;
  }
  EXPECT_NEAR(*out.hit_time, hi, 1e-5);
}

TEST(SimulateOdeTest, NonFiniteIsDiverged) {
  const auto p = Load("ex3.ra");
  const std::vector<double> x0 = {0.1, 0.0};
  SimulationOptions o;
  o.dt = 0.5;
  const auto out = SimulateOde(p, {P("1e200*x^3"), P("0")}, x0, o);
  EXPECT_EQ(out.kind, OutcomeKind::kDiverged);
}

TEST(SimulateOdeTest, BatchSerialMatchesParallel) {
  const auto p = Load("ex3.ra");
  const std::vector<Polynomial> u = {P("-3*x - y"), P("-3*x - 2*y")};
  const auto starts = SeedStates(p, 20);
  const auto a = SimulateBatchSerial(p, u, starts);
  const auto b = SimulateBatchParallel(p, u, starts);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].kind, b[i].kind);
    EXPECT_EQ(a[i].hit_time, b[i].hit_time);
    EXPECT_EQ(a[i].path, b[i].path);
  }
}

TEST(SeedStatesTest, InteriorAndCounted) {
  const auto p = Load("ex2.ra");
  const auto s = SeedStates(p, 100);
  ASSERT_EQ(s.size(), 100u);
  const CompiledPolynomial h(p.h);
  for (const auto& x : s) EXPECT_GT(h(x), 0);
}

TEST(CertificateTest, ExponentialReplayAndMutation) {
  const auto p = Load("ex2.ra");
  const std::vector<double> x0 = {-0.5, 0.0};
  const auto good = SimulateOde(p, {P("1"), P("0")}, x0);
  EXPECT_TRUE(CheckExponentialCertificate(good, p, 0.1).pass);
  EXPECT_TRUE(CheckExponentialCertificate(good, p, 0.0).pass);
  // Reversed input drives h down.
  const auto bad = SimulateOde(p, {P("-1"), P("0")}, x0);
  EXPECT_EQ(bad.kind, OutcomeKind::kLeftSafe);
  const auto check = CheckExponentialCertificate(bad, p, 0.1);
  EXPECT_FALSE(check.pass);
  EXPECT_LT(check.worst_margin, -0.1);
}

TEST(CertificateTest, AsymptoticReplayAndMutation) {
  const auto p = Load("ex2.ra");
  const std::vector<double> x0 = {-0.5, 0.0};
  const auto traj = SimulateOde(p, {P("1"), P("0")}, x0);
  // L_w = 1 >= h on the disc.
  EXPECT_TRUE(CheckAsymptoticCertificate(traj, p, P("x")).pass);
  EXPECT_FALSE(CheckAsymptoticCertificate(traj, p, P("-x")).pass);
}

TEST(CounterNormalTest, DeterministicAndStandard) {
  EXPECT_EQ(CounterNormal(42, 7, 3, 0), CounterNormal(42, 7, 3, 0));
  EXPECT_NE(CounterNormal(42, 7, 3, 0), CounterNormal(42, 7, 3, 1));
  EXPECT_NE(CounterNormal(42, 7, 3, 0), CounterNormal(43, 7, 3, 0));
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = CounterNormal(1, i, 0, 0);
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(SimulateSdeTest, SameSeedSamePath) {
  const auto p = Load("ex5.ra");
  const std::vector<double> x0 = {-0.5, 0.3};
  StochasticOptions o;
  o.record_every = 1;
  const auto a = SimulateSdeStopped(p, {P("0"), P("0")}, x0, 11, o);
  const auto b = SimulateSdeStopped(p, {P("0"), P("0")}, x0, 11, o);
  EXPECT_EQ(a.path, b.path);
  const auto c = SimulateSdeStopped(p, {P("0"), P("0")}, x0, 12, o);
  EXPECT_NE(a.path, c.path);
}

TEST(SimulateSdeTest, ZeroNoiseIsEuler) {
  auto p = Load("ex5.ra");
  p.system.sigma = std::vector<std::vector<Polynomial>>{{P("0")}, {P("0")}};
  const std::vector<double> x0 = {-0.5, 0.3};
  StochasticOptions o;
  o.dt = 1e-2;
  o.record_every = 1;
  const auto path = SimulateSdeStopped(p, {P("1"), P("-y")}, x0, 0, o);
  ASSERT_EQ(path.kind, OutcomeKind::kReached);
  double x = -0.5, y = 0.3;
  for (std::size_t k = 1; k < path.path.size(); ++k) {
    x += 1.0 * o.dt;
    y += -y * o.dt;
    EXPECT_DOUBLE_EQ(path.path[k][0], x);
    EXPECT_DOUBLE_EQ(path.path[k][1], y);
  }
}

TEST(ReachEstimateTest, ZeroNoiseReachesSurely) {
  auto p = Load("ex5.ra");
  p.system.sigma = std::vector<std::vector<Polynomial>>{{P("0")}, {P("0")}};
  const std::vector<double> x0 = {-0.5, 0.3};
  const auto e = EstimateReachProbability(p, {P("1"), P("-y")}, x0, p.h, 100);
  EXPECT_EQ(e.p_hat, 1.0);
  EXPECT_EQ(e.se, 0.0);
  EXPECT_TRUE(e.bound_ok);
}

TEST(ReachEstimateTest, SerialMatchesParallelAndSeedsAgree) {
  const auto p = Load("ex5.ra");
  const std::vector<Polynomial> u = {P("0"), P("0")};
  const std::vector<double> x0 = {-0.4, 0.0};
  StochasticOptions o;
  o.dt = 1e-2;
  const auto a = EstimateReachProbabilitySerial(p, u, x0, p.h, 2000, o);
  const auto b = EstimateReachProbability(p, u, x0, p.h, 2000, o);
  EXPECT_EQ(a.reached, b.reached);
  o.global_seed = 7;
  const auto c = EstimateReachProbability(p, u, x0, p.h, 2000, o);
  EXPECT_GT(a.p_hat, 0.05);
  EXPECT_LT(a.p_hat, 0.95);
  EXPECT_LE(std::abs(a.p_hat - c.p_hat), 3.0 * std::hypot(a.se, c.se));
}

TEST(ReachEstimateTest, OutsideSafeSetRejected) {
  const auto p = Load("ex5.ra");
  const std::vector<double> x0 = {1.1, 0.0};
  EXPECT_THROW(EstimateReachProbability(p, {P("0"), P("0")}, x0, p.h, 10),
               std::invalid_argument);
}

TEST(DynkinTest, MartingaleFixture) {
  const auto p = MartingaleProblem();
  const std::vector<double> x0 = {0.0, 0.0};
  const auto r = CheckDynkin(p, {P("0")}, P("x"), x0, 10000, 100.0);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.residual, 2.0 * r.se);
  EXPECT_NEAR(r.rhs, 0.0, 1e-12);
}

TEST(DynkinTest, ConstantGeneratorGivesExitTime) {
  const auto p = MartingaleProblem();
  const std::vector<double> x0 = {0.2, 0.0};
  StochasticOptions o;
  o.dt = 1e-3;
  // L x^2 = 1, so E[x(tau)^2] - x0^2 = E[tau] = 1 - 0.04 for |x| < 1.
  const auto r = CheckDynkin(p, {P("0")}, P("x^2"), x0, 4000, 100.0, o);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs - 0.04, 0.96, 0.05);
}

TEST(ControllerNormTest, AreaOfDisc) {
  const std::vector<Interval> box = {{-1.5, 1.5}, {-1.5, 1.5}};
  const Polynomial h = P("1 - x^2 - y^2");
  const double n = ControllerNorm({P("1"), P("0")}, {P("0"), P("0")}, h, box, 401);
  EXPECT_NEAR(n * n, std::numbers::pi, 0.005 * std::numbers::pi);
  EXPECT_NEAR(n, std::sqrt(std::numbers::pi), 0.01);
  EXPECT_EQ(ControllerNorm({P("x")}, {P("x")}, h, box), 0.0);
  EXPECT_THROW(ControllerNorm({P("1")}, {P("0")}, P("-1"), box), std::domain_error);
}

TEST(CsvTest, Headers) {
  const auto p = Load("ex2.ra");
  const std::vector<double> x0 = {-0.5, 0.0};
  const auto run = SimulateOde(p, {P("1"), P("0")}, x0);
  const std::string t = TrajectoriesCsv({run}, p.state_names);
  EXPECT_EQ(t.substr(0, t.find('\n')), "path_id,t,x,y");
  const std::string v = VectorFieldCsv(p, {P("1"), P("y")}, 3);
  EXPECT_EQ(v.substr(0, v.find('\n')), "x,y,dx,dy");
  EXPECT_EQ(std::count(v.begin(), v.end(), '\n'), 10);
  EXPECT_NE(v.find("-1.5,-1.5,1,-1.5"), std::string::npos);
}

}  // namespace
}  // namespace reachsynth
