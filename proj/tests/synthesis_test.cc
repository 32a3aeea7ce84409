#include "reachsynth/synthesis.h"

#include <cmath>

#include <gtest/gtest.h>

#include "reachsynth/validate.h"

namespace reachsynth {
namespace {

const std::vector<std::string> kXY = {"x", "y"};

Polynomial P(const std::string& s) { return ParsePolynomial(s, kXY); }

ReachAvoidProblem Load(const std::string& name) {
  return LoadProblem(std::string(REACHSYNTH_PROBLEM_DIR) + "/" + name);
}

SynthesisResult SynthRun(const ReachAvoidProblem& p, Method m) {
  SynthesisOptions o;
  o.method = m;
  return Synthesize(p, o);
}

double MinResidual(const ReachAvoidProblem& p, const SynthesisResult& r) {
  double lo = 1e300;
  for (const auto& e : GridCheck(r.constraints, p.bounding_box, 201)) {
    if (!e.empty) lo = std::min(lo, e.min);
  }
  return lo;
}

TEST(MethodTest, NamesRoundTrip) {
  for (Method m : {Method::kExponential, Method::kAsymptotic, Method::kLax,
                   Method::kStochExponential, Method::kStochAsymptotic}) {
    EXPECT_EQ(ParseMethod(ToString(m)), m);
  }
  EXPECT_FALSE(ParseMethod("fast"));
  EXPECT_TRUE(IsStochastic(Method::kStochAsymptotic));
  EXPECT_FALSE(IsStochastic(Method::kLax));
  EXPECT_STREQ(ToString(SynthesisStatus::kTightened), "tightened_reach_avoid");
}

TEST(SynthesisOptionsTest, RejectsBadValues) {
  SynthesisOptions o;
  EXPECT_NO_THROW(o.Validate());
  o.xi0 = 0;
  EXPECT_THROW(o.Validate(), std::invalid_argument);
  o = {};
  o.eps0 = -1;
  EXPECT_THROW(o.Validate(), std::invalid_argument);
}

TEST(ClassificationTest, TightenedSets) {
  const Polynomial h = P("1 - x^2 - y^2");
  const std::vector<double> pt = {0.3, 0.4};  // h = 0.75
  EXPECT_NEAR(CompiledPolynomial(ExponentialHPrime(h, 0.5, 0.1))(pt), 0.55, 1e-12);
  EXPECT_NEAR(CompiledPolynomial(AsymptoticHPrime(h, 0.1))(pt), 0.65, 1e-12);
  // (alpha h - delta) / (alpha - delta) and (h - delta) / (1 - delta).
  EXPECT_NEAR(CompiledPolynomial(StochExponentialHPrime(h, 2.0, 0.5))(pt),
              (1.5 - 0.5) / 1.5, 1e-12);
  EXPECT_NEAR(CompiledPolynomial(StochAsymptoticHPrime(h, 0.5))(pt), 0.5, 1e-12);

  const auto p = Load("ex2.ra");
  EXPECT_EQ(ClassifyExponential(0.0, p.h, p), SynthesisStatus::kFull);
  EXPECT_EQ(ClassifyExponential(0.1, AsymptoticHPrime(p.h, 0.1), p),
            SynthesisStatus::kTightened);
  EXPECT_EQ(ClassifyExponential(2.0, AsymptoticHPrime(p.h, 2.0), p),
            SynthesisStatus::kFailed);
}

TEST(SynthesisTest, ExponentialOnExampleTwo) {
  const auto p = Load("ex2.ra");
  const auto r = SynthRun(p, Method::kExponential);
  ASSERT_EQ(r.status, SynthesisStatus::kFull);
  EXPECT_LE(r.delta, kDeltaZero);
  ASSERT_TRUE(r.rate);
  EXPECT_GE(*r.rate, 1e-3 - 1e-9);
  EXPECT_GE(MinResidual(p, r), -1e-5);
  EXPECT_FALSE(r.first_program_blocks.empty());
  ASSERT_EQ(r.controller.size(), 2u);
  // Input box u1 in [0.001, 1] on the closed safe set.
  std::vector<CertifiedConstraint> box = {
      {"lo", r.controller[0] - P("0.001"), {{p.h}}},
      {"hi", P("1") - r.controller[0], {{p.h}}}};
  for (const auto& e : GridCheck(box, p.bounding_box, 201)) EXPECT_GE(e.min, -1e-7);
}

TEST(SynthesisTest, NormMatchesObjective) {
  const auto p = Load("ex3.ra");
  for (Method m : {Method::kExponential, Method::kAsymptotic, Method::kLax}) {
    const auto r = SynthRun(p, m);
    ASSERT_EQ(r.status, SynthesisStatus::kFull) << ToString(m);
    const double n = ControllerNorm(r.controller, p.nominal, p.h, p.bounding_box);
    EXPECT_NEAR(n, r.norm, 1e-9 * std::max(1.0, n)) << ToString(m);
  }
}

TEST(SynthesisTest, MethodsImproveOnExampleThree) {
  const auto p = Load("ex3.ra");
  const auto e = SynthRun(p, Method::kExponential);
  const auto a = SynthRun(p, Method::kAsymptotic);
  const auto l = SynthRun(p, Method::kLax);
  for (const auto* r : {&e, &a, &l}) {
    EXPECT_EQ(r->status, SynthesisStatus::kFull);
    EXPECT_GE(MinResidual(p, *r), -1e-5);
  }
  EXPECT_GE(e.norm, a.norm);
  EXPECT_LE(std::abs(a.norm - l.norm), 1e-3);
}

TEST(SynthesisTest, ExampleOneNeedsLax) {
  const auto p = Load("ex1.ra");
  EXPECT_NE(SynthRun(p, Method::kExponential).status, SynthesisStatus::kFull);
  EXPECT_NE(SynthRun(p, Method::kAsymptotic).status, SynthesisStatus::kFull);
  const auto l = SynthRun(p, Method::kLax);
  EXPECT_EQ(l.status, SynthesisStatus::kFull);
  ASSERT_TRUE(l.w);
  ASSERT_TRUE(l.beta);
  EXPECT_GE(*l.beta, 0.0);
}

TEST(SynthesisTest, ExponentialTrajectoriesAndMutation) {
  const auto p = Load("ex3.ra");
  const auto r = SynthRun(p, Method::kExponential);
  ASSERT_EQ(r.status, SynthesisStatus::kFull);
  const auto starts = SeedStates(p, 100);
  const auto runs = SimulateBatchParallel(p, r.controller, starts);
  for (const auto& run : runs) {
    EXPECT_EQ(run.kind, OutcomeKind::kReached);
    EXPECT_TRUE(CheckExponentialCertificate(run, p, *r.rate).pass);
  }
  // w = h / lambda turns the exponential certificate into an asymptotic one.
  const Polynomial w = p.h.Scale(1.0 / *r.rate);
  for (const auto& run : runs) EXPECT_TRUE(CheckAsymptoticCertificate(run, p, w).pass);

  // Flip the sign of one gain.
  std::vector<Polynomial> bad = r.controller;
  bad[0] = r.controller[0] - P("2*x").Scale(
      r.controller[0].coefficient(Monomial::Variable(2, 0)));
  int failures = 0;
  for (const auto& run : SimulateBatchParallel(p, bad, starts)) {
    if (!CheckExponentialCertificate(run, p, *r.rate).pass) ++failures;
  }
  EXPECT_GT(failures, 0);
}

TEST(SynthesisTest, AsymptoticCertificateAndCorruptedW) {
  const auto p = Load("ex3.ra");
  const auto r = SynthRun(p, Method::kAsymptotic);
  ASSERT_EQ(r.status, SynthesisStatus::kFull);
  ASSERT_TRUE(r.w);
  const auto runs = SimulateBatchParallel(p, r.controller, SeedStates(p, 100));
  int corrupted_failures = 0;
  for (const auto& run : runs) {
    EXPECT_EQ(run.kind, OutcomeKind::kReached);
    EXPECT_TRUE(CheckAsymptoticCertificate(run, p, *r.w).pass);
    if (!CheckAsymptoticCertificate(run, p, -*r.w).pass) ++corrupted_failures;
  }
  EXPECT_GT(corrupted_failures, 0);
}

TEST(SynthesisTest, StochasticExampleFive) {
  const auto p = Load("ex5.ra");
  for (Method m : {Method::kStochExponential, Method::kStochAsymptotic}) {
    const auto r = SynthRun(p, m);
    ASSERT_EQ(r.status, SynthesisStatus::kFull) << ToString(m);
    EXPECT_GE(MinResidual(p, r), -1e-5);
    const std::vector<double> x0 = {-0.3, 0.2};
    const auto e = EstimateReachProbability(p, r.controller, x0, p.h, 1000);
    EXPECT_TRUE(e.bound_ok);
  }
}

TEST(SynthesisTest, StochasticMethodNeedsDiffusion) {
  const auto p = Load("ex2.ra");
  EXPECT_THROW(SynthRun(p, Method::kStochExponential), std::invalid_argument);
}

TEST(FirstProgramTest, BlocksMatchResult) {
  const auto p = Load("ex2.ra");
  SynthesisOptions o;
  const auto prog = FirstProgram(p, o);
  const auto low = prog.Lower();
  const auto r = Synthesize(p, o);
  ASSERT_EQ(low.sdp.blocks.size(), r.first_program_blocks.size());
  for (std::size_t i = 0; i < low.sdp.blocks.size(); ++i) {
    const auto& b = low.sdp.blocks[i];
    EXPECT_EQ(b.diagonal ? -b.size : b.size, r.first_program_blocks[i]);
  }
}

}  // namespace
}  // namespace reachsynth
