#include "cli.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace reachsynth::cli {
namespace {

using nlohmann::json;

std::string Problem(const std::string& name) {
  return std::string(REACHSYNTH_PROBLEM_DIR) + "/" + name;
}

std::string Temp(const std::string& name) { return testing::TempDir() + name; }

struct Outcome {
  int code;
  std::string out, err;
};

Outcome Call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = Main(args, out, err);
  return {code, out.str(), err.str()};
}

template <class T>
std::string Str(T v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

json ReadJson(const std::string& path) {
  std::ifstream in(path);
  return json::parse(in);
}

TEST(CliHelpTest, DefaultsMatchModules) {
  const SynthesisOptions so;
  const ValidationOptions vo;
  const auto help = Call({"synth", "--help"});
  ASSERT_EQ(help.code, kExitOk);
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"--method TEXT", ToString(so.method)},
      {"--xi0 FLOAT", Str(so.xi0)},
      {"--eps-prime FLOAT", Str(so.eps_prime)},
      {"--eps-star FLOAT", Str(so.eps_star)},
      {"--eps0 FLOAT", Str(so.eps0)},
      {"--penalty FLOAT", Str(so.c_penalty)},
      {"--mult-degree INT", Str(so.mult_degree)},
      {"--w-degree INT", Str(so.w_degree)},
      {"--max-alternations INT", Str(so.max_alternations)},
      {"--eps-strict FLOAT", Str(so.eps_strict)},
      {"--w-bound FLOAT", Str(so.w_coef_bound)},
      {"--beta-max FLOAT", Str(so.beta_max)},
      {"--quadrature INT", Str(so.quadrature_resolution)},
      {"--max-gram-degree INT", Str(so.max_gram_degree)},
      {"--gap-tol FLOAT", Str(so.sdp.gap_tol)},
      {"--feas-tol FLOAT", Str(so.sdp.feas_tol)},
      {"--max-iter INT", Str(so.sdp.max_iter)},
      {"--grid INT", Str(vo.grid_resolution)},
      {"--trajectories INT", Str(vo.trajectories)},
      {"--dt FLOAT", Str(vo.ode.dt)},
      {"--horizon FLOAT", Str(vo.ode.horizon)},
      {"--diverge-radius FLOAT", Str(vo.ode.diverge_radius)},
      {"--paths INT", Str(vo.mc_paths)},
      {"--seed UINT", Str(StochasticOptions{}.global_seed)},
  };
  for (const auto& [flag, value] : expected) {
    EXPECT_NE(help.out.find(flag + " [" + value + "]"), std::string::npos)
        << flag << " should default to " << value;
  }
  const auto sim = Call({"simulate", "--help"});
  const SimulationOptions sim_defaults;
  EXPECT_NE(sim.out.find("--dt FLOAT [" + Str(sim_defaults.dt) + "]"), std::string::npos);
  EXPECT_NE(sim.out.find("--horizon FLOAT [" + Str(sim_defaults.horizon) + "]"),
            std::string::npos);
  EXPECT_EQ(StochasticOptions{}.global_seed, kDefaultSeed);
}

TEST(CliTest, UsageAndIoErrors) {
  const auto missing = Call({"synth", "--method", "lax"});
  EXPECT_EQ(missing.code, kExitUsage);
  EXPECT_NE(missing.err.find("Usage"), std::string::npos);
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"synth", "--problem", Problem("ex2.ra"), "--method", "fast"}).code,
            kExitUsage);
  EXPECT_EQ(Call({"synth", "--problem", "/nonexistent/p.ra"}).code, kExitIo);
  EXPECT_EQ(Call({"synth", "--problem", Problem("ex2.ra"), "--no-validate", "--out",
                  "/nonexistent/dir/r.json"})
                .code,
            kExitIo);
  EXPECT_EQ(Call({"norm", "--problem", Problem("ex2.ra"), "--controller", "x"}).code,
            kExitUsage);
}

TEST(CliTest, SynthWritesVersionedReport) {
  const std::string path = Temp("ex2_lax.json");
  const auto r = Call({"synth", "--method", "lax", "--problem", Problem("ex2.ra"),
                       "--out", path, "--trajectories", "4"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("status=full_reach_avoid"), std::string::npos);
  const json j = ReadJson(path);
  EXPECT_EQ(j.at("schema"), 1);
  EXPECT_EQ(j.at("method"), "lax");
  EXPECT_EQ(j.at("seed"), 42);
  EXPECT_EQ(j.at("problem").at("digest").get<std::string>().size(), 16u);
  EXPECT_EQ(j.at("result").at("status"), "full_reach_avoid");
  EXPECT_EQ(j.at("validation").at("counts").at("total"), 4);

  // Same inputs, same document apart from timings.
  const std::string again = Temp("ex2_lax_again.json");
  Call({"synth", "--method", "lax", "--problem", Problem("ex2.ra"), "--out", again,
        "--trajectories", "4"});
  json a = j, b = ReadJson(again);
  a.erase("timings");
  b.erase("timings");
  b["problem"]["path"] = a["problem"]["path"];
  EXPECT_EQ(a, b);

  const auto v = Call({"validate", "--problem", Problem("ex2.ra"), "--report", path,
                       "--out", Temp("v.json"), "--trajectories", "2",
                       "--horizon", "1"});
  EXPECT_EQ(v.code, kExitFailed);  // horizon 1 is far too short here
  EXPECT_NEAR(ReadJson(Temp("v.json")).at("validation").at("norm").get<double>(),
              j.at("result").at("norm").get<double>(), 1e-9);
}

TEST(CliTest, ExampleOneExponentialIsNotFull) {
  const auto r = Call({"synth", "--method", "exponential", "--problem", Problem("ex1.ra"),
                       "--out", Temp("ex1.json"), "--no-validate"});
  EXPECT_TRUE(r.code == kExitSafeOnly || r.code == kExitFailed);
}

TEST(CliTest, SeedFromEnvironmentWins) {
  setenv("REACHSYNTH_SEED", "7", 1);
  const std::string path = Temp("seed.json");
  Call({"synth", "--problem", Problem("ex2.ra"), "--out", path, "--seed", "3",
        "--no-validate"});
  unsetenv("REACHSYNTH_SEED");
  EXPECT_EQ(ReadJson(path).at("seed"), 7);
  Call({"synth", "--problem", Problem("ex2.ra"), "--out", path, "--seed", "3",
        "--no-validate"});
  EXPECT_EQ(ReadJson(path).at("seed"), 3);
}

TEST(CliTest, NormSimulateExport) {
  const auto zero = Call({"norm", "--problem", Problem("ex2.ra"), "--controller", "zero"});
  EXPECT_EQ(zero.code, kExitOk);
  EXPECT_EQ(std::stod(zero.out), 0.0);
  const auto unit = Call({"norm", "--problem", Problem("ex2.ra"), "--controller", "1;0",
                          "--resolution", "401"});
  EXPECT_NEAR(std::stod(unit.out), 1.7725, 0.01);

  const auto sim = Call({"simulate", "--problem", Problem("ex2.ra"), "--controller",
                         "1;0", "--x0", "-0.5,0"});
  EXPECT_EQ(sim.code, kExitOk);
  EXPECT_NE(sim.out.find("kind=reached"), std::string::npos);
  EXPECT_EQ(Call({"simulate", "--problem", Problem("ex2.ra"), "--controller", "1;0",
                  "--x0", "-0.5"})
                .code,
            kExitUsage);

  const std::string sdpa = Temp("ex2.sdpa");
  EXPECT_EQ(Call({"export-sdp", "--method", "exponential", "--problem",
                  Problem("ex2.ra"), "--out", sdpa})
                .code,
            kExitOk);
  const SdpProblem prob = ImportSdpa(sdpa);
  EXPECT_GT(prob.n_vars, 0);
  EXPECT_EQ(SolveSdp(prob).status, SdpStatus::kOptimal);
}

TEST(CliTest, ResultJsonRoundTrip) {
  const auto p = LoadProblem(Problem("ex3.ra"));
  SynthesisOptions o;
  o.method = Method::kAsymptotic;
  const auto r = Synthesize(p, o);
  const json j = ResultToJson(r, p.state_names);
  const auto back = ResultFromJson(j, p.state_names);
  EXPECT_EQ(ResultToJson(back, p.state_names), j);
  ASSERT_TRUE(back.w);
  EXPECT_TRUE((*back.w - *r.w).is_zero());
}

TEST(Fnv1aTest, KnownVectors) {
  EXPECT_EQ(Fnv1a64(""), "cbf29ce484222325");
  EXPECT_EQ(Fnv1a64("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(Fnv1a64("foobar"), "85944171f73967e8");
}

TEST(ExitCodeTest, StatusMapping) {
  EXPECT_EQ(ExitCodeFor(SynthesisStatus::kFull), 0);
  EXPECT_EQ(ExitCodeFor(SynthesisStatus::kTightened), 0);
  EXPECT_EQ(ExitCodeFor(SynthesisStatus::kSafeOnly), 2);
  EXPECT_EQ(ExitCodeFor(SynthesisStatus::kFailed), 3);
}

}  // namespace
}  // namespace reachsynth::cli
