#include "cli.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "reachsynth/sdp.h"

namespace reachsynth::cli {

using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return buf.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

struct LoadedProblem {
  ReachAvoidProblem problem;
  std::string digest;
};

LoadedProblem LoadProblemFile(const std::string& path) {
  const std::string text = ReadFile(path);
  try {
    return {ParseProblem(text), Fnv1a64(text)};
  } catch (const ParseError& e) {
    throw UsageError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
}

double Seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> ParsePoint(const std::string& s, int n) {
  std::vector<double> x;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      x.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw 0;
    } catch (...) {
      throw UsageError("bad coordinate '" + item + "' in --x0");
    }
  }
  if (static_cast<int>(x.size()) != n) {
    throw UsageError("--x0 needs " + std::to_string(n) + " comma-separated values");
  }
  return x;
}

json PolyJson(const std::optional<Polynomial>& p,
              const std::vector<std::string>& names) {
  return p ? json(p->ToString(names)) : json(nullptr);
}

json OptJson(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json OutcomeJson(const TrajectoryOutcome& o) {
  return {{"kind", ToString(o.kind)},
          {"hit_time", OptJson(o.hit_time)},
          {"final_time", o.final_time},
          {"x0", o.path.empty() ? json::array() : json(o.path.front())},
          {"final_state", o.path.empty() ? json::array() : json(o.path.back())}};
}

json EstimateJson(const ReachEstimate& e) {
  return {{"p_hat", e.p_hat}, {"se", e.se},           {"bound", e.bound},
          {"bound_ok", e.bound_ok}, {"reached", e.reached}, {"paths", e.paths}};
}

bool ValidationPassed(const ValidationReport& v) {
  constexpr double kResidualTol = -1e-5;
  if (v.min_residual < kResidualTol) return false;
  if (v.left_safe || v.timeout || v.diverged) return false;
  if (v.certificate_passed != v.certificate_checked) return false;
  for (const auto& m : v.monte_carlo) {
    if (!m.estimate.bound_ok) return false;
  }
  return true;
}

std::uint64_t EffectiveSeed(std::uint64_t flag) {
  if (const char* env = std::getenv("REACHSYNTH_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw UsageError(std::string("REACHSYNTH_SEED is not an integer: ") + env);
    }
  }
  return flag;
}

// Stochastic reports carry no stored paths; record one per Monte Carlo start.
std::vector<TrajectoryOutcome> SamplePaths(const ReachAvoidProblem& p,
                                           const std::vector<Polynomial>& u,
                                           const ValidationReport& v,
                                           std::uint64_t seed) {
  if (!v.runs.empty() || !p.system.stochastic()) return v.runs;
  StochasticOptions o;
  o.global_seed = seed;
  o.record_every = 10;
  std::vector<TrajectoryOutcome> out;
  for (const auto& m : v.monte_carlo) out.push_back(SimulateSdeStopped(p, u, m.x0, 0, o));
  return out;
}

void WriteCsvs(const std::string& dir, const ReachAvoidProblem& p,
               const std::vector<Polynomial>& u,
               const std::vector<TrajectoryOutcome>& runs) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "'");
  WriteFile(dir + "/trajectories.csv", TrajectoriesCsv(runs, p.state_names));
  WriteFile(dir + "/vectorfield.csv", VectorFieldCsv(p, u));
}

// ----- flag groups ------------------------------------------------------------

void AddSynthesisFlags(CLI::App* c, SynthesisOptions& o) {
  c->add_option("--xi0", o.xi0, "Lower bound on the exponential rate");
  c->add_option("--eps-prime", o.eps_prime, "Stop threshold on norm improvements");
  c->add_option("--eps-star", o.eps_star, "Stop threshold on delta improvements");
  c->add_option("--eps0", o.eps0, "Tightened-set margin (lax)");
  c->add_option("--penalty", o.c_penalty, "Weight of delta in the objective");
  c->add_option("--mult-degree", o.mult_degree, "Degree of S-procedure multipliers");
  c->add_option("--w-degree", o.w_degree, "Degree of the auxiliary function w");
  c->add_option("--max-alternations", o.max_alternations, "Alternation rounds");
  c->add_option("--eps-strict", o.eps_strict, "Margin for strict inequalities");
  c->add_option("--w-bound", o.w_coef_bound, "Bound on |coefficients| of w");
  c->add_option("--beta-max", o.beta_max, "Upper bound on beta (lax)");
  c->add_option("--quadrature", o.quadrature_resolution,
                "Quadrature resolution of the norm objective");
  c->add_option("--max-gram-degree", o.max_gram_degree, "Cap on SOS degrees");
  c->add_option("--gap-tol", o.sdp.gap_tol, "SDP duality-gap tolerance");
  c->add_option("--feas-tol", o.sdp.feas_tol, "SDP feasibility tolerance");
  c->add_option("--max-iter", o.sdp.max_iter, "SDP iteration cap");
}

void AddValidationFlags(CLI::App* c, ValidationOptions& o) {
  c->add_option("--grid", o.grid_resolution, "Residual grid points per axis");
  c->add_option("--trajectories", o.trajectories, "Seeded initial states");
  c->add_option("--dt", o.ode.dt, "Integration step");
  c->add_option("--horizon", o.ode.horizon, "Simulation horizon T");
  c->add_option("--diverge-radius", o.ode.diverge_radius, "Divergence radius");
  c->add_option("--paths", o.mc_paths, "Monte Carlo paths per initial state");
}

std::string MethodList() {
  return "exponential, asymptotic, lax, stoch_exponential, stoch_asymptotic";
}

Method RequireMethod(const std::string& s) {
  const auto m = ParseMethod(s);
  if (!m) throw UsageError("unknown method '" + s + "' (expected " + MethodList() + ")");
  return *m;
}

ValidationReport RunValidation(const ReachAvoidProblem& p,
                               const SynthesisResult& r, ValidationOptions vo,
                               std::uint64_t seed, int quadrature) {
  vo.sde.global_seed = seed;
  vo.sde.dt = vo.ode.dt;
  vo.sde.horizon = vo.ode.horizon;
  vo.sde.diverge_radius = vo.ode.diverge_radius;
  vo.quadrature_resolution = quadrature;
  return Validate(p, r, vo);
}

}  // namespace

std::string Fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

int ExitCodeFor(SynthesisStatus s) {
  switch (s) {
    case SynthesisStatus::kFull:
    case SynthesisStatus::kTightened: return kExitOk;
    case SynthesisStatus::kSafeOnly: return kExitSafeOnly;
    case SynthesisStatus::kFailed: return kExitFailed;
  }
  return kExitFailed;
}

json OptionsToJson(const SynthesisOptions& o) {
  return {{"method", ToString(o.method)},
          {"xi0", o.xi0},
          {"eps_prime", o.eps_prime},
          {"eps_star", o.eps_star},
          {"eps0", o.eps0},
          {"c_penalty", o.c_penalty},
          {"mult_degree", o.mult_degree},
          {"w_degree", o.w_degree},
          {"max_alternations", o.max_alternations},
          {"eps_strict", o.eps_strict},
          {"w_coef_bound", o.w_coef_bound},
          {"beta_max", o.beta_max},
          {"quadrature_resolution", o.quadrature_resolution},
          {"max_gram_degree", o.max_gram_degree},
          {"sdp", {{"gap_tol", o.sdp.gap_tol},
                   {"feas_tol", o.sdp.feas_tol},
                   {"max_iter", o.sdp.max_iter}}}};
}

json ResultToJson(const SynthesisResult& r, const std::vector<std::string>& names) {
  json controller = json::array();
  for (const auto& u : r.controller) controller.push_back(u.ToString(names));
  json trace = json::array();
  for (const auto& t : r.trace) {
    trace.push_back({{"iteration", t.iteration},
                     {"program", t.program},
                     {"sdp_status", ToString(t.sdp_status)},
                     {"delta", t.delta},
                     {"norm", t.norm},
                     {"accepted", t.accepted}});
  }
  json constraints = json::array();
  std::string certificate_text;
  for (const auto& c : r.constraints) {
    json region = json::array();
    for (const auto& g : c.region.generators) region.push_back(g.ToString(names));
    const std::string expr = c.expression.ToString(names);
    certificate_text += c.label + '\n' + expr + '\n';
    constraints.push_back({{"label", c.label}, {"expression", expr}, {"region", region}});
  }
  return {{"method", ToString(r.method)},
          {"status", ToString(r.status)},
          {"delta", r.delta},
          {"norm", r.norm},
          {"rate", OptJson(r.rate)},
          {"beta", OptJson(r.beta)},
          {"w", PolyJson(r.w, names)},
          {"h_prime", PolyJson(r.h_prime, names)},
          {"coefficients", r.coefficients},
          {"controller", controller},
          {"iterations", r.iterations},
          {"trace", trace},
          {"diagnostics", r.diagnostics},
          {"first_program_blocks", r.first_program_blocks},
          {"constraints", constraints},
          {"certificate_digest", Fnv1a64(certificate_text)}};
}

SynthesisResult ResultFromJson(const json& j, const std::vector<std::string>& names) {
  auto poly = [&](const json& v) { return ParsePolynomial(v.get<std::string>(), names); };
  auto opt_poly = [&](const json& v) -> std::optional<Polynomial> {
    if (v.is_null()) return std::nullopt;
    return poly(v);
  };
  auto opt = [](const json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  SynthesisResult r;
  const auto method = ParseMethod(j.at("method").get<std::string>());
  if (!method) throw std::invalid_argument("report: unknown method");
  r.method = *method;
  const std::string status = j.at("status").get<std::string>();
  bool known = false;
  for (auto s : {SynthesisStatus::kFull, SynthesisStatus::kTightened,
                 SynthesisStatus::kSafeOnly, SynthesisStatus::kFailed}) {
    if (status == ToString(s)) {
      r.status = s;
      known = true;
    }
  }
  if (!known) throw std::invalid_argument("report: unknown status '" + status + "'");
  r.delta = j.at("delta").get<double>();
  r.norm = j.at("norm").get<double>();
  r.rate = opt(j.at("rate"));
  r.beta = opt(j.at("beta"));
  r.w = opt_poly(j.at("w"));
  r.h_prime = opt_poly(j.at("h_prime"));
  r.coefficients = j.at("coefficients").get<std::vector<double>>();
  for (const auto& u : j.at("controller")) r.controller.push_back(poly(u));
  r.iterations = j.at("iterations").get<int>();
  for (const auto& t : j.at("trace")) {
    IterationRecord rec;
    rec.iteration = t.at("iteration").get<int>();
    rec.program = t.at("program").get<std::string>();
    rec.delta = t.at("delta").get<double>();
    rec.norm = t.at("norm").get<double>();
    rec.accepted = t.at("accepted").get<bool>();
    const std::string s = t.at("sdp_status").get<std::string>();
    for (auto st : {SdpStatus::kOptimal, SdpStatus::kInfeasible, SdpStatus::kUnbounded,
                    SdpStatus::kMaxIter, SdpStatus::kNumericalFailure}) {
      if (s == ToString(st)) rec.sdp_status = st;
    }
    r.trace.push_back(rec);
  }
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  r.first_program_blocks = j.at("first_program_blocks").get<std::vector<int>>();
  for (const auto& c : j.at("constraints")) {
    CertifiedConstraint cc;
    cc.label = c.at("label").get<std::string>();
    cc.expression = poly(c.at("expression"));
    for (const auto& g : c.at("region")) cc.region.generators.push_back(poly(g));
    r.constraints.push_back(std::move(cc));
  }
  return r;
}

json ValidationToJson(const ValidationReport& v) {
  json residuals = json::array();
  for (const auto& e : v.residuals) {
    residuals.push_back({{"label", e.label},
                         {"empty", e.empty},
                         {"min", e.empty ? json(nullptr) : json(e.min)},
                         {"argmin", e.empty ? json(nullptr) : json(e.argmin)},
                         {"points", e.points}});
  }
  json runs = json::array();
  for (const auto& r : v.runs) runs.push_back(OutcomeJson(r));
  json mc = json::array();
  for (const auto& m : v.monte_carlo) {
    json e = EstimateJson(m.estimate);
    e["x0"] = m.x0;
    mc.push_back(e);
  }
  return {{"residuals", residuals},
          {"min_residual", v.min_residual},
          {"counts", {{"reached", v.reached},
                      {"left_safe", v.left_safe},
                      {"timeout", v.timeout},
                      {"diverged", v.diverged},
                      {"total", v.total_runs()}}},
          {"certificate", {{"checked", v.certificate_checked},
                           {"passed", v.certificate_passed}}},
          {"runs", runs},
          {"monte_carlo", mc},
          {"norm", v.norm},
          {"passed", ValidationPassed(v)}};
}

std::vector<Polynomial> LoadController(const std::string& spec,
                                       const ReachAvoidProblem& p) {
  if (spec == "zero") return std::vector<Polynomial>(p.m(), Polynomial(p.n()));
  if (spec == "nominal") return p.nominal;
  if (std::filesystem::exists(spec)) {
    json j;
    try {
      j = json::parse(ReadFile(spec));
      std::vector<Polynomial> u;
      for (const auto& s : j.at("result").at("controller")) {
        u.push_back(ParsePolynomial(s.get<std::string>(), p.state_names));
      }
      if (static_cast<int>(u.size()) != p.m()) {
        throw UsageError("controller in '" + spec + "' has the wrong number of inputs");
      }
      return u;
    } catch (const json::exception& e) {
      throw UsageError("'" + spec + "' is not a report: " + e.what());
    }
  }
  std::vector<Polynomial> u;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ';')) {
    try {
      u.push_back(ParsePolynomial(item, p.state_names));
    } catch (const ParseError& e) {
      throw UsageError("controller '" + item + "': " + e.what());
    }
  }
  if (static_cast<int>(u.size()) != p.m()) {
    throw UsageError("--controller needs " + std::to_string(p.m()) +
                     " polynomials separated by ';', 'zero', 'nominal' or a report");
  }
  return u;
}

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  CLI::App app{"Reach-avoid controller synthesis with control guidance-barrier functions",
               "reachsynth"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->always_capture_default();

  SynthesisOptions so;
  ValidationOptions vo;
  std::string problem_path, out_path, report_path, controller, x0_text, csv_dir;
  std::string method = ToString(so.method);
  std::uint64_t seed_flag = kDefaultSeed;
  bool skip_validation = false;
  int paths = vo.mc_paths;
  int norm_resolution = so.quadrature_resolution;

  auto* synth = app.add_subcommand("synth", "Synthesize a controller and write a report");
  synth->add_option("--problem", problem_path, "Problem file (.ra)")->required();
  synth->add_option("--method", method, "One of: " + MethodList());
  synth->add_option("--out", out_path, "Report path")->default_str("report.json");
  AddSynthesisFlags(synth, so);
  AddValidationFlags(synth, vo);
  synth->add_option("--seed", seed_flag, "Global Monte Carlo seed");
  synth->add_flag("--no-validate", skip_validation, "Skip the validation phase");
  synth->add_option("--csv-dir", csv_dir, "Directory for trajectories/vectorfield CSVs");

  auto* validate = app.add_subcommand("validate", "Replay a report's certificates");
  validate->add_option("--problem", problem_path, "Problem file (.ra)")->required();
  validate->add_option("--report", report_path, "report.json from synth")->required();
  validate->add_option("--out", out_path, "Validation output path")
      ->default_str("validation.json");
  AddValidationFlags(validate, vo);
  validate->add_option("--seed", seed_flag, "Global Monte Carlo seed");
  validate->add_option("--csv-dir", csv_dir, "Directory for trajectories/vectorfield CSVs");

  SimulationOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate one initial state");
  simulate->add_option("--problem", problem_path, "Problem file (.ra)")->required();
  simulate->add_option("--controller", controller,
                       "report.json, 'zero', 'nominal' or 'p1;p2;...'")
      ->required();
  simulate->add_option("--x0", x0_text, "Initial state, comma separated")->required();
  simulate->add_option("--dt", sim.dt, "Integration step");
  simulate->add_option("--horizon", sim.horizon, "Simulation horizon T");
  simulate->add_option("--diverge-radius", sim.diverge_radius, "Divergence radius");
  simulate->add_option("--paths", paths, "Monte Carlo paths (stochastic problems)");
  simulate->add_option("--seed", seed_flag, "Global Monte Carlo seed");
  simulate->add_option("--csv-dir", csv_dir, "Directory for trajectories/vectorfield CSVs");

  auto* export_sdp = app.add_subcommand("export-sdp", "Write the method's first SDP");
  export_sdp->add_option("--problem", problem_path, "Problem file (.ra)")->required();
  export_sdp->add_option("--method", method, "One of: " + MethodList());
  export_sdp->add_option("--out", out_path, "SDPA output path")->required();
  AddSynthesisFlags(export_sdp, so);

  auto* norm = app.add_subcommand("norm", "Integral norm of u - k over the safe set");
  norm->add_option("--problem", problem_path, "Problem file (.ra)")->required();
  norm->add_option("--controller", controller,
                   "report.json, 'zero', 'nominal' or 'p1;p2;...'")
      ->required();
  norm->add_option("--resolution", norm_resolution, "Quadrature resolution");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }
  if (out_path.empty() && synth->parsed()) out_path = "report.json";
  if (out_path.empty() && validate->parsed()) out_path = "validation.json";

  try {
    const std::uint64_t seed = EffectiveSeed(seed_flag);

    if (synth->parsed()) {
      so.method = RequireMethod(method);
      so.Validate();
      const auto loaded = LoadProblemFile(problem_path);
      const auto& p = loaded.problem;
      auto t0 = std::chrono::steady_clock::now();
      const SynthesisResult r = Synthesize(p, so);
      const double t_synth = Seconds(t0);
      json report = {{"schema", kReportSchema},
                     {"tool", "reachsynth"},
                     {"version", kVersion},
                     {"problem", {{"path", problem_path}, {"digest", loaded.digest}}},
                     {"method", ToString(so.method)},
                     {"seed", seed},
                     {"options", OptionsToJson(so)},
                     {"result", ResultToJson(r, p.state_names)},
                     {"validation", nullptr}};
      json timings = {{"synthesis_s", t_synth}};
      if (!skip_validation) {
        t0 = std::chrono::steady_clock::now();
        const ValidationReport v =
            RunValidation(p, r, vo, seed, so.quadrature_resolution);
        timings["validation_s"] = Seconds(t0);
        report["validation"] = ValidationToJson(v);
        if (!r.controller.empty() && !csv_dir.empty()) {
          WriteCsvs(csv_dir, p, r.controller, SamplePaths(p, r.controller, v, seed));
        }
      }
      report["timings"] = timings;
      WriteFile(out_path, report.dump(2) + "\n");
      out << "status=" << ToString(r.status) << " delta=" << r.delta
          << " norm=" << r.norm << "\n";
      return ExitCodeFor(r.status);
    }

    if (validate->parsed()) {
      const auto loaded = LoadProblemFile(problem_path);
      const auto& p = loaded.problem;
      json in;
      SynthesisResult r;
      try {
        in = json::parse(ReadFile(report_path));
        if (in.at("schema").get<int>() != kReportSchema) {
          throw UsageError("unsupported report schema in '" + report_path + "'");
        }
        if (in.at("problem").at("digest").get<std::string>() != loaded.digest) {
          err << "warning: report was produced from a different problem file\n";
        }
        r = ResultFromJson(in.at("result"), p.state_names);
      } catch (const json::exception& e) {
        throw UsageError("'" + report_path + "' is not a report: " + e.what());
      }
      const auto t0 = std::chrono::steady_clock::now();
      const int quadrature =
          in.at("options").value("quadrature_resolution", so.quadrature_resolution);
      const ValidationReport v = RunValidation(p, r, vo, seed, quadrature);
      const json doc = {{"schema", kReportSchema},
                        {"tool", "reachsynth"},
                        {"version", kVersion},
                        {"problem", {{"path", problem_path}, {"digest", loaded.digest}}},
                        {"seed", seed},
                        {"status", ToString(r.status)},
                        {"validation", ValidationToJson(v)},
                        {"timings", {{"validation_s", Seconds(t0)}}}};
      if (!r.controller.empty() && !csv_dir.empty()) {
        WriteCsvs(csv_dir, p, r.controller, SamplePaths(p, r.controller, v, seed));
      }
      WriteFile(out_path, doc.dump(2) + "\n");
      const bool ok = ValidationPassed(v);
      out << "validation=" << (ok ? "pass" : "fail") << " min_residual=" << v.min_residual
          << " reached=" << v.reached << "/" << v.total_runs() << "\n";
      return ok ? kExitOk : kExitFailed;
    }

    if (simulate->parsed()) {
      const auto p = LoadProblemFile(problem_path).problem;
      const auto u = LoadController(controller, p);
      const auto x0 = ParsePoint(x0_text, p.n());
      if (p.system.stochastic()) {
        StochasticOptions o;
        o.dt = sim.dt;
        o.horizon = sim.horizon;
        o.diverge_radius = sim.diverge_radius;
        o.global_seed = seed;
        if (CompiledPolynomial(p.h_r)(x0) >= 0 && CompiledPolynomial(p.h)(x0) <= 0) {
          throw UsageError("x0 is outside the safe set");
        }
        // h_cert is h itself unless the report carries a tightened h'.
        Polynomial h_cert = p.h;
        if (std::filesystem::exists(controller)) {
          const json j = json::parse(ReadFile(controller));
          const json& hp = j.at("result").at("h_prime");
          if (!hp.is_null()) h_cert = ParsePolynomial(hp.get<std::string>(), p.state_names);
        }
        const auto e = EstimateReachProbability(p, u, x0, h_cert, paths, o);
        out << "p_hat=" << e.p_hat << " se=" << e.se << " bound=" << e.bound
            << " bound_ok=" << (e.bound_ok ? "true" : "false") << "\n";
        if (!csv_dir.empty()) {
          StochasticOptions keep = o;
          keep.record_every = 10;
          WriteCsvs(csv_dir, p, u, {SimulateSdeStopped(p, u, x0, 0, keep)});
        }
        return e.bound_ok ? kExitOk : kExitFailed;
      }
      if (CompiledPolynomial(p.h_r)(x0) >= 0 && CompiledPolynomial(p.h)(x0) <= 0) {
        throw UsageError("x0 is outside the safe set");
      }
      const auto run = SimulateOde(p, u, x0, sim);
      out << "kind=" << ToString(run.kind);
      if (run.hit_time) out << " hit_time=" << *run.hit_time;
      out << " final_time=" << run.final_time << "\n";
      WriteCsvs(csv_dir, p, u, {run});
      return run.kind == OutcomeKind::kReached ? kExitOk : kExitFailed;
    }

    if (export_sdp->parsed()) {
      so.method = RequireMethod(method);
      so.Validate();
      const auto p = LoadProblemFile(problem_path).problem;
      const auto low = FirstProgram(p, so).Lower();
      WriteFile(out_path, FormatSdpa(low.sdp));
      out << "wrote " << out_path << " (" << low.sdp.n_vars << " variables, "
          << low.sdp.blocks.size() << " blocks)\n";
      return kExitOk;
    }

    if (norm->parsed()) {
      const auto p = LoadProblemFile(problem_path).problem;
      const auto u = LoadController(controller, p);
      out << std::setprecision(12)
          << ControllerNorm(u, p.nominal, p.h, p.bounding_box, norm_resolution) << "\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace reachsynth::cli
