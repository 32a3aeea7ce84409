#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reachsynth/problem.h"
#include "reachsynth/synthesis.h"
#include "reachsynth/validate.h"

namespace reachsynth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSafeOnly = 2;
inline constexpr int kExitFailed = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitIo = 74;

inline constexpr int kReportSchema = 1;
inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kDefaultSeed = 42;

/// Runs one command line. Output goes to `out`, diagnostics to `err`.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string Fnv1a64(std::string_view data);

/// Exit code for a synthesis status.
int ExitCodeFor(SynthesisStatus s);

nlohmann::json ResultToJson(const SynthesisResult& r,
                            const std::vector<std::string>& names);
/// Inverse of ResultToJson (trace and diagnostics included).
SynthesisResult ResultFromJson(const nlohmann::json& j,
                               const std::vector<std::string>& names);
nlohmann::json ValidationToJson(const ValidationReport& v);
nlohmann::json OptionsToJson(const SynthesisOptions& o);

/// "zero", a report.json path, or polynomials separated by ';'.
std::vector<Polynomial> LoadController(const std::string& spec,
                                       const ReachAvoidProblem& p);

}  // namespace reachsynth::cli
