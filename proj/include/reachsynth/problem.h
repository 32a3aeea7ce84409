#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachsynth/polynomial.h"

namespace reachsynth {

/// Raised for malformed polynomial text or problem files. offset() is the
/// byte offset into the polynomial text (or -1), line() the problem-file
/// line (or -1).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int offset = -1, int line = -1)
      : std::runtime_error(what), offset_(offset), line_(line) {}
  int offset() const { return offset_; }
  int line() const { return line_; }

 private:
  int offset_;
  int line_;
};

/// dx = (f(x) + g(x) u) dt [+ sigma(x) dW].
struct AffineControlSystem {
  int n = 0;
  int m = 0;
  std::vector<Polynomial> f;               // n
  std::vector<std::vector<Polynomial>> g;  // n x m
  std::optional<std::vector<std::vector<Polynomial>>> sigma;  // n x k

  bool stochastic() const { return sigma.has_value(); }
  int noise_dim() const {
    return sigma && !sigma->empty() ? static_cast<int>((*sigma)[0].size()) : 0;
  }
};

/// Closed interval for one input channel; nullopt bounds mean "free".
struct InputRange {
  std::optional<double> lo;
  std::optional<double> hi;
  bool free() const { return !lo && !hi; }
};

struct Interval {
  double lo = -1.5;
  double hi = 1.5;
};

struct ReachAvoidProblem {
  std::vector<std::string> state_names;
  std::vector<std::string> input_names;
  AffineControlSystem system;
  Polynomial h;    // safe set {h > 0}
  Polynomial h_r;  // target set {h_r < 0}
  std::vector<InputRange> inputs;
  std::vector<Polynomial> nominal;  // k(x), m entries
  int template_degree = 1;
  std::vector<Interval> bounding_box;

  int n() const { return system.n; }
  int m() const { return system.m; }
};

/// u_j(x) = sum_b c[j * basis_size + b] * basis[b].
class ControllerTemplate {
 public:
  ControllerTemplate(int n_vars, int n_outputs, int degree);

  int n_vars() const { return n_vars_; }
  int n_outputs() const { return n_outputs_; }
  int degree() const { return degree_; }
  const std::vector<Monomial>& basis() const { return basis_; }
  int basis_size() const { return static_cast<int>(basis_.size()); }
  int num_coefficients() const { return n_outputs_ * basis_size(); }
  int index(int output, int basis_index) const {
    return output * basis_size() + basis_index;
  }

  std::vector<Polynomial> Instantiate(const std::vector<double>& coeffs) const;
  /// Coefficients of polynomials lying in the template span; throws if a
  /// term falls outside it.
  std::vector<double> CoefficientsOf(const std::vector<Polynomial>& u) const;

 private:
  int n_vars_;
  int n_outputs_;
  int degree_;
  std::vector<Monomial> basis_;
};

Polynomial ParsePolynomial(const std::string& text,
                           const std::vector<std::string>& variable_names);

ReachAvoidProblem ParseProblem(const std::string& text);
ReachAvoidProblem LoadProblem(const std::string& path);

/// Canonical text of a problem in the .ra format (round-trips through
/// ParseProblem).
std::string FormatProblem(const ReachAvoidProblem& problem);

struct Diagnostic {
  std::string check;
  std::string message;
  bool verified = true;  // false for checks that are only heuristic
};

/// Sampled checks of the standing assumptions on the safe/target sets.
/// Returns one entry per failed (or unverifiable) check.
std::vector<Diagnostic> ValidateAssumptions(const ReachAvoidProblem& problem,
                                            int resolution = 201);

/// True if any diagnostic describes a verified failure.
bool HasFailure(const std::vector<Diagnostic>& diagnostics);

}  // namespace reachsynth
