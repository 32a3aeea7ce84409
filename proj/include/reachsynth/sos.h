#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "reachsynth/lie.h"
#include "reachsynth/problem.h"
#include "reachsynth/sdp.h"

namespace reachsynth {

/// {x | g_i(x) >= 0 for all i}; no generators means all of R^n.
struct SemialgebraicRegion {
  std::vector<Polynomial> generators;
};

/// closure(C \ X_r) = {h >= 0, h_r >= 0}.
SemialgebraicRegion SafeMinusTarget(const ReachAvoidProblem& p);
/// closure((C \ D) \ X_r) = {h >= 0, eps0 - h >= 0, h_r >= 0}.
SemialgebraicRegion BandMinusTarget(const ReachAvoidProblem& p, double eps0);
/// closure(C) = {h >= 0}.
SemialgebraicRegion SafeClosure(const ReachAvoidProblem& p);

/// ||u_c - k||^2 = c^T M c - 2 m^T c + constant, with M block diagonal over
/// output channels (every block equals `channel_gram`).
struct QuadraticObjective {
  int n_outputs = 0;
  Eigen::MatrixXd channel_gram;  // basis_size x basis_size
  Eigen::VectorXd linear;        // m, one entry per template coefficient
  double constant = 0;

  int basis_size() const { return static_cast<int>(channel_gram.rows()); }
  double Evaluate(const std::vector<double>& c) const;
};

/// Midpoint quadrature of the L2 moments over {h > 0} inside `box`.
/// Throws std::domain_error when no grid point has h > 0.
QuadraticObjective MomentObjective(const ControllerTemplate& tmpl,
                                   const std::vector<Polynomial>& k,
                                   const Polynomial& h,
                                   const std::vector<Interval>& box,
                                   int resolution);

/// Decoded certificate of one nonnegativity constraint:
/// expr - sum_i s_i g_i = b^T Q b.
struct SosCertificate {
  std::string label;
  Polynomial expression;  // expr at the solution
  std::vector<Polynomial> generators;
  std::vector<Polynomial> multipliers;
  std::vector<Eigen::MatrixXd> multiplier_grams;
  Eigen::MatrixXd gram;
  std::vector<Monomial> gram_basis;

  /// expr - sum_i s_i g_i.
  Polynomial Residual() const;
  /// Smallest eigenvalue over the main and multiplier Gram matrices.
  double MinGramEigenvalue() const;
};

struct SosSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  std::vector<double> values;  // program variables
  double objective = 0;        // linear costs + epigraph value
  SdpSolution sdp;
  std::vector<SosCertificate> certificates;

  double value(int var) const { return values.at(var); }
};

/// Scalar decision variables, polynomial nonnegativity constraints on
/// semialgebraic regions, and a cost made of linear terms plus an optional
/// L2 norm term. Lowered to one SDP in LMI form.
class SosProgram {
 public:
  SosProgram(int n_state_vars, int mult_degree = 2, int max_gram_degree = 6);

  int NewVariable(const std::string& name);
  /// Returns the index of the first of `count` consecutive variables.
  int NewVariables(int count, const std::string& prefix);
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& variable_name(int i) const { return names_.at(i); }

  /// sum_i a_i y_i + b >= 0.
  void AddLinearInequality(const std::map<int, double>& a, double b);
  void AddLowerBound(int var, double lo);
  void AddUpperBound(int var, double hi);

  /// expr(x; y) >= 0 on `region`, via expr - sum s_i g_i in SOS with SOS
  /// multipliers s_i of degree mult_degree (rounded up to even).
  void AddNonnegative(const AffineInCoefficients& expr,
                      const SemialgebraicRegion& region,
                      const std::string& label);

  void AddLinearCost(int var, double weight);
  /// Adds t to the cost with t >= ||u_c - k||, c the template coefficients
  /// stored in variables [first_var, first_var + objective size).
  void SetNormCost(const QuadraticObjective& objective, int first_var);

  int mult_degree() const { return mult_degree_; }

  /// Lowered SDP with the coefficient-matching equalities eliminated.
  struct Lowering {
    SdpProblem sdp;
    double objective_offset = 0;
    /// z = z0 + basis * eta maps SDP variables back to the full vector z of
    /// program variables followed by Gram entries.
    Eigen::VectorXd z0;
    Eigen::MatrixXd basis;
    bool unbounded_direction = false;
    std::vector<std::string> block_labels;
  };
  Lowering Lower() const;

  SosSolution Solve(const SdpOptions& options = {}) const;

 private:
  struct Constraint {
    AffineInCoefficients expr;
    SemialgebraicRegion region;
    std::string label;
  };
  struct Layout;
  Layout MakeLayout() const;

  int n_state_vars_;
  int mult_degree_;
  int max_gram_degree_;
  std::vector<std::string> names_;
  std::vector<std::pair<std::map<int, double>, double>> linear_;
  std::vector<Constraint> constraints_;
  std::map<int, double> costs_;
  bool has_norm_ = false;
  QuadraticObjective norm_;
  int norm_first_var_ = 0;
  int epigraph_var_ = -1;
};

}  // namespace reachsynth
