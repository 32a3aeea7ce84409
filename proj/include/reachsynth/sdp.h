#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace reachsynth {

/// One LMI block: sum_i y_i A_i - A_0 >= 0. Diagonal blocks carry only
/// diagonal entries (exported with a negative size in SDPA files).
struct SdpBlock {
  int size = 0;
  bool diagonal = false;
  Eigen::MatrixXd constant;  // A_0
  /// (variable index, A_i) sorted by index; absent variables have A_i = 0.
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;
};

/// minimize c^T y  subject to  F_k(y) = sum_i y_i A_i^k - A_0^k >= 0.
struct SdpProblem {
  int n_vars = 0;
  Eigen::VectorXd objective;
  std::vector<SdpBlock> blocks;

  int total_dimension() const;
  Eigen::MatrixXd BlockValue(int block, const Eigen::VectorXd& y) const;
  /// Throws std::invalid_argument on asymmetric data, bad sizes or indices.
  void Validate() const;
};

enum class SdpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kMaxIter,
  kNumericalFailure,
};

const char* ToString(SdpStatus status);

struct SdpOptions {
  double gap_tol = 1e-7;
  double feas_tol = 1e-7;
  int max_iter = 200;
  bool trace = false;
};

struct SdpIterate {
  int iteration = 0;
  double primal_objective = 0;
  double dual_objective = 0;
  double primal_infeasibility = 0;
  double dual_infeasibility = 0;
  double mu = 0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalFailure;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> dual;  // X per block
  double primal_objective = 0;        // c^T y
  double dual_objective = 0;          // A_0 . X
  double duality_gap = 0;             // relative
  /// max(-lambda_min(F_k(y))) over blocks, and the dual equality residual.
  double max_constraint_violation = 0;
  int iterations = 0;
  std::vector<SdpIterate> trace;
};

/// Infeasible-start primal-dual path following (HKM search direction,
/// Mehrotra predictor-corrector, dense Cholesky on the Schur complement).
/// Deterministic for identical inputs.
SdpSolution SolveSdp(const SdpProblem& problem, const SdpOptions& options = {});

/// SDPA sparse format with 17 significant digits.
void ExportSdpa(const SdpProblem& problem, const std::string& path);
std::string FormatSdpa(const SdpProblem& problem);
SdpProblem ImportSdpa(const std::string& path);
SdpProblem ParseSdpa(const std::string& text);

}  // namespace reachsynth
