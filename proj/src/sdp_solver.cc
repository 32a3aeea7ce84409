#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachsynth/sdp.h"

namespace reachsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* ToString(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kUnbounded: return "unbounded";
    case SdpStatus::kMaxIter: return "max_iter";
    case SdpStatus::kNumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

int SdpProblem::total_dimension() const {
  int total = 0;
  for (const auto& b : blocks) total += b.size;
  return total;
}

MatrixXd SdpProblem::BlockValue(int block, const VectorXd& y) const {
  const SdpBlock& b = blocks.at(block);
  MatrixXd f = -b.constant;
  for (const auto& [i, a] : b.terms) f += y(i) * a;
  return f;
}

void SdpProblem::Validate() const {
  if (objective.size() != n_vars) {
    throw std::invalid_argument("SdpProblem: objective length != n_vars");
  }
  for (const auto& b : blocks) {
    if (b.size <= 0) throw std::invalid_argument("SdpProblem: block size <= 0");
    auto check = [&](const MatrixXd& m) {
      if (m.rows() != b.size || m.cols() != b.size) {
        throw std::invalid_argument("SdpProblem: matrix shape != block size");
      }
      const double scale = 1.0 + m.cwiseAbs().maxCoeff();
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("SdpProblem: asymmetric block matrix");
      }
      if (b.diagonal) {
        MatrixXd off = m;
        off.diagonal().setZero();
        if (off.cwiseAbs().maxCoeff() > 0) {
          throw std::invalid_argument(
              "SdpProblem: off-diagonal entry in diagonal block");
        }
      }
    };
    check(b.constant);
    int last = -1;
    for (const auto& [i, a] : b.terms) {
      if (i <= last || i >= n_vars) {
        throw std::invalid_argument("SdpProblem: bad variable index in block");
      }
      last = i;
      check(a);
    }
  }
}

namespace {

// Dense blocks store k x k matrices; diagonal blocks store k x 1 vectors.
// Elementwise inner products then work uniformly for both.
struct WorkBlock {
  bool diag = false;
  int k = 0;
  MatrixXd a0;
  std::vector<int> vars;
  std::vector<MatrixXd> a;
};

double Inner(const MatrixXd& p, const MatrixXd& q) {
  return (p.array() * q.array()).sum();
}

MatrixXd Identity(const WorkBlock& b, double scale) {
  return b.diag ? MatrixXd::Constant(b.k, 1, scale)
                : MatrixXd(scale * MatrixXd::Identity(b.k, b.k));
}

bool Inverse(const WorkBlock& b, const MatrixXd& m, MatrixXd* inv) {
  if (b.diag) {
    if ((m.array() <= 0).any()) return false;
    *inv = m.cwiseInverse();
    return true;
  }
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return false;
  *inv = llt.solve(MatrixXd::Identity(b.k, b.k));
  *inv = 0.5 * (*inv + inv->transpose());
  return true;
}

// X A S^{-1} (dense) or x .* a ./ s (diagonal).
MatrixXd Sandwich(const WorkBlock& b, const MatrixXd& x, const MatrixXd& a,
                  const MatrixXd& sinv) {
  if (b.diag) return (x.array() * a.array() * sinv.array()).matrix();
  return x * a * sinv;
}

MatrixXd Sym(const WorkBlock& b, const MatrixXd& m) {
  if (b.diag) return m;
  return 0.5 * (m + m.transpose());
}

// Largest alpha with m + alpha d >= 0 (infinity when unrestricted).
double MaxStep(const WorkBlock& b, const MatrixXd& m, const MatrixXd& d) {
  double min_ratio = 0;  // most negative eigenvalue of m^{-1/2} d m^{-1/2}
  if (b.diag) {
    for (int p = 0; p < b.k; ++p) {
      if (d(p, 0) < 0) min_ratio = std::min(min_ratio, d(p, 0) / m(p, 0));
    }
  } else {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return 0.0;
    const MatrixXd l_inv =
        llt.matrixL().solve(MatrixXd::Identity(b.k, b.k));
    MatrixXd scaled = l_inv * d * l_inv.transpose();
    scaled = 0.5 * (scaled + scaled.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(scaled,
                                               Eigen::EigenvaluesOnly);
    min_ratio = std::min(0.0, es.eigenvalues()(0));
  }
  return min_ratio < 0 ? -1.0 / min_ratio
                       : std::numeric_limits<double>::infinity();
}

double MinEigenvalue(const WorkBlock& b, const MatrixXd& m) {
  if (b.diag) return m.minCoeff();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()),
                                             Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::vector<WorkBlock> ToWork(const SdpProblem& p) {
  std::vector<WorkBlock> out;
  for (const auto& b : p.blocks) {
    WorkBlock w;
    w.diag = b.diagonal;
    w.k = b.size;
    w.a0 = b.diagonal ? MatrixXd(b.constant.diagonal()) : b.constant;
    for (const auto& [i, a] : b.terms) {
      w.vars.push_back(i);
      w.a.push_back(b.diagonal ? MatrixXd(a.diagonal()) : a);
    }
    out.push_back(std::move(w));
  }
  return out;
}

using BlockVec = std::vector<MatrixXd>;

double InnerAll(const BlockVec& p, const BlockVec& q) {
  double s = 0;
  for (std::size_t k = 0; k < p.size(); ++k) s += Inner(p[k], q[k]);
  return s;
}

// `scale` is the factor the objective was divided by; the duality gap is
// measured in the original units.
SdpSolution SolveScaled(const SdpProblem& problem, const SdpOptions& options,
                        double scale) {
  const int m = problem.n_vars;
  const VectorXd& c = problem.objective;
  std::vector<WorkBlock> blocks = ToWork(problem);
  const int nb = static_cast<int>(blocks.size());

  SdpSolution sol;
  sol.y = VectorXd::Zero(m);

  auto eval_f = [&](const VectorXd& y) {
    BlockVec f(nb);
    for (int k = 0; k < nb; ++k) {
      f[k] = -blocks[k].a0;
      for (std::size_t t = 0; t < blocks[k].vars.size(); ++t) {
        f[k] += y(blocks[k].vars[t]) * blocks[k].a[t];
      }
    }
    return f;
  };
  auto apply_adjoint = [&](const BlockVec& x) {
    VectorXd r = VectorXd::Zero(m);
    for (int k = 0; k < nb; ++k) {
      for (std::size_t t = 0; t < blocks[k].vars.size(); ++t) {
        r(blocks[k].vars[t]) += Inner(blocks[k].a[t], x[k]);
      }
    }
    return r;
  };
  auto finish = [&](const BlockVec& x, const BlockVec& /*s*/) {
    const BlockVec f = eval_f(sol.y);
    double viol = 0;
    for (int k = 0; k < nb; ++k) {
      viol = std::max(viol, -MinEigenvalue(blocks[k], f[k]));
    }
    const VectorXd rd = c - apply_adjoint(x);
    sol.max_constraint_violation =
        std::max(viol, rd.size() ? rd.cwiseAbs().maxCoeff() : 0.0);
    sol.dual.clear();
    for (int k = 0; k < nb; ++k) {
      sol.dual.push_back(blocks[k].diag ? MatrixXd(x[k].col(0).asDiagonal())
                                        : x[k]);
    }
  };

  if (nb == 0) {
    sol.status = c.isZero() ? SdpStatus::kOptimal : SdpStatus::kUnbounded;
    return sol;
  }

  if (m == 0) {
    // Nothing to optimise: feasibility of -A_0 decides.
    const BlockVec f = eval_f(sol.y);
    double min_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nb; ++k) {
      min_eig = std::min(min_eig, MinEigenvalue(blocks[k], f[k]));
    }
    sol.status = min_eig >= -options.feas_tol ? SdpStatus::kOptimal
                                              : SdpStatus::kInfeasible;
    sol.max_constraint_violation = std::max(0.0, -min_eig);
    BlockVec zero(nb);
    for (int k = 0; k < nb; ++k) zero[k] = Identity(blocks[k], 0.0);
    finish(zero, zero);
    return sol;
  }

  double max_abs = 0;
  double a0_norm = 0;
  for (const auto& b : blocks) {
    max_abs = std::max(max_abs, b.a0.cwiseAbs().maxCoeff());
    a0_norm += b.a0.squaredNorm();
    for (const auto& a : b.a) max_abs = std::max(max_abs, a.cwiseAbs().maxCoeff());
  }
  a0_norm = std::sqrt(a0_norm);
  const double c_norm = c.norm();
  const double rho = 1.0 + max_abs;

  int total_dim = 0;
  for (const auto& b : blocks) total_dim += b.k;

  VectorXd y = VectorXd::Zero(m);
  BlockVec x(nb), s(nb);
  for (int k = 0; k < nb; ++k) {
    x[k] = Identity(blocks[k], rho);
    s[k] = Identity(blocks[k], rho);
  }

  constexpr double kStepFraction = 0.95;
  int stall_count = 0;
  double prev_x_norm = 0;

  for (int iter = 0;; ++iter) {
    const BlockVec f = eval_f(y);
    BlockVec rp(nb);
    double rp_norm = 0;
    for (int k = 0; k < nb; ++k) {
      rp[k] = f[k] - s[k];
      rp_norm += rp[k].squaredNorm();
    }
    rp_norm = std::sqrt(rp_norm);
    const VectorXd ax = apply_adjoint(x);
    const VectorXd rd = c - ax;
    const double pobj = c.dot(y);
    double dobj = 0;
    for (int k = 0; k < nb; ++k) dobj += Inner(blocks[k].a0, x[k]);
    const double sx = InnerAll(s, x);
    const double mu = sx / total_dim;
    const double pinf = rp_norm / (1.0 + a0_norm);
    const double dinf = rd.norm() / (1.0 + c_norm);
    const double gap = scale * std::max(std::abs(pobj - dobj), sx) /
                       std::max(1.0, 0.5 * scale * (std::abs(pobj) + std::abs(dobj)));

    sol.y = y;
    sol.primal_objective = pobj;
    sol.dual_objective = dobj;
    sol.duality_gap = gap;
    sol.iterations = iter;
    if (options.trace) sol.trace.push_back({iter, pobj, dobj, pinf, dinf, mu});

    if (pinf <= options.feas_tol && dinf <= options.feas_tol &&
        gap <= options.gap_tol) {
      sol.status = SdpStatus::kOptimal;
      finish(x, s);
      return sol;
    }

    // Dual ray: A(X) ~ 0 with A_0 . X > 0 certifies an empty primal set.
    double x_norm = 0;
    for (int k = 0; k < nb; ++k) x_norm += x[k].squaredNorm();
    x_norm = std::sqrt(x_norm);
    if (dobj > 0 && x_norm > 1e8 && ax.norm() / dobj < 1e-6) {
      sol.status = SdpStatus::kInfeasible;
      finish(x, s);
      return sol;
    }
    // Primal ray: y diverging with decreasing objective and small residual.
    if (y.norm() > 1e10 && pinf <= 1e-4 && pobj < 0) {
      sol.status = SdpStatus::kUnbounded;
      finish(x, s);
      return sol;
    }
    if (std::max(pinf, dinf) > 1e-4 && x_norm > prev_x_norm) {
      if (++stall_count >= 30 && x_norm > 1e6 * rho) {
        sol.status = SdpStatus::kInfeasible;
        finish(x, s);
        return sol;
      }
    } else {
      stall_count = 0;
    }
    prev_x_norm = x_norm;

    if (iter >= options.max_iter) {
      sol.status = SdpStatus::kMaxIter;
      finish(x, s);
      return sol;
    }

    BlockVec sinv(nb);
    for (int k = 0; k < nb; ++k) {
      if (!Inverse(blocks[k], s[k], &sinv[k])) {
        sol.status = SdpStatus::kNumericalFailure;
        finish(x, s);
        return sol;
      }
    }

    // Schur complement B_ij = A_i . (X A_j S^{-1}).
    MatrixXd schur = MatrixXd::Zero(m, m);
    for (int k = 0; k < nb; ++k) {
      const WorkBlock& b = blocks[k];
      for (std::size_t ta = 0; ta < b.vars.size(); ++ta) {
        const MatrixXd p = Sandwich(b, x[k], b.a[ta], sinv[k]);
        for (std::size_t tb = ta; tb < b.vars.size(); ++tb) {
          schur(b.vars[ta], b.vars[tb]) += Inner(b.a[tb], p);
        }
      }
    }
    schur = schur.selfadjointView<Eigen::Upper>();
    Eigen::LLT<MatrixXd> chol(schur);
    if (chol.info() != Eigen::Success) {
      const double ridge = 1e-14 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      schur.diagonal().array() += ridge;
      chol.compute(schur);
      if (chol.info() != Eigen::Success) {
        sol.status = SdpStatus::kNumericalFailure;
        finish(x, s);
        return sol;
      }
    }

    auto direction = [&](double tau, const BlockVec* corr, VectorXd* dy,
                         BlockVec* ds, BlockVec* dx) {
      VectorXd rhs = -c;
      BlockVec mtx(nb);
      for (int k = 0; k < nb; ++k) {
        const WorkBlock& b = blocks[k];
        mtx[k] = tau * sinv[k] - Sandwich(b, x[k], rp[k], sinv[k]);
        if (corr) mtx[k] -= (*corr)[k];
        for (std::size_t t = 0; t < b.vars.size(); ++t) {
          rhs(b.vars[t]) += Inner(b.a[t], mtx[k]);
        }
      }
      *dy = chol.solve(rhs);
      // Refine against the block operator; the assembled Schur matrix loses
      // accuracy as mu goes to zero. Stop once the residual stops shrinking.
      double prev = std::numeric_limits<double>::infinity();
      for (int pass = 0; pass < 10; ++pass) {
        VectorXd e = rhs;
        for (int k = 0; k < nb; ++k) {
          const WorkBlock& b = blocks[k];
          MatrixXd ady = MatrixXd::Zero(b.a0.rows(), b.a0.cols());
          for (std::size_t t = 0; t < b.vars.size(); ++t) {
            ady += (*dy)(b.vars[t]) * b.a[t];
          }
          const MatrixXd p = Sandwich(b, x[k], ady, sinv[k]);
          for (std::size_t t = 0; t < b.vars.size(); ++t) {
            e(b.vars[t]) -= Inner(b.a[t], p);
          }
        }
        const double err = e.norm();
        if (!(err < 0.5 * prev) || err <= 1e-15 * rhs.norm()) break;
        prev = err;
        *dy += chol.solve(e);
      }
      ds->resize(nb);
      dx->resize(nb);
      for (int k = 0; k < nb; ++k) {
        const WorkBlock& b = blocks[k];
        MatrixXd d = rp[k];
        for (std::size_t t = 0; t < b.vars.size(); ++t) {
          d += (*dy)(b.vars[t]) * b.a[t];
        }
        (*ds)[k] = d;
        MatrixXd xdx = tau * sinv[k] - x[k] - Sandwich(b, x[k], d, sinv[k]);
        if (corr) xdx -= (*corr)[k];
        (*dx)[k] = Sym(b, xdx);
      }
    };
    auto step_lengths = [&](const BlockVec& ds, const BlockVec& dx) {
      double ap = std::numeric_limits<double>::infinity();
      double ad = ap;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, MaxStep(blocks[k], s[k], ds[k]));
        ad = std::min(ad, MaxStep(blocks[k], x[k], dx[k]));
      }
      return std::pair{std::min(1.0, kStepFraction * ap),
                       std::min(1.0, kStepFraction * ad)};
    };

    VectorXd dy_a;
    BlockVec ds_a, dx_a;
    direction(0.0, nullptr, &dy_a, &ds_a, &dx_a);
    const auto [ap_a, ad_a] = step_lengths(ds_a, dx_a);
    double mu_aff = 0;
    for (int k = 0; k < nb; ++k) {
      mu_aff += Inner(s[k] + ap_a * ds_a[k], x[k] + ad_a * dx_a[k]);
    }
    mu_aff /= total_dim;
    const double sigma =
        std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    BlockVec corr(nb);
    for (int k = 0; k < nb; ++k) {
      const WorkBlock& b = blocks[k];
      corr[k] = b.diag ? MatrixXd((dx_a[k].array() * ds_a[k].array() *
                                   sinv[k].array()).matrix())
                       : MatrixXd(dx_a[k] * ds_a[k] * sinv[k]);
    }
    VectorXd dy;
    BlockVec ds, dx;
    direction(sigma * mu, &corr, &dy, &ds, &dx);
    auto [ap, ad] = step_lengths(ds, dx);
    if (!std::isfinite(dy.norm())) {
      sol.status = SdpStatus::kNumericalFailure;
      finish(x, s);
      return sol;
    }

    y += ap * dy;
    for (int k = 0; k < nb; ++k) {
      s[k] += ap * ds[k];
      x[k] += ad * dx[k];
      s[k] = Sym(blocks[k], s[k]);
    }
  }
}

}  // namespace

SdpSolution SolveSdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.Validate();
  // Solve with the cost divided by its largest entry; X and the objectives
  // are mapped back below.
  const int m = problem.n_vars;
  SdpProblem scaled = problem;
  const double scale =
      m ? std::max(1.0, problem.objective.cwiseAbs().maxCoeff()) : 1.0;
  scaled.objective /= scale;

  SdpSolution sol = SolveScaled(scaled, options, scale);
  sol.primal_objective *= scale;
  sol.dual_objective *= scale;
  for (auto& x : sol.dual) x *= scale;
  for (auto& t : sol.trace) {
    t.primal_objective *= scale;
    t.dual_objective *= scale;
    t.mu *= scale;
  }
  // Residuals against the original data.
  sol.max_constraint_violation = 0;
  if (!sol.dual.empty() && m > 0) {
    VectorXd rd = problem.objective;
    for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
      for (const auto& [i, a] : problem.blocks[k].terms) {
        rd(i) -= (a.array() * sol.dual[k].array()).sum();
      }
    }
    sol.max_constraint_violation = rd.cwiseAbs().maxCoeff();
  }
  for (std::size_t k = 0; k < problem.blocks.size(); ++k) {
    const MatrixXd f = problem.BlockValue(static_cast<int>(k), sol.y);
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(f, Eigen::EigenvaluesOnly)
            .eigenvalues()
            .minCoeff();
    sol.max_constraint_violation = std::max(sol.max_constraint_violation, -min_eig);
  }
  return sol;
}

}  // namespace reachsynth
