#include "reachsynth/sos.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "reachsynth/grid.h"
#include "reachsynth/kernels.h"

namespace reachsynth {

using Eigen::MatrixXd;
using Eigen::VectorXd;

SemialgebraicRegion SafeMinusTarget(const ReachAvoidProblem& p) {
  return {{p.h, p.h_r}};
}

SemialgebraicRegion BandMinusTarget(const ReachAvoidProblem& p, double eps0) {
  return {{p.h, Polynomial::Constant(p.n(), eps0) - p.h, p.h_r}};
}

SemialgebraicRegion SafeClosure(const ReachAvoidProblem& p) { return {{p.h}}; }

double QuadraticObjective::Evaluate(const std::vector<double>& c) const {
  const int b = basis_size();
  if (static_cast<int>(c.size()) != n_outputs * b) {
    throw std::invalid_argument("QuadraticObjective: wrong coefficient count");
  }
  double v = constant;
  for (int j = 0; j < n_outputs; ++j) {
    const Eigen::Map<const VectorXd> cj(c.data() + j * b, b);
    v += cj.dot(channel_gram * cj) - 2.0 * linear.segment(j * b, b).dot(cj);
  }
  return v;
}

QuadraticObjective MomentObjective(const ControllerTemplate& tmpl,
                                   const std::vector<Polynomial>& k,
                                   const Polynomial& h,
                                   const std::vector<Interval>& box,
                                   int resolution) {
  const int n = tmpl.n_vars();
  const int m = tmpl.n_outputs();
  const int b = tmpl.basis_size();
  if (static_cast<int>(k.size()) != m || static_cast<int>(box.size()) != n) {
    throw std::invalid_argument("MomentObjective: dimension mismatch");
  }
  std::vector<CompiledPolynomial> phi;
  for (const auto& mono : tmpl.basis()) {
    phi.emplace_back(Polynomial::FromMonomial(mono));
  }
  for (const auto& kj : k) phi.emplace_back(kj);
  const BoxGrid grid(box, PointsPerAxisForBudget(n, resolution),
                     BoxGrid::Kind::kMidpoint);
  const MatrixXd g = MaskedGramParallel(grid, CompiledPolynomial(h), phi);
  if (g(0, 0) <= 0) {
    throw std::domain_error("MomentObjective: no quadrature point with h > 0");
  }
  QuadraticObjective q;
  q.n_outputs = m;
  q.channel_gram = g.topLeftCorner(b, b);
  q.linear = VectorXd::Zero(m * b);
  for (int j = 0; j < m; ++j) {
    q.linear.segment(j * b, b) = g.block(0, b + j, b, 1);
    q.constant += g(b + j, b + j);
  }
  return q;
}

Polynomial SosCertificate::Residual() const {
  Polynomial r = expression;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    r -= multipliers[i] * generators[i];
  }
  return r;
}

double SosCertificate::MinGramEigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  auto update = [&](const MatrixXd& q) {
    if (q.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(q, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues()(0));
  };
  update(gram);
  for (const auto& q : multiplier_grams) update(q);
  return lo;
}

SosProgram::SosProgram(int n_state_vars, int mult_degree, int max_gram_degree)
    : n_state_vars_(n_state_vars),
      mult_degree_(mult_degree),
      max_gram_degree_(max_gram_degree) {
  if (n_state_vars < 1 || mult_degree < 0 || max_gram_degree < 0) {
    throw std::invalid_argument("SosProgram: bad configuration");
  }
}

int SosProgram::NewVariable(const std::string& name) {
  names_.push_back(name);
  return num_variables() - 1;
}

int SosProgram::NewVariables(int count, const std::string& prefix) {
  const int first = num_variables();
  for (int i = 0; i < count; ++i) {
    names_.push_back(prefix + "[" + std::to_string(i) + "]");
  }
  return first;
}

void SosProgram::AddLinearInequality(const std::map<int, double>& a, double b) {
  for (const auto& [i, v] : a) {
    if (i < 0 || i >= num_variables()) {
      throw std::out_of_range("SosProgram: unknown variable in inequality");
    }
  }
  linear_.emplace_back(a, b);
}

void SosProgram::AddLowerBound(int var, double lo) {
  AddLinearInequality({{var, 1.0}}, -lo);
}

void SosProgram::AddUpperBound(int var, double hi) {
  AddLinearInequality({{var, -1.0}}, hi);
}

void SosProgram::AddNonnegative(const AffineInCoefficients& expr,
                                const SemialgebraicRegion& region,
                                const std::string& label) {
  if (expr.n_vars() != n_state_vars_) {
    throw std::invalid_argument("SosProgram: expression in wrong ring");
  }
  for (const auto& [i, p] : expr.linear_part) {
    if (i < 0 || i >= num_variables()) {
      throw std::out_of_range("SosProgram: expression uses unknown variable " +
                              std::to_string(i));
    }
  }
  for (const auto& g : region.generators) {
    if (g.n_vars() != n_state_vars_) {
      throw std::invalid_argument("SosProgram: region generator in wrong ring");
    }
  }
  constraints_.push_back({expr, region, label});
}

void SosProgram::AddLinearCost(int var, double weight) {
  if (var < 0 || var >= num_variables()) {
    throw std::out_of_range("SosProgram: unknown cost variable");
  }
  costs_[var] += weight;
}

void SosProgram::SetNormCost(const QuadraticObjective& objective, int first_var) {
  const int size = objective.n_outputs * objective.basis_size();
  if (first_var < 0 || first_var + size > num_variables()) {
    throw std::out_of_range("SosProgram: norm cost variables out of range");
  }
  if (has_norm_) throw std::logic_error("SosProgram: norm cost already set");
  has_norm_ = true;
  norm_ = objective;
  norm_first_var_ = first_var;
  epigraph_var_ = NewVariable("norm_epigraph");
  costs_[epigraph_var_] += 1.0;
}

namespace {

struct GramLayout {
  std::vector<Monomial> basis;
  int offset = 0;  // index of the first upper-triangular entry in z
  int size() const { return static_cast<int>(basis.size()); }
  int entries() const { return size() * (size() + 1) / 2; }
  int index(int a, int b) const {
    if (a > b) std::swap(a, b);
    return offset + a * size() - a * (a - 1) / 2 + (b - a);
  }
};

struct ConstraintLayout {
  GramLayout main;
  std::vector<GramLayout> multipliers;
};

struct Entry {
  int z;
  int row;
  int col;
  double value;
};

struct BlockData {
  int size = 0;
  bool diagonal = false;
  MatrixXd constant;
  std::vector<Entry> entries;
  std::string label;
};

int CeilHalf(int d) { return (d + 1) / 2; }

MatrixXd GramFromZ(const GramLayout& g, const VectorXd& z) {
  MatrixXd q(g.size(), g.size());
  for (int a = 0; a < g.size(); ++a) {
    for (int b = a; b < g.size(); ++b) q(a, b) = q(b, a) = z(g.index(a, b));
  }
  return q;
}

Polynomial GramPolynomial(int n, const GramLayout& g, const MatrixXd& q) {
  Polynomial p(n);
  for (int a = 0; a < g.size(); ++a) {
    for (int b = 0; b < g.size(); ++b) p.AddTerm(g.basis[a] * g.basis[b], q(a, b));
  }
  return p;
}

// Solves E z = f as z = z0 + N xi by Gauss-Jordan elimination. Columns are
// tried as pivots in the order given, so the columns listed last (program
// variables) stay free whenever possible and keep a sparse basis column.
bool EliminateEqualities(MatrixXd a, VectorXd f, const std::vector<int>& order,
                         VectorXd* z0, MatrixXd* basis) {
  const int rows = static_cast<int>(a.rows());
  const int nz = static_cast<int>(a.cols());
  const double tol = 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff());
  std::vector<int> pivot_col;
  std::vector<char> is_pivot(nz, 0);
  int r = 0;
  for (const int c : order) {
    if (r == rows) break;
    Eigen::Index best;
    const double mag = a.col(c).segment(r, rows - r).cwiseAbs().maxCoeff(&best);
    if (mag <= tol) continue;
    best += r;
    a.row(r).swap(a.row(best));
    std::swap(f(r), f(best));
    const double inv = 1.0 / a(r, c);
    a.row(r) *= inv;
    f(r) *= inv;
    a(r, c) = 1.0;
    for (int i = 0; i < rows; ++i) {
      if (i == r || a(i, c) == 0.0) continue;
      const double m = a(i, c);
      a.row(i) -= m * a.row(r);
      f(i) -= m * f(r);
      a(i, c) = 0.0;
    }
    pivot_col.push_back(c);
    is_pivot[c] = 1;
    ++r;
  }
  const double f_scale = 1.0 + f.cwiseAbs().maxCoeff();
  for (int i = r; i < rows; ++i) {
    if (std::abs(f(i)) > 1e-8 * f_scale) return false;
  }
  *z0 = VectorXd::Zero(nz);
  for (int i = 0; i < r; ++i) (*z0)(pivot_col[i]) = f(i);
  std::vector<int> free_cols;
  for (int c = 0; c < nz; ++c) {
    if (!is_pivot[c]) free_cols.push_back(c);
  }
  *basis = MatrixXd::Zero(nz, free_cols.size());
  for (std::size_t k = 0; k < free_cols.size(); ++k) {
    const int c = free_cols[k];
    (*basis)(c, k) = 1.0;
    for (int i = 0; i < r; ++i) (*basis)(pivot_col[i], k) = -a(i, c);
  }
  return true;
}

}  // namespace

struct SosProgram::Layout {
  int nz = 0;
  std::vector<ConstraintLayout> constraints;
};

SosProgram::Layout SosProgram::MakeLayout() const {
  Layout layout;
  int offset = num_variables();
  const int half_mult = CeilHalf(mult_degree_);
  for (const Constraint& con : constraints_) {
    int d = con.expr.degree();
    for (const auto& g : con.region.generators) {
      d = std::max(d, 2 * half_mult + g.degree());
    }
    const int half = CeilHalf(d);
    if (half > max_gram_degree_) {
      throw std::invalid_argument(
          "SosProgram: constraint '" + con.label + "' needs Gram degree " +
          std::to_string(half) + " > cap " + std::to_string(max_gram_degree_));
    }
    ConstraintLayout cl;
    cl.main.basis = MonomialBasis(n_state_vars_, half);
    cl.main.offset = offset;
    offset += cl.main.entries();
    for (std::size_t i = 0; i < con.region.generators.size(); ++i) {
      GramLayout gl;
      gl.basis = MonomialBasis(n_state_vars_, half_mult);
      gl.offset = offset;
      offset += gl.entries();
      cl.multipliers.push_back(std::move(gl));
    }
    layout.constraints.push_back(std::move(cl));
  }
  layout.nz = offset;
  return layout;
}

SosProgram::Lowering SosProgram::Lower() const {
  const Layout layout = MakeLayout();
  const int nz = layout.nz;

  // Coefficient matching: expr - sum s_i g_i - b^T Q b = 0, monomial-wise.
  std::vector<Entry> eq;  // z = column
  std::vector<double> rhs;
  int n_rows = 0;
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    const Constraint& con = constraints_[c];
    const ConstraintLayout& cl = layout.constraints[c];
    std::map<Monomial, int> rows;
    auto row_of = [&](const Monomial& m) {
      auto [it, inserted] = rows.try_emplace(m, n_rows);
      if (inserted) {
        ++n_rows;
        rhs.push_back(0.0);
      }
      return it->second;
    };
    for (const auto& [m, v] : con.expr.constant_part.terms()) rhs[row_of(m)] -= v;
    for (const auto& [i, p] : con.expr.linear_part) {
      for (const auto& [m, v] : p.terms()) eq.push_back({i, row_of(m), 0, v});
    }
    const GramLayout& g = cl.main;
    for (int a = 0; a < g.size(); ++a) {
      for (int b = a; b < g.size(); ++b) {
        eq.push_back({g.index(a, b), row_of(g.basis[a] * g.basis[b]), 0,
                      a == b ? -1.0 : -2.0});
      }
    }
    for (std::size_t i = 0; i < cl.multipliers.size(); ++i) {
      const GramLayout& s = cl.multipliers[i];
      const Polynomial& gen = con.region.generators[i];
      for (int a = 0; a < s.size(); ++a) {
        for (int b = a; b < s.size(); ++b) {
          const double f = a == b ? -1.0 : -2.0;
          for (const auto& [m, v] : gen.terms()) {
            eq.push_back({s.index(a, b), row_of(m * s.basis[a] * s.basis[b]),
                          0, f * v});
          }
        }
      }
    }
  }

  // LMI blocks in terms of z.
  std::vector<BlockData> blocks;
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    const ConstraintLayout& cl = layout.constraints[c];
    auto gram_block = [&](const GramLayout& g, const std::string& label) {
      BlockData b;
      b.size = g.size();
      b.constant = MatrixXd::Zero(b.size, b.size);
      b.label = label;
      for (int r = 0; r < g.size(); ++r) {
        for (int s = r; s < g.size(); ++s) b.entries.push_back({g.index(r, s), r, s, 1.0});
      }
      blocks.push_back(std::move(b));
    };
    gram_block(cl.main, constraints_[c].label);
    for (std::size_t i = 0; i < cl.multipliers.size(); ++i) {
      gram_block(cl.multipliers[i],
                 constraints_[c].label + "/s" + std::to_string(i));
    }
  }
  if (!linear_.empty()) {
    BlockData b;
    b.size = static_cast<int>(linear_.size());
    b.diagonal = true;
    b.constant = MatrixXd::Zero(b.size, b.size);
    b.label = "scalar";
    for (int r = 0; r < b.size; ++r) {
      b.constant(r, r) = linear_[r].second;
      for (const auto& [i, v] : linear_[r].first) b.entries.push_back({i, r, r, v});
    }
    blocks.push_back(std::move(b));
  }
  if (has_norm_) {
    // t >= ||(R c_j - R^{-T} m_j)_j, sqrt(rest)|| as an arrow LMI.
    const int bsz = norm_.basis_size();
    const int mo = norm_.n_outputs;
    MatrixXd gram = norm_.channel_gram;
    Eigen::LLT<MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      gram.diagonal().array() += 1e-12;
      llt.compute(gram);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("SosProgram: moment matrix Cholesky failed");
      }
    }
    const MatrixXd r = llt.matrixU();
    double rest = norm_.constant;
    std::vector<VectorXd> shift(mo);
    for (int j = 0; j < mo; ++j) {
      shift[j] = llt.matrixL().solve(norm_.linear.segment(j * bsz, bsz));
      rest -= shift[j].squaredNorm();
    }
    BlockData b;
    b.size = mo * bsz + 2;
    b.constant = MatrixXd::Zero(b.size, b.size);
    b.label = "norm";
    for (int i = 0; i < b.size; ++i) b.entries.push_back({epigraph_var_, i, i, 1.0});
    for (int j = 0; j < mo; ++j) {
      for (int a = 0; a < bsz; ++a) {
        const int row = 1 + j * bsz + a;
        b.constant(0, row) = b.constant(row, 0) = -shift[j](a);
        for (int c = a; c < bsz; ++c) {
          if (r(a, c) != 0.0) {
            b.entries.push_back({norm_first_var_ + j * bsz + c, 0, row, r(a, c)});
          }
        }
      }
    }
    b.constant(0, b.size - 1) = b.constant(b.size - 1, 0) =
        std::sqrt(std::max(rest, 0.0));
    blocks.push_back(std::move(b));
  }

  // Program variables with a cost weight above one are solved for in units
  // of 1/weight, so a penalty weight does not spread the dual scales.
  VectorXd zscale = VectorXd::Ones(nz);
  for (const auto& [i, w] : costs_) zscale(i) = 1.0 / std::max(1.0, std::abs(w));
  for (auto& t : eq) t.value *= zscale(t.z);
  for (auto& b : blocks) {
    for (auto& en : b.entries) en.value *= zscale(en.z);
    if (!b.diagonal) continue;
    // Scalar rows are normalised to a unit largest coefficient.
    VectorXd row_max = VectorXd::Zero(b.size);
    for (const auto& en : b.entries) {
      row_max(en.row) = std::max(row_max(en.row), std::abs(en.value));
    }
    for (auto& en : b.entries) en.value /= row_max(en.row);
    for (int r = 0; r < b.size; ++r) {
      if (row_max(r) > 0) b.constant(r, r) /= row_max(r);
    }
  }

  // Eliminate the equalities: z = z0 + N xi.
  Lowering out;
  MatrixXd e = MatrixXd::Zero(n_rows, nz);
  for (const auto& t : eq) e(t.row, t.z) += t.value;
  const VectorXd f = Eigen::Map<const VectorXd>(rhs.data(), n_rows);
  MatrixXd null_basis;
  {
    std::vector<int> order;
    for (int c = num_variables(); c < nz; ++c) order.push_back(c);
    for (int c = 0; c < num_variables(); ++c) order.push_back(c);
    if (!EliminateEqualities(e, f, order, &out.z0, &null_basis)) {
      throw std::runtime_error("SosProgram: inconsistent coefficient matching");
    }
  }

  // Keep only directions that move some block; the rest leave every
  // constraint unchanged and would make the Newton system singular.
  int g_rows = 0;
  for (const auto& b : blocks) g_rows += b.diagonal ? b.size : b.size * (b.size + 1) / 2;
  MatrixXd gmap = MatrixXd::Zero(g_rows, null_basis.cols());
  {
    int base = 0;
    for (const auto& b : blocks) {
      for (const auto& en : b.entries) {
        const int local = b.diagonal ? en.row
                                     : en.row * b.size - en.row * (en.row - 1) / 2 +
                                           (en.col - en.row);
        gmap.row(base + local) += en.value * null_basis.row(en.z);
      }
      base += b.diagonal ? b.size : b.size * (b.size + 1) / 2;
    }
  }
  VectorXd cost_z = VectorXd::Zero(nz);
  for (const auto& [i, w] : costs_) cost_z(i) = w * zscale(i);
  std::vector<int> kept;
  if (gmap.cols() > 0) {
    // Independent columns of the block map; the dropped ones are combinations
    // of the kept ones as far as any block can tell.
    Eigen::ColPivHouseholderQR<MatrixXd> qr(gmap);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    for (int k = 0; k < rank; ++k) kept.push_back(qr.colsPermutation().indices()(k));
    std::sort(kept.begin(), kept.end());
    if (rank < gmap.cols()) {
      // The cost must not change along directions invisible to every block.
      Eigen::BDCSVD<MatrixXd> svd(gmap, Eigen::ComputeFullV);
      const auto& sv = svd.singularValues();
      const double tol = 1e-10 * std::max(1.0, sv(0));
      int svd_rank = 0;
      while (svd_rank < sv.size() && sv(svd_rank) > tol) ++svd_rank;
      const MatrixXd kernel = svd.matrixV().rightCols(gmap.cols() - svd_rank);
      const VectorXd cost_xi = null_basis.transpose() * cost_z;
      out.unbounded_direction =
          (kernel.transpose() * cost_xi).norm() > 1e-9 * (1.0 + cost_xi.norm());
    }
  }
  out.basis = MatrixXd(nz, kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) out.basis.col(k) = null_basis.col(kept[k]);
  const int n_eta = static_cast<int>(out.basis.cols());

  out.sdp.n_vars = n_eta;
  out.sdp.objective = out.basis.transpose() * cost_z;
  // Move z0 along the cost direction so the offset vanishes; a large offset
  // would swamp the relative duality gap.
  if (const double g2 = out.sdp.objective.squaredNorm(); g2 > 0) {
    out.z0 -= out.basis * out.sdp.objective * (cost_z.dot(out.z0) / g2);
  }
  out.objective_offset = cost_z.dot(out.z0);
  for (const auto& b : blocks) {
    SdpBlock sb;
    sb.size = b.size;
    sb.diagonal = b.diagonal;
    MatrixXd value0 = b.constant;
    std::vector<MatrixXd> a(n_eta, MatrixXd::Zero(b.size, b.size));
    for (const auto& en : b.entries) {
      const double v0 = en.value * out.z0(en.z);
      value0(en.row, en.col) += v0;
      if (en.row != en.col) value0(en.col, en.row) += v0;
      for (int i = 0; i < n_eta; ++i) {
        const double v = en.value * out.basis(en.z, i);
        a[i](en.row, en.col) += v;
        if (en.row != en.col) a[i](en.col, en.row) += v;
      }
    }
    sb.constant = -value0;
    double scale = 0;
    for (const auto& ai : a) scale = std::max(scale, ai.cwiseAbs().maxCoeff());
    for (int i = 0; i < n_eta; ++i) {
      if (a[i].cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, scale)) {
        sb.terms.emplace_back(i, std::move(a[i]));
      }
    }
    out.sdp.blocks.push_back(std::move(sb));
    out.block_labels.push_back(b.label);
  }
  out.z0 = out.z0.cwiseProduct(zscale);
  out.basis = zscale.asDiagonal() * out.basis;
  return out;
}

SosSolution SosProgram::Solve(const SdpOptions& options) const {
  const Lowering low = Lower();
  SosSolution sol;
  if (low.unbounded_direction) {
    sol.status = SdpStatus::kUnbounded;
    return sol;
  }
  sol.sdp = SolveSdp(low.sdp, options);
  sol.status = sol.sdp.status;
  const VectorXd z = low.z0 + low.basis * sol.sdp.y;
  const int nv = num_variables();
  sol.values.assign(z.data(), z.data() + nv);
  sol.objective = sol.sdp.primal_objective + low.objective_offset;

  const Layout layout = MakeLayout();
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    const ConstraintLayout& cl = layout.constraints[c];
    SosCertificate cert;
    cert.label = constraints_[c].label;
    cert.expression = constraints_[c].expr.Instantiate(sol.values);
    cert.generators = constraints_[c].region.generators;
    cert.gram_basis = cl.main.basis;
    cert.gram = GramFromZ(cl.main, z);
    for (const auto& s : cl.multipliers) {
      cert.multiplier_grams.push_back(GramFromZ(s, z));
      cert.multipliers.push_back(
          GramPolynomial(n_state_vars_, s, cert.multiplier_grams.back()));
    }
    sol.certificates.push_back(std::move(cert));
  }
  return sol;
}

}  // namespace reachsynth
