#ifndef IRSCRB_CONIC_HPP
#define IRSCRB_CONIC_HPP

#include <cmath>
#include <tuple>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/Sparse>

#include "numerics.hpp"

namespace irscrb::conic {

// Linear conic program in slack form:
//   minimize c'x  subject to  b - A x = s,  s in K
// K is a product of blocks in row order: Zero(n) rows are equalities,
// NonNeg(n) rows are inequalities, Psd(n) covers n(n+1)/2 rows holding the
// lower triangle of a symmetric matrix column by column, off-diagonals
// scaled by sqrt(2) so the dot product equals the trace inner product.
enum class ConeKind { Zero, NonNeg, Psd };

struct ConeBlock {
  ConeKind kind;
  int n;
  int rows() const { return kind == ConeKind::Psd ? n * (n + 1) / 2 : n; }
};

struct ConicProgram {
  RVector c;
  RMatrix A;
  RVector b;
  std::vector<ConeBlock> cones;

  int n_vars() const { return static_cast<int>(c.size()); }
  int n_rows() const { return static_cast<int>(b.size()); }

  void validate() const {
    int rows = 0;
    for (const auto& k : cones) {
      if (k.n < 0) throw InvariantError("ConicProgram: negative cone size");
      rows += k.rows();
    }
    if (rows != b.size()) throw InvariantError("ConicProgram: cone rows do not cover b");
    if (A.rows() != b.size() || A.cols() != c.size()) throw InvariantError("ConicProgram: A has wrong shape");
    if (!c.allFinite() || !b.allFinite() || !A.allFinite()) throw InvariantError("ConicProgram: non-finite data");
  }
};

// Inaccurate: the solver stalled or ran out of iterations, and the best
// iterate it saw meets 1e3 * tol on all three measures.
enum class SolveStatus { Optimal, Inaccurate, Infeasible, Unbounded, MaxIter, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Inaccurate: return "inaccurate";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

// y is the dual vector (one entry per row): A'y + c = 0, y in K*, objective -b'y.
struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  RVector x, y, s;
  double objective = NAN;
  double primal_residual = NAN;
  double dual_residual = NAN;
  double gap = NAN;
  int iterations = 0;

  bool usable() const { return status == SolveStatus::Optimal || status == SolveStatus::Inaccurate; }
};

inline int svec_size(int n) { return n * (n + 1) / 2; }

inline RVector svec(const RMatrix& m) {
  const int n = static_cast<int>(m.rows());
  RVector v(svec_size(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) v(k++) = (i == j) ? m(i, i) : std::sqrt(2.0) * 0.5 * (m(i, j) + m(j, i));
  return v;
}

inline RMatrix smat(const Eigen::Ref<const RVector>& v, int n) {
  RMatrix m(n, n);
  int k = 0;
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      if (i == j) m(i, i) = v(k);
      else m(i, j) = m(j, i) = r * v(k);
      ++k;
    }
  return m;
}

// Plain-text dump: header, cone list, then c, b and the nonzeros of A.
inline void write_program(std::ostream& os, const ConicProgram& p) {
  os << std::setprecision(17);
  os << "# minimize c'x subject to b - A x in K\n";
  os << "vars " << p.n_vars() << "\nrows " << p.n_rows() << "\ncones " << p.cones.size() << "\n";
  for (const auto& k : p.cones)
    os << (k.kind == ConeKind::Zero ? "Z " : k.kind == ConeKind::NonNeg ? "L " : "S ") << k.n << "\n";
  os << "c\n";
  for (Eigen::Index i = 0; i < p.c.size(); ++i) os << p.c(i) << "\n";
  os << "b\n";
  for (Eigen::Index i = 0; i < p.b.size(); ++i) os << p.b(i) << "\n";
  std::size_t nnz = 0;
  for (Eigen::Index j = 0; j < p.A.cols(); ++j)
    for (Eigen::Index i = 0; i < p.A.rows(); ++i) nnz += p.A(i, j) != 0.0;
  os << "A " << nnz << "\n";
  for (Eigen::Index j = 0; j < p.A.cols(); ++j)
    for (Eigen::Index i = 0; i < p.A.rows(); ++i)
      if (p.A(i, j) != 0.0) os << i << " " << j << " " << p.A(i, j) << "\n";
}

namespace detail {

struct PsdScaling {
  int n = 0;
  RMatrix R, Rinv;  // W(Z) = R' Z R, W^{-T}(S) = Rinv S Rinv'
  RVector lambda;
};

// Cone-structured vector helpers over the non-equality rows.
class Cone {
public:
  Cone(int lp, std::vector<int> psd) : lp_(lp), psd_(std::move(psd)) {
    int off = lp_;
    for (int n : psd_) {
      off_.push_back(off);
      off += svec_size(n);
    }
    dim_ = off;
    degree_ = lp_;
    for (int n : psd_) degree_ += n;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int lp() const { return lp_; }
  const std::vector<int>& psd() const { return psd_; }
  int offset(std::size_t k) const { return off_[k]; }

  RVector identity() const {
    RVector e(dim_);
    e.head(lp_).setOnes();
    for (std::size_t k = 0; k < psd_.size(); ++k)
      e.segment(off_[k], svec_size(psd_[k])) = svec(RMatrix::Identity(psd_[k], psd_[k]));
    return e;
  }

  // Jordan product u o v
  RVector prod(const RVector& u, const RVector& v) const {
    RVector out(dim_);
    out.head(lp_) = u.head(lp_).cwiseProduct(v.head(lp_));
    for (std::size_t k = 0; k < psd_.size(); ++k) {
      const int n = psd_[k], o = off_[k], m = svec_size(n);
      const RMatrix U = smat(u.segment(o, m), n), V = smat(v.segment(o, m), n);
      out.segment(o, m) = svec(0.5 * (U * V + V * U));
    }
    return out;
  }

  bool interior(const RVector& v) const {
    if (lp_ > 0 && v.head(lp_).minCoeff() <= 0.0) return false;
    for (std::size_t k = 0; k < psd_.size(); ++k) {
      const int n = psd_[k];
      Eigen::LLT<RMatrix> llt(smat(v.segment(off_[k], svec_size(n)), n));
      if (llt.info() != Eigen::Success) return false;
    }
    return true;
  }

private:
  int lp_;
  std::vector<int> psd_;
  std::vector<int> off_;
  int dim_ = 0;
  int degree_ = 0;
};

struct Scaling {
  RVector lp_w;       // sqrt(s/z)
  RVector lp_lambda;  // sqrt(s z)
  std::vector<PsdScaling> psd;
};

inline bool compute_scaling(const Cone& K, const RVector& s, const RVector& z, Scaling& sc) {
  const int lp = K.lp();
  sc.lp_w = (s.head(lp).array() / z.head(lp).array()).sqrt();
  sc.lp_lambda = (s.head(lp).array() * z.head(lp).array()).sqrt();
  sc.psd.resize(K.psd().size());
  for (std::size_t k = 0; k < K.psd().size(); ++k) {
    const int n = K.psd()[k], o = K.offset(k), m = svec_size(n);
    Eigen::LLT<RMatrix> ls(smat(s.segment(o, m), n)), lz(smat(z.segment(o, m), n));
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
    const RMatrix Ls = ls.matrixL(), Lz = lz.matrixL();
    Eigen::JacobiSVD<RMatrix> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RVector lam = svd.singularValues();
    if (lam.minCoeff() <= 0.0 || !lam.allFinite()) return false;
    const RVector isq = lam.cwiseSqrt().cwiseInverse();
    PsdScaling& p = sc.psd[k];
    p.n = n;
    p.lambda = lam;
    p.R = Ls * svd.matrixV() * isq.asDiagonal();
    p.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
  }
  return true;
}

inline RVector lambda_vec(const Cone& K, const Scaling& sc) {
  RVector out(K.dim());
  out.head(K.lp()) = sc.lp_lambda;
  for (std::size_t k = 0; k < sc.psd.size(); ++k)
    out.segment(K.offset(k), svec_size(sc.psd[k].n)) = svec(RMatrix(sc.psd[k].lambda.asDiagonal()));
  return out;
}

enum class Op { W, WT, WinvT, WTW, WTWinv };

inline RVector apply(const Cone& K, const Scaling& sc, Op op, const RVector& v) {
  RVector out(K.dim());
  const int lp = K.lp();
  switch (op) {
    case Op::W:
    case Op::WT: out.head(lp) = sc.lp_w.cwiseProduct(v.head(lp)); break;
    case Op::WinvT: out.head(lp) = v.head(lp).cwiseQuotient(sc.lp_w); break;
    case Op::WTW: out.head(lp) = sc.lp_w.cwiseAbs2().cwiseProduct(v.head(lp)); break;
    case Op::WTWinv: out.head(lp) = v.head(lp).cwiseQuotient(sc.lp_w.cwiseAbs2()); break;
  }
  for (std::size_t k = 0; k < sc.psd.size(); ++k) {
    const PsdScaling& p = sc.psd[k];
    const int o = K.offset(k), m = svec_size(p.n);
    const RMatrix V = smat(v.segment(o, m), p.n);
    RMatrix Y;
    switch (op) {
      case Op::W: Y = p.R.transpose() * V * p.R; break;
      case Op::WT: Y = p.R * V * p.R.transpose(); break;
      case Op::WinvT: Y = p.Rinv * V * p.Rinv.transpose(); break;
      case Op::WTW: {
        const RMatrix RRt = p.R * p.R.transpose();
        Y = RRt * V * RRt;
        break;
      }
      case Op::WTWinv: {
        const RMatrix P = p.Rinv.transpose() * p.Rinv;
        Y = P * V * P;
        break;
      }
    }
    out.segment(o, m) = svec(Y);
  }
  return out;
}

// lambda \ v : solves lambda o x = v
inline RVector lambda_div(const Cone& K, const Scaling& sc, const RVector& v) {
  RVector out(K.dim());
  out.head(K.lp()) = v.head(K.lp()).cwiseQuotient(sc.lp_lambda);
  for (std::size_t k = 0; k < sc.psd.size(); ++k) {
    const PsdScaling& p = sc.psd[k];
    const int o = K.offset(k), m = svec_size(p.n);
    RMatrix V = smat(v.segment(o, m), p.n);
    for (int i = 0; i < p.n; ++i)
      for (int j = 0; j < p.n; ++j) V(i, j) *= 2.0 / (p.lambda(i) + p.lambda(j));
    out.segment(o, m) = svec(V);
  }
  return out;
}

// Largest alpha with lambda + alpha d in the cone (scaled coordinates).
inline double max_step(const Cone& K, const Scaling& sc, const RVector& d) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < K.lp(); ++i)
    if (d(i) < 0.0) a = std::min(a, -sc.lp_lambda(i) / d(i));
  for (std::size_t k = 0; k < sc.psd.size(); ++k) {
    const PsdScaling& p = sc.psd[k];
    const int o = K.offset(k), m = svec_size(p.n);
    const RVector isq = p.lambda.cwiseSqrt().cwiseInverse();
    const RMatrix D = isq.asDiagonal() * smat(d.segment(o, m), p.n) * isq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (D + D.transpose()), Eigen::EigenvaluesOnly);
    const double mn = es.eigenvalues()(0);
    if (mn < 0.0) a = std::min(a, -1.0 / mn);
  }
  return a;
}

// Cholesky with a pivoted LDL' fallback for nearly semidefinite systems.
struct SpdFactor {
  Eigen::LLT<RMatrix> llt;
  Eigen::LDLT<RMatrix> ldlt;
  bool use_llt = true;

  bool compute(const RMatrix& m) {
    llt.compute(m);
    use_llt = llt.info() == Eigen::Success;
    if (use_llt) return true;
    ldlt.compute(m);
    return ldlt.info() == Eigen::Success;
  }
  template <typename B>
  RMatrix solve(const B& b) const {
    return use_llt ? RMatrix(llt.solve(b)) : RMatrix(ldlt.solve(b));
  }
};

} // namespace detail

// Homogeneous self-dual embedding, Nesterov-Todd scaling, Mehrotra
// predictor-corrector. Dense normal-equation KKT solves.
inline ConicSolution solve(const ConicProgram& prog, double tol = 1e-7, int max_iter = 100) {
  using namespace detail;
  prog.validate();
  const int n = prog.n_vars();

  // Split rows into equalities (Ae x = be) and cone rows (G x + s = h).
  std::vector<int> eq_rows, cone_rows, psd_sizes;
  int lp = 0;
  {
    int r = 0;
    for (const auto& k : prog.cones) {
      if (k.kind == ConeKind::Zero)
        for (int i = 0; i < k.rows(); ++i) eq_rows.push_back(r + i);
      r += k.rows();
    }
    r = 0;
    for (const auto& k : prog.cones) {
      if (k.kind == ConeKind::NonNeg) {
        for (int i = 0; i < k.rows(); ++i) cone_rows.push_back(r + i);
        lp += k.n;
      }
      r += k.rows();
    }
    r = 0;
    for (const auto& k : prog.cones) {
      if (k.kind == ConeKind::Psd) {
        for (int i = 0; i < k.rows(); ++i) cone_rows.push_back(r + i);
        psd_sizes.push_back(k.n);
      }
      r += k.rows();
    }
  }
  const Cone K(lp, psd_sizes);
  const int p = static_cast<int>(eq_rows.size());
  const int m = K.dim();

  // Row equilibration: per row for equalities/LP, one factor per PSD block.
  RVector row_scale(prog.n_rows());
  {
    int r = 0;
    for (const auto& k : prog.cones) {
      if (k.kind == ConeKind::Psd) {
        const double mx = prog.A.middleRows(r, k.rows()).cwiseAbs().maxCoeff();
        row_scale.segment(r, k.rows()).setConstant(mx > 0 ? 1.0 / mx : 1.0);
      } else {
        for (int i = r; i < r + k.rows(); ++i) {
          const double mx = prog.A.row(i).cwiseAbs().maxCoeff();
          row_scale(i) = mx > 0 ? 1.0 / mx : 1.0;
        }
      }
      r += k.rows();
    }
  }
  const double cmax = prog.c.cwiseAbs().maxCoeff();
  const double c_scale = cmax > 0 ? 1.0 / cmax : 1.0;

  RMatrix Ae(p, n), G(m, n);
  RVector be(p), h(m), rs_e(p), rs_k(m);
  for (int i = 0; i < p; ++i) {
    rs_e(i) = row_scale(eq_rows[static_cast<std::size_t>(i)]);
    Ae.row(i) = rs_e(i) * prog.A.row(eq_rows[static_cast<std::size_t>(i)]);
    be(i) = rs_e(i) * prog.b(eq_rows[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < m; ++i) {
    rs_k(i) = row_scale(cone_rows[static_cast<std::size_t>(i)]);
    G.row(i) = rs_k(i) * prog.A.row(cone_rows[static_cast<std::size_t>(i)]);
    h(i) = rs_k(i) * prog.b(cone_rows[static_cast<std::size_t>(i)]);
  }
  const RVector c = c_scale * prog.c;

  // Unscaled views for termination tests.
  const double nb = prog.b.norm(), nc = prog.c.norm();
  auto assemble = [&](const RVector& x, const RVector& ye, const RVector& zk, const RVector& sk, double tau,
                      ConicSolution& out) {
    out.x = x / tau;
    out.y = RVector::Zero(prog.n_rows());
    out.s = RVector::Zero(prog.n_rows());
    for (int i = 0; i < p; ++i) out.y(eq_rows[static_cast<std::size_t>(i)]) = ye(i) * rs_e(i) / (c_scale * tau);
    for (int i = 0; i < m; ++i) {
      out.y(cone_rows[static_cast<std::size_t>(i)]) = zk(i) * rs_k(i) / (c_scale * tau);
      out.s(cone_rows[static_cast<std::size_t>(i)]) = sk(i) / (rs_k(i) * tau);
    }
    const RVector pr = prog.A * out.x + out.s - prog.b;
    const RVector dr = prog.A.transpose() * out.y + prog.c;
    out.objective = prog.c.dot(out.x);
    const double dobj = -prog.b.dot(out.y);
    out.primal_residual = pr.norm() / (1.0 + nb);
    out.dual_residual = dr.norm() / (1.0 + nc);
    out.gap = std::abs(out.objective - dobj) / (1.0 + std::abs(out.objective) + std::abs(dobj));
  };

  RVector x = RVector::Zero(n), ye = RVector::Zero(p);
  RVector s = K.identity(), z = K.identity();
  double tau = 1.0, kappa = 1.0;
  const RVector e = K.identity();

  ConicSolution sol, best;
  double best_score = INFINITY;
  auto give_up = [&](SolveStatus st) {
    if (best_score <= 1e3 * tol) {
      best.status = SolveStatus::Inaccurate;
      best.iterations = sol.iterations;
      return best;
    }
    sol.status = st;
    return sol;
  };
  Scaling sc;
  detail::SpdFactor Mfac, Sfac;
  RMatrix MinvAt;
  int stalls = 0;

  const Eigen::SparseMatrix<double> G_s = G.sparseView();
  const Eigen::SparseMatrix<double> Gt_s = G_s.transpose();

  // Nonzero columns of G per PSD block; blocks whose columns hold few entries
  // are assembled entrywise instead of through dense congruences.
  struct BlockColumns {
    std::vector<int> vars;
    std::vector<std::vector<std::tuple<int, int, double>>> entries;
    bool sparse = false;
  };
  std::vector<BlockColumns> block_cols(K.psd().size());
  for (std::size_t k = 0; k < K.psd().size(); ++k) {
    const int nk = K.psd()[k], o = K.offset(k);
    BlockColumns& bc = block_cols[k];
    std::size_t total = 0;
    for (int j = 0; j < n; ++j) {
      std::vector<std::tuple<int, int, double>> e;
      int r = 0;
      for (int cj = 0; cj < nk; ++cj)
        for (int ci = cj; ci < nk; ++ci, ++r) {
          const double g = G(o + r, j);
          if (g == 0.0) continue;
          if (ci == cj) {
            e.emplace_back(ci, ci, g);
          } else {
            e.emplace_back(ci, cj, g / std::sqrt(2.0));
            e.emplace_back(cj, ci, g / std::sqrt(2.0));
          }
        }
      if (e.empty()) continue;
      total += e.size();
      bc.vars.push_back(j);
      bc.entries.push_back(std::move(e));
    }
    bc.sparse = !bc.vars.empty() && total <= static_cast<std::size_t>(nk) * bc.vars.size();
    if (!bc.sparse) bc.entries.clear();
  }

  // K [dx; dy; dz] = [r1; r2; r3] with K = [[0, Ae', G'], [Ae, 0, 0], [G, 0, -W'W]]
  auto factor = [&]() -> bool {
    RMatrix H = RMatrix::Zero(n, n);
    if (K.lp() > 0) {
      const RVector d = sc.lp_w.cwiseAbs2().cwiseInverse();
      const auto Gl = G.topRows(K.lp());
      H.noalias() += Gl.transpose() * d.asDiagonal() * Gl;
    }
    for (std::size_t k = 0; k < sc.psd.size(); ++k) {
      const PsdScaling& ps = sc.psd[k];
      const BlockColumns& bc = block_cols[k];
      const int o = K.offset(k), mk = svec_size(ps.n);
      const int nc = static_cast<int>(bc.vars.size());
      if (bc.sparse) {
        // H_jk = tr(P G_j P G_k) summed over the few nonzeros of each column
        const RMatrix P = ps.Rinv.transpose() * ps.Rinv;
        for (int a = 0; a < nc; ++a)
          for (int b = a; b < nc; ++b) {
            double acc = 0.0;
            for (const auto& [i1, j1, v1] : bc.entries[static_cast<std::size_t>(a)])
              for (const auto& [i2, j2, v2] : bc.entries[static_cast<std::size_t>(b)])
                acc += v1 * v2 * P(j1, i2) * P(j2, i1);
            const int ja = bc.vars[static_cast<std::size_t>(a)], jb = bc.vars[static_cast<std::size_t>(b)];
            H(ja, jb) += acc;
            if (ja != jb) H(jb, ja) += acc;
          }
      } else {
        const RMatrix& Q = ps.Rinv;  // T_j = svec(Rinv G_j Rinv')
        RMatrix T(mk, nc);
        for (int a = 0; a < nc; ++a)
          T.col(a) = svec(Q * smat(G.block(o, bc.vars[static_cast<std::size_t>(a)], mk, 1), ps.n) * Q.transpose());
        H(bc.vars, bc.vars) += T.transpose() * T;
      }
    }
    RMatrix Mm = H;
    if (p > 0) Mm.noalias() += Ae.transpose() * Ae;
    const double reg = 1e-13 * std::max(1.0, Mm.diagonal().cwiseAbs().maxCoeff());
    Mm.diagonal().array() += reg;
    if (!Mfac.compute(Mm)) return false;
    if (p > 0) {
      MinvAt = Mfac.solve(Ae.transpose());
      RMatrix S = Ae * MinvAt;
      S.diagonal().array() += 1e-14 * std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());
      if (!Sfac.compute(S)) return false;
    }
    return true;
  };

  auto kkt_solve_once = [&](const RVector& r1, const RVector& r2, const RVector& r3, RVector& dx, RVector& dy,
                            RVector& dz) {
    const RVector t = r1 + Gt_s * apply(K, sc, Op::WTWinv, r3);
    RVector rhs = t;
    if (p > 0) {
      rhs += Ae.transpose() * r2;
      dy = Sfac.solve(Ae * Mfac.solve(rhs) - r2);
      dx = Mfac.solve(rhs - Ae.transpose() * dy);
    } else {
      dy = RVector::Zero(0);
      dx = Mfac.solve(rhs);
    }
    dz = apply(K, sc, Op::WTWinv, RVector(G_s * dx - r3));
  };

  auto kkt_residual = [&](const RVector& r1, const RVector& r2, const RVector& r3, const RVector& dx,
                          const RVector& dy, const RVector& dz, RVector& e1, RVector& e2, RVector& e3) {
    e1 = r1 - Gt_s * dz;
    if (p > 0) e1 -= Ae.transpose() * dy;
    e2 = r2 - Ae * dx;
    e3 = r3 - (G_s * dx - apply(K, sc, Op::WTW, dz));
    return std::sqrt(e1.squaredNorm() + e2.squaredNorm() + e3.squaredNorm());
  };

  // Iterative refinement against the unregularized system while it helps.
  auto kkt_solve = [&](const RVector& r1, const RVector& r2, const RVector& r3, RVector& dx, RVector& dy,
                       RVector& dz) {
    kkt_solve_once(r1, r2, r3, dx, dy, dz);
    RVector e1, e2, e3;
    double err = kkt_residual(r1, r2, r3, dx, dy, dz, e1, e2, e3);
    for (int it = 0; it < 8 && err > 0.0; ++it) {
      RVector cx, cy, cz;
      kkt_solve_once(e1, e2, e3, cx, cy, cz);
      const RVector nx = dx + cx, nz = dz + cz;
      const RVector ny = p > 0 ? RVector(dy + cy) : dy;
      RVector f1, f2, f3;
      const double nerr = kkt_residual(r1, r2, r3, nx, ny, nz, f1, f2, f3);
      if (!(nerr < 0.5 * err)) {
        if (nerr < err) {
          dx = nx;
          dy = ny;
          dz = nz;
        }
        break;
      }
      dx = nx;
      dy = ny;
      dz = nz;
      e1 = f1;
      e2 = f2;
      e3 = f3;
      err = nerr;
    }
  };

  for (int iter = 0; iter <= max_iter; ++iter) {
    sol.iterations = iter;
    const RVector rx = (p > 0 ? RVector(Ae.transpose() * ye) : RVector::Zero(n)) + Gt_s * z + c * tau;
    const RVector ry = be * tau - Ae * x;
    const RVector rz = s + G_s * x - h * tau;
    const double rt = kappa + c.dot(x) + be.dot(ye) + h.dot(z);
    const double mu = (s.dot(z) + tau * kappa) / (K.degree() + 1);

    assemble(x, ye, z, s, tau, sol);
    if (sol.x.allFinite() && sol.primal_residual <= tol && sol.dual_residual <= tol && sol.gap <= tol) {
      sol.status = SolveStatus::Optimal;
      return sol;
    }
    if (const double score = std::max({sol.primal_residual, sol.dual_residual, sol.gap});
        sol.x.allFinite() && score < best_score) {
      best_score = score;
      best = sol;
    }
    // Infeasibility certificates on the unscaled data.
    {
      RVector yo = RVector::Zero(prog.n_rows());
      for (int i = 0; i < p; ++i) yo(eq_rows[static_cast<std::size_t>(i)]) = ye(i) * rs_e(i);
      for (int i = 0; i < m; ++i) yo(cone_rows[static_cast<std::size_t>(i)]) = z(i) * rs_k(i);
      const double by = prog.b.dot(yo);
      if (by < 0.0 && (prog.A.transpose() * yo).norm() / -by <= tol * std::max(1.0, nc)) {
        sol.status = SolveStatus::Infeasible;
        sol.y = yo / -by;
        return sol;
      }
      const double cx = prog.c.dot(x);
      if (cx < 0.0) {
        RVector so = RVector::Zero(prog.n_rows());
        for (int i = 0; i < m; ++i) so(cone_rows[static_cast<std::size_t>(i)]) = s(i) / rs_k(i);
        if ((prog.A * x + so).norm() / -cx <= tol * std::max(1.0, nb)) {
          sol.status = SolveStatus::Unbounded;
          sol.x = x / -cx;
          return sol;
        }
      }
    }
    if (iter == max_iter) break;

    if (!compute_scaling(K, s, z, sc) || !factor()) {
      return give_up(SolveStatus::NumericalFailure);
    }
    const RVector lam = lambda_vec(K, sc);
    const RVector lamlam = K.prod(lam, lam);

    // Direction for given residual weight eta and complementarity targets.
    RVector x1, y1, z1;
    kkt_solve(-c, be, h, x1, y1, z1);
    RVector ds;
    // ds is taken from the primal row so s + Gx - h tau shrinks exactly.
    auto direction = [&](double eta, const RVector& ds_t, double dk_t, RVector& dx, RVector& dy, RVector& dz,
                         RVector& ds_scaled, RVector& dz_scaled, double& dtau, double& dkappa) {
      RVector x0, y0, z0;
      const RVector ld = lambda_div(K, sc, ds_t);
      kkt_solve(-eta * rx, eta * ry, -eta * rz - apply(K, sc, Op::WT, ld), x0, y0, z0);
      auto gdot = [&](const RVector& a, const RVector& b2, const RVector& cc) {
        return c.dot(a) + (p > 0 ? be.dot(b2) : 0.0) + h.dot(cc);
      };
      dtau = (-eta * rt - gdot(x0, y0, z0) - dk_t / tau) / (gdot(x1, y1, z1) - kappa / tau);
      dx = x0 + dtau * x1;
      dy = y0 + dtau * y1;
      dz = z0 + dtau * z1;
      dkappa = (dk_t - kappa * dtau) / tau;
      dz_scaled = apply(K, sc, Op::W, dz);
      ds = -eta * rz - G_s * dx + dtau * h;
      ds_scaled = apply(K, sc, Op::WinvT, ds);
    };

    auto step_len = [&](const RVector& dss, const RVector& dzs, double dtau, double dkappa) {
      double a = std::min(max_step(K, sc, dss), max_step(K, sc, dzs));
      if (dtau < 0) a = std::min(a, -tau / dtau);
      if (dkappa < 0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    RVector dx, dy, dz, dss, dzs;
    double dtau, dkappa;
    direction(1.0, -lamlam, -tau * kappa, dx, dy, dz, dss, dzs, dtau, dkappa);
    const double a_aff = std::min(1.0, step_len(dss, dzs, dtau, dkappa));
    const double sigma = std::pow(1.0 - a_aff, 3);

    const RVector ds_t = -lamlam - K.prod(dss, dzs) + sigma * mu * e;
    const double dk_t = -tau * kappa - dtau * dkappa + sigma * mu;
    direction(1.0 - sigma, ds_t, dk_t, dx, dy, dz, dss, dzs, dtau, dkappa);
    const double alpha = std::min(1.0, 0.99 * step_len(dss, dzs, dtau, dkappa));
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      return give_up(SolveStatus::NumericalFailure);
    }
    stalls = alpha < 1e-8 ? stalls + 1 : 0;
    if (stalls > 5) {
      return give_up(SolveStatus::NumericalFailure);
    }

    x += alpha * dx;
    if (p > 0) ye += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!x.allFinite() || !z.allFinite() || !s.allFinite() || !(tau > 0) || !(kappa > 0)) {
      return give_up(SolveStatus::NumericalFailure);
    }
  }
  return give_up(SolveStatus::MaxIter);
}

} // namespace irscrb::conic

#endif
