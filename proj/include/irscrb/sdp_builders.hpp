#ifndef IRSCRB_SDP_BUILDERS_HPP
#define IRSCRB_SDP_BUILDERS_HPP

#include <vector>

#include "conic.hpp"
#include "surrogate.hpp"

namespace irscrb {

namespace sdp {

// svec position of entry (i, j) of a k x k symmetric matrix.
inline int svec_index(int k, int i, int j) {
  if (i < j) std::swap(i, j);
  return j * k - j * (j - 1) / 2 + (i - j);
}

// Affine symmetric matrix expression  smat(s0 + coef x).
struct SymExpr {
  int k;
  RVector s0;
  RMatrix coef;

  SymExpr(int k_, int n_vars) : k(k_), s0(RVector::Zero(conic::svec_size(k_))), coef(RMatrix::Zero(conic::svec_size(k_), n_vars)) {}

  // entry (i, j) += c0 + g . x[off : off + g.size()]
  void add(int i, int j, double c0, const RVector& g = RVector(), int off = 0) {
    const int r = svec_index(k, i, j);
    const double f = (i == j) ? 1.0 : std::sqrt(2.0);
    s0(r) += f * c0;
    if (g.size() > 0) coef.block(r, off, 1, g.size()) += f * g.transpose();
  }
  void add_var(int i, int j, int var, double scale = 1.0) {
    const int r = svec_index(k, i, j);
    coef(r, var) += (i == j ? 1.0 : std::sqrt(2.0)) * scale;
  }
};

// Collects scalar and matrix constraints and emits them in cone order.
class ProgramBuilder {
public:
  explicit ProgramBuilder(int n_vars) : n_(n_vars) {}

  int n_vars() const { return n_; }

  // c0 + g . x == 0
  void add_eq(double c0, const RVector& g) { eq_.push_back({c0, g}); }
  // c0 + g . x >= 0
  void add_nonneg(double c0, const RVector& g) { nn_.push_back({c0, g}); }
  void add_psd(SymExpr e) { psd_.push_back(std::move(e)); }

  conic::ConicProgram finish(const RVector& c) const {
    int rows = static_cast<int>(eq_.size() + nn_.size());
    for (const auto& e : psd_) rows += conic::svec_size(e.k);
    conic::ConicProgram p;
    p.c = c;
    p.A = RMatrix::Zero(rows, n_);
    p.b = RVector::Zero(rows);
    int r = 0;
    for (const auto* list : {&eq_, &nn_})
      for (const auto& [c0, g] : *list) {
        p.b(r) = c0;
        p.A.row(r) = -g.transpose();
        ++r;
      }
    for (const auto& e : psd_) {
      const int m = conic::svec_size(e.k);
      p.b.segment(r, m) = e.s0;
      p.A.middleRows(r, m) = -e.coef;
      r += m;
    }
    if (!eq_.empty()) p.cones.push_back({conic::ConeKind::Zero, static_cast<int>(eq_.size())});
    if (!nn_.empty()) p.cones.push_back({conic::ConeKind::NonNeg, static_cast<int>(nn_.size())});
    for (const auto& e : psd_) p.cones.push_back({conic::ConeKind::Psd, e.k});
    return p;
  }

private:
  int n_;
  std::vector<std::pair<double, RVector>> eq_, nn_;
  std::vector<SymExpr> psd_;
};

// Real-embedding block of a Hermitian variable stored as HermParam coordinates.
inline SymExpr herm_psd_block(int n, int off, int n_vars) {
  const HermParam hp(n);
  SymExpr e(2 * n, n_vars);
  for (int k = 0; k < hp.dim(); ++k) e.coef.col(off + k) = conic::svec(herm_real_embed(hp.basis(k)));
  return e;
}

// 1 / sqrt(F_ii), or 1 where F_ii is not positive.
inline Eigen::Vector4d fim_scaling(const Fim4& f) {
  Eigen::Vector4d d;
  for (int i = 0; i < 4; ++i) d(i) = f(i, i) > 0.0 ? 1.0 / std::sqrt(f(i, i)) : 1.0;
  return d;
}

inline double crb_or(const Fim4& f, double fallback) {
  try {
    const double v = crb(f);
    return std::isfinite(v) && v > 0 ? v : fallback;
  } catch (const Error&) {
    return fallback;
  }
}

} // namespace sdp

struct TransmitSdpOptions {
  bool irs_power = true;  // false for the passive benchmark
};

// min t  s.t. tr(F_l(R_l)^{-1}) <= t for every l, (1/L) sum tr R_l <= P_t,
// per-IRS power <= P_s, R_l psd. The trace bound uses the lift
// [[D F D, I], [I, U]] psd, sum_i d_i^2 U_ii <= t, with D fixed from F at
// the reference covariances so that D F D is near unit diagonal.
struct TransmitSdp {
  conic::ConicProgram prog;
  int L = 0, M = 0;
  double objective_scale = 1.0;  // CRB = objective_scale * x(t)

  int r_offset(int l) const { return l * (M * M + 10); }
  int t_index() const { return L * (M * M + 10); }

  std::vector<CMatrix> covariances(const RVector& x) const {
    const HermParam hp(M);
    std::vector<CMatrix> out;
    for (int l = 0; l < L; ++l) out.push_back(hp.to_matrix(x.segment(r_offset(l), M * M)));
    return out;
  }
  double max_crb(const RVector& x) const { return objective_scale * x(t_index()); }
};

inline TransmitSdp build_transmit_sdp(SensingCase sc, const std::vector<CVector>& psi,
                                      const std::vector<LinkModel>& links, double P_t, double P_s,
                                      const std::vector<CMatrix>& R_ref, const TransmitSdpOptions& opt = {}) {
  if (links.empty() || psi.size() != links.size() || R_ref.size() != links.size())
    throw InvariantError("build_transmit_sdp: inconsistent IRS lists");
  TransmitSdp out;
  out.L = static_cast<int>(links.size());
  out.M = links[0].M();
  const int M = out.M, MM = M * M, L = out.L;
  const int n_vars = L * (MM + 10) + 1;
  const int t = out.t_index();
  const HermParam hp(M);

  std::vector<AffineFim> af;
  std::vector<Eigen::Vector4d> d;
  double scale = 0.0;
  for (int l = 0; l < L; ++l) {
    const auto i = static_cast<std::size_t>(l);
    af.push_back(fim_affine_rs(sc, psi[i], links[i]));
    const Fim4 f0 = af.back()(R_ref[i]);
    d.push_back(sdp::fim_scaling(f0));
    scale = std::max(scale, sdp::crb_or(f0, 0.0));
  }
  out.objective_scale = scale > 0 ? scale : 1.0;

  sdp::ProgramBuilder pb(n_vars);
  {
    RVector g = RVector::Zero(n_vars);
    for (int l = 0; l < L; ++l) g.segment(out.r_offset(l), M).setConstant(-1.0 / (L * P_t));
    pb.add_nonneg(1.0, g);
  }
  for (int l = 0; l < L; ++l) {
    const auto i = static_cast<std::size_t>(l);
    const LinkModel& lk = links[i];
    const int off = out.r_offset(l), uoff = off + MM;
    if (opt.irs_power) {
      // power is tr(K R_l) + const
      const CMatrix P = psi[i].asDiagonal();
      CMatrix K;
      double c0;
      if (sc == SensingCase::AtBs) {
        const CMatrix E = target_response_bs(lk.beta, steering_upa(lk.reflect, lk.doa));
        const CMatrix X1 = P * E * P * lk.G, X2 = P * E * P, X3 = P * lk.G;
        K = X1.adjoint() * X1 + X3.adjoint() * X3;
        c0 = lk.sigma_r2 * (X2.squaredNorm() + 2.0 * psi[i].squaredNorm());
      } else {
        const CMatrix X = P * lk.G;
        K = X.adjoint() * X;
        c0 = lk.sigma_r2 * psi[i].squaredNorm();
      }
      const RVector pc = HermAffine{c0, K.transpose()}.param_coeffs(hp);
      RVector g = RVector::Zero(n_vars);
      g.segment(off, MM) = -pc / P_s;
      pb.add_nonneg(1.0 - c0 / P_s, g);
    }
    {
      RVector g = RVector::Zero(n_vars);
      g(t) = 1.0;
      for (int p = 0; p < 4; ++p) g(uoff + sdp::svec_index(4, p, p)) = -d[i](p) * d[i](p) / out.objective_scale;
      pb.add_nonneg(0.0, g);
    }
    pb.add_psd(sdp::herm_psd_block(M, off, n_vars));
    sdp::SymExpr lift(8, n_vars);
    for (int p = 0; p < 4; ++p) {
      for (int q = 0; q <= p; ++q) {
        const HermAffine& e = af[i].entry[p][q];
        const HermAffine& e2 = af[i].entry[q][p];
        const double s = d[i](p) * d[i](q);
        lift.add(p, q, 0.5 * s * (e.constant + e2.constant),
                 RVector(0.5 * s * (e.param_coeffs(hp) + e2.param_coeffs(hp))), off);
        // U stored as svec coordinates: U_pq = u_k / sqrt2 off the diagonal
        lift.add_var(4 + p, 4 + q, uoff + sdp::svec_index(4, p, q), p == q ? 1.0 : 1.0 / std::sqrt(2.0));
      }
      lift.add(4 + p, p, 1.0);
    }
    pb.add_psd(std::move(lift));
  }
  RVector c = RVector::Zero(n_vars);
  c(t) = 1.0;
  out.prog = pb.finish(c);
  return out;
}

// min sum_i w_i k_i  s.t. [[D F^(Theta) D, e_i], [e_i', k_i]] psd (i = 1..4),
// Theta_nn <= a_max^2 (or == 1 when passive), surrogate power <= P_s, Theta psd.
struct ReflectiveSdp {
  conic::ConicProgram prog;
  int N = 0;
  double objective_scale = 1.0;  // surrogate CRB = objective_scale * c'x

  CMatrix theta(const RVector& x) const { return HermParam(N).to_matrix(x.head(N * N)); }
};

struct ReflectiveSdpOptions {
  bool passive = false;
};

inline ReflectiveSdp build_reflective_sdp(const SurrogateContext& ctx, const CMatrix& R_s, const LinkModel& lk,
                                          double P_s, double a_max, const ReflectiveSdpOptions& opt = {}) {
  ReflectiveSdp out;
  out.N = lk.N();
  const int N = out.N, NN = N * N;
  const int n_vars = NN + 4;
  const HermParam hp(N);
  const AffineFim af = fim_surrogate(ctx);
  const Fim4 f0 = af(ctx.theta0);
  const Eigen::Vector4d d = sdp::fim_scaling(f0);
  out.objective_scale = sdp::crb_or(f0, 1.0);

  sdp::ProgramBuilder pb(n_vars);
  for (int n = 0; n < N; ++n) {
    RVector g = RVector::Zero(n_vars);
    if (opt.passive) {
      g(n) = 1.0;
      pb.add_eq(-1.0, g);
    } else {
      g(n) = -1.0 / (a_max * a_max);
      pb.add_nonneg(1.0, g);
    }
  }
  if (!opt.passive) {
    const HermAffine pw = ctx.sc == SensingCase::AtBs ? power_bs_linearized(ctx) : power_irs_affine(R_s, lk);
    RVector g = RVector::Zero(n_vars);
    g.head(NN) = -pw.param_coeffs(hp) / P_s;
    pb.add_nonneg(1.0 - pw.constant / P_s, g);
  }
  pb.add_psd(sdp::herm_psd_block(N, 0, n_vars));
  std::array<std::array<RVector, 4>, 4> coeffs;
  std::array<std::array<double, 4>, 4> consts;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q <= p; ++q) {
      const HermAffine& e = af.entry[p][q];
      const HermAffine& e2 = af.entry[q][p];
      const double s = d(p) * d(q);
      coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] =
          0.5 * s * (e.param_coeffs(hp) + e2.param_coeffs(hp));
      consts[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)] = 0.5 * s * (e.constant + e2.constant);
    }
  for (int i = 0; i < 4; ++i) {
    sdp::SymExpr blk(5, n_vars);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q <= p; ++q)
        blk.add(p, q, consts[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)],
                coeffs[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)], 0);
    blk.add(4, i, 1.0);
    blk.add_var(4, 4, NN + i);
    pb.add_psd(std::move(blk));
  }
  RVector c = RVector::Zero(n_vars);
  for (int i = 0; i < 4; ++i) c(NN + i) = d(i) * d(i) / out.objective_scale;
  out.prog = pb.finish(c);
  return out;
}

} // namespace irscrb

#endif
