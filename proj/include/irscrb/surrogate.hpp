#ifndef IRSCRB_SURROGATE_HPP
#define IRSCRB_SURROGATE_HPP

#include <utility>
#include <vector>

#include "fim.hpp"

namespace irscrb {

enum class QKind { ThetaTheta, PhiPhi, ThetaPhi, ThetaBeta, PhiBeta, BetaBeta };

inline const char* to_string(QKind k) {
  switch (k) {
    case QKind::ThetaTheta: return "theta-theta";
    case QKind::PhiPhi: return "phi-phi";
    case QKind::ThetaPhi: return "theta-phi";
    case QKind::ThetaBeta: return "theta-beta";
    case QKind::PhiBeta: return "phi-beta";
    case QKind::BetaBeta: return "beta-beta";
  }
  return "?";
}

// Lifted quantities at the local point Theta0 for one IRS and fixed R_s.
// The noise covariance is evaluated at Theta0 and held fixed.
struct SurrogateContext {
  SensingCase sc = SensingCase::AtBs;
  CMatrix theta0;
  CMatrix R1;   // A G R_s G^H A^H
  CMatrix R2;   // A^H G^* R_w^{-1} G^T A  (AtBs only)
  CMatrix W;    // R_w^{-1}, M x M (AtBs) or N_bar x N_bar (AtIrs)
  CMatrix GRG;  // G R_s G^H
  CVector a, z_theta, z_phi;
  CVector abar, zbar_theta, zbar_phi;
  cplx beta;
  double symbols = 1.0;
  double sigma_r2 = 0.0;
  double t0 = 0.0;   // tr(Theta0)
  Fim4 cov_coef = Fim4::Zero();  // AtIrs covariance term per unit (tr Theta)^2
};

inline CMatrix bs_noise_cov_theta(const CMatrix& theta, const LinkModel& lk) {
  const CVector d = theta.diagonal().real().cast<cplx>();
  CMatrix r = lk.sigma_r2 * lk.G.transpose() * d.asDiagonal() * lk.G.conjugate();
  r += lk.sigma_b2 * CMatrix::Identity(lk.M(), lk.M());
  return hermitian_part(r);
}

inline SurrogateContext make_surrogate_context(SensingCase sc, const CMatrix& theta0, const CMatrix& R_s,
                                               const LinkModel& lk) {
  require_hermitian(theta0, "surrogate context", 1e-9);
  SurrogateContext c;
  c.sc = sc;
  c.theta0 = hermitian_part(theta0);
  const SteeringBundle rb = steering_bundle(lk.reflect, lk.doa);
  c.a = rb.a;
  c.z_theta = rb.z_theta;
  c.z_phi = rb.z_phi;
  c.beta = lk.beta;
  c.symbols = lk.symbols();
  c.sigma_r2 = lk.sigma_r2;
  c.t0 = c.theta0.trace().real();
  c.GRG = hermitian_part(lk.G * R_s * lk.G.adjoint());
  c.R1 = hermitian_part(c.a.asDiagonal() * c.GRG * c.a.conjugate().asDiagonal());
  if (sc == SensingCase::AtBs) {
    c.W = hpd_inverse(bs_noise_cov_theta(c.theta0, lk), "surrogate");
    const CMatrix GtA = lk.G.transpose() * c.a.asDiagonal();
    c.R2 = hermitian_part(GtA.adjoint() * c.W * GtA);
  } else {
    const SteeringBundle sb = steering_bundle(lk.sensor, lk.doa);
    c.abar = sb.a;
    c.zbar_theta = sb.z_theta;
    c.zbar_phi = sb.z_phi;
    c.W = hpd_inverse(noise_cov_irs(c.theta0, lk.beta, sb.a, lk.sigma_r2, lk.sigma_s2), "surrogate");
    const double b2 = std::norm(lk.beta);
    const CMatrix Dbar = sb.a * sb.a.adjoint();
    const std::array<CMatrix, 4> B = {sb.da_theta * sb.a.adjoint() + sb.a * sb.da_theta.adjoint(),
                                      sb.da_phi * sb.a.adjoint() + sb.a * sb.da_phi.adjoint(), Dbar, Dbar};
    const std::array<double, 4> g = {b2, b2, 2.0 * lk.beta.real(), 2.0 * lk.beta.imag()};
    const double s4 = lk.sigma_r2 * lk.sigma_r2;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        const auto ip = static_cast<std::size_t>(p), iq = static_cast<std::size_t>(q);
        const CMatrix WBp = c.W * B[ip], WBq = c.W * B[iq];
        c.cov_coef(p, q) = c.symbols * s4 * g[ip] * g[iq] * trace_prod(WBp, WBq).real();
      }
    c.cov_coef = 0.5 * (c.cov_coef + c.cov_coef.transpose());
  }
  return c;
}

namespace detail {

enum Base { kTheta = 0, kPhi = 1, kBeta = 2 };

// Each derivative matrix is a sum of terms  L x x^T R  (AtBs) or
// L a_bar x^T R (AtIrs) with diagonal L, R; returns the diagonals.
inline std::vector<std::pair<CVector, CVector>> terms(Base b, const SurrogateContext& c) {
  const Eigen::Index n = c.a.size();
  const CVector one_n = CVector::Ones(n);
  if (c.sc == SensingCase::AtBs) {
    switch (b) {
      case kTheta: return {{c.z_theta, one_n}, {one_n, c.z_theta}};
      case kPhi: return {{c.z_phi, one_n}, {one_n, c.z_phi}};
      default: return {{one_n, one_n}};
    }
  }
  const CVector one_s = CVector::Ones(c.abar.size());
  switch (b) {
    case kTheta: return {{c.zbar_theta, one_n}, {one_s, c.z_theta}};
    case kPhi: return {{c.zbar_phi, one_n}, {one_s, c.z_phi}};
    default: return {{one_s, one_n}};
  }
}

// Q_{bp,bq}(Theta) = tr(C_p^H R^{-1} C_q R_s) lifted to Theta; gradient uses
// d tr(X Theta)/dTheta = X^T and d tr(Y Theta^T)/dTheta = Y.
inline cplx q_pair(Base bp, Base bq, const CMatrix& theta, const SurrogateContext& c, CMatrix* grad) {
  const auto tp = terms(bp, c), tq = terms(bq, c);
  const Eigen::Index n = c.a.size();
  if (grad) *grad = CMatrix::Zero(n, n);
  cplx q = 0.0;
  for (const auto& [l1, r1] : tp)
    for (const auto& [l2, r2] : tq) {
      const CMatrix Y = r2.asDiagonal() * c.R1 * r1.conjugate().asDiagonal();
      const cplx ty = Y.cwiseProduct(theta).sum();  // tr(Y Theta^T)
      if (c.sc == SensingCase::AtBs) {
        const CMatrix X = l1.conjugate().asDiagonal() * c.R2 * l2.asDiagonal();
        const cplx tx = trace_prod(X, theta);
        q += tx * ty;
        if (grad) *grad += ty * X.transpose() + tx * Y;
      } else {
        const CVector u1 = l1.cwiseProduct(c.abar), u2 = l2.cwiseProduct(c.abar);
        const cplx sigma = u1.dot(c.W * u2);
        q += sigma * ty;
        if (grad) *grad += sigma * Y;
      }
    }
  return q;
}

inline std::pair<Base, Base> bases(QKind k) {
  switch (k) {
    case QKind::ThetaTheta: return {kTheta, kTheta};
    case QKind::PhiPhi: return {kPhi, kPhi};
    case QKind::ThetaPhi: return {kTheta, kPhi};
    case QKind::ThetaBeta: return {kTheta, kBeta};
    case QKind::PhiBeta: return {kPhi, kBeta};
    case QKind::BetaBeta: return {kBeta, kBeta};
  }
  throw InvariantError("q_value: unknown kind");
}

// Parameter p of xi maps to a base derivative and the factor the mean map carries.
inline Base param_base(int p) { return p == 0 ? kTheta : (p == 1 ? kPhi : kBeta); }
inline cplx param_factor(int p, cplx beta) { return p < 2 ? beta : (p == 2 ? cplx(1.0) : kJ); }

} // namespace detail

inline cplx q_value(QKind k, const CMatrix& theta, const SurrogateContext& c) {
  const auto [bp, bq] = detail::bases(k);
  return detail::q_pair(bp, bq, theta, c, nullptr);
}

inline CMatrix q_grad(QKind k, const CMatrix& theta, const SurrogateContext& c) {
  const auto [bp, bq] = detail::bases(k);
  CMatrix g;
  detail::q_pair(bp, bq, theta, c, &g);
  return g;
}

// FIM of a (possibly non rank-one) Theta with the context's frozen noise covariance.
inline Fim4 fim_lifted(const CMatrix& theta, const SurrogateContext& c) {
  const double s = 2.0 * c.symbols;
  const double t = theta.trace().real();
  Fim4 f;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const cplx mu = s * std::conj(detail::param_factor(p, c.beta)) * detail::param_factor(q, c.beta);
      const cplx qv = detail::q_pair(detail::param_base(p), detail::param_base(q), theta, c, nullptr);
      f(p, q) = (mu * qv).real();
      if (c.sc == SensingCase::AtIrs) f(p, q) += c.cov_coef(p, q) * t * t;
    }
  return 0.5 * (f + f.transpose());
}

// Exact FIM as a function of Theta, noise covariance evaluated at Theta.
inline Fim4 fim_of_theta(SensingCase sc, const CMatrix& theta, const CMatrix& R_s, const LinkModel& lk) {
  return fim_lifted(theta, make_surrogate_context(sc, theta, R_s, lk));
}

// First-order surrogate of the FIM around Theta0, affine in Theta.
inline AffineFim fim_surrogate(const SurrogateContext& c) {
  const double s = 2.0 * c.symbols;
  const Eigen::Index n = c.a.size();
  AffineFim af;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const cplx mu = s * std::conj(detail::param_factor(p, c.beta)) * detail::param_factor(q, c.beta);
      CMatrix g;
      const cplx q0 = detail::q_pair(detail::param_base(p), detail::param_base(q), c.theta0, c, &g);
      HermAffine& e = af.entry[p][q];
      e.coeff = mu * g;
      e.constant = (mu * (q0 - g.cwiseProduct(c.theta0).sum())).real();
      if (c.sc == SensingCase::AtIrs) {
        // (tr Theta)^2 ~ 2 t0 tr(Theta) - t0^2
        e.coeff += CMatrix::Identity(n, n) * (c.cov_coef(p, q) * 2.0 * c.t0);
        e.constant -= c.cov_coef(p, q) * c.t0 * c.t0;
      }
    }
  return af;
}

inline Fim4 fim_linearized(const CMatrix& theta, const SurrogateContext& c) { return fim_surrogate(c)(theta); }

// ---- power models --------------------------------------------------------

// |b|^2 tr(A^H A T) tr(R1 T^T) + s_r^2 |b|^2 tr(A^H A T)^2 + tr(G R_s G^H Diag T) + 2 s_r^2 tr T
inline double power_bs_exact(const CMatrix& theta, const CMatrix& R_s, const LinkModel& lk) {
  const CVector a = steering_upa(lk.reflect, lk.doa);
  const CMatrix GRG = lk.G * R_s * lk.G.adjoint();
  const CMatrix R1 = a.asDiagonal() * GRG * a.conjugate().asDiagonal();
  const double b2 = std::norm(lk.beta);
  double g = 0.0, diag_term = 0.0;
  for (Eigen::Index n = 0; n < a.size(); ++n) {
    g += std::norm(a(n)) * theta(n, n).real();
    diag_term += (GRG(n, n) * theta(n, n)).real();
  }
  const double h = R1.cwiseProduct(theta).sum().real();
  return b2 * g * h + lk.sigma_r2 * b2 * g * g + diag_term + 2.0 * lk.sigma_r2 * theta.trace().real();
}

inline double power_bs_exact(const CVector& psi, const CMatrix& R_s, const LinkModel& lk) {
  return power_bs_exact(CMatrix(psi * psi.adjoint()), R_s, lk);
}

// Matrix form: tr(PEPG R G^H P^H E^H P^H) + s_r^2 tr(PEP P^H E^H P^H) + tr(PGRG^HP^H) + 2 s_r^2 tr(PP^H)
inline double power_bs_matrix(const CVector& psi, const CMatrix& R_s, const LinkModel& lk) {
  const CMatrix Psi = psi.asDiagonal();
  const CMatrix E = target_response_bs(lk.beta, steering_upa(lk.reflect, lk.doa));
  const CMatrix X1 = Psi * E * Psi * lk.G;
  const CMatrix X2 = Psi * E * Psi;
  const CMatrix X3 = Psi * lk.G;
  return (X1 * R_s * X1.adjoint()).trace().real() + lk.sigma_r2 * (X2 * X2.adjoint()).trace().real() +
         (X3 * R_s * X3.adjoint()).trace().real() + 2.0 * lk.sigma_r2 * (Psi * Psi.adjoint()).trace().real();
}

// First-order expansion of power_bs_exact at ctx.theta0 (exact in its linear terms).
inline HermAffine power_bs_linearized(const SurrogateContext& c) {
  const Eigen::Index n = c.a.size();
  const double b2 = std::norm(c.beta);
  const CVector aa = c.a.cwiseAbs2().cast<cplx>();
  double g0 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) g0 += aa(i).real() * c.theta0(i, i).real();
  const double h0 = c.R1.cwiseProduct(c.theta0).sum().real();
  HermAffine f;
  f.coeff = b2 * (h0 * CMatrix(aa.asDiagonal()) + g0 * c.R1);
  f.coeff += c.sigma_r2 * b2 * 2.0 * g0 * CMatrix(aa.asDiagonal());
  f.coeff += CMatrix(c.GRG.diagonal().asDiagonal());
  f.coeff += 2.0 * c.sigma_r2 * CMatrix::Identity(n, n);
  f.constant = -b2 * g0 * h0 - c.sigma_r2 * b2 * g0 * g0;
  return f;
}

// tr(G R_s G^H Diag(Theta)) + s_r^2 tr(Theta), exactly affine.
inline HermAffine power_irs_affine(const CMatrix& R_s, const LinkModel& lk) {
  const CMatrix GRG = lk.G * R_s * lk.G.adjoint();
  HermAffine f;
  f.coeff = CMatrix(GRG.diagonal().asDiagonal());
  f.coeff += lk.sigma_r2 * CMatrix::Identity(lk.N(), lk.N());
  f.constant = 0.0;
  return f;
}

inline double power_irs_exact(const CMatrix& theta, const CMatrix& R_s, const LinkModel& lk) {
  return power_irs_affine(R_s, lk)(theta);
}

inline double power_irs_exact(const CVector& psi, const CMatrix& R_s, const LinkModel& lk) {
  return power_irs_exact(CMatrix(psi * psi.adjoint()), R_s, lk);
}

// tr(Psi G R_s G^H Psi^H) + s_r^2 tr(Psi Psi^H)
inline double power_irs_matrix(const CVector& psi, const CMatrix& R_s, const LinkModel& lk) {
  const CMatrix X = psi.asDiagonal() * lk.G;
  return (X * R_s * X.adjoint()).trace().real() + lk.sigma_r2 * psi.squaredNorm();
}

inline double power_exact(SensingCase sc, const CVector& psi, const CMatrix& R_s, const LinkModel& lk) {
  return sc == SensingCase::AtBs ? power_bs_exact(psi, R_s, lk) : power_irs_exact(psi, R_s, lk);
}

} // namespace irscrb

#endif
