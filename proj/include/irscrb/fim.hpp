#ifndef IRSCRB_FIM_HPP
#define IRSCRB_FIM_HPP

#include <array>
#include <functional>

#include "scenario.hpp"

namespace irscrb {

enum class SensingCase { AtBs, AtIrs };

inline const char* to_string(SensingCase c) { return c == SensingCase::AtBs ? "bs" : "irs"; }

// Everything the FIM of one IRS link needs apart from R_s and psi.
struct LinkModel {
  CMatrix G;  // N x M
  Doa doa;
  cplx beta;
  ArrayGeometry reflect;
  ArrayGeometry sensor;
  double sigma_r2 = 0.0;
  double sigma_b2 = 0.0;
  double sigma_s2 = 0.0;
  double T_c = 1.0;
  int L = 1;

  double symbols() const { return T_c / L; }
  int N() const { return static_cast<int>(G.rows()); }
  int M() const { return static_cast<int>(G.cols()); }
};

inline LinkModel make_link(const ScenarioConfig& cfg, const ChannelSet& cs, int l) {
  const auto i = static_cast<std::size_t>(l);
  LinkModel lm;
  lm.G = cs.G[i];
  lm.doa = cs.truth[i].doa;
  lm.beta = cs.truth[i].beta;
  lm.reflect = cfg.reflect_geometry();
  lm.sensor = cfg.sensor_geometry();
  lm.sigma_r2 = cfg.sigma_r2;
  lm.sigma_b2 = cfg.sigma_b2;
  lm.sigma_s2 = cfg.sigma_s2;
  lm.T_c = cfg.T_c;
  lm.L = cfg.L();
  return lm;
}

// Inverse of a Hermitian positive definite matrix.
inline CMatrix hpd_inverse(const CMatrix& r, const char* what) {
  Eigen::LLT<CMatrix> llt(hermitian_part(r));
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + ": covariance is singular");
  CMatrix inv = llt.solve(CMatrix::Identity(r.rows(), r.cols()));
  return hermitian_part(inv);
}

// R_w = sigma_r^2 G^T Psi Psi^H G^* + sigma_b^2 I
inline CMatrix noise_cov_bs(const CVector& psi, const CMatrix& G, double sigma_r2, double sigma_b2) {
  const RVector mag2 = psi.cwiseAbs2();
  CMatrix r = sigma_r2 * G.transpose() * mag2.cast<cplx>().asDiagonal() * G.conjugate();
  r += sigma_b2 * CMatrix::Identity(G.cols(), G.cols());
  return hermitian_part(r);
}

// R_w_bar = sigma_r^2 |beta|^2 tr(Theta) a_bar a_bar^H + sigma_s^2 I
inline CMatrix noise_cov_irs(const CMatrix& theta, cplx beta, const CVector& a_sensor, double sigma_r2,
                             double sigma_s2) {
  const double t = theta.trace().real();
  CMatrix r = sigma_r2 * std::norm(beta) * t * a_sensor * a_sensor.adjoint();
  r += sigma_s2 * CMatrix::Identity(a_sensor.size(), a_sensor.size());
  return hermitian_part(r);
}

// Derivatives of the per-symbol mean map with respect to xi = [theta, phi, Re b, Im b].
struct MeanDerivatives {
  std::array<CMatrix, 4> D;
  CMatrix W;  // inverse noise covariance
};

inline MeanDerivatives mean_derivatives(SensingCase sc, const CVector& psi, const LinkModel& lk) {
  const SteeringBundle rb = steering_bundle(lk.reflect, lk.doa);
  const CMatrix Gt = lk.G.transpose();
  const CVector v = Gt * psi.cwiseProduct(rb.a);
  const CVector v_t = Gt * psi.cwiseProduct(rb.da_theta);
  const CVector v_p = Gt * psi.cwiseProduct(rb.da_phi);
  MeanDerivatives md;
  CMatrix H, C_t, C_p;
  if (sc == SensingCase::AtBs) {
    H = v * v.transpose();
    C_t = v_t * v.transpose() + v * v_t.transpose();
    C_p = v_p * v.transpose() + v * v_p.transpose();
    md.W = hpd_inverse(noise_cov_bs(psi, lk.G, lk.sigma_r2, lk.sigma_b2), "fim_bs");
  } else {
    const SteeringBundle sb = steering_bundle(lk.sensor, lk.doa);
    H = sb.a * v.transpose();
    C_t = sb.da_theta * v.transpose() + sb.a * v_t.transpose();
    C_p = sb.da_phi * v.transpose() + sb.a * v_p.transpose();
    const CMatrix theta = psi * psi.adjoint();
    md.W = hpd_inverse(noise_cov_irs(theta, lk.beta, sb.a, lk.sigma_r2, lk.sigma_s2), "fim_irs");
  }
  md.D = {lk.beta * C_t, lk.beta * C_p, H, kJ * H};
  return md;
}

// Covariance-derivative part of the AtIrs FIM (independent of R_s).
inline Fim4 fim_irs_cov_term(const CVector& psi, const LinkModel& lk, const CMatrix& W) {
  const SteeringBundle sb = steering_bundle(lk.sensor, lk.doa);
  const double t = psi.squaredNorm();
  const double c = lk.sigma_r2 * t;
  const double b2 = std::norm(lk.beta);
  const CMatrix Dbar = sb.a * sb.a.adjoint();
  std::array<CMatrix, 4> V = {
      c * b2 * (sb.da_theta * sb.a.adjoint() + sb.a * sb.da_theta.adjoint()),
      c * b2 * (sb.da_phi * sb.a.adjoint() + sb.a * sb.da_phi.adjoint()),
      c * 2.0 * lk.beta.real() * Dbar,
      c * 2.0 * lk.beta.imag() * Dbar,
  };
  std::array<CMatrix, 4> WV;
  for (int p = 0; p < 4; ++p) WV[static_cast<std::size_t>(p)] = W * V[static_cast<std::size_t>(p)];
  Fim4 f;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q)
      f(p, q) = lk.symbols() * trace_prod(WV[static_cast<std::size_t>(p)], WV[static_cast<std::size_t>(q)]).real();
  return 0.5 * (f + f.transpose());
}

// FIM as an affine function of R_s:  F_pq = const_pq + Re tr(K_pq R_s).
inline AffineFim fim_affine_rs(SensingCase sc, const CVector& psi, const LinkModel& lk) {
  const MeanDerivatives md = mean_derivatives(sc, psi, lk);
  const double s = 2.0 * lk.symbols();
  std::array<CMatrix, 4> WD;
  for (int q = 0; q < 4; ++q) WD[static_cast<std::size_t>(q)] = md.W * md.D[static_cast<std::size_t>(q)];
  AffineFim af;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const CMatrix K = s * md.D[static_cast<std::size_t>(p)].adjoint() * WD[static_cast<std::size_t>(q)];
      af.entry[p][q].coeff = K.transpose();
      af.entry[p][q].constant = 0.0;
    }
  if (sc == SensingCase::AtIrs) {
    const Fim4 cov = fim_irs_cov_term(psi, lk, md.W);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) af.entry[p][q].constant = cov(p, q);
  }
  return af;
}

inline Fim4 fim(SensingCase sc, const CMatrix& R_s, const CVector& psi, const LinkModel& lk) {
  return fim_affine_rs(sc, psi, lk)(R_s);
}

inline Fim4 fim_bs(const CMatrix& R_s, const CVector& psi, const LinkModel& lk) {
  return fim(SensingCase::AtBs, R_s, psi, lk);
}

inline Fim4 fim_irs(const CMatrix& R_s, const CVector& psi, const LinkModel& lk) {
  return fim(SensingCase::AtIrs, R_s, psi, lk);
}

inline double crb(const Fim4& f) { return inv4(f).trace(); }

// Definitional Gaussian FIM by central differences of the mean map M(xi)
// and the noise covariance R(xi), built directly from steering_upa.
struct OracleFim {
  Fim4 total;
  Fim4 mean_part;
  Fim4 cov_part;
  double max_cov_derivative = 0.0;  // max |dR/dxi_p| entry
};

inline OracleFim fim_numeric_oracle_detail(SensingCase sc, const CMatrix& R_s, const CVector& psi,
                                           const LinkModel& lk, double h = 1e-5) {
  if (!(h >= 1e-7 && h <= 1e-4)) throw InvariantError("fim_numeric_oracle: step outside [1e-7, 1e-4]");
  const CMatrix Psi = psi.asDiagonal();
  auto model = [&](const Eigen::Vector4d& xi, CMatrix& Mmat, CMatrix& R) {
    const Doa d{xi(0), xi(1)};
    const cplx beta(xi(2), xi(3));
    const CVector a = steering_upa(lk.reflect, d);
    if (sc == SensingCase::AtBs) {
      const CMatrix E = target_response_bs(beta, a);
      Mmat = lk.G.transpose() * Psi * E * Psi * lk.G;
      R = lk.sigma_r2 * lk.G.transpose() * Psi * Psi.adjoint() * lk.G.conjugate() +
          lk.sigma_b2 * CMatrix::Identity(lk.M(), lk.M());
    } else {
      const CVector ab = steering_upa(lk.sensor, d);
      const CMatrix Eb = target_response_irs(beta, ab, a);
      Mmat = Eb * Psi * lk.G;
      R = lk.sigma_r2 * Eb * Psi * Psi.adjoint() * Eb.adjoint() +
          lk.sigma_s2 * CMatrix::Identity(ab.size(), ab.size());
    }
  };
  const Eigen::Vector4d xi0(lk.doa.theta, lk.doa.phi, lk.beta.real(), lk.beta.imag());
  CMatrix M0, R0;
  model(xi0, M0, R0);
  Eigen::LLT<CMatrix> llt(R0);
  if (llt.info() != Eigen::Success) throw NumericalError("fim_numeric_oracle: singular noise covariance");
  const CMatrix W = llt.solve(CMatrix::Identity(R0.rows(), R0.cols()));

  std::array<CMatrix, 4> dM, dR;
  OracleFim out;
  for (int p = 0; p < 4; ++p) {
    const double hp = h * std::max(1.0, std::abs(xi0(p)));
    Eigen::Vector4d xp = xi0, xm = xi0;
    xp(p) += hp;
    xm(p) -= hp;
    CMatrix Mp, Rp, Mm, Rm;
    model(xp, Mp, Rp);
    model(xm, Mm, Rm);
    dM[static_cast<std::size_t>(p)] = (Mp - Mm) / (2.0 * hp);
    dR[static_cast<std::size_t>(p)] = (Rp - Rm) / (2.0 * hp);
    out.max_cov_derivative = std::max(out.max_cov_derivative, dR[static_cast<std::size_t>(p)].cwiseAbs().maxCoeff());
  }
  const double ts = lk.symbols();
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const auto ip = static_cast<std::size_t>(p), iq = static_cast<std::size_t>(q);
      const CMatrix WdRp = W * dR[ip], WdRq = W * dR[iq];
      out.cov_part(p, q) = ts * trace_prod(WdRp, WdRq).real();
      const CMatrix G = dM[ip].adjoint() * W * dM[iq];
      out.mean_part(p, q) = ts * 2.0 * trace_prod(G, R_s).real();
    }
  out.cov_part = 0.5 * (out.cov_part + out.cov_part.transpose());
  out.mean_part = 0.5 * (out.mean_part + out.mean_part.transpose());
  out.total = out.cov_part + out.mean_part;
  return out;
}

inline Fim4 fim_numeric_oracle(SensingCase sc, const CMatrix& R_s, const CVector& psi, const LinkModel& lk,
                               double h = 1e-5) {
  return fim_numeric_oracle_detail(sc, R_s, psi, lk, h).total;
}

} // namespace irscrb

#endif
