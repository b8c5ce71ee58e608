#ifndef IRSCRB_CHECKS_HPP
#define IRSCRB_CHECKS_HPP

#include <chrono>
#include <sstream>
#include <string>
#include <vector>

#include "conic.hpp"
#include "surrogate.hpp"

namespace irscrb::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Unit-scale random link: every quantity O(1) so relative checks are meaningful.
inline LinkModel random_link(Rng& rng, int M, int nh, int nv, int snh, int snv) {
  LinkModel lk;
  const double lambda = 0.1 + 0.2 * rng.uniform();
  lk.reflect = {nh, nv, lambda * (0.3 + 0.4 * rng.uniform()), lambda * (0.3 + 0.4 * rng.uniform()), lambda};
  lk.sensor = {snh, snv, lambda * (0.3 + 0.4 * rng.uniform()), lambda * (0.3 + 0.4 * rng.uniform()), lambda};
  lk.G = rng.cnormal_matrix(nh * nv, M);
  lk.doa = {0.3 + 2.5 * rng.uniform(), -2.8 + 5.6 * rng.uniform()};
  lk.beta = rng.cnormal() + cplx(0.3, -0.2);
  lk.sigma_r2 = 0.05 + 0.5 * rng.uniform();
  lk.sigma_b2 = 0.05 + 0.5 * rng.uniform();
  lk.sigma_s2 = 0.05 + 0.5 * rng.uniform();
  lk.L = 1 + static_cast<int>(3 * rng.uniform());
  lk.T_c = 10.0 * lk.L;
  return lk;
}

inline CMatrix random_psd(Rng& rng, int n, int rank = -1) {
  const int r = rank < 0 ? n : rank;
  const CMatrix X = rng.cnormal_matrix(n, r);
  return hermitian_part(X * X.adjoint() / r);
}

inline CMatrix random_hermitian(Rng& rng, int n) { return hermitian_part(rng.cnormal_matrix(n, n)); }

inline double rel_fro(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  const double d = ref.norm();
  return d == 0.0 ? a.norm() : (a - ref).norm() / d;
}

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}
inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}
} // namespace detail

// Closed-form FIM against the finite-difference Gaussian FIM.
inline CheckResult fim_oracle(int scenarios = 20, double tol = 1e-4, double time_limit = 5.0) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int n = 0;
  for (SensingCase sc : {SensingCase::AtBs, SensingCase::AtIrs}) {
    Rng rng(sc == SensingCase::AtBs ? 1001 : 2002);
    for (int t = 0; t < scenarios; ++t, ++n) {
      const LinkModel lk = random_link(rng, 4, 2, 2, 2, 2);
      const CMatrix Rs = random_psd(rng, 4);
      const CVector psi = rng.cnormal_vector(4);
      worst = std::max(worst, rel_fro(fim(sc, Rs, psi, lk), fim_numeric_oracle(sc, Rs, psi, lk)));
    }
  }
  const double dt = detail::seconds_since(t0);
  return {"fim-oracle", worst <= tol && dt < time_limit,
          std::to_string(n) + " scenarios, max rel err " + detail::fmt(worst) + " (tol " + detail::fmt(tol) + "), " +
              detail::fmt(dt) + " s (limit " + detail::fmt(time_limit) + ")"};
}

inline CheckResult steering_derivatives(int draws = 100, double tol = 1e-6) {
  Rng rng(3003);
  const double h = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < draws; ++t) {
    const ArrayGeometry g{1 + static_cast<int>(5 * rng.uniform()), 1 + static_cast<int>(5 * rng.uniform()),
                          0.02 + 0.08 * rng.uniform(), 0.02 + 0.08 * rng.uniform(), 0.1};
    const Doa d{0.05 + 3.0 * rng.uniform(), -3.1 + 6.2 * rng.uniform()};
    const SteeringBundle b = steering_bundle(g, d);
    const CVector fd_t = (steering_upa(g, {d.theta + h, d.phi}) - steering_upa(g, {d.theta - h, d.phi})) / (2 * h);
    const CVector fd_p = (steering_upa(g, {d.theta, d.phi + h}) - steering_upa(g, {d.theta, d.phi - h})) / (2 * h);
    worst = std::max(worst, (b.da_theta - fd_t).norm() / std::max(1.0, fd_t.norm()));
    worst = std::max(worst, (b.da_phi - fd_p).norm() / std::max(1.0, fd_p.norm()));
  }
  return {"steering-derivatives", worst <= tol,
          std::to_string(draws) + " draws, max rel err " + detail::fmt(worst) + " (tol " + detail::fmt(tol) + ")"};
}

inline CheckResult surrogate_tangency(double tol_tangent = 1e-9, double tol_grad = 1e-6) {
  Rng rng(4004);
  const QKind kinds[] = {QKind::ThetaTheta, QKind::PhiPhi,  QKind::ThetaPhi,
                         QKind::ThetaBeta,  QKind::PhiBeta, QKind::BetaBeta};
  double tangent = 0.0, power = 0.0, grad = 0.0;
  for (int t = 0; t < 10; ++t) {
    const LinkModel lk = random_link(rng, 4, 2, 2, 2, 2);
    const CMatrix Rs = random_psd(rng, 4);
    const CMatrix theta0 = random_psd(rng, 4);
    for (SensingCase sc : {SensingCase::AtBs, SensingCase::AtIrs}) {
      const SurrogateContext c = make_surrogate_context(sc, theta0, Rs, lk);
      const Fim4 exact = fim_of_theta(sc, theta0, Rs, lk);
      tangent = std::max(tangent, (fim_linearized(theta0, c) - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff());
      for (QKind k : kinds) {
        const CMatrix dir = random_hermitian(rng, 4);
        const double h = 1e-6 * theta0.norm() / dir.norm();
        const cplx fd = (q_value(k, theta0 + h * dir, c) - q_value(k, theta0 - h * dir, c)) / (2 * h);
        const cplx an = q_grad(k, theta0, c).cwiseProduct(dir).sum();
        const double scale = std::max(std::abs(an), std::abs(q_value(k, theta0, c)) / theta0.norm());
        grad = std::max(grad, std::abs(fd - an) / scale);
      }
    }
    const SurrogateContext cb = make_surrogate_context(SensingCase::AtBs, theta0, Rs, lk);
    const double p0 = power_bs_exact(theta0, Rs, lk);
    power = std::max(power, std::abs(power_bs_linearized(cb)(theta0) - p0) / p0);
  }
  const bool ok = tangent <= tol_tangent && power <= tol_tangent && grad <= tol_grad;
  return {"surrogate-tangency", ok,
          "fim " + detail::fmt(tangent) + ", power " + detail::fmt(power) + " (tol " + detail::fmt(tol_tangent) +
              "), q_grad " + detail::fmt(grad) + " (tol " + detail::fmt(tol_grad) + ")"};
}

// Matrix vs Theta forms of the IRS power, plus a Monte-Carlo average of the
// radiated power over explicit symbol draws.
inline CheckResult power_models(int symbols = 100000, double tol_forms = 1e-9, double tol_mc = 0.02) {
  Rng rng(5005);
  double forms = 0.0;
  for (int t = 0; t < 10; ++t) {
    const LinkModel lk = random_link(rng, 4, 2, 2, 2, 2);
    const CMatrix Rs = random_psd(rng, 4);
    const CVector psi = rng.cnormal_vector(4);
    const double a = power_bs_matrix(psi, Rs, lk), b = power_bs_exact(psi, Rs, lk);
    const double c = power_irs_matrix(psi, Rs, lk), d = power_irs_exact(psi, Rs, lk);
    forms = std::max({forms, std::abs(a - b) / a, std::abs(c - d) / c});
  }
  double mc = 0.0;
  for (SensingCase sc : {SensingCase::AtBs, SensingCase::AtIrs}) {
    const LinkModel lk = random_link(rng, 4, 2, 2, 2, 2);
    const CMatrix Rs = random_psd(rng, 4);
    const CVector psi = rng.cnormal_vector(4);
    const CMatrix Psi = psi.asDiagonal();
    const CMatrix E = target_response_bs(lk.beta, steering_upa(lk.reflect, lk.doa));
    const CMatrix S = psd_sqrt(Rs);
    const double sr = std::sqrt(lk.sigma_r2);
    double acc = 0.0;
    for (int i = 0; i < symbols; ++i) {
      const CVector s = S * rng.cnormal_vector(4);
      const CVector x1 = Psi * lk.G * s + Psi * (sr * rng.cnormal_vector(4));
      acc += x1.squaredNorm();
      if (sc == SensingCase::AtBs) {
        const CVector x2 = Psi * (E * x1 + sr * rng.cnormal_vector(4));
        acc += x2.squaredNorm();
      }
    }
    const double analytic = power_exact(sc, psi, Rs, lk);
    mc = std::max(mc, std::abs(acc / symbols - analytic) / analytic);
  }
  return {"power-models", forms <= tol_forms && mc <= tol_mc,
          "forms " + detail::fmt(forms) + " (tol " + detail::fmt(tol_forms) + "), monte-carlo " + detail::fmt(mc) +
              " over " + std::to_string(symbols) + " symbols (tol " + detail::fmt(tol_mc) + ")"};
}

inline CheckResult conic_suite(double tol = 1e-6) {
  using namespace conic;
  std::vector<std::string> failed;
  double worst = 0.0;
  auto note = [&](const std::string& what, double err) {
    worst = std::max(worst, err);
    if (!(err <= tol)) failed.push_back(what);
  };
  // min tr(C X) s.t. tr X = 1, X psd
  {
    RMatrix C = RMatrix::Zero(3, 3);
    C.diagonal() << 3.0, 1.0, 2.0;
    const int m = svec_size(3);
    ConicProgram p;
    p.c = svec(C);
    p.A = RMatrix::Zero(1 + m, m);
    p.b = RVector::Zero(1 + m);
    p.A.row(0) = svec(RMatrix::Identity(3, 3)).transpose();
    p.b(0) = 1.0;
    p.A.bottomRows(m) = -RMatrix::Identity(m, m);
    p.cones = {{ConeKind::Zero, 1}, {ConeKind::Psd, 3}};
    const ConicSolution s = solve(p);
    if (s.status != SolveStatus::Optimal) failed.push_back("min-eig status");
    else note("min-eig", std::abs(s.objective - 1.0));
  }
  // LP: min -x1 - x2, x1 + 2 x2 <= 4, 3 x1 + x2 <= 6, x >= 0
  {
    ConicProgram p;
    p.c = -RVector::Ones(2);
    p.A.resize(4, 2);
    p.A << 1, 2, 3, 1, -1, 0, 0, -1;
    p.b.resize(4);
    p.b << 4, 6, 0, 0;
    p.cones = {{ConeKind::NonNeg, 4}};
    const ConicSolution s = solve(p);
    if (s.status != SolveStatus::Optimal) failed.push_back("lp status");
    else note("lp", std::max({std::abs(s.x(0) - 1.6), std::abs(s.x(1) - 1.2), std::abs(s.objective + 2.8)}));
  }
  // x >= 1 and x <= 0
  {
    ConicProgram p;
    p.c = RVector::Ones(1);
    p.A.resize(2, 1);
    p.A << -1.0, 1.0;
    p.b.resize(2);
    p.b << -1.0, 0.0;
    p.cones = {{ConeKind::NonNeg, 2}};
    if (solve(p).status != SolveStatus::Infeasible) failed.push_back("infeasible pair");
  }
  // Hermitian min eigenvalue through the real embedding, N = 2
  {
    Rng rng(6006);
    CMatrix C = rng.cnormal_matrix(2, 2);
    C = (C + C.adjoint()).eval();
    const HermParam hp(2);
    const int d = hp.dim(), m = svec_size(4);
    ConicProgram p;
    p.c = HermAffine{0.0, C.transpose()}.param_coeffs(hp);
    p.A = RMatrix::Zero(1 + m, d);
    p.b = RVector::Zero(1 + m);
    for (int i = 0; i < 2; ++i) p.A(0, i) = 1.0;
    p.b(0) = 1.0;
    for (int k = 0; k < d; ++k) p.A.block(1, k, m, 1) = -svec(herm_real_embed(hp.basis(k)));
    p.cones = {{ConeKind::Zero, 1}, {ConeKind::Psd, 4}};
    const ConicSolution s = solve(p);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(C);
    if (s.status != SolveStatus::Optimal) failed.push_back("hermitian status");
    else note("hermitian", std::abs(s.objective - es.eigenvalues()(0)) / (1 + std::abs(es.eigenvalues()(0))));
  }
  std::string detail = "max err " + detail::fmt(worst) + " (tol " + detail::fmt(tol) + ")";
  for (const auto& f : failed) detail += ", failed: " + f;
  return {"conic-suite", failed.empty(), detail};
}

inline CheckResult dwell_time_scaling(double tol = 1e-10) {
  Rng rng(7007);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t)
    for (SensingCase sc : {SensingCase::AtBs, SensingCase::AtIrs}) {
      LinkModel lk = random_link(rng, 4, 2, 2, 2, 2);
      const CMatrix Rs = random_psd(rng, 4);
      const CVector psi = rng.cnormal_vector(4);
      const double c1 = crb(fim(sc, Rs, psi, lk));
      lk.T_c *= 2;
      const double c2 = crb(fim(sc, Rs, psi, lk));
      worst = std::max(worst, std::abs(c2 - c1 / 2) / (c1 / 2));
    }
  return {"dwell-time-scaling", worst <= tol, "max rel err " + detail::fmt(worst) + " (tol " + detail::fmt(tol) + ")"};
}

inline std::vector<CheckResult> core_suite() {
  return {fim_oracle(), steering_derivatives(), surrogate_tangency(), power_models(), conic_suite(),
          dwell_time_scaling()};
}

} // namespace irscrb::checks

#endif
