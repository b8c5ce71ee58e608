#ifndef IRSCRB_OPTIMIZER_HPP
#define IRSCRB_OPTIMIZER_HPP

#include <limits>
#include <string>
#include <vector>

#include "sdp_builders.hpp"

namespace irscrb {

enum class Scheme { Proposed, TransmitOnly, ReflectiveOnly, PassiveIrs };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::TransmitOnly: return "transmit-only";
    case Scheme::ReflectiveOnly: return "reflective-only";
    case Scheme::PassiveIrs: return "passive-irs";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& s) {
  for (Scheme k : {Scheme::Proposed, Scheme::TransmitOnly, Scheme::ReflectiveOnly, Scheme::PassiveIrs})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown scheme '" + s + "'");
}

inline SensingCase parse_case(const std::string& s) {
  if (s == "bs") return SensingCase::AtBs;
  if (s == "irs") return SensingCase::AtIrs;
  throw ConfigError("unknown sensing case '" + s + "' (expected bs or irs)");
}

struct AoOptions {
  int max_outer_iters = 15;
  int max_sca_iters = 30;
  double rel_tol = 1e-4;
  int n_randomizations = 200;
  std::uint64_t seed = 1;
  bool transmit_first = true;
  bool passive_zero_sigma_r = false;
  double solver_tol = 1e-7;

  void validate() const {
    if (max_outer_iters < 0 || max_sca_iters < 1 || n_randomizations < 1)
      throw ConfigError("iteration budgets must be positive");
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("rel_tol must lie in (0, 1)");
    if (!(solver_tol > 0.0)) throw ConfigError("solver_tol must be > 0");
  }
};

// Everything fixed for one channel draw.
struct Problem {
  SensingCase sc = SensingCase::AtBs;
  std::vector<LinkModel> links;
  double P_t = 1.0;
  double P_s = 1.0;
  double a_max = 1.0;

  int L() const { return static_cast<int>(links.size()); }
  int M() const { return links.front().M(); }
  int N() const { return links.front().N(); }
};

inline Problem make_problem(const ScenarioConfig& cfg, const ChannelSet& cs, SensingCase sc) {
  Problem p;
  p.sc = sc;
  for (int l = 0; l < cfg.L(); ++l) p.links.push_back(make_link(cfg, cs, l));
  p.P_t = cfg.P_t;
  p.P_s = cfg.P_s;
  p.a_max = cfg.a_max;
  return p;
}

inline double safe_crb(const Fim4& f) {
  try {
    const double v = crb(f);
    return std::isfinite(v) && v > 0 ? v : std::numeric_limits<double>::infinity();
  } catch (const SingularFimError&) {
    return std::numeric_limits<double>::infinity();
  }
}

inline double crb_of(const Problem& pr, int l, const CMatrix& R, const CVector& psi) {
  return safe_crb(fim(pr.sc, R, psi, pr.links[static_cast<std::size_t>(l)]));
}

inline std::vector<double> crbs_of(const Problem& pr, const std::vector<CMatrix>& R, const std::vector<CVector>& psi) {
  std::vector<double> out;
  for (int l = 0; l < pr.L(); ++l)
    out.push_back(crb_of(pr, l, R[static_cast<std::size_t>(l)], psi[static_cast<std::size_t>(l)]));
  return out;
}

// Ties go to the lowest index.
inline double max_value(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  return m;
}

inline std::vector<CMatrix> isotropic(const Problem& pr) {
  return std::vector<CMatrix>(static_cast<std::size_t>(pr.L()),
                              (pr.P_t / pr.M()) * CMatrix::Identity(pr.M(), pr.M()));
}

// Largest c in [0, 1] with power(c psi) <= P_s. Power is increasing in c.
inline CVector scale_to_power(SensingCase sc, const CVector& psi, const CMatrix& R, const LinkModel& lk,
                              double P_s) {
  const double p1 = power_exact(sc, psi, R, lk);
  if (p1 <= P_s) return psi;
  if (sc == SensingCase::AtIrs) {
    CVector out = psi * std::sqrt(P_s / p1);
    while (power_exact(sc, out, R, lk) > P_s) out *= 1.0 - 1e-15;
    return out;
  }
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (power_exact(sc, CVector(mid * psi), R, lk) <= P_s ? lo : hi) = mid;
  }
  return lo * psi;
}

// a_max e^{j arg r} with r standard complex Gaussian, scaled into the power budget.
inline std::vector<CVector> initial_reflect(const Problem& pr, const std::vector<CMatrix>& R, std::uint64_t seed,
                                            bool passive) {
  const Rng root(seed);
  std::vector<CVector> out;
  for (int l = 0; l < pr.L(); ++l) {
    Rng rng = root.split({static_cast<std::uint64_t>(l), stream::kInit});
    CVector psi = rng.cnormal_vector(pr.N());
    const double amp = passive ? 1.0 : pr.a_max;
    for (auto& v : psi) v = amp * std::exp(kJ * std::arg(v));
    if (!passive)
      psi = scale_to_power(pr.sc, psi, R[static_cast<std::size_t>(l)], pr.links[static_cast<std::size_t>(l)], pr.P_s);
    out.push_back(psi);
  }
  return out;
}

// ---- feasibility --------------------------------------------------------

struct Feasibility {
  bool ok = true;
  std::string violations;
};

inline Feasibility check_feasible(const Problem& pr, const std::vector<CMatrix>& R, const std::vector<CVector>& psi,
                                  bool passive, double rel = 1e-6) {
  Feasibility f;
  auto fail = [&](const std::string& m) {
    f.ok = false;
    f.violations += (f.violations.empty() ? "" : "; ") + m;
  };
  double tr = 0.0;
  for (int l = 0; l < pr.L(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    tr += R[i].trace().real();
    if (min_eigenvalue(R[i]) < -rel * std::max(1.0, R[i].norm())) fail("R_s of IRS " + std::to_string(l) + " not psd");
    const double amax = psi[i].cwiseAbs().maxCoeff();
    if (passive) {
      if ((psi[i].cwiseAbs().array() - 1.0).abs().maxCoeff() > rel) fail("passive IRS " + std::to_string(l) + " not unit modulus");
    } else {
      if (amax > pr.a_max * (1 + rel)) fail("amplitude at IRS " + std::to_string(l));
      if (power_exact(pr.sc, psi[i], R[i], pr.links[i]) > pr.P_s * (1 + rel)) fail("IRS power at IRS " + std::to_string(l));
    }
  }
  if (tr / pr.L() > pr.P_t * (1 + rel)) fail("BS power");
  return f;
}

// ---- transmit step ------------------------------------------------------

inline CMatrix psd_clamp(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  const RVector ev = es.eigenvalues().cwiseMax(0.0);
  return hermitian_part(es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint());
}

// Globally optimal covariances for fixed reflect states. The result is never
// worse than R_ref when R_ref is feasible.
inline std::vector<CMatrix> optimize_transmit(const Problem& pr, const std::vector<CVector>& psi,
                                              const std::vector<CMatrix>& R_ref, const AoOptions& opts,
                                              bool passive = false) {
  // F is affine and monotone in R_s, so singular at a full-rank covariance
  // means singular for every covariance
  const std::vector<double> iso = crbs_of(pr, isotropic(pr), psi);
  for (int l = 0; l < pr.L(); ++l)
    if (!std::isfinite(iso[static_cast<std::size_t>(l)]))
      throw UnboundedCrbError("transmit step: FIM of IRS " + std::to_string(l) + " is singular for every R_s");
  const TransmitSdp sdp =
      build_transmit_sdp(pr.sc, psi, pr.links, pr.P_t, pr.P_s, R_ref, TransmitSdpOptions{!passive});
  const conic::ConicSolution sol = conic::solve(sdp.prog, opts.solver_tol);
  if (sol.status == conic::SolveStatus::Infeasible)
    throw UnboundedCrbError("transmit step: no covariance gives a finite CRB (FIM singular for every R_s)");
  if (!sol.usable())
    throw NumericalError(std::string("transmit step: conic solver returned ") + conic::to_string(sol.status) +
                         " after " + std::to_string(sol.iterations) + " iterations (primal residual " +
                         std::to_string(sol.primal_residual) + ", dual residual " + std::to_string(sol.dual_residual) +
                         ")");
  std::vector<CMatrix> R = sdp.covariances(sol.x);
  double tr = 0.0;
  const HermParam hp(pr.M());
  for (int l = 0; l < pr.L(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    R[i] = psd_clamp(R[i]);
    if (!passive) {
      // solver tolerance can leave the IRS budget exceeded by ~tol; pull back
      const double p = power_exact(pr.sc, psi[i], R[i], pr.links[i]);
      if (p > pr.P_s) {
        const double c0 = power_exact(pr.sc, psi[i], CMatrix::Zero(pr.M(), pr.M()), pr.links[i]);
        R[i] *= std::max(0.0, (pr.P_s - c0) / (p - c0));
      }
    }
    tr += R[i].trace().real();
  }
  if (tr / pr.L() > pr.P_t)
    for (auto& r : R) r *= pr.P_t * pr.L() / tr;
  if (check_feasible(pr, R_ref, psi, passive, 1e-9).ok &&
      max_value(crbs_of(pr, R_ref, psi)) < max_value(crbs_of(pr, R, psi)))
    return R_ref;
  return R;
}

// ---- reflective step ----------------------------------------------------

struct ScaResult {
  CMatrix theta;
  std::vector<double> crb_trace;        // exact CRB of the lifted iterate, index 0 = start
  std::vector<double> surrogate_trace;  // SDP objective per iteration
  int iterations = 0;
  std::string stop_reason;
};

inline double theta_crb(const Problem& pr, int l, const CMatrix& theta, const CMatrix& R) {
  return safe_crb(fim_of_theta(pr.sc, theta, R, pr.links[static_cast<std::size_t>(l)]));
}

inline double theta_power(const Problem& pr, int l, const CMatrix& theta, const CMatrix& R) {
  const LinkModel& lk = pr.links[static_cast<std::size_t>(l)];
  return pr.sc == SensingCase::AtBs ? power_bs_exact(theta, R, lk) : power_irs_exact(theta, R, lk);
}

inline ScaResult optimize_reflective_sca(const Problem& pr, int l, const CMatrix& theta_init, const CMatrix& R,
                                         const AoOptions& opts, bool passive = false) {
  const LinkModel& lk = pr.links[static_cast<std::size_t>(l)];
  ScaResult res;
  res.theta = hermitian_part(theta_init);
  const double a2 = passive ? 1.0 : pr.a_max * pr.a_max;
  if (res.theta.diagonal().real().maxCoeff() > a2 * (1 + 1e-9) ||
      (!passive && theta_power(pr, l, res.theta, R) > pr.P_s * (1 + 1e-6)))
    throw NumericalError("reflective step: starting point violates the amplitude or power constraint; "
                         "re-initialize the reflect state");
  double cur = theta_crb(pr, l, res.theta, R);
  res.crb_trace.push_back(cur);
  for (int it = 0; it < opts.max_sca_iters; ++it) {
    const SurrogateContext ctx = make_surrogate_context(pr.sc, res.theta, R, lk);
    const ReflectiveSdp sdp = build_reflective_sdp(ctx, R, lk, pr.P_s, pr.a_max, ReflectiveSdpOptions{passive});
    const conic::ConicSolution sol = conic::solve(sdp.prog, opts.solver_tol);
    res.iterations = it + 1;
    if (!sol.usable()) {
      res.stop_reason = std::string("solver ") + conic::to_string(sol.status);
      break;
    }
    res.surrogate_trace.push_back(sdp.objective_scale * sdp.prog.c.dot(sol.x));
    CMatrix cand = psd_clamp(sdp.theta(sol.x));
    if (passive)
      for (int n = 0; n < pr.N(); ++n) cand(n, n) = 1.0;
    // backtrack toward the incumbent if the exact CRB or exact power got worse
    double step = 1.0, val = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 12; ++bt, step *= 0.5) {
      const CMatrix t = hermitian_part(res.theta + step * (cand - res.theta));
      val = theta_crb(pr, l, t, R);
      const bool power_ok = passive || theta_power(pr, l, t, R) <= pr.P_s * (1 + 1e-9);
      if (power_ok && val <= cur) {
        cand = t;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.stop_reason = "no descent";
      break;
    }
    const double change = (cur - val) / cur;
    res.theta = cand;
    cur = val;
    res.crb_trace.push_back(cur);
    if (change < opts.rel_tol) {
      res.stop_reason = "converged";
      break;
    }
  }
  if (res.stop_reason.empty()) res.stop_reason = "max-iter";
  return res;
}

// Candidate 0 is the principal eigenvector, the rest are Theta^{1/2} r draws.
// Every candidate is clipped to the amplitude bound (or projected to unit
// modulus when passive) and screened by the exact power; the lowest exact
// CRB wins.
inline CVector gaussian_randomization(const Problem& pr, int l, const CMatrix& theta, const CMatrix& R, int n,
                                      Rng& rng, bool passive = false) {
  if (n < 1) throw InvariantError("gaussian_randomization: n must be >= 1");
  const LinkModel& lk = pr.links[static_cast<std::size_t>(l)];
  const CMatrix S = psd_sqrt(hermitian_part(theta));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(theta));
  const int N = pr.N();
  CVector best;
  double best_crb = std::numeric_limits<double>::infinity();
  int rejected_power = 0;
  for (int i = 0; i < n; ++i) {
    CVector psi = i == 0 ? CVector(std::sqrt(std::max(0.0, es.eigenvalues()(N - 1))) * es.eigenvectors().col(N - 1))
                         : CVector(S * rng.cnormal_vector(N));
    if (passive) {
      for (auto& v : psi) v = std::abs(v) > 0 ? v / std::abs(v) : cplx(1.0);
    } else {
      const double m = psi.cwiseAbs().maxCoeff();
      if (m > pr.a_max) psi *= pr.a_max / m;
      if (power_exact(pr.sc, psi, R, lk) > pr.P_s) {
        ++rejected_power;
        continue;
      }
    }
    const double v = safe_crb(fim(pr.sc, R, psi, lk));
    if (!best.size() || v < best_crb) {
      best = psi;
      best_crb = v;
    }
  }
  if (!best.size())
    throw NumericalError("gaussian_randomization: all " + std::to_string(rejected_power) +
                         " candidates violate the IRS power constraint");
  return best;
}

// ---- alternating optimization -------------------------------------------

struct AoTrace {
  Scheme scheme = Scheme::Proposed;
  std::vector<double> max_crb;                // index 0 = initial point
  std::vector<std::vector<double>> irs_crb;   // per entry of max_crb
  std::vector<CMatrix> R_s;
  std::vector<CVector> psi;
  int outer_iters = 0;
  int sca_iters = 0;
  std::string status;

  double final_max_crb() const { return max_crb.back(); }
};

inline AoTrace run_benchmark(Scheme scheme, const Problem& problem, const AoOptions& opts) {
  opts.validate();
  const bool passive = scheme == Scheme::PassiveIrs;
  Problem pr = problem;
  if (passive && opts.passive_zero_sigma_r)
    for (auto& lk : pr.links) lk.sigma_r2 = 0.0;
  const bool do_tx = scheme != Scheme::ReflectiveOnly;
  const bool do_rf = scheme != Scheme::TransmitOnly;

  AoTrace tr;
  tr.scheme = scheme;
  tr.R_s = isotropic(pr);
  tr.psi = initial_reflect(pr, tr.R_s, opts.seed, passive);
  std::vector<double> cur = crbs_of(pr, tr.R_s, tr.psi);
  tr.max_crb.push_back(max_value(cur));
  tr.irs_crb.push_back(cur);
  tr.status = "max-iter";
  const Rng root(opts.seed);

  auto transmit_step = [&]() {
    std::vector<CMatrix> R = optimize_transmit(pr, tr.psi, tr.R_s, opts, passive);
    const std::vector<double> c = crbs_of(pr, R, tr.psi);
    if (max_value(c) <= max_value(cur)) {
      tr.R_s = std::move(R);
      cur = c;
    }
  };
  // IRS l's CRB depends on its own reflect state only, so each IRS keeps
  // its incumbent unless the new state lowers its own CRB.
  auto reflective_step = [&](int k) {
    for (int l = 0; l < pr.L(); ++l) {
      const auto i = static_cast<std::size_t>(l);
      const CMatrix theta0 = tr.psi[i] * tr.psi[i].adjoint();
      const ScaResult sr = optimize_reflective_sca(pr, l, theta0, tr.R_s[i], opts, passive);
      tr.sca_iters += sr.iterations;
      Rng rng = root.split({static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l), stream::kRandomization});
      CVector psi;
      try {
        psi = gaussian_randomization(pr, l, sr.theta, tr.R_s[i], opts.n_randomizations, rng, passive);
      } catch (const NumericalError&) {
        continue;
      }
      const double v = crb_of(pr, l, tr.R_s[i], psi);
      if (v <= cur[i]) {
        tr.psi[i] = psi;
        cur[i] = v;
      }
    }
  };

  for (int k = 1; k <= opts.max_outer_iters; ++k) {
    const double before = tr.max_crb.back();
    if (opts.transmit_first) {
      if (do_tx) transmit_step();
      if (do_rf) reflective_step(k);
    } else {
      if (do_rf) reflective_step(k);
      if (do_tx) transmit_step();
    }
    tr.outer_iters = k;
    tr.max_crb.push_back(max_value(cur));
    tr.irs_crb.push_back(cur);
    if (before - tr.max_crb.back() < opts.rel_tol * before) {
      tr.status = "converged";
      break;
    }
  }
  if (opts.max_outer_iters == 0) tr.status = "initial";
  return tr;
}

inline AoTrace alternating_optimize(const Problem& pr, const AoOptions& opts) {
  return run_benchmark(Scheme::Proposed, pr, opts);
}

} // namespace irscrb

#endif
