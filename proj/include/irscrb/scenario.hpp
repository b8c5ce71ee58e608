#ifndef IRSCRB_SCENARIO_HPP
#define IRSCRB_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "rng.hpp"
#include "steering.hpp"

namespace irscrb {

using Vec3 = Eigen::Vector3d;

// Experiment description. Spacings of 0 mean half a wavelength.
// The BS is a ULA along the global x axis. Each IRS (and its sensor array)
// uses the global axes as local frame: theta from +z, phi from +x in the
// x-y plane, boresight along +x.
struct ScenarioConfig {
  Vec3 bs_position{0.0, 0.0, 0.0};
  std::vector<Vec3> irs_positions{Vec3(-5.0, 10.0, 0.0), Vec3(-5.0, 20.0, 0.0)};
  Vec3 target_position{5.0, 15.0, 0.0};

  int M = 8;
  int n_h = 4, n_v = 4;
  int sensor_n_h = 4, sensor_n_v = 4;
  double d_h = 0.0, d_v = 0.0;
  double sensor_d_h = 0.0, sensor_d_v = 0.0;
  double bs_spacing = 0.0;

  double P_t = 20.0;
  double P_s = 0.1;
  double a_max = 8.0;
  double sigma_r2 = 1e-11;
  double sigma_b2 = 1e-11;
  double sigma_s2 = 1e-11;
  int T_c = 100;
  double K_dB = 5.0;
  double rcs = 1.0;
  double wavelength = 0.1;
  std::uint64_t seed = 1;

  // Explicit per-IRS target coefficients; unset entries use the radar equation.
  std::vector<std::optional<cplx>> beta_override;

  int L() const { return static_cast<int>(irs_positions.size()); }

  ArrayGeometry reflect_geometry() const {
    return {n_h, n_v, d_h > 0 ? d_h : wavelength / 2, d_v > 0 ? d_v : wavelength / 2, wavelength};
  }
  ArrayGeometry sensor_geometry() const {
    return {sensor_n_h, sensor_n_v, sensor_d_h > 0 ? sensor_d_h : wavelength / 2,
            sensor_d_v > 0 ? sensor_d_v : wavelength / 2, wavelength};
  }
  double bs_element_spacing() const { return bs_spacing > 0 ? bs_spacing : wavelength / 2; }

  void validate() const {
    if (L() < 1) throw ConfigError("at least one IRS position is required");
    if (M < 1) throw ConfigError("M must be >= 1");
    if (n_h < 1 || n_v < 1 || sensor_n_h < 1 || sensor_n_v < 1)
      throw ConfigError("array dimensions must be >= 1");
    if (!(P_t > 0) || !(P_s > 0)) throw ConfigError("P_t and P_s must be > 0");
    if (!(sigma_r2 > 0) || !(sigma_b2 > 0) || !(sigma_s2 > 0))
      throw ConfigError("noise powers must be > 0");
    if (!(a_max >= 1.0)) throw ConfigError("a_max must be >= 1");
    if (T_c < 1 || T_c % L() != 0) throw ConfigError("T_c must be a positive multiple of L");
    if (!(wavelength > 0)) throw ConfigError("wavelength must be > 0");
    if (rcs < 0) throw ConfigError("rcs must be >= 0");
    if (d_h < 0 || d_v < 0 || sensor_d_h < 0 || sensor_d_v < 0 || bs_spacing < 0)
      throw ConfigError("spacings must be >= 0");
    if (beta_override.size() > irs_positions.size())
      throw ConfigError("more beta overrides than IRSs");
  }
};

struct IrsTruth {
  Doa doa;
  cplx beta;
};

struct ChannelSet {
  std::vector<CMatrix> G;  // N x M per IRS
  std::vector<IrsTruth> truth;
  std::vector<double> d_bs_irs;
  std::vector<double> d_irs_target;
};

// Angles of `to` as seen from `from` in the shared local frame.
inline Doa local_angles(const Vec3& from, const Vec3& to) {
  const Vec3 v = to - from;
  const double d = v.norm();
  if (!(d > 0.0)) throw ConfigError("zero distance between an IRS and the point it observes");
  const double ct = std::clamp(v.z() / d, -1.0, 1.0);
  return {std::acos(ct), std::atan2(v.y(), v.x())};
}

inline std::vector<Doa> derive_truth(const ScenarioConfig& cfg) {
  std::vector<Doa> out;
  for (const auto& p : cfg.irs_positions) out.push_back(local_angles(p, cfg.target_position));
  return out;
}

inline double path_gain(double d, double wavelength) {
  const double r = wavelength / (4.0 * kPi * d);
  return r * r;
}

// LoS component a_irs(BS direction) a_bs(IRS direction)^T, unit-modulus entries.
inline CMatrix los_channel(const ScenarioConfig& cfg, int l) {
  const Vec3& irs = cfg.irs_positions[static_cast<std::size_t>(l)];
  const Doa to_bs = local_angles(irs, cfg.bs_position);
  const CVector a_irs = steering_upa(cfg.reflect_geometry(), to_bs);
  const Vec3 u = (irs - cfg.bs_position).normalized();
  const CVector a_bs = steering_ula(cfg.M, cfg.bs_element_spacing(), cfg.wavelength, u.x());
  return a_irs * a_bs.transpose();
}

inline CMatrix synth_channel(const ScenarioConfig& cfg, int l, Rng& rng) {
  const Vec3& irs = cfg.irs_positions[static_cast<std::size_t>(l)];
  const double d = (irs - cfg.bs_position).norm();
  if (!(d > 0.0)) throw ConfigError("IRS colocated with the BS");
  const double kappa = db_to_linear(cfg.K_dB);
  const double w_los = std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (1.0 + kappa));
  const double w_nlos = std::isinf(kappa) ? 0.0 : std::sqrt(1.0 / (1.0 + kappa));
  const int n = cfg.n_h * cfg.n_v;
  const CMatrix nlos = rng.cnormal_matrix(n, cfg.M);
  return std::sqrt(path_gain(d, cfg.wavelength)) * (w_los * los_channel(cfg, l) + w_nlos * nlos);
}

// |beta|^2 = lambda^2 rcs / ((4 pi)^3 d^4) with uniform phase.
inline cplx compute_beta(const ScenarioConfig& cfg, int l, Rng& rng) {
  const auto idx = static_cast<std::size_t>(l);
  if (idx < cfg.beta_override.size() && cfg.beta_override[idx]) return *cfg.beta_override[idx];
  const double d = (cfg.target_position - cfg.irs_positions[idx]).norm();
  if (!(d > 0.0)) throw ConfigError("target colocated with an IRS");
  const double four_pi = 4.0 * kPi;
  const double mag2 = cfg.wavelength * cfg.wavelength * cfg.rcs / (four_pi * four_pi * four_pi * d * d * d * d);
  const double phase = 2.0 * kPi * rng.uniform();
  return std::sqrt(mag2) * std::exp(kJ * phase);
}

namespace stream {
inline constexpr std::uint64_t kChannel = 1;
inline constexpr std::uint64_t kBeta = 2;
inline constexpr std::uint64_t kInit = 3;
inline constexpr std::uint64_t kRandomization = 4;
} // namespace stream

// Channel draw `draw`; every IRS uses its own (draw, l) substream.
inline ChannelSet make_channel_set(const ScenarioConfig& cfg, std::uint64_t draw = 0) {
  cfg.validate();
  const Rng root(cfg.seed);
  const auto doas = derive_truth(cfg);
  ChannelSet cs;
  for (int l = 0; l < cfg.L(); ++l) {
    const auto ul = static_cast<std::uint64_t>(l);
    Rng rc = root.split({draw, ul, stream::kChannel});
    Rng rb = root.split({draw, ul, stream::kBeta});
    cs.G.push_back(synth_channel(cfg, l, rc));
    cs.truth.push_back({doas[static_cast<std::size_t>(l)], compute_beta(cfg, l, rb)});
    cs.d_bs_irs.push_back((cfg.irs_positions[static_cast<std::size_t>(l)] - cfg.bs_position).norm());
    cs.d_irs_target.push_back((cfg.target_position - cfg.irs_positions[static_cast<std::size_t>(l)]).norm());
  }
  return cs;
}

} // namespace irscrb

#endif
