#ifndef IRSCRB_STEERING_HPP
#define IRSCRB_STEERING_HPP

#include "numerics.hpp"

namespace irscrb {

// Uniform planar array. Element (v, h) sits at index v * n_h + h.
struct ArrayGeometry {
  int n_h = 1;
  int n_v = 1;
  double d_h = 0.05;
  double d_v = 0.05;
  double wavelength = 0.1;

  int size() const { return n_h * n_v; }

  void validate() const {
    if (n_h < 1 || n_v < 1) throw InvariantError("ArrayGeometry: element counts must be >= 1");
    if (!(d_h > 0.0) || !(d_v > 0.0)) throw InvariantError("ArrayGeometry: spacings must be > 0");
    if (!(wavelength > 0.0)) throw InvariantError("ArrayGeometry: wavelength must be > 0");
  }

  static ArrayGeometry half_wave(int n_h, int n_v, double wavelength) {
    return {n_h, n_v, wavelength / 2.0, wavelength / 2.0, wavelength};
  }
};

// theta is measured from the array's vertical axis, phi is the azimuth.
struct Doa {
  double theta = kPi / 2.0;
  double phi = 0.0;
};

struct SteeringBundle {
  CVector a;
  CVector da_theta;
  CVector da_phi;
  CVector z_theta;  // diagonal of Z_theta
  CVector z_phi;    // diagonal of Z_phi
};

// a = a_v(theta) kron a_h(theta, phi)
inline CVector steering_upa(const ArrayGeometry& g, const Doa& doa) {
  g.validate();
  const double kv = 2.0 * kPi * g.d_v / g.wavelength * std::cos(doa.theta);
  const double kh = 2.0 * kPi * g.d_h / g.wavelength * std::sin(doa.theta) * std::cos(doa.phi);
  CVector a(g.size());
  for (int v = 0; v < g.n_v; ++v)
    for (int h = 0; h < g.n_h; ++h) a(v * g.n_h + h) = std::exp(kJ * (kv * v + kh * h));
  return a;
}

inline SteeringBundle steering_bundle(const ArrayGeometry& g, const Doa& doa) {
  SteeringBundle b;
  b.a = steering_upa(g, doa);
  const double ch = 2.0 * kPi * g.d_h / g.wavelength;
  const double cv = 2.0 * kPi * g.d_v / g.wavelength;
  const double st = std::sin(doa.theta), ct = std::cos(doa.theta);
  const double sp = std::sin(doa.phi), cp = std::cos(doa.phi);
  b.z_theta.resize(g.size());
  b.z_phi.resize(g.size());
  for (int v = 0; v < g.n_v; ++v)
    for (int h = 0; h < g.n_h; ++h) {
      const int n = v * g.n_h + h;
      b.z_theta(n) = kJ * (ch * ct * cp * h - cv * st * v);
      b.z_phi(n) = -kJ * (ch * st * sp * h);
    }
  b.da_theta = b.z_theta.cwiseProduct(b.a);
  b.da_phi = b.z_phi.cwiseProduct(b.a);
  return b;
}

// Uniform linear array along one axis; dir_cos is the direction cosine of the
// departure direction with respect to that axis.
inline CVector steering_ula(int m, double spacing, double wavelength, double dir_cos) {
  CVector a(m);
  const double k = 2.0 * kPi * spacing / wavelength * dir_cos;
  for (int i = 0; i < m; ++i) a(i) = std::exp(kJ * (k * i));
  return a;
}

// E = beta a a^T
inline CMatrix target_response_bs(cplx beta, const CVector& a) { return beta * a * a.transpose(); }

// E_bar = beta a_sensor a_reflect^T
inline CMatrix target_response_irs(cplx beta, const CVector& a_sensor, const CVector& a_reflect) {
  return beta * a_sensor * a_reflect.transpose();
}

} // namespace irscrb

#endif
