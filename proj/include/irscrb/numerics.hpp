#ifndef IRSCRB_NUMERICS_HPP
#define IRSCRB_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace irscrb {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Fim4 = Eigen::Matrix4d;

inline constexpr cplx kJ{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Largest deviation from Hermitian symmetry, relative to max |A_ij|.
inline double hermitian_defect(const CMatrix& a) {
  if (a.rows() != a.cols()) return INFINITY;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() / scale;
}

inline bool is_hermitian(const CMatrix& a, double tol = 1e-12) {
  return a.rows() == a.cols() && hermitian_defect(a) <= tol;
}

inline void require_hermitian(const CMatrix& a, const char* what, double tol = 1e-12) {
  if (!is_hermitian(a, tol))
    throw InvariantError(std::string(what) + ": matrix is not Hermitian");
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

// [[Re H, -Im H], [Im H, Re H]]
inline RMatrix herm_real_embed(const CMatrix& h) {
  require_hermitian(h, "herm_real_embed");
  const Eigen::Index n = h.rows();
  RMatrix out(2 * n, 2 * n);
  const RMatrix re = h.real();
  const RMatrix im = h.imag();
  out.topLeftCorner(n, n) = re;
  out.topRightCorner(n, n) = -im;
  out.bottomLeftCorner(n, n) = im;
  out.bottomRightCorner(n, n) = re;
  return 0.5 * (out + out.transpose());
}

// Inverse of herm_real_embed on a (possibly slightly asymmetric) 2n x 2n block.
inline CMatrix herm_from_real_embed(const RMatrix& x) {
  const Eigen::Index n = x.rows() / 2;
  const RMatrix re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const RMatrix im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  CMatrix h(n, n);
  h.real() = re;
  h.imag() = im;
  return hermitian_part(h);
}

// S with S S^H = H. Eigenvalues in [-1e-10 lmax, 0) are clamped to zero.
inline CMatrix psd_sqrt(const CMatrix& h) {
  require_hermitian(h, "psd_sqrt", 1e-10);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h));
  if (es.info() != Eigen::Success) throw NumericalError("psd_sqrt: eigendecomposition failed");
  RVector ev = es.eigenvalues();
  const double lmax = std::max(0.0, ev.maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-10 * lmax || (lmax == 0.0 && ev(i) < 0.0))
      throw InvariantError("psd_sqrt: matrix is indefinite");
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline double min_eigenvalue(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// tr(AB) without forming AB.
template <typename DA, typename DB>
cplx trace_prod(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.rows() != b.cols() || a.cols() != b.rows())
    throw InvariantError("trace_prod: dimension mismatch");
  using S = typename DA::Scalar;
  return cplx(a.cwiseProduct(b.transpose()).sum() * S(1));
}

// Inverse of a symmetric 4x4 FIM. Conditioning is judged after unit-diagonal
// scaling so that widely different parameter units do not count as singular.
inline Fim4 inv4(const Fim4& f) {
  if (!f.allFinite()) throw SingularFimError("inv4: non-finite FIM");
  const Fim4 fs = 0.5 * (f + f.transpose());
  Eigen::Vector4d d;
  for (int i = 0; i < 4; ++i) {
    if (!(fs(i, i) > 0.0)) throw SingularFimError("inv4: FIM has a non-positive diagonal entry");
    d(i) = 1.0 / std::sqrt(fs(i, i));
  }
  const Fim4 scaled = d.asDiagonal() * fs * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Fim4> es(scaled);
  const Eigen::Vector4d ev = es.eigenvalues();
  const double amax = ev.cwiseAbs().maxCoeff();
  if (!(amax > 0.0) || ev.cwiseAbs().minCoeff() < 1e-14 * amax)
    throw SingularFimError("inv4: FIM is singular (unobservable parameters)");
  const Fim4 inv_scaled = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  Fim4 out = d.asDiagonal() * inv_scaled * d.asDiagonal();
  return 0.5 * (out + out.transpose());
}

// Real coordinates of an n x n Hermitian matrix: n diagonal entries, then
// (Re, Im) of each strictly upper entry in row-major order. n^2 in total.
class HermParam {
public:
  explicit HermParam(int n) : n_(n) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pairs_.emplace_back(i, j);
  }
  int n() const { return n_; }
  int dim() const { return n_ * n_; }
  std::pair<int, int> pair(int k) const { return pairs_[static_cast<std::size_t>(k)]; }

  CMatrix to_matrix(const RVector& p) const {
    CMatrix h = CMatrix::Zero(n_, n_);
    for (int i = 0; i < n_; ++i) h(i, i) = p(i);
    for (int k = 0; k < static_cast<int>(pairs_.size()); ++k) {
      const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
      const cplx v(p(n_ + 2 * k), p(n_ + 2 * k + 1));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
    return h;
  }

  RVector to_params(const CMatrix& h) const {
    RVector p(dim());
    for (int i = 0; i < n_; ++i) p(i) = h(i, i).real();
    for (int k = 0; k < static_cast<int>(pairs_.size()); ++k) {
      const auto [i, j] = pairs_[static_cast<std::size_t>(k)];
      const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      p(n_ + 2 * k) = v.real();
      p(n_ + 2 * k + 1) = v.imag();
    }
    return p;
  }

  // Basis matrix for coordinate k.
  CMatrix basis(int k) const {
    RVector e = RVector::Zero(dim());
    e(k) = 1.0;
    return to_matrix(e);
  }

private:
  int n_;
  std::vector<std::pair<int, int>> pairs_;
};

// Real affine functional  f(H) = constant + Re sum_ij coeff_ij H_ij.
// With coeff = grad this is  q0 + Re tr(grad^T (H - H0)).
struct HermAffine {
  double constant = 0.0;
  CMatrix coeff;

  double operator()(const CMatrix& h) const { return constant + coeff.cwiseProduct(h).sum().real(); }

  // Coefficients on the HermParam coordinates.
  RVector param_coeffs(const HermParam& hp) const {
    const int n = hp.n();
    RVector out(hp.dim());
    for (int i = 0; i < n; ++i) out(i) = coeff(i, i).real();
    for (int k = 0; k < (hp.dim() - n) / 2; ++k) {
      const auto [i, j] = hp.pair(k);
      out(n + 2 * k) = (coeff(i, j) + coeff(j, i)).real();
      out(n + 2 * k + 1) = -coeff(i, j).imag() + coeff(j, i).imag();
    }
    return out;
  }
};

// 4x4 symmetric matrix whose entries are HermAffine functionals.
struct AffineFim {
  HermAffine entry[4][4];

  Fim4 operator()(const CMatrix& h) const {
    Fim4 f;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) f(p, q) = entry[p][q](h);
    return 0.5 * (f + f.transpose());
  }
};

} // namespace irscrb

#endif
