#ifndef IRSCRB_RNG_HPP
#define IRSCRB_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

#include "numerics.hpp"

namespace irscrb {

// Seedable generator with named substreams. split() derives an independent
// child from the construction seed, so draws for one (draw, irs, purpose)
// tag never depend on how many other streams were consumed.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), eng_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  Rng split(std::initializer_list<std::uint64_t> tags) const {
    std::uint64_t s = mix(seed_ ^ 0x6a09e667f3bcc909ULL);
    for (auto t : tags) s = mix(s ^ mix(t + 0x9e3779b97f4a7c15ULL));
    return Rng(s);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }

  // CN(0, 1)
  cplx cnormal() {
    const double re = normal();
    const double im = normal();
    return cplx(re, im) * std::sqrt(0.5);
  }

  CVector cnormal_vector(Eigen::Index n) {
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal();
    return v;
  }

  CMatrix cnormal_matrix(Eigen::Index r, Eigen::Index c) {
    CMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cnormal();
    return m;
  }

  std::mt19937_64& engine() { return eng_; }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 eng_;
};

} // namespace irscrb

#endif
