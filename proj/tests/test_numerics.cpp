#include <gtest/gtest.h>

#include <irscrb/numerics.hpp>
#include <irscrb/rng.hpp>

#include "test_util.hpp"

using namespace irscrb;
using irscrb::testing::random_hermitian;
using irscrb::testing::random_psd;

TEST(HermRealEmbed, IdentityMapsToIdentity) {
  const RMatrix e = herm_real_embed(CMatrix::Identity(2, 2));
  EXPECT_TRUE(e.isApprox(RMatrix::Identity(4, 4)));
}

TEST(HermRealEmbed, EigenvaluesAreDoubled) {
  CMatrix h(2, 2);
  h << 1.0, kJ, -kJ, 1.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(herm_real_embed(h));
  const RVector ev = es.eigenvalues();
  EXPECT_NEAR(ev(0), 0.0, 1e-12);
  EXPECT_NEAR(ev(1), 0.0, 1e-12);
  EXPECT_NEAR(ev(2), 2.0, 1e-12);
  EXPECT_NEAR(ev(3), 2.0, 1e-12);
}

TEST(HermRealEmbed, ZeroAndNonHermitian) {
  EXPECT_EQ(herm_real_embed(CMatrix::Zero(3, 3)).norm(), 0.0);
  CMatrix bad(2, 2);
  bad << 1.0, 1.0, 0.0, 1.0;
  EXPECT_THROW(herm_real_embed(bad), InvariantError);
}

TEST(HermRealEmbed, PreservesDefinitenessAndTrace) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CMatrix h = (trial % 2 == 0) ? random_psd(rng, 6) : random_hermitian(rng, 6);
    const RMatrix e = herm_real_embed(h);
    EXPECT_LT((e - e.transpose()).norm(), 1e-14);
    EXPECT_NEAR(e.trace(), 2.0 * h.trace().real(), 1e-12);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(e);
    const double me = es.eigenvalues()(0);
    const double mh = min_eigenvalue(h);
    EXPECT_NEAR(me, mh, 1e-10);
    EXPECT_EQ(me >= -1e-12, mh >= -1e-12);
    EXPECT_TRUE(herm_from_real_embed(e).isApprox(h, 1e-13));
  }
}

TEST(PsdSqrt, ScaledIdentity) {
  EXPECT_TRUE(psd_sqrt(4.0 * CMatrix::Identity(3, 3)).isApprox(2.0 * CMatrix::Identity(3, 3)));
}

TEST(PsdSqrt, RankOneAndRandom) {
  Rng rng(5);
  const CVector psi = rng.cnormal_vector(5);
  const CMatrix h1 = psi * psi.adjoint();
  const CMatrix s1 = psd_sqrt(h1);
  EXPECT_LE((s1 * s1.adjoint() - h1).norm(), 1e-8 * h1.norm());
  for (int t = 0; t < 10; ++t) {
    const CMatrix h = random_psd(rng, 8);
    const CMatrix s = psd_sqrt(h);
    EXPECT_LE((s * s.adjoint() - h).norm(), 1e-8 * h.norm());
  }
}

TEST(PsdSqrt, RejectsIndefinite) {
  CMatrix h = CMatrix::Identity(3, 3);
  h(2, 2) = -0.5;
  EXPECT_THROW(psd_sqrt(h), InvariantError);
  h(2, 2) = -1e-13;  // clamped
  EXPECT_NO_THROW(psd_sqrt(h));
}

TEST(TraceProd, Examples) {
  RVector d(3);
  d << 1, 2, 3;
  const CMatrix D = d.cast<cplx>().asDiagonal();
  EXPECT_NEAR(std::abs(trace_prod(CMatrix::Identity(3, 3), D) - cplx(6.0)), 0.0, 1e-15);
  EXPECT_EQ(trace_prod(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)), cplx(0.0));
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const CMatrix A = rng.cnormal_matrix(4, 4), B = rng.cnormal_matrix(4, 4);
    EXPECT_LT(std::abs(trace_prod(A, B) - (A * B).trace()), 1e-12);
    EXPECT_LT(std::abs(trace_prod(A, B) - trace_prod(B, A)), 1e-12);
  }
  const CMatrix A = rng.cnormal_matrix(3, 5), B = rng.cnormal_matrix(5, 3);
  EXPECT_LT(std::abs(trace_prod(A, B) - trace_prod(B, A)), 1e-12);
  EXPECT_THROW(trace_prod(A, A), InvariantError);
}

TEST(Inv4, Examples) {
  EXPECT_TRUE(inv4(Fim4::Identity()).isApprox(Fim4::Identity()));
  const Fim4 d = Eigen::Vector4d(1, 2, 4, 8).asDiagonal();
  const Fim4 di = Eigen::Vector4d(1, .5, .25, .125).asDiagonal();
  EXPECT_LT((inv4(d) - di).norm(), 1e-15);
  EXPECT_THROW(inv4(Fim4::Zero()), SingularFimError);
  Fim4 rank3 = Fim4::Identity();
  rank3.row(3) = rank3.row(2);
  rank3.col(3) = rank3.col(2);
  EXPECT_THROW(inv4(rank3), SingularFimError);
}

TEST(Inv4, RandomSpd) {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Eigen::Matrix4d X;
    for (int i = 0; i < 16; ++i) X(i / 4, i % 4) = rng.normal();
    const Fim4 f = X * X.transpose() + 0.1 * Fim4::Identity();
    const Fim4 fi = inv4(f);
    EXPECT_LT((f * fi - Fim4::Identity()).norm(), 1e-8);
    EXPECT_LT((fi - fi.transpose()).norm(), 1e-12 * fi.norm());
  }
}

TEST(HermParam, RoundTripAndAffineCoefficients) {
  Rng rng(1);
  const HermParam hp(4);
  const CMatrix h = random_hermitian(rng, 4);
  EXPECT_TRUE(hp.to_matrix(hp.to_params(h)).isApprox(h));
  HermAffine f;
  f.coeff = rng.cnormal_matrix(4, 4);
  f.constant = 0.7;
  const RVector p = hp.to_params(h);
  EXPECT_NEAR(f(h), f.constant + f.param_coeffs(hp).dot(p), 1e-12);
}

TEST(Units, DbmConversion) {
  EXPECT_NEAR(dbm_to_watts(-80.0), 1e-11, 1e-25);
  EXPECT_NEAR(db_to_linear(5.0), 3.1622776601683795, 1e-14);
}
