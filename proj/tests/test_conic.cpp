#include <gtest/gtest.h>

#include <sstream>

#include <irscrb/conic.hpp>
#include <irscrb/rng.hpp>

using namespace irscrb;
using namespace irscrb::conic;

namespace {

RMatrix row(std::initializer_list<double> v) {
  RMatrix r(1, static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) r(0, i++) = x;
  return r;
}

// Dual feasibility of y against the cone list, checked blockwise.
void expect_dual_in_cone(const ConicProgram& p, const RVector& y, double tol) {
  int r = 0;
  for (const auto& k : p.cones) {
    if (k.kind == ConeKind::NonNeg) {
      EXPECT_GE(y.segment(r, k.n).minCoeff(), -tol);
    }
    if (k.kind == ConeKind::Psd) {
      Eigen::SelfAdjointEigenSolver<RMatrix> es(smat(y.segment(r, k.rows()), k.n));
      EXPECT_GE(es.eigenvalues()(0), -tol);
    }
    r += k.rows();
  }
}

// min tr(C X) s.t. tr X = 1, X psd; optimum is lambda_min(C).
ConicProgram min_eig_program(const RMatrix& C) {
  const int n = static_cast<int>(C.rows()), m = svec_size(n);
  ConicProgram p;
  p.c = svec(C);
  p.A = RMatrix::Zero(1 + m, m);
  p.b = RVector::Zero(1 + m);
  p.A.row(0) = svec(RMatrix::Identity(n, n)).transpose();
  p.b(0) = 1.0;
  p.A.bottomRows(m) = -RMatrix::Identity(m, m);
  p.cones = {{ConeKind::Zero, 1}, {ConeKind::Psd, n}};
  return p;
}

}  // namespace

TEST(Svec, RoundTripAndInnerProduct) {
  Rng rng(1);
  RMatrix A = RMatrix::NullaryExpr(4, 4, [&] { return rng.normal(); });
  RMatrix B = RMatrix::NullaryExpr(4, 4, [&] { return rng.normal(); });
  A = (A + A.transpose()).eval();
  B = (B + B.transpose()).eval();
  EXPECT_LT((smat(svec(A), 4) - A).norm(), 1e-14);
  EXPECT_NEAR(svec(A).dot(svec(B)), (A * B).trace(), 1e-12);
}

TEST(ConicSolve, ScalarLowerBound) {
  ConicProgram p;
  p.c = RVector::Ones(1);
  p.A = row({-1.0});
  p.b = RVector::Constant(1, -3.0);
  p.cones = {{ConeKind::NonNeg, 1}};
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(0), 3.0, 1e-6);
  EXPECT_NEAR(s.objective, 3.0, 1e-6);
}

TEST(ConicSolve, MinEigenvalueDiagonal) {
  RMatrix C = RMatrix::Zero(3, 3);
  C.diagonal() << 3.0, 1.0, 2.0;
  const ConicProgram p = min_eig_program(C);
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-6);
  const RMatrix X = smat(s.x, 3);
  EXPECT_NEAR(X(1, 1), 1.0, 1e-5);
  expect_dual_in_cone(p, s.y, 1e-8);
}

TEST(ConicSolve, MinEigenvalueRandom) {
  Rng rng(2);
  for (int t = 0; t < 5; ++t) {
    const int n = 3 + t;
    RMatrix C = RMatrix::NullaryExpr(n, n, [&] { return rng.normal(); });
    C = (C + C.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(C);
    const ConicSolution s = solve(min_eig_program(C));
    ASSERT_EQ(s.status, SolveStatus::Optimal);
    EXPECT_NEAR(s.objective, es.eigenvalues()(0), 1e-6 * (1 + std::abs(es.eigenvalues()(0))));
  }
}

TEST(ConicSolve, InfeasiblePair) {
  // x >= 1 and x <= 0
  ConicProgram p;
  p.c = RVector::Ones(1);
  p.A.resize(2, 1);
  p.A << -1.0, 1.0;
  p.b.resize(2);
  p.b << -1.0, 0.0;
  p.cones = {{ConeKind::NonNeg, 2}};
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(ConicSolve, Unbounded) {
  // min -x s.t. x >= 0
  ConicProgram p;
  p.c = -RVector::Ones(1);
  p.A = row({-1.0});
  p.b = RVector::Zero(1);
  p.cones = {{ConeKind::NonNeg, 1}};
  EXPECT_EQ(solve(p).status, SolveStatus::Unbounded);
}

TEST(ConicSolve, LinearProgramVertex) {
  // min -x1 - x2, x1 + 2 x2 <= 4, 3 x1 + x2 <= 6, x >= 0; optimum at (1.6, 1.2)
  ConicProgram p;
  p.c = -RVector::Ones(2);
  p.A.resize(4, 2);
  p.A << 1, 2, 3, 1, -1, 0, 0, -1;
  p.b.resize(4);
  p.b << 4, 6, 0, 0;
  p.cones = {{ConeKind::NonNeg, 4}};
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(0), 1.6, 1e-6);
  EXPECT_NEAR(s.x(1), 1.2, 1e-6);
  EXPECT_NEAR(s.objective, -2.8, 1e-6);
  expect_dual_in_cone(p, s.y, 1e-9);
}

TEST(ConicSolve, EqualityWithFreeVariables) {
  // min x1 + 2 x2 s.t. x1 + x2 = 1, x1 - x2 = 0.2
  ConicProgram p;
  p.c.resize(2);
  p.c << 1, 2;
  p.A.resize(2, 2);
  p.A << 1, 1, 1, -1;
  p.b.resize(2);
  p.b << 1, 0.2;
  p.cones = {{ConeKind::Zero, 2}};
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(0), 0.6, 1e-7);
  EXPECT_NEAR(s.x(1), 0.4, 1e-7);
}

TEST(ConicSolve, TwoByTwoLmi) {
  // min x + y s.t. [[x, 1], [1, y]] psd: x y >= 1 so x = y = 1
  ConicProgram p;
  p.c = RVector::Ones(2);
  p.A = RMatrix::Zero(3, 2);
  p.b = RVector::Zero(3);
  p.A(0, 0) = -1.0;
  p.b(1) = std::sqrt(2.0);
  p.A(2, 1) = -1.0;
  p.cones = {{ConeKind::Psd, 2}};
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(0), 1.0, 1e-5);
  EXPECT_NEAR(s.x(1), 1.0, 1e-5);
  EXPECT_NEAR(s.objective, 2.0, 1e-6);
}

TEST(ConicSolve, InfeasibleLmi) {
  // [[x, 1], [1, -1]] psd is impossible
  ConicProgram p;
  p.c = RVector::Ones(1);
  p.A = RMatrix::Zero(3, 1);
  p.b = RVector::Zero(3);
  p.A(0, 0) = -1.0;
  p.b(1) = std::sqrt(2.0);
  p.b(2) = -1.0;
  p.cones = {{ConeKind::Psd, 2}};
  EXPECT_EQ(solve(p).status, SolveStatus::Infeasible);
}

TEST(ConicSolve, HermitianEmbeddingMatchesComplexEigenvalue) {
  Rng rng(3);
  for (int n : {2, 3}) {
    for (int t = 0; t < 3; ++t) {
      CMatrix C = rng.cnormal_matrix(n, n);
      C = (C + C.adjoint()).eval();
      const HermParam hp(n);
      const int d = hp.dim(), m = svec_size(2 * n);
      ConicProgram p;
      p.c = HermAffine{0.0, C.transpose()}.param_coeffs(hp);
      p.A = RMatrix::Zero(1 + m, d);
      p.b = RVector::Zero(1 + m);
      for (int i = 0; i < n; ++i) p.A(0, i) = 1.0;
      p.b(0) = 1.0;
      for (int k = 0; k < d; ++k) p.A.block(1, k, m, 1) = -svec(herm_real_embed(hp.basis(k)));
      p.cones = {{ConeKind::Zero, 1}, {ConeKind::Psd, 2 * n}};
      const ConicSolution s = solve(p);
      ASSERT_EQ(s.status, SolveStatus::Optimal);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(C);
      EXPECT_NEAR(s.objective, es.eigenvalues()(0), 1e-6 * (1 + std::abs(es.eigenvalues()(0))));
      const CMatrix X = hp.to_matrix(s.x);
      EXPECT_NEAR((C * X).trace().real(), es.eigenvalues()(0), 1e-5);
    }
  }
}

TEST(ConicSolve, StrongDualityOnRandomFeasibleSdp) {
  // Feasible and bounded by construction: b = A x0 + s0 with s0 interior,
  // c = -A' y0 with y0 interior.
  Rng rng(4);
  const int n = 6, k = 3;
  const std::vector<ConeBlock> cones = {{ConeKind::Zero, 2}, {ConeKind::NonNeg, 3}, {ConeKind::Psd, k}};
  const int rows = 2 + 3 + svec_size(k);
  ConicProgram p;
  p.A = RMatrix::NullaryExpr(rows, n, [&] { return rng.normal(); });
  RVector s0 = RVector::Zero(rows), y0 = RVector::Zero(rows);
  s0.segment(2, 3).setConstant(1.0);
  s0.tail(svec_size(k)) = svec(RMatrix::Identity(k, k));
  y0.head(2) = RVector::NullaryExpr(2, [&] { return rng.normal(); });
  y0.segment(2, 3).setConstant(0.5);
  y0.tail(svec_size(k)) = svec(RMatrix::Identity(k, k));
  const RVector x0 = RVector::NullaryExpr(n, [&] { return rng.normal(); });
  p.b = p.A * x0 + s0;
  p.c = -p.A.transpose() * y0;
  p.cones = cones;
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.objective, -p.b.dot(s.y), 1e-6 * (1 + std::abs(s.objective)));
  EXPECT_LE(s.primal_residual, 1e-7);
  EXPECT_LE(s.dual_residual, 1e-7);
  expect_dual_in_cone(p, s.y, 1e-7);
  // weak duality bound from the known dual point
  EXPECT_GE(s.objective, -p.b.dot(y0) - 1e-6);
}

TEST(ConicSolve, BadlyScaledRows) {
  // min t s.t. 1e12 x <= 1e12 t, x >= 5e-3 ; optimum t = 5e-3
  ConicProgram p;
  p.c.resize(2);
  p.c << 0.0, 1.0;
  p.A.resize(2, 2);
  p.A << 1e12, -1e12, -1.0, 0.0;
  p.b.resize(2);
  p.b << 0.0, -5e-3;
  p.cones = {{ConeKind::NonNeg, 2}};
  const ConicSolution s = solve(p);
  ASSERT_EQ(s.status, SolveStatus::Optimal);
  EXPECT_NEAR(s.x(1), 5e-3, 1e-8);
}

TEST(ConicProgram, RejectsShapeMismatch) {
  ConicProgram p;
  p.c = RVector::Ones(1);
  p.A = RMatrix::Ones(2, 1);
  p.b = RVector::Ones(2);
  p.cones = {{ConeKind::NonNeg, 1}};
  EXPECT_THROW(p.validate(), InvariantError);
}

TEST(ConicProgram, DumpListsConesAndNonzeros) {
  ConicProgram p;
  p.c = RVector::Ones(2);
  p.A = RMatrix::Zero(3, 2);
  p.b = RVector::Zero(3);
  p.A(0, 0) = -1.0;
  p.A(2, 1) = -1.0;
  p.b(1) = 1.0;
  p.cones = {{ConeKind::Psd, 2}};
  std::ostringstream os;
  write_program(os, p);
  const std::string txt = os.str();
  EXPECT_NE(txt.find("vars 2"), std::string::npos);
  EXPECT_NE(txt.find("S 2"), std::string::npos);
  EXPECT_NE(txt.find("A 2"), std::string::npos);
  EXPECT_NE(txt.find("2 1 -1"), std::string::npos);
}
