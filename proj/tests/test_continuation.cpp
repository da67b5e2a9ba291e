#include <gtest/gtest.h>

#include <random>

#include "ellipdiff/continuation.hpp"

using namespace ellipdiff;

namespace {

LatticePtr square() { return make_lattice_ptr(1.0, cplx(0, 1)); }

MatrixExpr one_plus_z() { return MatrixExpr(1, 1, {1.0 + EllipticExpr::z()}); }

cplx product_oracle(cplx z) {
  cplx prod = 1.0;
  for (int m = 0; m < 200; ++m) prod *= 1.0 + z * std::pow(0.5, m);
  return 1.0 / prod;
}

const cplx kBase(0.31, 0.17);

}  // namespace

TEST(Continuation, RadiusEstimates) {
  const auto r1 = radius_estimate(SeriesMatrix::from_coefficients({Matrix::Ones(1, 1), Matrix::Ones(1, 1)}, 0, 20),
                                  Matrix::Ones(1, 1), 2.0);
  EXPECT_NEAR(r1.c2, 1.0, 1e-12);
  EXPECT_NEAR(r1.radius, 1.0, 1e-12);
  EXPECT_NEAR(r1.c1, 1.0, 1e-15);
  EXPECT_EQ(r1.R, 1);
  Matrix A0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, 1.5;
  const auto rc = radius_estimate(SeriesMatrix::constant(A0, 10), A0, 2.0);
  EXPECT_EQ(rc.radius, kRadiusSentinel);
  EXPECT_NEAR(rc.c1, 1.5, 1e-12);
  EXPECT_EQ(rc.R, 2);  // 1.5 / 4 <= 1/2
  // A = 1 + z/3: radius 3
  const auto r3 = radius_estimate(
      SeriesMatrix::from_coefficients({Matrix::Ones(1, 1), Matrix::Constant(1, 1, 1.0 / 3)}, 0, 30),
      Matrix::Ones(1, 1), 2.0);
  EXPECT_NEAR(r3.radius, 3.0, 1e-12);
}

TEST(Continuation, EmpiricalDivergenceMatchesRadius) {
  // C = 1/prod(1 + z/(3*2^m)); series error blows up past |z| = 3
  const MatrixExpr A(1, 1, {1.0 + EllipticExpr::z(Rational(1, 3))});
  const ContinuedGauge g = gauge_from_series(A, 2, 60);
  EXPECT_NEAR(g.radius, 3.0, 1e-9);
  auto series_error = [&](double r) { return std::abs(g.C.eval(cplx(r, 0))(0, 0) - product_oracle(r / 3.0)); };
  double lo = 0.5, hi = 6.0;
  for (int k = 0; k < 40; ++k) {
    const double mid = (lo + hi) / 2;
    (series_error(mid) < 1e-3 ? lo : hi) = mid;
  }
  EXPECT_GT(lo, 0.8 * g.radius);
  EXPECT_LT(lo, 1.25 * g.radius);
}

TEST(Continuation, ConstantGaugeIsIdentity) {
  Matrix A0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, cplx(0, 1.2);
  const ContinuedGauge g = gauge_from_series(MatrixExpr::constant(A0), 2, 10);
  for (cplx z : {cplx(0.1, 0), cplx(3, 4), cplx(-100, 20)})
    EXPECT_LT((continue_gauge(g, z) - Matrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(Continuation, RankOneProductValue) {
  const ContinuedGauge g = gauge_from_series(one_plus_z(), 2, 40);
  EXPECT_NEAR(std::abs(continue_gauge(g, 1.0)(0, 0) - product_oracle(1.0)), 0, 1e-10);
  for (cplx z : {cplx(0.3, 0.2), cplx(2.5, -1), cplx(-0.5, 3)})
    EXPECT_NEAR(std::abs(continue_gauge(g, z)(0, 0) - product_oracle(z)), 0, 1e-10 * std::abs(product_oracle(z)));
  try {
    continue_gauge(g, -2.0);  // A(z/2) = 0 on the orbit
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PoleOnOrbit);
  }
}

TEST(Continuation, PathIndependence) {
  const ContinuedGauge g = gauge_from_series(one_plus_z(), 2, 40);
  for (cplx z : {cplx(1, 0), cplx(0.7, 2.1)}) {
    const Matrix a = continue_gauge(g, z), b = continue_gauge(g, z, Route::p, 3);
    EXPECT_LT((a - b).norm(), 1e-9 * a.norm());
  }
}

TEST(Continuation, SpecialPairConstancy) {
  const auto L = square();
  const DifferencePair P = special_pair(2, 2, 3, L, kBase);
  const BlockScalarPair bs{special_diagonal(2, 2), special_diagonal(2, 3), {2}};
  const ContinuedGauge g = gauge_from_typed(bs, P, kBase, 40);
  EXPECT_LT((g.A0 - P.A().eval(0.0)).norm(), 1e-12);
  const ConstancyReport rep = constancy_probe(P, g, 20, 1e-7);
  EXPECT_TRUE(rep.pass) << rep.max_a_residual << " " << rep.max_b_residual << " skipped " << rep.skipped;
  // negative control
  ContinuedGauge bad = g;
  bad.A0(0, 1) += 0.1;
  EXPECT_FALSE(constancy_probe(P, bad, 20, 1e-7).pass);
}

TEST(Continuation, TypedRank3Constancy) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  Matrix T = Matrix::Zero(3, 3), S = Matrix::Zero(3, 3);
  T << 1, 0, 2, 0, 2, 0, 0, 0, 1;
  S << 1, 0, 3, 0, 3, 0, 0, 0, 1;
  const BlockScalarPair bs{T, S, {2, 1}};
  const DifferencePair P = typed_pair(bs, 2, 3, L, kBase);
  const ContinuedGauge g = gauge_from_typed(bs, P, kBase, 40);
  const ConstancyReport rep = constancy_probe(P, g, 20, 1e-7);
  EXPECT_TRUE(rep.pass) << rep.max_a_residual << " " << rep.max_b_residual;
  EXPECT_THROW(gauge_from_typed(bs, P, 0.0, 10), Error);
}

TEST(Continuation, FormalRouteConstancy) {
  const auto L = square();
  Matrix A0 = Matrix::Zero(2, 2), B0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, cplx(0, 1.5);
  B0.diagonal() << 2.0, 0.5;
  const DifferencePair P0(MatrixExpr::constant(A0), MatrixExpr::constant(B0), 2, 3, L);
  const EllipticExpr w = EllipticExpr::wp(L, 1, cplx(0.25, 0.4));
  const DifferencePair P = apply_gauge(P0, MatrixExpr(2, 2, {1.0, w, 0.0, 1.0}));
  const ContinuedGauge g = gauge_from_formal(P, 40);
  const ConstancyReport rep = constancy_probe(P, g, 20, 1e-7);
  EXPECT_TRUE(rep.pass) << rep.max_a_residual << " " << rep.max_b_residual;
}

TEST(Continuation, TwoRouteAgreement) {
  const auto L = square();
  const DifferencePair P = special_pair(2, 2, 3, L, kBase);
  const BlockScalarPair bs{special_diagonal(2, 2), special_diagonal(2, 3), {2}};
  const ContinuedGauge g = gauge_from_typed(bs, P, kBase, 40);
  std::uint64_t st = 17;
  int checked = 0;
  for (int k = 0; k < 20; ++k) {
    const cplx z = sample_annulus(*L, st);
    try {
      const Matrix a = continue_gauge(g, z, Route::p), b = continue_gauge(g, z, Route::q);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-7 * std::max(1.0, a.cwiseAbs().maxCoeff()));
      ++checked;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::PoleOnOrbit);
    }
  }
  EXPECT_GE(checked, 15);
  ContinuedGauge a_only = gauge_from_series(one_plus_z(), 2, 10);
  EXPECT_THROW(continue_gauge(a_only, 1.0, Route::q), Error);
}
