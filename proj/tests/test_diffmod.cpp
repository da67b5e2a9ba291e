#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "ellipdiff/canonical.hpp"
#include "ellipdiff/diffmod.hpp"
#include "test_util.hpp"

using namespace ellipdiff;

namespace {

LatticePtr square() { return make_lattice_ptr(1.0, cplx(0, 1)); }

MatrixExpr upper2(const EllipticExpr& a, const EllipticExpr& b, const EllipticExpr& c, const EllipticExpr& d) {
  return MatrixExpr(2, 2, {a, b, c, d});
}

double pair_distance(const DifferencePair& x, const DifferencePair& y, int n, std::uint64_t seed) {
  double d = 0;
  std::uint64_t st = seed;
  for (int k = 0; k < n; ++k) {
    const cplx z = sample_annulus(*x.lattice(), st);
    const Matrix a = x.A().eval(z), b = y.A().eval(z);
    d = std::max(d, (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()));
    const Matrix c = x.B().eval(z), e = y.B().eval(z);
    d = std::max(d, (c - e).cwiseAbs().maxCoeff() / std::max(1.0, c.cwiseAbs().maxCoeff()));
  }
  return d;
}

}  // namespace

TEST(Diffmod, MultiplicativeIndependence) {
  EXPECT_TRUE(multiplicatively_independent(2, 3));
  EXPECT_TRUE(multiplicatively_independent(6, 10));
  EXPECT_TRUE(multiplicatively_independent(12, 18));
  EXPECT_FALSE(multiplicatively_independent(2, 4));
  EXPECT_FALSE(multiplicatively_independent(8, 4));
  EXPECT_FALSE(multiplicatively_independent(36, 6));
  EXPECT_FALSE(multiplicatively_independent(5, 5));
}

TEST(Diffmod, ConstructorChecks) {
  const auto L = square();
  const auto I = MatrixExpr::identity(2);
  EXPECT_NO_THROW(DifferencePair(I, I, 2, 3, L));
  try {
    DifferencePair(I, I, 2, 4, L);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonCoprime);
  }
  // dependent (p, q) stays refused even with the override
  EXPECT_THROW(DifferencePair(I, I, 2, 4, L, {true}), Error);
  const DifferencePair untrusted(I, I, 6, 10, L, {true});
  EXPECT_FALSE(untrusted.trusted());
  EXPECT_THROW(DifferencePair(I, MatrixExpr::identity(3), 2, 3, L), Error);
  EXPECT_THROW(DifferencePair(I, I, 1, 3, L), Error);
  Matrix singular(2, 2);
  singular << 1, 2, 2, 4;
  try {
    DifferencePair(MatrixExpr::constant(singular), I, 2, 3, L);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotInvertible);
  }
}

TEST(Diffmod, IdentityPairConsistent) {
  const auto I = MatrixExpr::identity(3);
  const auto rep = check_consistency(DifferencePair(I, I, 2, 3, square()));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.samples, 20);
  EXPECT_EQ(rep.max_residual, 0.0);
}

TEST(Diffmod, SpecialRank2Consistent) {
  const auto L = square();
  const auto gp = g_expr(Which::p, 2, 3, L), gq = g_expr(Which::q, 2, 3, L);
  const DifferencePair P(upper2(1.0, gp, 0.0, 2.0), upper2(1.0, gq, 0.0, 3.0), 2, 3, L);
  const auto rep = check_consistency(P);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.max_residual, 1e-9);
  EXPECT_TRUE(rep.series_checked);
  EXPECT_LT(rep.series_residual, 1e-9);
}

TEST(Diffmod, InconsistentPairFails) {
  const auto L = square();
  const auto gp = g_expr(Which::p, 2, 3, L);
  const DifferencePair P(upper2(1.0, gp, 0.0, 2.0), MatrixExpr::identity(2), 2, 3, L);
  const auto rep = check_consistency(P);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.max_residual, 1e-3);
}

TEST(Diffmod, SpecialPairsAllRanks) {
  for (auto [p, q] : {std::pair{2, 3}, {3, 4}, {2, 5}})
    for (const auto& L : ellipdiff::testing::standard_lattices())
      for (int r = 1; r <= 5; ++r) {
        const auto rep = check_consistency(special_pair(r, p, q, L));
        EXPECT_TRUE(rep.pass) << "r=" << r << " p=" << p << " q=" << q << " res=" << rep.max_residual
                              << " series=" << rep.series_residual;
      }
}

TEST(Diffmod, GaugeIdentityAndRoundTrip) {
  const auto L = square();
  const DifferencePair P = special_pair(2, 2, 3, L);
  EXPECT_LT(pair_distance(apply_gauge(P, MatrixExpr::identity(2)), P, 10, 3), 1e-14);

  const EllipticExpr w = EllipticExpr::wp(L);
  const MatrixExpr C = upper2(1.0, w, 0.0, 1.0);
  const MatrixExpr Ci = upper2(1.0, -w, 0.0, 1.0);
  const DifferencePair G = apply_gauge(P, C);
  EXPECT_TRUE(check_consistency(G).pass);
  EXPECT_GT(pair_distance(G, P, 10, 3), 1e-3);
  EXPECT_LT(pair_distance(apply_gauge(G, Ci), P, 10, 3), 1e-10);
}

TEST(Diffmod, ConstantConjugation) {
  const auto L = square();
  Matrix A(2, 2), B(2, 2), C(2, 2);
  A << 2, 1, 0, 2;
  B << 3, 5, 0, 3;
  C << 1, 2, 3, 7;
  const DifferencePair P(MatrixExpr::constant(A), MatrixExpr::constant(B), 2, 3, L);
  const DifferencePair G = apply_gauge(P, MatrixExpr::constant(C));
  const Matrix expected = C.inverse() * A * C;
  EXPECT_LT((G.A().eval(cplx(0.1, 0.2)) - expected).norm(), 1e-13);
  EXPECT_TRUE(check_consistency(G).pass);
}

TEST(Diffmod, SingularGauge) {
  const auto L = square();
  const DifferencePair P = special_pair(2, 2, 3, L);
  const EllipticExpr w = EllipticExpr::wp(L);
  try {
    apply_gauge(P, upper2(w, w, w, w));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularGauge);
  }
  EXPECT_THROW(apply_gauge(P, MatrixExpr::identity(3)), Error);
}

TEST(Diffmod, Twists) {
  const auto L = square();
  const DifferencePair P = special_pair(3, 2, 3, L);
  EXPECT_LT(pair_distance(twist_rank1(P, 1.0, 1.0), P, 5, 1), 1e-15);
  const cplx a(0.5, 2), b(-1, 0.25), a2(3, -1), b2(0.2, 0.1);
  EXPECT_LT(pair_distance(twist_rank1(twist_rank1(P, a, b), a2, b2), twist_rank1(P, a * a2, b * b2), 5, 1),
            1e-14);
  EXPECT_TRUE(check_consistency(twist_rank1(P, a, b)).pass);
  try {
    twist_rank1(P, 0.0, 1.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroTwist);
  }
}

TEST(Diffmod, DirectSums) {
  const auto L = square();
  const DifferencePair I1(MatrixExpr::identity(1), MatrixExpr::identity(1), 2, 3, L);
  const DifferencePair I2 = direct_sum(I1, I1);
  EXPECT_EQ(I2.rank(), 2);
  EXPECT_LT((I2.A().eval(cplx(0.2, 0.1)) - Matrix::Identity(2, 2)).norm(), 1e-15);

  const DifferencePair sp = twist_rank1(special_pair(2, 2, 3, L), 2.0, 5.0);
  const DifferencePair m1(MatrixExpr::constant(Matrix::Constant(1, 1, 7.0)),
                          MatrixExpr::constant(Matrix::Constant(1, 1, 11.0)), 2, 3, L);
  const DifferencePair ii = direct_sum(sp, m1);
  EXPECT_EQ(ii.rank(), 3);
  EXPECT_TRUE(check_consistency(ii).pass);
  const Matrix a = ii.A().eval(cplx(0.13, 0.07));
  EXPECT_EQ(a(2, 2), cplx(7.0));
  EXPECT_EQ(a(0, 2), cplx(0.0));

  const DifferencePair other(MatrixExpr::identity(1), MatrixExpr::identity(1), 2, 5, L);
  try {
    direct_sum(I1, other);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MismatchedParameters);
  }
  const DifferencePair other_lattice(MatrixExpr::identity(1), MatrixExpr::identity(1), 2, 3,
                                     make_lattice_ptr(1.0, cplx(0.3, 1.1)));
  EXPECT_THROW(direct_sum(I1, other_lattice), Error);
}

TEST(Diffmod, GaugePreservesConsistency) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& L : ellipdiff::testing::standard_lattices()) {
    const DifferencePair P = special_pair(2, 2, 3, L);
    for (int k = 0; k < 3; ++k) {
      const EllipticExpr f = cplx(u(rng), u(rng)) * EllipticExpr::wp(L) + cplx(u(rng), u(rng));
      const MatrixExpr C = upper2(cplx(1.5, 0.5), f, 0.0, cplx(u(rng), 1.0));
      EXPECT_TRUE(check_consistency(apply_gauge(P, C)).pass);
    }
  }
}

TEST(Diffmod, JsonRoundTrip) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  const DifferencePair P = special_pair(3, 2, 5, L);
  const nlohmann::json j = pair_to_json(P);
  const DifferencePair Q = pair_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(Q.p(), 2);
  EXPECT_EQ(Q.q(), 5);
  EXPECT_EQ(pair_to_json(Q).dump(), j.dump());
  EXPECT_LT(pair_distance(P, Q, 5, 9), 1e-15);

  nlohmann::json bad = j;
  bad.erase("B");
  try {
    pair_from_json(bad);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Schema);
  }
  bad = j;
  bad["p"] = "two";
  EXPECT_THROW(pair_from_json(bad), Error);
  EXPECT_THROW(pair_from_json(nlohmann::json::array()), Error);
}

TEST(Diffmod, SamplesStayInAnnulus) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  std::uint64_t st = 5;
  for (int k = 0; k < 500; ++k) {
    const double r = std::abs(sample_annulus(*L, st));
    EXPECT_GT(r, 0.05);
    EXPECT_LT(r, 0.45 * L->min_period());
  }
}
