#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "ellipdiff/expr.hpp"
#include "test_util.hpp"

using namespace ellipdiff;
using ellipdiff::testing::random_disc;
using ellipdiff::testing::random_point;
using ellipdiff::testing::standard_lattices;

namespace {

EllipticExpr gp(const LatticePtr& L, int p, int q) {
  return EllipticExpr(double(p)) * EllipticExpr::zeta(L, q) - EllipticExpr::zeta(L, p * q);
}
EllipticExpr gq(const LatticePtr& L, int p, int q) { return gp(L, q, p); }

}  // namespace

TEST(Expr, EvalBasics) {
  const auto L = make_lattice_ptr(1.0, cplx(0, 1));
  EXPECT_EQ((EllipticExpr(3.0) * EllipticExpr::z()).eval(cplx(0, 2)), cplx(0, 6));
  const cplx z(0.23, 0.31);
  EXPECT_EQ(EllipticExpr::zeta(L).eval(z), zeta_eval(*L, z));
  EXPECT_EQ(EllipticExpr::wp(L, 1, 0, 1).eval(z), wp_eval(*L, z, 1));
  EXPECT_TRUE(std::isfinite(std::abs(gp(L, 2, 3).eval(z))));
  try {
    EllipticExpr::zeta(L).eval(cplx(1, 1));
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PoleHit);
  }
}

TEST(Expr, RejectsBadAtoms) {
  const auto L = make_lattice_ptr(1.0, cplx(0, 1));
  EXPECT_THROW(EllipticExpr::zeta(L, Rational(-1)), Error);
  EXPECT_THROW(EllipticExpr::zeta(nullptr), Error);
  EXPECT_THROW(EllipticExpr::wp(L, 1, 0, 2), Error);
  EXPECT_THROW(EllipticExpr::z(0), Error);
}

TEST(Expr, QuotientChecks) {
  const auto L = make_lattice_ptr(1.0, cplx(0, 1));
  const EllipticExpr zero = EllipticExpr::z() - EllipticExpr::z();
  // z - z folds structurally only partially; use an explicitly vanishing denominator.
  const EllipticExpr vanishing = EllipticExpr::zeta(L) - EllipticExpr::zeta(L);
  try {
    EllipticExpr::quotient(1.0, vanishing);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DenominatorIdenticallyZero);
  }
  (void)zero;
  const EllipticExpr q = EllipticExpr::quotient(1.0, EllipticExpr::z() - EllipticExpr(0.5));
  try {
    q.eval(0.5);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DenominatorZero);
  }
  EXPECT_NEAR(std::abs(q.eval(1.5) - 1.0), 0.0, 1e-15);
}

TEST(Expr, SubstituteScale) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  const EllipticExpr g = gp(L, 2, 3);
  const EllipticExpr g3 = substitute_scale(g, 3, ScaleDirection::divide);
  // p zeta(z) - zeta(p z).
  ASSERT_EQ(g3.kind(), EllipticExpr::Kind::Sum);
  std::vector<Rational> ms;
  for (const auto& t : g3.args()) {
    if (t.kind() == EllipticExpr::Kind::Zeta) ms.push_back(t.multiplier());
    for (const auto& u : t.args())
      if (u.kind() == EllipticExpr::Kind::Zeta) ms.push_back(u.multiplier());
  }
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0], Rational(1));
  EXPECT_EQ(ms[1], Rational(2));
  // Twice p then q equals once pq; and a multiply undoes a divide.
  const EllipticExpr a = substitute_scale(substitute_scale(g, 2, ScaleDirection::divide), 3, ScaleDirection::divide);
  const EllipticExpr b = substitute_scale(g, 6, ScaleDirection::divide);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(to_json(substitute_scale(b, 6, ScaleDirection::multiply)), to_json(g));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    const cplx z = random_point(*L, rng) * 0.9 + 0.05;
    try {
      EXPECT_LT(std::abs(substitute_scale(g, 2, ScaleDirection::divide).eval(z) - g.eval(z / 2.0)), 1e-10);
    } catch (const Error&) {
    }
  }
}

TEST(Expr, LaurentAtZero) {
  for (const auto& L : standard_lattices()) {
    const LaurentSeries z = laurent_at0(EllipticExpr::zeta(L), 12);
    EXPECT_EQ(z.valuation(), -1);
    EXPECT_LT(std::abs(z.coeff(3) + L->eisenstein(4)), 1e-13);
    for (auto [p, q] : {std::pair{2, 3}, {3, 4}, {2, 5}}) {
      const LaurentSeries s = laurent_at0(gp(L, p, q), 10);
      EXPECT_LT(std::abs(s.coeff(-1) - double(p * p - 1) / (p * q)), 1e-12);
      EXPECT_LT(std::abs(s.coeff(0)), 1e-12);
      EXPECT_EQ(s.order(), 10);
    }
  }
}

TEST(Expr, LaurentMatchesEvaluationNearZero) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  const EllipticExpr g = gp(L, 2, 3);
  const EllipticExpr e = g * g * EllipticExpr::wp(L, 2, cplx(0.3, 0.2)) + EllipticExpr::zeta(L, 1, cplx(0.4, 0.1));
  const LaurentSeries s = laurent_at0(e, 30);
  const cplx z(0.01, 0.0);
  EXPECT_LT(std::abs(s.eval(z) - e.eval(z)), 1e-8 * std::max(1.0, std::abs(e.eval(z))));
  const LaurentSeries sq = laurent_at0(EllipticExpr::quotient(1.0, g), 20);
  EXPECT_EQ(sq.valuation(), 1);
  EXPECT_LT(std::abs(sq.eval(z) - 1.0 / g.eval(z)), 1e-10);
}

TEST(Expr, LaurentCommutesWithScaling) {
  const auto L = make_lattice_ptr(1.0, std::polar(1.0, kPi / 3));
  const EllipticExpr e = gp(L, 3, 4) * EllipticExpr::zeta(L, 12, cplx(0.2, 0.1)) + EllipticExpr::z();
  for (int p : {2, 3}) {
    const LaurentSeries lhs = laurent_at0(substitute_scale(e, p, ScaleDirection::divide), 16);
    const LaurentSeries rhs = scale_argument(laurent_at0(e, 16), p);
    for (int n = lhs.valuation(); n <= 16; ++n)
      EXPECT_LT(std::abs(lhs.coeff(n) - rhs.coeff(n)), 1e-10 * std::max(1.0, std::abs(rhs.coeff(n))));
  }
}

TEST(Expr, Residues) {
  for (const auto& L : standard_lattices()) {
    EXPECT_LT(std::abs(residue_at(EllipticExpr::zeta(L), 0.0) - 1.0), 1e-10);
    EXPECT_LT(std::abs(residue_at(gp(L, 2, 3), 0.0) - 0.5), 1e-9);
    EXPECT_LT(std::abs(residue_at(gp(L, 3, 4), 0.0) - 8.0 / 12.0), 1e-9);
    EXPECT_LT(std::abs(residue_at(gp(L, 2, 3), cplx(0.17, 0.09))), 1e-10);
    try {
      residue_at(EllipticExpr::wp(L), 0.0);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::HigherOrderPole);
    }
  }
}

TEST(Expr, ResidueSumOverFundamentalDomain) {
  for (const auto& L : standard_lattices()) {
    const auto rep = residue_sum_fundamental(gp(L, 2, 3), *L);
    EXPECT_LT(std::abs(rep.sum), 1e-8);
    // Poles of g_p: 1/3-lattice points (residue 1/2 at 0) and the 1/6 points.
    EXPECT_GE(rep.poles.size(), 9u);
    const auto rep2 = residue_sum_fundamental(EllipticExpr::wp(L, 1, cplx(0.2, 0.1)), *L);
    ASSERT_EQ(rep2.poles.size(), 1u);
    EXPECT_LT(std::abs(rep2.sum), 1e-8);
  }
  const auto L = standard_lattices()[0];
  try {
    residue_sum_fundamental(EllipticExpr::zeta(L), *L);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotElliptic);
  }
}

TEST(Expr, ResidueSumFindsDenominatorZeros) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  // 1/(wp - c) has simple poles at the two roots of wp = c, no atom seeds there.
  const EllipticExpr e = EllipticExpr::quotient(1.0, EllipticExpr::wp(L) - EllipticExpr(cplx(2.0, 1.0)));
  const auto rep = residue_sum_fundamental(e, *L);
  EXPECT_EQ(rep.poles.size(), 2u);
  EXPECT_LT(std::abs(rep.sum), 1e-8);
}

TEST(Expr, GIdentities) {
  std::mt19937_64 rng(2);
  for (const auto& L : standard_lattices())
    for (auto [p, q] : {std::pair{2, 3}, {3, 4}, {2, 5}}) {
      const EllipticExpr a = gp(L, p, q), b = gq(L, p, q);
      for (int i = 0; i < 10; ++i) {
        const cplx z = random_point(*L, rng);
        try {
          const cplx v = a.eval(z);
          const double sc = std::max(1.0, std::abs(v));
          EXPECT_LT(std::abs(a.eval(z + L->omega1() / double(q)) - v), 1e-9 * sc);
          EXPECT_LT(std::abs(a.eval(z + L->omega2() / double(q)) - v), 1e-9 * sc);
          const cplx lhs = v - double(q) * a.eval(z / double(q));
          const cplx rhs = b.eval(z) - double(p) * b.eval(z / double(p));
          EXPECT_LT(std::abs(lhs - rhs), 1e-9 * std::max(1.0, std::abs(lhs)));
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), Errc::PoleHit);
        }
      }
    }
}

TEST(Expr, JsonRoundTrip) {
  const auto L = make_lattice_ptr(1.0, cplx(0, 1));
  const EllipticExpr e = EllipticExpr::power(gp(L, 2, 3), 2) * EllipticExpr::wp(L, Rational(3, 2), cplx(0.1, 0.2), 1) +
                         EllipticExpr::quotient(EllipticExpr::z(Rational(1, 3)), EllipticExpr::zeta(L) + 2.0);
  const nlohmann::json j = to_json(e);
  const EllipticExpr back = expr_from_json(j, L);
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_EQ(back.eval(cplx(0.3, 0.2)), e.eval(cplx(0.3, 0.2)));
  EXPECT_THROW(expr_from_json(nlohmann::json::parse(R"({"atom":"bogus"})"), L), Error);
  try {
    expr_from_json(nlohmann::json::parse(R"({"op":"sum"})"), L);
    ADD_FAILURE();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::Schema);
  }
}

TEST(MatrixExpr, ProductInverseSeries) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  const EllipticExpr g = gp(L, 2, 3);
  const MatrixExpr A(2, 2, {1.0, g, 0.0, 2.0});
  const MatrixExpr C(2, 2, {1.0, EllipticExpr::zeta(L, 6), 0.0, 1.0});
  const MatrixExpr P = MatrixExpr::product({MatrixExpr::inverse(C), A, C});
  const cplx z(0.21, 0.13);
  const Matrix direct = C.eval(z).inverse() * A.eval(z) * C.eval(z);
  EXPECT_LT((P.eval(z) - direct).norm(), 1e-12);
  const MatrixExpr E = MatrixExpr::product({A, C}).expanded();
  ASSERT_TRUE(E.is_leaf());
  EXPECT_LT((E.eval(z) - A.eval(z) * C.eval(z)).norm(), 1e-12);
  const SeriesMatrix s = MatrixExpr::inverse(C).laurent_at0(10);
  EXPECT_EQ(s.order(), 10);
  EXPECT_LT(std::abs(s(0, 1).coeff(-1) + 1.0 / 6.0), 1e-12);
  EXPECT_LT((s.eval(cplx(0.01, 0)) - C.eval(cplx(0.01, 0)).inverse()).norm(), 1e-9);
  const MatrixExpr back = matrix_from_json(to_json(P), L);
  EXPECT_EQ(to_json(back).dump(), to_json(P).dump());
  EXPECT_THROW(matrix_from_json(nlohmann::json::parse("[[1,2],[3]]"), L), Error);
}
