#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "ellipdiff/canonical.hpp"
#include "ellipdiff/descent.hpp"

using namespace ellipdiff;

namespace {

GaussianRational gq(long n, long d = 1) { return GaussianRational(BigRational(n) / d); }

LatticePtr square() { return make_lattice_ptr(1.0, cplx(0, 1)); }

}  // namespace

TEST(Descent, ResonantExponent) {
  EXPECT_EQ(resonant_exponent(cplx(0.25), 2), 2);
  EXPECT_EQ(resonant_exponent(cplx(8.0), 2), -3);
  EXPECT_EQ(resonant_exponent(cplx(1.0), 5), 0);
  EXPECT_FALSE(resonant_exponent(cplx(3.0), 2));
  EXPECT_FALSE(resonant_exponent(cplx(0, 0.25), 2));
  EXPECT_FALSE(resonant_exponent(cplx(0), 2));
  EXPECT_EQ(resonant_exponent(gq(1, 9), 3), 2);
  EXPECT_EQ(resonant_exponent(gq(27), 3), -3);
  EXPECT_FALSE(resonant_exponent(gq(2, 9), 3));
  EXPECT_FALSE(resonant_exponent(GaussianRational(BigRational(1, 4), 1), 2));
  EXPECT_FALSE(resonant_exponent(gq(-1, 4), 2));
}

TEST(Descent, ScalingExamples) {
  // t = 3, g = z^2: h_2 = 1/(1/4 - 3) = -4/11
  const auto s = solve_scaling_equation(gq(3), ExactLaurentPoly::monomial(gq(1), 2), 2);
  EXPECT_FALSE(s.obstructed);
  EXPECT_FALSE(s.free_exponent);
  EXPECT_TRUE(s.h == ExactLaurentPoly::monomial(gq(-4, 11), 2));
  const auto sc = solve_scaling_equation(cplx(3), LaurentPoly::monomial(1.0, 2), 2);
  EXPECT_NEAR(std::abs(sc.h.coeff(2) + 4.0 / 11), 0, 1e-15);

  const auto z0 = solve_scaling_equation(gq(3), ExactLaurentPoly(), 2);
  EXPECT_TRUE(z0.h.is_zero());

  // t = p^{-n}, g = 0: one-parameter family c z^n
  const auto fam = solve_scaling_equation(gq(1, 8), ExactLaurentPoly(), 2, gq(5));
  ASSERT_TRUE(fam.free_exponent);
  EXPECT_EQ(*fam.free_exponent, 3);
  EXPECT_TRUE(fam.h == ExactLaurentPoly::monomial(gq(5), 3));
  EXPECT_TRUE(scaling_residual(fam.h, gq(1, 8), ExactLaurentPoly(), 2).is_zero());

  const auto ob = solve_scaling_equation(gq(1, 8), ExactLaurentPoly::monomial(gq(1), 3), 2);
  EXPECT_TRUE(ob.obstructed);
  EXPECT_EQ(ob.obstruction_exponent, 3);

  // resonance away from supp(g) leaves a free parameter
  const auto fr = solve_scaling_equation(gq(1, 8), ExactLaurentPoly::monomial(gq(1), -1), 2);
  EXPECT_FALSE(fr.obstructed);
  EXPECT_EQ(fr.free_exponent, 3);
  EXPECT_TRUE(scaling_residual(fr.h, gq(1, 8), ExactLaurentPoly::monomial(gq(1), -1), 2).is_zero());
}

TEST(Descent, ScalingPropertiesExact) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> e(-6, 6), c(-20, 20), d(1, 9);
  for (int trial = 0; trial < 300; ++trial) {
    const std::int64_t p = 2 + trial % 3;
    ExactLaurentPoly g;
    for (int k = 0; k < 4; ++k) g.set(e(rng), GaussianRational(BigRational(c(rng), d(rng)), BigRational(c(rng), d(rng))));
    GaussianRational t = trial % 4 == 0 ? detail::p_pow_neg<GaussianRational>(p, e(rng))
                                        : GaussianRational(BigRational(c(rng), d(rng)), BigRational(c(rng), d(rng)));
    if (t.is_zero()) t = gq(7);
    const auto s = solve_scaling_equation(t, g, p, gq(trial));
    auto supp_g = g.support();
    for (int n : s.h.support()) {
      const bool in_g = std::find(supp_g.begin(), supp_g.end(), n) != supp_g.end();
      EXPECT_TRUE(in_g || (s.free_exponent && n == *s.free_exponent));
    }
    if (s.obstructed) {
      EXPECT_EQ(resonant_exponent(t, p), s.obstruction_exponent);
      EXPECT_FALSE(g.coeff(s.obstruction_exponent).is_zero());
    } else {
      EXPECT_TRUE(scaling_residual(s.h, t, g, p).is_zero()) << trial;
    }
  }
}

TEST(Descent, TriangularDiagonal) {
  Matrix T = Matrix::Zero(2, 2);
  T(0, 0) = 0.5;
  T(1, 1) = 0.25;
  const int N = 8;
  const std::vector<LaurentSeries> h = {LaurentSeries::monomial(1.0, 1, N), LaurentSeries::monomial(1.0, 2, N)};
  const auto sol = solve_triangular_system(T, h, 2);
  ASSERT_EQ(sol.h.size(), 2u);
  EXPECT_EQ(sol.h[0].support(), std::vector<int>{1});
  EXPECT_EQ(sol.h[1].support(), std::vector<int>{2});
  EXPECT_NEAR(std::abs(sol.h[0].coeff(1) - 1.0), 0, 1e-14);
  EXPECT_NEAR(std::abs(sol.h[1].coeff(2) - 1.0), 0, 1e-14);
  EXPECT_LT(sol.relation_residual, 1e-14);
}

TEST(Descent, TriangularCoupled) {
  // h1(z/p) = (1/2) h1, h2(z/p) = c h1 + (1/4) h2 with h1 = z: h2 = a z^2 + b z, b (1/2 - 1/4) = c
  const double c = 0.75;
  Matrix T = Matrix::Zero(2, 2);
  T(0, 0) = 0.5;
  T(0, 1) = c;
  T(1, 1) = 0.25;
  const int N = 10;
  const double b = c / (0.5 - 0.25), a = -1.5;
  const std::vector<LaurentSeries> h = {LaurentSeries::monomial(1.0, 1, N),
                                        LaurentSeries::monomial(b, 1, N) + LaurentSeries::monomial(a, 2, N)};
  const auto sol = solve_triangular_system(T, h, 2);
  EXPECT_NEAR(std::abs(sol.h[1].coeff(1) - b), 0, 1e-12);
  EXPECT_NEAR(std::abs(sol.h[1].coeff(2) - a), 0, 1e-12);
  EXPECT_EQ(sol.h[1].terms().size(), 2u);
  EXPECT_LT(sol.match_error, 1e-12);
}

TEST(Descent, TriangularConjugatedRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> G;
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 2 + trial % 3;
    const std::int64_t p = 2 + trial % 2;
    Matrix M(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) M(i, j) = cplx(G(rng), G(rng)) + (i == j ? 3.0 : 0.0);
    std::vector<int> js;
    Matrix D = Matrix::Zero(r, r);
    for (int i = 0; i < r; ++i) {
      js.push_back(i - 1);
      D(i, i) = std::pow(double(p), -js[i]);
    }
    const Matrix T = (M * D * M.inverse()).transpose();
    const int N = 6;
    std::vector<LaurentSeries> h;
    for (int i = 0; i < r; ++i) {
      LaurentSeries s = LaurentSeries::zero(N);
      for (int j = 0; j < r; ++j) s = s + LaurentSeries::monomial(M(i, j), js[j], N);
      h.push_back(s);
    }
    const auto sol = solve_triangular_system(T, h, p);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) EXPECT_NEAR(std::abs(sol.h[i].coeff(js[j]) - M(i, j)), 0, 1e-10);
    EXPECT_LT(sol.relation_residual, 1e-12);
  }
}

TEST(Descent, TriangularErrors) {
  Matrix T = Matrix::Zero(2, 2);
  T(0, 0) = 0.5;
  T(1, 1) = 0.25;
  const int N = 8;
  const std::vector<LaurentSeries> bad = {LaurentSeries::monomial(1.0, 1, N), LaurentSeries::monomial(1.0, 3, N)};
  try {
    solve_triangular_system(T, bad, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotSatisfied);
  }
  EXPECT_THROW(solve_triangular_system(Matrix::Zero(2, 2), bad, 2), Error);
  EXPECT_THROW(solve_triangular_system(T, {bad[0]}, 2), Error);
  // Jordan block at a resonance: h2(z/p) = h1 + (1/2) h2 forces z^1 with nothing to absorb it
  Matrix J = Matrix::Zero(2, 2);
  J(0, 0) = 0.5;
  J(0, 1) = 1.0;
  J(1, 1) = 0.5;
  try {
    solve_triangular_system(J, {LaurentSeries::monomial(1.0, 1, N), LaurentSeries::monomial(1.0, 1, N)}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::NotSatisfied || e.code() == Errc::Obstructed);
  }
  const auto z = solve_triangular_system(T, {LaurentSeries::zero(N), LaurentSeries::zero(N)}, 2);
  EXPECT_TRUE(z.h[0].is_zero() && z.h[1].is_zero());
}

TEST(Descent, ZetaDefectElliptic) {
  const auto L = square();
  const auto e2 = zeta_defect(L, 2);
  EXPECT_LT(ellipticity_defect(e2, {2.0 * L->omega1(), 2.0 * L->omega2()}, 30, 3), 1e-9);
  // not Lambda-periodic: shifts by omega pick up (p - 1) eta differences of half periods
  EXPECT_GT(ellipticity_defect(e2, {L->omega1()}, 30, 3), 1e-3);
  // residue p^2 - 1 at 0
  EXPECT_NEAR(std::abs(residue_at(e2, 0.0) - 3.0), 0, 1e-7);
}

TEST(Descent, MembershipDemo) {
  const auto L = square();
  const RingElement z{L, {{EllipticExpr(1.0), 1, 0}}};
  const RingElement zeta{L, {{EllipticExpr(1.0), 0, 1}}};
  const RingElement comp{L, {{g_expr(Which::p, 2, 3, L), -1, 0}, {EllipticExpr(1.0), 0, 1}}};
  const RingElement mixed{L, {{EllipticExpr(2.0), 2, 0}, {EllipticExpr(0.5), -1, 2}, {EllipticExpr::wp(L), 1, 1}}};
  for (const auto* f : {&z, &zeta, &comp, &mixed}) {
    const auto rep = r_ring_membership_demo(*f, 2, 3, 9);
    EXPECT_TRUE(rep.pass);
    for (const auto& w : rep.witnesses) EXPECT_TRUE(w.pass) << w.name << " " << w.value;
    EXPECT_EQ(membership_json(rep)["witnesses"].size(), rep.witnesses.size());
  }
}

TEST(Descent, Json) {
  LaurentPoly h;
  h.set(-2, cplx(1, 2));
  h.set(3, cplx(-0.5, 0));
  EXPECT_TRUE(laurent_from_json(laurent_json(h)) == h);
  ExactLaurentPoly e;
  e.set(1, GaussianRational(BigRational(1, 3), BigRational(-2)));
  const auto j = exact_laurent_json(e);
  EXPECT_EQ(j.dump(), R"({"terms":[[1,["1/3","-2"]]]})");
  EXPECT_TRUE(exact_laurent_from_json(j) == e);
  EXPECT_THROW(laurent_from_json(nlohmann::json::array()), Error);
  EXPECT_THROW(exact_laurent_from_json(nlohmann::json::parse(R"({"terms":[[1,"1/0"]]})")), Error);
  EXPECT_THROW(exact_laurent_from_json(nlohmann::json::parse(R"({"terms":[[1,"x"]]})")), Error);
}
