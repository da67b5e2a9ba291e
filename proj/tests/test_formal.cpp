#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "ellipdiff/canonical.hpp"
#include "ellipdiff/formal.hpp"

using namespace ellipdiff;

namespace {

Matrix random_matrix(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * cplx(u(rng), u(rng));
  return m;
}

// 1 / prod_{m>=0} (1 + z 2^{-m}) = sum_n (-z)^n / ((1/2;1/2)_n)
cplx euler_coefficient(int n) {
  double d = 1;
  for (int k = 1; k <= n; ++k) d *= 1.0 - std::pow(0.5, k);
  return (n % 2 ? -1.0 : 1.0) / d;
}

}  // namespace

TEST(Formal, RestrictionExponents) {
  EXPECT_EQ(restriction_exponent(1.0, 2.0), 0);
  EXPECT_EQ(restriction_exponent(5.0, 2.0), -2);
  EXPECT_EQ(restriction_exponent(1.0 / 3.0, 3.0), 1);
  EXPECT_EQ(restriction_exponent(2.0, 2.0), -1);
  EXPECT_EQ(restriction_exponent(cplx(0, 0.2), 2.0), 3);
  EXPECT_THROW(restriction_exponent(0.0, 2.0), Error);
  for (double m : {1e-5, 0.3, 0.99999, 1.0, 7.9999, 8.0, 1e6}) {
    const int k = restriction_exponent(m, 3.0);
    const double v = m * std::pow(3.0, k);
    EXPECT_GE(v, 1.0 - 1e-12);
    EXPECT_LT(v, 3.0);
  }
}

TEST(Formal, PRestrict) {
  Matrix A0(2, 2);
  A0 << 5, 1, 0, 1;
  const PRestriction r = p_restrict(A0, 2.0);
  ASSERT_EQ(r.clusters.size(), 2u);
  Eigen::VectorXcd d = r.A0r.diagonal();
  std::vector<double> mags{std::abs(d(0)), std::abs(d(1))};
  std::sort(mags.begin(), mags.end());
  EXPECT_NEAR(mags[0], 1.0, 1e-12);
  EXPECT_NEAR(mags[1], 1.25, 1e-12);
  // basis reproduces A0 up to the scaling
  Matrix back = r.basis.inverse() * A0 * r.basis;
  for (int i = 0; i < 2; ++i) back.row(i) *= std::pow(2.0, r.exponents[i]);
  EXPECT_LT((back - r.A0r).norm(), 1e-12);

  Matrix J(3, 3);
  J << 3, 1, 0, 0, 3, 0, 0, 0, cplx(0, 0.5);
  const PRestriction rj = p_restrict(J, 3.0);
  EXPECT_EQ(rj.clusters.size(), 2u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(std::abs(rj.A0r(i, i)), 1.0 - 1e-9);
    EXPECT_LT(std::abs(rj.A0r(i, i)), 3.0);
  }
  try {
    p_restrict(Matrix::Zero(2, 2), 2.0);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularInput);
  }
  Matrix amb = Matrix::Zero(2, 2);
  amb.diagonal() << 1.0, 1.0 + 1e-5;
  EXPECT_THROW(p_restrict(amb, 2.0), Error);
}

TEST(Formal, TwistedSylvester) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 4; ++n) {
    const Matrix A0 = random_matrix(n, rng) + 2.0 * Matrix::Identity(n, n);
    const Matrix F = random_matrix(n, rng);
    const cplx f = 0.25;
    const Matrix X = solve_twisted_sylvester(A0, f, F);
    EXPECT_LT((f * X * A0 - A0 * X - F).norm(), 1e-12);
  }
  Matrix D = Matrix::Zero(2, 2);
  D.diagonal() << 1.0, 4.0;
  EXPECT_THROW(solve_twisted_sylvester(D, 0.25, Matrix::Identity(2, 2)), Error);
}

TEST(Formal, ConstantCommutingPair) {
  Matrix A(2, 2), B(2, 2);
  A << 1.5, 1, 0, 1.5;
  B << 3, 2, 0, 3;
  const auto f = reduce_to_constants(SeriesMatrix::constant(A, 10), SeriesMatrix::constant(B, 10), 2, 3, 10);
  EXPECT_LT(max_coeff_diff(f.C, SeriesMatrix::identity(2, 10)), 1e-15);
  EXPECT_LT((f.A0 - A).norm(), 1e-15);
  EXPECT_LT((f.B0 - B).norm(), 1e-14);
  EXPECT_LT(f.commutator, 1e-15);
  EXPECT_EQ(f.restricted.exponents, (std::vector<int>{0, 0}));
}

TEST(Formal, RankOneInfiniteProduct) {
  const int N = 20;
  const SeriesMatrix A = SeriesMatrix::from_coefficients({Matrix::Ones(1, 1), Matrix::Ones(1, 1)}, 0, N);
  // consistent B: C(z/3) b C(z)^{-1} from the product oracle
  std::vector<Matrix> oracle;
  for (int n = 0; n <= N + 2; ++n) oracle.push_back(Matrix::Constant(1, 1, euler_coefficient(n)));
  const SeriesMatrix Co = SeriesMatrix::from_coefficients(oracle, 0, N + 2);
  const SeriesMatrix B = (scale_argument(Co, 3) * SeriesMatrix::constant(Matrix::Constant(1, 1, 7.0), N + 2) *
                          invert(Co)).truncated(N);
  const auto f = reduce_to_constants(A, B, 2, 3, N);
  EXPECT_NEAR(std::abs(f.C.coefficient(1)(0, 0) - cplx(-2.0)), 0, 1e-13);
  EXPECT_NEAR(std::abs(f.C.coefficient(2)(0, 0) - cplx(8.0 / 3.0)), 0, 1e-13);
  EXPECT_NEAR(std::abs(f.C.coefficient(3)(0, 0) - cplx(-64.0 / 21.0)), 0, 1e-13);
  for (int n = 0; n <= N; ++n) EXPECT_NEAR(std::abs(f.C.coefficient(n)(0, 0) - euler_coefficient(n)), 0, 1e-11);
  EXPECT_NEAR(std::abs(f.B0(0, 0) - 7.0), 0, 1e-12);
  EXPECT_LT(f.relation_residual, 1e-13);
}

TEST(Formal, SynthesisRoundTrip) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1, 1);
  const int N = 40;
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + trial % 4;
    const auto [p, q] = trial % 2 ? std::pair{3, 4} : std::pair{2, 3};
    Eigen::VectorXcd ev(n);
    for (int i = 0; i < n; ++i) ev(i) = std::polar(1.0 + 0.9 * (u(rng) + 1) / 2, kPi * u(rng));
    const Matrix V = random_matrix(n, rng) + 2.0 * Matrix::Identity(n, n);
    const Matrix A0 = V * ev.asDiagonal() * V.inverse();
    const Matrix B0 = cplx(0.5, 0.2) * Matrix::Identity(n, n) + cplx(1, -1) * A0 + 0.3 * A0 * A0;
    std::vector<Matrix> c0{random_matrix(n, rng, 0.3), random_matrix(n, rng, 0.3), random_matrix(n, rng, 0.3)};
    const auto syn = synthesize_formal_pair(A0, B0, c0, p, q, N);
    const auto f = reduce_to_constants(syn.A, syn.B, p, q, N);
    EXPECT_LT(f.relation_residual, 1e-9);
    EXPECT_LT(f.commutator, 1e-9);
    EXPECT_LT((f.A0 - A0).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((f.B0 - B0).cwiseAbs().maxCoeff(), 1e-9);
    for (int k = 0; k <= N; ++k)
      EXPECT_LT((f.C.coefficient(k) - syn.C0.coefficient(k)).cwiseAbs().maxCoeff(), 1e-10) << trial << " " << k;
  }
}

TEST(Formal, ResonanceRejected) {
  for (auto [ratio, exponent] : {std::pair{2.0, 1}, {4.0, 2}, {8.0, 3}}) {
    Matrix A0 = Matrix::Zero(2, 2);
    A0.diagonal() << 1.3, 1.3 * ratio;
    const auto syn = synthesize_formal_pair(A0, Matrix::Identity(2, 2), {0.2 * Matrix::Ones(2, 2)}, 2, 3, 10);
    try {
      reduce_to_constants(syn.A, syn.B, 2, 3, 10);
      ADD_FAILURE();
    } catch (const ResonantError& e) {
      EXPECT_EQ(e.exponent(), exponent);
      EXPECT_EQ(e.code(), Errc::Resonant);
    }
  }
  // ratio p^{N+1} is beyond the truncation and therefore accepted
  Matrix A0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, 8.0;
  EXPECT_NO_THROW(reduce_to_constants(SeriesMatrix::constant(A0, 2), SeriesMatrix::constant(A0, 2), 2, 3, 2));
}

TEST(Formal, InputErrors) {
  Matrix S(2, 2);
  S << 1, 1, 1, 1;
  try {
    reduce_to_constants(SeriesMatrix::constant(S, 5), SeriesMatrix::identity(2, 5), 2, 3, 5);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotRegularSingular);
  }
  const SeriesMatrix polar = SeriesMatrix::from_coefficients({Matrix::Identity(2, 2)}, -1, 5);
  EXPECT_THROW(reduce_to_constants(polar, SeriesMatrix::identity(2, 5), 2, 3, 5), Error);
  // B not consistent with A
  std::mt19937_64 rng(5);
  const SeriesMatrix Bbad = SeriesMatrix::from_coefficients({Matrix::Identity(2, 2), random_matrix(2, rng)}, 0, 6);
  Matrix A0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, 1.7;
  try {
    reduce_to_constants(SeriesMatrix::constant(A0, 6), Bbad, 2, 3, 6);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::B0NotConstant);
  }
  EXPECT_THROW(reduce_to_constants(SeriesMatrix::identity(2, 3), SeriesMatrix::identity(2, 3), 2, 3, 8), Error);
  EXPECT_THROW(reduce_to_constants(SeriesMatrix::identity(2, 3), SeriesMatrix::identity(3, 3), 2, 3, 3), Error);
}

TEST(Formal, PairsFromExpressions) {
  const auto L = make_lattice_ptr(1.0, cplx(0.3, 1.1));
  // special pair at z0 = 0 has a pole at the origin
  try {
    reduce_pair(special_pair(2, 2, 3, L), 10);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotRegularSingular);
  }
  // shifted special pair: A(0) has eigenvalues 1 and p
  try {
    reduce_pair(special_pair(2, 2, 3, L, cplx(0.11, 0.07)), 10);
    ADD_FAILURE();
  } catch (const ResonantError& e) {
    EXPECT_EQ(e.exponent(), 1);
  }
  // gauge of a constant pair by an elliptic matrix holomorphic at 0
  Matrix A0 = Matrix::Zero(2, 2), B0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, cplx(0, 1.5);
  B0.diagonal() << 2.0, 0.5;
  const DifferencePair P(MatrixExpr::constant(A0), MatrixExpr::constant(B0), 2, 3, L);
  const EllipticExpr w = EllipticExpr::wp(L, 1, cplx(0.25, 0.4));
  const DifferencePair G = apply_gauge(P, MatrixExpr(2, 2, {1.0, w, 0.0, 1.0}));
  const auto f = reduce_pair(G, 16);
  EXPECT_LT(f.relation_residual, 1e-9);
  EXPECT_LT((f.A0 - G.A().eval(0.0)).norm(), 1e-9);
  EXPECT_LT(f.commutator, 1e-9);
  Eigen::ComplexEigenSolver<Matrix> es(f.B0);
  std::vector<double> re{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
  std::sort(re.begin(), re.end());
  EXPECT_NEAR(re[0], 0.5, 1e-9);
  EXPECT_NEAR(re[1], 2.0, 1e-9);
}

TEST(Formal, UniquenessProbe) {
  const int N = 8;
  Matrix A0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, 4.0;
  const SeriesMatrix A = SeriesMatrix::constant(A0, N);
  const SeriesMatrix I = SeriesMatrix::identity(2, N);
  // engineered resonance: D = I + z^2 E12 also solves the relation
  Matrix E12 = Matrix::Zero(2, 2);
  E12(0, 1) = 1.0;
  const SeriesMatrix D = SeriesMatrix::from_coefficients({Matrix::Identity(2, 2), Matrix::Zero(2, 2), E12}, 0, N);
  const auto v = uniqueness_probe(A, I, A0, D, A0, 2.0, 1);
  EXPECT_TRUE(v.relations_hold);
  EXPECT_FALSE(v.uniqueness_expected);
  EXPECT_FALSE(v.agree);
  EXPECT_EQ(v.witness_exponent, 2);
  EXPECT_LT((A0.inverse() * v.witness * A0 - 4.0 * v.witness).norm(), 1e-12 * v.witness.norm());
  EXPECT_GT(std::abs(v.witness(0, 1)), 0.5);
  EXPECT_LT(std::abs(v.witness(1, 0)), 1e-12);
  // duplicates agree
  const auto dup = uniqueness_probe(A, D, A0, D, A0, 2.0, 3);
  EXPECT_TRUE(dup.agree);
  EXPECT_TRUE(dup.uniqueness_expected);
  // p-restricted A0 with R = 1
  Matrix Ar = Matrix::Zero(2, 2);
  Ar.diagonal() << 1.0, 1.5;
  std::mt19937_64 rng(8);
  const auto syn = synthesize_formal_pair(Ar, Ar, {random_matrix(2, rng, 0.3)}, 2, 3, N);
  const auto f = reduce_to_constants(syn.A, syn.B, 2, 3, N);
  const auto u = uniqueness_probe(syn.A, f.C, f.A0, syn.C0.truncated(N), Ar, 2.0, 1);
  EXPECT_TRUE(u.uniqueness_expected);
  EXPECT_TRUE(u.relations_hold);
  EXPECT_TRUE(u.agree);
}

TEST(Formal, ReductionJson) {
  Matrix A0 = Matrix::Zero(2, 2);
  A0.diagonal() << 1.0, 5.0;
  const auto f = reduce_to_constants(SeriesMatrix::constant(A0, 3), SeriesMatrix::constant(A0, 3), 2, 3, 3);
  const auto j = reduction_json(f);
  EXPECT_EQ(j.at("C_coefficients").size(), 4u);
  EXPECT_EQ(j.at("exponents").size(), 2u);
}
