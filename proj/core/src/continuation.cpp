#include "ellipdiff/continuation.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

namespace ellipdiff {

namespace {

double opnorm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix checked_inverse(const MatrixExpr& M, cplx z) {
  Matrix m;
  try {
    m = M.eval(z);
  } catch (const Error& e) {
    if (e.code() == Errc::PoleHit || e.code() == Errc::DenominatorZero)
      fail(Errc::PoleOnOrbit, "matrix has a pole on the contraction orbit");
    throw;
  }
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible() || lu.rcond() < 1e-13) fail(Errc::PoleOnOrbit, "matrix is singular on the contraction orbit");
  return lu.inverse();
}

}  // namespace

RadiusEstimate radius_estimate(const SeriesMatrix& A, const Matrix& A0, double p) {
  RadiusEstimate r;
  r.c1 = opnorm(A0) * opnorm(A0.inverse());
  while (r.c1 / std::pow(p, r.R) > 0.5) ++r.R;
  const SeriesMatrix M = invert(A) * SeriesMatrix::constant(A0, A.order());
  const double scale = std::max(1.0, opnorm(A0));
  for (int i = 1; i <= M.order(); ++i) {
    const double n = opnorm(M.coefficient(i));
    if (n > 1e-14 * scale) r.c2 = std::max(r.c2, std::pow(n, 1.0 / i));
  }
  r.radius = r.c2 > 1.0 / kRadiusSentinel ? 1.0 / r.c2 : kRadiusSentinel;
  return r;
}

ContinuedGauge gauge_from_series(const MatrixExpr& A, int p, int N) {
  ContinuedGauge g;
  g.A = A;
  g.p = p;
  const SeriesMatrix As = A.laurent_at0(N);
  if (As.valuation() < 0) fail(Errc::NotRegularSingular, "A has a pole at 0");
  g.A0 = As.coefficient(0);
  g.C = solve_gauge_series(As, p, N);
  g.estimate = radius_estimate(As, g.A0, p);
  g.radius = g.estimate.radius;
  return g;
}

ContinuedGauge gauge_from_formal(const DifferencePair& P, int N) {
  const FormalReduction f = reduce_pair(P, N);
  ContinuedGauge g;
  g.A = P.A();
  g.A0 = f.A0;
  g.p = P.p();
  g.C = f.C;
  g.estimate = radius_estimate(P.A().laurent_at0(N), f.A0, P.p());
  g.radius = g.estimate.radius;
  g.has_q_side = true;
  g.B = P.B();
  g.B0 = f.B0;
  g.q = P.q();
  return g;
}

ContinuedGauge gauge_from_typed(const BlockScalarPair& bs, const DifferencePair& P, cplx z0, int N) {
  if (P.lattice()->distance_to_lattice(z0) < 1e-6) fail(Errc::InvalidInput, "base point z0 must avoid the lattice");
  const int m = P.p() * P.q();
  const MatrixExpr U = block_U(bs.layout, m, z0, P.lattice());
  const Matrix U0i = block_U_inverse(bs.layout, m, z0, P.lattice()).eval(0.0);
  const Matrix U0 = U.eval(0.0);
  ContinuedGauge g;
  g.A = P.A();
  g.p = P.p();
  g.A0 = U0 * bs.T * U0i;
  g.B = P.B();
  g.q = P.q();
  g.B0 = U0 * bs.S * U0i;
  g.has_q_side = true;
  g.C = MatrixExpr::product({U, MatrixExpr::constant(U0i)}).laurent_at0(N).truncated(N);
  g.estimate = radius_estimate(P.A().laurent_at0(N), g.A0, P.p());
  g.radius = g.estimate.radius;
  return g;
}

Matrix continue_gauge(const ContinuedGauge& g, cplx z, Route route, int extra_steps) {
  if (route == Route::q && !g.has_q_side) fail(Errc::InvalidInput, "gauge has no q-side data");
  const double s = route == Route::p ? g.p : g.q;
  const MatrixExpr& M = route == Route::p ? g.A : g.B;
  const Matrix& M0 = route == Route::p ? g.A0 : g.B0;
  int m = 0;
  while (std::abs(z) / std::pow(s, m) >= g.radius / 2) ++m;
  m += extra_steps;
  Matrix c = g.C.eval(z / std::pow(s, m));
  for (int k = m - 1; k >= 0; --k) {
    const cplx x = z / std::pow(s, k);
    c = checked_inverse(M, x) * c * M0;
  }
  return c;
}

ConstancyReport constancy_probe(const DifferencePair& P, const ContinuedGauge& g, int n_points, double tol,
                                std::uint64_t seed) {
  ConstancyReport rep;
  std::uint64_t state = seed;
  const double p = P.p(), q = P.q();
  const Matrix B0 = g.has_q_side ? g.B0 : Matrix();
  for (int attempt = 0; rep.points < n_points && attempt < 20 * n_points; ++attempt) {
    const cplx z = sample_annulus(*P.lattice(), state);
    try {
      const Matrix Cz = continue_gauge(g, z);
      const Matrix Ap = continue_gauge(g, z / p).inverse() * P.A().eval(z) * Cz;
      rep.max_a_residual = std::max(rep.max_a_residual, max_abs(Ap - g.A0) / std::max(1.0, max_abs(g.A0)));
      if (g.has_q_side) {
        const Matrix Bq = continue_gauge(g, z / q).inverse() * P.B().eval(z) * Cz;
        rep.max_b_residual = std::max(rep.max_b_residual, max_abs(Bq - B0) / std::max(1.0, max_abs(B0)));
      }
      ++rep.points;
    } catch (const Error& e) {
      if (e.code() != Errc::PoleOnOrbit && e.code() != Errc::PoleHit) throw;
      ++rep.skipped;
    }
  }
  rep.pass = rep.points == n_points && rep.max_a_residual < tol && rep.max_b_residual < tol;
  return rep;
}

nlohmann::json radius_json(const RadiusEstimate& r) {
  return {{"c1", r.c1}, {"c2", r.c2}, {"R", r.R}, {"radius", r.radius}};
}

}  // namespace ellipdiff
