#pragma once

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/canonical.hpp"
#include "ellipdiff/formal.hpp"

namespace ellipdiff {

constexpr double kRadiusSentinel = 1e6;

struct RadiusEstimate {
  double c1 = 0;      // |A0^{-1}| |A0|
  double c2 = 0;      // smallest c with |M_i| <= c^i, A^{-1} A0 = I + sum z^i M_i
  int R = 0;          // c1 / p^R <= 1/2
  double radius = 0;  // 1 / c2, capped at kRadiusSentinel
};

RadiusEstimate radius_estimate(const SeriesMatrix& A, const Matrix& A0, double p);

// C near 0 as a series, continued through C(z) = A(z)^{-1} C(z/p) A0.
struct ContinuedGauge {
  MatrixExpr A;
  Matrix A0;
  int p = 2;
  SeriesMatrix C;
  double radius = 0;
  RadiusEstimate estimate;
  // q-side, used for C(z) = B(z)^{-1} C(z/q) B0
  bool has_q_side = false;
  MatrixExpr B;
  Matrix B0;
  int q = 3;
};

ContinuedGauge gauge_from_series(const MatrixExpr& A, int p, int N);
ContinuedGauge gauge_from_formal(const DifferencePair& P, int N);
// C = U(z) U(0)^{-1} for a typed pair built with base point z0 != 0.
ContinuedGauge gauge_from_typed(const BlockScalarPair& bs, const DifferencePair& P, cplx z0, int N);

enum class Route { p, q };

// extra_steps > 0 contracts further than needed (path-independence checks).
Matrix continue_gauge(const ContinuedGauge& g, cplx z, Route route = Route::p, int extra_steps = 0);

struct ConstancyReport {
  double max_a_residual = 0;
  double max_b_residual = 0;
  int points = 0;
  int skipped = 0;
  bool pass = false;
};

ConstancyReport constancy_probe(const DifferencePair& P, const ContinuedGauge& g, int n_points, double tol,
                                std::uint64_t seed = 1);

nlohmann::json radius_json(const RadiusEstimate& r);

}  // namespace ellipdiff
