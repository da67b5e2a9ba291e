#pragma once

#include <cstdint>

#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/expr.hpp"

namespace ellipdiff {

struct PairOptions {
  // Accept multiplicatively independent, non-coprime (p, q); results are untrusted.
  bool allow_mult_indep = false;
};

bool multiplicatively_independent(std::int64_t p, std::int64_t q);

// (A, B) with B(z/p)A(z) = A(z/q)B(z), over the elliptic functions of L.
class DifferencePair {
 public:
  DifferencePair(MatrixExpr A, MatrixExpr B, int p, int q, LatticePtr L, PairOptions opts = {});

  const MatrixExpr& A() const { return A_; }
  const MatrixExpr& B() const { return B_; }
  int p() const { return p_; }
  int q() const { return q_; }
  const LatticePtr& lattice() const { return L_; }
  int rank() const { return A_.rows(); }
  bool trusted() const { return trusted_; }
  const PairOptions& options() const { return opts_; }

 private:
  MatrixExpr A_, B_;
  int p_, q_;
  LatticePtr L_;
  PairOptions opts_;
  bool trusted_ = true;
};

struct ConsistencyConfig {
  int n_samples = 20;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  int retry_budget = 400;
  int series_order = 12;
  bool check_series = true;
};

struct ConsistencyReport {
  // max over samples of |B(z/p)A(z) - A(z/q)B(z)|_max / max(1, |B(z/p)A(z)|_max)
  double max_residual = 0;
  double series_residual = 0;
  bool pass = false;
  int samples = 0;
  int retries = 0;
  int series_order = 0;
  bool series_checked = false;
};

ConsistencyReport check_consistency(const DifferencePair& P, const ConsistencyConfig& cfg = {});

// Random points in the annulus 0.05 < |z| < 0.45 * min period.
cplx sample_annulus(const Lattice& L, std::uint64_t& state);

DifferencePair apply_gauge(const DifferencePair& P, const MatrixExpr& C);
DifferencePair twist_rank1(const DifferencePair& P, cplx a, cplx b);
DifferencePair direct_sum(const DifferencePair& P1, const DifferencePair& P2);

nlohmann::json pair_to_json(const DifferencePair& P);
DifferencePair pair_from_json(const nlohmann::json& j, PairOptions opts = {});

}  // namespace ellipdiff
