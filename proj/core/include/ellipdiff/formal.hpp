#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/diffmod.hpp"
#include "ellipdiff/series.hpp"

namespace ellipdiff {

struct EigenCluster {
  cplx value;        // cluster mean
  int multiplicity;
  int exponent;      // k with 1 <= |p^k c| < p
};

struct PRestriction {
  Matrix A0r;        // block upper-triangular, eigenvalues p-restricted
  Matrix basis;      // A0r = p^k-scaled blocks of basis^{-1} A0 basis
  std::vector<EigenCluster> clusters;
  std::vector<int> exponents;  // one per basis vector
};

// Eigenvalues of A0 (Schur form) grouped with relative tolerance 1e-6.
// Pairs at relative distance in (1e-6, 1e-4] are refused as ambiguous.
std::vector<EigenCluster> eigen_clusters(const Matrix& A0, double p);
int restriction_exponent(cplx c, double p);
PRestriction p_restrict(const Matrix& A0, double p);

// Solves factor * X * A0 - A0 * X = F through the Schur form of A0.
Matrix solve_twisted_sylvester(const Matrix& A0, cplx factor, const Matrix& F);

struct FormalReduction {
  SeriesMatrix C;   // C(z/p) A0 = A(z) C(z), C = I mod z
  Matrix A0, B0;
  PRestriction restricted;
  Matrix B0r;       // B0 in the restricted basis, scaled by q^k
  int order = 0;
  double relation_residual = 0;
  double b0_residual = 0;
  double commutator = 0;
};

// The normalized gauge alone: C = I mod z with C(z/p) A(0) = A(z) C(z).
SeriesMatrix solve_gauge_series(const SeriesMatrix& A, int p, int N);

FormalReduction reduce_to_constants(const SeriesMatrix& A, const SeriesMatrix& B, int p, int q, int N);
FormalReduction reduce_pair(const DifferencePair& P, int N);

// max_n |C(z/p) A0 - A C|_n / scale_n, scale_n = max(1, max_{k<=n}|A_k|) * max(1, max_{k<=n}|C_k|).
double gauge_relation_residual(const SeriesMatrix& A, const SeriesMatrix& C, const Matrix& A0, double p, int N);

struct UniquenessVerdict {
  bool relations_hold = false;
  bool uniqueness_expected = false;
  bool agree = false;  // A0 and C coincide to 1e-9
  double a0_diff = 0, c_diff = 0;
  int witness_exponent = -1;
  Matrix witness;      // D with A0^{-1} D A0 = p^i D; C (I + z^i D) is a second solution
  std::string message;
};

UniquenessVerdict uniqueness_probe(const SeriesMatrix& A, const SeriesMatrix& C1, const Matrix& A01,
                                   const SeriesMatrix& C2, const Matrix& A02, double p, int R);

// A = C0(z/p) A0 C0(z)^{-1}, B = C0(z/q) B0 C0(z)^{-1} truncated at N.
struct SynthesizedPair {
  SeriesMatrix A, B, C0;
};
SynthesizedPair synthesize_formal_pair(const Matrix& A0, const Matrix& B0, const std::vector<Matrix>& C0_coeffs,
                                       int p, int q, int N);

nlohmann::json reduction_json(const FormalReduction& f);

}  // namespace ellipdiff
