#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/diffmod.hpp"

namespace ellipdiff {

enum class Which { p, q };

// g_p = p zeta(qz - z0) - zeta(pqz - z0); g_q swaps p and q.
EllipticExpr g_expr(Which which, int p, int q, const LatticePtr& L, cplx z0 = 0, PairOptions opts = {});

// N_r: ones on the first superdiagonal.
Matrix nilpotent(int r);
// T_r^sp = diag(1, p, ..., p^{r-1}).
Matrix special_diagonal(int r, double p);
// exp(X) for nilpotent X (finite sum).
Matrix exp_nilpotent(const Matrix& X);
// log(I + X) for nilpotent X.
Matrix log_unipotent(const Matrix& U);

// exp(zeta(m z - z0) N_r).
MatrixExpr unipotent_U(int r, int multiplier, cplx z0, const LatticePtr& L);
MatrixExpr unipotent_U_inverse(int r, int multiplier, cplx z0, const LatticePtr& L);
// Block sum of unipotent_U over a layout.
MatrixExpr block_U(const std::vector<int>& layout, int multiplier, cplx z0, const LatticePtr& L);
MatrixExpr block_U_inverse(const std::vector<int>& layout, int multiplier, cplx z0, const LatticePtr& L);

// Closed-form A_r^sp, B_r^sp.
DifferencePair special_pair(int r, int p, int q, const LatticePtr& L, cplx z0 = 0, PairOptions opts = {});
// max |closed form - U(z/p) T^sp U(z)^{-1}| (both A and B sides) over random points.
double special_factorization_defect(int r, int p, int q, const LatticePtr& L, int n_points,
                                    std::uint64_t seed);

struct ModuleType {
  std::vector<int> partition;  // ascending
  static ModuleType from_layout(const std::vector<int>& layout);
  int rank() const;
  std::string label() const;  // "(2,1)" style, descending like the literature
  bool operator==(const ModuleType& o) const { return partition == o.partition; }
};

// (T, S) with the block layout of U = U_{r_1} + ... + U_{r_k} (block order as given).
struct BlockScalarPair {
  Matrix T, S;
  std::vector<int> layout;
  ModuleType type() const { return ModuleType::from_layout(layout); }
  int rank() const { return static_cast<int>(T.rows()); }
};

struct BlockShape {
  int i = 0, j = 0;
  int s = 0;
  cplx alpha = 0;
  std::vector<cplx> lambda;  // lambda_1 .. lambda_{s-1}
};

struct ShapeVerdict {
  bool valid = true;
  int bad_i = -1, bad_j = -1;
  std::string reason;
  std::vector<BlockShape> blocks;
};

// Each (i, j) block must be (0 X; 0 0) with X = exp(-L) alpha T_s^sp exp(L), L = sum lambda_l N_s^l.
ShapeVerdict validate_block_shape(const Matrix& T, const std::vector<int>& layout, double p,
                                  double tol = 1e-9);

// Throws InvalidBlockShape / NonCommuting / InvalidInput.
void validate_block_scalar_pair(const BlockScalarPair& bs, int p, int q);

DifferencePair typed_pair(const BlockScalarPair& bs, int p, int q, const LatticePtr& L, cplx z0 = 0);

// Legitimate = commutes with the block nilpotent, i.e. with U(z).
bool is_legitimate(const Matrix& E, const std::vector<int>& layout, double tol = 1e-10);
BlockScalarPair conjugate_legitimate(const BlockScalarPair& bs, const Matrix& E);

struct Classification {
  std::string klass;  // "i" .. "v"
  ModuleType type;
  cplx a = 0, b = 0, a2 = 0, b2 = 0;
  bool has_invariant = false;
  cplx inv_s = 0, inv_t = 0;  // unit norm, first nonzero coordinate real positive
};

Classification classify_rank_le3(const BlockScalarPair& bs, int p, int q);

// (x : y) normalized to unit norm with the first nonzero coordinate real and positive.
std::pair<cplx, cplx> normalize_projective(cplx x, cplx y, double zero_tol = 1e-12);

nlohmann::json block_scalar_to_json(const BlockScalarPair& bs);
BlockScalarPair block_scalar_from_json(const nlohmann::json& j);
nlohmann::json classification_json(const Classification& c);

}  // namespace ellipdiff
