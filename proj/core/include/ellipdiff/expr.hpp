#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/series.hpp"
#include "ellipdiff/weierstrass.hpp"

namespace ellipdiff {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return double(r.numerator()) / double(r.denominator());
}

// Immutable expression over atoms z, zeta(mz - z0), wp(mz - z0), wp'(mz - z0).
class EllipticExpr {
 public:
  enum class Kind { Const, Z, Zeta, Wp, Sum, Prod, Pow, Quot };

  EllipticExpr();
  EllipticExpr(cplx c);  // NOLINT: constants convert implicitly
  EllipticExpr(double c) : EllipticExpr(cplx(c)) {}  // NOLINT

  static EllipticExpr constant(cplx c) { return EllipticExpr(c); }
  static EllipticExpr z(Rational m = 1);
  static EllipticExpr zeta(LatticePtr L, Rational m = 1, cplx z0 = 0);
  static EllipticExpr wp(LatticePtr L, Rational m = 1, cplx z0 = 0, int deriv = 0);
  static EllipticExpr sum(std::vector<EllipticExpr> args);
  static EllipticExpr product(std::vector<EllipticExpr> args);
  static EllipticExpr power(const EllipticExpr& base, int n);
  // Rejects denominators that vanish at 8 sample points.
  static EllipticExpr quotient(const EllipticExpr& num, const EllipticExpr& den);

  Kind kind() const;
  bool is_const() const { return kind() == Kind::Const; }
  bool is_atom() const;
  cplx value() const;
  const Rational& multiplier() const;
  cplx shift() const;
  int deriv() const;
  int exponent() const;
  const LatticePtr& lattice() const;
  const std::vector<EllipticExpr>& args() const;

  cplx eval(cplx z) const;

  friend EllipticExpr operator+(const EllipticExpr& a, const EllipticExpr& b);
  friend EllipticExpr operator-(const EllipticExpr& a, const EllipticExpr& b);
  friend EllipticExpr operator*(const EllipticExpr& a, const EllipticExpr& b);
  friend EllipticExpr operator/(const EllipticExpr& a, const EllipticExpr& b);
  EllipticExpr operator-() const;

  struct Node;

 private:
  explicit EllipticExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

inline cplx eval(const EllipticExpr& e, cplx z) { return e.eval(z); }

enum class ScaleDirection { divide, multiply };

// z -> z/p (divide) or z -> p z (multiply).
EllipticExpr substitute_scale(const EllipticExpr& e, std::int64_t p, ScaleDirection dir);
// z -> s z.
EllipticExpr substitute_linear(const EllipticExpr& e, const Rational& s);

LaurentSeries laurent_at0(const EllipticExpr& e, int N);

struct ResidueConfig {
  int grid = 400;
  int contour_points = 64;
  std::uint64_t seed = 0x5eed;
};

struct PoleInfo {
  cplx location;
  cplx residue;
};

struct ResidueSumReport {
  cplx sum;
  std::vector<PoleInfo> poles;
};

// Residue at a simple pole by trapezoid quadrature on shrinking circles.
cplx residue_at(const EllipticExpr& e, cplx pole);
// Sum of residues over one fundamental parallelogram of `periods`.
ResidueSumReport residue_sum_fundamental(const EllipticExpr& e, const Lattice& periods,
                                         const ResidueConfig& cfg = {});
// Largest relative defect |e(z+w) - e(z)| over random z and the given periods.
double ellipticity_defect(const EllipticExpr& e, const std::vector<cplx>& periods, int samples,
                          std::uint64_t seed);
// Candidate pole positions coming from the atoms (not reduced).
std::vector<cplx> atom_pole_candidates(const EllipticExpr& e, const Lattice& periods);

nlohmann::json to_json(const EllipticExpr& e);
EllipticExpr expr_from_json(const nlohmann::json& j, const LatticePtr& L);

class MatrixExpr {
 public:
  enum class Kind { Leaf, Product, Inverse, BlockDiag };

  MatrixExpr() = default;
  MatrixExpr(int rows, int cols, std::vector<EllipticExpr> entries);

  static MatrixExpr identity(int n);
  static MatrixExpr constant(const Matrix& m);
  static MatrixExpr product(std::vector<MatrixExpr> factors);
  static MatrixExpr inverse(const MatrixExpr& m);
  static MatrixExpr block_diag(std::vector<MatrixExpr> blocks);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Kind kind() const { return kind_; }
  bool is_leaf() const { return kind_ == Kind::Leaf; }
  const EllipticExpr& entry(int i, int j) const;
  const std::vector<EllipticExpr>& entries() const { return entries_; }
  const std::vector<MatrixExpr>& children() const { return children_; }

  Matrix eval(cplx z) const;
  SeriesMatrix laurent_at0(int N) const;
  MatrixExpr substitute_linear(const Rational& s) const;
  MatrixExpr substitute_scale(std::int64_t p, ScaleDirection dir) const;
  MatrixExpr scaled(cplx c) const;
  // Flattens products and block sums of leaves into a single leaf.
  MatrixExpr expanded() const;

 private:
  Kind kind_ = Kind::Leaf;
  int rows_ = 0, cols_ = 0;
  std::vector<EllipticExpr> entries_;
  std::vector<MatrixExpr> children_;
};

nlohmann::json to_json(const MatrixExpr& m);
MatrixExpr matrix_from_json(const nlohmann::json& j, const LatticePtr& L);

}  // namespace ellipdiff
