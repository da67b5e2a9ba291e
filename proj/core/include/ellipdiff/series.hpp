#pragma once

#include <vector>

#include "ellipdiff/error.hpp"
#include "ellipdiff/types.hpp"

namespace ellipdiff {

inline constexpr int kDefaultSeriesOrder = 40;

// Truncated Laurent series sum_{n=low}^{order} c_n z^n (+ O(z^{order+1})).
// The stored lowest coefficient is nonzero; tiny coefficients are kept as is.
class LaurentSeries {
 public:
  LaurentSeries() : low_(1), order_(0) {}
  LaurentSeries(int low, std::vector<cplx> coeffs, int order);

  static LaurentSeries zero(int order) { return LaurentSeries(order + 1, {}, order); }
  static LaurentSeries constant(cplx c, int order) { return LaurentSeries(0, {c}, order); }
  static LaurentSeries monomial(cplx c, int exponent, int order) {
    return LaurentSeries(exponent, {c}, order);
  }

  bool is_zero() const { return c_.empty(); }
  // Lowest exponent with a nonzero coefficient (order+1 for the zero series).
  int valuation() const { return low_; }
  int order() const { return order_; }
  cplx coeff(int n) const;
  // Coefficients for exponents valuation()..order().
  const std::vector<cplx>& coefficients() const { return c_; }

  LaurentSeries truncated(int order) const;
  // Drops leading coefficients that are below rel_tol times the largest of
  // the next `window` coefficients (cancellation residue).
  LaurentSeries pruned(double rel_tol, int window = 4) const;
  double max_abs() const;
  cplx eval(cplx z) const;

  LaurentSeries operator-() const;
  friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b);
  friend LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b);
  friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b);
  friend LaurentSeries operator*(cplx s, const LaurentSeries& a);
  friend LaurentSeries operator*(const LaurentSeries& a, cplx s) { return s * a; }

 private:
  int low_;
  int order_;
  std::vector<cplx> c_;
};

LaurentSeries series_add(const LaurentSeries& a, const LaurentSeries& b);
LaurentSeries series_mul(const LaurentSeries& a, const LaurentSeries& b);
LaurentSeries series_invert(const LaurentSeries& a);
LaurentSeries series_pow(const LaurentSeries& a, int n);
// a(z/p): the exponent-n coefficient is multiplied by p^{-n}.
LaurentSeries scale_argument(const LaurentSeries& a, double p);
// a(lambda z).
LaurentSeries compose_linear(const LaurentSeries& a, cplx lambda);
LaurentSeries derivative(const LaurentSeries& a);
// Largest coefficient difference over the common known range.
double max_coeff_diff(const LaurentSeries& a, const LaurentSeries& b);

class SeriesMatrix {
 public:
  SeriesMatrix() = default;
  SeriesMatrix(int rows, int cols, int order);
  SeriesMatrix(int rows, int cols, std::vector<LaurentSeries> entries);

  static SeriesMatrix identity(int n, int order);
  static SeriesMatrix constant(const Matrix& m, int order);
  // sum_i coeffs[i] z^{low+i}.
  static SeriesMatrix from_coefficients(const std::vector<Matrix>& coeffs, int low, int order);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const LaurentSeries& operator()(int i, int j) const { return e_[i * cols_ + j]; }
  LaurentSeries& operator()(int i, int j) { return e_[i * cols_ + j]; }

  int order() const;
  int valuation() const;
  Matrix coefficient(int n) const;
  Matrix eval(cplx z) const;
  SeriesMatrix truncated(int order) const;

  friend SeriesMatrix operator+(const SeriesMatrix& a, const SeriesMatrix& b);
  friend SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b);
  friend SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b);
  friend SeriesMatrix operator*(cplx s, const SeriesMatrix& a);

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<LaurentSeries> e_;
};

SeriesMatrix scale_argument(const SeriesMatrix& m, double p);
// Gauss-Jordan elimination over truncated Laurent series; pivots by valuation.
SeriesMatrix invert(const SeriesMatrix& m);
// Largest coefficient-matrix entry difference over exponents <= min order.
double max_coeff_diff(const SeriesMatrix& a, const SeriesMatrix& b);

}  // namespace ellipdiff
