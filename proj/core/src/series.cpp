#include "ellipdiff/series.hpp"

#include <algorithm>
#include <cmath>

namespace ellipdiff {

LaurentSeries::LaurentSeries(int low, std::vector<cplx> coeffs, int order)
    : low_(low), order_(order), c_(std::move(coeffs)) {
  const int keep = std::max(0, order_ - low_ + 1);
  if (static_cast<int>(c_.size()) > keep) c_.resize(keep);
  std::size_t lead = 0;
  while (lead < c_.size() && c_[lead] == cplx(0)) ++lead;
  if (lead == c_.size()) {
    c_.clear();
    low_ = order_ + 1;
    return;
  }
  c_.erase(c_.begin(), c_.begin() + static_cast<long>(lead));
  low_ += static_cast<int>(lead);
  c_.resize(order_ - low_ + 1, cplx(0));
}

cplx LaurentSeries::coeff(int n) const {
  if (n < low_ || n > order_) return 0.0;
  return c_[n - low_];
}

LaurentSeries LaurentSeries::truncated(int order) const {
  if (order >= order_) return *this;
  return LaurentSeries(low_, c_, order);
}

LaurentSeries LaurentSeries::pruned(double rel_tol, int window) const {
  std::size_t lead = 0;
  while (lead < c_.size()) {
    double m = 0;
    for (std::size_t j = lead; j < c_.size() && j <= lead + static_cast<std::size_t>(window); ++j)
      m = std::max(m, std::abs(c_[j]));
    if (std::abs(c_[lead]) > rel_tol * m) break;
    ++lead;
  }
  std::vector<cplx> rest(c_.begin() + static_cast<long>(lead), c_.end());
  return LaurentSeries(low_ + static_cast<int>(lead), std::move(rest), order_);
}

double LaurentSeries::max_abs() const {
  double m = 0;
  for (const auto& c : c_) m = std::max(m, std::abs(c));
  return m;
}

cplx LaurentSeries::eval(cplx z) const {
  cplx acc = 0;
  for (std::size_t i = c_.size(); i-- > 0;) acc = acc * z + c_[i];
  return acc * std::pow(z, low_);
}

LaurentSeries LaurentSeries::operator-() const { return cplx(-1.0) * *this; }

LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
  const int order = std::min(a.order_, b.order_);
  const int low = std::min(a.low_, b.low_);
  if (low > order) return LaurentSeries::zero(order);
  std::vector<cplx> c(order - low + 1);
  for (int n = low; n <= order; ++n) c[n - low] = a.coeff(n) + b.coeff(n);
  return LaurentSeries(low, std::move(c), order);
}

LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) { return a + (-b); }

LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
  const int order = std::min(a.order_ + b.low_, b.order_ + a.low_);
  if (a.is_zero() || b.is_zero()) return LaurentSeries::zero(order);
  const int low = a.low_ + b.low_;
  if (low > order) return LaurentSeries::zero(order);
  std::vector<cplx> c(order - low + 1);
  const int na = static_cast<int>(a.c_.size()), nb = static_cast<int>(b.c_.size());
  for (int i = 0; i < na; ++i) {
    if (a.c_[i] == cplx(0)) continue;
    const int jmax = std::min(nb - 1, order - low - i);
    for (int j = 0; j <= jmax; ++j) c[i + j] += a.c_[i] * b.c_[j];
  }
  return LaurentSeries(low, std::move(c), order);
}

LaurentSeries operator*(cplx s, const LaurentSeries& a) {
  if (s == cplx(0)) return LaurentSeries::zero(a.order_);
  std::vector<cplx> c(a.c_);
  for (auto& x : c) x *= s;
  return LaurentSeries(a.low_, std::move(c), a.order_);
}

LaurentSeries series_add(const LaurentSeries& a, const LaurentSeries& b) { return a + b; }
LaurentSeries series_mul(const LaurentSeries& a, const LaurentSeries& b) { return a * b; }

LaurentSeries series_invert(const LaurentSeries& a) {
  if (a.is_zero()) fail(Errc::ZeroSeries, "cannot invert the zero series");
  const int v = a.valuation();
  const int len = a.order() - v + 1;
  const auto& c = a.coefficients();
  std::vector<cplx> d(len);
  const cplx inv0 = 1.0 / c[0];
  d[0] = inv0;
  for (int n = 1; n < len; ++n) {
    cplx s = 0;
    for (int k = 1; k <= n; ++k) s += c[k] * d[n - k];
    d[n] = -inv0 * s;
  }
  return LaurentSeries(-v, std::move(d), a.order() - 2 * v);
}

LaurentSeries series_pow(const LaurentSeries& a, int n) {
  if (n < 0) return series_pow(series_invert(a), -n);
  if (n == 0) return LaurentSeries::constant(1.0, a.is_zero() ? a.order() : a.order() - a.valuation());
  LaurentSeries result;
  bool have = false;
  LaurentSeries base = a;
  while (n > 0) {
    if (n & 1) {
      result = have ? result * base : base;
      have = true;
    }
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

LaurentSeries compose_linear(const LaurentSeries& a, cplx lambda) {
  if (a.is_zero()) return a;
  std::vector<cplx> c(a.coefficients());
  cplx f = std::pow(lambda, a.valuation());
  for (auto& x : c) {
    x *= f;
    f *= lambda;
  }
  return LaurentSeries(a.valuation(), std::move(c), a.order());
}

LaurentSeries scale_argument(const LaurentSeries& a, double p) {
  if (a.is_zero()) return a;
  std::vector<cplx> c(a.coefficients());
  const int v = a.valuation();
  for (std::size_t i = 0; i < c.size(); ++i) {
    // Integer powers so that p = 2 scales exactly.
    const int n = v + static_cast<int>(i);
    c[i] *= std::pow(p, -n);
  }
  return LaurentSeries(v, std::move(c), a.order());
}

LaurentSeries derivative(const LaurentSeries& a) {
  if (a.is_zero()) return LaurentSeries::zero(a.order() - 1);
  const int v = a.valuation();
  const auto& c = a.coefficients();
  std::vector<cplx> d(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = double(v + static_cast<int>(i)) * c[i];
  return LaurentSeries(v - 1, std::move(d), a.order() - 1);
}

double max_coeff_diff(const LaurentSeries& a, const LaurentSeries& b) {
  const int order = std::min(a.order(), b.order());
  const int low = std::min(a.valuation(), b.valuation());
  double m = 0;
  for (int n = low; n <= order; ++n) m = std::max(m, std::abs(a.coeff(n) - b.coeff(n)));
  return m;
}

// ---------------------------------------------------------------- matrices

SeriesMatrix::SeriesMatrix(int rows, int cols, int order)
    : rows_(rows), cols_(cols), e_(static_cast<std::size_t>(rows * cols), LaurentSeries::zero(order)) {}

SeriesMatrix::SeriesMatrix(int rows, int cols, std::vector<LaurentSeries> entries)
    : rows_(rows), cols_(cols), e_(std::move(entries)) {
  if (static_cast<int>(e_.size()) != rows * cols)
    fail(Errc::DimensionMismatch, "series matrix entry count does not match its shape");
}

SeriesMatrix SeriesMatrix::identity(int n, int order) {
  SeriesMatrix m(n, n, order);
  for (int i = 0; i < n; ++i) m(i, i) = LaurentSeries::constant(1.0, order);
  return m;
}

SeriesMatrix SeriesMatrix::constant(const Matrix& a, int order) {
  return from_coefficients({a}, 0, order);
}

SeriesMatrix SeriesMatrix::from_coefficients(const std::vector<Matrix>& coeffs, int low, int order) {
  if (coeffs.empty()) fail(Errc::InvalidInput, "no coefficient matrices");
  const int r = static_cast<int>(coeffs[0].rows()), c = static_cast<int>(coeffs[0].cols());
  SeriesMatrix m(r, c, order);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      std::vector<cplx> v;
      v.reserve(coeffs.size());
      for (const auto& k : coeffs) {
        if (k.rows() != r || k.cols() != c)
          fail(Errc::DimensionMismatch, "coefficient matrices differ in shape");
        v.push_back(k(i, j));
      }
      m(i, j) = LaurentSeries(low, std::move(v), order);
    }
  }
  return m;
}

int SeriesMatrix::order() const {
  int o = e_.empty() ? 0 : e_[0].order();
  for (const auto& s : e_) o = std::min(o, s.order());
  return o;
}

int SeriesMatrix::valuation() const {
  int v = e_.empty() ? 0 : e_[0].valuation();
  for (const auto& s : e_) v = std::min(v, s.valuation());
  return v;
}

Matrix SeriesMatrix::coefficient(int n) const {
  Matrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).coeff(n);
  return m;
}

Matrix SeriesMatrix::eval(cplx z) const {
  Matrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).eval(z);
  return m;
}

SeriesMatrix SeriesMatrix::truncated(int order) const {
  SeriesMatrix m = *this;
  for (auto& s : m.e_) s = s.truncated(order);
  return m;
}

SeriesMatrix operator+(const SeriesMatrix& a, const SeriesMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) fail(Errc::DimensionMismatch, "series matrix sum");
  SeriesMatrix m = a;
  for (std::size_t k = 0; k < m.e_.size(); ++k) m.e_[k] = a.e_[k] + b.e_[k];
  return m;
}

SeriesMatrix operator-(const SeriesMatrix& a, const SeriesMatrix& b) {
  return a + cplx(-1.0) * b;
}

SeriesMatrix operator*(const SeriesMatrix& a, const SeriesMatrix& b) {
  if (a.cols_ != b.rows_) fail(Errc::DimensionMismatch, "series matrix product");
  std::vector<LaurentSeries> e;
  e.reserve(static_cast<std::size_t>(a.rows_ * b.cols_));
  for (int i = 0; i < a.rows_; ++i) {
    for (int j = 0; j < b.cols_; ++j) {
      LaurentSeries acc = a(i, 0) * b(0, j);
      for (int k = 1; k < a.cols_; ++k) acc = acc + a(i, k) * b(k, j);
      e.push_back(std::move(acc));
    }
  }
  return SeriesMatrix(a.rows_, b.cols_, std::move(e));
}

SeriesMatrix operator*(cplx s, const SeriesMatrix& a) {
  SeriesMatrix m = a;
  for (auto& x : m.e_) x = s * x;
  return m;
}

SeriesMatrix scale_argument(const SeriesMatrix& m, double p) {
  SeriesMatrix r = m;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = scale_argument(m(i, j), p);
  return r;
}

SeriesMatrix invert(const SeriesMatrix& m) {
  if (m.rows() != m.cols()) fail(Errc::DimensionMismatch, "inverse of a non-square series matrix");
  const int n = m.rows();
  const int order = m.order();
  SeriesMatrix a = m;
  SeriesMatrix inv = SeriesMatrix::identity(n, order + 2 * std::abs(m.valuation()) + 2);
  constexpr double kPivotTol = 1e-13;
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    int best_v = 0;
    double best_mag = 0;
    for (int i = k; i < n; ++i) {
      const LaurentSeries s = a(i, k).pruned(kPivotTol);
      if (s.is_zero()) continue;
      const double mag = std::abs(s.coefficients()[0]);
      if (piv < 0 || s.valuation() < best_v || (s.valuation() == best_v && mag > best_mag)) {
        piv = i;
        best_v = s.valuation();
        best_mag = mag;
      }
    }
    if (piv < 0) fail(Errc::SingularMatrix, "series matrix is singular to truncation order");
    if (piv != k) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    }
    const LaurentSeries rinv = series_invert(a(k, k).pruned(kPivotTol));
    for (int j = 0; j < n; ++j) {
      a(k, j) = a(k, j) * rinv;
      inv(k, j) = inv(k, j) * rinv;
    }
    a(k, k) = LaurentSeries::constant(1.0, a(k, k).order());
    for (int i = 0; i < n; ++i) {
      if (i == k || a(i, k).is_zero()) continue;
      const LaurentSeries f = a(i, k);
      for (int j = 0; j < n; ++j) {
        a(i, j) = a(i, j) - f * a(k, j);
        inv(i, j) = inv(i, j) - f * inv(k, j);
      }
      a(i, k) = LaurentSeries::zero(a(i, k).order());
    }
  }
  return inv;
}

double max_coeff_diff(const SeriesMatrix& a, const SeriesMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) fail(Errc::DimensionMismatch, "series matrix compare");
  double m = 0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m = std::max(m, max_coeff_diff(a(i, j), b(i, j)));
  return m;
}

}  // namespace ellipdiff
