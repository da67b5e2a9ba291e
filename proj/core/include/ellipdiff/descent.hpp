#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/error.hpp"
#include "ellipdiff/expr.hpp"

namespace ellipdiff {

using BigRational = boost::multiprecision::cpp_rational;

// Exact complex rational re + i im.
struct GaussianRational {
  BigRational re, im;
  GaussianRational() = default;
  GaussianRational(BigRational r, BigRational i = 0) : re(std::move(r)), im(std::move(i)) {}  // NOLINT
  GaussianRational(long r) : re(r), im(0) {}  // NOLINT
  bool is_zero() const { return re == 0 && im == 0; }
  cplx to_cplx() const { return {re.convert_to<double>(), im.convert_to<double>()}; }
  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b);
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) { return a.re == b.re && a.im == b.im; }
  GaussianRational operator-() const { return {-re, -im}; }
};

namespace detail {
inline bool is_zero(const cplx& c) { return c == cplx(0); }
inline bool is_zero(const GaussianRational& c) { return c.is_zero(); }
inline cplx as_cplx(const cplx& c) { return c; }
inline cplx as_cplx(const GaussianRational& c) { return c.to_cplx(); }
// p^{-n}
template <class F> F p_pow_neg(std::int64_t p, int n);
template <> inline cplx p_pow_neg<cplx>(std::int64_t p, int n) { return std::pow(double(p), -n); }
template <> inline GaussianRational p_pow_neg<GaussianRational>(std::int64_t p, int n) {
  BigRational r = 1;
  for (int i = 0; i < std::abs(n); ++i) r *= p;
  return n >= 0 ? GaussianRational(1 / r) : GaussianRational(r);
}
}  // namespace detail

// Finite sum of c_n z^n; zero coefficients are never stored.
template <class F>
class LaurentPolynomial {
 public:
  using Terms = std::map<int, F>;
  LaurentPolynomial() = default;
  static LaurentPolynomial monomial(const F& c, int n) {
    LaurentPolynomial r;
    r.set(n, c);
    return r;
  }
  F coeff(int n) const {
    const auto it = t_.find(n);
    return it == t_.end() ? F(0) : it->second;
  }
  void set(int n, const F& c) {
    if (detail::is_zero(c)) t_.erase(n);
    else t_[n] = c;
  }
  const Terms& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  std::vector<int> support() const {
    std::vector<int> s;
    for (const auto& kv : t_) s.push_back(kv.first);
    return s;
  }
  // h(z/p)
  LaurentPolynomial scaled_argument(std::int64_t p) const {
    LaurentPolynomial r;
    for (const auto& [n, c] : t_) r.set(n, c * detail::p_pow_neg<F>(p, n));
    return r;
  }
  cplx eval(cplx z) const {
    cplx s = 0;
    for (const auto& [n, c] : t_) s += detail::as_cplx(c) * std::pow(z, n);
    return s;
  }
  friend LaurentPolynomial operator+(LaurentPolynomial a, const LaurentPolynomial& b) {
    for (const auto& [n, c] : b.t_) a.set(n, a.coeff(n) + c);
    return a;
  }
  friend LaurentPolynomial operator-(LaurentPolynomial a, const LaurentPolynomial& b) {
    for (const auto& [n, c] : b.t_) a.set(n, a.coeff(n) - c);
    return a;
  }
  friend LaurentPolynomial operator*(const F& s, const LaurentPolynomial& a) {
    LaurentPolynomial r;
    for (const auto& [n, c] : a.t_) r.set(n, s * c);
    return r;
  }
  friend bool operator==(const LaurentPolynomial& a, const LaurentPolynomial& b) { return a.t_ == b.t_; }

 private:
  Terms t_;
};

using LaurentPoly = LaurentPolynomial<cplx>;
using ExactLaurentPoly = LaurentPolynomial<GaussianRational>;

// n with t == p^{-n} (exactly for GaussianRational; relative 1e-12 for cplx).
std::optional<int> resonant_exponent(const cplx& t, std::int64_t p, double rel_tol = 1e-12);
std::optional<int> resonant_exponent(const GaussianRational& t, std::int64_t p);

template <class F>
struct ScalingSolution {
  LaurentPolynomial<F> h;
  bool obstructed = false;
  int obstruction_exponent = 0;
  std::optional<int> free_exponent;  // set when t = p^{-n} and g_n = 0; h_n = free_value
};

// h(z/p) = t h(z) + g(z). For cplx, |g_n| <= zero_tol counts as g_n = 0 at a resonance.
ScalingSolution<cplx> solve_scaling_equation(const cplx& t, const LaurentPoly& g, std::int64_t p,
                                             const cplx& free_value = 0, double zero_tol = 0);
ScalingSolution<GaussianRational> solve_scaling_equation(const GaussianRational& t, const ExactLaurentPoly& g,
                                                         std::int64_t p, const GaussianRational& free_value = 0);

// h(z/p) - t h(z) - g(z)
template <class F>
LaurentPolynomial<F> scaling_residual(const LaurentPolynomial<F>& h, const F& t, const LaurentPolynomial<F>& g,
                                      std::int64_t p) {
  return h.scaled_argument(p) - t * h - g;
}

struct TriangularSolution {
  std::vector<LaurentPoly> h;
  std::vector<int> resonant_exponents;  // per Schur diagonal entry; INT_MIN when none
  double relation_residual = 0;         // max |h_j(z/p) - sum_i t_ij h_i(z)| coefficientwise, relative
  double match_error = 0;               // max |h - h_data| over the truncation window, relative
};

// Solves h_j(z/p) = sum_i t_ij h_i(z), i.e. h(z/p) = T^t h(z), from truncated series data.
// Throws NotSatisfied when the data violates the relation, Obstructed on a resonance with nonzero forcing.
TriangularSolution solve_triangular_system(const Matrix& T, const std::vector<LaurentSeries>& h_data,
                                           std::int64_t p, double tol = 1e-9);

// f = sum coeff * z^j * zeta(z)^k with coefficients in K.
struct RingTerm {
  EllipticExpr coeff;
  int z_power = 0;
  int zeta_power = 0;
};
struct RingElement {
  LatticePtr L;
  std::vector<RingTerm> terms;
  EllipticExpr expr() const;
  cplx eval(cplx z) const;
};

struct MembershipWitness {
  std::string name;
  double value = 0;
  double tol = 0;
  bool pass = false;
};
struct MembershipReport {
  bool pass = false;
  std::vector<MembershipWitness> witnesses;
};

// pσζ - ζ (σf(z) = f(z/p)); elliptic for pΛ.
EllipticExpr zeta_defect(const LatticePtr& L, std::int64_t p);

MembershipReport r_ring_membership_demo(const RingElement& f, std::int64_t p, std::int64_t q, std::uint64_t seed);

nlohmann::json laurent_json(const LaurentPoly& h);
LaurentPoly laurent_from_json(const nlohmann::json& j);
// Coefficients given as ["num/den", "num/den"] strings.
nlohmann::json exact_laurent_json(const ExactLaurentPoly& h);
ExactLaurentPoly exact_laurent_from_json(const nlohmann::json& j);
GaussianRational gaussian_from_json(const nlohmann::json& j);
nlohmann::json gaussian_json(const GaussianRational& g);
nlohmann::json membership_json(const MembershipReport& r);

}  // namespace ellipdiff
