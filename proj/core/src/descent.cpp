#include "ellipdiff/descent.hpp"

#include <climits>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "ellipdiff/json_io.hpp"

namespace ellipdiff {

GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
  if (b.is_zero()) fail(Errc::InvalidInput, "division by zero");
  const BigRational d = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
}

std::optional<int> resonant_exponent(const cplx& t, std::int64_t p, double rel_tol) {
  if (p < 2) fail(Errc::InvalidInput, "p must be an integer >= 2");
  if (std::abs(t) == 0) return std::nullopt;
  const double x = -std::log(std::abs(t)) / std::log(double(p));
  if (std::abs(x) > 1000) return std::nullopt;
  const int n = static_cast<int>(std::lround(x));
  const double target = std::pow(double(p), -n);
  if (std::abs(t - target) <= rel_tol * target) return n;
  return std::nullopt;
}

std::optional<int> resonant_exponent(const GaussianRational& t, std::int64_t p) {
  if (p < 2) fail(Errc::InvalidInput, "p must be an integer >= 2");
  if (t.im != 0 || t.re <= 0) return std::nullopt;
  using boost::multiprecision::cpp_int;
  const cpp_int num = numerator(t.re), den = denominator(t.re);
  auto log_p = [p](cpp_int v) -> std::optional<int> {
    int e = 0;
    while (v > 1) {
      if (v % p != 0) return std::nullopt;
      v /= p;
      ++e;
    }
    return e;
  };
  if (num == 1) return log_p(den);
  if (den == 1) {
    if (auto e = log_p(num)) return -*e;
  }
  return std::nullopt;
}

namespace {

template <class F, class Small>
ScalingSolution<F> solve_scaling(const F& t, const LaurentPolynomial<F>& g, std::int64_t p, const F& free_value,
                                 std::optional<int> res, Small small) {
  ScalingSolution<F> out;
  bool forced_at_res = false;
  for (const auto& [n, c] : g.terms()) {
    if (res && n == *res) {
      if (!small(c)) {
        out.obstructed = true;
        out.obstruction_exponent = n;
        forced_at_res = true;
      }
      continue;
    }
    out.h.set(n, c / (detail::p_pow_neg<F>(p, n) - t));
  }
  if (res && !forced_at_res) {
    out.free_exponent = *res;
    out.h.set(*res, free_value);
  }
  return out;
}

double max_abs_coeff(const std::vector<LaurentSeries>& v) {
  double m = 0;
  for (const auto& s : v) m = std::max(m, s.max_abs());
  return m;
}

}  // namespace

ScalingSolution<cplx> solve_scaling_equation(const cplx& t, const LaurentPoly& g, std::int64_t p,
                                             const cplx& free_value, double zero_tol) {
  return solve_scaling(t, g, p, free_value, resonant_exponent(t, p),
                       [zero_tol](const cplx& c) { return std::abs(c) <= zero_tol; });
}

ScalingSolution<GaussianRational> solve_scaling_equation(const GaussianRational& t, const ExactLaurentPoly& g,
                                                         std::int64_t p, const GaussianRational& free_value) {
  return solve_scaling(t, g, p, free_value, resonant_exponent(t, p),
                       [](const GaussianRational& c) { return c.is_zero(); });
}

TriangularSolution solve_triangular_system(const Matrix& T, const std::vector<LaurentSeries>& h_data,
                                           std::int64_t p, double tol) {
  const int r = static_cast<int>(T.rows());
  if (T.cols() != r || static_cast<int>(h_data.size()) != r || r == 0)
    fail(Errc::DimensionMismatch, "T must be square with one series per row");
  if (p < 2) fail(Errc::InvalidInput, "p must be an integer >= 2");
  const Eigen::JacobiSVD<Matrix> svd(T);
  if (svd.singularValues()(r - 1) <= 1e-12 * svd.singularValues()(0)) fail(Errc::SingularMatrix, "T is not invertible");

  TriangularSolution out;
  out.h.assign(r, LaurentPoly());
  out.resonant_exponents.assign(r, INT_MIN);
  const double scale = max_abs_coeff(h_data);
  if (scale == 0) return out;
  int low = INT_MAX, order = INT_MAX;
  for (const auto& s : h_data) {
    if (!s.is_zero()) low = std::min(low, s.valuation());
    order = std::min(order, s.order());
  }
  if (low > order) fail(Errc::InvalidInput, "series carry no coefficients below the common truncation order");

  const Matrix W = T.transpose();
  const double normW = W.cwiseAbs().maxCoeff();
  auto data = [&](int n) {
    Vector v(r);
    for (int i = 0; i < r; ++i) v(i) = h_data[i].coeff(n);
    return v;
  };
  for (int n = low; n <= order; ++n) {
    const Vector v = data(n);
    const double pn = std::pow(double(p), -n);
    const double resid = (pn * v - W * v).cwiseAbs().maxCoeff();
    if (resid > tol * (pn + normW) * scale)
      fail(Errc::NotSatisfied, "data violates h(z/p) = T^t h(z) at z^" + std::to_string(n));
  }

  const Eigen::ComplexSchur<Matrix> schur(W);
  const Matrix Q = schur.matrixU(), R = schur.matrixT();
  const Matrix Qh = Q.adjoint();
  std::vector<LaurentPoly> k(r);
  for (int i = r - 1; i >= 0; --i) {
    LaurentPoly g;
    for (int j = i + 1; j < r; ++j) g = g + R(i, j) * k[j];
    const auto res = resonant_exponent(R(i, i), p, 1e-9);
    cplx free = 0;
    if (res && *res >= low && *res <= order) free = (Qh * data(*res))(i);
    auto sol = solve_scaling(R(i, i), g, p, free, res,
                             [&](const cplx& c) { return std::abs(c) <= tol * scale * (1 + normW); });
    if (sol.obstructed)
      fail(Errc::Obstructed, "resonant forcing at z^" + std::to_string(sol.obstruction_exponent));
    if (res) out.resonant_exponents[i] = *res;
    k[i] = std::move(sol.h);
  }
  for (int m = 0; m < r; ++m) {
    LaurentPoly h;
    for (int i = 0; i < r; ++i) h = h + Q(m, i) * k[i];
    LaurentPoly pruned;
    for (const auto& [n, c] : h.terms())
      if (std::abs(c) > 1e-13 * scale) pruned.set(n, c);
    out.h[m] = std::move(pruned);
  }

  std::map<int, int> exps;
  for (const auto& h : out.h)
    for (const auto& kv : h.terms()) exps[kv.first] = 1;
  for (const auto& [n, unused] : exps) {
    Vector v(r);
    for (int i = 0; i < r; ++i) v(i) = out.h[i].coeff(n);
    const double pn = std::pow(double(p), -n);
    out.relation_residual = std::max(out.relation_residual, (pn * v - W * v).cwiseAbs().maxCoeff() / ((pn + normW) * scale));
  }
  for (int n = low; n <= order; ++n)
    for (int i = 0; i < r; ++i)
      out.match_error = std::max(out.match_error, std::abs(out.h[i].coeff(n) - h_data[i].coeff(n)) / scale);
  if (out.match_error > 1e3 * tol) fail(Errc::NotSatisfied, "Laurent polynomial solution does not reproduce the data");
  return out;
}

EllipticExpr RingElement::expr() const {
  if (!L) fail(Errc::InvalidInput, "ring element needs a lattice");
  std::vector<EllipticExpr> parts;
  for (const auto& t : terms) {
    if (t.zeta_power < 0) fail(Errc::InvalidInput, "zeta powers must be nonnegative");
    parts.push_back(t.coeff * EllipticExpr::power(EllipticExpr::z(), t.z_power) *
                    EllipticExpr::power(EllipticExpr::zeta(L), t.zeta_power));
  }
  return EllipticExpr::sum(std::move(parts));
}

cplx RingElement::eval(cplx z) const {
  const cplx zz = EllipticExpr::zeta(L).eval(z);
  cplx s = 0;
  for (const auto& t : terms) s += t.coeff.eval(z) * std::pow(z, t.z_power) * std::pow(zz, t.zeta_power);
  return s;
}

EllipticExpr zeta_defect(const LatticePtr& L, std::int64_t p) {
  return double(p) * EllipticExpr::zeta(L, Rational(1, p)) - EllipticExpr::zeta(L);
}

namespace {

double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// f(z/s) through the elliptic transition matrix: sigma(z^j zeta^k) = s^{-j-k} z^j (zeta + e_s)^k.
cplx sigma_via_matrix(const RingElement& f, std::int64_t s, const EllipticExpr& e_s, cplx z) {
  const cplx zz = EllipticExpr::zeta(f.L).eval(z), e = e_s.eval(z);
  cplx total = 0;
  for (const auto& t : f.terms) {
    const cplx c = substitute_scale(t.coeff, s, ScaleDirection::divide).eval(z);
    cplx row = 0;
    for (int l = 0; l <= t.zeta_power; ++l)
      row += binomial(t.zeta_power, l) * std::pow(e, t.zeta_power - l) * std::pow(zz, l);
    total += c * std::pow(double(s), -t.z_power - t.zeta_power) * std::pow(z, t.z_power) * row;
  }
  return total;
}

MembershipWitness witness(std::string name, double value, double tol) {
  return {std::move(name), value, tol, std::isfinite(value) && value <= tol};
}

}  // namespace

MembershipReport r_ring_membership_demo(const RingElement& f, std::int64_t p, std::int64_t q, std::uint64_t seed) {
  if (!f.L) fail(Errc::InvalidInput, "ring element needs a lattice");
  MembershipReport rep;
  const Lattice& L = *f.L;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.05, 0.95);

  for (const std::int64_t s : {p, q}) {
    const std::string tag = std::to_string(s);
    const EllipticExpr e = zeta_defect(f.L, s);
    const cplx w1 = double(s) * L.omega1(), w2 = double(s) * L.omega2();
    rep.witnesses.push_back(witness("ellipticity of " + tag + "*zeta(z/" + tag + ")-zeta(z) on " + tag + "*Lambda",
                                    ellipticity_defect(e, {w1, w2}, 40, seed + s), 1e-9));
    ResidueConfig rc;
    rc.grid = 120;
    rc.seed = seed;
    const auto rs = residue_sum_fundamental(e, Lattice(w1, w2), rc);
    rep.witnesses.push_back(witness("residue sum of " + tag + "*zeta(z/" + tag + ")-zeta(z)", std::abs(rs.sum), 1e-7));

    double worst = 0;
    for (int i = 0; i < 20; ++i) {
      const cplx z = U(rng) * L.omega1() + U(rng) * L.omega2();
      try {
        const cplx lhs = f.eval(z / double(s));
        const cplx rhs = sigma_via_matrix(f, s, e, z);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      } catch (const Error& err) {
        if (err.code() != Errc::PoleHit && err.code() != Errc::DenominatorZero) throw;
      }
    }
    rep.witnesses.push_back(witness("difference system for z -> z/" + tag, worst, 1e-9));
  }

  {
    const int N = 16;
    const EllipticExpr fx = f.expr();
    const LaurentSeries ser = laurent_at0(fx, N);
    const double rho = 0.1 * L.min_period() / double(p * q);
    double worst = 0;
    for (int i = 0; i < 12; ++i) {
      const cplx z = std::polar(rho, 2 * M_PI * (i + U(rng)) / 12);
      const cplx direct = f.eval(z);
      worst = std::max(worst, std::abs(ser.eval(z) - direct) / std::max(1.0, std::abs(direct)));
    }
    rep.witnesses.push_back(witness("Laurent expansion at 0 reproduces f", worst, 1e-8));
  }

  {
    std::vector<int> js;
    for (const auto& t : f.terms)
      if (std::find(js.begin(), js.end(), t.z_power) == js.end()) js.push_back(t.z_power);
    std::sort(js.begin(), js.end());
    const int r = static_cast<int>(js.size());
    double err = 0;
    if (r > 0) {
      std::normal_distribution<double> G;
      Matrix M(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) M(i, j) = cplx(G(rng), G(rng)) + (i == j ? cplx(2) : cplx(0));
      Matrix D = Matrix::Zero(r, r);
      for (int i = 0; i < r; ++i) D(i, i) = std::pow(double(p), -js[i]);
      const Matrix T = (M * D * M.inverse()).transpose();
      const int order = js.back() + 4;
      std::vector<LaurentSeries> data;
      for (int i = 0; i < r; ++i) {
        LaurentSeries s = LaurentSeries::zero(order);
        for (int j = 0; j < r; ++j) s = s + LaurentSeries::monomial(M(i, j), js[j], order);
        data.push_back(s);
      }
      try {
        const auto sol = solve_triangular_system(T, data, p);
        for (int i = 0; i < r; ++i) {
          if (sol.h[i].terms().size() > std::size_t(r)) err = std::max(err, 1.0);
          for (int j = 0; j < r; ++j) err = std::max(err, std::abs(sol.h[i].coeff(js[j]) - M(i, j)) / M.cwiseAbs().maxCoeff());
        }
      } catch (const Error&) {
        err = std::numeric_limits<double>::infinity();
      }
    }
    rep.witnesses.push_back(witness("z-power data recovered as Laurent polynomials", err, 1e-9));
  }

  rep.pass = std::all_of(rep.witnesses.begin(), rep.witnesses.end(), [](const auto& w) { return w.pass; });
  return rep;
}

nlohmann::json laurent_json(const LaurentPoly& h) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [n, c] : h.terms()) a.push_back({n, complex_json(c)});
  return {{"terms", a}};
}

LaurentPoly laurent_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    fail(Errc::Schema, "Laurent polynomial must be {\"terms\": [[n, [re,im]], ...]}");
  LaurentPoly h;
  for (const auto& t : j["terms"]) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer()) fail(Errc::Schema, "term must be [n, [re,im]]");
    const int n = t[0].get<int>();
    h.set(n, h.coeff(n) + complex_from_json(t[1]));
  }
  return h;
}

namespace {

BigRational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return BigRational(j.get<long long>());
  if (!j.is_string()) fail(Errc::Schema, "exact coefficient must be an integer or a \"num/den\" string");
  const std::string s = j.get<std::string>();
  try {
    using boost::multiprecision::cpp_int;
    const auto slash = s.find('/');
    if (slash == std::string::npos) return BigRational(cpp_int(s));
    const cpp_int den(s.substr(slash + 1));
    if (den == 0) fail(Errc::Schema, "zero denominator in " + s);
    return BigRational(cpp_int(s.substr(0, slash))) / BigRational(den);
  } catch (const std::runtime_error& e) {
    if (dynamic_cast<const Error*>(&e)) throw;
    fail(Errc::Schema, "bad rational '" + s + "'");
  }
}

std::string rational_string(const BigRational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace

GaussianRational gaussian_from_json(const nlohmann::json& j) {
  if (j.is_array() && j.size() == 2) return {rational_from_json(j[0]), rational_from_json(j[1])};
  return {rational_from_json(j), 0};
}

nlohmann::json gaussian_json(const GaussianRational& g) { return {rational_string(g.re), rational_string(g.im)}; }

nlohmann::json exact_laurent_json(const ExactLaurentPoly& h) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [n, c] : h.terms()) a.push_back({n, gaussian_json(c)});
  return {{"terms", a}};
}

ExactLaurentPoly exact_laurent_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    fail(Errc::Schema, "Laurent polynomial must be {\"terms\": [[n, coeff], ...]}");
  ExactLaurentPoly h;
  for (const auto& t : j["terms"]) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer()) fail(Errc::Schema, "term must be [n, coeff]");
    const int n = t[0].get<int>();
    h.set(n, h.coeff(n) + gaussian_from_json(t[1]));
  }
  return h;
}

nlohmann::json membership_json(const MembershipReport& r) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : r.witnesses) w.push_back({{"name", x.name}, {"value", x.value}, {"tol", x.tol}, {"pass", x.pass}});
  return {{"pass", r.pass}, {"witnesses", w}};
}

}  // namespace ellipdiff
