#include "ellipdiff/expr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace ellipdiff {

struct EllipticExpr::Node {
  Kind kind = Kind::Const;
  cplx c = 0;
  Rational m = 1;
  cplx z0 = 0;
  int deriv = 0;
  int n = 0;
  LatticePtr L;
  std::vector<EllipticExpr> args;
};

namespace {

constexpr double kDenominatorEps = 1e-12;

std::shared_ptr<EllipticExpr::Node> make_node(EllipticExpr::Kind k) {
  auto n = std::make_shared<EllipticExpr::Node>();
  n->kind = k;
  return n;
}

void for_each_atom(const EllipticExpr& e, const std::function<void(const EllipticExpr&)>& f) {
  if (e.is_atom()) {
    f(e);
    return;
  }
  for (const auto& a : e.args()) for_each_atom(a, f);
}

bool has_division(const EllipticExpr& e) {
  using K = EllipticExpr::Kind;
  if (e.kind() == K::Quot) return true;
  if (e.kind() == K::Pow && e.exponent() < 0) return true;
  for (const auto& a : e.args())
    if (has_division(a)) return true;
  return false;
}

}  // namespace

EllipticExpr::EllipticExpr() : EllipticExpr(cplx(0)) {}

EllipticExpr::EllipticExpr(cplx c) {
  auto n = make_node(Kind::Const);
  n->c = c;
  node_ = n;
}

EllipticExpr EllipticExpr::z(Rational m) {
  if (m.numerator() == 0) fail(Errc::InvalidInput, "z multiplier must be nonzero");
  auto n = make_node(Kind::Z);
  n->m = m;
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr EllipticExpr::zeta(LatticePtr L, Rational m, cplx z0) {
  if (!L) fail(Errc::InvalidInput, "zeta atom needs a lattice");
  if (m.numerator() <= 0) fail(Errc::InvalidInput, "atom multiplier must be a positive rational");
  auto n = make_node(Kind::Zeta);
  n->m = m;
  n->z0 = z0;
  n->L = std::move(L);
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr EllipticExpr::wp(LatticePtr L, Rational m, cplx z0, int deriv) {
  if (!L) fail(Errc::InvalidInput, "wp atom needs a lattice");
  if (m.numerator() <= 0) fail(Errc::InvalidInput, "atom multiplier must be a positive rational");
  if (deriv != 0 && deriv != 1) fail(Errc::InvalidInput, "wp derivative must be 0 or 1");
  auto n = make_node(Kind::Wp);
  n->m = m;
  n->z0 = z0;
  n->deriv = deriv;
  n->L = std::move(L);
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr EllipticExpr::sum(std::vector<EllipticExpr> args) {
  std::vector<EllipticExpr> flat;
  cplx c = 0;
  for (auto& a : args) {
    if (a.kind() == Kind::Sum) {
      for (const auto& b : a.args()) {
        if (b.is_const()) c += b.value();
        else flat.push_back(b);
      }
    } else if (a.is_const()) {
      c += a.value();
    } else {
      flat.push_back(std::move(a));
    }
  }
  if (c != cplx(0)) flat.emplace_back(c);
  if (flat.empty()) return EllipticExpr(cplx(0));
  if (flat.size() == 1) return flat[0];
  auto n = make_node(Kind::Sum);
  n->args = std::move(flat);
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr EllipticExpr::product(std::vector<EllipticExpr> args) {
  std::vector<EllipticExpr> flat;
  cplx c = 1;
  for (auto& a : args) {
    if (a.kind() == Kind::Prod) {
      for (const auto& b : a.args()) {
        if (b.is_const()) c *= b.value();
        else flat.push_back(b);
      }
    } else if (a.is_const()) {
      c *= a.value();
    } else {
      flat.push_back(std::move(a));
    }
  }
  if (c == cplx(0)) return EllipticExpr(cplx(0));
  if (flat.empty()) return EllipticExpr(c);
  if (c != cplx(1)) flat.insert(flat.begin(), EllipticExpr(c));
  if (flat.size() == 1) return flat[0];
  auto n = make_node(Kind::Prod);
  n->args = std::move(flat);
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr EllipticExpr::power(const EllipticExpr& base, int k) {
  if (k == 0) return EllipticExpr(cplx(1));
  if (k == 1) return base;
  if (base.is_const()) {
    if (k < 0 && base.value() == cplx(0)) fail(Errc::DenominatorIdenticallyZero, "negative power of 0");
    return EllipticExpr(std::pow(base.value(), k));
  }
  auto n = make_node(Kind::Pow);
  n->n = k;
  n->args = {base};
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr EllipticExpr::quotient(const EllipticExpr& num, const EllipticExpr& den) {
  if (den.is_const()) {
    if (std::abs(den.value()) < kDenominatorEps)
      fail(Errc::DenominatorIdenticallyZero, "constant zero denominator");
    return num * EllipticExpr(1.0 / den.value());
  }
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int ok = 0, tiny = 0;
  for (int i = 0; i < 8; ++i) {
    const cplx z(u(rng), u(rng));
    try {
      ++ok;
      if (std::abs(den.eval(z)) < kDenominatorEps) ++tiny;
    } catch (const Error&) {
      --ok;
    }
  }
  if (ok > 0 && tiny == ok) fail(Errc::DenominatorIdenticallyZero, "denominator vanishes at all sample points");
  auto n = make_node(Kind::Quot);
  n->args = {num, den};
  return EllipticExpr(std::shared_ptr<const Node>(n));
}

EllipticExpr::Kind EllipticExpr::kind() const { return node_->kind; }
bool EllipticExpr::is_atom() const {
  const Kind k = kind();
  return k == Kind::Const || k == Kind::Z || k == Kind::Zeta || k == Kind::Wp;
}
cplx EllipticExpr::value() const { return node_->c; }
const Rational& EllipticExpr::multiplier() const { return node_->m; }
cplx EllipticExpr::shift() const { return node_->z0; }
int EllipticExpr::deriv() const { return node_->deriv; }
int EllipticExpr::exponent() const { return node_->n; }
const LatticePtr& EllipticExpr::lattice() const { return node_->L; }
const std::vector<EllipticExpr>& EllipticExpr::args() const { return node_->args; }

cplx EllipticExpr::eval(cplx z) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Const: return n.c;
    case Kind::Z: return to_double(n.m) * z;
    case Kind::Zeta:
    case Kind::Wp: {
      const cplx arg = to_double(n.m) * z - n.z0;
      try {
        if (n.kind == Kind::Zeta) return zeta_eval(*n.L, arg);
        return wp_eval(*n.L, arg, n.deriv);
      } catch (const Error& e) {
        if (e.code() == Errc::PoleAtLatticePoint) fail(Errc::PoleHit, "atom pole at evaluation point");
        throw;
      }
    }
    case Kind::Sum: {
      cplx s = 0;
      for (const auto& a : n.args) s += a.eval(z);
      return s;
    }
    case Kind::Prod: {
      cplx s = 1;
      for (const auto& a : n.args) s *= a.eval(z);
      return s;
    }
    case Kind::Pow: {
      const cplx b = n.args[0].eval(z);
      if (n.n < 0 && std::abs(b) < kDenominatorEps) fail(Errc::DenominatorZero, "negative power of ~0");
      return std::pow(b, n.n);
    }
    case Kind::Quot: {
      const cplx d = n.args[1].eval(z);
      if (std::abs(d) < kDenominatorEps) fail(Errc::DenominatorZero, "denominator vanishes at point");
      return n.args[0].eval(z) / d;
    }
  }
  return 0;
}

EllipticExpr operator+(const EllipticExpr& a, const EllipticExpr& b) { return EllipticExpr::sum({a, b}); }
EllipticExpr operator-(const EllipticExpr& a, const EllipticExpr& b) { return EllipticExpr::sum({a, -b}); }
EllipticExpr operator*(const EllipticExpr& a, const EllipticExpr& b) {
  return EllipticExpr::product({a, b});
}
EllipticExpr operator/(const EllipticExpr& a, const EllipticExpr& b) { return EllipticExpr::quotient(a, b); }
EllipticExpr EllipticExpr::operator-() const { return EllipticExpr::product({EllipticExpr(-1.0), *this}); }

EllipticExpr substitute_linear(const EllipticExpr& e, const Rational& s) {
  using K = EllipticExpr::Kind;
  if (s.numerator() <= 0) fail(Errc::InvalidInput, "substitution factor must be positive");
  switch (e.kind()) {
    case K::Const: return e;
    case K::Z: return EllipticExpr::z(e.multiplier() * s);
    case K::Zeta: return EllipticExpr::zeta(e.lattice(), e.multiplier() * s, e.shift());
    case K::Wp: return EllipticExpr::wp(e.lattice(), e.multiplier() * s, e.shift(), e.deriv());
    case K::Sum:
    case K::Prod: {
      std::vector<EllipticExpr> a;
      for (const auto& x : e.args()) a.push_back(substitute_linear(x, s));
      return e.kind() == K::Sum ? EllipticExpr::sum(std::move(a)) : EllipticExpr::product(std::move(a));
    }
    case K::Pow: return EllipticExpr::power(substitute_linear(e.args()[0], s), e.exponent());
    case K::Quot:
      return EllipticExpr::quotient(substitute_linear(e.args()[0], s), substitute_linear(e.args()[1], s));
  }
  return e;
}

EllipticExpr substitute_scale(const EllipticExpr& e, std::int64_t p, ScaleDirection dir) {
  if (p <= 0) fail(Errc::InvalidInput, "scale must be a positive integer");
  return substitute_linear(e, dir == ScaleDirection::divide ? Rational(1, p) : Rational(p));
}

// ------------------------------------------------------------ series at 0

namespace {

LaurentSeries series_rec(const EllipticExpr& e, int W) {
  using K = EllipticExpr::Kind;
  switch (e.kind()) {
    case K::Const: return LaurentSeries::constant(e.value(), W);
    case K::Z: return LaurentSeries::monomial(to_double(e.multiplier()), 1, W);
    case K::Zeta:
    case K::Wp: {
      const WeierstrassFn f = e.kind() == K::Zeta ? WeierstrassFn::zeta
                              : e.deriv() == 0    ? WeierstrassFn::wp
                                                  : WeierstrassFn::wp_prime;
      const LaurentSeries t = taylor_at(*e.lattice(), f, -e.shift(), W);
      return compose_linear(t, to_double(e.multiplier()));
    }
    case K::Sum: {
      LaurentSeries s = series_rec(e.args()[0], W);
      for (std::size_t i = 1; i < e.args().size(); ++i) s = s + series_rec(e.args()[i], W);
      return s;
    }
    case K::Prod: {
      LaurentSeries s = series_rec(e.args()[0], W);
      for (std::size_t i = 1; i < e.args().size(); ++i) s = s * series_rec(e.args()[i], W);
      return s;
    }
    case K::Pow: {
      LaurentSeries b = series_rec(e.args()[0], W);
      if (e.exponent() < 0) {
        b = b.pruned(1e-12);
        if (b.is_zero()) fail(Errc::DenominatorIdenticallyZero, "negative power of a zero series");
      }
      return series_pow(b, e.exponent());
    }
    case K::Quot: {
      const LaurentSeries d = series_rec(e.args()[1], W).pruned(1e-12);
      if (d.is_zero()) fail(Errc::DenominatorIdenticallyZero, "denominator series vanishes");
      return series_rec(e.args()[0], W) * series_invert(d);
    }
  }
  return LaurentSeries::zero(W);
}

}  // namespace

LaurentSeries laurent_at0(const EllipticExpr& e, int N) {
  int slack = 8;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const LaurentSeries s = series_rec(e, N + slack);
    if (s.order() >= N) return s.truncated(N);
    slack = slack * 2 + (N - s.order());
  }
  fail(Errc::InvalidInput, "could not reach the requested series order");
}

// ---------------------------------------------------------------- residues

namespace {

// Trapezoid estimate of the coefficient of (z-a)^k; also max |e| on the circle.
cplx contour_coeff(const EllipticExpr& e, cplx a, double r, int M, int k, double* max_abs = nullptr) {
  cplx s = 0;
  double mx = 0;
  for (int j = 0; j < M; ++j) {
    const cplx w = std::polar(r, 2.0 * kPi * (j + 0.5) / M);
    const cplx v = e.eval(a + w);
    mx = std::max(mx, std::abs(v));
    s += v * std::pow(w, -k);
  }
  if (max_abs) *max_abs = mx;
  return s / double(M);
}

double natural_scale(const EllipticExpr& e) {
  double scale = std::numeric_limits<double>::infinity();
  for_each_atom(e, [&](const EllipticExpr& a) {
    if (a.lattice()) scale = std::min(scale, a.lattice()->min_period() / to_double(a.multiplier()));
  });
  return std::isfinite(scale) ? scale : 1.0;
}

// Residue on circles r, r/2, r/4, ... until two radii agree.
cplx adaptive_residue(const EllipticExpr& e, cplx a, double r, int M, bool require_simple) {
  cplx prev = 0;
  bool have_prev = false;
  for (int it = 0; it < 12; ++it, r *= 0.5) {
    cplx c1, c2;
    double mx = 0;
    try {
      c1 = contour_coeff(e, a, r, M, -1, &mx);
      c2 = contour_coeff(e, a, r, M, -2);
    } catch (const Error& err) {
      if (err.code() == Errc::PoleHit || err.code() == Errc::DenominatorZero) continue;
      throw;
    }
    if (require_simple && std::abs(c2) / (r * r) > 1e-7 * std::max(mx, 1e-300))
      fail(Errc::HigherOrderPole, "pole of order >= 2");
    if (have_prev && std::abs(c1 - prev) <= 1e-11 * (1.0 + std::abs(c1))) return c1;
    prev = c1;
    have_prev = true;
  }
  return prev;
}

cplx reduce_mod(const Lattice& L, cplx z) {
  double a, b;
  L.coordinates(z, a, b);
  a -= std::floor(a);
  b -= std::floor(b);
  if (a >= 1.0) a = 0;
  if (b >= 1.0) b = 0;
  return a * L.omega1() + b * L.omega2();
}

double torus_distance(const Lattice& L, cplx a, cplx b) {
  return L.distance_to_lattice(a - b);
}

}  // namespace

cplx residue_at(const EllipticExpr& e, cplx pole) {
  return adaptive_residue(e, pole, 0.02 * natural_scale(e), 64, true);
}

std::vector<cplx> atom_pole_candidates(const EllipticExpr& e, const Lattice& /*periods*/) {
  std::vector<cplx> out;
  for_each_atom(e, [&](const EllipticExpr& a) {
    if (!a.lattice()) return;
    const double m = to_double(a.multiplier());
    const long num = std::min<long>(a.multiplier().numerator(), 40);
    // Enough atom-lattice translates to cover every class modulo the periods.
    const long span = num + 1;
    const Lattice& AL = *a.lattice();
    for (long i = -span; i <= span; ++i)
      for (long j = -span; j <= span; ++j) out.push_back((a.shift() + AL.vector(i, j)) / m);
  });
  return out;
}

double ellipticity_defect(const EllipticExpr& e, const std::vector<cplx>& periods, int samples,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0;
  double scale = 0;
  for (const auto& w : periods) scale = std::max(scale, std::abs(w));
  int done = 0;
  for (int tries = 0; done < samples && tries < samples * 20; ++tries) {
    const cplx z = scale * cplx(u(rng), u(rng));
    try {
      const cplx v = e.eval(z);
      for (const auto& w : periods) {
        const cplx v2 = e.eval(z + w);
        worst = std::max(worst, std::abs(v2 - v) / std::max(1.0, std::abs(v)));
      }
      ++done;
    } catch (const Error& err) {
      if (err.code() != Errc::PoleHit && err.code() != Errc::DenominatorZero) throw;
    }
  }
  return worst;
}

ResidueSumReport residue_sum_fundamental(const EllipticExpr& e, const Lattice& periods,
                                         const ResidueConfig& cfg) {
  if (ellipticity_defect(e, {periods.omega1(), periods.omega2()}, 8, cfg.seed) > 1e-7)
    fail(Errc::NotElliptic, "expression is not periodic for the given lattice");

  const cplx w1 = periods.omega1(), w2 = periods.omega2();
  const double unit = periods.min_period();
  std::vector<cplx> cand;
  for (const cplx z : atom_pole_candidates(e, periods)) cand.push_back(reduce_mod(periods, z));

  // Grid scan on the torus: discrete local maxima of |e|.
  const int G = cfg.grid;
  const double off_s = 0.3819660112501051, off_t = 0.6180339887498949;
  auto point = [&](int i, int j) {
    return ((i + off_s) / G) * w1 + ((j + off_t) / G) * w2;
  };
  std::vector<double> val(static_cast<std::size_t>(G) * G);
  std::vector<double> finite_vals;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) {
      double v;
      try {
        v = std::abs(e.eval(point(i, j)));
      } catch (const Error& err) {
        if (err.code() != Errc::PoleHit && err.code() != Errc::DenominatorZero) throw;
        v = std::numeric_limits<double>::infinity();
      }
      val[static_cast<std::size_t>(i) * G + j] = v;
      if (std::isfinite(v)) finite_vals.push_back(v);
    }
  double median = 1.0;
  if (!finite_vals.empty()) {
    std::nth_element(finite_vals.begin(), finite_vals.begin() + finite_vals.size() / 2, finite_vals.end());
    median = std::max(finite_vals[finite_vals.size() / 2], 1e-300);
  }
  auto at = [&](int i, int j) {
    return val[static_cast<std::size_t>((i + G) % G) * G + static_cast<std::size_t>((j + G) % G)];
  };
  std::vector<cplx> grid_cand;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j) {
      const double v = at(i, j);
      if (!(v > 4.0 * median)) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (di == 0 && dj == 0) continue;
          const double u = at(i + di, j + dj);
          if (u > v || (u == v && std::isfinite(v) && (di < 0 || (di == 0 && dj < 0)))) {
            is_max = false;
            break;
          }
        }
      if (is_max) grid_cand.push_back(point(i, j));
    }

  // Newton refinement on 1/e.
  const double delta = 1e-6 * unit;
  for (cplx z : grid_cand) {
    bool ok = false;
    for (int it = 0; it < 120; ++it) {
      try {
        const cplx h = 1.0 / e.eval(z);
        const cplx dh = (1.0 / e.eval(z + delta) - 1.0 / e.eval(z - delta)) / (2.0 * delta);
        if (dh == cplx(0)) break;
        const cplx step = h / dh;
        if (std::abs(step) > 0.1 * unit) break;
        z -= step;
        if (std::abs(step) < 1e-15 * unit) {
          ok = true;
          break;
        }
      } catch (const Error& err) {
        if (err.code() != Errc::PoleHit && err.code() != Errc::DenominatorZero) throw;
        ok = true;
        break;
      }
    }
    if (!ok) {
      try {
        ok = std::abs(e.eval(z)) > 1e8 * median;
      } catch (const Error&) {
        ok = true;
      }
    }
    if (ok) cand.push_back(reduce_mod(periods, z));
  }

  // Deduplicate modulo the period lattice, preferring earlier (symbolic) entries.
  std::vector<cplx> uniq;
  for (const cplx z : cand) {
    bool dup = false;
    for (const cplx u : uniq)
      if (torus_distance(periods, z, u) < 1e-6 * unit) {
        dup = true;
        break;
      }
    if (!dup) uniq.push_back(z);
  }

  ResidueSumReport rep;
  rep.sum = 0;
  for (std::size_t k = 0; k < uniq.size(); ++k) {
    double dmin = 0.05 * unit;
    for (std::size_t l = 0; l < uniq.size(); ++l)
      if (l != k) dmin = std::min(dmin, 0.3 * torus_distance(periods, uniq[k], uniq[l]));
    // Keep only genuine poles: |e| must grow as the circle shrinks.
    double big = 0, small = 0;
    try {
      contour_coeff(e, uniq[k], dmin, 16, 0, &big);
      contour_coeff(e, uniq[k], dmin / 8, 16, 0, &small);
    } catch (const Error& err) {
      if (err.code() != Errc::PoleHit && err.code() != Errc::DenominatorZero) throw;
      small = std::numeric_limits<double>::infinity();
    }
    if (!(small > 3.0 * big)) continue;
    const cplx res = adaptive_residue(e, uniq[k], dmin, cfg.contour_points, false);
    rep.poles.push_back({uniq[k], res});
    rep.sum += res;
  }
  return rep;
}

// ---------------------------------------------------------------- matrices

MatrixExpr::MatrixExpr(int rows, int cols, std::vector<EllipticExpr> entries)
    : kind_(Kind::Leaf), rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows <= 0 || cols <= 0 || static_cast<int>(entries_.size()) != rows * cols)
    fail(Errc::DimensionMismatch, "matrix expression entry count does not match its shape");
}

MatrixExpr MatrixExpr::identity(int n) { return constant(Matrix::Identity(n, n)); }

MatrixExpr MatrixExpr::constant(const Matrix& m) {
  std::vector<EllipticExpr> e;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) e.emplace_back(m(i, j));
  return MatrixExpr(static_cast<int>(m.rows()), static_cast<int>(m.cols()), std::move(e));
}

MatrixExpr MatrixExpr::product(std::vector<MatrixExpr> factors) {
  if (factors.empty()) fail(Errc::InvalidInput, "empty matrix product");
  for (std::size_t i = 1; i < factors.size(); ++i)
    if (factors[i - 1].cols() != factors[i].rows()) fail(Errc::DimensionMismatch, "matrix product shapes");
  if (factors.size() == 1) return factors[0];
  MatrixExpr m;
  m.kind_ = Kind::Product;
  m.rows_ = factors.front().rows();
  m.cols_ = factors.back().cols();
  m.children_ = std::move(factors);
  return m;
}

MatrixExpr MatrixExpr::inverse(const MatrixExpr& a) {
  if (a.rows() != a.cols()) fail(Errc::DimensionMismatch, "inverse of a non-square matrix");
  MatrixExpr m;
  m.kind_ = Kind::Inverse;
  m.rows_ = m.cols_ = a.rows();
  m.children_ = {a};
  return m;
}

MatrixExpr MatrixExpr::block_diag(std::vector<MatrixExpr> blocks) {
  if (blocks.empty()) fail(Errc::InvalidInput, "empty block list");
  if (blocks.size() == 1) return blocks[0];
  MatrixExpr m;
  m.kind_ = Kind::BlockDiag;
  for (const auto& b : blocks) {
    m.rows_ += b.rows();
    m.cols_ += b.cols();
  }
  m.children_ = std::move(blocks);
  return m;
}

const EllipticExpr& MatrixExpr::entry(int i, int j) const {
  if (kind_ != Kind::Leaf) fail(Errc::InvalidInput, "entry access on a composite matrix expression");
  return entries_[static_cast<std::size_t>(i) * cols_ + j];
}

Matrix MatrixExpr::eval(cplx z) const {
  switch (kind_) {
    case Kind::Leaf: {
      Matrix m(rows_, cols_);
      for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) m(i, j) = entry(i, j).eval(z);
      return m;
    }
    case Kind::Product: {
      Matrix m = children_[0].eval(z);
      for (std::size_t k = 1; k < children_.size(); ++k) m = m * children_[k].eval(z);
      return m;
    }
    case Kind::Inverse: {
      const Matrix a = children_[0].eval(z);
      Eigen::FullPivLU<Matrix> lu(a);
      lu.setThreshold(1e-13);
      if (!lu.isInvertible()) fail(Errc::PoleHit, "matrix not invertible at evaluation point");
      return lu.inverse();
    }
    case Kind::BlockDiag: {
      Matrix m = Matrix::Zero(rows_, cols_);
      int r = 0, c = 0;
      for (const auto& b : children_) {
        m.block(r, c, b.rows(), b.cols()) = b.eval(z);
        r += b.rows();
        c += b.cols();
      }
      return m;
    }
  }
  return {};
}

SeriesMatrix MatrixExpr::laurent_at0(int N) const {
  switch (kind_) {
    case Kind::Leaf: {
      std::vector<LaurentSeries> e;
      for (const auto& x : entries_) e.push_back(ellipdiff::laurent_at0(x, N));
      return SeriesMatrix(rows_, cols_, std::move(e));
    }
    case Kind::Product: {
      // Extra order so that pole-carrying factors still reach N.
      int W = N;
      for (int attempt = 0; attempt < 5; ++attempt) {
        SeriesMatrix m = children_[0].laurent_at0(W);
        for (std::size_t k = 1; k < children_.size(); ++k) m = m * children_[k].laurent_at0(W);
        if (m.order() >= N) return m.truncated(N);
        W += (N - m.order()) + 4;
      }
      fail(Errc::InvalidInput, "could not reach the requested series order");
    }
    case Kind::Inverse: {
      int W = N;
      for (int attempt = 0; attempt < 5; ++attempt) {
        const SeriesMatrix m = invert(children_[0].laurent_at0(W));
        if (m.order() >= N) return m.truncated(N);
        W += (N - m.order()) + 4;
      }
      fail(Errc::InvalidInput, "could not reach the requested series order");
    }
    case Kind::BlockDiag: {
      SeriesMatrix m(rows_, cols_, N);
      int r = 0, c = 0;
      for (const auto& b : children_) {
        const SeriesMatrix s = b.laurent_at0(N);
        for (int i = 0; i < b.rows(); ++i)
          for (int j = 0; j < b.cols(); ++j) m(r + i, c + j) = s(i, j);
        r += b.rows();
        c += b.cols();
      }
      return m;
    }
  }
  return {};
}

MatrixExpr MatrixExpr::substitute_linear(const Rational& s) const {
  MatrixExpr m = *this;
  for (auto& x : m.entries_) x = ellipdiff::substitute_linear(x, s);
  for (auto& c : m.children_) c = c.substitute_linear(s);
  return m;
}

MatrixExpr MatrixExpr::substitute_scale(std::int64_t p, ScaleDirection dir) const {
  if (p <= 0) fail(Errc::InvalidInput, "scale must be a positive integer");
  return substitute_linear(dir == ScaleDirection::divide ? Rational(1, p) : Rational(p));
}

MatrixExpr MatrixExpr::scaled(cplx c) const {
  if (kind_ == Kind::Leaf) {
    MatrixExpr m = *this;
    for (auto& x : m.entries_) x = EllipticExpr(c) * x;
    return m;
  }
  return product({constant(c * Matrix::Identity(rows_, rows_)), *this});
}

MatrixExpr MatrixExpr::expanded() const {
  switch (kind_) {
    case Kind::Leaf: return *this;
    case Kind::Inverse: fail(Errc::InvalidInput, "inverse nodes cannot be expanded symbolically");
    case Kind::BlockDiag: {
      std::vector<EllipticExpr> e(static_cast<std::size_t>(rows_) * cols_, EllipticExpr(0.0));
      int r = 0, c = 0;
      for (const auto& b : children_) {
        const MatrixExpr x = b.expanded();
        for (int i = 0; i < x.rows(); ++i)
          for (int j = 0; j < x.cols(); ++j) e[static_cast<std::size_t>(r + i) * cols_ + c + j] = x.entry(i, j);
        r += x.rows();
        c += x.cols();
      }
      return MatrixExpr(rows_, cols_, std::move(e));
    }
    case Kind::Product: {
      MatrixExpr acc = children_[0].expanded();
      for (std::size_t k = 1; k < children_.size(); ++k) {
        const MatrixExpr b = children_[k].expanded();
        std::vector<EllipticExpr> e;
        for (int i = 0; i < acc.rows(); ++i)
          for (int j = 0; j < b.cols(); ++j) {
            std::vector<EllipticExpr> terms;
            for (int l = 0; l < acc.cols(); ++l) {
              const EllipticExpr& x = acc.entry(i, l);
              const EllipticExpr& y = b.entry(l, j);
              if ((x.is_const() && x.value() == cplx(0)) || (y.is_const() && y.value() == cplx(0))) continue;
              terms.push_back(x * y);
            }
            e.push_back(EllipticExpr::sum(std::move(terms)));
          }
        acc = MatrixExpr(acc.rows(), b.cols(), std::move(e));
      }
      return acc;
    }
  }
  return *this;
}

}  // namespace ellipdiff
