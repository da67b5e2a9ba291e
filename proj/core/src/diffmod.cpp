#include "ellipdiff/diffmod.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "ellipdiff/json_io.hpp"

namespace ellipdiff {

namespace {

std::map<std::int64_t, int> factorize(std::int64_t n) {
  std::map<std::int64_t, int> f;
  for (std::int64_t d = 2; d * d <= n; ++d)
    while (n % d == 0) {
      ++f[d];
      n /= d;
    }
  if (n > 1) ++f[n];
  return f;
}

double relative_max(const Matrix& x, const Matrix& y) {
  const double scale = std::max({1.0, x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
  return (x - y).cwiseAbs().maxCoeff() / scale;
}

// det(M) is not identically zero: some of five random points shows a determinant above rounding level.
bool generically_invertible(const MatrixExpr& M, const Lattice& L, std::uint64_t seed) {
  std::uint64_t state = seed;
  int good = 0;
  for (int attempt = 0; attempt < 60 && good < 5; ++attempt) {
    const cplx z = sample_annulus(L, state);
    Matrix m;
    try {
      m = M.eval(z);
    } catch (const Error& e) {
      if (e.code() == Errc::PoleHit || e.code() == Errc::DenominatorZero) continue;
      throw;
    }
    double hadamard = 1.0;
    for (int j = 0; j < m.cols(); ++j) hadamard *= std::max(m.col(j).norm(), 1e-300);
    if (std::abs(m.determinant()) > 1e-12 * hadamard) return true;
    ++good;
  }
  return false;
}

}  // namespace

bool multiplicatively_independent(std::int64_t p, std::int64_t q) {
  if (p < 2 || q < 2) return false;
  const auto fp = factorize(p), fq = factorize(q);
  if (fp.size() != fq.size()) return true;
  // Dependent iff the exponent vectors are proportional over the same primes.
  std::int64_t num = -1, den = -1;
  for (const auto& [prime, e] : fp) {
    const auto it = fq.find(prime);
    if (it == fq.end()) return true;
    if (num < 0) {
      num = e;
      den = it->second;
    } else if (std::int64_t(e) * den != std::int64_t(it->second) * num) {
      return true;
    }
  }
  return false;
}

cplx sample_annulus(const Lattice& L, std::uint64_t& state) {
  std::mt19937_64 rng(state);
  state = rng();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rmin = 0.05, rmax = 0.45 * L.min_period();
  const double r = rmin + (rmax - rmin) * u(rng);
  return std::polar(r, 2.0 * kPi * u(rng));
}

DifferencePair::DifferencePair(MatrixExpr A, MatrixExpr B, int p, int q, LatticePtr L, PairOptions opts)
    : A_(std::move(A)), B_(std::move(B)), p_(p), q_(q), L_(std::move(L)), opts_(opts) {
  if (!L_) fail(Errc::InvalidInput, "pair needs a lattice");
  if (p_ < 2 || q_ < 2) fail(Errc::InvalidInput, "p and q must be integers >= 2");
  if (std::gcd(p_, q_) != 1) {
    if (!opts_.allow_mult_indep)
      fail(Errc::NonCoprime, "p and q must be relatively prime (override: allow_mult_indep)");
    if (!multiplicatively_independent(p_, q_))
      fail(Errc::NonCoprime, "p and q are multiplicatively dependent");
    trusted_ = false;
  }
  if (A_.rows() != A_.cols() || B_.rows() != B_.cols() || A_.rows() != B_.rows())
    fail(Errc::DimensionMismatch, "A and B must be square of the same size");
  if (!generically_invertible(A_, *L_, 0xA11CE) || !generically_invertible(B_, *L_, 0xB0B))
    fail(Errc::NotInvertible, "A or B is singular at generic points");
}

ConsistencyReport check_consistency(const DifferencePair& P, const ConsistencyConfig& cfg) {
  ConsistencyReport rep;
  const double p = P.p(), q = P.q();
  std::uint64_t state = cfg.seed;
  while (rep.samples < cfg.n_samples) {
    if (rep.retries > cfg.retry_budget) break;
    const cplx z = sample_annulus(*P.lattice(), state);
    try {
      const Matrix lhs = P.B().eval(z / p) * P.A().eval(z);
      const Matrix rhs = P.A().eval(z / q) * P.B().eval(z);
      rep.max_residual = std::max(rep.max_residual, relative_max(lhs, rhs));
      ++rep.samples;
    } catch (const Error& e) {
      if (e.code() != Errc::PoleHit && e.code() != Errc::DenominatorZero) throw;
      ++rep.retries;
    }
  }
  if (cfg.check_series) {
    const int N = cfg.series_order;
    const SeriesMatrix a = P.A().laurent_at0(N + 4), b = P.B().laurent_at0(N + 4);
    const SeriesMatrix lhs = scale_argument(b, p) * a;
    const SeriesMatrix rhs = scale_argument(a, q) * b;
    const int order = std::min({lhs.order(), rhs.order(), N});
    double running = 1.0;
    for (int n = std::min(lhs.valuation(), rhs.valuation()); n <= order; ++n) {
      const Matrix x = lhs.coefficient(n), y = rhs.coefficient(n);
      running = std::max({running, x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
      rep.series_residual = std::max(rep.series_residual, (x - y).cwiseAbs().maxCoeff() / running);
    }
    rep.series_order = order;
    rep.series_checked = true;
  }
  rep.pass = rep.samples == cfg.n_samples && rep.max_residual < cfg.tol &&
             (!cfg.check_series || rep.series_residual < cfg.tol);
  return rep;
}

DifferencePair apply_gauge(const DifferencePair& P, const MatrixExpr& C) {
  if (C.rows() != P.rank() || C.cols() != P.rank()) fail(Errc::DimensionMismatch, "gauge matrix size");
  if (!generically_invertible(C, *P.lattice(), 0xC0FFEE))
    fail(Errc::SingularGauge, "gauge matrix is singular at generic points");
  const MatrixExpr Cp = C.substitute_linear(Rational(1, P.p()));
  const MatrixExpr Cq = C.substitute_linear(Rational(1, P.q()));
  MatrixExpr A = MatrixExpr::product({MatrixExpr::inverse(Cp), P.A(), C});
  MatrixExpr B = MatrixExpr::product({MatrixExpr::inverse(Cq), P.B(), C});
  return DifferencePair(std::move(A), std::move(B), P.p(), P.q(), P.lattice(), P.options());
}

DifferencePair twist_rank1(const DifferencePair& P, cplx a, cplx b) {
  if (a == cplx(0) || b == cplx(0)) fail(Errc::ZeroTwist, "twist parameters must be nonzero");
  return DifferencePair(P.A().scaled(a), P.B().scaled(b), P.p(), P.q(), P.lattice(), P.options());
}

DifferencePair direct_sum(const DifferencePair& P1, const DifferencePair& P2) {
  const bool same_lattice = P1.lattice() == P2.lattice() ||
                            (P1.lattice()->omega1() == P2.lattice()->omega1() &&
                             P1.lattice()->omega2() == P2.lattice()->omega2());
  if (P1.p() != P2.p() || P1.q() != P2.q() || !same_lattice)
    fail(Errc::MismatchedParameters, "direct sum needs equal p, q and lattice");
  return DifferencePair(MatrixExpr::block_diag({P1.A(), P2.A()}), MatrixExpr::block_diag({P1.B(), P2.B()}),
                        P1.p(), P1.q(), P1.lattice(), P1.options());
}

nlohmann::json pair_to_json(const DifferencePair& P) {
  nlohmann::json j;
  j["p"] = P.p();
  j["q"] = P.q();
  j["lattice"] = lattice_json(*P.lattice());
  j["A"] = to_json(P.A());
  j["B"] = to_json(P.B());
  if (!P.trusted()) j["untrusted"] = true;
  return j;
}

DifferencePair pair_from_json(const nlohmann::json& j, PairOptions opts) {
  if (!j.is_object()) fail(Errc::Schema, "pair must be a JSON object");
  for (const char* k : {"p", "q", "lattice", "A", "B"})
    if (!j.contains(k)) fail(Errc::Schema, std::string("pair is missing '") + k + "'");
  if (!j.at("p").is_number_integer() || !j.at("q").is_number_integer())
    fail(Errc::Schema, "p and q must be integers");
  const LatticePtr L = lattice_from_json(j.at("lattice"));
  MatrixExpr A = matrix_from_json(j.at("A"), L);
  MatrixExpr B = matrix_from_json(j.at("B"), L);
  return DifferencePair(std::move(A), std::move(B), j.at("p").get<int>(), j.at("q").get<int>(), L, opts);
}

}  // namespace ellipdiff
