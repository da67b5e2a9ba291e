#include "ellipdiff/weierstrass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ellipdiff/series.hpp"

namespace ellipdiff {

namespace {

constexpr int kInternalK = 160;      // normalized G_{2k} kept for k <= kInternalK
constexpr double kLaurentRadius = 0.8;  // normalized |w| bound for the Laurent kernel
constexpr double kTermTol = 1e-18;

struct Values {
  cplx zeta, wp, wpp;
};

cplx sigma_power_series(cplx q, int power, double coeff) {
  // coeff * sum_{n>=1} sigma_power(n) q^n
  cplx acc = 0, qn = 1;
  for (int n = 1; n <= 400; ++n) {
    qn *= q;
    double s = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) s += std::pow(double(d), power);
    const cplx term = coeff * s * qn;
    acc += term;
    if (std::abs(term) < kTermTol * std::max(1.0, std::abs(acc)) && n > 2) break;
  }
  return acc;
}

// Normalized lattice Z + tau Z.
class Kernel {
 public:
  Kernel(cplx tau, const std::vector<cplx>& gn, double s4) : tau_(tau), gn_(gn), s4_(s4) {}

  Values laurent(cplx w) const {
    const cplx w2 = w * w;
    const double aw = std::abs(w);
    cplx zs = 1.0 / w, ps = 1.0 / w2, pps = -2.0 / (w2 * w);
    cplx wpow = w;  // w^{2k-3}
    double apow = aw;  // |w|^{2k-3}
    const int kmax = static_cast<int>(gn_.size()) - 1;
    for (int k = 2; k <= kmax; ++k) {
      const cplx g = gn_[k];
      const cplx w2k3 = wpow;        // w^{2k-3}
      const cplx w2k2 = w2k3 * w;    // w^{2k-2}
      const cplx w2k1 = w2k2 * w;    // w^{2k-1}
      zs -= g * w2k1;
      ps += double(2 * k - 1) * g * w2k2;
      pps += double((2 * k - 1) * (2 * k - 2)) * g * w2k3;
      wpow *= w2;
      if (4.0 * k * k * s4_ * apow < kTermTol) break;
      apow *= aw * aw;
    }
    return {zs, ps, pps};
  }

  // q-expansion in the strip |Im w| < Im tau.
  Values qseries(cplx w) const {
    const cplx q = std::exp(2.0 * kPi * kI * tau_);
    const cplx g2 = gn_[1];
    const cplx s = std::sin(kPi * w), c = std::cos(kPi * w);
    const cplx csc2 = 1.0 / (s * s);
    cplx zs = g2 * w + kPi * c / s;
    cplx ps = -g2 + kPi * kPi * csc2;
    cplx pps = -2.0 * kPi * kPi * kPi * csc2 * c / s;
    cplx qn = 1;
    for (int n = 1; n <= 2000; ++n) {
      qn *= q;
      const cplx f = qn / (1.0 - qn);
      const cplx sn = std::sin(2.0 * kPi * double(n) * w);
      const cplx cn = std::cos(2.0 * kPi * double(n) * w);
      const cplx tz = 4.0 * kPi * f * sn;
      const cplx tp = -8.0 * kPi * kPi * double(n) * f * cn;
      const cplx tpp = 16.0 * kPi * kPi * kPi * double(n) * double(n) * f * sn;
      zs += tz;
      ps += tp;
      pps += tpp;
      if (std::abs(tpp) + std::abs(tp) + std::abs(tz) < kTermTol) break;
    }
    return {zs, ps, pps};
  }

  // No lattice reduction: w must lie near the origin.
  Values local(cplx w) const {
    if (std::abs(w) <= kLaurentRadius) return laurent(w);
    return qseries(w);
  }

 private:
  cplx tau_;
  const std::vector<cplx>& gn_;
  double s4_;
};

void nearest_normalized(cplx z, cplx tau, long& m, long& n) {
  const double y = z.imag() / tau.imag();
  const double x = z.real() - y * tau.real();
  const long fx = static_cast<long>(std::floor(x)), fy = static_cast<long>(std::floor(y));
  double best = std::numeric_limits<double>::infinity();
  for (long b = fy - 1; b <= fy + 2; ++b) {
    for (long a = fx - 1; a <= fx + 2; ++a) {
      const double d = std::abs(z - (double(a) + double(b) * tau));
      if (d < best) {
        best = d;
        m = a;
        n = b;
      }
    }
  }
}

// Normalized evaluation including quasi-period corrections.
Values eval_normalized(const Lattice& L, cplx z) {
  const cplx tau = L.reduced_tau();
  Kernel k(tau, L.normalized_eisenstein(), L.normalized_abs_sum4());
  long m = 0, n = 0;
  nearest_normalized(z, tau, m, n);
  cplx w = z - (double(m) + double(n) * tau);
  Values v;
  if (std::abs(w) <= kLaurentRadius) {
    v = k.laurent(w);
  } else {
    // Strip reduction for the q-expansion.
    const long n2 = std::lround(z.imag() / tau.imag());
    const cplx z1 = z - double(n2) * tau;
    const long m2 = std::lround(z1.real());
    m = m2;
    n = n2;
    w = z1 - double(m2);
    v = k.qseries(w);
  }
  v.zeta += double(m) * L.normalized_eta1() + double(n) * L.normalized_eta2();
  return v;
}

}  // namespace

Lattice::Lattice(cplx omega1, cplx omega2, int k_max) : k_max_(k_max) {
  if (k_max < 3) fail(Errc::InvalidInput, "k_max must be at least 3");
  if (!(std::isfinite(std::abs(omega1)) && std::isfinite(std::abs(omega2))) || omega1 == cplx(0) ||
      omega2 == cplx(0))
    fail(Errc::DegenerateBasis, "lattice generators must be finite and nonzero");
  const cplx ratio = omega2 / omega1;
  if (std::abs(ratio.imag()) <= 1e-10 * std::abs(ratio))
    fail(Errc::DegenerateBasis, "generators are linearly dependent over the reals");
  if (ratio.imag() < 0) std::swap(omega1, omega2);
  omega1_ = omega1;
  omega2_ = omega2;

  // Gauss reduction tracking (b1,b2) = M (omega1,omega2).
  cplx u = omega1, v = omega2;
  long a = 1, b = 0, c = 0, d = 1;
  for (int it = 0; it < 10000; ++it) {
    const long mu = std::lround((v / u).real());
    if (mu != 0) {
      v -= double(mu) * u;
      c -= mu * a;
      d -= mu * b;
    }
    if (std::abs(v) < std::abs(u) * (1.0 - 1e-14)) {
      const cplx t = u;
      u = v;
      v = -t;
      const long ta = a, tb = b;
      a = c;
      b = d;
      c = -ta;
      d = -tb;
      continue;
    }
    break;
  }
  b1_ = u;
  b2_ = v;
  m11_ = a;
  m12_ = b;
  m21_ = c;
  m22_ = d;
  tau_ = b2_ / b1_;

  // Normalized Eisenstein series from the q-expansions of E2, E4, E6.
  const cplx q = std::exp(2.0 * kPi * kI * tau_);
  const double pi2 = kPi * kPi, pi4 = pi2 * pi2, pi6 = pi4 * pi2;
  const cplx e2 = 1.0 + sigma_power_series(q, 1, -24.0);
  const cplx e4 = 1.0 + sigma_power_series(q, 3, 240.0);
  const cplx e6 = 1.0 + sigma_power_series(q, 5, -504.0);
  const int kint = std::max(k_max, kInternalK);
  gn_.assign(kint + 1, 0.0);
  gn_[1] = pi2 / 3.0 * e2;  // quasi-modular G_2, equal to eta(1)
  std::vector<cplx> cc(kint + 1, 0.0);  // wp coefficients c_k = (2k-1) G_{2k}
  cc[2] = 3.0 * (pi4 / 45.0) * e4;
  cc[3] = 5.0 * (2.0 * pi6 / 945.0) * e6;
  for (int n = 4; n <= kint; ++n) {
    cplx s = 0;
    for (int m = 2; m <= n - 2; ++m) s += cc[m] * cc[n - m];
    cc[n] = 3.0 / double((2 * n + 1) * (n - 3)) * s;
  }
  for (int k = 2; k <= kint; ++k) gn_[k] = cc[k] / double(2 * k - 1);

  // sum' |omega|^{-4} on the normalized lattice (truncation bound only).
  {
    const int R = 40;
    double s = 0;
    for (int m = -R; m <= R; ++m)
      for (int n = -R; n <= R; ++n) {
        if (m == 0 && n == 0) continue;
        const double r = std::abs(double(m) + double(n) * tau_);
        s += 1.0 / (r * r * r * r);
      }
    const double rho = double(R) * std::min(1.0, tau_.imag()) * 0.5;
    s += 2.0 * kPi / tau_.imag() / (2.0 * rho * rho);
    abs_sum4_ = s;
  }

  Kernel kern(tau_, gn_, abs_sum4_);
  etan1_ = 2.0 * kern.local(0.5).zeta;
  etan2_ = 2.0 * kern.local(0.5 * tau_).zeta;

  const cplx eb1 = etan1_ / b1_, eb2 = etan2_ / b1_;
  eta_omega1_ = double(m22_) * eb1 - double(m12_) * eb2;
  eta_omega2_ = -double(m21_) * eb1 + double(m11_) * eb2;

  cache_.assign(k_max_ + 1, 0.0);
  for (int k = 2; k <= k_max_; ++k) cache_[k] = gn_[k] / std::pow(b1_, 2 * k);
}

cplx Lattice::eisenstein(int two_k) const {
  if (two_k % 2 != 0 || two_k < 4) fail(Errc::InvalidInput, "Eisenstein index must be even and >= 4");
  const int k = two_k / 2;
  if (k <= k_max_) return cache_[k];
  if (k < static_cast<int>(gn_.size())) return gn_[k] / std::pow(b1_, two_k);
  fail(Errc::InvalidInput, "Eisenstein index beyond the internal table");
}

double Lattice::area() const { return std::abs((std::conj(omega1_) * omega2_).imag()); }

void Lattice::coordinates(cplx z, double& a, double& b) const {
  a = (z * std::conj(omega2_)).imag() / (omega1_ * std::conj(omega2_)).imag();
  b = (z * std::conj(omega1_)).imag() / (omega2_ * std::conj(omega1_)).imag();
}

cplx Lattice::nearest_point(cplx z) const {
  long m = 0, n = 0;
  nearest_normalized(z / b1_, tau_, m, n);
  return double(m) * b1_ + double(n) * b2_;
}

bool Lattice::contains(cplx omega, double tol) const {
  return std::abs(omega - nearest_point(omega)) <= tol * std::max(1.0, std::abs(omega));
}

Lattice make_lattice(cplx omega1, cplx omega2, int k_max) { return Lattice(omega1, omega2, k_max); }

LatticePtr make_lattice_ptr(cplx omega1, cplx omega2, int k_max) {
  return std::make_shared<const Lattice>(omega1, omega2, k_max);
}

void weierstrass_all(const Lattice& L, cplx z, cplx& zeta, cplx& wp, cplx& wp_prime) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    fail(Errc::InvalidInput, "non-finite evaluation point");
  if (L.distance_to_lattice(z) < Lattice::kPoleEpsilon)
    fail(Errc::PoleAtLatticePoint, "point lies on the lattice");
  const cplx b1 = L.reduced_b1();
  const Values v = eval_normalized(L, z / b1);
  zeta = v.zeta / b1;
  wp = v.wp / (b1 * b1);
  wp_prime = v.wpp / (b1 * b1 * b1);
}

cplx zeta_eval(const Lattice& L, cplx z) {
  cplx a, b, c;
  weierstrass_all(L, z, a, b, c);
  return a;
}

cplx wp_eval(const Lattice& L, cplx z, int derivative) {
  if (derivative != 0 && derivative != 1) fail(Errc::InvalidInput, "derivative must be 0 or 1");
  cplx a, b, c;
  weierstrass_all(L, z, a, b, c);
  return derivative == 0 ? b : c;
}

cplx eta(const Lattice& L, cplx omega) {
  double a = 0, b = 0;
  L.coordinates(omega, a, b);
  const double ra = std::round(a), rb = std::round(b);
  const double tol = 1e-8 * std::max(1.0, std::abs(a) + std::abs(b));
  if (std::abs(a - ra) > tol || std::abs(b - rb) > tol)
    fail(Errc::NotLatticeVector, "argument is not a lattice vector");
  return ra * L.eta1() + rb * L.eta2();
}

LaurentSeries taylor_at(const Lattice& L, WeierstrassFn f, cplx z0, int N) {
  const cplx near = L.nearest_point(z0);
  if (std::abs(z0 - near) < Lattice::kPoleEpsilon) {
    // Principal part at a lattice point plus the regular Laurent tail.
    const int low = f == WeierstrassFn::zeta ? -1 : (f == WeierstrassFn::wp ? -2 : -3);
    if (N < low) return LaurentSeries::zero(N);
    std::vector<cplx> c(N - low + 1, 0.0);
    auto put = [&](int n, cplx v) {
      if (n >= low && n <= N) c[n - low] += v;
    };
    const cplx eta0 = near == cplx(0) ? cplx(0) : eta(L, near);
    switch (f) {
      case WeierstrassFn::zeta:
        put(-1, 1.0);
        put(0, eta0);
        for (int k = 2; 2 * k - 1 <= N; ++k) put(2 * k - 1, -L.eisenstein(2 * k));
        break;
      case WeierstrassFn::wp:
        put(-2, 1.0);
        for (int k = 2; 2 * k - 2 <= N; ++k) put(2 * k - 2, double(2 * k - 1) * L.eisenstein(2 * k));
        break;
      case WeierstrassFn::wp_prime:
        put(-3, -2.0);
        for (int k = 2; 2 * k - 3 <= N; ++k)
          put(2 * k - 3, double((2 * k - 1) * (2 * k - 2)) * L.eisenstein(2 * k));
        break;
    }
    return LaurentSeries(low, std::move(c), N);
  }

  cplx zv, pv, ppv;
  weierstrass_all(L, z0, zv, pv, ppv);
  const int M = std::max(N + 2, 2);
  std::vector<cplx> a(M + 1, 0.0);  // wp(z0+t) = sum a_n t^n
  a[0] = pv;
  a[1] = ppv;
  const cplx g2 = L.g2();
  for (int n = 0; n + 2 <= M; ++n) {
    cplx s = 0;
    for (int i = 0; i <= n; ++i) s += a[i] * a[n - i];
    s *= 6.0;
    if (n == 0) s -= g2 / 2.0;
    a[n + 2] = s / double((n + 2) * (n + 1));
  }
  if (N < 0) return LaurentSeries::zero(N);
  std::vector<cplx> c(N + 1, 0.0);
  switch (f) {
    case WeierstrassFn::wp:
      for (int n = 0; n <= N; ++n) c[n] = a[n];
      break;
    case WeierstrassFn::wp_prime:
      for (int n = 0; n <= N; ++n) c[n] = double(n + 1) * a[n + 1];
      break;
    case WeierstrassFn::zeta:
      c[0] = zv;
      for (int n = 1; n <= N; ++n) c[n] = -a[n - 1] / double(n);
      break;
  }
  return LaurentSeries(0, std::move(c), N);
}

cplx eisenstein_direct(const Lattice& L, int two_k, int R) {
  cplx s = 0;
  for (int m = -R; m <= R; ++m)
    for (int n = -R; n <= R; ++n) {
      if (m == 0 && n == 0) continue;
      s += std::pow(L.vector(m, n), -two_k);
    }
  return s;
}

cplx zeta_direct(const Lattice& L, cplx z, int R) {
  cplx s = 1.0 / z;
  for (int m = -R; m <= R; ++m)
    for (int n = -R; n <= R; ++n) {
      if (m == 0 && n == 0) continue;
      const cplx w = L.vector(m, n);
      s += 1.0 / (z - w) + 1.0 / w + z / (w * w);
    }
  return s;
}

}  // namespace ellipdiff
