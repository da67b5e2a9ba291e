#include "ellipdiff/periodicity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ellipdiff/json_io.hpp"

namespace ellipdiff {

namespace {

constexpr double kCell = 1e-6;
constexpr double kEdgeMargin = 1e-7;

bool is_origin(cplx z) { return std::abs(z) <= kSpatialTol; }

std::int64_t ord(std::int64_t u, std::int64_t prime) {
  std::int64_t e = 0;
  while (u % prime == 0) {
    u /= prime;
    ++e;
  }
  return e;
}

std::int64_t mod(std::int64_t a, std::int64_t n) { return ((a % n) + n) % n; }

// (ord_{p_i}(u))_i followed by the deprived part mod N.
void append_key(std::int64_t u, const std::vector<std::int64_t>& primes, std::int64_t N, std::vector<std::int64_t>& key) {
  for (std::int64_t pr : primes) {
    const std::int64_t e = ord(u, pr);
    key.push_back(e);
    for (std::int64_t k = 0; k < e; ++k) u /= pr;
  }
  key.push_back(mod(u, N));
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

bool Window::contains(cplx z) const {
  return z.real() >= xmin && z.real() <= xmax && z.imag() >= ymin && z.imag() <= ymax;
}

bool Window::interior(cplx z, double margin) const {
  return z.real() >= xmin + margin && z.real() <= xmax - margin && z.imag() >= ymin + margin &&
         z.imag() <= ymax - margin;
}

DivisorSection::DivisorSection(Window w) : window_(w) {
  if (!(w.xmin < w.xmax && w.ymin < w.ymax)) fail(Errc::InvalidInput, "empty window");
}

int DivisorSection::find(cplx x) const {
  const long long kx = static_cast<long long>(std::floor(x.real() / kCell));
  const long long ky = static_cast<long long>(std::floor(x.imag() / kCell));
  for (long long dx = -1; dx <= 1; ++dx)
    for (long long dy = -1; dy <= 1; ++dy) {
      const auto it = grid_.find(Key{kx + dx, ky + dy});
      if (it == grid_.end()) continue;
      for (int i : it->second)
        if (std::abs(entries_[i].first - x) <= kSpatialTol) return i;
    }
  return -1;
}

void DivisorSection::add(cplx x, long mult) {
  if (!window_.contains(x)) {
    if (mult != 0) ++clipped_;
    return;
  }
  if (mult == 0) return;
  const int i = find(x);
  if (i >= 0) {
    entries_[i].second += mult;
    return;
  }
  const Key k{static_cast<long long>(std::floor(x.real() / kCell)), static_cast<long long>(std::floor(x.imag() / kCell))};
  grid_[k].push_back(static_cast<int>(entries_.size()));
  entries_.emplace_back(x, mult);
}

void DivisorSection::set(cplx x, long mult) { add(x, mult - at(x)); }

long DivisorSection::at(cplx x) const {
  const int i = find(x);
  return i >= 0 ? entries_[i].second : 0;
}

std::size_t DivisorSection::size() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.second != 0; }));
}

std::vector<std::pair<cplx, long>> DivisorSection::support() const {
  std::vector<std::pair<cplx, long>> out;
  for (const auto& e : entries_)
    if (e.second != 0) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (std::abs(a.first.real() - b.first.real()) > kSpatialTol) return a.first.real() < b.first.real();
    return a.first.imag() < b.first.imag();
  });
  return out;
}

DivisorSection DivisorSection::operator+(const DivisorSection& o) const {
  DivisorSection r = *this;
  for (const auto& [x, m] : o.entries_) r.add(x, m);
  return r;
}

DivisorSection DivisorSection::operator-(const DivisorSection& o) const {
  DivisorSection r = *this;
  for (const auto& [x, m] : o.entries_) r.add(x, -m);
  return r;
}

bool DivisorSection::operator==(const DivisorSection& o) const { return (*this - o).empty(); }

DivisorSection pullback_scale(const DivisorSection& s, double p) {
  DivisorSection r(s.window());
  for (const auto& [x, m] : s.support()) r.add(p * x, m);
  return r;
}

DivisorSection section_from_recursion(const DivisorSection& divA, double p, long origin_value) {
  if (p <= 1) fail(Errc::InvalidInput, "recursion needs p > 1");
  DivisorSection s(divA.window());
  for (const auto& [y, m] : divA.support()) {
    if (is_origin(y)) fail(Errc::HypothesisViolated, "divA has a point at the origin; no section solves the cocycle");
    for (cplx x = y; divA.window().contains(x); x *= p) s.add(x, -m);
  }
  s.set(0.0, origin_value);
  return s;
}

CocycleVerdict cocycle_check(const DivisorSection& s, const DivisorSection& divA, double p) {
  const DivisorSection d = pullback_scale(s, p) - divA - s;
  return {d.empty(), d.size()};
}

std::vector<cplx> translation_set(const Lattice& L) {
  const cplx a = L.omega1(), b = L.omega2();
  return {a, -a, b, -b, a + b, -a - b, a - b, b - a};
}

PeriodicityCheck check_periodic(const DivisorSection& s, const Lattice& L, bool skip_origin) {
  PeriodicityCheck c;
  const auto shifts = translation_set(L);
  for (const auto& [x, m] : s.support()) {
    if ((skip_origin && is_origin(x)) || !s.window().interior(x, kEdgeMargin)) continue;
    for (cplx w : shifts) {
      const cplx y = x + w;
      if (!s.window().interior(y, kEdgeMargin) || (skip_origin && is_origin(y))) continue;
      ++c.comparisons;
      if (s.at(y) != m) ++c.mismatches;
    }
  }
  c.periodic = c.mismatches == 0;
  return c;
}

ModificationResult periodic_after_modification(const DivisorSection& s, const DivisorSection& divA,
                                               const DivisorSection& divB, int p, int q, const Lattice& L) {
  if (p < 2 || q < 2 || std::gcd(p, q) != 1) fail(Errc::NonCoprime, "p and q must be coprime integers >= 2");
  if (!check_periodic(divA, L).periodic) fail(Errc::HypothesisViolated, "divA is not periodic on the window");
  if (!check_periodic(divB, L).periodic) fail(Errc::HypothesisViolated, "divB is not periodic on the window");
  if (const auto c = cocycle_check(s, divA, p); !c.pass)
    fail(Errc::HypothesisViolated, "m_p^*(s) != divA + s at " + std::to_string(c.mismatches) + " points");
  if (const auto c = cocycle_check(s, divB, q); !c.pass)
    fail(Errc::HypothesisViolated, "m_q^*(s) != divB + s at " + std::to_string(c.mismatches) + " points");
  ModificationResult r;
  bool found = false;
  for (cplx w : translation_set(L))
    if (s.window().contains(w)) {
      r.reference_period = w;
      found = true;
      break;
    }
  if (!found) fail(Errc::HypothesisViolated, "window contains no nonzero period");
  r.s_prime = s;
  r.old_origin = s.at(0.0);
  r.new_origin = s.at(r.reference_period);
  r.s_prime.set(0.0, r.new_origin);
  r.check = check_periodic(r.s_prime, L);
  r.periodic = r.check.periodic;
  return r;
}

std::vector<std::int64_t> prime_divisors(std::int64_t n) {
  if (n < 2) fail(Errc::InvalidInput, "prime_divisors needs n >= 2");
  std::vector<std::int64_t> out;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  if (n > 1) out.push_back(n);
  return out;
}

bool s_equivalent(const std::vector<std::int64_t>& u, const std::vector<std::int64_t>& v, const SEquivParams& P) {
  if (u.size() != v.size()) fail(Errc::DimensionMismatch, "vectors differ in length");
  if (P.primes.empty() || P.modulus < 1) fail(Errc::InvalidInput, "need a nonempty prime set and N >= 1");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0 || v[i] == 0) {
      if (u[i] != v[i]) return false;
      continue;
    }
    std::vector<std::int64_t> ku, kv;
    append_key(u[i], P.primes, P.modulus, ku);
    append_key(v[i], P.primes, P.modulus, kv);
    if (ku != kv) return false;
  }
  return true;
}

ClosureVerdict closure_equals_modN(std::int64_t p, std::int64_t q, std::int64_t N, int d, std::int64_t box_bound,
                                   std::int64_t slack_bound, std::size_t vertex_budget) {
  if (d != 1 && d != 2) fail(Errc::InvalidInput, "closure is implemented for d = 1, 2");
  if (N < 1 || box_bound < 1 || slack_bound < box_bound) fail(Errc::InvalidInput, "need N >= 1 and slack >= box >= 1");
  const std::vector<std::int64_t> S = prime_divisors(p), T = prime_divisors(q);
  const std::size_t side = static_cast<std::size_t>(2 * slack_bound);
  const std::size_t count = d == 1 ? side : side * side;
  if (count > vertex_budget) fail(Errc::BudgetExceeded, "closure needs " + std::to_string(count) + " vertices");

  auto value = [&](std::size_t i) { return i < std::size_t(slack_bound) ? -slack_bound + std::int64_t(i) : std::int64_t(i) - slack_bound + 1; };
  auto coords = [&](std::size_t v) {
    std::vector<std::int64_t> c;
    if (d == 1) {
      c.push_back(value(v));
    } else {
      c.push_back(value(v / side));
      c.push_back(value(v % side));
    }
    return c;
  };
  UnionFind uf(count);
  for (const auto* primes : {&S, &T}) {
    std::map<std::vector<std::int64_t>, std::size_t> first;
    for (std::size_t v = 0; v < count; ++v) {
      std::vector<std::int64_t> key;
      for (std::int64_t x : coords(v)) append_key(x, *primes, N, key);
      const auto [it, inserted] = first.emplace(std::move(key), v);
      if (!inserted) uf.unite(v, it->second);
    }
  }
  ClosureVerdict out;
  out.vertices = count;
  std::map<std::size_t, std::vector<std::int64_t>> residue_of_root;
  std::map<std::vector<std::int64_t>, std::map<std::size_t, std::size_t>> box_classes;
  for (std::size_t v = 0; v < count; ++v) {
    const auto c = coords(v);
    std::vector<std::int64_t> res;
    for (std::int64_t x : c) res.push_back(mod(x, N));
    const std::size_t root = uf.find(v);
    const auto [it, inserted] = residue_of_root.emplace(root, res);
    if (!inserted && it->second != res) ++out.noncongruent_merges;
    if (std::all_of(c.begin(), c.end(), [&](std::int64_t x) { return std::llabs(x) <= box_bound; }))
      ++box_classes[res][root];
  }
  out.components = residue_of_root.size();
  for (const auto& [res, roots] : box_classes) {
    std::size_t total = 0, same = 0;
    for (const auto& [root, n] : roots) {
      total += n;
      same += n * (n - 1) / 2;
    }
    out.disconnected_pairs += total * (total - 1) / 2 - same;
  }
  out.equals_mod_n = out.disconnected_pairs == 0;
  return out;
}

Scenario synthesize_scenario(const LatticePtr& L, int p, int q, const std::vector<std::pair<cplx, long>>& bases,
                             long lattice_mult, long origin_value, const Window& w) {
  Scenario sc{DivisorSection(w), DivisorSection(w), DivisorSection(w), p, q, L};
  const double M = double(p) * q;
  const cplx b1 = L->omega1() / M, b2 = L->omega2() / M;
  // coordinate range of the window in the basis (b1, b2)
  double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
  for (cplx c : {cplx(w.xmin, w.ymin), cplx(w.xmin, w.ymax), cplx(w.xmax, w.ymin), cplx(w.xmax, w.ymax)}) {
    double a, b;
    L->coordinates(c, a, b);
    amin = std::min(amin, a * M);
    amax = std::max(amax, a * M);
    bmin = std::min(bmin, b * M);
    bmax = std::max(bmax, b * M);
  }
  std::vector<std::pair<cplx, long>> all = bases;
  if (lattice_mult != 0) all.emplace_back(0.0, lattice_mult);
  for (const auto& [base, m] : all)
    for (long i = long(std::floor(amin)) - 2; i <= long(std::ceil(amax)) + 2; ++i)
      for (long j = long(std::floor(bmin)) - 2; j <= long(std::ceil(bmax)) + 2; ++j) {
        const cplx x = base + double(i) * b1 + double(j) * b2;
        if (w.contains(x)) sc.s.add(x, m);
      }
  sc.s.set(0.0, origin_value);
  sc.divA = pullback_scale(sc.s, p) - sc.s;
  sc.divB = pullback_scale(sc.s, q) - sc.s;
  return sc;
}

std::vector<std::pair<std::string, Scenario>> corrupted_variants(const Scenario& sc) {
  std::vector<std::pair<std::string, Scenario>> out;
  const cplx off = cplx(0.137, 0.0711) * sc.L->min_period();
  const auto supp = sc.s.support();
  cplx some = off;
  for (const auto& [x, m] : supp)
    if (!is_origin(x)) {
      some = x;
      break;
    }

  Scenario a = sc;
  a.s.add(off, 1);
  out.emplace_back("extra_point", a);

  Scenario b = sc;
  const long mb = b.s.at(some);
  b.s.set(some, 0);
  b.s.add(some + 1e-3, mb);
  out.emplace_back("perturbed_point", b);

  Scenario c = sc;
  c.divA.add(off, 1);
  out.emplace_back("nonperiodic_divA", c);

  Scenario d = sc;
  const auto sb = d.divB.support();
  if (!sb.empty()) d.divB.set(sb[sb.size() / 2].first, 0);
  else d.divB.add(off, -1);
  out.emplace_back("dropped_divB_point", d);

  Scenario e = sc;
  e.s.add(off, 2);
  e.divA = pullback_scale(e.s, e.p) - e.s;
  e.divB = pullback_scale(e.s, e.q) - e.s;
  out.emplace_back("consistent_extra_point", e);
  return out;
}

nlohmann::json divisor_json(const DivisorSection& s) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [x, m] : s.support()) a.push_back({complex_json(x), m});
  return a;
}

DivisorSection divisor_from_json(const nlohmann::json& j, const Window& w) {
  if (!j.is_array()) fail(Errc::Schema, "divisor must be an array of [[re,im], mult]");
  DivisorSection s(w);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[1].is_number_integer())
      fail(Errc::Schema, "divisor entries are [[re,im], mult]");
    s.add(complex_from_json(e[0]), e[1].get<long>());
  }
  return s;
}

nlohmann::json window_json(const Window& w) {
  return {{"xmin", w.xmin}, {"xmax", w.xmax}, {"ymin", w.ymin}, {"ymax", w.ymax}};
}

Window window_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(Errc::Schema, "window must be an object");
  Window w;
  try {
    w.xmin = j.at("xmin").get<double>();
    w.xmax = j.at("xmax").get<double>();
    w.ymin = j.at("ymin").get<double>();
    w.ymax = j.at("ymax").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::Schema, std::string("window: ") + e.what());
  }
  if (!(w.xmin < 0 && w.xmax > 0 && w.ymin < 0 && w.ymax > 0)) fail(Errc::Schema, "window must contain 0 in its interior");
  return w;
}

}  // namespace ellipdiff
