#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ellipdiff/weierstrass.hpp"

namespace ellipdiff {

constexpr double kSpatialTol = 1e-9;

struct Window {
  double xmin = -1, xmax = 1, ymin = -1, ymax = 1;
  bool contains(cplx z) const;
  // At least `margin` inside every edge.
  bool interior(cplx z, double margin) const;
};

// A divisor restricted to a rectangular window; absent points carry multiplicity 0.
class DivisorSection {
 public:
  explicit DivisorSection(Window w = {});

  const Window& window() const { return window_; }
  // Adds mult at x (merging within kSpatialTol). Points outside the window are dropped and counted.
  void add(cplx x, long mult);
  void set(cplx x, long mult);
  long at(cplx x) const;
  bool empty() const { return size() == 0; }
  std::size_t size() const;
  int clipped() const { return clipped_; }
  // Nonzero entries sorted by (re, im).
  std::vector<std::pair<cplx, long>> support() const;

  DivisorSection operator+(const DivisorSection& o) const;
  DivisorSection operator-(const DivisorSection& o) const;
  bool operator==(const DivisorSection& o) const;

 private:
  struct Key {
    long long x, y;
    bool operator==(const Key& o) const { return x == o.x && y == o.y; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return std::hash<long long>()(k.x * 1000003LL ^ k.y); }
  };
  int find(cplx x) const;

  Window window_;
  std::vector<std::pair<cplx, long>> entries_;
  std::unordered_map<Key, std::vector<int>, KeyHash> grid_;
  int clipped_ = 0;
};

// m_p^*(s): multiplicity at x moves to p x.
DivisorSection pullback_scale(const DivisorSection& s, double p);

struct CocycleVerdict {
  bool pass = false;
  std::size_t mismatches = 0;
};
// pullback_scale(s, p) == divA + s on the window.
// Solves m_p^*(s) = divA + s on the window: s_x = -sum_{m>=0} divA_{x/p^m}, s_0 = origin_value.
// divA must vanish at 0.
DivisorSection section_from_recursion(const DivisorSection& divA, double p, long origin_value = 0);
CocycleVerdict cocycle_check(const DivisorSection& s, const DivisorSection& divA, double p);

// Lattice translations checked for periodicity: +-w1, +-w2, +-(w1 + w2), +-(w1 - w2).
std::vector<cplx> translation_set(const Lattice& L);

struct PeriodicityCheck {
  bool periodic = true;
  std::size_t mismatches = 0;
  std::size_t comparisons = 0;
};
// t_w-invariance for translations keeping both points inside the window (points within 1e-7 of an edge
// are not compared); `skip_origin` ignores 0.
PeriodicityCheck check_periodic(const DivisorSection& s, const Lattice& L, bool skip_origin = false);

struct ModificationResult {
  bool periodic = false;
  DivisorSection s_prime;
  cplx reference_period = 0;
  long old_origin = 0, new_origin = 0;
  PeriodicityCheck check;
};

// Throws HypothesisViolated when divA/divB are not periodic or a cocycle fails.
ModificationResult periodic_after_modification(const DivisorSection& s, const DivisorSection& divA,
                                               const DivisorSection& divB, int p, int q, const Lattice& L);

struct SEquivParams {
  std::vector<std::int64_t> primes;
  std::int64_t modulus = 1;
};

std::vector<std::int64_t> prime_divisors(std::int64_t n);
bool s_equivalent(const std::vector<std::int64_t>& u, const std::vector<std::int64_t>& v, const SEquivParams& P);

struct ClosureVerdict {
  bool equals_mod_n = false;
  std::size_t vertices = 0;
  std::size_t components = 0;
  std::size_t disconnected_pairs = 0;   // congruent box pairs left unconnected
  std::size_t noncongruent_merges = 0;  // never expected
};
// Equivalence generated by ~_S and ~_T over nonzero vectors with |entries| <= slack, d in {1, 2}.
ClosureVerdict closure_equals_modN(std::int64_t p, std::int64_t q, std::int64_t N, int d, std::int64_t box_bound,
                                   std::int64_t slack_bound, std::size_t vertex_budget = 5'000'000);

// Synthetic scenario: s is periodic for Lambda/(pq) with base points `bases`, origin class multiplicity
// `lattice_mult`, and s_0 overwritten by `origin_value`; divA, divB are derived from s.
struct Scenario {
  DivisorSection s, divA, divB;
  int p = 2, q = 3;
  LatticePtr L;
};
Scenario synthesize_scenario(const LatticePtr& L, int p, int q, const std::vector<std::pair<cplx, long>>& bases,
                             long lattice_mult, long origin_value, const Window& w);
// Five corrupted variants of a valid scenario; every one must be rejected.
std::vector<std::pair<std::string, Scenario>> corrupted_variants(const Scenario& sc);

nlohmann::json divisor_json(const DivisorSection& s);
DivisorSection divisor_from_json(const nlohmann::json& j, const Window& w);
nlohmann::json window_json(const Window& w);
Window window_from_json(const nlohmann::json& j);

}  // namespace ellipdiff
