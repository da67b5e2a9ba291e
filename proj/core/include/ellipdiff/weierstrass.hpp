#pragma once

#include <memory>
#include <vector>

#include "ellipdiff/error.hpp"
#include "ellipdiff/types.hpp"

namespace ellipdiff {

class LaurentSeries;

enum class WeierstrassFn { zeta, wp, wp_prime };

// Oriented lattice Z*omega1 + Z*omega2 with cached Eisenstein invariants.
//
// Internally the basis is Gauss-reduced to (b1, b2) with tau = b2/b1 in the
// standard fundamental domain; evaluation happens on the normalized lattice
// Z + tau*Z and is rescaled by homogeneity.
class Lattice {
 public:
  static constexpr int kDefaultKMax = 12;
  static constexpr double kPoleEpsilon = 1e-8;

  Lattice(cplx omega1, cplx omega2, int k_max = kDefaultKMax);

  cplx omega1() const { return omega1_; }
  cplx omega2() const { return omega2_; }
  int k_max() const { return k_max_; }

  cplx g2() const { return 60.0 * eisenstein(4); }
  cplx g3() const { return 140.0 * eisenstein(6); }
  // G_{2k} = sum' omega^{-2k}; valid for even 4 <= two_k <= 2*k_max.
  cplx eisenstein(int two_k) const;
  // Quasi-periods of the user basis.
  cplx eta1() const { return eta_omega1_; }
  cplx eta2() const { return eta_omega2_; }

  double min_period() const { return std::abs(b1_); }
  double area() const;
  cplx vector(long m, long n) const { return double(m) * omega1_ + double(n) * omega2_; }
  // Coordinates of z in the user basis (real).
  void coordinates(cplx z, double& a, double& b) const;
  // Nearest lattice point to z.
  cplx nearest_point(cplx z) const;
  double distance_to_lattice(cplx z) const { return std::abs(z - nearest_point(z)); }
  bool contains(cplx omega, double tol = 1e-8) const;

  // Reduced-basis internals, exposed for evaluation kernels.
  cplx reduced_b1() const { return b1_; }
  cplx reduced_tau() const { return tau_; }
  const std::vector<cplx>& normalized_eisenstein() const { return gn_; }
  cplx normalized_eta1() const { return etan1_; }
  cplx normalized_eta2() const { return etan2_; }
  double normalized_abs_sum4() const { return abs_sum4_; }

 private:
  cplx omega1_, omega2_;
  int k_max_;
  cplx b1_, b2_, tau_;
  long m11_, m12_, m21_, m22_;  // (b1,b2) = M (omega1,omega2)
  std::vector<cplx> gn_;        // gn_[k] = G_{2k}(Z + tau Z), k >= 2
  std::vector<cplx> cache_;     // user-level G_{2k}, k = 2..k_max
  double abs_sum4_ = 0;
  cplx etan1_, etan2_;
  cplx eta_omega1_, eta_omega2_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

// Swaps the generators when the input basis is negatively oriented.
Lattice make_lattice(cplx omega1, cplx omega2, int k_max = Lattice::kDefaultKMax);
LatticePtr make_lattice_ptr(cplx omega1, cplx omega2, int k_max = Lattice::kDefaultKMax);

cplx zeta_eval(const Lattice& L, cplx z);
cplx wp_eval(const Lattice& L, cplx z, int derivative = 0);
// Evaluates zeta, wp and wp' together (shared reduction).
void weierstrass_all(const Lattice& L, cplx z, cplx& zeta, cplx& wp, cplx& wp_prime);
cplx eta(const Lattice& L, cplx omega);

// Expansion of f(z0 + t) in t through t^N.
LaurentSeries taylor_at(const Lattice& L, WeierstrassFn f, cplx z0, int N);

// Slow reference evaluations by truncated lattice sums, for testing.
cplx eisenstein_direct(const Lattice& L, int two_k, int R);
cplx zeta_direct(const Lattice& L, cplx z, int R);

}  // namespace ellipdiff
