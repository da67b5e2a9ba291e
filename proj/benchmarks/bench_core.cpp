#include <benchmark/benchmark.h>

#include <random>

#include "ellipdiff/descent.hpp"
#include "ellipdiff/formal.hpp"
#include "ellipdiff/periodicity.hpp"
#include "ellipdiff/series.hpp"
#include "ellipdiff/weierstrass.hpp"

using namespace ellipdiff;

namespace {

const Lattice& generic_lattice() {
  static const Lattice L = make_lattice(1.0, cplx(0.3, 1.1));
  return L;
}

void BM_ZetaEval(benchmark::State& st) {
  const Lattice& L = generic_lattice();
  cplx z(0.21, 0.37);
  for (auto _ : st) {
    benchmark::DoNotOptimize(zeta_eval(L, z));
    z += cplx(1e-7, 0);
  }
}
BENCHMARK(BM_ZetaEval);

void BM_WeierstrassAll(benchmark::State& st) {
  const Lattice& L = generic_lattice();
  cplx zeta, wp, wpp;
  for (auto _ : st) {
    weierstrass_all(L, cplx(0.21, 0.37), zeta, wp, wpp);
    benchmark::DoNotOptimize(wpp);
  }
}
BENCHMARK(BM_WeierstrassAll);

void BM_SeriesMul(benchmark::State& st) {
  const int N = int(st.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<cplx> a(N + 3), b(N + 3);
  for (auto& c : a) c = cplx(g(rng), g(rng));
  for (auto& c : b) c = cplx(g(rng), g(rng));
  const LaurentSeries x(-2, a, N), y(-1, b, N);
  for (auto _ : st) benchmark::DoNotOptimize(series_mul(x, y));
}
BENCHMARK(BM_SeriesMul)->Arg(20)->Arg(40)->Arg(80)->Arg(160);

void BM_ReduceSynthesized(benchmark::State& st) {
  const int r = int(st.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Matrix A0 = Matrix::Zero(r, r), B0 = Matrix::Zero(r, r);
  for (int i = 0; i < r; ++i) {
    A0(i, i) = cplx(1.1 + 0.17 * i, 0.05 * i);
    B0(i, i) = cplx(1.3 + 0.23 * i, -0.04 * i);
  }
  std::vector<Matrix> C;
  for (int k = 0; k < 3; ++k) {
    Matrix c(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) c(i, j) = cplx(u(rng), u(rng));
    C.push_back(c);
  }
  const SynthesizedPair S = synthesize_formal_pair(A0, B0, C, 2, 3, 40);
  for (auto _ : st) benchmark::DoNotOptimize(reduce_to_constants(S.A, S.B, 2, 3, 40));
}
BENCHMARK(BM_ReduceSynthesized)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Closure(benchmark::State& st) {
  const std::int64_t N = st.range(0);
  for (auto _ : st) benchmark::DoNotOptimize(closure_equals_modN(2, 3, N, 1, 30, 10000));
}
BENCHMARK(BM_Closure)->Arg(5)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_ExactScaling(benchmark::State& st) {
  ExactLaurentPoly g;
  for (int n = -4; n <= 4; ++n) g.set(n, GaussianRational{BigRational(n + 7, 3), BigRational(1, n + 9)});
  const GaussianRational t{BigRational(3), BigRational(1, 2)};
  for (auto _ : st) benchmark::DoNotOptimize(solve_scaling_equation(t, g, 2));
}
BENCHMARK(BM_ExactScaling);

}  // namespace

BENCHMARK_MAIN();
