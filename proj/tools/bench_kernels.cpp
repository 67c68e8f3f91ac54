// Benchmark of the spinalg kernels: serial reference vs the OpenMP
// split-plane path, plus the channel-application inner loop.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "dnp/engine.hpp"
#include "dnp/kernels.hpp"
#include "dnp/rng.hpp"

using dnp::spinalg::ComplexMatrix;
using dnp::spinalg::cxd;

namespace {

ComplexMatrix random_matrix(int n, std::uint64_t seed) {
  dnp::rng::Engine eng(seed);
  ComplexMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = cxd{2.0 * dnp::rng::uniform01(eng) - 1.0, 2.0 * dnp::rng::uniform01(eng) - 1.0};
  return m;
}

template <typename F>
double time_best_of(F&& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    best = std::min(best, dt);
  }
  return best;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%6s %14s %14s %10s %12s\n", "dim", "serial [ms]", "parallel [ms]", "speedup",
              "GFLOP/s");

  for (int n : {64, 128, 256, 512, 1024}) {
    const ComplexMatrix a = random_matrix(n, 11 + n);
    const ComplexMatrix b = random_matrix(n, 23 + n);
    const int reps = n <= 256 ? 5 : 3;

    ComplexMatrix keep(n);
    const double t_serial =
        time_best_of([&] { keep = dnp::spinalg::multiply_serial(a, b); }, reps);
    const double t_par = time_best_of([&] { keep = dnp::spinalg::multiply(a, b); }, reps);
    const double flops = 8.0 * static_cast<double>(n) * n * n;
    std::printf("%6d %14.3f %14.3f %9.2fx %12.2f\n", n, t_serial * 1e3, t_par * 1e3,
                t_serial / t_par, flops / t_par / 1e9);

    // consistency guard so the comparison stays honest
    const double err = dnp::spinalg::max_abs_diff(dnp::spinalg::multiply_serial(a, b),
                                                  dnp::spinalg::multiply(a, b));
    if (err > 1e-10 * n) {
      std::printf("kernel mismatch at n=%d: %g\n", n, err);
      return 1;
    }
  }

  // channel application at the 9-spin register size used by the larger runs
  {
    const int n = 512;
    dnp::sequences::ChannelKraus ch;
    ch.source = "bench";
    ComplexMatrix k0 = random_matrix(n, 5);
    ComplexMatrix k1 = random_matrix(n, 7);
    for (std::size_t i = 0; i < k0.size(); ++i) {
      k0.data()[i] *= 0.02;
      k1.data()[i] *= 0.02;
    }
    ch.operators = {k0, k1};
    ComplexMatrix rho = dnp::engine::initial_nuclear_state(9);
    const double t = time_best_of(
        [&] {
          ComplexMatrix acc(n);
          for (const auto& k : ch.operators)
            dnp::spinalg::add_in_place(acc, dnp::spinalg::sandwich(k, rho));
          rho = std::move(acc);
        },
        3);
    std::printf("\nchannel step (2 Kraus, n=%d): %.1f ms -> %.1f s per 5000 reps\n", n, t * 1e3,
                t * 5000.0);
  }
  return 0;
}
