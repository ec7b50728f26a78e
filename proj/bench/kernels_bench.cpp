// Serial vs OpenMP kernel comparison. Each case checks that the parallel
// result is bit-identical to the serial reference, then reports throughput.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>

#include "aclab/kernels.hpp"
#include "aclab/rng.hpp"

using aclab::kernels::Conv2dDims;

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::vector<double> random_vec(std::size_t n, aclab::SplitMix64& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_uniform(-1.0, 1.0);
  return v;
}

struct Case {
  const char* name;
  Conv2dDims d;
};

template <typename F>
double time_loop(F&& fn, int iters) {
  fn();  // warm up
  const double t0 = now_s();
  for (int i = 0; i < iters; ++i) fn();
  return (now_s() - t0) / iters;
}

}  // namespace

int main(int argc, char** argv) {
  int iters = 200;
  if (argc > 1) iters = std::atoi(argv[1]);

  const Case cases[] = {
      {"conv 8ch 16x16 k3 -> 16ch", {8, 16, 16, 16, 3}},
      {"conv 48ch 8x8 k3 -> 16ch", {48, 8, 8, 16, 3}},
      {"conv 32ch 64x64 k3 -> 32ch", {32, 64, 64, 32, 3}},
      {"conv 16ch 128x128 k3 -> 16ch", {16, 128, 128, 16, 3}},
  };

#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
#else
  const int max_threads = 1;
#endif
  std::printf("iters=%d max_threads=%d\n", iters, max_threads);
  std::printf("%-32s %12s %12s %8s %9s\n", "case", "serial us", "parallel us", "speedup",
              "bitexact");

  for (const auto& c : cases) {
    aclab::SplitMix64 rng(42);
    const auto x = random_vec(static_cast<std::size_t>(c.d.channels) * c.d.height * c.d.width, rng);
    const auto k = random_vec(
        static_cast<std::size_t>(c.d.out_ch) * c.d.channels * c.d.ksize * c.d.ksize, rng);
    const auto b = random_vec(static_cast<std::size_t>(c.d.out_ch), rng);
    std::vector<double> out_s(static_cast<std::size_t>(c.d.out_ch) * c.d.height * c.d.width);
    std::vector<double> out_p(out_s.size());

    const double ts = time_loop(
        [&] { aclab::kernels::serial::conv2d_fwd(x.data(), k.data(), b.data(), out_s.data(), c.d); },
        iters);
    aclab::kernels::set_threads(0);  // OpenMP default
    const double tp = time_loop(
        [&] { aclab::kernels::par::conv2d_fwd(x.data(), k.data(), b.data(), out_p.data(), c.d); },
        iters);
    const bool same = std::memcmp(out_s.data(), out_p.data(), out_s.size() * sizeof(double)) == 0;
    std::printf("%-32s %12.2f %12.2f %8.2fx %9s\n", c.name, ts * 1e6, tp * 1e6, ts / tp,
                same ? "yes" : "NO");
    if (!same) return 1;
  }

  // Backward kernels on the mid-size case.
  {
    const Conv2dDims d{32, 64, 64, 32, 3};
    aclab::SplitMix64 rng(7);
    const auto x = random_vec(static_cast<std::size_t>(d.channels) * d.height * d.width, rng);
    const auto k =
        random_vec(static_cast<std::size_t>(d.out_ch) * d.channels * d.ksize * d.ksize, rng);
    const auto g = random_vec(static_cast<std::size_t>(d.out_ch) * d.height * d.width, rng);
    std::vector<double> dk_s(k.size()), dk_p(k.size());
    const double ts = time_loop(
        [&] {
          std::fill(dk_s.begin(), dk_s.end(), 0.0);
          aclab::kernels::serial::conv2d_bwd_kernel(g.data(), x.data(), dk_s.data(), d);
        },
        iters);
    const double tp = time_loop(
        [&] {
          std::fill(dk_p.begin(), dk_p.end(), 0.0);
          aclab::kernels::par::conv2d_bwd_kernel(g.data(), x.data(), dk_p.data(), d);
        },
        iters);
    const bool same = std::memcmp(dk_s.data(), dk_p.data(), dk_s.size() * sizeof(double)) == 0;
    std::printf("%-32s %12.2f %12.2f %8.2fx %9s\n", "conv bwd-kernel 32ch 64x64", ts * 1e6,
                tp * 1e6, ts / tp, same ? "yes" : "NO");
    if (!same) return 1;
  }
  return 0;
}
