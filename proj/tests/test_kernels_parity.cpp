#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "aclab/kernels.hpp"
#include "aclab/rng.hpp"

using namespace aclab::kernels;

namespace {

std::vector<double> rnd(std::size_t n, aclab::SplitMix64& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_uniform(-2.0, 2.0);
  return v;
}

}  // namespace

// The parallel kernels must be bit-identical to the serial reference: each
// output element is computed by exactly one thread with the same per-element
// reduction order.
TEST_CASE("conv2d kernels: parallel == serial bitwise") {
  set_threads(0);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    aclab::SplitMix64 rng(seed);
    const Conv2dDims d{5, 12, 10, 7, 3};
    const auto x = rnd(static_cast<std::size_t>(d.channels) * d.height * d.width, rng);
    const auto k = rnd(static_cast<std::size_t>(d.out_ch) * d.channels * d.ksize * d.ksize, rng);
    const auto b = rnd(static_cast<std::size_t>(d.out_ch), rng);
    const auto g = rnd(static_cast<std::size_t>(d.out_ch) * d.height * d.width, rng);

    std::vector<double> o1(g.size()), o2(g.size());
    serial::conv2d_fwd(x.data(), k.data(), b.data(), o1.data(), d);
    par::conv2d_fwd(x.data(), k.data(), b.data(), o2.data(), d);
    CHECK(o1 == o2);

    std::vector<double> dx1(x.size()), dx2(x.size());
    serial::conv2d_bwd_input(g.data(), k.data(), dx1.data(), d);
    par::conv2d_bwd_input(g.data(), k.data(), dx2.data(), d);
    CHECK(dx1 == dx2);

    std::vector<double> dk1(k.size()), dk2(k.size());
    serial::conv2d_bwd_kernel(g.data(), x.data(), dk1.data(), d);
    par::conv2d_bwd_kernel(g.data(), x.data(), dk2.data(), d);
    CHECK(dk1 == dk2);

    std::vector<double> db1(b.size()), db2(b.size());
    serial::conv2d_bwd_bias(g.data(), db1.data(), d);
    par::conv2d_bwd_bias(g.data(), db2.data(), d);
    CHECK(db1 == db2);
  }
}

TEST_CASE("pool/upsample/matvec kernels: parallel == serial bitwise") {
  set_threads(0);
  aclab::SplitMix64 rng(9);
  const ImageDims d{6, 8, 10};
  const auto x = rnd(static_cast<std::size_t>(d.channels) * d.height * d.width, rng);
  const auto gp = rnd(static_cast<std::size_t>(d.channels) * (d.height / 2) * (d.width / 2), rng);
  const auto gu = rnd(static_cast<std::size_t>(d.channels) * d.height * d.width * 4, rng);

  std::vector<double> a1(gp.size()), a2(gp.size());
  serial::pool_avg2_fwd(x.data(), a1.data(), d);
  par::pool_avg2_fwd(x.data(), a2.data(), d);
  CHECK(a1 == a2);

  std::vector<double> b1(x.size()), b2(x.size());
  serial::pool_avg2_bwd(gp.data(), b1.data(), d);
  par::pool_avg2_bwd(gp.data(), b2.data(), d);
  CHECK(b1 == b2);

  std::vector<double> u1(gu.size()), u2(gu.size());
  serial::upsample2_fwd(x.data(), u1.data(), d);
  par::upsample2_fwd(x.data(), u2.data(), d);
  CHECK(u1 == u2);

  std::vector<double> v1(x.size()), v2(x.size());
  serial::upsample2_bwd(gu.data(), v1.data(), d);
  par::upsample2_bwd(gu.data(), v2.data(), d);
  CHECK(v1 == v2);

  const int m = 9, n = 31;
  const auto w = rnd(static_cast<std::size_t>(m) * n, rng);
  const auto xv = rnd(n, rng);
  const auto bias = rnd(m, rng);
  const auto gm = rnd(m, rng);
  std::vector<double> f1(m), f2(m);
  serial::matvec_fwd(w.data(), xv.data(), bias.data(), f1.data(), m, n);
  par::matvec_fwd(w.data(), xv.data(), bias.data(), f2.data(), m, n);
  CHECK(f1 == f2);
  std::vector<double> dx1(n), dx2(n), dw1(w.size()), dw2(w.size());
  serial::matvec_bwd_input(gm.data(), w.data(), dx1.data(), m, n);
  par::matvec_bwd_input(gm.data(), w.data(), dx2.data(), m, n);
  CHECK(dx1 == dx2);
  serial::matvec_bwd_weight(gm.data(), xv.data(), dw1.data(), m, n);
  par::matvec_bwd_weight(gm.data(), xv.data(), dw2.data(), m, n);
  CHECK(dw1 == dw2);
}

TEST_CASE("dispatch honors the single-thread setting") {
  set_threads(1);
  aclab::SplitMix64 rng(4);
  const Conv2dDims d{8, 16, 16, 8, 3};
  const auto x = rnd(static_cast<std::size_t>(d.channels) * d.height * d.width, rng);
  const auto k = rnd(static_cast<std::size_t>(d.out_ch) * d.channels * d.ksize * d.ksize, rng);
  const auto b = rnd(static_cast<std::size_t>(d.out_ch), rng);
  std::vector<double> o1(static_cast<std::size_t>(d.out_ch) * d.height * d.width), o2(o1.size());
  conv2d_fwd(x.data(), k.data(), b.data(), o1.data(), d);
  serial::conv2d_fwd(x.data(), k.data(), b.data(), o2.data(), d);
  CHECK(o1 == o2);
  set_threads(0);
  conv2d_fwd(x.data(), k.data(), b.data(), o1.data(), d);
  CHECK(o1 == o2);
}
