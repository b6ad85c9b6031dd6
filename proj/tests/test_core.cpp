// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "pnprl/core/fft.hpp"
#include "pnprl/core/image_io.hpp"
#include "pnprl/core/kernels.hpp"
#include "pnprl/core/npy.hpp"
#include "pnprl/core/parallel.hpp"
#include "test_util.hpp"

using namespace pnprl;
using testutil::random_cimage;
using testutil::random_image;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace

TEST_CASE("kernel lanes agree: gemm vs scalar reference") {
  const auto& sc = kern::scalar_kernels();
  const auto& vx = kern::avx2_kernels();
  if (!kern::cpu_has_avx2()) return;  // nothing to compare on this host

  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + static_cast<int>(rng.index(40));
    const int n = 1 + static_cast<int>(rng.index(70));
    const int k = 1 + static_cast<int>(rng.index(50));
    const auto a = random_vec(static_cast<std::size_t>(m) * k, 100 + trial);
    const auto b = random_vec(static_cast<std::size_t>(k) * n, 200 + trial);
    auto c1 = random_vec(static_cast<std::size_t>(m) * n, 300 + trial);
    auto c2 = c1;
    const double alpha = rng.uniform(-2.0, 2.0);
    const double beta = trial % 3 == 0 ? 0.0 : rng.uniform(-1.0, 1.0);
    sc.gemm(m, n, k, alpha, a.data(), k, b.data(), n, beta, c1.data(), n);
    vx.gemm(m, n, k, alpha, a.data(), k, b.data(), n, beta, c2.data(), n);
    for (std::size_t i = 0; i < c1.size(); ++i)
      CHECK(std::abs(c1[i] - c2[i]) < 1e-11 * (1.0 + std::abs(c1[i])));
  }
}

TEST_CASE("kernel lanes agree: elementwise, reductions, adam, complex") {
  if (!kern::cpu_has_avx2()) return;
  const auto& sc = kern::scalar_kernels();
  const auto& vx = kern::avx2_kernels();
  const std::size_t n = 1037;  // odd length exercises the tails
  const auto x = random_vec(n, 1);
  const auto y = random_vec(n, 2);

  std::vector<double> o1(n), o2(n);
  sc.add(x.data(), y.data(), o1.data(), n);
  vx.add(x.data(), y.data(), o2.data(), n);
  CHECK(o1 == o2);
  sc.sub(x.data(), y.data(), o1.data(), n);
  vx.sub(x.data(), y.data(), o2.data(), n);
  CHECK(o1 == o2);
  sc.mul(x.data(), y.data(), o1.data(), n);
  vx.mul(x.data(), y.data(), o2.data(), n);
  CHECK(o1 == o2);

  o1 = y;
  o2 = y;
  sc.axpy(0.37, x.data(), o1.data(), n);
  vx.axpy(0.37, x.data(), o2.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-14));

  CHECK(testutil::rel_err(vx.dot(x.data(), y.data(), n),
                          sc.dot(x.data(), y.data(), n)) < 1e-12);
  CHECK(testutil::rel_err(vx.sum(x.data(), n), sc.sum(x.data(), n)) < 1e-12);
  CHECK(testutil::rel_err(vx.sumsq_diff(x.data(), y.data(), n),
                          sc.sumsq_diff(x.data(), y.data(), n)) < 1e-12);

  // adam
  auto w1 = random_vec(n, 3), w2 = w1;
  auto m1 = random_vec(n, 4), m2 = m1;
  auto v1 = x, v2 = x;
  for (auto& v : v1) v = std::abs(v);
  v2 = v1;
  sc.adam_step(w1.data(), m1.data(), v1.data(), y.data(), n, 1e-3, 0.9, 0.999,
               1e-8, 0.1, 0.01);
  vx.adam_step(w2.data(), m2.data(), v2.data(), y.data(), n, 1e-3, 0.9, 0.999,
               1e-8, 0.1, 0.01);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(w1[i] - w2[i]) < 1e-13 * (1.0 + std::abs(w1[i])));

  auto t1 = random_vec(n, 5), t2 = t1;
  sc.ema(t1.data(), x.data(), 0.005, n);
  vx.ema(t2.data(), x.data(), 0.005, n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(t1[i] == doctest::Approx(t2[i]).epsilon(1e-14));

  std::vector<std::complex<double>> z(n), zo1(n), zo2(n);
  Rng rng(6);
  for (auto& c : z) c = rng.complex_gaussian();
  sc.zscale_real(z.data(), x.data(), zo1.data(), n);
  vx.zscale_real(z.data(), x.data(), zo2.data(), n);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(zo1[i] - zo2[i]) == 0.0);
}

TEST_CASE("rng: deterministic and sane moments") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.u64() == b.u64());
  Rng g(7);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = g.gaussian();
    mean += xs[i];
  }
  mean /= n;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);

  Rng c1 = Rng::child(9, {1, 2});
  Rng c2 = Rng::child(9, {1, 2});
  Rng c3 = Rng::child(9, {2, 1});
  CHECK(c1.u64() == c2.u64());
  CHECK(c1.u64() != c3.u64());
}

TEST_CASE("fft: unitary round trip and impulse") {
  const CImage x = random_cimage(24, 40, 5);
  const CImage back = ifft2(fft2(x));
  for (std::size_t i = 0; i < x.v.size(); ++i)
    CHECK(std::abs(back.v[i] - x.v[i]) < 1e-12);

  CImage impulse(16, 16);
  impulse.at(0, 0) = 1.0;
  const CImage f = fft2(impulse);
  for (const auto& z : f.v) CHECK(std::abs(z - 1.0 / 16.0) < 1e-13);
}

TEST_CASE("npy: round trips for f8 and u1") {
  const std::string dir = "build/test_tmp";
  std::filesystem::create_directories(dir);
  Tensor t = random_image(7, 9, 3);
  npy_save(dir + "/a.npy", t);
  const Tensor back = npy_load(dir + "/a.npy");
  REQUIRE(back.shape() == t.shape());
  for (std::size_t i = 0; i < t.numel(); ++i) CHECK(back[i] == t[i]);

  std::vector<std::uint8_t> m(12 * 5, 0);
  m[3] = 1;
  m[59] = 1;
  npy_save_u8(dir + "/m.npy", m, 12, 5);
  const Tensor mb = npy_load(dir + "/m.npy");
  CHECK(mb.dim(0) == 12);
  CHECK(mb[3] == 1.0);
  CHECK(mb[59] == 1.0);
  CHECK(mb[0] == 0.0);
}

TEST_CASE("image io: pgm and png round trips") {
  const std::string dir = "build/test_tmp";
  std::filesystem::create_directories(dir);
  Tensor img = random_image(19, 23, 11);
  save_pgm(dir + "/x.pgm", img);
  const Tensor pgm = load_gray(dir + "/x.pgm");
  REQUIRE(pgm.shape() == img.shape());
  for (std::size_t i = 0; i < img.numel(); ++i)
    CHECK(std::abs(pgm[i] - img[i]) < 0.5 / 255.0 + 1e-12);

  save_png(dir + "/x.png", img);
  const Tensor png = load_gray(dir + "/x.png");
  for (std::size_t i = 0; i < img.numel(); ++i)
    CHECK(std::abs(png[i] - img[i]) < 0.5 / 255.0 + 1e-12);

  save_pgm16(dir + "/x16.pgm", img);
  const Tensor pgm16 = load_gray(dir + "/x16.pgm");
  for (std::size_t i = 0; i < img.numel(); ++i)
    CHECK(std::abs(pgm16[i] - img[i]) < 0.5 / 65535.0 + 1e-12);
}

TEST_CASE("resize and crop") {
  Tensor img = random_image(16, 16, 2);
  const Tensor up = resize_bilinear(img, 32, 32);
  CHECK(up.dim(0) == 32);
  CHECK(up[0] == doctest::Approx(img[0]));
  const Tensor crop = center_crop(img, 8, 8);
  CHECK(crop.at(0, 0) == img.at(4, 4));
}

TEST_CASE("parallel_for covers the range exactly once") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (int h : hits) CHECK(h == 1);
}
