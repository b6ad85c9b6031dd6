// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "pnprl/core/fft.hpp"
#include "test_util.hpp"

using namespace pnprl;
using testutil::random_cimage;

TEST_CASE("make_mask: full sampling, rate tolerance, DC coverage") {
  const auto full = fm::make_mask(128, 128, fm::MaskPattern::kRadial, 1.0, 0);
  CHECK(full.sampled_count() == 128u * 128u);

  const auto radial = fm::make_mask(128, 128, fm::MaskPattern::kRadial, 0.20, 0);
  CHECK(radial.measured_rate() >= 0.19);
  CHECK(radial.measured_rate() <= 0.21);
  CHECK(radial.at(0, 0) == 1);  // DC in DFT indexing

  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    for (double rate : {0.5, 0.25, 0.125}) {
      const auto m = fm::make_mask(64, 64, fm::MaskPattern::kRadial, rate, seed);
      CHECK(std::abs(m.measured_rate() - rate) <= 0.01);
      CHECK(m.at(0, 0) == 1);
      const auto u =
          fm::make_mask(64, 64, fm::MaskPattern::kUniformRandom, rate, seed);
      CHECK(std::abs(u.measured_rate() - rate) <= 0.01);
      CHECK(u.at(0, 0) == 1);
    }
  }

  CHECK(fm::accel_to_rate(4.0) == doctest::Approx(0.25));
  CHECK_THROWS(fm::make_mask(64, 64, fm::MaskPattern::kRadial, 0.0, 0));
  CHECK_THROWS(fm::make_mask(64, 64, fm::MaskPattern::kRadial, 1.5, 0));

  // deterministic per seed
  const auto a = fm::make_mask(64, 64, fm::MaskPattern::kRadial, 0.3, 9);
  const auto b = fm::make_mask(64, 64, fm::MaskPattern::kRadial, 0.3, 9);
  CHECK(a.mask == b.mask);
}

TEST_CASE("mask persistence round trip") {
  const std::string dir = "build/test_tmp";
  std::filesystem::create_directories(dir);
  const auto m = fm::make_mask(32, 48, fm::MaskPattern::kUniformRandom, 0.4, 5);
  fm::save_mask(dir + "/mask.npy", m);
  const auto back = fm::load_mask(dir + "/mask.npy");
  CHECK(back.mask == m.mask);
  CHECK(back.target_rate == doctest::Approx(0.4));
  CHECK(back.seed == 5);
  CHECK(back.pattern == fm::MaskPattern::kUniformRandom);
}

TEST_CASE("csmri forward/adjoint: impulse, zero, unitarity") {
  const auto model = testutil::csmri_model(16, 16, 1.0, 0.0);

  CImage zero(16, 16);
  const CImage fz = fm::csmri_forward(zero, model);
  for (const auto& z : fz.v) CHECK(std::abs(z) == 0.0);

  CImage impulse(16, 16);
  impulse.at(0, 0) = 1.0;
  const CImage fi = fm::csmri_forward(impulse, model);
  for (const auto& z : fi.v) CHECK(std::abs(std::abs(z) - 1.0 / 16.0) < 1e-13);

  const CImage x = random_cimage(16, 16, 3);
  const CImage roundtrip = fm::csmri_adjoint(fm::csmri_forward(x, model), model);
  for (std::size_t i = 0; i < x.v.size(); ++i)
    CHECK(std::abs(roundtrip.v[i] - x.v[i]) < 1e-10);
}

TEST_CASE("csmri adjoint identity over random trials") {
  const auto model = testutil::csmri_model(32, 32, 0.25, 0.0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const CImage x = random_cimage(32, 32, 1000 + trial);
    const CImage y = random_cimage(32, 32, 2000 + trial);
    const auto lhs = inner(fm::csmri_forward(x, model), y);
    const auto rhs = inner(x, fm::csmri_adjoint(y, model));
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }

  const auto empty_mask = [] {
    fm::CsmriModel m = testutil::csmri_model(16, 16, 0.125, 0.0, 3);
    for (auto& v : m.mask.mask) v = 0;
    return m;
  }();
  const CImage x = random_cimage(16, 16, 9);
  const CImage adj = fm::csmri_adjoint(fm::csmri_forward(x, empty_mask), empty_mask);
  for (const auto& z : adj.v) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("cdp forward: zeros, energy, global phase") {
  const auto model = fm::make_cdp_model(16, 16, 4, 0.0, 7);
  REQUIRE(model.num_patterns() == 4);
  for (const auto& d : model.patterns)
    for (const auto& z : d.v) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);

  CImage zero(16, 16);
  for (const Tensor& amp : fm::cdp_forward(zero, model))
    for (std::size_t i = 0; i < amp.numel(); ++i) CHECK(amp[i] == 0.0);

  const CImage x = random_cimage(16, 16, 21);
  double xnorm = 0.0;
  for (const auto& z : x.v) xnorm += std::norm(z);
  const auto amps = fm::cdp_forward(x, model);
  for (const Tensor& amp : amps) {
    double e = 0.0;
    for (std::size_t i = 0; i < amp.numel(); ++i) e += amp[i] * amp[i];
    CHECK(std::abs(e - xnorm) < 1e-8);
  }

  CImage rotated = x;
  const std::complex<double> phase = std::polar(1.0, 1.234);
  for (auto& z : rotated.v) z *= phase;
  const auto amps2 = fm::cdp_forward(rotated, model);
  for (std::size_t p = 0; p < amps.size(); ++p)
    for (std::size_t i = 0; i < amps[p].numel(); ++i)
      CHECK(std::abs(amps[p][i] - amps2[p][i]) < 1e-10);
}

TEST_CASE("synthesize_measurement: noiseless cases and determinism") {
  const Tensor img = testutil::smooth_image(16, 16, 4);
  const CImage x = CImage::from_real(img);

  fm::MeasurementModel cs = testutil::csmri_model(16, 16, 0.5, 0.0, 5);
  const auto obs = fm::synthesize_measurement(x, cs, 1);
  const CImage direct = fm::csmri_forward(x, std::get<fm::CsmriModel>(cs));
  for (std::size_t i = 0; i < obs.kspace.v.size(); ++i)
    CHECK(std::abs(obs.kspace.v[i] - direct.v[i]) == 0.0);

  fm::MeasurementModel pr = fm::make_cdp_model(16, 16, 4, 0.0, 2);
  const auto obs_pr = fm::synthesize_measurement(x, pr, 1);
  const auto amps = fm::cdp_forward(x, std::get<fm::CdpModel>(pr));
  for (std::size_t p = 0; p < amps.size(); ++p)
    for (std::size_t i = 0; i < amps[p].numel(); ++i)
      CHECK(obs_pr.amps[p][i] == amps[p][i]);

  fm::MeasurementModel noisy = testutil::csmri_model(16, 16, 0.5, 10.0, 5);
  const auto o1 = fm::synthesize_measurement(x, noisy, 42);
  const auto o2 = fm::synthesize_measurement(x, noisy, 42);
  const auto o3 = fm::synthesize_measurement(x, noisy, 43);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < o1.kspace.v.size(); ++i) {
    same = same && o1.kspace.v[i] == o2.kspace.v[i];
    differs = differs || o1.kspace.v[i] != o3.kspace.v[i];
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("pr noise moment check (monte carlo)") {
  // constant image, alpha = 9: empirical variance of y^2 against the model
  const int n = 8;
  CImage x(n, n);
  for (auto& z : x.v) z = 0.7;
  fm::CdpModel model = fm::make_cdp_model(n, n, 1, 9.0, 3);
  const auto clean = fm::cdp_forward(x, model);
  const double alpha_eff = 9.0 / 255.0;

  // pick the strongest entry to keep relative variance stable
  std::size_t j = 0;
  for (std::size_t i = 0; i < clean[0].numel(); ++i)
    if (clean[0][i] > clean[0][j]) j = i;
  const double expect_var =
      alpha_eff * alpha_eff * clean[0][j] * clean[0][j];

  double mean = 0.0, m2 = 0.0;
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const auto obs = fm::synthesize_measurement(x, fm::MeasurementModel(model),
                                                1000 + d);
    const double y2 = obs.amps[0][j] * obs.amps[0][j];
    mean += y2;
    m2 += y2 * y2;
  }
  mean /= draws;
  const double var = m2 / draws - mean * mean;
  CHECK(testutil::rel_err(var, expect_var) < 0.05);
}

TEST_CASE("psnr: cap, exact value, and independent reference") {
  const Tensor a = testutil::smooth_image(16, 16, 1);
  CHECK(fm::psnr(a, a) == 100.0);

  Tensor b = a;
  for (std::size_t i = 0; i < b.numel(); ++i) b[i] += 0.1;
  // |b| - |a| = 0.1 everywhere for positive images -> MSE 0.01 -> 20 dB
  CHECK(fm::psnr(b, a) == doctest::Approx(20.0).epsilon(1e-9));

  const CImage xc = random_cimage(12, 12, 8);
  const CImage yc = random_cimage(12, 12, 9);
  // independent direct-sum reference
  double se = 0.0;
  for (std::size_t i = 0; i < xc.v.size(); ++i) {
    const double d = std::abs(xc.v[i]) - std::abs(yc.v[i]);
    se += d * d;
  }
  const double ref = 10.0 * std::log10(1.0 / (se / xc.v.size()));
  CHECK(fm::psnr(xc, yc) == doctest::Approx(ref).epsilon(1e-9));

  CHECK_THROWS(fm::psnr(Tensor({4, 4}), Tensor({4, 5})));
}
