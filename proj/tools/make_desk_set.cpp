// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the procedural desk image set under data/desk (public-domain by
// construction; used by CI and the acceptance suite).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>

#include "pnprl/core/image_io.hpp"
#include "pnprl/core/rng.hpp"

using pnprl::Rng;
using pnprl::Tensor;

namespace {

Tensor render(int n, const std::function<double(double, double)>& f) {
  Tensor img({n, n});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double y = (i + 0.5) / n * 2.0 - 1.0;
      const double x = (j + 0.5) / n * 2.0 - 1.0;
      img.at(i, j) = std::clamp(f(x, y), 0.0, 1.0);
    }
  return img;
}

double ellipse(double x, double y, double cx, double cy, double a, double b,
               double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double u = ((x - cx) * ca + (y - cy) * sa) / a;
  const double v = (-(x - cx) * sa + (y - cy) * ca) / b;
  return u * u + v * v <= 1.0 ? 1.0 : 0.0;
}

// Piecewise-constant head phantom built from nested ellipses.
Tensor phantom(int n, double rot = 0.0, double scale = 1.0) {
  return render(n, [rot, scale](double x0, double y0) {
    const double cr = std::cos(rot), sr = std::sin(rot);
    const double x = (x0 * cr + y0 * sr) / scale;
    const double y = (-x0 * sr + y0 * cr) / scale;
    double v = 0.05;
    v += 0.75 * ellipse(x, y, 0, 0, 0.72, 0.9, 0);
    v -= 0.55 * ellipse(x, y, 0, -0.02, 0.65, 0.82, 0);
    v += 0.30 * ellipse(x, y, 0.22, 0.0, 0.12, 0.28, -0.3);
    v += 0.30 * ellipse(x, y, -0.22, 0.0, 0.14, 0.30, 0.35);
    v += 0.45 * ellipse(x, y, 0.0, 0.38, 0.20, 0.14, 0);
    v += 0.20 * ellipse(x, y, 0.0, -0.35, 0.30, 0.18, 0);
    v -= 0.15 * ellipse(x, y, 0.0, -0.35, 0.16, 0.09, 0);
    v += 0.35 * ellipse(x, y, -0.05, 0.1, 0.05, 0.05, 0);
    v += 0.35 * ellipse(x, y, 0.06, -0.64, 0.04, 0.04, 0);
    return v;
  });
}

Tensor blobs(int n, std::uint64_t seed, int count, double width) {
  Rng rng(seed);
  std::vector<std::array<double, 3>> centers;
  for (int k = 0; k < count; ++k)
    centers.push_back({rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9),
                       rng.uniform(0.3, 1.0)});
  return render(n, [&](double x, double y) {
    double v = 0.1;
    for (const auto& c : centers) {
      const double d2 = (x - c[0]) * (x - c[0]) + (y - c[1]) * (y - c[1]);
      v += c[2] * std::exp(-d2 / (width * width));
    }
    return v * 0.6;
  });
}

Tensor stripes_and_boxes(int n, std::uint64_t seed) {
  Rng rng(seed);
  const double freq = rng.uniform(6.0, 12.0);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  std::vector<std::array<double, 4>> boxes;
  for (int k = 0; k < 5; ++k)
    boxes.push_back({rng.uniform(-0.8, 0.4), rng.uniform(-0.8, 0.4),
                     rng.uniform(0.15, 0.5), rng.uniform(0.2, 0.9)});
  return render(n, [&](double x, double y) {
    const double t = x * std::cos(angle) + y * std::sin(angle);
    double v = 0.35 + 0.18 * std::sin(freq * std::numbers::pi * t);
    for (const auto& b : boxes)
      if (x >= b[0] && x <= b[0] + b[2] && y >= b[1] && y <= b[1] + b[2])
        v = b[3];
    return v;
  });
}

Tensor texture(int n, std::uint64_t seed) {
  Rng rng(seed);
  const double f1 = rng.uniform(8.0, 18.0), f2 = rng.uniform(10.0, 24.0);
  const double p1 = rng.uniform(0.0, 6.28), p2 = rng.uniform(0.0, 6.28);
  return render(n, [&](double x, double y) {
    double v = 0.5 + 0.2 * std::sin(f1 * x + p1) * std::cos(f2 * y + p2);
    v += 0.12 * std::sin(0.5 * f1 * (x + y) + p2);
    v += 0.08 * std::cos(2.2 * f2 * (x - y) + p1);
    return v;
  });
}

Tensor gradient_circles(int n, std::uint64_t seed) {
  Rng rng(seed);
  const double cx = rng.uniform(-0.4, 0.4), cy = rng.uniform(-0.4, 0.4);
  return render(n, [&](double x, double y) {
    double v = 0.25 + 0.35 * (x + 1.0) / 2.0 + 0.15 * (y + 1.0) / 2.0;
    const double r = std::hypot(x - cx, y - cy);
    if (r < 0.45) v = 0.85 - 0.5 * r;
    if (r < 0.18) v = 0.15 + 2.0 * r;
    return v;
  });
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "data/desk";
  std::filesystem::create_directories(out);
  int n = argc > 2 ? std::atoi(argv[2]) : 128;

  const auto save = [&](const std::string& name, const Tensor& img) {
    pnprl::save_pgm(out + "/" + name + ".pgm", img);
    std::printf("%s/%s.pgm\n", out.c_str(), name.c_str());
  };

  save("desk01_phantom", phantom(n));
  save("desk02_blobs", blobs(n, 11, 6, 0.35));
  save("desk03_blobs_fine", blobs(n, 23, 14, 0.16));
  save("desk04_stripes", stripes_and_boxes(n, 31));
  save("desk05_stripes_alt", stripes_and_boxes(n, 47));
  save("desk06_texture", texture(n, 53));
  save("desk07_texture_alt", texture(n, 71));
  save("desk08_gradient", gradient_circles(n, 83));
  save("desk09_gradient_alt", gradient_circles(n, 97));
  save("desk10_blobs_wide", blobs(n, 101, 4, 0.55));
  save("desk11_mixed", stripes_and_boxes(n, 113));
  save("desk12_phantom_rot", phantom(n, 0.6, 0.8));
  return 0;
}
