// SPDX-License-Identifier: Apache-2.0
#include "pnprl/fm/mask.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pnprl/core/npy.hpp"
#include "pnprl/core/rng.hpp"

namespace pnprl::fm {

namespace {

using json = nlohmann::json;

struct LineHit {
  int first_line;   // index of the first line that sampled this pixel
  double radius;    // distance from the grid center
};

// Rasterizes nlines equally spaced diameters through the grid center into
// `hits` (centered coordinates). Returns the number of sampled pixels.
std::size_t rasterize(int h, int w, int nlines, double angle_offset,
                      std::vector<LineHit>& hits) {
  hits.assign(static_cast<std::size_t>(h) * w, {-1, 0.0});
  const double ch = h / 2, cw = w / 2;
  const double rmax = std::hypot(h, w);
  std::size_t count = 0;
  for (int l = 0; l < nlines; ++l) {
    const double th = angle_offset + std::numbers::pi * l / nlines;
    const double dy = std::sin(th), dx = std::cos(th);
    for (double t = -rmax; t <= rmax; t += 0.4) {
      const int i = static_cast<int>(std::lround(ch + t * dy));
      const int j = static_cast<int>(std::lround(cw + t * dx));
      if (i < 0 || i >= h || j < 0 || j >= w) continue;
      LineHit& cell = hits[static_cast<std::size_t>(i) * w + j];
      if (cell.first_line < 0) {
        cell.first_line = l;
        cell.radius = std::hypot(i - ch, j - cw);
        ++count;
      }
    }
  }
  return count;
}

std::vector<std::uint8_t> radial_mask(int h, int w, std::size_t budget,
                                      std::uint64_t seed) {
  Rng rng(seed);
  const double offset = rng.uniform() * std::numbers::pi;
  const std::size_t total = static_cast<std::size_t>(h) * w;
  std::vector<LineHit> hits;

  int lo = 1, hi = 1;
  while (rasterize(h, w, hi, offset, hits) < budget && hi < 8 * (h + w)) hi *= 2;
  std::size_t got = rasterize(h, w, hi, offset, hits);
  if (got >= budget) {
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (rasterize(h, w, mid, offset, hits) >= budget)
        hi = mid;
      else
        lo = mid + 1;
    }
    got = rasterize(h, w, lo, offset, hits);
  } else {
    lo = hi;  // budget close to full sampling; top up below
  }

  std::vector<std::uint8_t> centered(total, 0);
  for (std::size_t i = 0; i < total; ++i)
    if (hits[i].first_line >= 0) centered[i] = 1;

  if (got > budget) {
    // Truncate the outer reach of the last line to land on the exact budget.
    std::vector<std::size_t> last;
    for (std::size_t i = 0; i < total; ++i)
      if (hits[i].first_line == lo - 1) last.push_back(i);
    std::sort(last.begin(), last.end(), [&](std::size_t a, std::size_t b) {
      return hits[a].radius > hits[b].radius;
    });
    for (std::size_t i = 0; i < last.size() && got > budget; ++i) {
      centered[last[i]] = 0;
      --got;
    }
  } else if (got < budget) {
    // Degenerate near-full-sampling case: complete inward-out.
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < total; ++i)
      if (centered[i] == 0) rest.push_back(i);
    const double ch = h / 2, cw = w / 2;
    std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      const double ra = std::hypot(static_cast<double>(a / w) - ch,
                                   static_cast<double>(a % w) - cw);
      const double rb = std::hypot(static_cast<double>(b / w) - ch,
                                   static_cast<double>(b % w) - cw);
      return ra < rb;
    });
    for (std::size_t i = 0; i < rest.size() && got < budget; ++i) {
      centered[rest[i]] = 1;
      ++got;
    }
  }
  return centered;
}

}  // namespace

const char* to_string(MaskPattern p) {
  return p == MaskPattern::kRadial ? "radial" : "uniform-random";
}

MaskPattern mask_pattern_from_string(const std::string& s) {
  if (s == "radial") return MaskPattern::kRadial;
  if (s == "uniform-random" || s == "uniform_random" || s == "uniform")
    return MaskPattern::kUniformRandom;
  throw std::invalid_argument("unknown mask pattern: " + s);
}

std::size_t KSpaceMask::sampled_count() const {
  return static_cast<std::size_t>(
      std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double KSpaceMask::measured_rate() const {
  return static_cast<double>(sampled_count()) / (static_cast<double>(h) * w);
}

KSpaceMask make_mask(int h, int w, MaskPattern pattern, double target_rate,
                     std::uint64_t seed) {
  if (!(target_rate > 0.0 && target_rate <= 1.0))
    throw std::invalid_argument("make_mask: target_rate must be in (0, 1]");
  if (h < 8 || w < 8) throw std::invalid_argument("make_mask: grid too small");

  const std::size_t total = static_cast<std::size_t>(h) * w;
  const std::size_t budget = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(target_rate * total)));

  KSpaceMask out;
  out.h = h;
  out.w = w;
  out.pattern = pattern;
  out.target_rate = target_rate;
  out.seed = seed;

  std::vector<std::uint8_t> centered(total, 0);
  if (budget == total) {
    centered.assign(total, 1);
  } else if (pattern == MaskPattern::kRadial) {
    centered = radial_mask(h, w, budget, seed);
  } else {
    const std::size_t center = static_cast<std::size_t>(h / 2) * w + w / 2;
    std::vector<std::size_t> idx;
    idx.reserve(total - 1);
    for (std::size_t i = 0; i < total; ++i)
      if (i != center) idx.push_back(i);
    Rng rng(seed);
    rng.shuffle(idx);
    centered[center] = 1;
    for (std::size_t i = 0; i + 1 < budget; ++i) centered[idx[i]] = 1;
  }
  centered[static_cast<std::size_t>(h / 2) * w + w / 2] = 1;  // DC always sampled

  // ifftshift: centered -> DFT indexing with DC at [0,0].
  out.mask.assign(total, 0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      out.mask[static_cast<std::size_t>(i) * w + j] =
          centered[static_cast<std::size_t>((i + h / 2) % h) * w + (j + w / 2) % w];
  return out;
}

void save_mask(const std::string& npy_path, const KSpaceMask& m) {
  npy_save_u8(npy_path, m.mask, m.h, m.w);
  json meta;
  meta["pattern"] = to_string(m.pattern);
  meta["target_rate"] = m.target_rate;
  meta["seed"] = m.seed;
  const auto dot = npy_path.rfind('.');
  const std::string jpath =
      (dot == std::string::npos ? npy_path : npy_path.substr(0, dot)) + ".json";
  std::ofstream f(jpath);
  if (!f) throw std::runtime_error("save_mask: cannot open " + jpath);
  f << meta.dump(2) << "\n";
}

KSpaceMask load_mask(const std::string& npy_path) {
  const Tensor arr = npy_load(npy_path);
  KSpaceMask m;
  m.h = arr.dim(0);
  m.w = arr.dim(1);
  m.mask.resize(arr.numel());
  for (std::size_t i = 0; i < arr.numel(); ++i) {
    if (arr[i] != 0.0 && arr[i] != 1.0)
      throw std::runtime_error("load_mask: non-binary entry");
    m.mask[i] = static_cast<std::uint8_t>(arr[i]);
  }
  const auto dot = npy_path.rfind('.');
  const std::string jpath =
      (dot == std::string::npos ? npy_path : npy_path.substr(0, dot)) + ".json";
  std::ifstream f(jpath);
  if (f) {
    json meta = json::parse(f);
    m.pattern = mask_pattern_from_string(meta.value("pattern", "radial"));
    m.target_rate = meta.value("target_rate", m.measured_rate());
    m.seed = meta.value("seed", std::uint64_t{0});
  } else {
    m.target_rate = m.measured_rate();
  }
  return m;
}

}  // namespace pnprl::fm
