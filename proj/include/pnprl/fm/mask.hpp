// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pnprl::fm {

enum class MaskPattern { kRadial, kUniformRandom };

const char* to_string(MaskPattern p);
MaskPattern mask_pattern_from_string(const std::string& s);

// Binary k-space sampling mask stored in DFT index convention (DC at [0,0]).
struct KSpaceMask {
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> mask;  // row-major, values in {0,1}
  MaskPattern pattern = MaskPattern::kRadial;
  double target_rate = 1.0;
  std::uint64_t seed = 0;

  std::uint8_t at(int i, int j) const {
    return mask[static_cast<std::size_t>(i) * w + j];
  }
  std::size_t sampled_count() const;
  double measured_rate() const;
};

// Deterministic mask construction. Radial masks are unions of straight lines
// through DC at equally spaced angles; the line count is binary-searched for
// the target rate and the last line truncated to land on the exact budget.
KSpaceMask make_mask(int h, int w, MaskPattern pattern, double target_rate,
                     std::uint64_t seed);

inline double accel_to_rate(double factor) { return 1.0 / factor; }

// Persistence: NPY u8 array plus a JSON sidecar {pattern, target_rate, seed}.
void save_mask(const std::string& npy_path, const KSpaceMask& m);
KSpaceMask load_mask(const std::string& npy_path);

}  // namespace pnprl::fm
