// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pnprl/core/cimage.hpp"
#include "pnprl/nn/unet.hpp"

namespace pnprl::den {

// Gaussian denoiser prior with a tunable noise-level map. Complex iterates
// are denoised per-plane (real and imaginary parts independently).
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Tensor denoise(const Tensor& img, const Tensor& sigma_map) const = 0;
  // Graph-building variant; sigma is a scalar Var (constant map). Weight
  // gradients flow only if the tape has not frozen them.
  virtual nn::Var denoise_diff(nn::Tape& t, nn::Var img, nn::Var sigma) const = 0;
  virtual void freeze_params(nn::Tape& t) const {}
  virtual std::string kind() const = 0;
};

struct DenoiserHandle {
  std::shared_ptr<Denoiser> impl;
  double sigma_lo = 1.0 / 255.0;
  double sigma_hi = 50.0 / 255.0;

  double clamp_sigma(double sigma) const;
};

class UNetDenoiser : public Denoiser {
 public:
  UNetDenoiser(nn::UNetConfig cfg, std::uint64_t init_seed);
  Tensor denoise(const Tensor& img, const Tensor& sigma_map) const override;
  nn::Var denoise_diff(nn::Tape& t, nn::Var img, nn::Var sigma) const override;
  void freeze_params(nn::Tape& t) const override;
  std::string kind() const override { return "unet"; }

  nn::UNet& net() { return net_; }
  const nn::UNet& net() const { return net_; }

 private:
  mutable nn::UNet net_;  // params() is non-const; weights untouched by forward
};

// Test double: returns its input unchanged for any sigma.
class IdentityDenoiser : public Denoiser {
 public:
  Tensor denoise(const Tensor& img, const Tensor&) const override { return img; }
  nn::Var denoise_diff(nn::Tape&, nn::Var img, nn::Var) const override {
    return img;
  }
  std::string kind() const override { return "identity"; }
};

DenoiserHandle make_identity_handle();

// Spec-level entry points.
Tensor denoise(const Tensor& img, const Tensor& sigma_map,
               const DenoiserHandle& h);
CImage denoise_complex(const CImage& img, double sigma, const DenoiserHandle& h);

struct TrainDenoiserConfig {
  std::vector<int> widths{32, 64, 128, 256};
  int epochs = 50;
  int batch = 32;
  double lr = 1e-4;
  int lr_half_epoch = 30;   // lr/2 from this epoch (1-based)
  int lr_final_epoch = 40;  // lr_final from this epoch
  double lr_final = 1e-5;
  double sigma_lo = 1.0 / 255.0;
  double sigma_hi = 50.0 / 255.0;
  int patch = 128;
  int stride = 64;          // patch extraction stride
  long max_patches = 87000;
  std::uint64_t seed = 0;
  std::string checkpoint_dir;  // per-epoch checkpoints when non-empty
  std::string resume_from;     // optional checkpoint to continue
  bool verbose = false;
};

struct TrainDenoiserResult {
  DenoiserHandle handle;
  std::vector<double> epoch_losses;
};

std::vector<Tensor> extract_patches(const std::vector<Tensor>& images, int patch,
                                    int stride, long max_patches,
                                    std::uint64_t seed);

TrainDenoiserResult train_denoiser(const std::vector<Tensor>& patches,
                                   const TrainDenoiserConfig& cfg);

double evaluate_denoiser(const DenoiserHandle& h,
                         const std::vector<Tensor>& test_images, double sigma,
                         std::uint64_t seed);

void save_denoiser(const std::string& path, const DenoiserHandle& h,
                   const nlohmann::json& train_config);
DenoiserHandle load_denoiser(const std::string& path);

}  // namespace pnprl::den
