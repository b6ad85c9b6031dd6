// SPDX-License-Identifier: Apache-2.0
#include "pnprl/denoiser/denoiser.hpp"

#include <atomic>
#include <fstream>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "pnprl/core/parallel.hpp"
#include "pnprl/core/rng.hpp"
#include "pnprl/fm/forward_models.hpp"
#include "pnprl/nn/adam.hpp"
#include "pnprl/core/kernels.hpp"
#include "pnprl/nn/checkpoint.hpp"

namespace pnprl::den {

namespace {

std::atomic<long> clamp_warnings{0};

void warn_clamp(double sigma, double lo, double hi) {
  if (clamp_warnings.fetch_add(1) == 0)
    std::fprintf(stderr,
                 "[pnprl] denoising strength %.5f outside trained range "
                 "[%.5f, %.5f]; clamping (further warnings suppressed)\n",
                 sigma, lo, hi);
}

}  // namespace

double DenoiserHandle::clamp_sigma(double sigma) const {
  if (sigma < sigma_lo || sigma > sigma_hi) {
    warn_clamp(sigma, sigma_lo, sigma_hi);
    return std::min(std::max(sigma, sigma_lo), sigma_hi);
  }
  return sigma;
}

UNetDenoiser::UNetDenoiser(nn::UNetConfig cfg, std::uint64_t init_seed) {
  Rng rng(init_seed);
  net_ = nn::UNet(std::move(cfg), rng);
}

Tensor UNetDenoiser::denoise(const Tensor& img, const Tensor& sigma_map) const {
  nn::Tape tape;
  for (auto& [name, w] : net_.params()) tape.freeze(*w);
  nn::Var out =
      net_.forward(tape, tape.constant(img), tape.constant(sigma_map));
  return out->val;
}

nn::Var UNetDenoiser::denoise_diff(nn::Tape& t, nn::Var img,
                                   nn::Var sigma) const {
  nn::Var map =
      nn::broadcast_plane(t, std::move(sigma), img->val.dim(0), img->val.dim(1));
  return net_.forward(t, std::move(img), std::move(map));
}

void UNetDenoiser::freeze_params(nn::Tape& t) const {
  for (auto& [name, w] : net_.params()) t.freeze(*w);
}

DenoiserHandle make_identity_handle() {
  DenoiserHandle h;
  h.impl = std::make_shared<IdentityDenoiser>();
  h.sigma_lo = 0.0;
  h.sigma_hi = 1.0;
  return h;
}

Tensor denoise(const Tensor& img, const Tensor& sigma_map,
               const DenoiserHandle& h) {
  if (!img.same_shape(sigma_map))
    throw std::invalid_argument("denoise: image/sigma map shape mismatch");
  Tensor clamped = sigma_map;
  bool warned = false;
  for (std::size_t i = 0; i < clamped.numel(); ++i) {
    if (clamped[i] < h.sigma_lo || clamped[i] > h.sigma_hi) {
      if (!warned) {
        warn_clamp(clamped[i], h.sigma_lo, h.sigma_hi);
        warned = true;
      }
      clamped[i] = std::min(std::max(clamped[i], h.sigma_lo), h.sigma_hi);
    }
  }
  return h.impl->denoise(img, clamped);
}

CImage denoise_complex(const CImage& img, double sigma,
                       const DenoiserHandle& h) {
  const double s = h.clamp_sigma(sigma);
  const Tensor map = Tensor::full({img.h, img.w}, s);
  const Tensor re = h.impl->denoise(img.real(), map);
  const Tensor im = h.impl->denoise(img.imag(), map);
  CImage out(img.h, img.w);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = {re[i], im[i]};
  return out;
}

std::vector<Tensor> extract_patches(const std::vector<Tensor>& images, int patch,
                                    int stride, long max_patches,
                                    std::uint64_t seed) {
  std::vector<Tensor> patches;
  for (const Tensor& img : images) {
    const int h = img.dim(0), w = img.dim(1);
    for (int i = 0; i + patch <= h; i += stride)
      for (int j = 0; j + patch <= w; j += stride) {
        Tensor p({patch, patch});
        for (int a = 0; a < patch; ++a)
          for (int b = 0; b < patch; ++b) p.at(a, b) = img.at(i + a, j + b);
        patches.push_back(std::move(p));
      }
  }
  Rng rng = Rng::child(seed, {0x9a7c});
  rng.shuffle(patches);
  if (max_patches > 0 && static_cast<long>(patches.size()) > max_patches)
    patches.resize(static_cast<std::size_t>(max_patches));
  return patches;
}

TrainDenoiserResult train_denoiser(const std::vector<Tensor>& patches,
                                   const TrainDenoiserConfig& cfg) {
  if (patches.empty())
    throw std::invalid_argument("train_denoiser: empty corpus");

  auto impl = std::make_shared<UNetDenoiser>(nn::UNetConfig{cfg.widths},
                                             Rng::child(cfg.seed, {1}).u64());
  nn::ParamList named = impl->net().params();
  std::vector<Tensor*> params;
  for (auto& [name, w] : named) params.push_back(w);
  nn::Adam opt(params, {cfg.lr, 0.9, 0.999, 1e-8});

  int start_epoch = 0;
  if (!cfg.resume_from.empty()) {
    nn::ParamList with_state = named;
    for (std::size_t i = 0; i < params.size(); ++i) {
      with_state.emplace_back("adam.m." + std::to_string(i), &opt.moments1()[i]);
      with_state.emplace_back("adam.v." + std::to_string(i), &opt.moments2()[i]);
    }
    nlohmann::json meta = nn::load_checkpoint(cfg.resume_from, with_state, true);
    start_epoch = meta.value("epoch", 0);
    opt.set_steps_taken(meta.value("adam_steps", 0L));
  }

  const int batch = std::max(1, cfg.batch);
  const long nbatches =
      (static_cast<long>(patches.size()) + batch - 1) / batch;

  TrainDenoiserResult result;
  result.handle.impl = impl;
  result.handle.sigma_lo = cfg.sigma_lo;
  result.handle.sigma_hi = cfg.sigma_hi;

  for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.lr;
    if (epoch + 1 >= cfg.lr_final_epoch)
      lr = cfg.lr_final;
    else if (epoch + 1 >= cfg.lr_half_epoch)
      lr = cfg.lr / 2.0;
    opt.set_lr(lr);

    std::vector<std::size_t> order(patches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng = Rng::child(cfg.seed, {0x5e, static_cast<std::uint64_t>(epoch)});
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    long seen = 0;
    for (long bi = 0; bi < nbatches; ++bi) {
      const std::size_t lo = static_cast<std::size_t>(bi) * batch;
      const std::size_t hi = std::min(lo + batch, patches.size());
      const std::size_t bs = hi - lo;

      std::vector<std::vector<Tensor>> grads(bs);
      std::vector<double> losses(bs, 0.0);
      parallel_for(bs, [&](std::size_t s) {
        const Tensor& clean = patches[order[lo + s]];
        Rng rng = Rng::child(cfg.seed, {0xda7a, static_cast<std::uint64_t>(epoch),
                                        static_cast<std::uint64_t>(lo + s)});
        const double sigma = rng.uniform(cfg.sigma_lo, cfg.sigma_hi);
        Tensor noisy = clean;
        for (std::size_t i = 0; i < noisy.numel(); ++i)
          noisy[i] += sigma * rng.gaussian();

        nn::Tape tape;
        nn::Var out = impl->net().forward(
            tape, tape.constant(noisy),
            tape.constant(Tensor::full(clean.shape(), sigma)));
        nn::Var loss = nn::l1_loss(tape, out, tape.constant(clean));
        tape.backward(loss);
        losses[s] = loss->scalar();
        grads[s].reserve(params.size());
        for (Tensor* p : params) {
          const Tensor* g = tape.grad_of(*p);
          grads[s].push_back(g != nullptr ? *g : Tensor::zeros(p->shape()));
        }
      });

      std::vector<Tensor> batch_grad;
      batch_grad.reserve(params.size());
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor acc = std::move(grads[0][pi]);
        for (std::size_t s = 1; s < bs; ++s)
          kern::k().add(acc.data(), grads[s][pi].data(), acc.data(), acc.numel());
        kern::k().scal(1.0 / static_cast<double>(bs), acc.data(), acc.numel());
        batch_grad.push_back(std::move(acc));
      }
      opt.step(batch_grad);
      for (std::size_t s = 0; s < bs; ++s) epoch_loss += losses[s];
      seen += static_cast<long>(bs);
    }
    epoch_loss /= static_cast<double>(seen);
    result.epoch_losses.push_back(epoch_loss);
    if (cfg.verbose)
      std::fprintf(stderr, "[pnprl] denoiser epoch %d/%d  L1 %.6f  lr %.2e\n",
                   epoch + 1, cfg.epochs, epoch_loss, lr);

    if (!cfg.checkpoint_dir.empty()) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      nlohmann::json tc;
      tc["epochs"] = cfg.epochs;
      tc["batch"] = cfg.batch;
      tc["lr"] = cfg.lr;
      tc["sigma_lo"] = cfg.sigma_lo;
      tc["sigma_hi"] = cfg.sigma_hi;
      tc["widths"] = cfg.widths;
      tc["seed"] = cfg.seed;

      nn::ParamList with_state = named;
      for (std::size_t i = 0; i < params.size(); ++i) {
        with_state.emplace_back("adam.m." + std::to_string(i), &opt.moments1()[i]);
        with_state.emplace_back("adam.v." + std::to_string(i), &opt.moments2()[i]);
      }
      nlohmann::json meta;
      meta["kind"] = "denoiser";
      meta["epoch"] = epoch + 1;
      meta["adam_steps"] = opt.steps_taken();
      meta["sigma_lo"] = cfg.sigma_lo;
      meta["sigma_hi"] = cfg.sigma_hi;
      meta["widths"] = cfg.widths;
      meta["arch_hash"] = nn::config_hash(nlohmann::json(cfg.widths));
      meta["train_config"] = tc;
      nn::save_checkpoint(cfg.checkpoint_dir + "/denoiser_epoch" +
                              std::to_string(epoch + 1) + ".ckpt",
                          with_state, meta);
    }
  }
  return result;
}

double evaluate_denoiser(const DenoiserHandle& h,
                         const std::vector<Tensor>& test_images, double sigma,
                         std::uint64_t seed) {
  if (test_images.empty())
    throw std::invalid_argument("evaluate_denoiser: empty test set");
  std::vector<double> scores(test_images.size());
  parallel_for(test_images.size(), [&](std::size_t i) {
    Rng rng = Rng::child(seed, {0xea1, i});
    const Tensor& clean = test_images[i];
    Tensor noisy = clean;
    for (std::size_t j = 0; j < noisy.numel(); ++j)
      noisy[j] += sigma * rng.gaussian();
    const Tensor map = Tensor::full(clean.shape(), h.clamp_sigma(sigma));
    const Tensor denoised = h.impl->denoise(noisy, map);
    scores[i] = fm::psnr(denoised, clean);
  });
  double mean = 0.0;
  for (double s : scores) mean += s;
  return mean / static_cast<double>(scores.size());
}

void save_denoiser(const std::string& path, const DenoiserHandle& h,
                   const nlohmann::json& train_config) {
  auto* unet = dynamic_cast<UNetDenoiser*>(h.impl.get());
  if (unet == nullptr)
    throw std::invalid_argument("save_denoiser: only unet denoisers persist");
  nlohmann::json meta;
  meta["kind"] = "denoiser";
  meta["sigma_lo"] = h.sigma_lo;
  meta["sigma_hi"] = h.sigma_hi;
  meta["widths"] = unet->net().config().widths;
  meta["arch_hash"] = nn::config_hash(nlohmann::json(unet->net().config().widths));
  meta["train_config"] = train_config;
  nn::save_checkpoint(path, unet->net().params(), meta);
  std::ofstream side(path + ".json");
  side << meta.dump(2) << "\n";
}

DenoiserHandle load_denoiser(const std::string& path) {
  nlohmann::json meta = nn::read_checkpoint_meta(path);
  nn::UNetConfig cfg;
  cfg.widths = meta.at("widths").get<std::vector<int>>();
  auto impl = std::make_shared<UNetDenoiser>(cfg, 0);
  nn::load_checkpoint(path, impl->net().params(), /*allow_extra=*/true);
  DenoiserHandle h;
  h.impl = impl;
  h.sigma_lo = meta.value("sigma_lo", 1.0 / 255.0);
  h.sigma_hi = meta.value("sigma_hi", 50.0 / 255.0);
  return h;
}

}  // namespace pnprl::den
