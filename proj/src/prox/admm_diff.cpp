// SPDX-License-Identifier: Apache-2.0
#include "pnprl/prox/admm_diff.hpp"

#include <cmath>

#include "pnprl/core/fft.hpp"

namespace pnprl::prox {

namespace {

CImage complex_from_planes(const Tensor& planes) {
  return CImage::from_planes(planes);
}

}  // namespace

DiffState to_diff(nn::Tape& t, const OptState& s) {
  return {t.constant(s.x.planes()), t.constant(s.z.planes()),
          t.constant(s.u.planes())};
}

OptState from_diff(const DiffState& d, int k) {
  OptState s;
  s.x = CImage::from_planes(d.x->val);
  s.z = CImage::from_planes(d.z->val);
  s.u = CImage::from_planes(d.u->val);
  s.k = k;
  return s;
}

nn::Var csmri_prox_node(nn::Tape& t, nn::Var v, nn::Var mu,
                        const fm::Observation& obs,
                        const fm::CsmriModel& model) {
  const CImage v_c = complex_from_planes(v->val);
  const double mu_v = mu->val[0];
  const CImage z = data_prox_csmri(v_c, obs, model, mu_v);
  // obs/model outlive the tape in all call paths; captured by reference-like
  // pointers to avoid copying the k-space per node.
  const fm::Observation* obs_p = &obs;
  const fm::CsmriModel* model_p = &model;
  return t.make("csmri_prox", z.planes(), {v, mu},
                [obs_p, model_p](nn::Node& self) {
                  nn::Var& v_ = self.inputs[0];
                  nn::Var& mu_ = self.inputs[1];
                  const double mu_v = mu_->val[0];
                  const CImage G = complex_from_planes(self.grad);
                  const auto& mask = model_p->mask.mask;

                  if (v_->requires_grad) {
                    CImage gf = fft2(G);
                    for (std::size_t j = 0; j < gf.v.size(); ++j)
                      gf.v[j] *= mu_v / (mask[j] + mu_v);
                    v_->accum_grad(ifft2(gf).planes());
                  }
                  if (mu_->requires_grad) {
                    const CImage v_c = complex_from_planes(v_->val);
                    CImage vf = fft2(v_c);
                    for (std::size_t j = 0; j < vf.v.size(); ++j) {
                      const double mk = mask[j];
                      const double den = (mk + mu_v) * (mu_v + mk);
                      vf.v[j] = mk * (vf.v[j] - obs_p->kspace.v[j]) / den;
                    }
                    const CImage dz = ifft2(vf);
                    double acc = 0.0;
                    for (std::size_t j = 0; j < dz.v.size(); ++j)
                      acc += std::real(std::conj(dz.v[j]) * G.v[j]);
                    mu_->accum_grad_at(0, acc);
                  }
                });
}

nn::Var pr_gradstep_node(nn::Tape& t, nn::Var v, nn::Var mu,
                         const fm::Observation& obs, const fm::CdpModel& model) {
  const CImage v_c = complex_from_planes(v->val);
  const double mu_v = mu->val[0];
  auto w_cache = std::make_shared<std::vector<CImage>>();
  auto g_cache = std::make_shared<CImage>(
      pr_data_grad(v_c, obs, model, w_cache.get()));
  CImage out(v_c.h, v_c.w);
  const double step = 1.0 / mu_v;
  for (std::size_t j = 0; j < out.v.size(); ++j)
    out.v[j] = v_c.v[j] - step * g_cache->v[j];

  const fm::Observation* obs_p = &obs;
  const fm::CdpModel* model_p = &model;
  return t.make(
      "pr_gradstep", out.planes(), {v, mu},
      [obs_p, model_p, w_cache, g_cache](nn::Node& self) {
        nn::Var& v_ = self.inputs[0];
        nn::Var& mu_ = self.inputs[1];
        const double mu_v = mu_->val[0];
        const CImage G = complex_from_planes(self.grad);

        if (mu_->requires_grad) {
          double acc = 0.0;
          for (std::size_t j = 0; j < G.v.size(); ++j)
            acc += std::real(std::conj(g_cache->v[j]) * G.v[j]);
          mu_->accum_grad_at(0, acc / (mu_v * mu_v));
        }
        if (v_->requires_grad) {
          // grad_v = G - (1/mu) * H(v) G with H the (symmetric) Hessian of D.
          CImage hg(G.h, G.w);
          CImage modulated(G.h, G.w);
          for (int i = 0; i < model_p->num_patterns(); ++i) {
            const CImage& d = model_p->patterns[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < G.v.size(); ++j)
              modulated.v[j] = d.v[j] * G.v[j];
            CImage wb = fft2(modulated);
            const CImage& w = (*w_cache)[static_cast<std::size_t>(i)];
            const Tensor& y = obs_p->amps[static_cast<std::size_t>(i)];
            for (std::size_t j = 0; j < wb.v.size(); ++j) {
              const double a = std::abs(w.v[j]);
              if (a > kPrAmplitudeEps) {
                const std::complex<double> u = w.v[j] / a;
                const std::complex<double> proj =
                    wb.v[j] - u * std::real(std::conj(u) * wb.v[j]);
                wb.v[j] -= (y[j] / a) * proj;
              } else {
                wb.v[j] *= 1.0 - y[j] / kPrAmplitudeEps;
              }
            }
            const CImage back = ifft2(wb);
            for (std::size_t j = 0; j < hg.v.size(); ++j)
              hg.v[j] += std::conj(d.v[j]) * back.v[j];
          }
          CImage gv(G.h, G.w);
          const double step = 1.0 / mu_v;
          for (std::size_t j = 0; j < gv.v.size(); ++j)
            gv.v[j] = G.v[j] - step * hg.v[j];
          v_->accum_grad(gv.planes());
        }
      });
}

nn::Var psnr_node(nn::Tape& t, nn::Var x, const CImage& gt) {
  const CImage x_c = complex_from_planes(x->val);
  const double val = fm::psnr(x_c, gt);
  const CImage* gt_p = &gt;
  return t.make("psnr", Tensor::scalar(val), {x}, [gt_p, val](nn::Node& self) {
    if (val >= 100.0) return;  // capped region is flat
    nn::Var& x_ = self.inputs[0];
    if (!x_->requires_grad) return;
    const Tensor& planes = x_->val;
    const std::size_t n = gt_p->v.size();
    double mse = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double mag = std::hypot(planes[j], planes[n + j]);
      const double d = mag - std::abs(gt_p->v[j]);
      mse += d * d;
    }
    mse /= static_cast<double>(n);
    const double dpsnr_dmse = -10.0 / (mse * std::log(10.0));
    Tensor g(planes.shape());
    for (std::size_t j = 0; j < n; ++j) {
      const double mag = std::hypot(planes[j], planes[n + j]);
      if (mag <= 0.0) continue;
      const double d = mag - std::abs(gt_p->v[j]);
      const double c =
          self.grad[0] * dpsnr_dmse * 2.0 * d / (static_cast<double>(n) * mag);
      g[j] = c * planes[j];
      g[n + j] = c * planes[n + j];
    }
    x_->accum_grad(g);
  });
}

nn::Var denoise_complex_node(nn::Tape& t, nn::Var img2, nn::Var sigma,
                             const den::DenoiserHandle& prior) {
  const int h = img2->val.dim(1), w = img2->val.dim(2);
  nn::Var sc = nn::min_const(t, nn::max_const(t, std::move(sigma), prior.sigma_lo),
                             prior.sigma_hi);
  nn::Var re = nn::reshape(t, nn::slice0(t, img2, 0, 1), {h, w});
  nn::Var im = nn::reshape(t, nn::slice0(t, img2, 1, 1), {h, w});
  nn::Var dre = prior.impl->denoise_diff(t, re, sc);
  nn::Var dim = prior.impl->denoise_diff(t, im, sc);
  return nn::stack0(t, {dre, dim});
}

DiffState admm_iterate_diff(nn::Tape& t, const DiffState& s, nn::Var sigma,
                            nn::Var mu, const fm::Observation& obs,
                            const fm::MeasurementModel& model,
                            const den::DenoiserHandle& prior) {
  DiffState next;
  nn::Var vx = nn::sub(t, s.z, s.u);
  next.x = denoise_complex_node(t, vx, std::move(sigma), prior);
  nn::Var vz = nn::add(t, next.x, s.u);
  if (std::holds_alternative<fm::CsmriModel>(model)) {
    next.z = csmri_prox_node(t, vz, std::move(mu), obs,
                             std::get<fm::CsmriModel>(model));
  } else {
    next.z = pr_gradstep_node(t, vz, std::move(mu), obs,
                              std::get<fm::CdpModel>(model));
  }
  next.u = nn::add(t, s.u, nn::sub(t, next.x, next.z));
  return next;
}

DiffState run_block_diff(nn::Tape& t, DiffState s,
                         const std::vector<nn::Var>& sigmas,
                         const std::vector<nn::Var>& mus,
                         const fm::Observation& obs,
                         const fm::MeasurementModel& model,
                         const den::DenoiserHandle& prior) {
  for (std::size_t j = 0; j < sigmas.size(); ++j)
    s = admm_iterate_diff(t, s, sigmas[j], mus[j], obs, model, prior);
  return s;
}

}  // namespace pnprl::prox
