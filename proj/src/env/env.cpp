// SPDX-License-Identifier: Apache-2.0
#include "pnprl/env/env.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace pnprl::env {

EnvState reset(const ProblemInstance& problem, const EnvConfig& cfg,
               std::shared_ptr<const den::DenoiserHandle> prior,
               std::uint64_t seed) {
  EnvState s;
  s.model = std::make_shared<fm::MeasurementModel>(problem.model);
  s.obs = std::make_shared<fm::Observation>(
      fm::synthesize_measurement(problem.x_gt, *s.model, seed));
  s.opt = prox::init_state(*s.obs, *s.model);
  s.x0 = std::make_shared<CImage>(s.opt.x);
  if (problem.has_gt) s.x_gt = std::make_shared<CImage>(problem.x_gt);
  s.t = 0;
  s.done = false;
  s.cfg = cfg;
  s.prior = std::move(prior);
  return s;
}

Tensor observe(const EnvState& s) {
  const int h = s.height(), w = s.width();
  Tensor obs({kObservationPlanes, h, w});
  const std::size_t n = static_cast<std::size_t>(h) * w;
  auto put = [&](int plane, const Tensor& src) {
    std::copy(src.data(), src.data() + n, obs.data() + plane * n);
  };
  put(0, s.opt.x.real());
  put(1, s.opt.x.imag());
  put(2, s.opt.z.real());
  put(3, s.opt.z.imag());
  put(4, s.opt.u.real());
  put(5, s.opt.u.imag());
  put(6, s.x0->real());
  put(7, s.x0->imag());
  const double sn = fm::model_sigma_n(*s.model) / 255.0;
  std::fill(obs.data() + 8 * n, obs.data() + 9 * n, sn);
  std::fill(obs.data() + 9 * n, obs.data() + 10 * n,
            static_cast<double>(s.t) / s.cfg.N);
  return obs;
}

Action decode_action(const std::vector<double>& raw, const EnvConfig& cfg) {
  const std::size_t want = cfg.shared_pair ? 3 : 2 * cfg.m + 1;
  if (raw.size() != want)
    throw std::invalid_argument("decode_action: raw size mismatch");
  for (double v : raw)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("decode_action: raw outside [0,1]");
  for (std::size_t i = 1; i < raw.size(); ++i)
    if (!(raw[i] > 0.0))
      throw std::invalid_argument("decode_action: continuous raw must be > 0");
  Action a;
  a.a1 = raw[0] >= 0.5 ? 1 : 0;
  a.a2.assign(raw.begin() + 1, raw.end());
  return a;
}

prox::ParamBlock decode_params(const std::vector<double>& a2,
                               const EnvConfig& cfg) {
  std::vector<double> sigmas, mus;
  if (cfg.shared_pair) {
    if (a2.size() != 2)
      throw std::invalid_argument("decode_params: want 2 coordinates");
    sigmas.assign(static_cast<std::size_t>(cfg.m), a2[0] * cfg.sigma_scale);
    mus.assign(static_cast<std::size_t>(cfg.m), a2[1]);
  } else {
    if (a2.size() != static_cast<std::size_t>(2 * cfg.m))
      throw std::invalid_argument("decode_params: want 2m coordinates");
    for (int j = 0; j < cfg.m; ++j) {
      sigmas.push_back(a2[static_cast<std::size_t>(j)] * cfg.sigma_scale);
      mus.push_back(a2[static_cast<std::size_t>(cfg.m + j)]);
    }
  }
  return prox::ParamBlock(std::move(sigmas), std::move(mus));
}

double state_psnr(const EnvState& s) {
  if (!s.x_gt) throw std::logic_error("state_psnr: ground truth absent");
  return fm::psnr(s.opt.x, *s.x_gt);
}

StepResult step(const EnvState& s, const Action& a) {
  if (s.done) throw std::logic_error("step: episode already done");
  if (s.t >= s.cfg.N) throw std::logic_error("step: time index exhausted");

  StepResult out;
  if (a.a1 == 1) {
    if (s.t == 0)
      throw std::logic_error("step: termination allowed from t = 1 onward");
    out.next = s;
    out.next.done = true;
    out.reward = 0.0;
    out.done = true;
    return out;
  }

  const prox::ParamBlock params = decode_params(a.a2, s.cfg);
  out.next = s;
  out.next.opt = prox::run_block(s.opt, params, *s.obs, *s.model, *s.prior);
  out.next.t = s.t + 1;
  out.next.done = out.next.t >= s.cfg.N;
  out.done = out.next.done;
  if (s.x_gt)
    out.reward = state_psnr(out.next) - state_psnr(s) - s.cfg.eta;
  return out;
}

double discounted_return(const std::vector<TransitionRecord>& records,
                         double gamma) {
  double acc = 0.0;
  double scale = 1.0;
  for (const TransitionRecord& rec : records) {
    acc += scale * rec.r;
    scale *= gamma;
  }
  return acc;
}

void write_trace_jsonl(const std::string& path,
                       const std::vector<TransitionRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_trace_jsonl: cannot open " + path);
  for (const TransitionRecord& rec : records) {
    nlohmann::json j;
    j["t"] = rec.t;
    j["a1"] = rec.a.a1;
    j["a2"] = rec.a.a2;
    j["reward"] = rec.has_reward ? nlohmann::json(rec.r) : nlohmann::json();
    j["done"] = rec.done;
    j["psnr_before"] = rec.psnr_before;
    j["psnr_after"] = rec.psnr_after;
    f << j.dump() << "\n";
  }
}

nn::Var observe_diff(nn::Tape& t, const prox::DiffState& d, const EnvState& base,
                     int next_t) {
  const int h = base.height(), w = base.width();
  auto plane = [&](const nn::Var& pair, int idx) {
    return nn::reshape(t, nn::slice0(t, pair, idx, 1), {h, w});
  };
  std::vector<nn::Var> planes;
  planes.push_back(plane(d.x, 0));
  planes.push_back(plane(d.x, 1));
  planes.push_back(plane(d.z, 0));
  planes.push_back(plane(d.z, 1));
  planes.push_back(plane(d.u, 0));
  planes.push_back(plane(d.u, 1));
  planes.push_back(t.constant(base.x0->real()));
  planes.push_back(t.constant(base.x0->imag()));
  const double sn = fm::model_sigma_n(*base.model) / 255.0;
  planes.push_back(t.constant(Tensor::full({h, w}, sn)));
  planes.push_back(t.constant(
      Tensor::full({h, w}, static_cast<double>(next_t) / base.cfg.N)));
  return nn::stack0(t, planes);
}

nn::Var reward_diff(nn::Tape& t, const prox::DiffState& next,
                    const EnvState& base) {
  if (!base.x_gt) throw std::logic_error("reward_diff: ground truth absent");
  nn::Var psnr_next = prox::psnr_node(t, next.x, *base.x_gt);
  const double before = state_psnr(base);
  return nn::add_const(t, std::move(psnr_next), -before - base.cfg.eta);
}

}  // namespace pnprl::env
