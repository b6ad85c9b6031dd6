// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/ops.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pnprl/core/kernels.hpp"

namespace pnprl::nn {

namespace {

const kern::Kernels& K() { return kern::k(); }

bool is_scalar(const Var& v) { return v->val.numel() == 1; }

void check_same_or_scalar(const Var& a, const Var& b, const char* who) {
  if (!a->val.same_shape(b->val) && !is_scalar(a) && !is_scalar(b))
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

// im2col / col2im for [C,H,W] tensors and [Co,Ci,kh,kw] kernels.
struct ConvDims {
  int ci, h, w, co, kh, kw, stride, pad, ho, wo;
  std::size_t krows() const { return static_cast<std::size_t>(ci) * kh * kw; }
  std::size_t cols() const { return static_cast<std::size_t>(ho) * wo; }
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride, int pad) {
  ConvDims d;
  d.ci = x.dim(0);
  d.h = x.dim(1);
  d.w = x.dim(2);
  d.co = w.dim(0);
  d.kh = w.dim(2);
  d.kw = w.dim(3);
  d.stride = stride;
  d.pad = pad;
  if (w.dim(1) != d.ci) throw std::invalid_argument("conv2d: channel mismatch");
  d.ho = (d.h + 2 * pad - d.kh) / stride + 1;
  d.wo = (d.w + 2 * pad - d.kw) / stride + 1;
  if (d.ho <= 0 || d.wo <= 0) throw std::invalid_argument("conv2d: empty output");
  return d;
}

void im2col(const Tensor& x, const ConvDims& d, std::vector<double>& col) {
  col.assign(d.krows() * d.cols(), 0.0);
  for (int ci = 0; ci < d.ci; ++ci) {
    const double* plane = x.data() + static_cast<std::size_t>(ci) * d.h * d.w;
    for (int ki = 0; ki < d.kh; ++ki) {
      for (int kj = 0; kj < d.kw; ++kj) {
        double* row = col.data() +
                      ((static_cast<std::size_t>(ci) * d.kh + ki) * d.kw + kj) *
                          d.cols();
        for (int oi = 0; oi < d.ho; ++oi) {
          const int ii = oi * d.stride + ki - d.pad;
          if (ii < 0 || ii >= d.h) continue;
          double* dst = row + static_cast<std::size_t>(oi) * d.wo;
          const double* src = plane + static_cast<std::size_t>(ii) * d.w;
          for (int oj = 0; oj < d.wo; ++oj) {
            const int jj = oj * d.stride + kj - d.pad;
            if (jj >= 0 && jj < d.w) dst[oj] = src[jj];
          }
        }
      }
    }
  }
}

void col2im_accum(const std::vector<double>& col, const ConvDims& d, Tensor& gx) {
  for (int ci = 0; ci < d.ci; ++ci) {
    double* plane = gx.data() + static_cast<std::size_t>(ci) * d.h * d.w;
    for (int ki = 0; ki < d.kh; ++ki) {
      for (int kj = 0; kj < d.kw; ++kj) {
        const double* row = col.data() +
                            ((static_cast<std::size_t>(ci) * d.kh + ki) * d.kw + kj) *
                                d.cols();
        for (int oi = 0; oi < d.ho; ++oi) {
          const int ii = oi * d.stride + ki - d.pad;
          if (ii < 0 || ii >= d.h) continue;
          const double* src = row + static_cast<std::size_t>(oi) * d.wo;
          double* dst = plane + static_cast<std::size_t>(ii) * d.w;
          for (int oj = 0; oj < d.wo; ++oj) {
            const int jj = oj * d.stride + kj - d.pad;
            if (jj >= 0 && jj < d.w) dst[jj] += src[oj];
          }
        }
      }
    }
  }
}

void transpose(const double* a, int rows, int cols, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(j) * rows + i] =
          a[static_cast<std::size_t>(i) * cols + j];
}

}  // namespace

Var add(Tape& t, Var a, Var b) {
  check_same_or_scalar(a, b, "add");
  Tensor out = is_scalar(a) && !is_scalar(b) ? b->val : a->val;
  if (is_scalar(b) && !is_scalar(a)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->val[i] + b->val[0];
  } else if (is_scalar(a) && !is_scalar(b)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->val[0] + b->val[i];
  } else {
    K().add(a->val.data(), b->val.data(), out.data(), out.numel());
  }
  return t.make("add", std::move(out), {a, b}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      Var& in = self.inputs[k];
      if (!in->requires_grad) continue;
      if (in->val.numel() == self.grad.numel()) {
        in->accum_grad(self.grad);
      } else {
        in->accum_grad_at(0, K().sum(self.grad.data(), self.grad.numel()));
      }
    }
  });
}

Var sub(Tape& t, Var a, Var b) {
  check_same_or_scalar(a, b, "sub");
  Tensor out = is_scalar(a) && !is_scalar(b) ? b->val : a->val;
  if (is_scalar(b) && !is_scalar(a)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->val[i] - b->val[0];
  } else if (is_scalar(a) && !is_scalar(b)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->val[0] - b->val[i];
  } else {
    K().sub(a->val.data(), b->val.data(), out.data(), out.numel());
  }
  return t.make("sub", std::move(out), {a, b}, [](Node& self) {
    Var& a_ = self.inputs[0];
    Var& b_ = self.inputs[1];
    if (a_->requires_grad) {
      if (a_->val.numel() == self.grad.numel())
        a_->accum_grad(self.grad);
      else
        a_->accum_grad_at(0, K().sum(self.grad.data(), self.grad.numel()));
    }
    if (b_->requires_grad) {
      if (b_->val.numel() == self.grad.numel()) {
        Tensor g = self.grad;
        K().scal(-1.0, g.data(), g.numel());
        b_->accum_grad(g);
      } else {
        b_->accum_grad_at(0, -K().sum(self.grad.data(), self.grad.numel()));
      }
    }
  });
}

Var mul(Tape& t, Var a, Var b) {
  check_same_or_scalar(a, b, "mul");
  Tensor out = is_scalar(a) && !is_scalar(b) ? b->val : a->val;
  if (is_scalar(b) && !is_scalar(a)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->val[i] * b->val[0];
  } else if (is_scalar(a) && !is_scalar(b)) {
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a->val[0] * b->val[i];
  } else {
    K().mul(a->val.data(), b->val.data(), out.data(), out.numel());
  }
  return t.make("mul", std::move(out), {a, b}, [](Node& self) {
    Var& a_ = self.inputs[0];
    Var& b_ = self.inputs[1];
    auto side = [&](Var& x, Var& other) {
      if (!x->requires_grad) return;
      if (x->val.numel() == self.grad.numel()) {
        Tensor g(self.grad.shape());
        if (other->val.numel() == 1) {
          for (std::size_t i = 0; i < g.numel(); ++i)
            g[i] = self.grad[i] * other->val[0];
        } else {
          K().mul(self.grad.data(), other->val.data(), g.data(), g.numel());
        }
        x->accum_grad(g);
      } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < self.grad.numel(); ++i)
          acc += self.grad[i] * other->val[i];
        x->accum_grad_at(0, acc);
      }
    };
    side(a_, b_);
    side(b_, a_);
  });
}

Var neg(Tape& t, Var a) { return mul_const(t, std::move(a), -1.0); }

Var add_const(Tape& t, Var a, double c) {
  Tensor out = a->val;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += c;
  return t.make("add_const", std::move(out), {a}, [](Node& self) {
    self.inputs[0]->accum_grad(self.grad);
  });
}

Var mul_const(Tape& t, Var a, double c) {
  Tensor out = a->val;
  K().scal(c, out.data(), out.numel());
  return t.make("mul_const", std::move(out), {a}, [c](Node& self) {
    Tensor g = self.grad;
    K().scal(c, g.data(), g.numel());
    self.inputs[0]->accum_grad(g);
  });
}

Var square(Tape& t, Var a) {
  Tensor out(a->val.shape());
  K().mul(a->val.data(), a->val.data(), out.data(), out.numel());
  return t.make("square", std::move(out), {a}, [](Node& self) {
    Tensor g(self.grad.shape());
    K().mul(self.grad.data(), self.inputs[0]->val.data(), g.data(), g.numel());
    K().scal(2.0, g.data(), g.numel());
    self.inputs[0]->accum_grad(g);
  });
}

Var max_const(Tape& t, Var a, double c) {
  Tensor out = a->val;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(out[i], c);
  return t.make("max_const", std::move(out), {a}, [c](Node& self) {
    Tensor g = Tensor::zeros(self.grad.shape());
    const Tensor& x = self.inputs[0]->val;
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (x[i] > c) g[i] = self.grad[i];
    self.inputs[0]->accum_grad(g);
  });
}

Var min_const(Tape& t, Var a, double c) {
  Tensor out = a->val;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::min(out[i], c);
  return t.make("min_const", std::move(out), {a}, [c](Node& self) {
    Tensor g = Tensor::zeros(self.grad.shape());
    const Tensor& x = self.inputs[0]->val;
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (x[i] < c) g[i] = self.grad[i];
    self.inputs[0]->accum_grad(g);
  });
}

Var silu(Tape& t, Var a) {
  Tensor out(a->val.shape());
  K().silu(a->val.data(), out.data(), out.numel());
  return t.make("silu", std::move(out), {a}, [](Node& self) {
    Var& in = self.inputs[0];
    if (in->grad.empty()) in->grad = Tensor::zeros(in->val.shape());
    K().silu_bwd(in->val.data(), self.grad.data(), in->grad.data(),
                 in->val.numel());
  });
}

Var sigmoid(Tape& t, Var a) {
  Tensor out(a->val.shape());
  K().sigmoid(a->val.data(), out.data(), out.numel());
  return t.make("sigmoid", std::move(out), {a}, [](Node& self) {
    Tensor g(self.grad.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) {
      const double s = self.val[i];
      g[i] = self.grad[i] * s * (1.0 - s);
    }
    self.inputs[0]->accum_grad(g);
  });
}

Var log_softmax(Tape& t, Var logits) {
  const Tensor& x = logits->val;
  double mx = x[0];
  for (std::size_t i = 1; i < x.numel(); ++i) mx = std::max(mx, x[i]);
  double lse = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) lse += std::exp(x[i] - mx);
  lse = mx + std::log(lse);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = x[i] - lse;
  return t.make("log_softmax", std::move(out), {logits}, [](Node& self) {
    const double gsum = K().sum(self.grad.data(), self.grad.numel());
    Tensor g(self.grad.shape());
    for (std::size_t i = 0; i < g.numel(); ++i)
      g[i] = self.grad[i] - std::exp(self.val[i]) * gsum;
    self.inputs[0]->accum_grad(g);
  });
}

Var sum(Tape& t, Var a) {
  return t.make("sum", Tensor::scalar(K().sum(a->val.data(), a->val.numel())),
                {a}, [](Node& self) {
                  Var& in = self.inputs[0];
                  Tensor g = Tensor::full(in->val.shape(), self.grad[0]);
                  in->accum_grad(g);
                });
}

Var mean(Tape& t, Var a) {
  const double inv = 1.0 / static_cast<double>(a->val.numel());
  return t.make("mean",
                Tensor::scalar(K().sum(a->val.data(), a->val.numel()) * inv),
                {a}, [inv](Node& self) {
                  Var& in = self.inputs[0];
                  Tensor g = Tensor::full(in->val.shape(), self.grad[0] * inv);
                  in->accum_grad(g);
                });
}

Var pick(Tape& t, Var a, std::size_t i) {
  if (i >= a->val.numel()) throw std::out_of_range("pick: index");
  return t.make("pick", Tensor::scalar(a->val[i]), {a}, [i](Node& self) {
    self.inputs[0]->accum_grad_at(i, self.grad[0]);
  });
}

Var l1_loss(Tape& t, Var a, Var b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("l1_loss: shapes");
  const std::size_t n = a->val.numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a->val[i] - b->val[i]);
  return t.make("l1_loss", Tensor::scalar(acc / n), {a, b}, [n](Node& self) {
    const double g = self.grad[0] / static_cast<double>(n);
    const Tensor& av = self.inputs[0]->val;
    const Tensor& bv = self.inputs[1]->val;
    Tensor ga(av.shape());
    for (std::size_t i = 0; i < n; ++i) {
      const double d = av[i] - bv[i];
      ga[i] = d > 0 ? g : (d < 0 ? -g : 0.0);
    }
    if (self.inputs[0]->requires_grad) self.inputs[0]->accum_grad(ga);
    if (self.inputs[1]->requires_grad) {
      K().scal(-1.0, ga.data(), ga.numel());
      self.inputs[1]->accum_grad(ga);
    }
  });
}

Var mse_loss(Tape& t, Var a, Var b) {
  if (!a->val.same_shape(b->val)) throw std::invalid_argument("mse_loss: shapes");
  const std::size_t n = a->val.numel();
  const double v = K().sumsq_diff(a->val.data(), b->val.data(), n) / n;
  return t.make("mse_loss", Tensor::scalar(v), {a, b}, [n](Node& self) {
    const double g = 2.0 * self.grad[0] / static_cast<double>(n);
    const Tensor& av = self.inputs[0]->val;
    const Tensor& bv = self.inputs[1]->val;
    Tensor ga(av.shape());
    K().sub(av.data(), bv.data(), ga.data(), n);
    K().scal(g, ga.data(), n);
    if (self.inputs[0]->requires_grad) self.inputs[0]->accum_grad(ga);
    if (self.inputs[1]->requires_grad) {
      K().scal(-1.0, ga.data(), ga.numel());
      self.inputs[1]->accum_grad(ga);
    }
  });
}

Var reshape(Tape& t, Var a, std::vector<int> shape) {
  Tensor out = a->val.reshaped(shape);
  return t.make("reshape", std::move(out), {a}, [](Node& self) {
    self.inputs[0]->accum_grad(self.grad.reshaped(self.inputs[0]->val.shape()));
  });
}

Var concat_vec(Tape& t, Var a, Var b) {
  if (a->val.rank() != 1 || b->val.rank() != 1)
    throw std::invalid_argument("concat_vec: 1-D inputs expected");
  const std::size_t na = a->val.numel(), nb = b->val.numel();
  Tensor out({static_cast<int>(na + nb)});
  std::memcpy(out.data(), a->val.data(), na * sizeof(double));
  std::memcpy(out.data() + na, b->val.data(), nb * sizeof(double));
  return t.make("concat_vec", std::move(out), {a, b}, [na, nb](Node& self) {
    if (self.inputs[0]->requires_grad) {
      Tensor g({static_cast<int>(na)});
      std::memcpy(g.data(), self.grad.data(), na * sizeof(double));
      self.inputs[0]->accum_grad(g);
    }
    if (self.inputs[1]->requires_grad) {
      Tensor g({static_cast<int>(nb)});
      std::memcpy(g.data(), self.grad.data() + na, nb * sizeof(double));
      self.inputs[1]->accum_grad(g);
    }
  });
}

Var stack0(Tape& t, const std::vector<Var>& planes) {
  if (planes.empty()) throw std::invalid_argument("stack0: empty");
  const int h = planes[0]->val.dim(0), w = planes[0]->val.dim(1);
  Tensor out({static_cast<int>(planes.size()), h, w});
  const std::size_t plane_n = static_cast<std::size_t>(h) * w;
  for (std::size_t c = 0; c < planes.size(); ++c) {
    if (planes[c]->val.rank() != 2 || planes[c]->val.dim(0) != h ||
        planes[c]->val.dim(1) != w)
      throw std::invalid_argument("stack0: plane shapes differ");
    std::memcpy(out.data() + c * plane_n, planes[c]->val.data(),
                plane_n * sizeof(double));
  }
  std::vector<Var> ins(planes.begin(), planes.end());
  return t.make("stack0", std::move(out), std::move(ins), [plane_n](Node& self) {
    for (std::size_t c = 0; c < self.inputs.size(); ++c) {
      Var& in = self.inputs[c];
      if (!in->requires_grad) continue;
      Tensor g(in->val.shape());
      std::memcpy(g.data(), self.grad.data() + c * plane_n,
                  plane_n * sizeof(double));
      in->accum_grad(g);
    }
  });
}

Var slice0(Tape& t, Var a, int c0, int count) {
  const int C = a->val.dim(0), h = a->val.dim(1), w = a->val.dim(2);
  if (c0 < 0 || c0 + count > C) throw std::out_of_range("slice0");
  const std::size_t plane_n = static_cast<std::size_t>(h) * w;
  Tensor out({count, h, w});
  std::memcpy(out.data(), a->val.data() + c0 * plane_n,
              out.numel() * sizeof(double));
  return t.make("slice0", std::move(out), {a}, [c0, plane_n](Node& self) {
    Var& in = self.inputs[0];
    if (in->grad.empty()) in->grad = Tensor::zeros(in->val.shape());
    K().add(in->grad.data() + c0 * plane_n, self.grad.data(),
            in->grad.data() + c0 * plane_n, self.grad.numel());
  });
}

Var concat0(Tape& t, Var a, Var b) {
  const int ca = a->val.dim(0), cb = b->val.dim(0);
  const int h = a->val.dim(1), w = a->val.dim(2);
  if (b->val.dim(1) != h || b->val.dim(2) != w)
    throw std::invalid_argument("concat0: spatial shapes differ");
  Tensor out({ca + cb, h, w});
  std::memcpy(out.data(), a->val.data(), a->val.numel() * sizeof(double));
  std::memcpy(out.data() + a->val.numel(), b->val.data(),
              b->val.numel() * sizeof(double));
  return t.make("concat0", std::move(out), {a, b}, [](Node& self) {
    Var& a_ = self.inputs[0];
    Var& b_ = self.inputs[1];
    const std::size_t na = a_->val.numel();
    if (a_->requires_grad) {
      Tensor g(a_->val.shape());
      std::memcpy(g.data(), self.grad.data(), na * sizeof(double));
      a_->accum_grad(g);
    }
    if (b_->requires_grad) {
      Tensor g(b_->val.shape());
      std::memcpy(g.data(), self.grad.data() + na,
                  b_->val.numel() * sizeof(double));
      b_->accum_grad(g);
    }
  });
}

Var broadcast_plane(Tape& t, Var s, int h, int w) {
  if (s->val.numel() != 1)
    throw std::invalid_argument("broadcast_plane: scalar expected");
  return t.make("broadcast_plane", Tensor::full({h, w}, s->val[0]), {s},
                [](Node& self) {
                  self.inputs[0]->accum_grad_at(
                      0, K().sum(self.grad.data(), self.grad.numel()));
                });
}

Var pad_reflect(Tape& t, Var x, int top, int bottom, int left, int right) {
  const int C = x->val.dim(0), h = x->val.dim(1), w = x->val.dim(2);
  if (top >= h || bottom >= h || left >= w || right >= w)
    throw std::invalid_argument("pad_reflect: pad exceeds size");
  const int oh = h + top + bottom, ow = w + left + right;
  auto mirror = [](int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
  };
  Tensor out({C, oh, ow});
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j)
        out.at(c, i, j) = x->val.at(c, mirror(i - top, h), mirror(j - left, w));
  return t.make("pad_reflect", std::move(out), {x},
                [top, left, h, w, mirror](Node& self) {
                  Var& in = self.inputs[0];
                  const int C = in->val.dim(0);
                  const int oh = self.val.dim(1), ow = self.val.dim(2);
                  Tensor g = Tensor::zeros(in->val.shape());
                  for (int c = 0; c < C; ++c)
                    for (int i = 0; i < oh; ++i)
                      for (int j = 0; j < ow; ++j)
                        g.at(c, mirror(i - top, h), mirror(j - left, w)) +=
                            self.grad.at(c, i, j);
                  in->accum_grad(g);
                });
}

Var crop(Tape& t, Var x, int top, int h, int left, int w) {
  const int C = x->val.dim(0), ih = x->val.dim(1), iw = x->val.dim(2);
  if (top + h > ih || left + w > iw) throw std::out_of_range("crop");
  Tensor out({C, h, w});
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < h; ++i)
      std::memcpy(&out.at(c, i, 0), &x->val.at(c, top + i, left),
                  static_cast<std::size_t>(w) * sizeof(double));
  return t.make("crop", std::move(out), {x}, [top, left](Node& self) {
    Var& in = self.inputs[0];
    if (in->grad.empty()) in->grad = Tensor::zeros(in->val.shape());
    const int C = self.val.dim(0), h = self.val.dim(1), w = self.val.dim(2);
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          in->grad.at(c, top + i, left + j) += self.grad.at(c, i, j);
  });
}

Var linear(Tape& t, Var x, Var w, Var b) {
  const int m = w->val.dim(0), n = w->val.dim(1);
  if (x->val.numel() != static_cast<std::size_t>(n) ||
      b->val.numel() != static_cast<std::size_t>(m))
    throw std::invalid_argument("linear: shape mismatch");
  Tensor out({m});
  K().gemm(m, 1, n, 1.0, w->val.data(), n, x->val.data(), 1, 0.0, out.data(), 1);
  K().add(out.data(), b->val.data(), out.data(), out.numel());
  return t.make("linear", std::move(out), {x, w, b}, [m, n](Node& self) {
    Var& x_ = self.inputs[0];
    Var& w_ = self.inputs[1];
    Var& b_ = self.inputs[2];
    const Tensor& gy = self.grad;
    if (b_->requires_grad) b_->accum_grad(gy);
    if (w_->requires_grad) {
      if (w_->grad.empty()) w_->grad = Tensor::zeros(w_->val.shape());
      // dW += gy (m x 1) * x^T (1 x n)
      K().gemm(m, n, 1, 1.0, gy.data(), 1, x_->val.data(), n, 1.0,
               w_->grad.data(), n);
    }
    if (x_->requires_grad) {
      thread_local std::vector<double> wt;
      transpose(w_->val.data(), m, n, wt);
      Tensor gx({n});
      K().gemm(n, 1, m, 1.0, wt.data(), m, gy.data(), 1, 0.0, gx.data(), 1);
      x_->accum_grad(gx.reshaped(x_->val.shape()));
    }
  });
}

Var conv2d(Tape& t, Var x, Var w, Var b, int stride, int pad) {
  const ConvDims d = conv_dims(x->val, w->val, stride, pad);
  thread_local std::vector<double> col;
  im2col(x->val, d, col);
  Tensor out({d.co, d.ho, d.wo});
  const int N = static_cast<int>(d.cols());
  const int Kr = static_cast<int>(d.krows());
  K().gemm(d.co, N, Kr, 1.0, w->val.data(), Kr, col.data(), N, 0.0, out.data(), N);
  for (int c = 0; c < d.co; ++c) {
    double* plane = out.data() + static_cast<std::size_t>(c) * d.cols();
    const double bias = b->val[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < d.cols(); ++i) plane[i] += bias;
  }
  return t.make("conv2d", std::move(out), {x, w, b}, [d](Node& self) {
    Var& x_ = self.inputs[0];
    Var& w_ = self.inputs[1];
    Var& b_ = self.inputs[2];
    const int N = static_cast<int>(d.cols());
    const int Kr = static_cast<int>(d.krows());
    const Tensor& gy = self.grad;

    if (b_->requires_grad) {
      Tensor gb({d.co});
      for (int c = 0; c < d.co; ++c)
        gb[c] = K().sum(gy.data() + static_cast<std::size_t>(c) * d.cols(),
                        d.cols());
      b_->accum_grad(gb);
    }
    if (w_->requires_grad) {
      thread_local std::vector<double> col_b, colT;
      im2col(x_->val, d, col_b);
      transpose(col_b.data(), Kr, N, colT);
      if (w_->grad.empty()) w_->grad = Tensor::zeros(w_->val.shape());
      K().gemm(d.co, Kr, N, 1.0, gy.data(), N, colT.data(), Kr, 1.0,
               w_->grad.data(), Kr);
    }
    if (x_->requires_grad) {
      thread_local std::vector<double> wt, dcol;
      transpose(w_->val.data(), d.co, Kr, wt);
      dcol.resize(static_cast<std::size_t>(Kr) * N);
      K().gemm(Kr, N, d.co, 1.0, wt.data(), d.co, gy.data(), N, 0.0,
               dcol.data(), N);
      if (x_->grad.empty()) x_->grad = Tensor::zeros(x_->val.shape());
      col2im_accum(dcol, d, x_->grad);
    }
  });
}

Var upsample_nearest2(Tape& t, Var x) {
  const int C = x->val.dim(0), h = x->val.dim(1), w = x->val.dim(2);
  Tensor out({C, 2 * h, 2 * w});
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        const double v = x->val.at(c, i, j);
        out.at(c, 2 * i, 2 * j) = v;
        out.at(c, 2 * i, 2 * j + 1) = v;
        out.at(c, 2 * i + 1, 2 * j) = v;
        out.at(c, 2 * i + 1, 2 * j + 1) = v;
      }
  return t.make("upsample_nearest2", std::move(out), {x}, [](Node& self) {
    Var& in = self.inputs[0];
    const int C = in->val.dim(0), h = in->val.dim(1), w = in->val.dim(2);
    Tensor g(in->val.shape());
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
          g.at(c, i, j) = self.grad.at(c, 2 * i, 2 * j) +
                          self.grad.at(c, 2 * i, 2 * j + 1) +
                          self.grad.at(c, 2 * i + 1, 2 * j) +
                          self.grad.at(c, 2 * i + 1, 2 * j + 1);
    in->accum_grad(g);
  });
}

Var global_avg_pool(Tape& t, Var x) {
  const int C = x->val.dim(0);
  const std::size_t n = static_cast<std::size_t>(x->val.dim(1)) * x->val.dim(2);
  Tensor out({C});
  for (int c = 0; c < C; ++c)
    out[c] = K().sum(x->val.data() + c * n, n) / static_cast<double>(n);
  return t.make("global_avg_pool", std::move(out), {x}, [n](Node& self) {
    Var& in = self.inputs[0];
    Tensor g(in->val.shape());
    const int C = in->val.dim(0);
    for (int c = 0; c < C; ++c) {
      const double v = self.grad[c] / static_cast<double>(n);
      double* plane = g.data() + c * n;
      for (std::size_t i = 0; i < n; ++i) plane[i] = v;
    }
    in->accum_grad(g);
  });
}

}  // namespace pnprl::nn
