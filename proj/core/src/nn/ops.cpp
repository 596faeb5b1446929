// Copyright 2026 The stackkd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stackkd/nn/ops.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stackkd::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

// Bias gradients are summed with plain loops: Eigen reductions into a Map pick
// their summation order from the destination's alignment, which made repeated
// runs differ in the last bit.
template <typename M>
void add_row_sums(const M& m, double* dst) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) s += m(r, c);
    dst[r] += s;
  }
}

template <typename M>
void add_col_sums(const M& m, double* dst) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) dst[c] += m(r, c);
}

void require_rank(const Var& x, int rank, const char* op) {
  if (x.value().rank() != rank)
    throw Error(std::string(op) + ": expected rank " + std::to_string(rank) + " input, got " +
                x.value().shape_string());
}

struct ConvGeom {
  int c, h, w, kh, kw, stride, pad, ho, wo;
};

void im2col(const double* img, const ConvGeom& g, double* cols) {
  const int hw = g.ho * g.wo;
  for (int c = 0; c < g.c; ++c)
    for (int ky = 0; ky < g.kh; ++ky)
      for (int kx = 0; kx < g.kw; ++kx) {
        double* row = cols + static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx) * hw;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            row[oy * g.wo + ox] = (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w)
                                      ? 0.0
                                      : img[(static_cast<std::size_t>(c) * g.h + iy) * g.w + ix];
          }
        }
      }
}

void col2im(const double* cols, const ConvGeom& g, double* img) {
  const int hw = g.ho * g.wo;
  for (int c = 0; c < g.c; ++c)
    for (int ky = 0; ky < g.kh; ++ky)
      for (int kx = 0; kx < g.kw; ++kx) {
        const double* row = cols + static_cast<std::size_t>((c * g.kh + ky) * g.kw + kx) * hw;
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix < 0 || ix >= g.w) continue;
            img[(static_cast<std::size_t>(c) * g.h + iy) * g.w + ix] += row[oy * g.wo + ox];
          }
        }
      }
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int pad) {
  require_rank(x, 4, "conv2d");
  require_rank(weight, 4, "conv2d");
  const auto& xs = x.shape();
  const auto& ws = weight.shape();
  if (ws[1] != xs[1])
    throw Error("conv2d: weight " + weight.value().shape_string() + " does not match input " +
                x.value().shape_string());
  ConvGeom g{xs[1], xs[2], xs[3], ws[2], ws[3], stride, pad, 0, 0};
  g.ho = (g.h + 2 * pad - g.kh) / stride + 1;
  g.wo = (g.w + 2 * pad - g.kw) / stride + 1;
  if (g.ho <= 0 || g.wo <= 0) throw Error("conv2d: input " + x.value().shape_string() + " too small");
  const int n = xs[0], o = ws[0];
  const int ckk = g.c * g.kh * g.kw, hw = g.ho * g.wo;

  Tensor out({n, o, g.ho, g.wo});
  std::vector<double> cols(static_cast<std::size_t>(ckk) * hw);
  CMapMat wm(weight.value().data(), o, ckk);
  for (int i = 0; i < n; ++i) {
    im2col(x.value().data() + static_cast<std::size_t>(i) * g.c * g.h * g.w, g, cols.data());
    MapMat om(out.data() + static_cast<std::size_t>(i) * o * hw, o, hw);
    om.noalias() = wm * CMapMat(cols.data(), ckk, hw);
    if (bias) om.colwise() += Eigen::Map<const Eigen::VectorXd>(bias.value().data(), o);
  }

  return make_result(std::move(out), {x, weight, bias}, [x, weight, bias, g, n, o, ckk, hw](Node& self) {
    std::vector<double> cols(static_cast<std::size_t>(ckk) * hw);
    std::vector<double> dcols(static_cast<std::size_t>(ckk) * hw);
    CMapMat wm(weight.value().data(), o, ckk);
    const std::size_t in_stride = static_cast<std::size_t>(g.c) * g.h * g.w;
    for (int i = 0; i < n; ++i) {
      CMapMat dout(self.grad.data() + static_cast<std::size_t>(i) * o * hw, o, hw);
      if (weight.requires_grad()) {
        im2col(x.value().data() + i * in_stride, g, cols.data());
        MapMat(weight.node()->ensure_grad().data(), o, ckk).noalias() +=
            dout * CMapMat(cols.data(), ckk, hw).transpose();
      }
      if (bias && bias.requires_grad())
        add_row_sums(dout, bias.node()->ensure_grad().data());
      if (x.requires_grad()) {
        MapMat(dcols.data(), ckk, hw).noalias() = wm.transpose() * dout;
        col2im(dcols.data(), g, x.node()->ensure_grad().data() + i * in_stride);
      }
    }
  });
}

namespace {

Var batch_norm_impl(const Var& x, const Var& gamma, const Var& beta, const BatchNormStats& running,
                    BatchNormStats* update, double momentum, double eps) {
  require_rank(x, 4, "batch_norm");
  const bool training = update != nullptr;
  const int n = x.shape()[0], c = x.shape()[1];
  const int hw = x.shape()[2] * x.shape()[3];
  const std::size_t m = static_cast<std::size_t>(n) * hw;
  if (running.running_mean.size() != static_cast<std::size_t>(c) ||
      running.running_var.size() != static_cast<std::size_t>(c))
    throw Error("batch_norm: statistics do not match " + std::to_string(c) + " channels");
  std::vector<double> mean(c), invstd(c);
  const double* xv = x.value().data();
  auto at = [&](int i, int ch, int k) { return (static_cast<std::size_t>(i) * c + ch) * hw + k; };
  if (training) {
    if (m < 2) throw Error("batch_norm: training needs more than one value per channel");
    for (int ch = 0; ch < c; ++ch) {
      double s = 0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < hw; ++k) s += xv[at(i, ch, k)];
      const double mu = s / m;
      double v = 0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < hw; ++k) v += (xv[at(i, ch, k)] - mu) * (xv[at(i, ch, k)] - mu);
      const double var = v / m;
      mean[ch] = mu;
      invstd[ch] = 1.0 / std::sqrt(var + eps);
      update->running_mean[ch] = (1 - momentum) * update->running_mean[ch] + momentum * mu;
      update->running_var[ch] = (1 - momentum) * update->running_var[ch] + momentum * v / (m - 1);
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      mean[ch] = running.running_mean[ch];
      invstd[ch] = 1.0 / std::sqrt(running.running_var[ch] + eps);
    }
  }
  Tensor xhat(x.shape());
  Tensor out(x.shape());
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int k = 0; k < hw; ++k) {
        const auto idx = at(i, ch, k);
        xhat[idx] = (xv[idx] - mean[ch]) * invstd[ch];
        out[idx] = gamma.value()[ch] * xhat[idx] + beta.value()[ch];
      }

  return make_result(std::move(out), {x, gamma, beta},
                     [x, gamma, beta, xhat = std::move(xhat), invstd, training, n, c, hw, m](Node& self) {
    auto at = [&](int i, int ch, int k) { return (static_cast<std::size_t>(i) * c + ch) * hw + k; };
    const Tensor& dy = self.grad;
    for (int ch = 0; ch < c; ++ch) {
      double sum_dy = 0, sum_dy_xhat = 0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < hw; ++k) {
          sum_dy += dy[at(i, ch, k)];
          sum_dy_xhat += dy[at(i, ch, k)] * xhat[at(i, ch, k)];
        }
      if (gamma.requires_grad()) gamma.node()->ensure_grad()[ch] += sum_dy_xhat;
      if (beta.requires_grad()) beta.node()->ensure_grad()[ch] += sum_dy;
      if (!x.requires_grad()) continue;
      Tensor& dx = x.node()->ensure_grad();
      const double g = gamma.value()[ch];
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < hw; ++k) {
          const auto idx = at(i, ch, k);
          if (training) {
            dx[idx] += g * invstd[ch] / m * (m * dy[idx] - sum_dy - xhat[idx] * sum_dy_xhat);
          } else {
            dx[idx] += g * invstd[ch] * dy[idx];
          }
        }
    }
  });
}

}  // namespace

Var batch_norm_training(const Var& x, const Var& gamma, const Var& beta, BatchNormStats& stats,
                        double momentum, double eps) {
  return batch_norm_impl(x, gamma, beta, stats, &stats, momentum, eps);
}

Var batch_norm_inference(const Var& x, const Var& gamma, const Var& beta, const BatchNormStats& stats,
                         double eps) {
  return batch_norm_impl(x, gamma, beta, stats, nullptr, 0.0, eps);
}

Var relu(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, x.value()[i]);
  return make_result(std::move(out), {x}, [x](Node& self) {
    Tensor& dx = x.node()->ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (x.value()[i] > 0) dx[i] += self.grad[i];
  });
}

Var max_pool2d(const Var& x, int kernel_h, int kernel_w, int stride_h, int stride_w) {
  require_rank(x, 4, "max_pool2d");
  const int n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
  const int ho = (h - kernel_h) / stride_h + 1;
  const int wo = (w - kernel_w) / stride_w + 1;
  if (ho <= 0 || wo <= 0) throw Error("max_pool2d: input " + x.value().shape_string() + " too small");
  Tensor out({n, c, ho, wo});
  std::vector<std::size_t> argmax(out.size());
  const double* xv = x.value().data();
  std::size_t o = 0;
  for (int p = 0; p < n * c; ++p) {
    const std::size_t base = static_cast<std::size_t>(p) * h * w;
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox, ++o) {
        std::size_t best = base + static_cast<std::size_t>(oy * stride_h) * w + ox * stride_w;
        for (int ky = 0; ky < kernel_h; ++ky)
          for (int kx = 0; kx < kernel_w; ++kx) {
            const std::size_t idx = base + static_cast<std::size_t>(oy * stride_h + ky) * w + ox * stride_w + kx;
            if (xv[idx] > xv[best]) best = idx;
          }
        argmax[o] = best;
        out[o] = xv[best];
      }
  }
  return make_result(std::move(out), {x}, [x, argmax = std::move(argmax)](Node& self) {
    Tensor& dx = x.node()->ensure_grad();
    for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += self.grad[i];
  });
}

Var adaptive_avg_pool_width(const Var& x, int out_width) {
  require_rank(x, 4, "adaptive_avg_pool_width");
  const int n = x.shape()[0], c = x.shape()[1], h = x.shape()[2], w = x.shape()[3];
  if (out_width <= 0 || out_width > w) throw Error("adaptive_avg_pool_width: bad output width");
  if (out_width == w) return x;
  std::vector<int> lo(out_width), hi(out_width);
  for (int i = 0; i < out_width; ++i) {
    lo[i] = (i * w) / out_width;
    hi[i] = ((i + 1) * w + out_width - 1) / out_width;
  }
  Tensor out({n, c, h, out_width});
  const std::size_t rows = static_cast<std::size_t>(n) * c * h;
  for (std::size_t r = 0; r < rows; ++r)
    for (int i = 0; i < out_width; ++i) {
      double s = 0;
      for (int k = lo[i]; k < hi[i]; ++k) s += x.value()[r * w + k];
      out[r * out_width + i] = s / (hi[i] - lo[i]);
    }
  return make_result(std::move(out), {x}, [x, lo, hi, rows, w, out_width](Node& self) {
    Tensor& dx = x.node()->ensure_grad();
    for (std::size_t r = 0; r < rows; ++r)
      for (int i = 0; i < out_width; ++i) {
        const double g = self.grad[r * out_width + i] / (hi[i] - lo[i]);
        for (int k = lo[i]; k < hi[i]; ++k) dx[r * w + k] += g;
      }
  });
}

Var global_avg_pool(const Var& x) {
  require_rank(x, 4, "global_avg_pool");
  const int n = x.shape()[0], c = x.shape()[1];
  const int hw = x.shape()[2] * x.shape()[3];
  Tensor out({n, c});
  for (int p = 0; p < n * c; ++p) {
    double s = 0;
    for (int k = 0; k < hw; ++k) s += x.value()[static_cast<std::size_t>(p) * hw + k];
    out[p] = s / hw;
  }
  return make_result(std::move(out), {x}, [x, n, c, hw](Node& self) {
    Tensor& dx = x.node()->ensure_grad();
    for (int p = 0; p < n * c; ++p)
      for (int k = 0; k < hw; ++k) dx[static_cast<std::size_t>(p) * hw + k] += self.grad[p] / hw;
  });
}

Var add(const Var& a, const Var& b) {
  if (a.shape() != b.shape())
    throw Error("add: shape mismatch " + a.value().shape_string() + " vs " + b.value().shape_string());
  Tensor out = a.value();
  out.add_(b.value());
  return make_result(std::move(out), {a, b}, [a, b](Node& self) {
    if (a.requires_grad()) a.node()->ensure_grad().add_(self.grad);
    if (b.requires_grad()) b.node()->ensure_grad().add_(self.grad);
  });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  require_rank(x, 2, "linear");
  const int n = x.shape()[0], in = x.shape()[1], o = weight.shape()[0];
  if (weight.shape()[1] != in)
    throw Error("linear: weight " + weight.value().shape_string() + " does not match input " +
                x.value().shape_string());
  Tensor out({n, o});
  MapMat om(out.data(), n, o);
  om.noalias() = CMapMat(x.value().data(), n, in) * CMapMat(weight.value().data(), o, in).transpose();
  if (bias) om.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), o);
  return make_result(std::move(out), {x, weight, bias}, [x, weight, bias, n, in, o](Node& self) {
    CMapMat dout(self.grad.data(), n, o);
    if (weight.requires_grad())
      MapMat(weight.node()->ensure_grad().data(), o, in).noalias() +=
          dout.transpose() * CMapMat(x.value().data(), n, in);
    if (bias && bias.requires_grad())
      add_col_sums(dout, bias.node()->ensure_grad().data());
    if (x.requires_grad())
      MapMat(x.node()->ensure_grad().data(), n, in).noalias() +=
          dout * CMapMat(weight.value().data(), o, in);
  });
}

Var reshape(const Var& x, std::vector<int> shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return make_result(std::move(out), {x}, [x](Node& self) { x.node()->ensure_grad().add_(self.grad); });
}

Var flatten(const Var& x) {
  const int n = x.shape().at(0);
  return reshape(x, {n, static_cast<int>(x.value().size() / static_cast<std::size_t>(n))});
}

Var columns_to_sequence(const Var& x) {
  require_rank(x, 4, "columns_to_sequence");
  const int n = x.shape()[0], c = x.shape()[1], w = x.shape()[3];
  if (x.shape()[2] != 1) throw Error("columns_to_sequence: feature map height must be 1");
  Tensor out({w, n, c});
  for (int i = 0; i < n; ++i)
    for (int ch = 0; ch < c; ++ch)
      for (int t = 0; t < w; ++t)
        out[(static_cast<std::size_t>(t) * n + i) * c + ch] = x.value()[(static_cast<std::size_t>(i) * c + ch) * w + t];
  return make_result(std::move(out), {x}, [x, n, c, w](Node& self) {
    Tensor& dx = x.node()->ensure_grad();
    for (int i = 0; i < n; ++i)
      for (int ch = 0; ch < c; ++ch)
        for (int t = 0; t < w; ++t)
          dx[(static_cast<std::size_t>(i) * c + ch) * w + t] += self.grad[(static_cast<std::size_t>(t) * n + i) * c + ch];
  });
}

Var lstm(const Var& x, const Var& w_ih, const Var& w_hh, const Var& bias, bool reverse) {
  require_rank(x, 3, "lstm");
  const int T = x.shape()[0], n = x.shape()[1], in = x.shape()[2];
  const int h4 = w_ih.shape()[0], hid = h4 / 4;
  if (w_ih.shape()[1] != in || w_hh.shape()[0] != h4 || w_hh.shape()[1] != hid || h4 != 4 * hid)
    throw Error("lstm: weight shapes do not match input " + x.value().shape_string());

  // Input projections for all steps at once: [T*N, 4H].
  RowMat pre = CMapMat(x.value().data(), T * n, in) * CMapMat(w_ih.value().data(), h4, in).transpose();
  pre.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(bias.value().data(), h4);
  CMapMat whh(w_hh.value().data(), h4, hid);

  // Per step: activated gates [N,4H], cell state [N,H], tanh(cell) [N,H].
  auto gates = std::make_shared<std::vector<RowMat>>(T);
  auto cells = std::make_shared<std::vector<RowMat>>(T);
  auto tcells = std::make_shared<std::vector<RowMat>>(T);
  Tensor out({T, n, hid});
  RowMat h_prev = RowMat::Zero(n, hid), c_prev = RowMat::Zero(n, hid);
  for (int step = 0; step < T; ++step) {
    const int t = reverse ? T - 1 - step : step;
    RowMat a = pre.middleRows(static_cast<Eigen::Index>(t) * n, n);
    a.noalias() += h_prev * whh.transpose();
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < hid; ++k) {
        a(r, k) = sigmoid(a(r, k));
        a(r, hid + k) = sigmoid(a(r, hid + k));
        a(r, 2 * hid + k) = std::tanh(a(r, 2 * hid + k));
        a(r, 3 * hid + k) = sigmoid(a(r, 3 * hid + k));
      }
    RowMat c = a.middleCols(hid, hid).cwiseProduct(c_prev) +
               a.middleCols(0, hid).cwiseProduct(a.middleCols(2 * hid, hid));
    RowMat tc = c.array().tanh().matrix();
    RowMat h = a.middleCols(3 * hid, hid).cwiseProduct(tc);
    MapMat(out.data() + static_cast<std::size_t>(t) * n * hid, n, hid) = h;
    (*gates)[t] = std::move(a);
    (*cells)[t] = c;
    (*tcells)[t] = std::move(tc);
    h_prev = std::move(h);
    c_prev = std::move(c);
  }
  Tensor hidden_states = out;

  return make_result(std::move(out), {x, w_ih, w_hh, bias},
                     [x, w_ih, w_hh, bias, reverse, T, n, in, hid, h4, gates, cells, tcells,
                      hidden_states = std::move(hidden_states)](Node& self) {
    CMapMat whh(w_hh.value().data(), h4, hid);
    RowMat dpre(static_cast<Eigen::Index>(T) * n, h4);
    RowMat dh_next = RowMat::Zero(n, hid), dc_next = RowMat::Zero(n, hid);
    RowMat dwhh = RowMat::Zero(h4, hid);
    for (int step = T - 1; step >= 0; --step) {
      const int t = reverse ? T - 1 - step : step;
      const int t_prev = reverse ? t + 1 : t - 1;
      const bool has_prev = step > 0;
      const RowMat& a = (*gates)[t];
      const RowMat& tc = (*tcells)[t];
      RowMat dh = CMapMat(self.grad.data() + static_cast<std::size_t>(t) * n * hid, n, hid) + dh_next;
      RowMat dc = dc_next;
      RowMat da(n, h4);
      for (int r = 0; r < n; ++r)
        for (int k = 0; k < hid; ++k) {
          const double ig = a(r, k), fg = a(r, hid + k), gg = a(r, 2 * hid + k), og = a(r, 3 * hid + k);
          const double cp = has_prev ? (*cells)[t_prev](r, k) : 0.0;
          const double dct = dc(r, k) + dh(r, k) * og * (1 - tc(r, k) * tc(r, k));
          da(r, k) = dct * gg * ig * (1 - ig);
          da(r, hid + k) = dct * cp * fg * (1 - fg);
          da(r, 2 * hid + k) = dct * ig * (1 - gg * gg);
          da(r, 3 * hid + k) = dh(r, k) * tc(r, k) * og * (1 - og);
          dc(r, k) = dct * fg;
        }
      if (has_prev) {
        CMapMat hp(hidden_states.data() + static_cast<std::size_t>(t_prev) * n * hid, n, hid);
        dwhh.noalias() += da.transpose() * hp;
      }
      dh_next.noalias() = da * whh;
      dc_next = std::move(dc);
      dpre.middleRows(static_cast<Eigen::Index>(t) * n, n) = da;
    }
    if (w_hh.requires_grad()) MapMat(w_hh.node()->ensure_grad().data(), h4, hid) += dwhh;
    if (w_ih.requires_grad())
      MapMat(w_ih.node()->ensure_grad().data(), h4, in).noalias() +=
          dpre.transpose() * CMapMat(x.value().data(), T * n, in);
    if (bias.requires_grad())
      add_col_sums(dpre, bias.node()->ensure_grad().data());
    if (x.requires_grad())
      MapMat(x.node()->ensure_grad().data(), T * n, in).noalias() +=
          dpre * CMapMat(w_ih.value().data(), h4, in);
  });
}

Var concat_last(const Var& a, const Var& b) {
  require_rank(a, 3, "concat_last");
  require_rank(b, 3, "concat_last");
  const int T = a.shape()[0], n = a.shape()[1], fa = a.shape()[2], fb = b.shape()[2];
  if (b.shape()[0] != T || b.shape()[1] != n) throw Error("concat_last: leading dims differ");
  Tensor out({T, n, fa + fb});
  const std::size_t rows = static_cast<std::size_t>(T) * n;
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.value().data() + r * fa, fa, out.data() + r * (fa + fb));
    std::copy_n(b.value().data() + r * fb, fb, out.data() + r * (fa + fb) + fa);
  }
  return make_result(std::move(out), {a, b}, [a, b, rows, fa, fb](Node& self) {
    for (std::size_t r = 0; r < rows; ++r) {
      const double* g = self.grad.data() + r * (fa + fb);
      if (a.requires_grad()) {
        double* da = a.node()->ensure_grad().data() + r * fa;
        for (int k = 0; k < fa; ++k) da[k] += g[k];
      }
      if (b.requires_grad()) {
        double* db = b.node()->ensure_grad().data() + r * fb;
        for (int k = 0; k < fb; ++k) db[k] += g[fa + k];
      }
    }
  });
}

}  // namespace stackkd::nn
