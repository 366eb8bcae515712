// Copyright 2026 The Reflex Authors
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

#ifndef REFLEX_NETCORE_CONV_HPP_
#define REFLEX_NETCORE_CONV_HPP_

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "reflex/netcore/layers.hpp"
#include "reflex/netcore/tensor.hpp"

namespace reflex::net {

/// Geometry of one 3-D convolution: channels x spatial dims on the dense
/// side, kernel/stride/padding, and the resulting output dims.
struct ConvGeom {
  int channels = 0;
  std::array<int, 3> in = {0, 0, 0};
  int kernel = 3;
  int stride = 1;
  int pad = 0;
  std::array<int, 3> out = {0, 0, 0};

  static ConvGeom make(int channels, std::array<int, 3> in, int kernel, int stride,
                       int pad) {
    ConvGeom g;
    g.channels = channels;
    g.in = in;
    g.kernel = kernel;
    g.stride = stride;
    g.pad = pad;
    for (int a = 0; a < 3; ++a) {
      const int span = in[a] + 2 * pad - kernel;
      if (span < 0) throw std::invalid_argument("conv: kernel larger than padded input");
      g.out[a] = span / stride + 1;
    }
    return g;
  }

  int patch_rows() const { return channels * kernel * kernel * kernel; }
  int out_voxels() const { return out[0] * out[1] * out[2]; }
  int in_voxels() const { return in[0] * in[1] * in[2]; }
};

namespace detail {

/// Gathers receptive fields into a [patch_rows, out_voxels] row-major matrix.
template <typename T>
inline void im2col(const T* x, const ConvGeom& g, T* cols) {
  const int k = g.kernel, s = g.stride, p = g.pad;
  const int id = g.in[0], ih = g.in[1], iw = g.in[2];
  const int od = g.out[0], oh = g.out[1], ow = g.out[2];
  const int n_out = od * oh * ow;
  int row = 0;
  for (int c = 0; c < g.channels; ++c) {
    const T* xc = x + static_cast<std::size_t>(c) * id * ih * iw;
    for (int kd = 0; kd < k; ++kd)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw, ++row) {
          T* dst = cols + static_cast<std::size_t>(row) * n_out;
          for (int zd = 0; zd < od; ++zd) {
            const int sd = zd * s + kd - p;
            for (int zh = 0; zh < oh; ++zh) {
              const int sh = zh * s + kh - p;
              for (int zw = 0; zw < ow; ++zw, ++dst) {
                const int sw = zw * s + kw - p;
                const bool inside = sd >= 0 && sd < id && sh >= 0 && sh < ih &&
                                    sw >= 0 && sw < iw;
                *dst = inside ? xc[(sd * ih + sh) * iw + sw] : T(0);
              }
            }
          }
        }
  }
}

/// Adjoint of im2col: scatter-adds patch columns back onto the dense grid.
template <typename T>
inline void col2im(const T* cols, const ConvGeom& g, T* x) {
  const int k = g.kernel, s = g.stride, p = g.pad;
  const int id = g.in[0], ih = g.in[1], iw = g.in[2];
  const int od = g.out[0], oh = g.out[1], ow = g.out[2];
  const int n_out = od * oh * ow;
  int row = 0;
  for (int c = 0; c < g.channels; ++c) {
    T* xc = x + static_cast<std::size_t>(c) * id * ih * iw;
    for (int kd = 0; kd < k; ++kd)
      for (int kh = 0; kh < k; ++kh)
        for (int kw = 0; kw < k; ++kw, ++row) {
          const T* src = cols + static_cast<std::size_t>(row) * n_out;
          for (int zd = 0; zd < od; ++zd) {
            const int sd = zd * s + kd - p;
            for (int zh = 0; zh < oh; ++zh) {
              const int sh = zh * s + kh - p;
              for (int zw = 0; zw < ow; ++zw) {
                const int sw = zw * s + kw - p;
                if (sd >= 0 && sd < id && sh >= 0 && sh < ih && sw >= 0 && sw < iw)
                  xc[(sd * ih + sh) * iw + sw] += src[zd * oh * ow + zh * ow + zw];
              }
            }
          }
        }
  }
}

}  // namespace detail

/// 3-D convolution over [C, D, H, W] activations via im2col + GEMM.
template <typename T>
class Conv3d : public Module<T> {
 public:
  Conv3d(int in_channels, int out_channels, int kernel, int stride, int pad,
         Rng& rng, std::string name)
      : cin_(in_channels), cout_(out_channels), kernel_(kernel), stride_(stride),
        pad_(pad), name_(std::move(name)) {
    weight_ = Tensor<T>({out_channels, in_channels, kernel, kernel, kernel});
    bias_ = Tensor<T>({out_channels});
    const int fan_in = in_channels * kernel * kernel * kernel;
    weight_.init_kaiming(rng, fan_in);
    bias_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    weight_.ensure_grad();
    bias_.ensure_grad();
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.dims.size() != 4 || x.dims[0] != cin_)
      throw std::invalid_argument("conv3d " + name_ + ": expected [C,D,H,W] input");
    geom_ = ConvGeom::make(cin_, {x.dims[1], x.dims[2], x.dims[3]}, kernel_, stride_,
                           pad_);
    input_ = x;
    cols_.assign(static_cast<std::size_t>(geom_.patch_rows()) * geom_.out_voxels(),
                 T(0));
    detail::im2col(x.values.data(), geom_, cols_.data());

    Tensor<T> y({cout_, geom_.out[0], geom_.out[1], geom_.out[2]});
    ConstMatMap<T> wm(weight_.values.data(), cout_, geom_.patch_rows());
    ConstMatMap<T> cm(cols_.data(), geom_.patch_rows(), geom_.out_voxels());
    MatMap<T> ym(y.values.data(), cout_, geom_.out_voxels());
    ym.noalias() = wm * cm;
    for (int c = 0; c < cout_; ++c)
      ym.row(c).array() += bias_.values[c];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const int n_out = geom_.out_voxels();
    ConstMatMap<T> gm(grad_out.values.data(), cout_, n_out);
    ConstMatMap<T> cm(cols_.data(), geom_.patch_rows(), n_out);
    MatMap<T> dwm(weight_.grad.data(), cout_, geom_.patch_rows());
    dwm.noalias() += gm * cm.transpose();
    for (int c = 0; c < cout_; ++c)
      bias_.grad[c] += gm.row(c).sum();

    std::vector<T> dcols(cols_.size());
    ConstMatMap<T> wm(weight_.values.data(), cout_, geom_.patch_rows());
    MatMap<T> dcm(dcols.data(), geom_.patch_rows(), n_out);
    dcm.noalias() = wm.transpose() * gm;
    Tensor<T> dx(input_.dims);
    detail::col2im(dcols.data(), geom_, dx.values.data());
    return dx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}};
  }

 private:
  int cin_, cout_, kernel_, stride_, pad_;
  std::string name_;
  Tensor<T> weight_, bias_, input_;
  std::vector<T> cols_;
  ConvGeom geom_;
};

/// Transposed 3-D convolution (adjoint of Conv3d with the same geometry).
/// Weight layout [C_in, C_out, k, k, k]; output_padding resolves the output
/// size ambiguity per axis and must be < stride.
template <typename T>
class ConvTranspose3d : public Module<T> {
 public:
  ConvTranspose3d(int in_channels, int out_channels, int kernel, int stride, int pad,
                  std::array<int, 3> output_padding, Rng& rng, std::string name)
      : cin_(in_channels), cout_(out_channels), kernel_(kernel), stride_(stride),
        pad_(pad), opad_(output_padding), name_(std::move(name)) {
    for (int a = 0; a < 3; ++a)
      if (opad_[a] < 0 || opad_[a] >= stride)
        throw std::invalid_argument("conv_transpose3d: output_padding must be < stride");
    weight_ = Tensor<T>({in_channels, out_channels, kernel, kernel, kernel});
    bias_ = Tensor<T>({out_channels});
    const int fan_in = in_channels * kernel * kernel * kernel;
    weight_.init_kaiming(rng, fan_in);
    bias_.init_uniform(rng, 1.0 / std::sqrt(static_cast<double>(fan_in)));
    weight_.ensure_grad();
    bias_.ensure_grad();
  }

  std::array<int, 3> output_dims(const std::array<int, 3>& in) const {
    std::array<int, 3> out;
    for (int a = 0; a < 3; ++a)
      out[a] = (in[a] - 1) * stride_ - 2 * pad_ + kernel_ + opad_[a];
    return out;
  }

  Tensor<T> forward(const Tensor<T>& x) override {
    if (x.dims.size() != 4 || x.dims[0] != cin_)
      throw std::invalid_argument("conv_transpose3d " + name_ + ": bad input");
    input_ = x;
    const std::array<int, 3> in = {x.dims[1], x.dims[2], x.dims[3]};
    const std::array<int, 3> out = output_dims(in);
    // The dense side of the adjoint convolution is the output grid; its
    // "conv outputs" are exactly the input voxels of this layer.
    geom_ = ConvGeom::make(cout_, out, kernel_, stride_, pad_);
    for (int a = 0; a < 3; ++a)
      if (geom_.out[a] != in[a])
        throw std::logic_error("conv_transpose3d: geometry mismatch");

    const int n_in = geom_.out_voxels();
    std::vector<T> cols(static_cast<std::size_t>(geom_.patch_rows()) * n_in);
    ConstMatMap<T> wm(weight_.values.data(), cin_, geom_.patch_rows());
    ConstMatMap<T> xm(x.values.data(), cin_, n_in);
    MatMap<T> cm(cols.data(), geom_.patch_rows(), n_in);
    cm.noalias() = wm.transpose() * xm;

    Tensor<T> y({cout_, out[0], out[1], out[2]});
    detail::col2im(cols.data(), geom_, y.values.data());
    const int voxels = out[0] * out[1] * out[2];
    for (int c = 0; c < cout_; ++c)
      for (int v = 0; v < voxels; ++v)
        y.values[static_cast<std::size_t>(c) * voxels + v] += bias_.values[c];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) override {
    const int n_in = geom_.out_voxels();
    std::vector<T> gcols(static_cast<std::size_t>(geom_.patch_rows()) * n_in);
    detail::im2col(grad_out.values.data(), geom_, gcols.data());
    ConstMatMap<T> gcm(gcols.data(), geom_.patch_rows(), n_in);
    ConstMatMap<T> xm(input_.values.data(), cin_, n_in);
    MatMap<T> dwm(weight_.grad.data(), cin_, geom_.patch_rows());
    dwm.noalias() += xm * gcm.transpose();
    const int voxels = grad_out.dims[1] * grad_out.dims[2] * grad_out.dims[3];
    for (int c = 0; c < cout_; ++c) {
      T s = T(0);
      for (int v = 0; v < voxels; ++v)
        s += grad_out.values[static_cast<std::size_t>(c) * voxels + v];
      bias_.grad[c] += s;
    }
    Tensor<T> dx(input_.dims);
    ConstMatMap<T> wm(weight_.values.data(), cin_, geom_.patch_rows());
    MatMap<T> dxm(dx.values.data(), cin_, n_in);
    dxm.noalias() = wm * gcm;
    return dx;
  }

  std::vector<ParamRef<T>> params() override {
    return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}};
  }

 private:
  int cin_, cout_, kernel_, stride_, pad_;
  std::array<int, 3> opad_;
  std::string name_;
  Tensor<T> weight_, bias_, input_;
  ConvGeom geom_;
};

}  // namespace reflex::net

#endif  // REFLEX_NETCORE_CONV_HPP_
