// Copyright 2026 The faceflow Authors
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

#include "core/manipulation.hpp"

#include "core/errors.hpp"

#include <cmath>

namespace faceflow {

namespace {

void check_conv_weights(const Tensor& kernel, const Tensor& bias, int in_channels,
                        uint32_t kernel_size, bool transposed) {
  kernel.validate();
  bias.validate();
  if (kernel.dims.size() != 4 || kernel.dims[2] != kernel_size ||
      kernel.dims[3] != kernel_size) {
    throw ShapeError("kernel must have dims [a, b, k, k]");
  }
  const uint32_t expect_in = transposed ? kernel.dims[0] : kernel.dims[1];
  const uint32_t out = transposed ? kernel.dims[1] : kernel.dims[0];
  if (expect_in != static_cast<uint32_t>(in_channels)) {
    throw ShapeError("kernel input channels do not match the feature map");
  }
  if (bias.dims.size() != 1 || bias.dims[0] != out) {
    throw ShapeError("bias length must equal the output channel count");
  }
}

// kernel[o][i][ky][kx] for a [O, I, K, K] tensor.
inline double kval(const Tensor& k, int a, int b, int ky, int kx) {
  const size_t i = ((static_cast<size_t>(a) * k.dims[1] + b) * k.dims[2] + ky) *
                       k.dims[3] +
                   kx;
  return k.data[i];
}
inline double& kref(Tensor& k, int a, int b, int ky, int kx) {
  const size_t i = ((static_cast<size_t>(a) * k.dims[1] + b) * k.dims[2] + ky) *
                       k.dims[3] +
                   kx;
  return k.data[i];
}

} // namespace

Tensor Tensor::zeros(std::vector<uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  size_t n = 1;
  for (const uint32_t d : t.dims) n *= d;
  t.data.assign(t.dims.empty() ? 0 : n, 0.0);
  return t;
}

size_t Tensor::numel() const {
  if (dims.empty()) return 0;
  size_t n = 1;
  for (const uint32_t d : dims) n *= d;
  return n;
}

void Tensor::validate() const {
  if (dims.empty()) throw ShapeError("tensor rank must be >= 1");
  for (const uint32_t d : dims) {
    if (d == 0) throw ShapeError("tensor dims must be >= 1");
  }
  if (data.size() != numel()) {
    throw ShapeError("tensor payload does not match its dims");
  }
  for (const double v : data) {
    if (!std::isfinite(v)) throw InvalidParameterError("tensor data must be finite");
  }
}

FeatureMap FeatureMap::zeros(int channels, int height, int width) {
  if (channels < 1 || height < 1 || width < 1) {
    throw ShapeError("feature map dims must be >= 1");
  }
  FeatureMap m;
  m.channels = channels;
  m.height = height;
  m.width = width;
  m.data.assign(static_cast<size_t>(channels) * height * width, 0.0);
  return m;
}

void FeatureMap::validate() const {
  if (channels < 1 || height < 1 || width < 1) {
    throw ShapeError("feature map dims must be >= 1");
  }
  if (data.size() != static_cast<size_t>(channels) * height * width) {
    throw ShapeError("feature map payload does not match its dims");
  }
  for (const double v : data) {
    if (!std::isfinite(v)) throw InvalidParameterError("feature map must be finite");
  }
}

FeatureMap conv2d(const FeatureMap& input, const Tensor& kernel,
                  const Tensor& bias) {
  input.validate();
  check_conv_weights(kernel, bias, input.channels, 3, /*transposed=*/false);
  const int oc = static_cast<int>(kernel.dims[0]);
  const int ic = input.channels;
  FeatureMap out = FeatureMap::zeros(oc, input.height, input.width);
  for (int o = 0; o < oc; ++o) {
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        double acc = bias.data[o];
        for (int i = 0; i < ic; ++i) {
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= input.height) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = x + kx - 1;
              if (sx < 0 || sx >= input.width) continue;
              acc += input.at(i, sy, sx) * kval(kernel, o, i, ky, kx);
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

ConvGradients conv2d_backward(const FeatureMap& input, const Tensor& kernel,
                              const FeatureMap& grad_output) {
  input.validate();
  grad_output.validate();
  if (kernel.dims.size() != 4 ||
      grad_output.channels != static_cast<int>(kernel.dims[0]) ||
      grad_output.height != input.height || grad_output.width != input.width) {
    throw ShapeError("grad_output shape does not match the convolution");
  }
  const int oc = grad_output.channels;
  const int ic = input.channels;
  ConvGradients g;
  g.d_input = FeatureMap::zeros(ic, input.height, input.width);
  g.d_kernel = Tensor::zeros(kernel.dims);
  g.d_bias = Tensor::zeros({static_cast<uint32_t>(oc)});
  for (int o = 0; o < oc; ++o) {
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        const double gv = grad_output.at(o, y, x);
        g.d_bias.data[o] += gv;
        for (int i = 0; i < ic; ++i) {
          for (int ky = 0; ky < 3; ++ky) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= input.height) continue;
            for (int kx = 0; kx < 3; ++kx) {
              const int sx = x + kx - 1;
              if (sx < 0 || sx >= input.width) continue;
              g.d_kernel.data[((static_cast<size_t>(o) * ic + i) * 3 + ky) * 3 + kx] +=
                  gv * input.at(i, sy, sx);
              g.d_input.at(i, sy, sx) += gv * kval(kernel, o, i, ky, kx);
            }
          }
        }
      }
    }
  }
  return g;
}

FeatureMap deconv2d(const FeatureMap& input, const Tensor& kernel,
                    const Tensor& bias) {
  input.validate();
  check_conv_weights(kernel, bias, input.channels, 4, /*transposed=*/true);
  const int oc = static_cast<int>(kernel.dims[1]);
  const int ic = input.channels;
  const int oh = 2 * input.height;
  const int ow = 2 * input.width;
  FeatureMap out = FeatureMap::zeros(oc, oh, ow);
  for (int o = 0; o < oc; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) out.at(o, y, x) = bias.data[o];
    }
  }
  for (int i = 0; i < ic; ++i) {
    for (int iy = 0; iy < input.height; ++iy) {
      for (int ix = 0; ix < input.width; ++ix) {
        const double v = input.at(i, iy, ix);
        for (int o = 0; o < oc; ++o) {
          for (int ky = 0; ky < 4; ++ky) {
            const int oy = 2 * iy + ky - 1;
            if (oy < 0 || oy >= oh) continue;
            for (int kx = 0; kx < 4; ++kx) {
              const int ox = 2 * ix + kx - 1;
              if (ox < 0 || ox >= ow) continue;
              out.at(o, oy, ox) += v * kval(kernel, i, o, ky, kx);
            }
          }
        }
      }
    }
  }
  return out;
}

ConvGradients deconv2d_backward(const FeatureMap& input, const Tensor& kernel,
                                const FeatureMap& grad_output) {
  input.validate();
  grad_output.validate();
  if (kernel.dims.size() != 4 ||
      grad_output.channels != static_cast<int>(kernel.dims[1]) ||
      grad_output.height != 2 * input.height ||
      grad_output.width != 2 * input.width) {
    throw ShapeError("grad_output shape does not match the deconvolution");
  }
  const int oc = grad_output.channels;
  const int ic = input.channels;
  ConvGradients g;
  g.d_input = FeatureMap::zeros(ic, input.height, input.width);
  g.d_kernel = Tensor::zeros(kernel.dims);
  g.d_bias = Tensor::zeros({static_cast<uint32_t>(oc)});
  for (int o = 0; o < oc; ++o) {
    for (int y = 0; y < grad_output.height; ++y) {
      for (int x = 0; x < grad_output.width; ++x) {
        g.d_bias.data[o] += grad_output.at(o, y, x);
      }
    }
  }
  for (int i = 0; i < ic; ++i) {
    for (int iy = 0; iy < input.height; ++iy) {
      for (int ix = 0; ix < input.width; ++ix) {
        double acc = 0.0;
        for (int o = 0; o < oc; ++o) {
          for (int ky = 0; ky < 4; ++ky) {
            const int oy = 2 * iy + ky - 1;
            if (oy < 0 || oy >= grad_output.height) continue;
            for (int kx = 0; kx < 4; ++kx) {
              const int ox = 2 * ix + kx - 1;
              if (ox < 0 || ox >= grad_output.width) continue;
              const double gv = grad_output.at(o, oy, ox);
              acc += gv * kval(kernel, i, o, ky, kx);
              kref(g.d_kernel, i, o, ky, kx) += gv * input.at(i, iy, ix);
            }
          }
        }
        g.d_input.at(i, iy, ix) = acc;
      }
    }
  }
  return g;
}

namespace {

struct BilinearTap {
  int y0, y1, x0, x1;
  double wy0, wy1, wx0, wx1;
};

BilinearTap bilinear_tap(int oy, int ox, int in_h, int in_w) {
  BilinearTap t;
  const double sy = (oy + 0.5) / 2.0 - 0.5;
  const double sx = (ox + 0.5) / 2.0 - 0.5;
  const double fy = std::floor(sy);
  const double fx = std::floor(sx);
  t.wy1 = sy - fy;
  t.wy0 = 1.0 - t.wy1;
  t.wx1 = sx - fx;
  t.wx0 = 1.0 - t.wx1;
  const auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  t.y0 = clampi(static_cast<int>(fy), in_h - 1);
  t.y1 = clampi(static_cast<int>(fy) + 1, in_h - 1);
  t.x0 = clampi(static_cast<int>(fx), in_w - 1);
  t.x1 = clampi(static_cast<int>(fx) + 1, in_w - 1);
  return t;
}

} // namespace

FeatureMap upsample_bilinear(const FeatureMap& input) {
  input.validate();
  FeatureMap out = FeatureMap::zeros(input.channels, 2 * input.height, 2 * input.width);
  for (int c = 0; c < input.channels; ++c) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        const BilinearTap t = bilinear_tap(oy, ox, input.height, input.width);
        out.at(c, oy, ox) = t.wy0 * (t.wx0 * input.at(c, t.y0, t.x0) +
                                     t.wx1 * input.at(c, t.y0, t.x1)) +
                            t.wy1 * (t.wx0 * input.at(c, t.y1, t.x0) +
                                     t.wx1 * input.at(c, t.y1, t.x1));
      }
    }
  }
  return out;
}

FeatureMap upsample_bilinear_backward(const FeatureMap& grad_output) {
  grad_output.validate();
  if (grad_output.height % 2 != 0 || grad_output.width % 2 != 0) {
    throw ShapeError("upsampled gradient must have even height and width");
  }
  const int in_h = grad_output.height / 2;
  const int in_w = grad_output.width / 2;
  FeatureMap g = FeatureMap::zeros(grad_output.channels, in_h, in_w);
  for (int c = 0; c < grad_output.channels; ++c) {
    for (int oy = 0; oy < grad_output.height; ++oy) {
      for (int ox = 0; ox < grad_output.width; ++ox) {
        const BilinearTap t = bilinear_tap(oy, ox, in_h, in_w);
        const double gv = grad_output.at(c, oy, ox);
        g.at(c, t.y0, t.x0) += gv * t.wy0 * t.wx0;
        g.at(c, t.y0, t.x1) += gv * t.wy0 * t.wx1;
        g.at(c, t.y1, t.x0) += gv * t.wy1 * t.wx0;
        g.at(c, t.y1, t.x1) += gv * t.wy1 * t.wx1;
      }
    }
  }
  return g;
}

InstanceNormResult instance_norm(const FeatureMap& input, double epsilon) {
  input.validate();
  if (!(epsilon > 0.0)) throw InvalidParameterError("epsilon must be > 0");
  InstanceNormResult r;
  r.normalized = FeatureMap::zeros(input.channels, input.height, input.width);
  r.mu.resize(input.channels);
  r.sigma.resize(input.channels);
  const double m = static_cast<double>(input.height) * input.width;
  for (int c = 0; c < input.channels; ++c) {
    double mean = 0.0;
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) mean += input.at(c, y, x);
    }
    mean /= m;
    double var = 0.0;
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        const double d = input.at(c, y, x) - mean;
        var += d * d;
      }
    }
    var /= m;
    const double sigma = std::sqrt(var + epsilon);
    r.mu[c] = mean;
    r.sigma[c] = sigma;
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        r.normalized.at(c, y, x) = (input.at(c, y, x) - mean) / sigma;
      }
    }
  }
  return r;
}

FeatureMap instance_norm_backward(const InstanceNormResult& forward,
                                  const FeatureMap& grad_normalized) {
  const FeatureMap& y = forward.normalized;
  grad_normalized.validate();
  if (grad_normalized.channels != y.channels ||
      grad_normalized.height != y.height || grad_normalized.width != y.width) {
    throw ShapeError("gradient shape does not match the normalized map");
  }
  FeatureMap g = FeatureMap::zeros(y.channels, y.height, y.width);
  const double m = static_cast<double>(y.height) * y.width;
  for (int c = 0; c < y.channels; ++c) {
    double mean_g = 0.0;
    double mean_gy = 0.0;
    for (int yy = 0; yy < y.height; ++yy) {
      for (int x = 0; x < y.width; ++x) {
        mean_g += grad_normalized.at(c, yy, x);
        mean_gy += grad_normalized.at(c, yy, x) * y.at(c, yy, x);
      }
    }
    mean_g /= m;
    mean_gy /= m;
    const double inv_sigma = 1.0 / forward.sigma[c];
    for (int yy = 0; yy < y.height; ++yy) {
      for (int x = 0; x < y.width; ++x) {
        g.at(c, yy, x) = inv_sigma * (grad_normalized.at(c, yy, x) - mean_g -
                                      y.at(c, yy, x) * mean_gy);
      }
    }
  }
  return g;
}

FeatureMap prelu(const FeatureMap& input, double slope) {
  input.validate();
  FeatureMap out = input;
  for (double& v : out.data) {
    if (v < 0.0) v *= slope;
  }
  return out;
}

FeatureMap prelu_backward(const FeatureMap& input, double slope,
                          const FeatureMap& grad_output) {
  if (grad_output.data.size() != input.data.size()) {
    throw ShapeError("gradient shape does not match the input");
  }
  FeatureMap g = grad_output;
  for (size_t i = 0; i < g.data.size(); ++i) {
    if (input.data[i] < 0.0) g.data[i] *= slope;
  }
  return g;
}

void SpadeParams::validate() const {
  shared_kernel.validate();
  shared_bias.validate();
  gamma_kernel.validate();
  gamma_bias.validate();
  beta_kernel.validate();
  beta_bias.validate();
  if (!(epsilon > 0.0)) throw InvalidParameterError("epsilon must be > 0");
  if (shared_kernel.dims.size() != 4 || gamma_kernel.dims.size() != 4 ||
      beta_kernel.dims.size() != 4) {
    throw ShapeError("spade kernels must be rank 4");
  }
  const uint32_t hidden = shared_kernel.dims[0];
  if (gamma_kernel.dims[1] != hidden || beta_kernel.dims[1] != hidden) {
    throw ShapeError("gamma/beta kernels must consume the shared hidden channels");
  }
  if (gamma_kernel.dims[0] != beta_kernel.dims[0]) {
    throw ShapeError("gamma and beta kernels must emit equal channel counts");
  }
}

FeatureMap spade_modulate(const FeatureMap& h_enc, const FeatureMap& h_flow,
                          const FeatureMap& h_dec, const SpadeParams& params) {
  params.validate();
  h_enc.validate();
  h_flow.validate();
  h_dec.validate();
  if (h_enc.height != h_flow.height || h_enc.width != h_flow.width ||
      h_enc.height != h_dec.height || h_enc.width != h_dec.width) {
    throw ShapeError("all spade inputs must share spatial size");
  }
  if (h_enc.channels != h_dec.channels) {
    throw ShapeError("h_enc and h_dec must share channel count");
  }
  if (static_cast<int>(params.gamma_kernel.dims[0]) != h_enc.channels) {
    throw ShapeError("gamma/beta kernels must emit h_enc's channel count");
  }

  const FeatureMap hidden =
      prelu(conv2d(h_flow, params.shared_kernel, params.shared_bias),
            params.prelu_slope);
  const FeatureMap gamma = conv2d(hidden, params.gamma_kernel, params.gamma_bias);
  const FeatureMap beta = conv2d(hidden, params.beta_kernel, params.beta_bias);
  const InstanceNormResult norm = instance_norm(h_enc, params.epsilon);

  FeatureMap out = FeatureMap::zeros(h_enc.channels, h_enc.height, h_enc.width);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = h_dec.data[i] *
                  (gamma.data[i] * norm.normalized.data[i] + beta.data[i]);
  }
  return out;
}

SpadeGradients spade_backward(const FeatureMap& h_enc, const FeatureMap& h_flow,
                              const FeatureMap& h_dec, const SpadeParams& params,
                              const FeatureMap& grad_output) {
  params.validate();
  if (grad_output.channels != h_enc.channels ||
      grad_output.height != h_enc.height || grad_output.width != h_enc.width) {
    throw ShapeError("grad_output shape does not match the modulated map");
  }

  // Replay the forward pass to get the intermediates.
  const FeatureMap preact = conv2d(h_flow, params.shared_kernel, params.shared_bias);
  const FeatureMap hidden = prelu(preact, params.prelu_slope);
  const FeatureMap gamma = conv2d(hidden, params.gamma_kernel, params.gamma_bias);
  const FeatureMap beta = conv2d(hidden, params.beta_kernel, params.beta_bias);
  const InstanceNormResult norm = instance_norm(h_enc, params.epsilon);

  SpadeGradients g;
  g.d_dec = FeatureMap::zeros(h_dec.channels, h_dec.height, h_dec.width);
  FeatureMap d_gamma = FeatureMap::zeros(gamma.channels, gamma.height, gamma.width);
  FeatureMap d_beta = FeatureMap::zeros(beta.channels, beta.height, beta.width);
  FeatureMap d_norm = FeatureMap::zeros(h_enc.channels, h_enc.height, h_enc.width);
  for (size_t i = 0; i < grad_output.data.size(); ++i) {
    const double go = grad_output.data[i];
    g.d_dec.data[i] =
        go * (gamma.data[i] * norm.normalized.data[i] + beta.data[i]);
    const double u = go * h_dec.data[i];
    d_gamma.data[i] = u * norm.normalized.data[i];
    d_beta.data[i] = u;
    d_norm.data[i] = u * gamma.data[i];
  }

  g.d_enc = instance_norm_backward(norm, d_norm);

  const ConvGradients gamma_grads = conv2d_backward(hidden, params.gamma_kernel, d_gamma);
  const ConvGradients beta_grads = conv2d_backward(hidden, params.beta_kernel, d_beta);
  g.d_gamma_kernel = gamma_grads.d_kernel;
  g.d_gamma_bias = gamma_grads.d_bias;
  g.d_beta_kernel = beta_grads.d_kernel;
  g.d_beta_bias = beta_grads.d_bias;

  FeatureMap d_hidden = gamma_grads.d_input;
  for (size_t i = 0; i < d_hidden.data.size(); ++i) {
    d_hidden.data[i] += beta_grads.d_input.data[i];
  }
  const FeatureMap d_preact = prelu_backward(preact, params.prelu_slope, d_hidden);
  const ConvGradients shared_grads =
      conv2d_backward(h_flow, params.shared_kernel, d_preact);
  g.d_shared_kernel = shared_grads.d_kernel;
  g.d_shared_bias = shared_grads.d_bias;
  g.d_flow = shared_grads.d_input;
  return g;
}

FeatureMap fade_in_blend(const FeatureMap& h_dec, double alpha,
                         const Tensor& deconv_kernel, const Tensor& deconv_bias,
                         const Tensor& conv_kernel, const Tensor& conv_bias) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw RangeError("alpha must lie in [0, 1]");
  }
  const FeatureMap learned =
      conv2d(deconv2d(h_dec, deconv_kernel, deconv_bias), conv_kernel, conv_bias);
  if (alpha == 1.0) return learned;
  const FeatureMap fixed =
      conv2d(upsample_bilinear(h_dec), conv_kernel, conv_bias);
  if (alpha == 0.0) return fixed;
  FeatureMap out = learned;
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = alpha * learned.data[i] + (1.0 - alpha) * fixed.data[i];
  }
  return out;
}

} // namespace faceflow
