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

#pragma once

#include <cstdint>
#include <vector>

namespace faceflow {

/// Dense row-major f64 tensor used for kernel weights and their gradients.
struct Tensor {
  std::vector<uint32_t> dims;
  std::vector<double> data;

  static Tensor zeros(std::vector<uint32_t> dims);
  size_t numel() const;
  void validate() const;
};

/// Channel-major feature map: data[(c * height + y) * width + x].
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  static FeatureMap zeros(int channels, int height, int width);

  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  void validate() const;
};

struct ConvGradients {
  FeatureMap d_input;
  Tensor d_kernel;
  Tensor d_bias;
};

struct InstanceNormResult {
  FeatureMap normalized;
  std::vector<double> mu;    // per-channel spatial mean
  std::vector<double> sigma; // sqrt(population variance + epsilon)
};

/// Weights of the modulation branch: one shared 3x3 convolution feeding a
/// parametric rectified-linear activation, then two parallel 3x3
/// convolutions producing the gamma and beta maps.
struct SpadeParams {
  Tensor shared_kernel; // [hidden, flow_channels, 3, 3]
  Tensor shared_bias;   // [hidden]
  Tensor gamma_kernel;  // [enc_channels, hidden, 3, 3]
  Tensor gamma_bias;    // [enc_channels]
  Tensor beta_kernel;   // [enc_channels, hidden, 3, 3]
  Tensor beta_bias;     // [enc_channels]
  double epsilon = 1e-5;
  double prelu_slope = 0.25;

  void validate() const;
};

struct SpadeGradients {
  FeatureMap d_enc;
  FeatureMap d_flow;
  FeatureMap d_dec;
  Tensor d_shared_kernel;
  Tensor d_shared_bias;
  Tensor d_gamma_kernel;
  Tensor d_gamma_bias;
  Tensor d_beta_kernel;
  Tensor d_beta_bias;
};

/// 3x3 cross-correlation, stride 1, zero padding 1; spatial size preserved.
/// kernel dims [out_channels, in_channels, 3, 3], bias dims [out_channels].
FeatureMap conv2d(const FeatureMap& input, const Tensor& kernel,
                  const Tensor& bias);
ConvGradients conv2d_backward(const FeatureMap& input, const Tensor& kernel,
                              const FeatureMap& grad_output);

/// 4x4 transposed convolution, stride 2, padding 1; spatial size exactly
/// doubled. kernel dims [in_channels, out_channels, 4, 4], bias
/// [out_channels]. Output pixel oy = 2*iy + ky - 1 (and likewise for x).
FeatureMap deconv2d(const FeatureMap& input, const Tensor& kernel,
                    const Tensor& bias);
ConvGradients deconv2d_backward(const FeatureMap& input, const Tensor& kernel,
                                const FeatureMap& grad_output);

/// 2x bilinear upsampling with half-pixel centers: source coordinate
/// (dst + 0.5) / 2 - 0.5, borders clamped. Doubles height and width.
FeatureMap upsample_bilinear(const FeatureMap& input);
FeatureMap upsample_bilinear_backward(const FeatureMap& grad_output);

/// Per-channel spatial standardization. sigma uses the population variance
/// with epsilon added inside the square root.
InstanceNormResult instance_norm(const FeatureMap& input, double epsilon);
FeatureMap instance_norm_backward(const InstanceNormResult& forward,
                                  const FeatureMap& grad_normalized);

/// max(x, 0) + slope * min(x, 0).
FeatureMap prelu(const FeatureMap& input, double slope);
FeatureMap prelu_backward(const FeatureMap& input, double slope,
                          const FeatureMap& grad_output);

/// h_dec * (gamma(h_flow) * normalize(h_enc) + beta(h_flow)), everything
/// elementwise. h_enc and h_dec share channel count; all maps share H, W.
FeatureMap spade_modulate(const FeatureMap& h_enc, const FeatureMap& h_flow,
                          const FeatureMap& h_dec, const SpadeParams& params);
SpadeGradients spade_backward(const FeatureMap& h_enc, const FeatureMap& h_flow,
                              const FeatureMap& h_dec, const SpadeParams& params,
                              const FeatureMap& grad_output);

/// alpha * Conv(DeConv(h)) + (1 - alpha) * Conv(Up(h)) with the final
/// convolution's weights shared between both paths. alpha = 0 and alpha = 1
/// return the pure paths without blending arithmetic.
FeatureMap fade_in_blend(const FeatureMap& h_dec, double alpha,
                         const Tensor& deconv_kernel, const Tensor& deconv_bias,
                         const Tensor& conv_kernel, const Tensor& conv_bias);

} // namespace faceflow
