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

// Independent reference implementations used as test oracles. Everything is
// written as plain loops, so the production code is checked against a second
// simpler derivation instead of against itself.

#pragma once

#include "core/flow.hpp"
#include "core/image.hpp"
#include "core/manipulation.hpp"
#include "core/morphable_model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracles {

// Rx(pitch) * Ry(yaw) * Rz(roll), each factor written out entry by entry.
inline Eigen::Matrix3d rotation_by_hand(const Eigen::Vector3d& r) {
  const double cx = std::cos(r[0]), sx = std::sin(r[0]);
  const double cy = std::cos(r[1]), sy = std::sin(r[1]);
  const double cz = std::cos(r[2]), sz = std::sin(r[2]);
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  return rx * ry * rz;
}

// Dense per-vertex reconstruction with explicit coefficient loops.
inline faceflow::PointCloud reconstruct_by_hand(
    const faceflow::MorphableBasis& basis, const faceflow::ModelParams& p) {
  const int n = basis.vertex_count();
  const Eigen::Matrix3d r = rotation_by_hand(p.rotation);
  faceflow::PointCloud cloud(n, 3);
  for (int i = 0; i < n; ++i) {
    double v[3];
    for (int c = 0; c < 3; ++c) {
      double x = basis.mean_shape[3 * i + c];
      for (int k = 0; k < basis.id_dim(); ++k)
        x += basis.id_basis(3 * i + c, k) * p.alpha_id[k];
      for (int l = 0; l < basis.exp_dim(); ++l)
        x += basis.exp_basis(3 * i + c, l) * p.alpha_exp[l];
      v[c] = x;
    }
    for (int row = 0; row < 3; ++row) {
      double acc = 0.0;
      for (int col = 0; col < 3; ++col) acc += r(row, col) * v[col];
      cloud(i, row) = p.scale * acc + p.translation[row];
    }
  }
  return cloud;
}

// Exhaustive per-pixel rasterizer: every pixel scans every vertex. Keeps the
// vertex with the larger source depth, ties by smaller index. Shares only the
// documented pixel convention with the library: y flipped to y-down, then
// round half up.
inline faceflow::FacialFlow rasterize_by_scanning(
    const faceflow::MorphableBasis& basis, const faceflow::ModelParams& p_s,
    const faceflow::ModelParams& p_m, std::uint32_t width,
    std::uint32_t height) {
  const faceflow::PointCloud src = reconstruct_by_hand(basis, p_s);
  const faceflow::PointCloud mid = reconstruct_by_hand(basis, p_m);
  const int n = basis.vertex_count();
  std::vector<int> cell(n);
  for (int i = 0; i < n; ++i) {
    const double col_f = src(i, 0);
    const double row_f = (static_cast<double>(height) - 1.0) - src(i, 1);
    const long col = std::lround(std::floor(col_f + 0.5));
    const long row = std::lround(std::floor(row_f + 0.5));
    const bool inside = col >= 0 && col < static_cast<long>(width) &&
                        row >= 0 && row < static_cast<long>(height);
    cell[i] = inside ? static_cast<int>(row * width + col) : -1;
  }
  faceflow::FacialFlow flow = faceflow::FacialFlow::zeros(width, height);
  for (std::uint32_t row = 0; row < height; ++row) {
    for (std::uint32_t col = 0; col < width; ++col) {
      const int target = static_cast<int>(row * width + col);
      int winner = -1;
      for (int i = 0; i < n; ++i) {
        if (cell[i] != target) continue;
        if (winner < 0 || src(i, 2) > src(winner, 2)) winner = i;
      }
      if (winner < 0) continue;
      const std::size_t at = 3 * static_cast<std::size_t>(target);
      flow.data[at + 0] = static_cast<float>(src(winner, 0) - mid(winner, 0));
      flow.data[at + 1] = static_cast<float>(src(winner, 1) - mid(winner, 1));
      flow.data[at + 2] = static_cast<float>(src(winner, 2) - mid(winner, 2));
      flow.coverage[target] = 1;
    }
  }
  return flow;
}

// Quadruple-loop cross-correlation, 3x3 kernel, stride 1, zero padding 1.
inline faceflow::FeatureMap conv2d_by_hand(const faceflow::FeatureMap& input,
                                           const faceflow::Tensor& kernel,
                                           const faceflow::Tensor& bias) {
  const int oc_n = static_cast<int>(kernel.dims[0]);
  const int ic_n = static_cast<int>(kernel.dims[1]);
  faceflow::FeatureMap out =
      faceflow::FeatureMap::zeros(oc_n, input.height, input.width);
  for (int oc = 0; oc < oc_n; ++oc) {
    for (int y = 0; y < input.height; ++y) {
      for (int x = 0; x < input.width; ++x) {
        double acc = bias.data[oc];
        for (int ic = 0; ic < ic_n; ++ic) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = y + ky - 1;
              const int ix = x + kx - 1;
              if (iy < 0 || iy >= input.height || ix < 0 || ix >= input.width)
                continue;
              const std::size_t kat =
                  ((static_cast<std::size_t>(oc) * ic_n + ic) * 3 + ky) * 3 +
                  kx;
              acc += input.at(ic, iy, ix) * kernel.data[kat];
            }
          }
        }
        out.at(oc, y, x) = acc;
      }
    }
  }
  return out;
}

// Transposed convolution as a scatter: each input pixel adds a scaled copy of
// the kernel into the doubled output grid. 4x4 kernel, stride 2, padding 1.
inline faceflow::FeatureMap deconv2d_by_hand(const faceflow::FeatureMap& input,
                                             const faceflow::Tensor& kernel,
                                             const faceflow::Tensor& bias) {
  const int ic_n = static_cast<int>(kernel.dims[0]);
  const int oc_n = static_cast<int>(kernel.dims[1]);
  const int oh = 2 * input.height;
  const int ow = 2 * input.width;
  faceflow::FeatureMap out = faceflow::FeatureMap::zeros(oc_n, oh, ow);
  for (int oc = 0; oc < oc_n; ++oc)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) out.at(oc, y, x) = bias.data[oc];
  for (int ic = 0; ic < ic_n; ++ic) {
    for (int oc = 0; oc < oc_n; ++oc) {
      for (int iy = 0; iy < input.height; ++iy) {
        for (int ix = 0; ix < input.width; ++ix) {
          for (int ky = 0; ky < 4; ++ky) {
            for (int kx = 0; kx < 4; ++kx) {
              const int oy = 2 * iy + ky - 1;
              const int ox = 2 * ix + kx - 1;
              if (oy < 0 || oy >= oh || ox < 0 || ox >= ow) continue;
              const std::size_t kat =
                  ((static_cast<std::size_t>(ic) * oc_n + oc) * 4 + ky) * 4 +
                  kx;
              out.at(oc, oy, ox) += input.at(ic, iy, ix) * kernel.data[kat];
            }
          }
        }
      }
    }
  }
  return out;
}

// Per-output-pixel bilinear lookup with half-pixel centers and edge clamping.
inline faceflow::FeatureMap upsample_by_hand(const faceflow::FeatureMap& in) {
  faceflow::FeatureMap out =
      faceflow::FeatureMap::zeros(in.channels, 2 * in.height, 2 * in.width);
  for (int c = 0; c < in.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const double sy = (y + 0.5) / 2.0 - 0.5;
        const double sx = (x + 0.5) / 2.0 - 0.5;
        const double cy = std::min(std::max(sy, 0.0),
                                   static_cast<double>(in.height - 1));
        const double cx =
            std::min(std::max(sx, 0.0), static_cast<double>(in.width - 1));
        const int y0 = static_cast<int>(std::floor(cy));
        const int x0 = static_cast<int>(std::floor(cx));
        const int y1 = std::min(y0 + 1, in.height - 1);
        const int x1 = std::min(x0 + 1, in.width - 1);
        const double fy = cy - y0;
        const double fx = cx - x0;
        out.at(c, y, x) = (1 - fy) * (1 - fx) * in.at(c, y0, x0) +
                          (1 - fy) * fx * in.at(c, y0, x1) +
                          fy * (1 - fx) * in.at(c, y1, x0) +
                          fy * fx * in.at(c, y1, x1);
      }
    }
  }
  return out;
}

// Population statistics per channel computed with running sums.
inline faceflow::FeatureMap instance_norm_by_hand(
    const faceflow::FeatureMap& in, double epsilon) {
  faceflow::FeatureMap out =
      faceflow::FeatureMap::zeros(in.channels, in.height, in.width);
  const double count = static_cast<double>(in.height) * in.width;
  for (int c = 0; c < in.channels; ++c) {
    double sum = 0.0;
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x) sum += in.at(c, y, x);
    const double mu = sum / count;
    double sq = 0.0;
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x) {
        const double d = in.at(c, y, x) - mu;
        sq += d * d;
      }
    const double sigma = std::sqrt(sq / count + epsilon);
    for (int y = 0; y < in.height; ++y)
      for (int x = 0; x < in.width; ++x)
        out.at(c, y, x) = (in.at(c, y, x) - mu) / sigma;
  }
  return out;
}

// Direct sliding-window SSIM: 11x11 Gaussian (sigma 1.5) normalized as a full
// 2D stencil, valid window positions only, averaged over channels.
inline double ssim_by_hand(const faceflow::ImageTensor& a,
                           const faceflow::ImageTensor& b) {
  constexpr int kHalf = 5;
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  double window[11][11];
  double total = 0.0;
  for (int i = 0; i < 11; ++i) {
    for (int j = 0; j < 11; ++j) {
      const double dy = i - kHalf, dx = j - kHalf;
      window[i][j] = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5));
      total += window[i][j];
    }
  }
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) window[i][j] /= total;

  double channel_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double acc = 0.0;
    int positions = 0;
    for (int y = kHalf; y < a.height - kHalf; ++y) {
      for (int x = kHalf; x < a.width - kHalf; ++x) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int i = 0; i < 11; ++i) {
          for (int j = 0; j < 11; ++j) {
            const double w = window[i][j];
            const double va = a.at(c, y + i - kHalf, x + j - kHalf);
            const double vb = b.at(c, y + i - kHalf, x + j - kHalf);
            ma += w * va;
            mb += w * vb;
            saa += w * va * va;
            sbb += w * vb * vb;
            sab += w * va * vb;
          }
        }
        const double var_a = saa - ma * ma;
        const double var_b = sbb - mb * mb;
        const double cov = sab - ma * mb;
        acc += ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
               ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
        ++positions;
      }
    }
    channel_sum += acc / positions;
  }
  return channel_sum / 3.0;
}

// Central finite differences of a scalar function over a flat vector.
inline Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (int i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Largest relative error between an analytic gradient and its finite
// difference estimate, with an absolute floor against zero coordinates.
inline double max_relative_error(const Eigen::VectorXd& analytic,
                                 const Eigen::VectorXd& numeric,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (int i = 0; i < analytic.size(); ++i) {
    const double scale =
        std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

inline faceflow::FeatureMap random_map(int channels, int height, int width,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  faceflow::FeatureMap map = faceflow::FeatureMap::zeros(channels, height, width);
  for (double& v : map.data) v = dist(rng);
  return map;
}

inline faceflow::Tensor random_kernel(std::vector<std::uint32_t> dims,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  faceflow::Tensor t = faceflow::Tensor::zeros(std::move(dims));
  for (double& v : t.data) v = dist(rng);
  return t;
}

inline Eigen::VectorXd random_vector(int size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = dist(rng);
  return v;
}

inline faceflow::ImageTensor random_image(int width, int height,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  faceflow::ImageTensor img = faceflow::ImageTensor::zeros(width, height);
  for (double& v : img.data) v = dist(rng);
  return img;
}

} // namespace oracles
