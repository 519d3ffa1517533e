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

#include "core/metrics.hpp"

#include "core/errors.hpp"

#include <array>
#include <cmath>

namespace faceflow {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01; // (K1 * L)^2
constexpr double kC2 = 0.03 * 0.03; // (K2 * L)^2

std::array<double, kWindow> gaussian_window() {
  std::array<double, kWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - (kWindow - 1) / 2.0;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable valid-mode Gaussian filter: output (H - 10) x (W - 10).
std::vector<double> gaussian_valid(const std::vector<double>& src, int width,
                                   int height) {
  const std::array<double, kWindow> w = gaussian_window();
  const int out_w = width - kWindow + 1;
  const int out_h = height - kWindow + 1;
  std::vector<double> tmp(static_cast<size_t>(height) * out_w);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) {
        acc += w[k] * src[static_cast<size_t>(y) * width + x + k];
      }
      tmp[static_cast<size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(out_h) * out_w);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) {
        acc += w[k] * tmp[static_cast<size_t>(y + k) * out_w + x];
      }
      out[static_cast<size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

double ssim_channel(const double* a, const double* b, int width, int height) {
  const size_t n = static_cast<size_t>(width) * height;
  std::vector<double> pa(a, a + n);
  std::vector<double> pb(b, b + n);
  std::vector<double> paa(n), pbb(n), pab(n);
  for (size_t i = 0; i < n; ++i) {
    paa[i] = a[i] * a[i];
    pbb[i] = b[i] * b[i];
    pab[i] = a[i] * b[i];
  }
  const std::vector<double> mu_a = gaussian_valid(pa, width, height);
  const std::vector<double> mu_b = gaussian_valid(pb, width, height);
  const std::vector<double> e_aa = gaussian_valid(paa, width, height);
  const std::vector<double> e_bb = gaussian_valid(pbb, width, height);
  const std::vector<double> e_ab = gaussian_valid(pab, width, height);

  double acc = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    acc += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) /
           ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
  }
  return acc / static_cast<double>(mu_a.size());
}

} // namespace

MetricsReport image_metrics(const ImageTensor& a, const ImageTensor& b) {
  a.validate();
  b.validate();
  if (a.width != b.width || a.height != b.height) {
    throw ShapeError("images must share dimensions");
  }
  if (a.width < kWindow || a.height < kWindow) {
    throw ShapeError("images must be at least 11x11 for SSIM");
  }

  MetricsReport report;
  double mae = 0.0;
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mae += std::abs(d);
    mse += d * d;
  }
  const double n = static_cast<double>(a.data.size());
  report.mae = mae / n;
  report.mse = mse / n;
  report.psnr_db =
      report.mse < 1e-10 ? kPsnrCapDb : 10.0 * std::log10(1.0 / report.mse);

  const size_t plane = static_cast<size_t>(a.width) * a.height;
  double ssim = 0.0;
  for (int c = 0; c < 3; ++c) {
    ssim += ssim_channel(a.data.data() + c * plane, b.data.data() + c * plane,
                         a.width, a.height);
  }
  report.ssim = ssim / 3.0;
  return report;
}

double prmse(const std::vector<Eigen::Vector3d>& poses_a,
             const std::vector<Eigen::Vector3d>& poses_b) {
  if (poses_a.size() != poses_b.size()) {
    throw ShapeError("pose lists must have equal length");
  }
  if (poses_a.empty()) throw ShapeError("pose lists must be non-empty");
  double acc = 0.0;
  for (size_t i = 0; i < poses_a.size(); ++i) {
    acc += (poses_a[i] - poses_b[i]).squaredNorm();
  }
  return std::sqrt(acc / (3.0 * static_cast<double>(poses_a.size())));
}

} // namespace faceflow
