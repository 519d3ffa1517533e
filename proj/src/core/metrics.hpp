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

#include "core/image.hpp"

#include <Eigen/Core>
#include <vector>

namespace faceflow {

/// PSNR reported when the mean squared error is below 1e-10 (log blowup cap).
inline constexpr double kPsnrCapDb = 99.0;

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// MAE and MSE are plain elementwise means. PSNR = 10*log10(1/MSE) for unit
/// dynamic range, capped at 99 dB when MSE < 1e-10. SSIM uses an 11x11
/// Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 1, evaluated at
/// positions where the full window fits and averaged over channels.
MetricsReport image_metrics(const ImageTensor& a, const ImageTensor& b);

/// Root mean square error over all 3n Euler angle entries, in degrees.
double prmse(const std::vector<Eigen::Vector3d>& poses_a,
             const std::vector<Eigen::Vector3d>& poses_b);

} // namespace faceflow
