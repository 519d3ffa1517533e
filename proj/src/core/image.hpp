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

#include <vector>

namespace faceflow {

/// Three-channel image with values in [0, 1], planar channel-major layout:
/// data[(c * height + y) * width + x].
struct ImageTensor {
  int width = 0;
  int height = 0;
  std::vector<double> data; // 3 * height * width

  static ImageTensor zeros(int width, int height);

  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  void validate() const;
};

/// Single-channel per-pixel loss weights, all >= 1.
struct WeightMask {
  int width = 0;
  int height = 0;
  std::vector<double> data; // height * width

  static WeightMask ones(int width, int height);

  double at(int y, int x) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  double& at(int y, int x) {
    return data[static_cast<size_t>(y) * width + x];
  }

  void validate() const;
};

} // namespace faceflow
