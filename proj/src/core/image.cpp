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

#include "core/image.hpp"

#include "core/errors.hpp"

#include <cmath>

namespace faceflow {

ImageTensor ImageTensor::zeros(int width, int height) {
  if (width < 1 || height < 1) throw ShapeError("image size must be >= 1");
  ImageTensor img;
  img.width = width;
  img.height = height;
  img.data.assign(static_cast<size_t>(3) * width * height, 0.0);
  return img;
}

void ImageTensor::validate() const {
  if (width < 1 || height < 1) throw ShapeError("image size must be >= 1");
  if (data.size() != static_cast<size_t>(3) * width * height) {
    throw ShapeError("image payload does not match its dims");
  }
  for (const double v : data) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidParameterError("image values must lie in [0, 1]");
    }
  }
}

WeightMask WeightMask::ones(int width, int height) {
  if (width < 1 || height < 1) throw ShapeError("mask size must be >= 1");
  WeightMask mask;
  mask.width = width;
  mask.height = height;
  mask.data.assign(static_cast<size_t>(width) * height, 1.0);
  return mask;
}

void WeightMask::validate() const {
  if (width < 1 || height < 1) throw ShapeError("mask size must be >= 1");
  if (data.size() != static_cast<size_t>(width) * height) {
    throw ShapeError("mask payload does not match its dims");
  }
  for (const double v : data) {
    if (!std::isfinite(v) || v < 1.0) {
      throw InvalidParameterError("mask weights must be finite and >= 1");
    }
  }
}

} // namespace faceflow
