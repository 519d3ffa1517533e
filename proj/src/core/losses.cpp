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

#include "core/losses.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>

namespace faceflow {

namespace {

constexpr int kBoxPadding = 4;

// Landmark groups of the standard 68-point annotation.
struct LandmarkGroup {
  int first, last; // inclusive
  double weight;
};

constexpr LandmarkGroup kMaskGroups[] = {
    {27, 35, 3.0},  // nose
    {36, 41, 5.0},  // right eye
    {42, 47, 5.0},  // left eye
    {48, 67, 10.0}, // mouth
};

} // namespace

WeightMask weighted_mask(const LandmarkSet& landmarks, int width, int height) {
  landmarks.validate();
  WeightMask mask = WeightMask::ones(width, height);
  for (const LandmarkGroup& group : kMaskGroups) {
    double min_x = landmarks.points(group.first, 0);
    double max_x = min_x;
    double min_y = landmarks.points(group.first, 1);
    double max_y = min_y;
    for (int i = group.first + 1; i <= group.last; ++i) {
      min_x = std::min(min_x, landmarks.points(i, 0));
      max_x = std::max(max_x, landmarks.points(i, 0));
      min_y = std::min(min_y, landmarks.points(i, 1));
      max_y = std::max(max_y, landmarks.points(i, 1));
    }
    // The padded box is clamped to the frame, so a group lying fully outside
    // degenerates to a one-pixel sliver at the border.
    const auto clampi = [](double v, int hi) {
      return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi)));
    };
    const int x0 = clampi(std::floor(min_x) - kBoxPadding, width - 1);
    const int x1 = clampi(std::ceil(max_x) + kBoxPadding, width - 1);
    const int y0 = clampi(std::floor(min_y) - kBoxPadding, height - 1);
    const int y1 = clampi(std::ceil(max_y) + kBoxPadding, height - 1);
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        mask.at(y, x) = std::max(mask.at(y, x), group.weight);
      }
    }
  }
  return mask;
}

double loss_weighted_pixel(const ImageTensor& generated,
                           const ImageTensor& target, const WeightMask& mask) {
  generated.validate();
  target.validate();
  mask.validate();
  if (generated.width != target.width || generated.height != target.height ||
      generated.width != mask.width || generated.height != mask.height) {
    throw ShapeError("images and mask must share dimensions");
  }
  double acc = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < generated.height; ++y) {
      for (int x = 0; x < generated.width; ++x) {
        acc += mask.at(y, x) * std::abs(generated.at(c, y, x) - target.at(c, y, x));
      }
    }
  }
  return acc / (3.0 * generated.height * generated.width);
}

double loss_adversarial(const FeatureMap& critic_scores_real,
                        const FeatureMap& critic_scores_fake) {
  critic_scores_real.validate();
  critic_scores_fake.validate();
  if (critic_scores_real.channels != critic_scores_fake.channels ||
      critic_scores_real.height != critic_scores_fake.height ||
      critic_scores_real.width != critic_scores_fake.width) {
    throw ShapeError("score maps must share dimensions");
  }
  double real = 0.0;
  double fake = 0.0;
  for (size_t i = 0; i < critic_scores_real.data.size(); ++i) {
    real += critic_scores_real.data[i];
    fake += critic_scores_fake.data[i];
  }
  const double n = static_cast<double>(critic_scores_real.data.size());
  return real / n - fake / n;
}

double loss_perceptual(const std::vector<FeatureMap>& features_generated,
                       const std::vector<FeatureMap>& features_target) {
  if (features_generated.size() != features_target.size()) {
    throw ShapeError("feature pyramids must have equal depth");
  }
  double total = 0.0;
  for (size_t level = 0; level < features_generated.size(); ++level) {
    const FeatureMap& a = features_generated[level];
    const FeatureMap& b = features_target[level];
    a.validate();
    b.validate();
    if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
      throw ShapeError("feature pyramids must share per-level shapes");
    }
    double acc = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
      acc += std::abs(a.data[i] - b.data[i]);
    }
    total += acc / static_cast<double>(a.data.size());
  }
  return total;
}

double loss_total(double adv, double wp, double perc) {
  if (!std::isfinite(adv) || !std::isfinite(wp) || !std::isfinite(perc)) {
    throw InvalidParameterError("loss terms must be finite");
  }
  return adv + 100.0 * wp + 10.0 * perc;
}

} // namespace faceflow
