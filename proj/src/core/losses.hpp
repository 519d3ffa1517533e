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
#include "core/manipulation.hpp"
#include "core/morphable_model.hpp"

#include <vector>

namespace faceflow {

/// Base weight 1 everywhere; axis-aligned boxes (padded by 4 px, clamped to
/// the frame) around the nose landmarks get weight 3, each eye group 5, the
/// mouth group 10. Overlapping boxes take the maximum.
WeightMask weighted_mask(const LandmarkSet& landmarks, int width, int height);

/// Mean over all pixels and channels of mask * |generated - target|.
double loss_weighted_pixel(const ImageTensor& generated,
                           const ImageTensor& target, const WeightMask& mask);

/// Critic-style score difference: mean(real scores) - mean(fake scores).
double loss_adversarial(const FeatureMap& critic_scores_real,
                        const FeatureMap& critic_scores_fake);

/// Sum over pyramid levels of the mean absolute feature difference.
double loss_perceptual(const std::vector<FeatureMap>& features_generated,
                       const std::vector<FeatureMap>& features_target);

/// adv + 100 * wp + 10 * perc.
double loss_total(double adv, double wp, double perc);

} // namespace faceflow
