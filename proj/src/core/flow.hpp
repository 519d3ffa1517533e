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

#include "core/morphable_model.hpp"

#include <cstdint>
#include <vector>

namespace faceflow {

/// Dense per-pixel 3D motion map. data is row-major with interleaved
/// (dx, dy, dz) channels in f32; coverage marks pixels hit by at least one
/// projected vertex. Non-covered pixels hold exactly (0, 0, 0).
struct FacialFlow {
  int width = 0;
  int height = 0;
  std::vector<float> data;       // width * height * 3
  std::vector<uint8_t> coverage; // width * height, 0 or 1

  static FacialFlow zeros(int width, int height);

  float at(int x, int y, int c) const {
    return data[static_cast<size_t>(3) * (static_cast<size_t>(y) * width + x) + c];
  }
  float& at(int x, int y, int c) {
    return data[static_cast<size_t>(3) * (static_cast<size_t>(y) * width + x) + c];
  }
  bool covered(int x, int y) const {
    return coverage[static_cast<size_t>(y) * width + x] != 0;
  }

  void validate() const;
};

/// Largest absolute motion component, 0 for an all-zero flow. This is the
/// normalization constant of the visualization encoding.
float flow_scale_max(const FacialFlow& flow);

/// Ordered flow frames with their interpolation coefficients.
struct FlowSequence {
  std::vector<FacialFlow> frames;
  std::vector<double> thetas;

  void validate() const;
};

/// Componentwise theta * p_s + (1 - theta) * p_t over every parameter field.
/// Euler angles interpolate linearly on purpose: the parameter space is
/// treated as linear. theta = 1 and theta = 0 return the endpoints exactly.
ModelParams interpolate_params(const ModelParams& p_s, const ModelParams& p_t,
                               double theta);

/// Per-vertex motion source minus intermediate: delta_i = x_s_i - x_m_i.
PointCloud motion(const PointCloud& x_s, const PointCloud& x_m);

/// Reconstructs both parameter sets and splats each vertex's motion at the
/// pixel nearest to the SOURCE vertex's projected position (model y-up is
/// flipped to image y-down as row = height - 1 - y, then rounded half-up).
/// Pixel collisions keep the vertex with the larger source depth; depth ties
/// keep the smaller vertex index. Out-of-frame vertices are dropped.
FacialFlow rasterize_flow(const MorphableBasis& basis, const ModelParams& p_s,
                          const ModelParams& p_m, int width, int height);

/// n_frames flows anchored at the source, with thetas uniform from 1 down to
/// 0 inclusive: frame k = rasterize_flow(p_s, interpolate(p_s, p_t, theta_k)).
FlowSequence flow_sequence(const MorphableBasis& basis, const ModelParams& p_s,
                           const ModelParams& p_t, int n_frames, int width,
                           int height);

/// Cross-reenactment mix: keeps the source identity coefficients,
/// translation and scale; takes the driver's expression coefficients and/or
/// rotation when the corresponding flag is set.
ModelParams substitute_params(const ModelParams& source,
                              const ModelParams& driver, bool take_expression,
                              bool take_pose);

/// Adds seeded zero-mean Gaussian noise with the given standard deviation to
/// the identity and expression coefficients only. std = 0 returns the input
/// unchanged; a fixed seed gives identical output.
ModelParams perturb_params(const ModelParams& params, double std_dev,
                           uint64_t seed);

} // namespace faceflow
