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

#include "core/flow.hpp"

#include "core/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace faceflow {

FacialFlow FacialFlow::zeros(int width, int height) {
  if (width < 1 || height < 1) throw RangeError("flow size must be >= 1");
  FacialFlow flow;
  flow.width = width;
  flow.height = height;
  flow.data.assign(static_cast<size_t>(width) * height * 3, 0.0f);
  flow.coverage.assign(static_cast<size_t>(width) * height, 0);
  return flow;
}

void FacialFlow::validate() const {
  if (width < 1 || height < 1) throw RangeError("flow size must be >= 1");
  const size_t pixels = static_cast<size_t>(width) * height;
  if (data.size() != pixels * 3 || coverage.size() != pixels) {
    throw ShapeError("flow buffers do not match width * height");
  }
  for (size_t p = 0; p < pixels; ++p) {
    for (int c = 0; c < 3; ++c) {
      const float v = data[3 * p + c];
      if (!std::isfinite(v)) throw InvalidParameterError("flow data must be finite");
      if (coverage[p] == 0 && v != 0.0f) {
        throw InvalidParameterError("non-covered flow pixels must be zero");
      }
    }
  }
}

float flow_scale_max(const FacialFlow& flow) {
  float s = 0.0f;
  for (const float v : flow.data) s = std::max(s, std::abs(v));
  return s;
}

void FlowSequence::validate() const {
  if (frames.size() != thetas.size()) {
    throw ShapeError("frame and theta lists must have equal length");
  }
  for (size_t i = 1; i < thetas.size(); ++i) {
    if (!(thetas[i] < thetas[i - 1])) {
      throw InvalidParameterError("thetas must be strictly monotone");
    }
  }
}

ModelParams interpolate_params(const ModelParams& p_s, const ModelParams& p_t,
                               double theta) {
  if (p_s.alpha_id.size() != p_t.alpha_id.size() ||
      p_s.alpha_exp.size() != p_t.alpha_exp.size()) {
    throw ShapeError("parameter dimensions disagree");
  }
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw RangeError("theta must lie in [0, 1]");
  }
  if (theta == 1.0) return p_s;
  if (theta == 0.0) return p_t;
  ModelParams out;
  const double u = 1.0 - theta;
  out.alpha_id = theta * p_s.alpha_id + u * p_t.alpha_id;
  out.alpha_exp = theta * p_s.alpha_exp + u * p_t.alpha_exp;
  out.rotation = theta * p_s.rotation + u * p_t.rotation;
  out.translation = theta * p_s.translation + u * p_t.translation;
  out.scale = theta * p_s.scale + u * p_t.scale;
  return out;
}

PointCloud motion(const PointCloud& x_s, const PointCloud& x_m) {
  if (x_s.rows() != x_m.rows()) {
    throw ShapeError("point clouds must have equal vertex counts");
  }
  return x_s - x_m;
}

FacialFlow rasterize_flow(const MorphableBasis& basis, const ModelParams& p_s,
                          const ModelParams& p_m, int width, int height) {
  if (width < 1 || height < 1) throw RangeError("flow size must be >= 1");
  const PointCloud source = reconstruct(basis, p_s);
  const PointCloud intermediate = reconstruct(basis, p_m);
  const PointCloud delta = source - intermediate;

  FacialFlow flow = FacialFlow::zeros(width, height);
  std::vector<double> depth(static_cast<size_t>(width) * height,
                            -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < source.rows(); ++i) {
    const int px = static_cast<int>(std::floor(source(i, 0) + 0.5));
    const int py = static_cast<int>(
        std::floor((static_cast<double>(height) - 1.0 - source(i, 1)) + 0.5));
    if (px < 0 || px >= width || py < 0 || py >= height) continue;
    const size_t pix = static_cast<size_t>(py) * width + px;
    const double z = source(i, 2);
    // Larger source depth wins; ties keep the earlier (smaller) index.
    if (flow.coverage[pix] != 0 && !(z > depth[pix])) continue;
    depth[pix] = z;
    flow.coverage[pix] = 1;
    for (int c = 0; c < 3; ++c) {
      flow.data[3 * pix + c] = static_cast<float>(delta(i, c));
    }
  }
  return flow;
}

FlowSequence flow_sequence(const MorphableBasis& basis, const ModelParams& p_s,
                           const ModelParams& p_t, int n_frames, int width,
                           int height) {
  if (n_frames < 2) throw RangeError("a flow sequence needs at least 2 frames");
  FlowSequence seq;
  seq.frames.reserve(n_frames);
  seq.thetas.reserve(n_frames);
  for (int k = 0; k < n_frames; ++k) {
    const double theta =
        1.0 - static_cast<double>(k) / static_cast<double>(n_frames - 1);
    const ModelParams p_m = interpolate_params(p_s, p_t, theta);
    seq.frames.push_back(rasterize_flow(basis, p_s, p_m, width, height));
    seq.thetas.push_back(theta);
  }
  return seq;
}

ModelParams substitute_params(const ModelParams& source,
                              const ModelParams& driver, bool take_expression,
                              bool take_pose) {
  if (source.alpha_id.size() != driver.alpha_id.size() ||
      source.alpha_exp.size() != driver.alpha_exp.size()) {
    throw ShapeError("parameter dimensions disagree");
  }
  ModelParams out = source;
  if (take_expression) out.alpha_exp = driver.alpha_exp;
  if (take_pose) out.rotation = driver.rotation;
  return out;
}

ModelParams perturb_params(const ModelParams& params, double std_dev,
                           uint64_t seed) {
  if (!(std_dev >= 0.0)) throw InvalidParameterError("std_dev must be >= 0");
  if (std_dev == 0.0) return params;
  ModelParams out = params;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std_dev);
  for (Eigen::Index i = 0; i < out.alpha_id.size(); ++i) out.alpha_id[i] += noise(rng);
  for (Eigen::Index i = 0; i < out.alpha_exp.size(); ++i) out.alpha_exp[i] += noise(rng);
  return out;
}

} // namespace faceflow
