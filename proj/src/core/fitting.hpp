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

#include <optional>
#include <vector>

namespace faceflow {

/// Hyperparameters of the landmark fit. Loss weights follow the published
/// defaults: lambda1 = 10, lambda2 = 1, lambda3 = 1e-3, landmark weights
/// 10x on the mouth points (48-67) and 5x on the eye points (36-47).
struct FitConfig {
  int max_iterations = 2000;
  double step_size = 1e-2;
  double convergence_tol = 1e-10; // absolute loss delta between iterations
  double lambda1 = 10.0;
  double lambda2 = 1.0;
  double lambda3 = 1e-3;
  double huber_delta = 1e-3; // pixel units
  Eigen::VectorXd landmark_weights; // 68

  static FitConfig defaults();
  void validate() const;
};

/// Outcome of one fit. The loss trace is non-increasing across every window
/// of 10 iterations: momentum steps may raise the loss transiently, all other
/// accepted steps strictly improve it.
struct FitReport {
  ModelParams final_params;
  double final_loss = 0.0;
  std::vector<double> loss_trace;
  int iterations_used = 0;
  double mean_landmark_error_px = 0.0;
};

enum class Objective { Warm, Sub };

/// Piecewise-quadratic smoothing of |e|: e^2 / (2*delta) inside [-delta,
/// delta], |e| - delta/2 outside. Tends to |e| as delta -> 0.
double huber(double e, double delta);
double huber_derivative(double e, double delta);

/// Mean over the 68 landmarks of weight_i * (huber(dx_i) + huber(dy_i))
/// between the projected model landmarks and the target. Weights come from
/// the target set, so scaling all weights by c scales the loss by c.
double loss_landmark(const MorphableBasis& basis, const ModelParams& params,
                     const LandmarkSet& target, double huber_delta = 1e-3);

/// Mean absolute difference of the shape-space offsets
/// A_id*alpha_id + A_exp*alpha_exp between params and gt over all 3N entries.
double loss_shape(const MorphableBasis& basis, const ModelParams& params,
                  const ModelParams& gt);

/// L1 distance over the rigid transform: |r - r^|_1 + |s - s^|_1 + |t - t^|_1.
double loss_transform(const ModelParams& params, const ModelParams& gt);

/// L1 norm of the identity and expression coefficients.
double loss_reg(const ModelParams& params);

/// L_shp + lambda1*L_lm + lambda2*L_tr + lambda3*L_reg.
double loss_warm(const MorphableBasis& basis, const ModelParams& params,
                 const LandmarkSet& target, const ModelParams& gt,
                 const FitConfig& cfg);

/// L_lm + lambda3*L_reg.
double loss_sub(const MorphableBasis& basis, const ModelParams& params,
                const LandmarkSet& target, const FitConfig& cfg);

/// Analytic gradient of the chosen objective with respect to the flat
/// parameter vector [alpha_id, alpha_exp, rotation, translation, scale]
/// (length K + L + 7). gt is required for Objective::Warm.
Eigen::VectorXd gradient(Objective objective, const MorphableBasis& basis,
                         const ModelParams& params, const LandmarkSet& target,
                         const ModelParams* gt, const FitConfig& cfg);

/// Gradient descent with momentum 0.9 on L_warm (gt given) or L_sub,
/// interleaved with exact single-coordinate line minimizations that finish
/// the descent where subgradient steps stall.
/// Initialization: zero coefficients and rotation, scale and translation
/// from matching the landmark bounding boxes, unless `init` overrides it.
/// Scale is optimized as log(s), so the result always has scale > 0.
/// Throws OptimizationError (with the trace) if the loss turns non-finite.
FitReport fit(const MorphableBasis& basis, const LandmarkSet& target,
              const FitConfig& cfg, const ModelParams* gt = nullptr,
              const std::optional<ModelParams>& init = std::nullopt);

} // namespace faceflow
