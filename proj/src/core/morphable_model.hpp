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

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace faceflow {

inline constexpr int kLandmarkCount = 68;

/// Linear statistical face model: mean shape plus identity and expression
/// bases. Immutable after construction and safe to share across threads.
///
/// Coordinate frame: x right, y up, z toward the viewer. The y-down flip
/// happens only when a flow map is rasterized.
struct MorphableBasis {
  Eigen::VectorXd mean_shape;                  // 3N
  Eigen::MatrixXd id_basis;                    // 3N x K
  Eigen::MatrixXd exp_basis;                   // 3N x L
  std::vector<std::uint32_t> landmark_indices; // 68 vertex indices
  std::vector<std::array<std::uint32_t, 3>> triangles; // optional mesh

  int vertex_count() const { return static_cast<int>(mean_shape.size() / 3); }
  int id_dim() const { return static_cast<int>(id_basis.cols()); }
  int exp_dim() const { return static_cast<int>(exp_basis.cols()); }

  /// Throws ShapeError / InvalidParameterError when the invariants
  /// (consistent sizes, 68 unique in-range landmark indices) do not hold.
  void validate() const;
};

/// Full parameter set of one face instance: identity and expression
/// coefficients plus the rigid transform.
struct ModelParams {
  Eigen::VectorXd alpha_id;  // K
  Eigen::VectorXd alpha_exp; // L
  Eigen::Vector3d rotation{0, 0, 0};    // pitch, yaw, roll in radians
  Eigen::Vector3d translation{0, 0, 0}; // x, y in pixels; z in model units
  double scale = 1.0;

  static ModelParams zeros(int id_dim, int exp_dim);

  bool all_finite() const;
};

/// N vertices as an N x 3 matrix, one (x, y, z) row per vertex.
using PointCloud = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Ordered 2D landmarks with per-point positive weights.
struct LandmarkSet {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;  // 68 x 2, pixel coords
  Eigen::VectorXd weights;                          // 68, all > 0

  static LandmarkSet with_unit_weights(Eigen::Matrix<double, Eigen::Dynamic, 2> pts);

  void validate() const;
};

/// R = R_x(pitch) * R_y(yaw) * R_z(roll), intrinsic, right-handed.
/// Throws InvalidParameterError on non-finite angles.
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& rotation);

/// Partial derivatives of rotation_matrix with respect to each Euler angle;
/// axis is 0 = pitch, 1 = yaw, 2 = roll.
Eigen::Matrix3d rotation_matrix_derivative(const Eigen::Vector3d& rotation, int axis);

/// Per vertex: s * R * (mean + A_id*alpha_id + A_exp*alpha_exp) + t.
/// Throws ShapeError on coefficient dimension mismatch and
/// InvalidParameterError when scale <= 0 or params are non-finite.
PointCloud reconstruct(const MorphableBasis& basis, const ModelParams& params);

/// Orthographic projection: drops the z coordinate, preserves order.
Eigen::Matrix<double, Eigen::Dynamic, 2> project(const PointCloud& cloud);

/// reconstruct + project + gather of the basis's 68 landmark vertices,
/// weights initialized to 1.
LandmarkSet landmarks_2d(const MorphableBasis& basis, const ModelParams& params);

namespace detail {

/// Rows of the basis matrices restricted to the 68 landmark vertices
/// (3*68 rows), so landmark evaluation does not touch the full model.
struct LandmarkSlice {
  Eigen::VectorXd mean;     // 204
  Eigen::MatrixXd id_cols;  // 204 x K
  Eigen::MatrixXd exp_cols; // 204 x L
};

LandmarkSlice landmark_slice(const MorphableBasis& basis);

} // namespace detail

} // namespace faceflow
