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

#include "core/morphable_model.hpp"

#include "core/errors.hpp"

#include <cmath>
#include <unordered_set>

namespace faceflow {

void MorphableBasis::validate() const {
  const auto rows = mean_shape.size();
  if (rows < 3 || rows % 3 != 0) {
    throw ShapeError("mean_shape length must be a positive multiple of 3");
  }
  if (id_basis.rows() != rows || exp_basis.rows() != rows) {
    throw ShapeError("basis matrices must have 3*n_vertices rows");
  }
  if (id_basis.cols() < 1 || exp_basis.cols() < 1) {
    throw ShapeError("basis matrices need at least one column");
  }
  const int n = vertex_count();
  if (n < kLandmarkCount) {
    throw ShapeError("model needs at least 68 vertices");
  }
  if (landmark_indices.size() != kLandmarkCount) {
    throw ShapeError("expected exactly 68 landmark indices");
  }
  std::unordered_set<std::uint32_t> seen;
  for (auto idx : landmark_indices) {
    if (idx >= static_cast<std::uint32_t>(n)) {
      throw RangeError("landmark index out of vertex range");
    }
    if (!seen.insert(idx).second) {
      throw InvalidParameterError("landmark indices must be unique");
    }
  }
  for (const auto& tri : triangles) {
    for (auto v : tri) {
      if (v >= static_cast<std::uint32_t>(n)) {
        throw RangeError("triangle vertex index out of range");
      }
    }
  }
  if (!mean_shape.allFinite() || !id_basis.allFinite() || !exp_basis.allFinite()) {
    throw InvalidParameterError("basis contains non-finite values");
  }
}

ModelParams ModelParams::zeros(int id_dim, int exp_dim) {
  ModelParams p;
  p.alpha_id = Eigen::VectorXd::Zero(id_dim);
  p.alpha_exp = Eigen::VectorXd::Zero(exp_dim);
  return p;
}

bool ModelParams::all_finite() const {
  return alpha_id.allFinite() && alpha_exp.allFinite() && rotation.allFinite() &&
         translation.allFinite() && std::isfinite(scale);
}

LandmarkSet LandmarkSet::with_unit_weights(Eigen::Matrix<double, Eigen::Dynamic, 2> pts) {
  LandmarkSet set;
  set.weights = Eigen::VectorXd::Ones(pts.rows());
  set.points = std::move(pts);
  return set;
}

void LandmarkSet::validate() const {
  if (points.rows() != kLandmarkCount || weights.size() != kLandmarkCount) {
    throw ShapeError("landmark set must hold exactly 68 points and weights");
  }
  if (!points.allFinite() || !weights.allFinite()) {
    throw InvalidParameterError("landmark set contains non-finite values");
  }
  if ((weights.array() <= 0.0).any()) {
    throw InvalidParameterError("landmark weights must be positive");
  }
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& rotation) {
  if (!rotation.allFinite()) {
    throw InvalidParameterError("rotation angles must be finite");
  }
  const double cx = std::cos(rotation[0]), sx = std::sin(rotation[0]);
  const double cy = std::cos(rotation[1]), sy = std::sin(rotation[1]);
  const double cz = std::cos(rotation[2]), sz = std::sin(rotation[2]);
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0,
        0, cx, -sx,
        0, sx, cx;
  ry << cy, 0, sy,
        0, 1, 0,
        -sy, 0, cy;
  rz << cz, -sz, 0,
        sz, cz, 0,
        0, 0, 1;
  return rx * ry * rz;
}

Eigen::Matrix3d rotation_matrix_derivative(const Eigen::Vector3d& rotation, int axis) {
  if (!rotation.allFinite()) {
    throw InvalidParameterError("rotation angles must be finite");
  }
  if (axis < 0 || axis > 2) {
    throw RangeError("rotation axis must be 0, 1 or 2");
  }
  const double cx = std::cos(rotation[0]), sx = std::sin(rotation[0]);
  const double cy = std::cos(rotation[1]), sy = std::sin(rotation[1]);
  const double cz = std::cos(rotation[2]), sz = std::sin(rotation[2]);
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0,
        0, cx, -sx,
        0, sx, cx;
  ry << cy, 0, sy,
        0, 1, 0,
        -sy, 0, cy;
  rz << cz, -sz, 0,
        sz, cz, 0,
        0, 0, 1;
  Eigen::Matrix3d d;
  switch (axis) {
  case 0:
    d << 0, 0, 0,
         0, -sx, -cx,
         0, cx, -sx;
    return d * ry * rz;
  case 1:
    d << -sy, 0, cy,
         0, 0, 0,
         -cy, 0, -sy;
    return rx * d * rz;
  default:
    d << -sz, -cz, 0,
         cz, -sz, 0,
         0, 0, 0;
    return rx * ry * d;
  }
}

namespace {

void check_params_against(const MorphableBasis& basis, const ModelParams& params) {
  if (params.alpha_id.size() != basis.id_basis.cols() ||
      params.alpha_exp.size() != basis.exp_basis.cols()) {
    throw ShapeError("coefficient dimensions do not match the basis");
  }
  if (!params.all_finite()) {
    throw InvalidParameterError("model parameters must be finite");
  }
  if (params.scale <= 0.0) {
    throw InvalidParameterError("scale must be positive");
  }
}

} // namespace

PointCloud reconstruct(const MorphableBasis& basis, const ModelParams& params) {
  check_params_against(basis, params);
  Eigen::VectorXd shape = basis.mean_shape;
  shape.noalias() += basis.id_basis * params.alpha_id;
  shape.noalias() += basis.exp_basis * params.alpha_exp;

  const Eigen::Matrix3d r = rotation_matrix(params.rotation);
  const int n = basis.vertex_count();
  PointCloud cloud(n, 3);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v = shape.segment<3>(3 * i);
    cloud.row(i) = (params.scale * (r * v) + params.translation).transpose();
  }
  return cloud;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> project(const PointCloud& cloud) {
  return cloud.leftCols<2>();
}

LandmarkSet landmarks_2d(const MorphableBasis& basis, const ModelParams& params) {
  basis.validate();
  const auto projected = project(reconstruct(basis, params));
  Eigen::Matrix<double, Eigen::Dynamic, 2> pts(kLandmarkCount, 2);
  for (int i = 0; i < kLandmarkCount; ++i) {
    pts.row(i) = projected.row(static_cast<int>(basis.landmark_indices[i]));
  }
  return LandmarkSet::with_unit_weights(std::move(pts));
}

namespace detail {

LandmarkSlice landmark_slice(const MorphableBasis& basis) {
  LandmarkSlice slice;
  slice.mean.resize(3 * kLandmarkCount);
  slice.id_cols.resize(3 * kLandmarkCount, basis.id_basis.cols());
  slice.exp_cols.resize(3 * kLandmarkCount, basis.exp_basis.cols());
  for (int i = 0; i < kLandmarkCount; ++i) {
    const int src = 3 * static_cast<int>(basis.landmark_indices[i]);
    slice.mean.segment<3>(3 * i) = basis.mean_shape.segment<3>(src);
    slice.id_cols.middleRows<3>(3 * i) = basis.id_basis.middleRows<3>(src);
    slice.exp_cols.middleRows<3>(3 * i) = basis.exp_basis.middleRows<3>(src);
  }
  return slice;
}

} // namespace detail

} // namespace faceflow
