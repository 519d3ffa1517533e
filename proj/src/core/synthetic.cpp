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

#include "core/synthetic.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace faceflow {

namespace {

double quantize_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

Eigen::MatrixXd orthogonal_columns(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = gauss(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return q;
}

} // namespace

MorphableBasis synthetic_basis(int n_vertices, int id_dim, int exp_dim,
                               std::uint64_t seed) {
  if (n_vertices < kLandmarkCount) {
    throw RangeError("synthetic basis needs at least 68 vertices");
  }
  if (id_dim < 1 || exp_dim < 1) {
    throw RangeError("basis dimensions must be at least 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);

  MorphableBasis basis;
  basis.mean_shape.resize(3 * n_vertices);
  for (int i = 0; i < basis.mean_shape.size(); ++i) {
    basis.mean_shape[i] = quantize_f32(box(rng));
  }

  basis.id_basis = orthogonal_columns(3 * n_vertices, id_dim, rng);
  basis.exp_basis = orthogonal_columns(3 * n_vertices, exp_dim, rng);
  basis.id_basis = basis.id_basis.unaryExpr(&quantize_f32);
  basis.exp_basis = basis.exp_basis.unaryExpr(&quantize_f32);

  std::vector<std::uint32_t> order(n_vertices);
  std::iota(order.begin(), order.end(), 0u);
  std::shuffle(order.begin(), order.end(), rng);
  basis.landmark_indices.assign(order.begin(), order.begin() + kLandmarkCount);
  std::sort(basis.landmark_indices.begin(), basis.landmark_indices.end());

  basis.triangles.reserve(n_vertices - 2);
  for (int i = 0; i + 2 < n_vertices; ++i) {
    basis.triangles.push_back({static_cast<std::uint32_t>(i),
                               static_cast<std::uint32_t>(i + 1),
                               static_cast<std::uint32_t>(i + 2)});
  }

  basis.validate();
  return basis;
}

ModelParams random_params(const MorphableBasis& basis, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 0.6);
  std::uniform_real_distribution<double> angle(-0.35, 0.35);
  std::uniform_real_distribution<double> scale_range(35.0, 55.0);
  std::uniform_real_distribution<double> center_jitter(-8.0, 8.0);
  std::uniform_real_distribution<double> depth(-5.0, 5.0);

  ModelParams p = ModelParams::zeros(basis.id_dim(), basis.exp_dim());
  for (int i = 0; i < p.alpha_id.size(); ++i) {
    p.alpha_id[i] = gauss(rng);
  }
  for (int i = 0; i < p.alpha_exp.size(); ++i) {
    p.alpha_exp[i] = gauss(rng);
  }
  p.rotation = Eigen::Vector3d(angle(rng), angle(rng), angle(rng));
  p.scale = scale_range(rng);
  p.translation =
      Eigen::Vector3d(64.0 + center_jitter(rng), 64.0 + center_jitter(rng), depth(rng));
  return p;
}

} // namespace faceflow
