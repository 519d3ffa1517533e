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

namespace faceflow {

/// Seeded synthetic basis: mean shape uniform in [-1, 1]^3, bases built from
/// random orthogonal columns, 68 distinct landmark vertices, a simple strip
/// triangulation. All values are rounded through f32 so file roundtrips are
/// bit-stable.
MorphableBasis synthetic_basis(int n_vertices, int id_dim, int exp_dim,
                               std::uint64_t seed);

/// Seeded plausible parameters for a 128x128 pixel frame: coefficients of
/// order one, mild rotation, scale and translation that keep the projected
/// face inside the frame.
ModelParams random_params(const MorphableBasis& basis, std::uint64_t seed);

} // namespace faceflow
