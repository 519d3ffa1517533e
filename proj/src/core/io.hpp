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

#include "core/fitting.hpp"
#include "core/flow.hpp"
#include "core/image.hpp"
#include "core/manipulation.hpp"
#include "core/metrics.hpp"
#include "core/morphable_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace faceflow {

/// Whole-file helpers. Missing or unreadable paths raise IoError.
std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, size_t size);

// ---------------------------------------------------------------------------
// F3B basis container (little-endian):
//   magic "F3B1", u32 version=1, u32 N, u32 K, u32 L, u32 n_landmarks(=68),
//   f32 mean_shape[3N], f32 id_basis[3N*K] column-major,
//   f32 exp_basis[3N*L] column-major, u32 landmark_indices[68],
//   u32 n_triangles, u32 triangles[3*n_triangles].
// ---------------------------------------------------------------------------
std::vector<uint8_t> encode_basis(const MorphableBasis& basis);
MorphableBasis decode_basis(const uint8_t* data, size_t size);
void save_basis(const MorphableBasis& basis, const std::string& path);
MorphableBasis load_basis(const std::string& path);

// ---------------------------------------------------------------------------
// F3F flow container (little-endian):
//   magic "F3F1", u32 version=1, u32 W, u32 H, f32 s_max,
//   f32 data[W*H*3] row-major (dx, dy, dz), u8 coverage[W*H].
// ---------------------------------------------------------------------------
std::vector<uint8_t> encode_flow(const FacialFlow& flow);
FacialFlow decode_flow(const uint8_t* data, size_t size);
void save_flow(const FacialFlow& flow, const std::string& path);
FacialFlow load_flow(const std::string& path);

/// 8-bit RGB rendering of a flow (R=dx, G=dy, B=dz): each value v maps to
/// clamp(round(128 + 127*v/s_max), 0, 255) with s_max the largest absolute
/// component; an all-zero flow renders as uniform 128.
std::vector<uint8_t> flow_visualization_rgb(const FacialFlow& flow);
void save_flow_visualization(const FacialFlow& flow, const std::string& path);

// ---------------------------------------------------------------------------
// F3T tensor dump (little-endian): magic "F3T1", u32 rank, u32 dims[rank],
// f32 payload.
// ---------------------------------------------------------------------------
std::vector<uint8_t> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(const uint8_t* data, size_t size);
void save_tensor(const Tensor& tensor, const std::string& path);
Tensor load_tensor(const std::string& path);

// ---------------------------------------------------------------------------
// JSON codecs. Malformed documents raise FormatError.
// ---------------------------------------------------------------------------

/// {"alpha_id":[...],"alpha_exp":[...],"rotation":[pitch,yaw,roll],
///  "translation":[tx,ty,tz],"scale":s}
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

/// Either a bare array of 68 [x, y] pairs (unit weights) or
/// {"points":[[x,y]...],"weights":[...]} with 68 positive weights.
/// Writing emits the bare array when every weight is 1.
std::string landmarks_to_json(const LandmarkSet& landmarks);
LandmarkSet landmarks_from_json(const std::string& text);
void save_landmarks(const LandmarkSet& landmarks, const std::string& path);
LandmarkSet load_landmarks(const std::string& path);

std::string fit_report_to_json(const FitReport& report);
void save_fit_report(const FitReport& report, const std::string& path);

std::string metrics_report_to_json(const MetricsReport& report);
void save_metrics_report(const MetricsReport& report, const std::string& path);

// ---------------------------------------------------------------------------
// Images: binary PPM (P6, maxval 255), rows top to bottom, RGB interleaved.
// ---------------------------------------------------------------------------
void save_ppm(const std::string& path, int width, int height,
              const std::vector<uint8_t>& rgb);
ImageTensor load_image(const std::string& path);

// ---------------------------------------------------------------------------
// Wavefront OBJ mesh text (1-based face indices).
// ---------------------------------------------------------------------------
std::string obj_text(const PointCloud& cloud,
                     const std::vector<std::array<uint32_t, 3>>& triangles);
void export_obj(const MorphableBasis& basis, const ModelParams& params,
                const std::string& path);

} // namespace faceflow
