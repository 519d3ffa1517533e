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

#include "core/io.hpp"

#include "core/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace faceflow {

namespace {

using nlohmann::json;

// Sanity bounds for file headers so size arithmetic cannot overflow.
constexpr uint32_t kMaxVertices = 50'000'000;
constexpr uint32_t kMaxBasisDim = 100'000;
constexpr uint32_t kMaxImageSide = 1'000'000;
constexpr uint32_t kMaxTensorRank = 16;

class ByteReader {
public:
  ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

  void magic(const char expected[4], const char* what) {
    char got[4];
    bytes(got, 4);
    if (std::memcmp(got, expected, 4) != 0) {
      throw FormatError(std::string("bad magic for ") + what);
    }
  }

  uint32_t u32() {
    uint8_t b[4];
    bytes(b, 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  void bytes(void* dst, size_t n) {
    if (size_ - offset_ < n) throw FormatError("truncated payload");
    std::memcpy(dst, data_ + offset_, n);
    offset_ += n;
  }

  void finish() const {
    if (offset_ != size_) throw FormatError("trailing bytes after payload");
  }

private:
  const uint8_t* data_;
  size_t size_;
  size_t offset_ = 0;
};

class ByteWriter {
public:
  void magic(const char m[4]) { bytes(m, 4); }

  void u32(uint32_t v) {
    out_.push_back(static_cast<uint8_t>(v & 0xff));
    out_.push_back(static_cast<uint8_t>((v >> 8) & 0xff));
    out_.push_back(static_cast<uint8_t>((v >> 16) & 0xff));
    out_.push_back(static_cast<uint8_t>((v >> 24) & 0xff));
  }

  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

  void bytes(const void* src, size_t n) {
    const uint8_t* p = static_cast<const uint8_t*>(src);
    out_.insert(out_.end(), p, p + n);
  }

  std::vector<uint8_t> take() { return std::move(out_); }

private:
  std::vector<uint8_t> out_;
};

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw FormatError("malformed JSON");
  return j;
}

double require_finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FormatError(std::string(what) + " must be finite");
  return v;
}

Eigen::VectorXd number_array(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = require_finite_number(j[i], what);
  }
  return v;
}

json params_to_json_value(const ModelParams& params) {
  json j;
  j["alpha_id"] = std::vector<double>(params.alpha_id.begin(), params.alpha_id.end());
  j["alpha_exp"] =
      std::vector<double>(params.alpha_exp.begin(), params.alpha_exp.end());
  j["rotation"] = {params.rotation.x(), params.rotation.y(), params.rotation.z()};
  j["translation"] = {params.translation.x(), params.translation.y(),
                      params.translation.z()};
  j["scale"] = params.scale;
  return j;
}

ModelParams params_from_json_value(const json& j) {
  if (!j.is_object()) throw FormatError("parameters must be a JSON object");
  for (const char* key : {"alpha_id", "alpha_exp", "rotation", "translation", "scale"}) {
    if (!j.contains(key)) {
      throw FormatError(std::string("parameters missing key ") + key);
    }
  }
  ModelParams p;
  p.alpha_id = number_array(j["alpha_id"], "alpha_id");
  p.alpha_exp = number_array(j["alpha_exp"], "alpha_exp");
  const Eigen::VectorXd rot = number_array(j["rotation"], "rotation");
  const Eigen::VectorXd tr = number_array(j["translation"], "translation");
  if (rot.size() != 3 || tr.size() != 3) {
    throw FormatError("rotation and translation must have 3 entries");
  }
  p.rotation = rot;
  p.translation = tr;
  p.scale = require_finite_number(j["scale"], "scale");
  if (!(p.scale > 0.0)) throw FormatError("scale must be > 0");
  return p;
}

} // namespace

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path);
  return data;
}

void write_file(const std::string& path, const void* data, size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("cannot write " + path);
}

// --------------------------------- F3B -------------------------------------

std::vector<uint8_t> encode_basis(const MorphableBasis& basis) {
  basis.validate();
  ByteWriter w;
  w.magic("F3B1");
  w.u32(1);
  const uint32_t n = static_cast<uint32_t>(basis.vertex_count());
  const uint32_t k = static_cast<uint32_t>(basis.id_dim());
  const uint32_t l = static_cast<uint32_t>(basis.exp_dim());
  w.u32(n);
  w.u32(k);
  w.u32(l);
  w.u32(kLandmarkCount);
  for (Eigen::Index i = 0; i < basis.mean_shape.size(); ++i) {
    w.f32(static_cast<float>(basis.mean_shape[i]));
  }
  for (Eigen::Index c = 0; c < basis.id_basis.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.id_basis.rows(); ++r) {
      w.f32(static_cast<float>(basis.id_basis(r, c)));
    }
  }
  for (Eigen::Index c = 0; c < basis.exp_basis.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.exp_basis.rows(); ++r) {
      w.f32(static_cast<float>(basis.exp_basis(r, c)));
    }
  }
  for (const uint32_t idx : basis.landmark_indices) w.u32(idx);
  w.u32(static_cast<uint32_t>(basis.triangles.size()));
  for (const auto& tri : basis.triangles) {
    w.u32(tri[0]);
    w.u32(tri[1]);
    w.u32(tri[2]);
  }
  return w.take();
}

MorphableBasis decode_basis(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  r.magic("F3B1", "basis file");
  if (r.u32() != 1) throw FormatError("unsupported basis file version");
  const uint32_t n = r.u32();
  const uint32_t k = r.u32();
  const uint32_t l = r.u32();
  const uint32_t n_landmarks = r.u32();
  if (n < kLandmarkCount || n > kMaxVertices) {
    throw FormatError("basis vertex count out of range");
  }
  if (k < 1 || k > kMaxBasisDim || l < 1 || l > kMaxBasisDim) {
    throw FormatError("basis dimensions out of range");
  }
  if (n_landmarks != kLandmarkCount) {
    throw FormatError("basis must carry exactly 68 landmarks");
  }
  MorphableBasis basis;
  basis.mean_shape.resize(3 * static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < basis.mean_shape.size(); ++i) {
    basis.mean_shape[i] = r.f32();
  }
  basis.id_basis.resize(3 * static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(k));
  for (Eigen::Index c = 0; c < basis.id_basis.cols(); ++c) {
    for (Eigen::Index row = 0; row < basis.id_basis.rows(); ++row) {
      basis.id_basis(row, c) = r.f32();
    }
  }
  basis.exp_basis.resize(3 * static_cast<Eigen::Index>(n),
                         static_cast<Eigen::Index>(l));
  for (Eigen::Index c = 0; c < basis.exp_basis.cols(); ++c) {
    for (Eigen::Index row = 0; row < basis.exp_basis.rows(); ++row) {
      basis.exp_basis(row, c) = r.f32();
    }
  }
  basis.landmark_indices.resize(kLandmarkCount);
  for (uint32_t& idx : basis.landmark_indices) idx = r.u32();
  const uint32_t n_triangles = r.u32();
  if (n_triangles > kMaxVertices) {
    throw FormatError("basis triangle count out of range");
  }
  basis.triangles.resize(n_triangles);
  for (auto& tri : basis.triangles) {
    tri[0] = r.u32();
    tri[1] = r.u32();
    tri[2] = r.u32();
  }
  r.finish();
  try {
    basis.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid basis payload: ") + e.what());
  }
  return basis;
}

void save_basis(const MorphableBasis& basis, const std::string& path) {
  const std::vector<uint8_t> bytes = encode_basis(basis);
  write_file(path, bytes.data(), bytes.size());
}

MorphableBasis load_basis(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  return decode_basis(bytes.data(), bytes.size());
}

// --------------------------------- F3F -------------------------------------

std::vector<uint8_t> encode_flow(const FacialFlow& flow) {
  flow.validate();
  ByteWriter w;
  w.magic("F3F1");
  w.u32(1);
  w.u32(static_cast<uint32_t>(flow.width));
  w.u32(static_cast<uint32_t>(flow.height));
  w.f32(flow_scale_max(flow));
  for (const float v : flow.data) w.f32(v);
  w.bytes(flow.coverage.data(), flow.coverage.size());
  return w.take();
}

FacialFlow decode_flow(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  r.magic("F3F1", "flow file");
  if (r.u32() != 1) throw FormatError("unsupported flow file version");
  const uint32_t width = r.u32();
  const uint32_t height = r.u32();
  if (width < 1 || width > kMaxImageSide || height < 1 || height > kMaxImageSide) {
    throw FormatError("flow size out of range");
  }
  r.f32(); // s_max is derivable from the payload; kept for readers that want it
  FacialFlow flow = FacialFlow::zeros(static_cast<int>(width),
                                      static_cast<int>(height));
  for (float& v : flow.data) v = r.f32();
  r.bytes(flow.coverage.data(), flow.coverage.size());
  r.finish();
  for (const uint8_t c : flow.coverage) {
    if (c > 1) throw FormatError("flow coverage must be 0 or 1");
  }
  try {
    flow.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid flow payload: ") + e.what());
  }
  return flow;
}

void save_flow(const FacialFlow& flow, const std::string& path) {
  const std::vector<uint8_t> bytes = encode_flow(flow);
  write_file(path, bytes.data(), bytes.size());
}

FacialFlow load_flow(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  return decode_flow(bytes.data(), bytes.size());
}

std::vector<uint8_t> flow_visualization_rgb(const FacialFlow& flow) {
  flow.validate();
  const double s_max = flow_scale_max(flow);
  std::vector<uint8_t> rgb(flow.data.size());
  for (size_t i = 0; i < flow.data.size(); ++i) {
    if (s_max == 0.0) {
      rgb[i] = 128;
      continue;
    }
    const long q = std::lround(128.0 + 127.0 * flow.data[i] / s_max);
    rgb[i] = static_cast<uint8_t>(std::clamp(q, 0L, 255L));
  }
  return rgb;
}

void save_flow_visualization(const FacialFlow& flow, const std::string& path) {
  save_ppm(path, flow.width, flow.height, flow_visualization_rgb(flow));
}

// --------------------------------- F3T -------------------------------------

std::vector<uint8_t> encode_tensor(const Tensor& tensor) {
  tensor.validate();
  ByteWriter w;
  w.magic("F3T1");
  w.u32(static_cast<uint32_t>(tensor.dims.size()));
  for (const uint32_t d : tensor.dims) w.u32(d);
  for (const double v : tensor.data) w.f32(static_cast<float>(v));
  return w.take();
}

Tensor decode_tensor(const uint8_t* data, size_t size) {
  ByteReader r(data, size);
  r.magic("F3T1", "tensor file");
  const uint32_t rank = r.u32();
  if (rank < 1 || rank > kMaxTensorRank) {
    throw FormatError("tensor rank out of range");
  }
  Tensor t;
  t.dims.resize(rank);
  size_t numel = 1;
  for (uint32_t& d : t.dims) {
    d = r.u32();
    if (d == 0 || d > kMaxVertices) throw FormatError("tensor dim out of range");
    if (numel > (static_cast<size_t>(1) << 32)) {
      throw FormatError("tensor payload too large");
    }
    numel *= d;
  }
  if (numel > (static_cast<size_t>(1) << 32)) {
    throw FormatError("tensor payload too large");
  }
  t.data.resize(numel);
  for (double& v : t.data) v = r.f32();
  r.finish();
  try {
    t.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("invalid tensor payload: ") + e.what());
  }
  return t;
}

void save_tensor(const Tensor& tensor, const std::string& path) {
  const std::vector<uint8_t> bytes = encode_tensor(tensor);
  write_file(path, bytes.data(), bytes.size());
}

Tensor load_tensor(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  return decode_tensor(bytes.data(), bytes.size());
}

// --------------------------------- JSON ------------------------------------

std::string params_to_json(const ModelParams& params) {
  return params_to_json_value(params).dump(2) + "\n";
}

ModelParams params_from_json(const std::string& text) {
  return params_from_json_value(parse_json(text));
}

void save_params(const ModelParams& params, const std::string& path) {
  const std::string text = params_to_json(params);
  write_file(path, text.data(), text.size());
}

ModelParams load_params(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  return params_from_json(std::string(bytes.begin(), bytes.end()));
}

std::string landmarks_to_json(const LandmarkSet& landmarks) {
  landmarks.validate();
  json points = json::array();
  for (int i = 0; i < kLandmarkCount; ++i) {
    points.push_back({landmarks.points(i, 0), landmarks.points(i, 1)});
  }
  const bool unit_weights =
      (landmarks.weights.array() == 1.0).all();
  if (unit_weights) return points.dump(2) + "\n";
  json j;
  j["points"] = points;
  j["weights"] =
      std::vector<double>(landmarks.weights.begin(), landmarks.weights.end());
  return j.dump(2) + "\n";
}

LandmarkSet landmarks_from_json(const std::string& text) {
  const json j = parse_json(text);
  const json* points = nullptr;
  const json* weights = nullptr;
  if (j.is_array()) {
    points = &j;
  } else if (j.is_object() && j.contains("points")) {
    points = &j["points"];
    if (j.contains("weights")) weights = &j["weights"];
  } else {
    throw FormatError("landmarks must be an array or an object with points");
  }
  if (!points->is_array() || points->size() != kLandmarkCount) {
    throw FormatError("landmarks must contain exactly 68 points");
  }
  LandmarkSet set;
  set.points.resize(kLandmarkCount, 2);
  set.weights = Eigen::VectorXd::Ones(kLandmarkCount);
  for (int i = 0; i < kLandmarkCount; ++i) {
    const json& p = (*points)[i];
    if (!p.is_array() || p.size() != 2) {
      throw FormatError("each landmark must be an [x, y] pair");
    }
    set.points(i, 0) = require_finite_number(p[0], "landmark x");
    set.points(i, 1) = require_finite_number(p[1], "landmark y");
  }
  if (weights != nullptr) {
    const Eigen::VectorXd w = number_array(*weights, "weights");
    if (w.size() != kLandmarkCount) {
      throw FormatError("weights must contain exactly 68 entries");
    }
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (!(w[i] > 0.0)) throw FormatError("weights must be > 0");
    }
    set.weights = w;
  }
  return set;
}

void save_landmarks(const LandmarkSet& landmarks, const std::string& path) {
  const std::string text = landmarks_to_json(landmarks);
  write_file(path, text.data(), text.size());
}

LandmarkSet load_landmarks(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  return landmarks_from_json(std::string(bytes.begin(), bytes.end()));
}

std::string fit_report_to_json(const FitReport& report) {
  json j;
  j["final_params"] = params_to_json_value(report.final_params);
  j["final_loss"] = report.final_loss;
  j["loss_trace"] = report.loss_trace;
  j["iterations_used"] = report.iterations_used;
  j["mean_landmark_error_px"] = report.mean_landmark_error_px;
  return j.dump(2) + "\n";
}

void save_fit_report(const FitReport& report, const std::string& path) {
  const std::string text = fit_report_to_json(report);
  write_file(path, text.data(), text.size());
}

std::string metrics_report_to_json(const MetricsReport& report) {
  json j;
  j["mae"] = report.mae;
  j["mse"] = report.mse;
  j["psnr_db"] = report.psnr_db;
  j["ssim"] = report.ssim;
  return j.dump(2) + "\n";
}

void save_metrics_report(const MetricsReport& report, const std::string& path) {
  const std::string text = metrics_report_to_json(report);
  write_file(path, text.data(), text.size());
}

// --------------------------------- PPM -------------------------------------

void save_ppm(const std::string& path, int width, int height,
              const std::vector<uint8_t>& rgb) {
  if (width < 1 || height < 1) throw ShapeError("image size must be >= 1");
  if (rgb.size() != static_cast<size_t>(width) * height * 3) {
    throw ShapeError("pixel buffer does not match width * height * 3");
  }
  std::ostringstream header;
  header << "P6\n" << width << " " << height << "\n255\n";
  std::vector<uint8_t> bytes;
  const std::string h = header.str();
  bytes.insert(bytes.end(), h.begin(), h.end());
  bytes.insert(bytes.end(), rgb.begin(), rgb.end());
  write_file(path, bytes.data(), bytes.size());
}

namespace {

// Reads one whitespace-delimited PPM header token, skipping # comments.
std::string ppm_token(const std::vector<uint8_t>& bytes, size_t& pos) {
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos]));
    ++pos;
  }
  if (token.empty()) throw FormatError("truncated PPM header");
  return token;
}

uint32_t ppm_number(const std::vector<uint8_t>& bytes, size_t& pos,
                    const char* what) {
  const std::string token = ppm_token(bytes, pos);
  uint32_t value = 0;
  for (const char c : token) {
    if (c < '0' || c > '9') {
      throw FormatError(std::string("bad PPM ") + what);
    }
    value = value * 10 + static_cast<uint32_t>(c - '0');
    if (value > kMaxImageSide) throw FormatError(std::string("PPM ") + what + " out of range");
  }
  return value;
}

} // namespace

ImageTensor load_image(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  size_t pos = 0;
  if (ppm_token(bytes, pos) != "P6") {
    throw FormatError("only binary PPM (P6) images are supported");
  }
  const uint32_t width = ppm_number(bytes, pos, "width");
  const uint32_t height = ppm_number(bytes, pos, "height");
  const uint32_t maxval = ppm_number(bytes, pos, "maxval");
  if (width < 1 || height < 1) throw FormatError("PPM size must be >= 1");
  if (maxval != 255) throw FormatError("only maxval 255 PPM images are supported");
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("bad PPM header terminator");
  }
  ++pos;
  const size_t expected = static_cast<size_t>(width) * height * 3;
  if (bytes.size() - pos != expected) {
    throw FormatError("PPM pixel payload size mismatch");
  }
  ImageTensor img = ImageTensor::zeros(static_cast<int>(width),
                                       static_cast<int>(height));
  for (uint32_t y = 0; y < height; ++y) {
    for (uint32_t x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(c, static_cast<int>(y), static_cast<int>(x)) =
            bytes[pos + (static_cast<size_t>(y) * width + x) * 3 + c] / 255.0;
      }
    }
  }
  return img;
}

// --------------------------------- OBJ -------------------------------------

std::string obj_text(const PointCloud& cloud,
                     const std::vector<std::array<uint32_t, 3>>& triangles) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    out << "v " << cloud(i, 0) << " " << cloud(i, 1) << " " << cloud(i, 2) << "\n";
  }
  const auto rows = static_cast<uint32_t>(cloud.rows());
  for (const auto& tri : triangles) {
    if (tri[0] >= rows || tri[1] >= rows || tri[2] >= rows) {
      throw ShapeError("triangle index out of range");
    }
    out << "f " << tri[0] + 1 << " " << tri[1] + 1 << " " << tri[2] + 1 << "\n";
  }
  return out.str();
}

void export_obj(const MorphableBasis& basis, const ModelParams& params,
                const std::string& path) {
  const PointCloud cloud = reconstruct(basis, params);
  const std::string text = obj_text(cloud, basis.triangles);
  write_file(path, text.data(), text.size());
}

} // namespace faceflow
