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

// Exercises the shared library strictly through the public C header.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <faceflow/faceflow.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "faceflow_capi_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string path_in_scratch(const char* name) {
  return (scratch_dir() / name).string();
}

std::vector<char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

struct BasisDeleter {
  void operator()(ff_basis* b) const { ff_basis_free(b); }
};
struct ParamsDeleter {
  void operator()(ff_params* p) const { ff_params_free(p); }
};
struct FlowDeleter {
  void operator()(ff_flow* f) const { ff_flow_free(f); }
};
struct ReportDeleter {
  void operator()(ff_fit_report* r) const { ff_fit_report_free(r); }
};

using BasisPtr = std::unique_ptr<ff_basis, BasisDeleter>;
using ParamsPtr = std::unique_ptr<ff_params, ParamsDeleter>;
using FlowPtr = std::unique_ptr<ff_flow, FlowDeleter>;
using ReportPtr = std::unique_ptr<ff_fit_report, ReportDeleter>;

BasisPtr make_basis(uint32_t n = 150, uint32_t k = 4, uint32_t l = 3,
                    uint64_t seed = 1) {
  ff_basis* raw = nullptr;
  REQUIRE(ff_basis_synthetic(n, k, l, seed, &raw) == FF_OK);
  return BasisPtr(raw);
}

ParamsPtr make_params(const ff_basis* basis, uint64_t seed) {
  ff_params* raw = nullptr;
  REQUIRE(ff_params_random(basis, seed, &raw) == FF_OK);
  return ParamsPtr(raw);
}

std::string params_json(const ff_params* params, const char* name) {
  const std::string path = path_in_scratch(name);
  REQUIRE(ff_params_save(params, path.c_str()) == FF_OK);
  const std::vector<char> bytes = slurp(path);
  return std::string(bytes.begin(), bytes.end());
}

} // namespace

TEST_CASE("basis handles expose dimensions and roundtrip through files") {
  BasisPtr basis = make_basis(200, 5, 4, 11);
  CHECK(ff_basis_vertex_count(basis.get()) == 200);
  CHECK(ff_basis_id_dim(basis.get()) == 5);
  CHECK(ff_basis_exp_dim(basis.get()) == 4);

  const std::string path = path_in_scratch("basis.f3b");
  REQUIRE(ff_basis_save(basis.get(), path.c_str()) == FF_OK);
  ff_basis* loaded = nullptr;
  REQUIRE(ff_basis_load(path.c_str(), &loaded) == FF_OK);
  BasisPtr loaded_owner(loaded);
  CHECK(ff_basis_vertex_count(loaded) == 200);

  const std::string copy = path_in_scratch("basis_copy.f3b");
  REQUIRE(ff_basis_save(loaded, copy.c_str()) == FF_OK);
  CHECK(slurp(path) == slurp(copy));
}

TEST_CASE("null and invalid arguments map to typed statuses") {
  CHECK(ff_basis_load(nullptr, nullptr) == FF_ERROR_INVALID_PARAMETER);
  CHECK(std::strlen(ff_last_error()) > 0);

  ff_basis* out = nullptr;
  CHECK(ff_basis_load(path_in_scratch("missing.f3b").c_str(), &out) ==
        FF_ERROR_IO);
  CHECK(out == nullptr);
  CHECK(std::strlen(ff_last_error()) > 0);

  CHECK(ff_basis_synthetic(10, 2, 2, 0, &out) == FF_ERROR_RANGE);
  CHECK(out == nullptr);

  const std::string garbled = path_in_scratch("garbled.f3b");
  std::ofstream(garbled, std::ios::binary) << "not a basis";
  CHECK(ff_basis_load(garbled.c_str(), &out) == FF_ERROR_FORMAT);
}

TEST_CASE("random params are deterministic per seed") {
  BasisPtr basis = make_basis();
  ParamsPtr a = make_params(basis.get(), 42);
  ParamsPtr b = make_params(basis.get(), 42);
  ParamsPtr c = make_params(basis.get(), 43);
  CHECK(params_json(a.get(), "p_a.json") == params_json(b.get(), "p_b.json"));
  CHECK(params_json(a.get(), "p_a2.json") != params_json(c.get(), "p_c.json"));
}

TEST_CASE("parameter interpolation honors endpoints and range checks") {
  BasisPtr basis = make_basis();
  ParamsPtr src = make_params(basis.get(), 1);
  ParamsPtr dst = make_params(basis.get(), 2);

  ff_params* mid = nullptr;
  REQUIRE(ff_params_interpolate(src.get(), dst.get(), 1.0, &mid) == FF_OK);
  ParamsPtr at_one(mid);
  CHECK(params_json(at_one.get(), "i1.json") ==
        params_json(src.get(), "i1s.json"));

  mid = nullptr;
  REQUIRE(ff_params_interpolate(src.get(), dst.get(), 0.0, &mid) == FF_OK);
  ParamsPtr at_zero(mid);
  CHECK(params_json(at_zero.get(), "i0.json") ==
        params_json(dst.get(), "i0d.json"));

  mid = nullptr;
  CHECK(ff_params_interpolate(src.get(), dst.get(), 1.5, &mid) ==
        FF_ERROR_RANGE);
  CHECK(mid == nullptr);
}

TEST_CASE("substitution and perturbation flow through the C surface") {
  BasisPtr basis = make_basis();
  ParamsPtr source = make_params(basis.get(), 3);
  ParamsPtr driver = make_params(basis.get(), 4);

  ff_params* mixed = nullptr;
  REQUIRE(ff_params_substitute(source.get(), driver.get(), 0, 0, &mixed) ==
          FF_OK);
  ParamsPtr untouched(mixed);
  CHECK(params_json(untouched.get(), "s0.json") ==
        params_json(source.get(), "s0s.json"));

  ff_params* noisy = nullptr;
  REQUIRE(ff_params_perturb(source.get(), 0.0, 9, &noisy) == FF_OK);
  ParamsPtr copy(noisy);
  CHECK(params_json(copy.get(), "n0.json") ==
        params_json(source.get(), "n0s.json"));

  noisy = nullptr;
  REQUIRE(ff_params_perturb(source.get(), 0.1, 9, &noisy) == FF_OK);
  ParamsPtr jittered(noisy);
  CHECK(params_json(jittered.get(), "n1.json") !=
        params_json(source.get(), "n1s.json"));

  noisy = nullptr;
  CHECK(ff_params_perturb(source.get(), -0.1, 9, &noisy) ==
        FF_ERROR_INVALID_PARAMETER);
}

TEST_CASE("fitting a synthetic target recovers it through the C API") {
  BasisPtr basis = make_basis(300, 6, 4, 21);
  ParamsPtr truth = make_params(basis.get(), 22);

  const std::string lm_path = path_in_scratch("landmarks.json");
  REQUIRE(ff_export_landmarks(basis.get(), truth.get(), lm_path.c_str()) ==
          FF_OK);

  ff_fit_options options;
  ff_fit_options_init(&options);
  CHECK(options.max_iterations == 2000);
  CHECK(options.step_size == 1e-2);

  ff_fit_report* raw = nullptr;
  REQUIRE(ff_fit(basis.get(), lm_path.c_str(), &options, nullptr, &raw) ==
          FF_OK);
  ReportPtr report(raw);

  CHECK(ff_fit_report_landmark_error(report.get()) < 0.5);
  CHECK(ff_fit_report_iterations(report.get()) >= 1);
  CHECK(ff_fit_report_params(report.get()) != nullptr);

  const size_t trace_len = ff_fit_report_trace_length(report.get());
  REQUIRE(trace_len >= 2);
  std::vector<double> trace(trace_len);
  REQUIRE(ff_fit_report_trace(report.get(), trace.data(), trace.size()) ==
          FF_OK);
  CHECK(trace.back() <= trace.front());
  CHECK(trace.back() == ff_fit_report_final_loss(report.get()));

  const std::string report_path = path_in_scratch("fit_report.json");
  REQUIRE(ff_fit_report_save(report.get(), report_path.c_str()) == FF_OK);
  CHECK(!slurp(report_path).empty());
}

TEST_CASE("fitting a missing landmarks file reports an io error") {
  BasisPtr basis = make_basis();
  ff_fit_report* raw = nullptr;
  CHECK(ff_fit(basis.get(), path_in_scratch("absent.json").c_str(), nullptr,
               nullptr, &raw) == FF_ERROR_IO);
  CHECK(raw == nullptr);
}

TEST_CASE("flow handles rasterize, expose buffers, and roundtrip files") {
  BasisPtr basis = make_basis(220, 4, 3, 31);
  ParamsPtr src = make_params(basis.get(), 32);

  ff_flow* raw = nullptr;
  REQUIRE(ff_flow_rasterize(basis.get(), src.get(), src.get(), 64, 48, &raw) ==
          FF_OK);
  FlowPtr flow(raw);
  CHECK(ff_flow_width(flow.get()) == 64);
  CHECK(ff_flow_height(flow.get()) == 48);

  const float* data = nullptr;
  const uint8_t* coverage = nullptr;
  REQUIRE(ff_flow_data(flow.get(), &data, &coverage) == FF_OK);
  REQUIRE(data != nullptr);
  REQUIRE(coverage != nullptr);
  int covered = 0;
  for (size_t i = 0; i < 64u * 48u; ++i) covered += coverage[i];
  CHECK(covered > 0);
  for (size_t i = 0; i < 64u * 48u * 3u; ++i) CHECK(data[i] == 0.0f);

  const std::string path = path_in_scratch("flow.f3f");
  REQUIRE(ff_flow_save(flow.get(), path.c_str()) == FF_OK);
  ff_flow* loaded = nullptr;
  REQUIRE(ff_flow_load(path.c_str(), &loaded) == FF_OK);
  FlowPtr loaded_owner(loaded);
  const std::string copy = path_in_scratch("flow_copy.f3f");
  REQUIRE(ff_flow_save(loaded, copy.c_str()) == FF_OK);
  CHECK(slurp(path) == slurp(copy));

  const std::string viz = path_in_scratch("flow.ppm");
  REQUIRE(ff_flow_save_visualization(flow.get(), viz.c_str()) == FF_OK);
  const std::vector<char> ppm = slurp(viz);
  REQUIRE(ppm.size() > 2);
  CHECK(ppm[0] == 'P');
  CHECK(ppm[1] == '6');
}

TEST_CASE("flow sequences write one file per frame") {
  BasisPtr basis = make_basis(180, 4, 3, 41);
  ParamsPtr src = make_params(basis.get(), 42);
  ParamsPtr dst = make_params(basis.get(), 43);

  const std::string dir = (scratch_dir() / "seq").string();
  std::filesystem::remove_all(dir);
  REQUIRE(ff_flow_sequence_save(basis.get(), src.get(), dst.get(), 3, 32, 32,
                                dir.c_str(), 1) == FF_OK);
  for (const char* name : {"flow_000.f3f", "flow_001.f3f", "flow_002.f3f",
                           "flow_000.ppm", "flow_001.ppm", "flow_002.ppm"}) {
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / name));
  }

  CHECK(ff_flow_sequence_save(basis.get(), src.get(), dst.get(), 1, 32, 32,
                              dir.c_str(), 0) == FF_ERROR_RANGE);
}

TEST_CASE("obj export writes mesh text") {
  BasisPtr basis = make_basis(120, 3, 3, 51);
  ParamsPtr params = make_params(basis.get(), 52);
  const std::string path = path_in_scratch("mesh.obj");
  REQUIRE(ff_export_obj(basis.get(), params.get(), path.c_str()) == FF_OK);
  const std::vector<char> bytes = slurp(path);
  const std::string text(bytes.begin(), bytes.end());
  CHECK(text.find("v ") != std::string::npos);
  CHECK(text.find("f ") != std::string::npos);
}

TEST_CASE("image metrics compare ppm files and serialize") {
  BasisPtr basis = make_basis(200, 4, 3, 61);
  ParamsPtr src = make_params(basis.get(), 62);

  ff_flow* raw = nullptr;
  REQUIRE(ff_flow_rasterize(basis.get(), src.get(), src.get(), 32, 32, &raw) ==
          FF_OK);
  FlowPtr flow(raw);
  const std::string img = path_in_scratch("uniform.ppm");
  REQUIRE(ff_flow_save_visualization(flow.get(), img.c_str()) == FF_OK);

  ff_metrics metrics;
  REQUIRE(ff_image_metrics(img.c_str(), img.c_str(), &metrics) == FF_OK);
  CHECK(metrics.mae == 0.0);
  CHECK(metrics.mse == 0.0);
  CHECK(metrics.psnr_db == 99.0);
  CHECK(metrics.ssim == doctest::Approx(1.0).epsilon(1e-9));

  const std::string out = path_in_scratch("metrics.json");
  REQUIRE(ff_metrics_save(&metrics, out.c_str()) == FF_OK);
  CHECK(!slurp(out).empty());

  CHECK(ff_image_metrics("/nonexistent.ppm", img.c_str(), &metrics) ==
        FF_ERROR_IO);
}
