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

#include "faceflow/faceflow.h"

#include "core/errors.hpp"
#include "core/fitting.hpp"
#include "core/flow.hpp"
#include "core/io.hpp"
#include "core/metrics.hpp"
#include "core/morphable_model.hpp"
#include "core/synthetic.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

struct ff_basis {
  faceflow::MorphableBasis impl;
};

struct ff_params {
  faceflow::ModelParams impl;
};

struct ff_flow {
  faceflow::FacialFlow impl;
};

struct ff_fit_report {
  faceflow::FitReport impl;
  ff_params params_view; // mirrors impl.final_params for borrowing
};

namespace {

thread_local std::string t_last_error;

ff_status status_from(faceflow::ErrorCode code) {
  switch (code) {
    case faceflow::ErrorCode::InvalidParameter:
      return FF_ERROR_INVALID_PARAMETER;
    case faceflow::ErrorCode::Shape:
      return FF_ERROR_SHAPE;
    case faceflow::ErrorCode::Range:
      return FF_ERROR_RANGE;
    case faceflow::ErrorCode::Format:
      return FF_ERROR_FORMAT;
    case faceflow::ErrorCode::Io:
      return FF_ERROR_IO;
    case faceflow::ErrorCode::Optimization:
      return FF_ERROR_OPTIMIZATION;
  }
  return FF_ERROR_UNKNOWN;
}

template <typename Fn>
ff_status guarded(Fn&& fn) {
  try {
    fn();
    return FF_OK;
  } catch (const faceflow::Error& e) {
    t_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return FF_ERROR_UNKNOWN;
  } catch (...) {
    t_last_error = "unknown error";
    return FF_ERROR_UNKNOWN;
  }
}

ff_status fail_null(const char* what) {
  t_last_error = std::string(what) + " must not be NULL";
  return FF_ERROR_INVALID_PARAMETER;
}

} // namespace

extern "C" {

const char* ff_last_error(void) { return t_last_error.c_str(); }

/* --------------------------------- basis --------------------------------- */

ff_status ff_basis_load(const char* path, ff_basis** out) {
  if (path == nullptr) return fail_null("path");
  if (out == nullptr) return fail_null("out");
  return guarded([&] { *out = new ff_basis{faceflow::load_basis(path)}; });
}

ff_status ff_basis_save(const ff_basis* basis, const char* path) {
  if (basis == nullptr) return fail_null("basis");
  if (path == nullptr) return fail_null("path");
  return guarded([&] { faceflow::save_basis(basis->impl, path); });
}

ff_status ff_basis_synthetic(uint32_t n_vertices, uint32_t id_dim,
                             uint32_t exp_dim, uint64_t seed, ff_basis** out) {
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    *out = new ff_basis{faceflow::synthetic_basis(
        static_cast<int>(n_vertices), static_cast<int>(id_dim),
        static_cast<int>(exp_dim), seed)};
  });
}

void ff_basis_free(ff_basis* basis) { delete basis; }

uint32_t ff_basis_vertex_count(const ff_basis* basis) {
  return basis == nullptr ? 0 : static_cast<uint32_t>(basis->impl.vertex_count());
}

uint32_t ff_basis_id_dim(const ff_basis* basis) {
  return basis == nullptr ? 0 : static_cast<uint32_t>(basis->impl.id_dim());
}

uint32_t ff_basis_exp_dim(const ff_basis* basis) {
  return basis == nullptr ? 0 : static_cast<uint32_t>(basis->impl.exp_dim());
}

/* -------------------------------- params --------------------------------- */

ff_status ff_params_load(const char* path, ff_params** out) {
  if (path == nullptr) return fail_null("path");
  if (out == nullptr) return fail_null("out");
  return guarded([&] { *out = new ff_params{faceflow::load_params(path)}; });
}

ff_status ff_params_save(const ff_params* params, const char* path) {
  if (params == nullptr) return fail_null("params");
  if (path == nullptr) return fail_null("path");
  return guarded([&] { faceflow::save_params(params->impl, path); });
}

ff_status ff_params_random(const ff_basis* basis, uint64_t seed,
                           ff_params** out) {
  if (basis == nullptr) return fail_null("basis");
  if (out == nullptr) return fail_null("out");
  return guarded(
      [&] { *out = new ff_params{faceflow::random_params(basis->impl, seed)}; });
}

ff_status ff_params_interpolate(const ff_params* src, const ff_params* dst,
                                double theta, ff_params** out) {
  if (src == nullptr) return fail_null("src");
  if (dst == nullptr) return fail_null("dst");
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    *out = new ff_params{
        faceflow::interpolate_params(src->impl, dst->impl, theta)};
  });
}

ff_status ff_params_substitute(const ff_params* source, const ff_params* driver,
                               int take_expression, int take_pose,
                               ff_params** out) {
  if (source == nullptr) return fail_null("source");
  if (driver == nullptr) return fail_null("driver");
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    *out = new ff_params{faceflow::substitute_params(
        source->impl, driver->impl, take_expression != 0, take_pose != 0)};
  });
}

ff_status ff_params_perturb(const ff_params* params, double std_dev,
                            uint64_t seed, ff_params** out) {
  if (params == nullptr) return fail_null("params");
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    *out = new ff_params{faceflow::perturb_params(params->impl, std_dev, seed)};
  });
}

void ff_params_free(ff_params* params) { delete params; }

/* ---------------------------- geometry exports --------------------------- */

ff_status ff_export_landmarks(const ff_basis* basis, const ff_params* params,
                              const char* path) {
  if (basis == nullptr) return fail_null("basis");
  if (params == nullptr) return fail_null("params");
  if (path == nullptr) return fail_null("path");
  return guarded([&] {
    faceflow::save_landmarks(faceflow::landmarks_2d(basis->impl, params->impl),
                             path);
  });
}

ff_status ff_export_obj(const ff_basis* basis, const ff_params* params,
                        const char* path) {
  if (basis == nullptr) return fail_null("basis");
  if (params == nullptr) return fail_null("params");
  if (path == nullptr) return fail_null("path");
  return guarded([&] { faceflow::export_obj(basis->impl, params->impl, path); });
}

/* --------------------------------- fitting ------------------------------- */

void ff_fit_options_init(ff_fit_options* options) {
  if (options == nullptr) return;
  const faceflow::FitConfig cfg = faceflow::FitConfig::defaults();
  options->max_iterations = cfg.max_iterations;
  options->step_size = cfg.step_size;
  options->convergence_tol = cfg.convergence_tol;
  options->huber_delta = cfg.huber_delta;
  options->lambda1 = cfg.lambda1;
  options->lambda2 = cfg.lambda2;
  options->lambda3 = cfg.lambda3;
}

ff_status ff_fit(const ff_basis* basis, const char* landmarks_path,
                 const ff_fit_options* options, const ff_params* warm_start_gt,
                 ff_fit_report** out) {
  if (basis == nullptr) return fail_null("basis");
  if (landmarks_path == nullptr) return fail_null("landmarks_path");
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    faceflow::FitConfig cfg = faceflow::FitConfig::defaults();
    if (options != nullptr) {
      cfg.max_iterations = options->max_iterations;
      cfg.step_size = options->step_size;
      cfg.convergence_tol = options->convergence_tol;
      cfg.huber_delta = options->huber_delta;
      cfg.lambda1 = options->lambda1;
      cfg.lambda2 = options->lambda2;
      cfg.lambda3 = options->lambda3;
    }
    const faceflow::LandmarkSet target = faceflow::load_landmarks(landmarks_path);
    const faceflow::ModelParams* gt =
        warm_start_gt == nullptr ? nullptr : &warm_start_gt->impl;
    faceflow::FitReport report = faceflow::fit(basis->impl, target, cfg, gt);
    auto* handle = new ff_fit_report;
    handle->impl = std::move(report);
    handle->params_view.impl = handle->impl.final_params;
    *out = handle;
  });
}

const ff_params* ff_fit_report_params(const ff_fit_report* report) {
  return report == nullptr ? nullptr : &report->params_view;
}

double ff_fit_report_final_loss(const ff_fit_report* report) {
  return report == nullptr ? 0.0 : report->impl.final_loss;
}

int32_t ff_fit_report_iterations(const ff_fit_report* report) {
  return report == nullptr ? 0 : report->impl.iterations_used;
}

double ff_fit_report_landmark_error(const ff_fit_report* report) {
  return report == nullptr ? 0.0 : report->impl.mean_landmark_error_px;
}

size_t ff_fit_report_trace_length(const ff_fit_report* report) {
  return report == nullptr ? 0 : report->impl.loss_trace.size();
}

ff_status ff_fit_report_trace(const ff_fit_report* report, double* out,
                              size_t capacity) {
  if (report == nullptr) return fail_null("report");
  if (out == nullptr) return fail_null("out");
  const size_t n = std::min(capacity, report->impl.loss_trace.size());
  for (size_t i = 0; i < n; ++i) out[i] = report->impl.loss_trace[i];
  return FF_OK;
}

ff_status ff_fit_report_save(const ff_fit_report* report, const char* path) {
  if (report == nullptr) return fail_null("report");
  if (path == nullptr) return fail_null("path");
  return guarded([&] { faceflow::save_fit_report(report->impl, path); });
}

void ff_fit_report_free(ff_fit_report* report) { delete report; }

/* ---------------------------------- flow --------------------------------- */

ff_status ff_flow_rasterize(const ff_basis* basis, const ff_params* source,
                            const ff_params* intermediate, uint32_t width,
                            uint32_t height, ff_flow** out) {
  if (basis == nullptr) return fail_null("basis");
  if (source == nullptr) return fail_null("source");
  if (intermediate == nullptr) return fail_null("intermediate");
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    *out = new ff_flow{faceflow::rasterize_flow(
        basis->impl, source->impl, intermediate->impl, static_cast<int>(width),
        static_cast<int>(height))};
  });
}

ff_status ff_flow_sequence_save(const ff_basis* basis, const ff_params* source,
                                const ff_params* target, uint32_t n_frames,
                                uint32_t width, uint32_t height,
                                const char* out_dir,
                                int write_visualizations) {
  if (basis == nullptr) return fail_null("basis");
  if (source == nullptr) return fail_null("source");
  if (target == nullptr) return fail_null("target");
  if (out_dir == nullptr) return fail_null("out_dir");
  return guarded([&] {
    const faceflow::FlowSequence seq = faceflow::flow_sequence(
        basis->impl, source->impl, target->impl, static_cast<int>(n_frames),
        static_cast<int>(width), static_cast<int>(height));
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw faceflow::IoError("cannot create directory " + std::string(out_dir));
    for (size_t k = 0; k < seq.frames.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "flow_%03zu.f3f", k);
      const std::filesystem::path base = std::filesystem::path(out_dir) / name;
      faceflow::save_flow(seq.frames[k], base.string());
      if (write_visualizations != 0) {
        std::snprintf(name, sizeof(name), "flow_%03zu.ppm", k);
        const std::filesystem::path viz = std::filesystem::path(out_dir) / name;
        faceflow::save_flow_visualization(seq.frames[k], viz.string());
      }
    }
  });
}

ff_status ff_flow_save(const ff_flow* flow, const char* path) {
  if (flow == nullptr) return fail_null("flow");
  if (path == nullptr) return fail_null("path");
  return guarded([&] { faceflow::save_flow(flow->impl, path); });
}

ff_status ff_flow_load(const char* path, ff_flow** out) {
  if (path == nullptr) return fail_null("path");
  if (out == nullptr) return fail_null("out");
  return guarded([&] { *out = new ff_flow{faceflow::load_flow(path)}; });
}

ff_status ff_flow_save_visualization(const ff_flow* flow, const char* path) {
  if (flow == nullptr) return fail_null("flow");
  if (path == nullptr) return fail_null("path");
  return guarded([&] { faceflow::save_flow_visualization(flow->impl, path); });
}

uint32_t ff_flow_width(const ff_flow* flow) {
  return flow == nullptr ? 0 : static_cast<uint32_t>(flow->impl.width);
}

uint32_t ff_flow_height(const ff_flow* flow) {
  return flow == nullptr ? 0 : static_cast<uint32_t>(flow->impl.height);
}

ff_status ff_flow_data(const ff_flow* flow, const float** data,
                       const uint8_t** coverage) {
  if (flow == nullptr) return fail_null("flow");
  if (data != nullptr) *data = flow->impl.data.data();
  if (coverage != nullptr) *coverage = flow->impl.coverage.data();
  return FF_OK;
}

void ff_flow_free(ff_flow* flow) { delete flow; }

/* -------------------------------- metrics -------------------------------- */

ff_status ff_image_metrics(const char* image_a_path, const char* image_b_path,
                           ff_metrics* out) {
  if (image_a_path == nullptr) return fail_null("image_a_path");
  if (image_b_path == nullptr) return fail_null("image_b_path");
  if (out == nullptr) return fail_null("out");
  return guarded([&] {
    const faceflow::ImageTensor a = faceflow::load_image(image_a_path);
    const faceflow::ImageTensor b = faceflow::load_image(image_b_path);
    const faceflow::MetricsReport report = faceflow::image_metrics(a, b);
    out->mae = report.mae;
    out->mse = report.mse;
    out->psnr_db = report.psnr_db;
    out->ssim = report.ssim;
  });
}

ff_status ff_metrics_save(const ff_metrics* metrics, const char* path) {
  if (metrics == nullptr) return fail_null("metrics");
  if (path == nullptr) return fail_null("path");
  return guarded([&] {
    faceflow::MetricsReport report;
    report.mae = metrics->mae;
    report.mse = metrics->mse;
    report.psnr_db = metrics->psnr_db;
    report.ssim = metrics->ssim;
    faceflow::save_metrics_report(report, path);
  });
}

} // extern "C"
