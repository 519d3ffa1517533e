/*
 * Copyright 2026 The faceflow Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file faceflow.h
 * @brief C API of the faceflow library.
 *
 * The library reconstructs 3D morphable face models, fits their parameters
 * to 2D landmarks, builds dense facial motion flows between two parameter
 * sets, and scores images against each other.
 *
 * All objects are opaque handles created and destroyed by this API. Every
 * fallible function returns an ff_status; FF_OK means success and any other
 * value leaves outputs untouched. ff_last_error() returns a message for the
 * most recent failure on the calling thread.
 *
 * Handles are immutable after creation and safe to share across threads;
 * creation and destruction of a given handle must not race.
 */

#ifndef FACEFLOW_FACEFLOW_H
#define FACEFLOW_FACEFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FF_API __declspec(dllexport)
#else
#define FF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/** Result of a fallible call. */
typedef enum ff_status {
  FF_OK = 0,
  /** A numeric argument is unusable (non-finite value, scale <= 0, NULL). */
  FF_ERROR_INVALID_PARAMETER = 1,
  /** Dimensions of related containers disagree. */
  FF_ERROR_SHAPE = 2,
  /** A scalar argument lies outside its documented range. */
  FF_ERROR_RANGE = 3,
  /** A file payload is malformed (bad magic, version, or truncation). */
  FF_ERROR_FORMAT = 4,
  /** A file cannot be opened, read, or written. */
  FF_ERROR_IO = 5,
  /** Parameter optimization diverged. */
  FF_ERROR_OPTIMIZATION = 6,
  /** Any failure not covered by the categories above. */
  FF_ERROR_UNKNOWN = 7
} ff_status;

/**
 * Returns a human-readable message for the calling thread's most recent
 * failed call, or an empty string if no call failed yet. The pointer stays
 * valid until the next failing call on the same thread.
 */
FF_API const char* ff_last_error(void);

/** Morphable model basis: mean shape, identity/expression bases, landmarks. */
typedef struct ff_basis ff_basis;
/** One parameter set: coefficients, rotation, translation, scale. */
typedef struct ff_params ff_params;
/** Dense W x H x 3 motion map with per-pixel coverage. */
typedef struct ff_flow ff_flow;
/** Outcome of one landmark fit. */
typedef struct ff_fit_report ff_fit_report;

/* ------------------------------------------------------------------------ */
/* Basis                                                                     */
/* ------------------------------------------------------------------------ */

/**
 * Loads a basis from an F3B file.
 *
 * @param path  File to read.
 * @param out   Receives the new handle on success; free with ff_basis_free.
 */
FF_API ff_status ff_basis_load(const char* path, ff_basis** out);

/** Writes a basis to an F3B file. */
FF_API ff_status ff_basis_save(const ff_basis* basis, const char* path);

/**
 * Generates a seeded synthetic basis with orthonormal identity and
 * expression columns. Deterministic for a fixed seed.
 *
 * @param n_vertices  Vertex count, at least 68.
 * @param id_dim      Identity basis column count, at least 1.
 * @param exp_dim     Expression basis column count, at least 1.
 * @param seed        Generator seed.
 * @param out         Receives the new handle; free with ff_basis_free.
 */
FF_API ff_status ff_basis_synthetic(uint32_t n_vertices, uint32_t id_dim,
                                    uint32_t exp_dim, uint64_t seed,
                                    ff_basis** out);

FF_API void ff_basis_free(ff_basis* basis);

/** Vertex count N. Returns 0 for a NULL handle. */
FF_API uint32_t ff_basis_vertex_count(const ff_basis* basis);
/** Identity coefficient count K. Returns 0 for a NULL handle. */
FF_API uint32_t ff_basis_id_dim(const ff_basis* basis);
/** Expression coefficient count L. Returns 0 for a NULL handle. */
FF_API uint32_t ff_basis_exp_dim(const ff_basis* basis);

/* ------------------------------------------------------------------------ */
/* Parameters                                                                */
/* ------------------------------------------------------------------------ */

/** Loads parameters from their JSON file form. */
FF_API ff_status ff_params_load(const char* path, ff_params** out);

/** Writes parameters as JSON. */
FF_API ff_status ff_params_save(const ff_params* params, const char* path);

/**
 * Draws a random but plausible parameter set for a 128 x 128 frame:
 * coefficients near zero, moderate rotation, scale and translation placing
 * the face inside the frame. Deterministic for a fixed seed.
 */
FF_API ff_status ff_params_random(const ff_basis* basis, uint64_t seed,
                                  ff_params** out);

/**
 * Componentwise theta * src + (1 - theta) * dst over all parameter fields.
 *
 * @param theta  Interpolation coefficient in [0, 1]; 1 returns src exactly
 *               and 0 returns dst exactly.
 */
FF_API ff_status ff_params_interpolate(const ff_params* src,
                                       const ff_params* dst, double theta,
                                       ff_params** out);

/**
 * Cross-reenactment mix: keeps the source identity coefficients, translation
 * and scale; takes the driver's expression coefficients and/or rotation when
 * the corresponding flag is nonzero.
 */
FF_API ff_status ff_params_substitute(const ff_params* source,
                                      const ff_params* driver,
                                      int take_expression, int take_pose,
                                      ff_params** out);

/**
 * Adds seeded zero-mean Gaussian noise with standard deviation std_dev to
 * the identity and expression coefficients. std_dev = 0 copies the input.
 */
FF_API ff_status ff_params_perturb(const ff_params* params, double std_dev,
                                   uint64_t seed, ff_params** out);

FF_API void ff_params_free(ff_params* params);

/* ------------------------------------------------------------------------ */
/* Geometry exports                                                          */
/* ------------------------------------------------------------------------ */

/**
 * Reconstructs the model under the given parameters, projects the 68
 * landmark vertices, and writes them as a landmarks JSON file.
 */
FF_API ff_status ff_export_landmarks(const ff_basis* basis,
                                     const ff_params* params,
                                     const char* path);

/** Reconstructs the mesh and writes it as Wavefront OBJ text. */
FF_API ff_status ff_export_obj(const ff_basis* basis, const ff_params* params,
                               const char* path);

/* ------------------------------------------------------------------------ */
/* Fitting                                                                   */
/* ------------------------------------------------------------------------ */

/** Hyperparameters of ff_fit. Initialize with ff_fit_options_init. */
typedef struct ff_fit_options {
  int32_t max_iterations;  /**< Iteration budget, >= 1. Default 2000. */
  double step_size;        /**< Base gradient step, > 0. Default 1e-2. */
  double convergence_tol;  /**< Stop when the loss delta drops below this. */
  double huber_delta;      /**< Landmark loss smoothing width in pixels. */
  double lambda1;          /**< Landmark loss weight in the warm objective. */
  double lambda2;          /**< Transform loss weight in the warm objective. */
  double lambda3;          /**< Coefficient regularizer weight. */
} ff_fit_options;

/** Fills in the default hyperparameters. */
FF_API void ff_fit_options_init(ff_fit_options* options);

/**
 * Estimates parameters from a 68-point landmarks JSON file by gradient
 * descent with momentum. With warm_start_gt the warm-up objective (shape,
 * landmark, transform, and regularizer terms against that ground truth) is
 * minimized; otherwise the landmark-plus-regularizer objective.
 *
 * @param basis          Model basis.
 * @param landmarks_path Landmarks JSON file.
 * @param options        Hyperparameters; NULL means defaults.
 * @param warm_start_gt  Optional ground-truth parameters, may be NULL.
 * @param out            Receives the report; free with ff_fit_report_free.
 * @return FF_ERROR_OPTIMIZATION if the loss turns non-finite.
 */
FF_API ff_status ff_fit(const ff_basis* basis, const char* landmarks_path,
                        const ff_fit_options* options,
                        const ff_params* warm_start_gt, ff_fit_report** out);

/** Fitted parameters, borrowed from the report. Do not free separately. */
FF_API const ff_params* ff_fit_report_params(const ff_fit_report* report);
FF_API double ff_fit_report_final_loss(const ff_fit_report* report);
FF_API int32_t ff_fit_report_iterations(const ff_fit_report* report);
/** Mean Euclidean landmark reprojection error in pixels. */
FF_API double ff_fit_report_landmark_error(const ff_fit_report* report);
/** Number of recorded loss values (initial loss plus accepted steps). */
FF_API size_t ff_fit_report_trace_length(const ff_fit_report* report);
/** Copies up to capacity trace values into out, oldest first. */
FF_API ff_status ff_fit_report_trace(const ff_fit_report* report, double* out,
                                     size_t capacity);
/** Writes the report (including the fitted parameters) as JSON. */
FF_API ff_status ff_fit_report_save(const ff_fit_report* report,
                                    const char* path);
FF_API void ff_fit_report_free(ff_fit_report* report);

/* ------------------------------------------------------------------------ */
/* Flow                                                                      */
/* ------------------------------------------------------------------------ */

/**
 * Rasterizes the per-vertex motion between the source parameters and an
 * intermediate parameter set into a width x height flow map, z-buffered by
 * source depth.
 */
FF_API ff_status ff_flow_rasterize(const ff_basis* basis,
                                   const ff_params* source,
                                   const ff_params* intermediate,
                                   uint32_t width, uint32_t height,
                                   ff_flow** out);

/**
 * Writes the n_frames flows interpolating from theta = 1 (zero motion) down
 * to theta = 0 (full motion to the target) into out_dir as flow_000.f3f,
 * flow_001.f3f, ... Optionally writes flow_XXX.ppm visualizations next to
 * them. The directory is created if missing.
 */
FF_API ff_status ff_flow_sequence_save(const ff_basis* basis,
                                       const ff_params* source,
                                       const ff_params* target,
                                       uint32_t n_frames, uint32_t width,
                                       uint32_t height, const char* out_dir,
                                       int write_visualizations);

/** Writes a flow as an F3F file. */
FF_API ff_status ff_flow_save(const ff_flow* flow, const char* path);

/** Reads a flow from an F3F file. */
FF_API ff_status ff_flow_load(const char* path, ff_flow** out);

/**
 * Writes the flow's 8-bit RGB visualization (R=dx, G=dy, B=dz, zero motion
 * at 128) as a binary PPM image.
 */
FF_API ff_status ff_flow_save_visualization(const ff_flow* flow,
                                            const char* path);

FF_API uint32_t ff_flow_width(const ff_flow* flow);
FF_API uint32_t ff_flow_height(const ff_flow* flow);

/**
 * Borrows the flow buffers: data is width*height*3 floats, row-major with
 * interleaved (dx, dy, dz); coverage is width*height bytes, 1 where a vertex
 * splatted. Pointers stay valid while the handle lives. Either output may
 * be NULL to skip it.
 */
FF_API ff_status ff_flow_data(const ff_flow* flow, const float** data,
                              const uint8_t** coverage);

FF_API void ff_flow_free(ff_flow* flow);

/* ------------------------------------------------------------------------ */
/* Metrics                                                                   */
/* ------------------------------------------------------------------------ */

/** Image similarity summary. */
typedef struct ff_metrics {
  double mae;     /**< Mean absolute error. */
  double mse;     /**< Mean squared error. */
  double psnr_db; /**< 10*log10(1/MSE), capped at 99 dB for MSE < 1e-10. */
  double ssim;    /**< Mean structural similarity over channels. */
} ff_metrics;

/**
 * Scores two equally sized PPM images (values scaled to [0, 1]) against
 * each other. Images must be at least 11 x 11 for the SSIM window.
 */
FF_API ff_status ff_image_metrics(const char* image_a_path,
                                  const char* image_b_path, ff_metrics* out);

/** Writes a metrics struct as JSON. */
FF_API ff_status ff_metrics_save(const ff_metrics* metrics, const char* path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FACEFLOW_FACEFLOW_H */
