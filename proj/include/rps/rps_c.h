/*
 * Copyright 2026 The rps Authors
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

/*
 * C interface to the residual-permuted sums library.
 *
 * Every object is an opaque handle created by a *_new / *_load / *_compute
 * call and released with the matching *_free. Functions return an
 * rps_status; on failure rps_last_error() describes the problem (the message
 * is thread-local and valid until the next failing call on the same thread).
 * Strings returned through char** are owned by the caller and released with
 * rps_string_free.
 */
#ifndef RPS_C_H
#define RPS_C_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(RPS_BUILDING_LIBRARY)
#define RPS_API __declspec(dllexport)
#else
#define RPS_API __declspec(dllimport)
#endif
#else
#define RPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rps_status {
  RPS_OK = 0,
  RPS_ERR_PARAMETER = 1,
  RPS_ERR_SHAPE = 2,
  RPS_ERR_VALIDATION = 3,
  RPS_ERR_CONDITIONING = 4,
  RPS_ERR_NOT_PSD = 5,
  RPS_ERR_DOF = 6,
  RPS_ERR_IO = 7,
  RPS_ERR_NULL = 8,
  RPS_ERR_INTERNAL = 9
} rps_status;

typedef struct rps_config rps_config;
typedef struct rps_dataset rps_dataset;
typedef struct rps_state rps_state;
typedef struct rps_ellipsoid rps_ellipsoid;
typedef struct rps_mask rps_mask;
typedef struct rps_report rps_report;

RPS_API const char* rps_version(void);
RPS_API const char* rps_last_error(void);
RPS_API const char* rps_status_name(rps_status status);
/* Nonzero for conditioning, not-PSD and degrees-of-freedom failures. */
RPS_API int rps_status_is_numerical(rps_status status);
RPS_API void rps_string_free(char* text);

/* ---- configuration (flat key = value text) ---------------------------- */

RPS_API rps_status rps_config_new(rps_config** out);
RPS_API rps_status rps_config_parse(const char* text, rps_config** out);
RPS_API rps_status rps_config_load(const char* path, rps_config** out);
/* Built-in experiment settings: "fig1" or "fig2". */
RPS_API rps_status rps_config_preset(const char* name, uint64_t seed, rps_config** out);
/* Override one key; the value uses the file syntax, bare words are strings. */
RPS_API rps_status rps_config_set(rps_config* config, const char* key, const char* value);
/* Parses the whole document; fails if any key or value is invalid. */
RPS_API rps_status rps_config_validate(const rps_config* config);
RPS_API rps_status rps_config_to_text(const rps_config* config, char** out);
RPS_API void rps_config_free(rps_config* config);

/* ---- datasets ----------------------------------------------------------- */

RPS_API rps_status rps_dataset_from_arrays(const double* phi_row_major, const double* y, size_t n, size_t d,
                                           rps_dataset** out);
/* FIR simulation from the config's system; n = 0 takes the first entry of
 * the config's sample sizes. */
RPS_API rps_status rps_dataset_simulate(const rps_config* config, size_t n, uint64_t seed, rps_dataset** out);
/* The config's `dataset` CSV when set, otherwise rps_dataset_simulate(config, 0, seed). */
RPS_API rps_status rps_dataset_for_config(const rps_config* config, uint64_t seed, rps_dataset** out);
RPS_API rps_status rps_dataset_load_csv(const char* path, rps_dataset** out);
RPS_API rps_status rps_dataset_save_csv(const rps_dataset* data, const char* path);
/* {"n": .., "d": .., "y": [..], "phi": [[..], ..]} */
RPS_API rps_status rps_dataset_save_json(const rps_dataset* data, const char* path);
RPS_API size_t rps_dataset_n(const rps_dataset* data);
RPS_API size_t rps_dataset_d(const rps_dataset* data);
RPS_API void rps_dataset_free(rps_dataset* data);

/* ---- confidence-region states ------------------------------------------- */

/* sign_perturbed = 0 builds the residual-permuted state, 1 the SPS baseline. */
RPS_API rps_status rps_state_new(const rps_config* config, const rps_dataset* data, uint64_t seed,
                                 int sign_perturbed, rps_state** out);
RPS_API rps_status rps_state_save_json(const rps_state* state, const char* path);
RPS_API rps_status rps_state_load_json(const char* path, const rps_dataset* data, rps_state** out);
RPS_API int rps_state_m(const rps_state* state);
RPS_API int rps_state_q(const rps_state* state);
RPS_API rps_status rps_state_rank(const rps_state* state, const double* theta, size_t d, int* rank);
RPS_API rps_status rps_state_indicator(const rps_state* state, const double* theta, size_t d, int* inside);
/* Writes S_0..S_{m-1} row by row into out (capacity m * d doubles). */
RPS_API rps_status rps_state_s_values(const rps_state* state, const double* theta, size_t d, double* out,
                                      size_t capacity);
RPS_API void rps_state_free(rps_state* state);

/* ---- grids -------------------------------------------------------------- */

/* theta_hat +- halfwidth_sd asymptotic standard deviations; d must be 2. */
RPS_API rps_status rps_default_grid(const rps_dataset* data, double halfwidth_sd, double lo[2], double hi[2]);
RPS_API rps_status rps_grid_region(const rps_state* state, const double lo[2], const double hi[2], size_t nx,
                                   size_t ny, rps_mask** out);
RPS_API size_t rps_mask_count(const rps_mask* mask);
RPS_API double rps_mask_area(const rps_mask* mask);
RPS_API int rps_mask_at(const rps_mask* mask, size_t ix, size_t iy);
RPS_API rps_status rps_mask_save_csv(const rps_mask* mask, const char* path);
/* {"grid": {...}, "cells": .., "area": .., "mask": [[0,1,..], ..]} */
RPS_API rps_status rps_mask_save_json(const rps_mask* mask, const char* path);
RPS_API void rps_mask_free(rps_mask* mask);

/* ---- ellipsoids --------------------------------------------------------- */

/* Solves min gamma s.t. lambda >= 0, [[-I + lambda A, lambda b], [lambda b^T,
 * lambda c + gamma]] >= 0 for a symmetric d x d A (row-major). status_out:
 * 0 optimal, 1 infeasible (+inf), 2 unbounded below (-inf). */
RPS_API rps_status rps_lmi_solve(const double* a_row_major, const double* b, double c, size_t d, double tol,
                                 double* gamma, double* lambda, int* status_out);
RPS_API rps_status rps_eoa_compute(const rps_state* state, double tol, rps_ellipsoid** out, int* infinite_count);
RPS_API rps_status rps_asymptotic_ellipsoid(const rps_dataset* data, double p, rps_ellipsoid** out);
RPS_API size_t rps_ellipsoid_dim(const rps_ellipsoid* e);
RPS_API double rps_ellipsoid_radius(const rps_ellipsoid* e);
RPS_API rps_status rps_ellipsoid_center(const rps_ellipsoid* e, double* out, size_t capacity);
RPS_API rps_status rps_ellipsoid_shape(const rps_ellipsoid* e, double* out_row_major, size_t capacity);
RPS_API rps_status rps_ellipsoid_contains(const rps_ellipsoid* e, const double* theta, size_t d, int* inside);
RPS_API rps_status rps_ellipsoid_save_json(const rps_ellipsoid* e, const char* path);
RPS_API rps_status rps_ellipsoid_save_boundary_csv(const rps_ellipsoid* e, size_t points, const char* path);
RPS_API void rps_ellipsoid_free(rps_ellipsoid* e);

/* ---- Monte Carlo studies ------------------------------------------------ */

typedef struct rps_method_summary {
  const char* method; /* owned by the report */
  size_t n;
  size_t trials;
  size_t failed;
  double coverage;
  double stderr_coverage;
  double probe_inclusion;
  double mean_area; /* NaN when areas were not computed */
  double area_stderr;
} rps_method_summary;

RPS_API rps_status rps_coverage_run(const rps_config* config, rps_report** out);
/* rps_config_preset(name, seed) with `threads` workers, then rps_coverage_run. */
RPS_API rps_status rps_experiment_run(const char* name, uint64_t seed, unsigned threads, rps_report** out);
RPS_API size_t rps_report_method_count(const rps_report* report);
RPS_API rps_status rps_report_method(const rps_report* report, size_t index, rps_method_summary* out);
/* Rank histogram (m bins) for indicator methods; *bins receives m. */
RPS_API rps_status rps_report_rank_histogram(const rps_report* report, size_t index, size_t* out, size_t capacity,
                                             size_t* bins);
RPS_API rps_status rps_report_to_json(const rps_report* report, int include_runtime, char** out);
RPS_API rps_status rps_report_summary_csv(const rps_report* report, char** out);
RPS_API rps_status rps_report_save_json(const rps_report* report, const char* path);
RPS_API rps_status rps_report_save_summary_csv(const rps_report* report, const char* path);
/* report.json, summary.csv, mask_*.csv and boundary_*.csv under dir;
 * *files receives the number of files written. */
RPS_API rps_status rps_report_write_artifacts(const rps_report* report, const char* dir, size_t* files);
RPS_API void rps_report_free(rps_report* report);

#ifdef __cplusplus
}
#endif

#endif /* RPS_C_H */
