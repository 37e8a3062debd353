// Copyright 2026 The rps Authors
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

#include "rps/rps_c.h"

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include <json.hpp>

#include "rps/config.hpp"
#include "rps/eoa.hpp"
#include "rps/error.hpp"
#include "rps/harness.hpp"
#include "rps/io.hpp"
#include "rps/model.hpp"
#include "rps/perturbed_sums.hpp"

struct rps_config {
  rps::ConfigDocument doc;
};

struct rps_dataset {
  std::shared_ptr<const rps::RegressionDataset> data;
};

struct rps_state {
  rps::RpsState state;
};

struct rps_ellipsoid {
  rps::Ellipsoid e;
};

struct rps_mask {
  rps::Mask mask;
  rps::Grid grid;
};

struct rps_report {
  rps::ExperimentReport report;
};

namespace {

thread_local std::string g_last_error;

rps_status to_status(rps::ErrorKind kind) {
  switch (kind) {
    case rps::ErrorKind::kParameter: return RPS_ERR_PARAMETER;
    case rps::ErrorKind::kShape: return RPS_ERR_SHAPE;
    case rps::ErrorKind::kValidation: return RPS_ERR_VALIDATION;
    case rps::ErrorKind::kConditioning: return RPS_ERR_CONDITIONING;
    case rps::ErrorKind::kNotPsd: return RPS_ERR_NOT_PSD;
    case rps::ErrorKind::kDegreesOfFreedom: return RPS_ERR_DOF;
    case rps::ErrorKind::kIo: return RPS_ERR_IO;
  }
  return RPS_ERR_INTERNAL;
}

template <class F>
rps_status guarded(F&& body) noexcept {
  try {
    body();
    return RPS_OK;
  } catch (const rps::Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return RPS_ERR_INTERNAL;
}

#define RPS_REQUIRE(...)                                   \
  do {                                                     \
    if (!rps_require_all(__VA_ARGS__)) {                   \
      g_last_error = "null argument";                      \
      return RPS_ERR_NULL;                                 \
    }                                                      \
  } while (0)

template <class... Ptrs>
bool rps_require_all(Ptrs... ptrs) {
  return ((ptrs != nullptr) && ...);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

rps::Vector to_vector(const double* v, std::size_t d) {
  return Eigen::Map<const rps::Vector>(v, static_cast<Eigen::Index>(d));
}

void copy_out(const double* src, std::size_t count, double* dst, std::size_t capacity) {
  if (capacity < count) rps::fail(rps::ErrorKind::kShape, "output buffer too small");
  std::memcpy(dst, src, count * sizeof(double));
}

}  // namespace

extern "C" {

const char* rps_version(void) { return "0.1.0"; }

const char* rps_last_error(void) { return g_last_error.c_str(); }

const char* rps_status_name(rps_status status) {
  switch (status) {
    case RPS_OK: return "ok";
    case RPS_ERR_PARAMETER: return "parameter error";
    case RPS_ERR_SHAPE: return "shape error";
    case RPS_ERR_VALIDATION: return "validation error";
    case RPS_ERR_CONDITIONING: return "conditioning error";
    case RPS_ERR_NOT_PSD: return "not-PSD error";
    case RPS_ERR_DOF: return "degrees-of-freedom error";
    case RPS_ERR_IO: return "I/O error";
    case RPS_ERR_NULL: return "null argument";
    case RPS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

int rps_status_is_numerical(rps_status status) {
  return status == RPS_ERR_CONDITIONING || status == RPS_ERR_NOT_PSD || status == RPS_ERR_DOF;
}

void rps_string_free(char* text) { std::free(text); }

// ---- configuration ---------------------------------------------------------

rps_status rps_config_new(rps_config** out) {
  RPS_REQUIRE(out);
  return guarded([&] { *out = new rps_config{rps::to_document(rps::ExperimentConfig{})}; });
}

rps_status rps_config_parse(const char* text, rps_config** out) {
  RPS_REQUIRE(text, out);
  return guarded([&] {
    auto cfg = std::make_unique<rps_config>(rps_config{rps::ConfigDocument::parse(text)});
    rps::experiment_config_from(cfg->doc);
    *out = cfg.release();
  });
}

rps_status rps_config_load(const char* path, rps_config** out) {
  RPS_REQUIRE(path, out);
  return guarded([&] {
    auto cfg = std::make_unique<rps_config>(rps_config{rps::ConfigDocument::load(path)});
    rps::experiment_config_from(cfg->doc);
    *out = cfg.release();
  });
}

rps_status rps_config_preset(const char* name, uint64_t seed, rps_config** out) {
  RPS_REQUIRE(name, out);
  return guarded([&] {
    const std::string which(name);
    rps::ExperimentConfig cfg;
    if (which == "fig1") cfg = rps::fig1_config(seed);
    else if (which == "fig2") cfg = rps::fig2_config(seed);
    else rps::fail(rps::ErrorKind::kValidation, "unknown experiment '" + which + "' (expected fig1 or fig2)");
    *out = new rps_config{rps::to_document(cfg)};
  });
}

rps_status rps_config_set(rps_config* config, const char* key, const char* value) {
  RPS_REQUIRE(config, key, value);
  return guarded([&] {
    const std::string k(key);
    // n and n_list are alternative spellings of the same setting.
    if (k == "n") config->doc.erase("n_list");
    if (k == "n_list") config->doc.erase("n");
    config->doc.set(k, value);
  });
}

rps_status rps_config_validate(const rps_config* config) {
  RPS_REQUIRE(config);
  return guarded([&] { rps::experiment_config_from(config->doc); });
}

rps_status rps_config_to_text(const rps_config* config, char** out) {
  RPS_REQUIRE(config, out);
  return guarded([&] { *out = dup_string(config->doc.to_text()); });
}

void rps_config_free(rps_config* config) { delete config; }

// ---- datasets ----------------------------------------------------------------

rps_status rps_dataset_from_arrays(const double* phi, const double* y, size_t n, size_t d, rps_dataset** out) {
  RPS_REQUIRE(phi, y, out);
  return guarded([&] {
    rps::DataMatrix p = Eigen::Map<const rps::DataMatrix>(phi, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    rps::Vector v = to_vector(y, n);
    *out = new rps_dataset{std::make_shared<const rps::RegressionDataset>(std::move(p), std::move(v))};
  });
}

rps_status rps_dataset_simulate(const rps_config* config, size_t n, uint64_t seed, rps_dataset** out) {
  RPS_REQUIRE(config, out);
  return guarded([&] {
    const auto cfg = rps::experiment_config_from(config->doc);
    const std::size_t size = n ? n : cfg.n_list.front();
    *out = new rps_dataset{std::make_shared<const rps::RegressionDataset>(rps::simulate_fir(cfg.system, size, seed))};
  });
}

rps_status rps_dataset_for_config(const rps_config* config, uint64_t seed, rps_dataset** out) {
  RPS_REQUIRE(config, out);
  if (config->doc.contains("dataset")) {
    return guarded([&] {
      const auto path = *config->doc.get_string("dataset");
      *out = new rps_dataset{std::make_shared<const rps::RegressionDataset>(rps::load_dataset_csv(path))};
    });
  }
  return rps_dataset_simulate(config, 0, seed, out);
}

rps_status rps_dataset_load_csv(const char* path, rps_dataset** out) {
  RPS_REQUIRE(path, out);
  return guarded([&] {
    *out = new rps_dataset{std::make_shared<const rps::RegressionDataset>(rps::load_dataset_csv(path))};
  });
}

rps_status rps_dataset_save_csv(const rps_dataset* data, const char* path) {
  RPS_REQUIRE(data, path);
  return guarded([&] { rps::save_dataset_csv(*data->data, path); });
}

rps_status rps_dataset_save_json(const rps_dataset* data, const char* path) {
  RPS_REQUIRE(data, path);
  return guarded([&] {
    const auto& ds = *data->data;
    nlohmann::json j;
    j["n"] = ds.n();
    j["d"] = ds.d();
    j["y"] = std::vector<double>(ds.y().data(), ds.y().data() + ds.n());
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index t = 0; t < ds.n(); ++t)
      rows.push_back(std::vector<double>(ds.phi().data() + t * ds.d(), ds.phi().data() + (t + 1) * ds.d()));
    j["phi"] = std::move(rows);
    rps::io::write_file_atomic(path, j.dump(1) + "\n");
  });
}

size_t rps_dataset_n(const rps_dataset* data) { return data ? static_cast<size_t>(data->data->n()) : 0; }
size_t rps_dataset_d(const rps_dataset* data) { return data ? static_cast<size_t>(data->data->d()) : 0; }
void rps_dataset_free(rps_dataset* data) { delete data; }

// ---- states ------------------------------------------------------------------

rps_status rps_state_new(const rps_config* config, const rps_dataset* data, uint64_t seed, int sign_perturbed,
                         rps_state** out) {
  RPS_REQUIRE(config, data, out);
  return guarded([&] {
    auto rcfg = rps::experiment_config_from(config->doc).rps;
    rcfg.seed = seed;
    auto st = sign_perturbed ? rps::RpsState::initialize_sps(rcfg, data->data) : rps::RpsState::initialize(rcfg, data->data);
    *out = new rps_state{std::move(st)};
  });
}

rps_status rps_state_save_json(const rps_state* state, const char* path) {
  RPS_REQUIRE(state, path);
  return guarded([&] { rps::io::write_file_atomic(path, rps::state_to_json(state->state) + "\n"); });
}

rps_status rps_state_load_json(const char* path, const rps_dataset* data, rps_state** out) {
  RPS_REQUIRE(path, data, out);
  return guarded([&] { *out = new rps_state{rps::state_from_json(rps::io::read_file(path), data->data)}; });
}

int rps_state_m(const rps_state* state) { return state ? state->state.m() : 0; }
int rps_state_q(const rps_state* state) { return state ? state->state.q() : 0; }

rps_status rps_state_rank(const rps_state* state, const double* theta, size_t d, int* rank) {
  RPS_REQUIRE(state, theta, rank);
  return guarded([&] { *rank = rps::rank(to_vector(theta, d), state->state); });
}

rps_status rps_state_indicator(const rps_state* state, const double* theta, size_t d, int* inside) {
  RPS_REQUIRE(state, theta, inside);
  return guarded([&] { *inside = rps::indicator(to_vector(theta, d), state->state) ? 1 : 0; });
}

rps_status rps_state_s_values(const rps_state* state, const double* theta, size_t d, double* out, size_t capacity) {
  RPS_REQUIRE(state, theta, out);
  return guarded([&] {
    const auto sums = rps::s_values(to_vector(theta, d), state->state);
    if (capacity < sums.size() * d) rps::fail(rps::ErrorKind::kShape, "output buffer too small");
    for (std::size_t k = 0; k < sums.size(); ++k) std::memcpy(out + k * d, sums[k].data(), d * sizeof(double));
  });
}

void rps_state_free(rps_state* state) { delete state; }

// ---- grids -------------------------------------------------------------------

rps_status rps_default_grid(const rps_dataset* data, double halfwidth_sd, double lo[2], double hi[2]) {
  RPS_REQUIRE(data, lo, hi);
  return guarded([&] {
    const auto g = rps::default_grid(*data->data, halfwidth_sd, 2);
    lo[0] = g.lo[0];
    lo[1] = g.lo[1];
    hi[0] = g.hi[0];
    hi[1] = g.hi[1];
  });
}

rps_status rps_grid_region(const rps_state* state, const double lo[2], const double hi[2], size_t nx, size_t ny,
                           rps_mask** out) {
  RPS_REQUIRE(state, lo, hi, out);
  return guarded([&] {
    rps::Grid g;
    g.lo = {lo[0], lo[1]};
    g.hi = {hi[0], hi[1]};
    g.nx = nx;
    g.ny = ny;
    *out = new rps_mask{rps::grid_region(state->state, g), g};
  });
}

size_t rps_mask_count(const rps_mask* mask) { return mask ? mask->mask.count() : 0; }
double rps_mask_area(const rps_mask* mask) {
  return mask ? rps::region_area(mask->mask, mask->grid) : std::numeric_limits<double>::quiet_NaN();
}
int rps_mask_at(const rps_mask* mask, size_t ix, size_t iy) {
  if (!mask || ix >= mask->mask.nx || iy >= mask->mask.ny) return -1;
  return mask->mask.at(ix, iy) ? 1 : 0;
}

rps_status rps_mask_save_csv(const rps_mask* mask, const char* path) {
  RPS_REQUIRE(mask, path);
  return guarded([&] { rps::io::write_file_atomic(path, rps::mask_to_csv(mask->mask)); });
}

rps_status rps_mask_save_json(const rps_mask* mask, const char* path) {
  RPS_REQUIRE(mask, path);
  return guarded([&] {
    nlohmann::json j;
    j["grid"] = {{"lo", mask->grid.lo}, {"hi", mask->grid.hi}, {"nx", mask->grid.nx}, {"ny", mask->grid.ny}};
    j["cells"] = mask->mask.count();
    j["area"] = rps::region_area(mask->mask, mask->grid);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t iy = 0; iy < mask->mask.ny; ++iy) {
      std::vector<int> row(mask->mask.nx);
      for (std::size_t ix = 0; ix < mask->mask.nx; ++ix) row[ix] = mask->mask.at(ix, iy) ? 1 : 0;
      rows.push_back(std::move(row));
    }
    j["mask"] = std::move(rows);
    rps::io::write_file_atomic(path, j.dump() + "\n");
  });
}

void rps_mask_free(rps_mask* mask) { delete mask; }

// ---- ellipsoids --------------------------------------------------------------

rps_status rps_lmi_solve(const double* a, const double* b, double c, size_t d, double tol, double* gamma,
                         double* lambda, int* status_out) {
  RPS_REQUIRE(a, b, gamma, lambda, status_out);
  return guarded([&] {
    rps::LmiProblem prob;
    prob.a = Eigen::Map<const rps::DataMatrix>(a, static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    prob.b = to_vector(b, d);
    prob.c = c;
    const auto sol = rps::solve_lmi(prob, tol);
    *gamma = sol.gamma;
    *lambda = sol.lambda;
    *status_out = static_cast<int>(sol.status);
  });
}

rps_status rps_eoa_compute(const rps_state* state, double tol, rps_ellipsoid** out, int* infinite_count) {
  RPS_REQUIRE(state, out);
  return guarded([&] {
    auto oa = rps::outer_approximation(state->state, tol);
    if (infinite_count) *infinite_count = oa.infinite_count;
    *out = new rps_ellipsoid{std::move(oa.ellipsoid)};
  });
}

rps_status rps_asymptotic_ellipsoid(const rps_dataset* data, double p, rps_ellipsoid** out) {
  RPS_REQUIRE(data, out);
  return guarded([&] { *out = new rps_ellipsoid{rps::asymptotic_ellipsoid(*data->data, p)}; });
}

size_t rps_ellipsoid_dim(const rps_ellipsoid* e) { return e ? static_cast<size_t>(e->e.center.size()) : 0; }
double rps_ellipsoid_radius(const rps_ellipsoid* e) {
  return e ? e->e.radius : std::numeric_limits<double>::quiet_NaN();
}

rps_status rps_ellipsoid_center(const rps_ellipsoid* e, double* out, size_t capacity) {
  RPS_REQUIRE(e, out);
  return guarded([&] { copy_out(e->e.center.data(), static_cast<std::size_t>(e->e.center.size()), out, capacity); });
}

rps_status rps_ellipsoid_shape(const rps_ellipsoid* e, double* out, size_t capacity) {
  RPS_REQUIRE(e, out);
  return guarded([&] {
    const rps::DataMatrix rm = e->e.shape;
    copy_out(rm.data(), static_cast<std::size_t>(rm.size()), out, capacity);
  });
}

rps_status rps_ellipsoid_contains(const rps_ellipsoid* e, const double* theta, size_t d, int* inside) {
  RPS_REQUIRE(e, theta, inside);
  return guarded([&] { *inside = rps::ellipsoid_contains(e->e, to_vector(theta, d)) ? 1 : 0; });
}

rps_status rps_ellipsoid_save_json(const rps_ellipsoid* e, const char* path) {
  RPS_REQUIRE(e, path);
  return guarded([&] { rps::io::write_file_atomic(path, rps::ellipsoid_to_json(e->e) + "\n"); });
}

rps_status rps_ellipsoid_save_boundary_csv(const rps_ellipsoid* e, size_t points, const char* path) {
  RPS_REQUIRE(e, path);
  return guarded([&] { rps::io::write_file_atomic(path, rps::ellipse_boundary_csv(e->e, points)); });
}

void rps_ellipsoid_free(rps_ellipsoid* e) { delete e; }

// ---- studies -----------------------------------------------------------------

rps_status rps_coverage_run(const rps_config* config, rps_report** out) {
  RPS_REQUIRE(config, out);
  return guarded([&] {
    const auto cfg = rps::experiment_config_from(config->doc);
    *out = new rps_report{rps::coverage_study(cfg)};
  });
}

rps_status rps_experiment_run(const char* name, uint64_t seed, unsigned threads, rps_report** out) {
  RPS_REQUIRE(name, out);
  return guarded([&] {
    const std::string which(name);
    rps::ExperimentConfig cfg;
    if (which == "fig1") cfg = rps::fig1_config(seed);
    else if (which == "fig2") cfg = rps::fig2_config(seed);
    else rps::fail(rps::ErrorKind::kValidation, "unknown experiment '" + which + "' (expected fig1 or fig2)");
    cfg.threads = threads ? threads : 1;
    *out = new rps_report{rps::coverage_study(cfg)};
  });
}

size_t rps_report_method_count(const rps_report* report) { return report ? report->report.methods.size() : 0; }

rps_status rps_report_method(const rps_report* report, size_t index, rps_method_summary* out) {
  RPS_REQUIRE(report, out);
  return guarded([&] {
    if (index >= report->report.methods.size()) rps::fail(rps::ErrorKind::kParameter, "method index out of range");
    const auto& s = report->report.methods[index];
    *out = {s.method.c_str(), s.n, s.trials, s.failed, s.coverage(), s.coverage_stderr(),
            s.probe_inclusion(), s.mean_area(), s.area_stderr()};
  });
}

rps_status rps_report_rank_histogram(const rps_report* report, size_t index, size_t* out, size_t capacity,
                                     size_t* bins) {
  RPS_REQUIRE(report, bins);
  return guarded([&] {
    if (index >= report->report.methods.size()) rps::fail(rps::ErrorKind::kParameter, "method index out of range");
    const auto& h = report->report.methods[index].rank_histogram;
    *bins = h.size();
    if (h.empty()) return;
    if (!out || capacity < h.size()) rps::fail(rps::ErrorKind::kShape, "output buffer too small");
    std::copy(h.begin(), h.end(), out);
  });
}

rps_status rps_report_to_json(const rps_report* report, int include_runtime, char** out) {
  RPS_REQUIRE(report, out);
  return guarded([&] { *out = dup_string(rps::report_to_json(report->report, include_runtime != 0)); });
}

rps_status rps_report_summary_csv(const rps_report* report, char** out) {
  RPS_REQUIRE(report, out);
  return guarded([&] { *out = dup_string(rps::report_summary_csv(report->report)); });
}

rps_status rps_report_save_json(const rps_report* report, const char* path) {
  RPS_REQUIRE(report, path);
  return guarded([&] { rps::io::write_file_atomic(path, rps::report_to_json(report->report)); });
}

rps_status rps_report_save_summary_csv(const rps_report* report, const char* path) {
  RPS_REQUIRE(report, path);
  return guarded([&] { rps::io::write_file_atomic(path, rps::report_summary_csv(report->report)); });
}

rps_status rps_report_write_artifacts(const rps_report* report, const char* dir, size_t* files) {
  RPS_REQUIRE(report, dir);
  return guarded([&] {
    const auto written = rps::write_report_artifacts(report->report, dir);
    if (files) *files = written.size();
  });
}

void rps_report_free(rps_report* report) { delete report; }

}  // extern "C"
