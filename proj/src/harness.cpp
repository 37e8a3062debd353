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

#include "rps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/Dense>
#include <json.hpp>

#include "rps/error.hpp"
#include "rps/io.hpp"
#include "rps/rng.hpp"

namespace rps {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Grids

void Grid::validate() const {
  if (nx < 2 || ny < 2) fail(ErrorKind::kParameter, "grid resolution must be at least 2");
  for (int k = 0; k < 2; ++k)
    if (!(lo[k] < hi[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
      fail(ErrorKind::kParameter, "grid bounds must be finite with lo < hi");
}

double Grid::cell_area() const {
  return (hi[0] - lo[0]) / static_cast<double>(nx) * ((hi[1] - lo[1]) / static_cast<double>(ny));
}

Vector Grid::node(std::size_t ix, std::size_t iy) const {
  Vector theta(2);
  theta[0] = lo[0] + (static_cast<double>(ix) + 0.5) * (hi[0] - lo[0]) / static_cast<double>(nx);
  theta[1] = lo[1] + (static_cast<double>(iy) + 0.5) * (hi[1] - lo[1]) / static_cast<double>(ny);
  return theta;
}

Grid default_grid(const RegressionDataset& data, double halfwidth_sd, std::size_t resolution) {
  if (data.d() != 2) fail(ErrorKind::kShape, "grids are two-dimensional");
  if (!(halfwidth_sd > 0.0)) fail(ErrorKind::kParameter, "grid half-width must be positive");
  const Matrix gram = data.phi().transpose() * data.phi();
  const Eigen::FullPivLU<Matrix> lu(gram);
  if (!lu.isInvertible()) fail(ErrorKind::kConditioning, "Phi^T Phi is singular");
  const Vector center = lu.solve(data.phi().transpose() * data.y());
  const double sigma2 = noise_variance_estimate(data);
  const Matrix cov = lu.inverse() * sigma2;
  Grid g;
  for (int k = 0; k < 2; ++k) {
    double sd = std::sqrt(std::max(cov(k, k), 0.0));
    if (!(sd > 0.0)) sd = 1.0;
    g.lo[static_cast<std::size_t>(k)] = center[k] - halfwidth_sd * sd;
    g.hi[static_cast<std::size_t>(k)] = center[k] + halfwidth_sd * sd;
  }
  g.nx = g.ny = resolution;
  g.validate();
  return g;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

bool Mask::touches_border() const {
  if (nx == 0 || ny == 0) return false;
  for (std::size_t ix = 0; ix < nx; ++ix)
    if (at(ix, 0) || at(ix, ny - 1)) return true;
  for (std::size_t iy = 0; iy < ny; ++iy)
    if (at(0, iy) || at(nx - 1, iy)) return true;
  return false;
}

RegionEvaluator::RegionEvaluator(const RpsState& state)
    : m_(state.m()), q_(state.q()), d_(state.d()), tiebreak_(state.tiebreak()) {
  const PerturbedAggregates agg = perturbed_aggregates(state);
  for (int k = 0; k < m_; ++k) {
    offsets_.push_back(state.r_half_inv() * agg.xi[static_cast<std::size_t>(k)]);
    slopes_.push_back(state.r_half_inv() * agg.q[static_cast<std::size_t>(k)]);
  }
}

int RegionEvaluator::rank(const Vector& theta) const {
  if (theta.size() != d_) fail(ErrorKind::kShape, "theta dimension mismatch");
  double z0 = 0.0;
  int r = 1;
  for (int k = 0; k < m_; ++k) {
    const auto& off = offsets_[static_cast<std::size_t>(k)];
    const auto& slope = slopes_[static_cast<std::size_t>(k)];
    double z = 0.0;
    for (Eigen::Index j = 0; j < d_; ++j) {
      double s = off[j];
      for (Eigen::Index l = 0; l < d_; ++l) s -= slope(j, l) * theta[l];
      z += s * s;
    }
    if (k == 0) {
      z0 = z;
    } else if (z0 > z || (z0 == z && tiebreak_[0] > tiebreak_[static_cast<std::size_t>(k)])) {
      ++r;
    }
  }
  return r;
}

Mask grid_region(const RpsState& state, const Grid& grid) {
  grid.validate();
  if (state.d() != 2) fail(ErrorKind::kShape, "grid_region needs d = 2");
  const RegionEvaluator eval(state);
  Mask mask{grid.nx, grid.ny, std::vector<std::uint8_t>(grid.nx * grid.ny, 0)};
  for (std::size_t iy = 0; iy < grid.ny; ++iy)
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
      mask.cells[iy * grid.nx + ix] = eval.contains(grid.node(ix, iy)) ? 1 : 0;
  return mask;
}

Mask ellipsoid_mask(const Ellipsoid& e, const Grid& grid) {
  grid.validate();
  Mask mask{grid.nx, grid.ny, std::vector<std::uint8_t>(grid.nx * grid.ny, 0)};
  for (std::size_t iy = 0; iy < grid.ny; ++iy)
    for (std::size_t ix = 0; ix < grid.nx; ++ix)
      mask.cells[iy * grid.nx + ix] = ellipsoid_contains(e, grid.node(ix, iy)) ? 1 : 0;
  return mask;
}

double region_area(const Mask& mask, const Grid& grid) {
  if (mask.nx != grid.nx || mask.ny != grid.ny) fail(ErrorKind::kShape, "mask and grid sizes differ");
  return static_cast<double>(mask.count()) * grid.cell_area();
}

std::string mask_to_csv(const Mask& mask) {
  std::string out;
  out.reserve(mask.cells.size() * 2);
  for (std::size_t iy = 0; iy < mask.ny; ++iy) {
    for (std::size_t ix = 0; ix < mask.nx; ++ix) {
      if (ix) out += ',';
      out += mask.at(ix, iy) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  rps.validate();
  if (trials < 1) fail(ErrorKind::kParameter, "trials must be at least 1");
  if (n_list.empty()) fail(ErrorKind::kParameter, "no sample sizes given");
  for (const auto n : n_list)
    if (n < 1) fail(ErrorKind::kParameter, "sample sizes must be positive");
  if (system.input_filter.empty()) fail(ErrorKind::kParameter, "input filter is empty");
  if (system.theta_star.size() < 1) fail(ErrorKind::kParameter, "theta_star is empty");
  if (!(eoa_tol > 0.0)) fail(ErrorKind::kParameter, "eoa_tol must be positive");
  if (threads < 1) fail(ErrorKind::kParameter, "threads must be at least 1");
  if (grid_resolution < 2) fail(ErrorKind::kParameter, "grid resolution must be at least 2");
  if (!(grid_halfwidth_sd > 0.0)) fail(ErrorKind::kParameter, "grid half-width must be positive");
  if (fixed_grid) fixed_grid->validate();
  if ((areas || illustrate) && system.theta_star.size() != 2)
    fail(ErrorKind::kParameter, "areas and illustrations need a two-parameter system");
  if (probe && probe->size() != system.theta_star.size())
    fail(ErrorKind::kShape, "probe dimension does not match theta_star");
}

namespace {

const std::vector<std::string> kKnownKeys = {
    "name", "theta_star", "input_filter", "noise", "noise_mean", "noise_variance", "noise_sd", "noise_scale",
    "noise_rate", "n", "n_list", "m", "q", "coregressor", "coregressor_mean", "shaping", "shaping_matrix",
    "trials", "seed", "threads", "baselines", "eoa_tol", "areas", "illustrate", "grid_resolution",
    "grid_halfwidth_sd", "grid_lo", "grid_hi", "boundary_points", "probe_theta", "ellipsoid_masks", "dataset",
};

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

std::size_t as_count(double v, const char* key) {
  if (!(v >= 0.0) || std::floor(v) != v) fail(ErrorKind::kValidation, std::string(key) + " must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentConfig experiment_config_from(const ConfigDocument& doc) {
  for (const auto& [key, value] : doc.values())
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      fail(ErrorKind::kValidation, "unknown config key '" + key + "'");

  ExperimentConfig cfg;
  if (auto v = doc.get_string("name")) cfg.name = *v;
  if (auto v = doc.get_numbers("theta_star")) cfg.system.theta_star = to_vector(*v);
  if (auto v = doc.get_numbers("input_filter")) cfg.system.input_filter = *v;

  const std::string noise = doc.get_string("noise").value_or("laplace");
  const double mean = doc.get_number("noise_mean").value_or(0.0);
  if (noise == "gaussian") {
    double sd = 1.0;
    if (auto v = doc.get_number("noise_variance")) sd = std::sqrt(*v);
    if (auto v = doc.get_number("noise_sd")) sd = *v;
    cfg.system.noise = NoiseSpec::gaussian(mean, sd);
  } else if (noise == "laplace") {
    if (auto v = doc.get_number("noise_scale")) cfg.system.noise = NoiseSpec::laplace(mean, *v);
    else cfg.system.noise = NoiseSpec::laplace_with_variance(mean, doc.get_number("noise_variance").value_or(1.0));
  } else if (noise == "exponential") {
    if (doc.contains("noise_rate") && doc.contains("noise_scale"))
      fail(ErrorKind::kValidation, "give either noise_rate or noise_scale, not both");
    if (auto v = doc.get_number("noise_scale")) cfg.system.noise = NoiseSpec::exponential_scale(*v);
    else cfg.system.noise = NoiseSpec::exponential_rate(doc.get_number("noise_rate").value_or(0.5));
  } else {
    fail(ErrorKind::kValidation, "noise must be gaussian, laplace or exponential, got '" + noise + "'");
  }

  if (doc.contains("n") && doc.contains("n_list")) fail(ErrorKind::kValidation, "give either n or n_list, not both");
  if (auto v = doc.get_numbers(doc.contains("n_list") ? "n_list" : "n")) {
    cfg.n_list.clear();
    for (const double n : *v) cfg.n_list.push_back(as_count(n, "n"));
  }
  if (auto v = doc.get_integer("m")) cfg.rps.m = static_cast<int>(*v);
  if (auto v = doc.get_integer("q")) cfg.rps.q = static_cast<int>(*v);

  const std::string coreg = doc.get_string("coregressor").value_or("identity");
  if (coreg == "identity") cfg.rps.coregressor = Coregressor::identity();
  else if (coreg == "centered-empirical") cfg.rps.coregressor = Coregressor::centered_empirical();
  else if (coreg == "sign") cfg.rps.coregressor = Coregressor::sign();
  else if (coreg == "centered-known-mean") {
    const auto mu = doc.get_numbers("coregressor_mean");
    if (!mu) fail(ErrorKind::kValidation, "centered-known-mean needs coregressor_mean");
    cfg.rps.coregressor = Coregressor::centered_known_mean(to_vector(*mu));
  } else {
    fail(ErrorKind::kValidation, "unknown coregressor '" + coreg + "'");
  }

  const std::string shaping = doc.get_string("shaping").value_or("empirical-gram");
  if (shaping == "empirical-gram") cfg.rps.shaping = Shaping::empirical_gram();
  else if (shaping == "identity") cfg.rps.shaping = Shaping::identity();
  else if (shaping == "user") {
    const auto r = doc.get_numbers("shaping_matrix");
    const auto d = static_cast<std::size_t>(cfg.system.theta_star.size());
    if (!r || r->size() != d * d) fail(ErrorKind::kValidation, "shaping = \"user\" needs a d*d shaping_matrix (row-major)");
    cfg.rps.shaping = Shaping::user_supplied(
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            r->data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  } else {
    fail(ErrorKind::kValidation, "unknown shaping '" + shaping + "'");
  }

  if (auto v = doc.get_number("trials")) cfg.trials = as_count(*v, "trials");
  if (auto v = doc.get_number("seed")) cfg.seed = as_count(*v, "seed");
  if (auto v = doc.get_number("threads")) cfg.threads = static_cast<unsigned>(as_count(*v, "threads"));
  if (auto v = doc.get_strings("baselines")) {
    for (const auto& b : *v) {
      if (b == "sps") cfg.baselines.sps = true;
      else if (b == "asymptotic") cfg.baselines.asymptotic = true;
      else if (b == "eoa") cfg.baselines.eoa = true;
      else fail(ErrorKind::kValidation, "unknown baseline '" + b + "'");
    }
  }
  if (auto v = doc.get_number("eoa_tol")) cfg.eoa_tol = *v;
  if (auto v = doc.get_bool("areas")) cfg.areas = *v;
  if (auto v = doc.get_bool("illustrate")) cfg.illustrate = *v;
  if (auto v = doc.get_bool("ellipsoid_masks")) cfg.ellipsoid_masks = *v;
  if (auto v = doc.get_number("grid_resolution")) cfg.grid_resolution = as_count(*v, "grid_resolution");
  if (auto v = doc.get_number("grid_halfwidth_sd")) cfg.grid_halfwidth_sd = *v;
  if (doc.contains("grid_lo") != doc.contains("grid_hi")) fail(ErrorKind::kValidation, "grid_lo and grid_hi go together");
  if (auto lo = doc.get_numbers("grid_lo")) {
    const auto hi = *doc.get_numbers("grid_hi");
    if (lo->size() != 2 || hi.size() != 2) fail(ErrorKind::kValidation, "grid bounds need two entries");
    Grid g;
    g.lo = {(*lo)[0], (*lo)[1]};
    g.hi = {hi[0], hi[1]};
    g.nx = g.ny = cfg.grid_resolution;
    cfg.fixed_grid = g;
  }
  if (auto v = doc.get_number("boundary_points")) cfg.boundary_points = as_count(*v, "boundary_points");
  if (auto v = doc.get_numbers("probe_theta")) cfg.probe = to_vector(*v);
  cfg.validate();
  return cfg;
}

ConfigDocument to_document(const ExperimentConfig& cfg) {
  ConfigDocument doc;
  auto set = [&doc](const std::string& key, const std::string& text) { doc.set(key, text); };
  auto num = [](double v) { return io::format_double(v); };
  auto arr = [&num](const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
  };
  auto quoted = [](const std::string& s) { return "\"" + s + "\""; };

  set("name", quoted(cfg.name));
  set("theta_star", arr(to_std(cfg.system.theta_star)));
  set("input_filter", arr(cfg.system.input_filter));
  const auto& noise = cfg.system.noise;
  switch (noise.family()) {
    case NoiseSpec::Family::kGaussian:
      set("noise", quoted("gaussian"));
      set("noise_mean", num(noise.location()));
      set("noise_sd", num(noise.scale()));
      break;
    case NoiseSpec::Family::kLaplace:
      set("noise", quoted("laplace"));
      set("noise_mean", num(noise.location()));
      set("noise_scale", num(noise.scale()));
      break;
    case NoiseSpec::Family::kExponential:
      set("noise", quoted("exponential"));
      set("noise_scale", num(noise.scale()));
      break;
    case NoiseSpec::Family::kCustom:
      set("noise", quoted(noise.describe()));
      break;
  }
  std::vector<double> ns;
  for (const auto n : cfg.n_list) ns.push_back(static_cast<double>(n));
  set("n_list", arr(ns));
  set("m", num(cfg.rps.m));
  set("q", num(cfg.rps.q));
  switch (cfg.rps.coregressor.kind) {
    case Coregressor::Kind::kIdentity: set("coregressor", quoted("identity")); break;
    case Coregressor::Kind::kCenteredEmpirical: set("coregressor", quoted("centered-empirical")); break;
    case Coregressor::Kind::kSign: set("coregressor", quoted("sign")); break;
    case Coregressor::Kind::kCenteredKnownMean:
      set("coregressor", quoted("centered-known-mean"));
      set("coregressor_mean", arr(to_std(cfg.rps.coregressor.mean)));
      break;
    case Coregressor::Kind::kUser: set("coregressor", quoted("user")); break;
  }
  switch (cfg.rps.shaping.kind) {
    case Shaping::Kind::kIdentity: set("shaping", quoted("identity")); break;
    case Shaping::Kind::kEmpiricalGram: set("shaping", quoted("empirical-gram")); break;
    case Shaping::Kind::kUser: {
      set("shaping", quoted("user"));
      std::vector<double> r;
      for (Eigen::Index i = 0; i < cfg.rps.shaping.user.rows(); ++i)
        for (Eigen::Index j = 0; j < cfg.rps.shaping.user.cols(); ++j) r.push_back(cfg.rps.shaping.user(i, j));
      set("shaping_matrix", arr(r));
      break;
    }
  }
  set("trials", num(static_cast<double>(cfg.trials)));
  set("seed", std::to_string(cfg.seed));
  std::string baselines = "[";
  auto add = [&baselines](const char* b) { baselines += std::string(baselines.size() > 1 ? ", " : "") + "\"" + b + "\""; };
  if (cfg.baselines.sps) add("sps");
  if (cfg.baselines.asymptotic) add("asymptotic");
  if (cfg.baselines.eoa) add("eoa");
  set("baselines", baselines + "]");
  set("eoa_tol", num(cfg.eoa_tol));
  set("areas", cfg.areas ? "true" : "false");
  set("illustrate", cfg.illustrate ? "true" : "false");
  set("ellipsoid_masks", cfg.ellipsoid_masks ? "true" : "false");
  set("grid_resolution", num(static_cast<double>(cfg.grid_resolution)));
  set("grid_halfwidth_sd", num(cfg.grid_halfwidth_sd));
  if (cfg.fixed_grid) {
    set("grid_lo", arr({cfg.fixed_grid->lo[0], cfg.fixed_grid->lo[1]}));
    set("grid_hi", arr({cfg.fixed_grid->hi[0], cfg.fixed_grid->hi[1]}));
  }
  set("boundary_points", num(static_cast<double>(cfg.boundary_points)));
  if (cfg.probe) set("probe_theta", arr(to_std(*cfg.probe)));
  // threads is deliberately left out: it never changes results.
  return doc;
}

// ---------------------------------------------------------------------------
// Statistics

double MethodStats::coverage() const {
  return trials ? static_cast<double>(covered) / static_cast<double>(trials) : kNaN;
}

double MethodStats::coverage_stderr() const {
  if (!trials) return kNaN;
  const double p = coverage();
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double MethodStats::probe_inclusion() const {
  return trials ? static_cast<double>(probe_covered) / static_cast<double>(trials) : kNaN;
}

double MethodStats::mean_area() const {
  if (areas.empty()) return kNaN;
  return std::accumulate(areas.begin(), areas.end(), 0.0) / static_cast<double>(areas.size());
}

double MethodStats::area_stderr() const {
  if (areas.size() < 2) return kNaN;
  const double mu = mean_area();
  double ss = 0.0;
  for (const double a : areas) ss += (a - mu) * (a - mu);
  return std::sqrt(ss / static_cast<double>(areas.size() - 1) / static_cast<double>(areas.size()));
}

const MethodStats& ExperimentReport::find(const std::string& method, std::size_t n) const {
  for (const auto& s : methods)
    if (s.method == method && s.n == n) return s;
  fail(ErrorKind::kParameter, "report has no method '" + method + "' at n=" + std::to_string(n));
}

// ---------------------------------------------------------------------------
// Coverage study

namespace {

struct Outcome {
  bool ok = false;
  bool covered = false;
  bool probe = false;
  bool infinite = false;
  bool border = false;
  int rank = 0;
  double area = kNaN;
};

bool is_numerical(const Error& e) {
  return e.kind() == ErrorKind::kConditioning || e.kind() == ErrorKind::kNotPsd ||
         e.kind() == ErrorKind::kDegreesOfFreedom;
}

std::vector<std::string> method_names(const ExperimentConfig& cfg) {
  std::vector<std::string> names{"rps"};
  if (cfg.baselines.eoa) names.push_back("rps-eoa");
  if (cfg.baselines.sps) names.push_back("sps");
  if (cfg.baselines.sps && cfg.baselines.eoa) names.push_back("sps-eoa");
  if (cfg.baselines.asymptotic) names.push_back("asymptotic");
  return names;
}

std::uint64_t trial_seed(std::uint64_t master, Stream stream, std::size_t n, std::size_t trial) {
  return derive_seed(derive_seed(master, stream, n), stream, trial);
}

}  // namespace

ExperimentReport coverage_study(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto names = method_names(config);
  const bool ellipsoid_masks = config.illustrate && config.ellipsoid_masks;

  ExperimentReport report;
  report.name = config.name;
  report.seed = config.seed;
  report.config_text = to_document(config).to_text();
  report.config_hash = fnv1a64(report.config_text);
  report.boundary_points = config.boundary_points;

  for (const std::size_t n : config.n_list) {
    std::vector<std::vector<Outcome>> outcomes(config.trials, std::vector<Outcome>(names.size()));
    std::optional<Illustration> illustration;
    std::mutex illustration_mutex;

    auto run_trial = [&](std::size_t k) {
      auto& out = outcomes[k];
      const bool illustrate = config.illustrate && k == 0;
      auto data = std::make_shared<const RegressionDataset>(
          simulate_fir(config.system, n, trial_seed(config.seed, Stream::kTrialData, n, k)));
      RpsConfig rcfg = config.rps;
      rcfg.seed = trial_seed(config.seed, Stream::kTrialState, n, k);
      const Vector& theta_star = config.system.theta_star;

      std::optional<Grid> grid;
      if (config.areas || illustrate) {
        try {
          grid = config.fixed_grid ? *config.fixed_grid
                                   : default_grid(*data, config.grid_halfwidth_sd, config.grid_resolution);
        } catch (const Error& e) {
          if (!is_numerical(e)) throw;
        }
      }
      Illustration ill;
      if (illustrate && grid) {
        ill.n = n;
        ill.grid = *grid;
      }

      auto record_mask = [&](Outcome& o, const std::string& name, Mask mask) {
        if (config.areas) {
          o.area = region_area(mask, *grid);
          o.border = mask.touches_border();
        }
        if (illustrate) ill.masks.emplace_back(name, std::move(mask));
      };

      auto run_indicator = [&](std::size_t slot, bool sps, std::optional<RpsState>& keep) {
        Outcome& o = out[slot];
        try {
          keep = sps ? RpsState::initialize_sps(rcfg, data) : RpsState::initialize(rcfg, data);
          o.rank = rps::rank(theta_star, *keep);
          o.covered = o.rank <= rcfg.m - rcfg.q;
          if (config.probe) o.probe = indicator(*config.probe, *keep);
          if ((config.areas || illustrate) && !grid) fail(ErrorKind::kConditioning, "no grid for this realization");
          if (config.areas || illustrate) record_mask(o, names[slot], grid_region(*keep, *grid));
          o.ok = true;
        } catch (const Error& e) {
          if (!is_numerical(e)) throw;
          keep.reset();
        }
      };

      auto run_ellipsoid = [&](std::size_t slot, const std::function<Ellipsoid(Outcome&)>& build) {
        Outcome& o = out[slot];
        try {
          const Ellipsoid e = build(o);
          o.covered = ellipsoid_contains(e, theta_star);
          if (config.probe) o.probe = ellipsoid_contains(e, *config.probe);
          if (config.areas) {
            o.area = ellipse_area(e);
            if (grid && !e.unbounded()) o.border = ellipsoid_mask(e, *grid).touches_border();
          }
          if (illustrate && grid) {
            if (ellipsoid_masks) ill.masks.emplace_back(names[slot], ellipsoid_mask(e, *grid));
            ill.ellipsoids.emplace_back(names[slot], e);
          }
          o.ok = true;
        } catch (const Error& e) {
          if (!is_numerical(e)) throw;
        }
      };

      std::size_t slot = 0;
      std::optional<RpsState> rps_state;
      run_indicator(slot++, false, rps_state);
      if (config.baselines.eoa) {
        run_ellipsoid(slot++, [&](Outcome& o) {
          if (!rps_state) fail(ErrorKind::kConditioning, "no RPS state");
          const auto oa = outer_approximation(*rps_state, config.eoa_tol);
          o.infinite = oa.ellipsoid.unbounded();
          return oa.ellipsoid;
        });
      }
      if (config.baselines.sps) {
        std::optional<RpsState> sps_state;
        run_indicator(slot++, true, sps_state);
        if (config.baselines.eoa) {
          run_ellipsoid(slot++, [&](Outcome& o) {
            if (!sps_state) fail(ErrorKind::kConditioning, "no SPS state");
            const auto oa = outer_approximation(*sps_state, config.eoa_tol);
            o.infinite = oa.ellipsoid.unbounded();
            return oa.ellipsoid;
          });
        }
      }
      if (config.baselines.asymptotic) {
        run_ellipsoid(slot++, [&](Outcome&) { return asymptotic_ellipsoid(*data, config.rps.p()); });
      }

      if (illustrate && grid) {
        std::lock_guard lock(illustration_mutex);
        illustration = std::move(ill);
      }
    };

    // Work pool: trials are claimed from an atomic counter; each writes only
    // its own slot, so the aggregate is independent of scheduling.
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (true) {
        const std::size_t k = next.fetch_add(1);
        if (k >= config.trials) return;
        try {
          run_trial(k);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = config.trials;
        }
      }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.trials)));
    if (workers == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (std::size_t s = 0; s < names.size(); ++s) {
      MethodStats stats;
      stats.method = names[s];
      stats.n = n;
      const bool indicator_method = names[s] == "rps" || names[s] == "sps";
      if (indicator_method) stats.rank_histogram.assign(static_cast<std::size_t>(config.rps.m), 0);
      for (const auto& trial : outcomes) {
        const Outcome& o = trial[s];
        if (!o.ok) {
          ++stats.failed;
          continue;
        }
        ++stats.trials;
        stats.covered += o.covered;
        stats.probe_covered += o.probe;
        stats.infinite_radius += o.infinite;
        stats.border_hits += o.border;
        if (indicator_method) ++stats.rank_histogram[static_cast<std::size_t>(o.rank - 1)];
        if (config.areas) stats.areas.push_back(o.area);
      }
      report.methods.push_back(std::move(stats));
    }
    if (illustration) report.illustrations.push_back(std::move(*illustration));
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<double> ExperimentReport::paired_area_difference(const std::string& a, const std::string& b,
                                                             std::size_t n) const {
  const auto& sa = find(a, n);
  const auto& sb = find(b, n);
  if (sa.failed || sb.failed || sa.areas.size() != sb.areas.size())
    fail(ErrorKind::kParameter, "paired comparison needs both methods to succeed on every trial");
  std::vector<double> diff(sa.areas.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = sa.areas[i] - sb.areas[i];
  return diff;
}

// ---------------------------------------------------------------------------
// Reproductions

ExperimentConfig fig1_config(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.name = "fig1";
  cfg.system = fir_benchmark(NoiseSpec::laplace_with_variance(0.0, 1.0));
  cfg.n_list = {250};
  cfg.rps.m = 10;
  cfg.rps.q = 1;
  cfg.rps.coregressor = Coregressor::identity();
  cfg.rps.shaping = Shaping::empirical_gram();
  cfg.baselines = {true, true, true};
  cfg.trials = 100;
  cfg.seed = seed;
  cfg.areas = true;
  cfg.illustrate = true;
  cfg.ellipsoid_masks = true;
  cfg.grid_resolution = 200;
  cfg.grid_halfwidth_sd = 6.0;
  return cfg;
}

ExperimentConfig fig2_config(std::uint64_t seed) {
  ExperimentConfig cfg = fig1_config(seed);
  cfg.name = "fig2";
  cfg.system = fir_benchmark(NoiseSpec::exponential_rate(0.5));
  cfg.n_list = {200, 1000, 2000};
  cfg.baselines = {false, true, false};
  cfg.ellipsoid_masks = false;
  return cfg;
}

ExperimentReport experiment_fig1(std::uint64_t seed) { return coverage_study(fig1_config(seed)); }
ExperimentReport experiment_fig2(std::uint64_t seed) { return coverage_study(fig2_config(seed)); }

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

std::string artifact_stem(const std::string& kind, const std::string& method, std::size_t n) {
  return kind + "_" + method + "_n" + std::to_string(n) + ".csv";
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string report_to_json(const ExperimentReport& report, bool include_runtime) {
  json j;
  j["format"] = "rps-report/1";
  j["name"] = report.name;
  j["seed"] = report.seed;
  j["config_hash"] = hex64(report.config_hash);
  j["config"] = report.config_text;
  if (include_runtime) j["metadata"] = {{"runtime_seconds", report.runtime_seconds}};

  json methods = json::array();
  for (const auto& s : report.methods) {
    json m = {{"method", s.method},
              {"n", s.n},
              {"trials", s.trials},
              {"failed", s.failed},
              {"covered", s.covered},
              {"coverage", number(s.coverage())},
              {"stderr", number(s.coverage_stderr())},
              {"probe_inclusion", number(s.probe_inclusion())},
              {"infinite_radius", s.infinite_radius},
              {"border_hits", s.border_hits},
              {"mean_area", number(s.mean_area())},
              {"area_stderr", number(s.area_stderr())}};
    if (!s.rank_histogram.empty()) m["rank_histogram"] = s.rank_histogram;
    json areas = json::array();
    for (const double a : s.areas) areas.push_back(number(a));
    m["areas"] = std::move(areas);
    methods.push_back(std::move(m));
  }
  j["methods"] = std::move(methods);

  json ills = json::array();
  for (const auto& ill : report.illustrations) {
    json regions = json::array();
    for (const auto& [method, mask] : ill.masks)
      regions.push_back({{"method", method},
                         {"cells", mask.count()},
                         {"area", region_area(mask, ill.grid)},
                         {"mask_file", artifact_stem("mask", method, ill.n)}});
    json ellipsoids = json::array();
    for (const auto& [method, e] : ill.ellipsoids) {
      json ej = json::parse(ellipsoid_to_json(e));
      ej["method"] = method;
      ej["area"] = number(ellipse_area(e));
      if (!e.unbounded()) ej["boundary_file"] = artifact_stem("boundary", method, ill.n);
      ellipsoids.push_back(std::move(ej));
    }
    ills.push_back({{"n", ill.n},
                    {"grid",
                     {{"lo", ill.grid.lo}, {"hi", ill.grid.hi}, {"nx", ill.grid.nx}, {"ny", ill.grid.ny}}},
                    {"regions", std::move(regions)},
                    {"ellipsoids", std::move(ellipsoids)}});
  }
  j["illustrations"] = std::move(ills);
  return j.dump(1) + "\n";
}

std::string report_summary_csv(const ExperimentReport& report) {
  std::string out = "method,n,trials,coverage,stderr,mean_area,area_stderr\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : io::format_double(v); };
  for (const auto& s : report.methods) {
    out += s.method + "," + std::to_string(s.n) + "," + std::to_string(s.trials) + "," + cell(s.coverage()) + "," +
           cell(s.coverage_stderr()) + "," + cell(s.mean_area()) + "," + cell(s.area_stderr()) + "\n";
  }
  return out;
}

std::vector<std::string> write_report_artifacts(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (fs::path(dir) / name).string();
    io::write_file_atomic(path, content);
    written.push_back(path);
  };
  emit("report.json", report_to_json(report));
  emit("summary.csv", report_summary_csv(report));
  for (const auto& ill : report.illustrations) {
    for (const auto& [method, mask] : ill.masks) emit(artifact_stem("mask", method, ill.n), mask_to_csv(mask));
    for (const auto& [method, e] : ill.ellipsoids)
      if (!e.unbounded()) emit(artifact_stem("boundary", method, ill.n), ellipse_boundary_csv(e, report.boundary_points));
  }
  return written;
}

}  // namespace rps
