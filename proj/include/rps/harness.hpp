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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rps/config.hpp"
#include "rps/eoa.hpp"
#include "rps/model.hpp"
#include "rps/perturbed_sums.hpp"

namespace rps {

// ---------------------------------------------------------------------------
// Grids

/// Cell-centred nx x ny grid over [lo, hi]; node (ix, iy) sits at
/// lo + (i + 1/2) * (hi - lo) / resolution along each axis.
struct Grid {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
  std::size_t nx = 2;
  std::size_t ny = 2;

  void validate() const;
  double cell_area() const;
  Vector node(std::size_t ix, std::size_t iy) const;
};

/// theta_hat +- halfwidth * (asymptotic standard deviation) per axis.
Grid default_grid(const RegressionDataset& data, double halfwidth_sd, std::size_t resolution);

/// Row-major boolean mask: cell (ix, iy) lives at iy * nx + ix.
struct Mask {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint8_t> cells;

  std::size_t count() const;
  bool at(std::size_t ix, std::size_t iy) const { return cells[iy * nx + ix] != 0; }
  /// True if any cell on the outer ring is set.
  bool touches_border() const;
};

/// Rank and indicator evaluation through the affine form
/// S_k(theta) = R^{-1/2} xi_k - R^{-1/2} Q_k theta, precomputed once per
/// state. Agrees with rank()/indicator() up to floating-point rounding of
/// the sums; used for dense grid queries.
class RegionEvaluator {
 public:
  explicit RegionEvaluator(const RpsState& state);

  int rank(const Vector& theta) const;
  bool contains(const Vector& theta) const { return rank(theta) <= m_ - q_; }

 private:
  int m_;
  int q_;
  Eigen::Index d_;
  std::vector<Vector> offsets_;  // R^{-1/2} xi_k
  std::vector<Matrix> slopes_;   // R^{-1/2} Q_k
  std::vector<std::uint32_t> tiebreak_;
};

/// Indicator of the state's region at every grid node.
Mask grid_region(const RpsState& state, const Grid& grid);
Mask ellipsoid_mask(const Ellipsoid& e, const Grid& grid);
/// count(true) * cell area.
double region_area(const Mask& mask, const Grid& grid);
/// Rows iy = 0..ny-1, comma-separated 0/1 cells.
std::string mask_to_csv(const Mask& mask);

// ---------------------------------------------------------------------------
// Experiments

struct Baselines {
  bool sps = false;
  bool asymptotic = false;
  bool eoa = false;
};

struct ExperimentConfig {
  std::string name = "custom";
  TrueSystem system = fir_benchmark(NoiseSpec::laplace_with_variance(0.0, 1.0));
  std::vector<std::size_t> n_list{250};
  RpsConfig rps;
  Baselines baselines;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double eoa_tol = 1e-10;
  /// Grid areas of every region per trial (indicator regions on a grid,
  /// ellipsoids in closed form).
  bool areas = false;
  /// Keep grid masks of the first trial per n.
  bool illustrate = false;
  /// Also rasterize the ellipsoidal regions in the illustration.
  bool ellipsoid_masks = false;
  std::size_t grid_resolution = 200;
  double grid_halfwidth_sd = 4.0;
  std::optional<Grid> fixed_grid;
  std::size_t boundary_points = 256;
  /// Extra parameter whose inclusion frequency is reported.
  std::optional<Vector> probe;

  void validate() const;
};

/// Builds a config from a flat key-value document; unknown keys are
/// rejected. The names are listed in README.md.
ExperimentConfig experiment_config_from(const ConfigDocument& doc);
ConfigDocument to_document(const ExperimentConfig& config);

struct MethodStats {
  std::string method;  // rps, sps, rps-eoa, sps-eoa, asymptotic
  std::size_t n = 0;
  std::size_t trials = 0;  // successful trials (coverage denominator)
  std::size_t failed = 0;  // conditioning failures, excluded
  std::size_t covered = 0;
  std::size_t probe_covered = 0;
  std::size_t infinite_radius = 0;
  std::size_t border_hits = 0;
  std::vector<std::size_t> rank_histogram;  // rank 1..m of theta*, indicator methods
  std::vector<double> areas;                // per successful trial when areas are on

  double coverage() const;
  double coverage_stderr() const;
  double probe_inclusion() const;
  double mean_area() const;
  double area_stderr() const;
};

struct Illustration {
  std::size_t n = 0;
  Grid grid;
  std::vector<std::pair<std::string, Mask>> masks;
  std::vector<std::pair<std::string, Ellipsoid>> ellipsoids;
};

struct ExperimentReport {
  std::string name;
  std::string config_text;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double runtime_seconds = 0.0;
  std::size_t boundary_points = 256;
  std::vector<MethodStats> methods;
  std::vector<Illustration> illustrations;

  const MethodStats& find(const std::string& method, std::size_t n) const;
  /// Paired per-trial area differences area(a) - area(b) at sample size n.
  std::vector<double> paired_area_difference(const std::string& a, const std::string& b, std::size_t n) const;
};

/// Fresh dataset and fresh state per trial; streams derived from
/// (seed, n, trial index), so the outcome does not depend on `threads`.
ExperimentReport coverage_study(const ExperimentConfig& config);

ExperimentConfig fig1_config(std::uint64_t seed);
ExperimentConfig fig2_config(std::uint64_t seed);
/// Laplace-noise comparison at n = 250 of the RPS indicator, RPS EOA, SPS
/// indicator, SPS EOA and the asymptotic ellipsoid.
ExperimentReport experiment_fig1(std::uint64_t seed);
/// Exponential-noise RPS indicator against the asymptotic ellipsoid at
/// n = 200, 1000, 2000.
ExperimentReport experiment_fig2(std::uint64_t seed);

/// Full report. `include_runtime` = false drops the only nondeterministic
/// field.
std::string report_to_json(const ExperimentReport& report, bool include_runtime = true);
/// `method,n,trials,coverage,stderr,mean_area,area_stderr`, one row per method and n.
std::string report_summary_csv(const ExperimentReport& report);
/// report.json, summary.csv, mask_<method>_n<n>.csv and
/// boundary_<method>_n<n>.csv under `dir`. Returns the written paths.
std::vector<std::string> write_report_artifacts(const ExperimentReport& report, const std::string& dir);

std::uint64_t fnv1a64(std::string_view text) noexcept;

}  // namespace rps
