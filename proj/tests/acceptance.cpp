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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.
//
// usage: rps_acceptance <path-to-rps-cli> <scratch-dir>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lmi_oracle.hpp"
#include "rps/eoa.hpp"
#include "rps/harness.hpp"
#include "rps/io.hpp"
#include "rps/perturbed_sums.hpp"
#include "rps/rng.hpp"

namespace {

using namespace rps;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct NoiseCase {
  const char* label;
  NoiseSpec noise;
};

std::vector<NoiseCase> noise_cases() {
  return {{"gaussian", NoiseSpec::gaussian(0.0, 1.0)},
          {"laplace", NoiseSpec::laplace_with_variance(0.0, 1.0)},
          {"exponential", NoiseSpec::exponential_rate(0.5)}};
}

ExperimentConfig small_sample_study(const NoiseSpec& noise, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.name = "small-sample";
  cfg.system = fir_benchmark(noise);
  cfg.n_list = {25};
  cfg.trials = 10000;
  cfg.seed = seed;
  cfg.baselines.eoa = true;
  return cfg;
}

// Shared by criteria 1, 2 and 6.
std::vector<ExperimentReport> small_sample_reports() {
  std::vector<ExperimentReport> out;
  std::uint64_t k = 0;
  for (const auto& c : noise_cases()) out.push_back(coverage_study(small_sample_study(c.noise, derive_seed(kSeed, Stream::kTrialData, ++k))));
  return out;
}

Outcome exact_coverage(const std::vector<ExperimentReport>& reports, double seconds) {
  bool pass = true;
  std::string detail;
  const auto cases = noise_cases();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& s = reports[i].find("rps", 25);
    const double cov = s.coverage();
    pass &= s.trials == 10000 && std::abs(cov - 0.9) <= 0.009;
    detail += std::string(cases[i].label) + "=" + fmt(cov) + " ";
  }
  pass &= seconds < 120.0;
  return {pass, detail + "(target 0.900 +- 0.009, " + fmt(seconds, 1) + " s)"};
}

Outcome rank_uniformity(const std::vector<ExperimentReport>& reports) {
  bool pass = true;
  std::string detail;
  const auto cases = noise_cases();
  const boost::math::chi_squared_distribution<double> dist(9);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& s = reports[i].find("rps", 25);
    const double expected = static_cast<double>(s.trials) / 10.0;
    double chi2 = 0.0;
    for (std::size_t h : s.rank_histogram) chi2 += (h - expected) * (h - expected) / expected;
    const double p = boost::math::cdf(boost::math::complement(dist, chi2));
    pass &= s.rank_histogram.size() == 10 && p >= 0.01;
    detail += std::string(cases[i].label) + " chi2=" + fmt(chi2, 2) + " p=" + fmt(p, 3) + " ";
  }
  return {pass, detail + "(level 0.01)"};
}

Outcome consistency() {
  ExperimentConfig cfg;
  cfg.name = "consistency";
  cfg.system = fir_benchmark(NoiseSpec::laplace_with_variance(0.0, 1.0));
  cfg.n_list = {200, 1000, 2000};
  cfg.trials = 1000;
  cfg.seed = derive_seed(kSeed, Stream::kTrialData, 10);
  Vector probe = cfg.system.theta_star;
  probe[0] += 1.0;
  cfg.probe = probe;
  const auto report = coverage_study(cfg);
  std::vector<double> excl;
  std::string detail;
  for (std::size_t n : cfg.n_list) {
    const auto& s = report.find("rps", n);
    excl.push_back(1.0 - s.probe_inclusion());
    detail += "n=" + std::to_string(n) + ":" + fmt(excl.back()) + " ";
  }
  bool pass = excl.back() > 0.99;
  for (std::size_t k = 0; k + 1 < excl.size(); ++k) {
    const double var = (excl[k] * (1 - excl[k]) + excl[k + 1] * (1 - excl[k + 1])) / 1000.0;
    pass &= excl[k + 1] >= excl[k] - 3.0 * std::sqrt(var);
  }
  return {pass, detail + "(exclusion of theta* + [1,0])"};
}

Outcome lmi_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(derive_seed(kSeed, Stream::kTrialState, 4));
  double worst = 0.0;
  bool pass = true;
  for (int k = 0; k < 50; ++k) {
    const auto p = test::random_lmi_problem(gen);
    const auto sol = solve_lmi(p, 1e-10);
    const auto oracle = test::lmi_grid_oracle(p);
    pass &= sol.status == LmiStatus::kOptimal;
    worst = std::max(worst, std::abs(sol.gamma - oracle.gamma));
  }
  const double secs = seconds_since(t0);
  pass &= worst <= 1e-2 && secs < 10.0;
  return {pass, "max |gamma - oracle| = " + fmt(worst, 6) + " over 50 instances, " + fmt(secs, 2) + " s"};
}

Outcome outer_containment() {
  const auto system = fir_benchmark(NoiseSpec::laplace_with_variance(0.0, 1.0));
  std::size_t violations = 0;
  std::size_t inside_nodes = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto data = std::make_shared<const RegressionDataset>(
        simulate_fir(system, 250, derive_seed(kSeed, Stream::kTrialData, 500 + k)));
    RpsConfig rc;
    rc.seed = derive_seed(kSeed, Stream::kTrialState, 500 + k);
    const auto state = RpsState::initialize(rc, data);
    const auto eoa = outer_approximation(state);
    const Grid grid = default_grid(*data, 6.0, 200);
    const Mask mask = grid_region(state, grid);
    for (std::size_t iy = 0; iy < grid.ny; ++iy)
      for (std::size_t ix = 0; ix < grid.nx; ++ix) {
        if (!mask.at(ix, iy)) continue;
        ++inside_nodes;
        violations += !ellipsoid_contains(eoa.ellipsoid, grid.node(ix, iy));
      }
  }
  return {violations == 0 && inside_nodes > 0,
          std::to_string(violations) + " violations among " + std::to_string(inside_nodes) +
              " region nodes on 100 grids of 200x200"};
}

Outcome eoa_coverage(const std::vector<ExperimentReport>& reports) {
  bool pass = true;
  std::string detail;
  const auto cases = noise_cases();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const double cov = reports[i].find("rps-eoa", 25).coverage();
    pass &= cov >= 0.891;
    detail += std::string(cases[i].label) + "(n=25)=" + fmt(cov) + " ";
  }
  ExperimentConfig cfg = small_sample_study(NoiseSpec::laplace_with_variance(0.0, 1.0),
                                            derive_seed(kSeed, Stream::kTrialData, 20));
  cfg.n_list = {250};
  const double cov = coverage_study(cfg).find("rps-eoa", 250).coverage();
  pass &= cov >= 0.891;
  detail += "laplace(n=250)=" + fmt(cov) + " ";
  return {pass, detail + "(10000 trials each, threshold 0.891)"};
}

Outcome fig1_areas(const ExperimentReport& report) {
  const auto diff = report.paired_area_difference("rps", "sps", 250);
  const double n = static_cast<double>(diff.size());
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : diff) ss += (d - mean) * (d - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  const double rps_area = report.find("rps", 250).mean_area();
  const double sps_area = report.find("sps", 250).mean_area();
  const bool pass = diff.size() == 100 && rps_area < sps_area && -mean > 2.0 * se;
  return {pass, "mean area rps=" + fmt(rps_area, 5) + " sps=" + fmt(sps_area, 5) + ", paired diff " +
                    fmt(mean, 5) + " (se " + fmt(se, 5) + ", need diff < -2 se)"};
}

Outcome fig2_areas(const ExperimentReport& report) {
  std::vector<double> areas;
  std::string detail;
  for (std::size_t n : {200u, 1000u, 2000u}) {
    const auto& s = report.find("rps", n);
    areas.push_back(s.mean_area());
    detail += "n=" + std::to_string(n) + ":" + fmt(areas.back(), 5) + " ";
  }
  const bool pass = areas[0] > areas[1] && areas[1] > areas[2];
  return {pass, detail + "(mean RPS area, 100 seeds each)"};
}

std::string strip_runtime(const std::string& report_json) {
  auto j = nlohmann::json::parse(report_json);
  j.erase("metadata");
  return j.dump();
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
  std::vector<fs::path> dirs{scratch / "det_a", scratch / "det_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    const std::string cmd = "\"" + cli + "\" experiment --name fig1 --seed 42 --out \"" + d.string() + "\" > \"" +
                            (scratch / (d.filename().string() + ".stdout")).string() + "\" 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "CLI run failed: " + cmd};
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    const auto other = dirs[1] / name;
    if (!fs::exists(other)) return {false, "missing " + other.string()};
    std::string a = io::read_file(entry.path().string());
    std::string b = io::read_file(other.string());
    if (name == "report.json") {
      a = strip_runtime(a);
      b = strip_runtime(b);
    }
    if (a != b) return {false, name.string() + " differs between runs"};
    ++compared;
  }
  std::size_t masks = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) masks += entry.path().filename().string().rfind("mask_", 0) == 0;
  const bool stdout_same = io::read_file((scratch / "det_a.stdout").string()) == io::read_file((scratch / "det_b.stdout").string());
  for (const auto& d : dirs) fs::remove_all(d);
  return {masks > 0 && stdout_same,
          std::to_string(compared) + " artifacts identical (" + std::to_string(masks) +
              " masks; report compared without runtime metadata)"};
}

void print(int id, const char* title, const Outcome& o, bool& all) {
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << o.detail << std::endl;
  all &= o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: rps_acceptance <rps-cli> <scratch-dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);
  bool all = true;

  const auto t0 = Clock::now();
  const auto reports = small_sample_reports();
  const double small_secs = seconds_since(t0);
  print(1, "exact coverage", exact_coverage(reports, small_secs), all);
  print(2, "rank uniformity", rank_uniformity(reports), all);
  print(3, "consistency", consistency(), all);
  print(4, "LMI oracle", lmi_oracle(), all);
  print(5, "outer containment", outer_containment(), all);
  print(6, "EOA coverage", eoa_coverage(reports), all);
  print(7, "first figure areas", fig1_areas(experiment_fig1(kSeed)), all);
  print(8, "second figure areas", fig2_areas(experiment_fig2(kSeed)), all);
  print(9, "determinism", determinism(cli, scratch), all);
  return all ? 0 : 1;
}
