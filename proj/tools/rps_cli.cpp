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

// Command-line front end. Talks to the library through the C API only.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rps/rps_c.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct Failure {
  int code;
  std::string message;
};

void check(rps_status status, const std::string& what) {
  if (status == RPS_OK) return;
  const int code = rps_status_is_numerical(status) ? kExitNumerical : kExitUsage;
  throw Failure{code, what + ": " + rps_status_name(status) + ": " + rps_last_error()};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Config = Handle<rps_config, rps_config_free>;
using Dataset = Handle<rps_dataset, rps_dataset_free>;
using State = Handle<rps_state, rps_state_free>;
using Ellipsoid = Handle<rps_ellipsoid, rps_ellipsoid_free>;
using Mask = Handle<rps_mask, rps_mask_free>;
using Report = Handle<rps_report, rps_report_free>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { rps_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Failure{kExitUsage, "cannot write " + tmp.string()};
    f << content;
    if (!f.flush()) throw Failure{kExitUsage, "cannot write " + tmp.string()};
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Failure{kExitUsage, "cannot rename onto " + path + ": " + ec.message()};
}

// Options shared by the subcommands.
struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<unsigned> threads;
  std::optional<std::size_t> trials;
  std::vector<double> theta;
  std::string name;
  std::string method = "rps";
  std::size_t resolution = 200;
  double halfwidth = 4.0;
  double tol = 1e-10;
};

void add_config(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Config file (flat key = value text)");
}
void add_seed(CLI::App* sub, Common& c, const std::string& what = "Master seed (overrides the config)") {
  sub->add_option("--seed", c.seed, what);
}
void add_format(CLI::App* sub, Common& c, const std::string& what) {
  sub->add_option("--format", c.format, what)->check(CLI::IsMember({"json", "csv"}));
}
void add_method(CLI::App* sub, Common& c) {
  sub->add_option("--method", c.method, "Region construction: rps or sps")
      ->check(CLI::IsMember({"rps", "sps"}))
      ->capture_default_str();
}

std::string to_text(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void load_config(const Common& c, Config& cfg) {
  if (c.config_path.empty()) check(rps_config_new(cfg.out()), "config");
  else check(rps_config_load(c.config_path.c_str(), cfg.out()), "config " + c.config_path);
  if (c.seed) check(rps_config_set(cfg.get(), "seed", std::to_string(*c.seed).c_str()), "--seed");
  if (c.trials) check(rps_config_set(cfg.get(), "trials", std::to_string(*c.trials).c_str()), "--trials");
  if (c.threads) check(rps_config_set(cfg.get(), "threads", std::to_string(*c.threads).c_str()), "--threads");
  check(rps_config_validate(cfg.get()), "config");
}

std::uint64_t effective_seed(const Common& c, const Config& cfg) {
  if (c.seed) return *c.seed;
  OwnedString text;
  check(rps_config_to_text(cfg.get(), &text.ptr), "config");
  std::istringstream in(text.str());
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("seed", 0) != 0) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(0, eq).find_first_not_of(" \t", 4) != std::string::npos) continue;
    return std::stoull(line.substr(eq + 1));
  }
  return 0;
}

void build_state(const Common& c, const Config& cfg, Dataset& data, State& state) {
  const std::uint64_t seed = effective_seed(c, cfg);
  check(rps_dataset_for_config(cfg.get(), seed, data.out()), "dataset");
  check(rps_state_new(cfg.get(), data.get(), seed, c.method == "sps", state.out()), "state");
}

int cmd_simulate(const Common& c) {
  Config cfg;
  load_config(c, cfg);
  Dataset data;
  check(rps_dataset_simulate(cfg.get(), 0, effective_seed(c, cfg), data.out()), "simulate");
  if (c.format == "json") check(rps_dataset_save_json(data.get(), c.out.c_str()), "write " + c.out);
  else check(rps_dataset_save_csv(data.get(), c.out.c_str()), "write " + c.out);
  std::cout << "n=" << rps_dataset_n(data.get()) << " d=" << rps_dataset_d(data.get()) << " -> " << c.out << "\n";
  return kExitOk;
}

int cmd_indicator(const Common& c) {
  Config cfg;
  load_config(c, cfg);
  Dataset data;
  State state;
  build_state(c, cfg, data, state);
  int rank = 0;
  int inside = 0;
  check(rps_state_rank(state.get(), c.theta.data(), c.theta.size(), &rank), "rank");
  check(rps_state_indicator(state.get(), c.theta.data(), c.theta.size(), &inside), "indicator");
  std::string text;
  if (c.format == "json") {
    text = "{\"indicator\": " + std::to_string(inside) + ", \"rank\": " + std::to_string(rank) +
           ", \"m\": " + std::to_string(rps_state_m(state.get())) + ", \"q\": " + std::to_string(rps_state_q(state.get())) +
           "}\n";
  } else if (c.format == "csv") {
    text = "indicator,rank,m,q\n" + std::to_string(inside) + "," + std::to_string(rank) + "," +
           std::to_string(rps_state_m(state.get())) + "," + std::to_string(rps_state_q(state.get())) + "\n";
  } else {
    text = std::to_string(inside) + " rank=" + std::to_string(rank) + "\n";
  }
  if (c.out.empty()) std::cout << text;
  else write_atomic(c.out, text);
  return kExitOk;
}

int cmd_region_grid(const Common& c) {
  Config cfg;
  load_config(c, cfg);
  Dataset data;
  State state;
  build_state(c, cfg, data, state);
  double lo[2];
  double hi[2];
  check(rps_default_grid(data.get(), c.halfwidth, lo, hi), "grid");
  Mask mask;
  check(rps_grid_region(state.get(), lo, hi, c.resolution, c.resolution, mask.out()), "region");
  if (!c.out.empty()) {
    if (c.format == "json") check(rps_mask_save_json(mask.get(), c.out.c_str()), "write " + c.out);
    else check(rps_mask_save_csv(mask.get(), c.out.c_str()), "write " + c.out);
  }
  std::cout << "cells=" << rps_mask_count(mask.get()) << " area=" << to_text(rps_mask_area(mask.get())) << "\n";
  return kExitOk;
}

int cmd_eoa(const Common& c) {
  Config cfg;
  load_config(c, cfg);
  Dataset data;
  State state;
  build_state(c, cfg, data, state);
  Ellipsoid e;
  int infinite = 0;
  check(rps_eoa_compute(state.get(), c.tol, e.out(), &infinite), "eoa");
  const std::size_t d = rps_ellipsoid_dim(e.get());
  std::vector<double> center(d);
  check(rps_ellipsoid_center(e.get(), center.data(), d), "eoa");
  if (!c.out.empty()) {
    if (c.format == "csv") check(rps_ellipsoid_save_boundary_csv(e.get(), 256, c.out.c_str()), "write " + c.out);
    else check(rps_ellipsoid_save_json(e.get(), c.out.c_str()), "write " + c.out);
  }
  std::cout << "radius=" << to_text(rps_ellipsoid_radius(e.get())) << " infinite=" << infinite << " center=";
  for (std::size_t i = 0; i < d; ++i) std::cout << (i ? "," : "") << to_text(center[i]);
  std::cout << "\n";
  return kExitOk;
}

int cmd_coverage(const Common& c) {
  Config cfg;
  load_config(c, cfg);
  Report report;
  check(rps_coverage_run(cfg.get(), report.out()), "coverage");
  OwnedString text;
  if (c.format == "json") check(rps_report_to_json(report.get(), 0, &text.ptr), "report");
  else check(rps_report_summary_csv(report.get(), &text.ptr), "report");
  if (c.out.empty()) std::cout << text.str();
  else write_atomic(c.out, text.str());
  return kExitOk;
}

int cmd_experiment(const Common& c) {
  Config cfg;
  check(rps_config_preset(c.name.c_str(), c.seed.value_or(0), cfg.out()), "--name");
  if (c.trials) check(rps_config_set(cfg.get(), "trials", std::to_string(*c.trials).c_str()), "--trials");
  if (c.threads) check(rps_config_set(cfg.get(), "threads", std::to_string(*c.threads).c_str()), "--threads");
  Report report;
  check(rps_coverage_run(cfg.get(), report.out()), "experiment");
  std::size_t files = 0;
  check(rps_report_write_artifacts(report.get(), c.out.c_str(), &files), "write " + c.out);
  OwnedString text;
  if (c.format == "json") check(rps_report_to_json(report.get(), 0, &text.ptr), "report");
  else check(rps_report_summary_csv(report.get(), &text.ptr), "report");
  std::cout << text.str();
  std::cerr << "wrote " << files << " files to " << c.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residual-permuted sums confidence regions for linear regression", "rps-cli"};
  app.set_version_flag("--version", std::string(rps_version()));
  app.require_subcommand(1);
  app.fallthrough(false);
  app.failure_message(CLI::FailureMessage::help);

  Common c;
  int (*action)(const Common&) = nullptr;

  auto* simulate = app.add_subcommand("simulate", "Simulate a dataset from the configured FIR system");
  add_config(simulate, c);
  add_seed(simulate, c);
  simulate->add_option("--out", c.out, "Output file")->required();
  add_format(simulate, c, "Output format: csv (default) or json");
  simulate->callback([&] { action = cmd_simulate; });

  auto* indicator = app.add_subcommand("indicator", "Test whether a parameter lies in the confidence region");
  add_config(indicator, c);
  add_seed(indicator, c);
  indicator->add_option("--theta", c.theta, "Parameter vector, comma separated")->required()->delimiter(',');
  add_method(indicator, c);
  indicator->add_option("--out", c.out, "Output file (default: standard output)");
  add_format(indicator, c, "Output format: json or csv (default: '<0|1> rank=<r>')");
  indicator->callback([&] { action = cmd_indicator; });

  auto* grid = app.add_subcommand("region-grid", "Evaluate the region on a grid around the estimate (d = 2)");
  add_config(grid, c);
  add_seed(grid, c);
  add_method(grid, c);
  grid->add_option("--resolution", c.resolution, "Nodes per axis")->check(CLI::Range(2, 100000))->capture_default_str();
  grid->add_option("--halfwidth", c.halfwidth, "Grid half-width in asymptotic standard deviations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  grid->add_option("--out", c.out, "Mask output file");
  add_format(grid, c, "Mask format: csv (default) or json");
  grid->callback([&] { action = cmd_region_grid; });

  auto* eoa = app.add_subcommand("eoa", "Compute the ellipsoidal outer approximation");
  add_config(eoa, c);
  add_seed(eoa, c);
  add_method(eoa, c);
  eoa->add_option("--tol", c.tol, "Line-search tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  eoa->add_option("--out", c.out, "Output file");
  add_format(eoa, c, "Output format: json (default) or csv boundary points");
  eoa->callback([&] { action = cmd_eoa; });

  auto* coverage = app.add_subcommand("coverage", "Run a Monte Carlo coverage study");
  add_config(coverage, c);
  add_seed(coverage, c);
  coverage->add_option("--trials", c.trials, "Number of trials (overrides the config)");
  coverage->add_option("--threads", c.threads, "Worker threads (overrides the config)")->check(CLI::Range(1u, 1024u));
  coverage->add_option("--out", c.out, "Output file (default: standard output)");
  add_format(coverage, c, "Output format: csv (default) or json");
  coverage->callback([&] { action = cmd_coverage; });

  auto* experiment = app.add_subcommand("experiment", "Reproduce a reference experiment and write its artifacts");
  experiment->add_option("--name", c.name, "Experiment: fig1 or fig2")->required()->check(CLI::IsMember({"fig1", "fig2"}));
  add_seed(experiment, c, "Master seed (default 0)");
  experiment->add_option("--trials", c.trials, "Number of trials (overrides the preset)");
  experiment->add_option("--threads", c.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  experiment->add_option("--out", c.out, "Artifact directory")->required();
  add_format(experiment, c, "Summary format on standard output: csv (default) or json");
  experiment->callback([&] { action = cmd_experiment; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action(c);
  } catch (const Failure& f) {
    std::cerr << "rps-cli: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "rps-cli: " << e.what() << "\n";
    return kExitUsage;
  }
}
