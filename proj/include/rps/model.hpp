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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "rps/rng.hpp"
#include "rps/types.hpp"

namespace rps {

/// One realization of Y_t = phi_t^T theta* + W_t, t = 1..n. Immutable after
/// construction; the constructor rejects empty, ragged or non-finite data.
class RegressionDataset {
 public:
  RegressionDataset(DataMatrix phi, Vector y);

  const DataMatrix& phi() const noexcept { return phi_; }
  const Vector& y() const noexcept { return y_; }
  Eigen::Index n() const noexcept { return phi_.rows(); }
  Eigen::Index d() const noexcept { return phi_.cols(); }

 private:
  DataMatrix phi_;
  Vector y_;
};

/// Law of the i.i.d. noise W_t.
class NoiseSpec {
 public:
  enum class Family { kGaussian, kLaplace, kExponential, kCustom };
  using Sampler = std::function<double(Engine&)>;

  static NoiseSpec gaussian(double mean, double stddev);
  static NoiseSpec laplace(double location, double scale);
  /// Laplace(location, b) with 2 b^2 = variance.
  static NoiseSpec laplace_with_variance(double location, double variance);
  static NoiseSpec exponential_rate(double rate);
  static NoiseSpec exponential_scale(double scale);
  static NoiseSpec custom(Sampler sampler, std::string name);

  Family family() const noexcept { return family_; }
  double location() const noexcept { return location_; }
  /// Standard deviation (gaussian), b (laplace) or 1/rate (exponential).
  double scale() const noexcept { return scale_; }
  /// Closed-form moments; NaN for custom samplers.
  double mean() const noexcept;
  double variance() const noexcept;
  std::string describe() const;

  double draw(Engine& engine) const;

 private:
  NoiseSpec(Family family, double location, double scale)
      : family_(family), location_(location), scale_(scale) {}

  Family family_;
  double location_ = 0.0;
  double scale_ = 1.0;
  Sampler sampler_;
  std::string name_;
};

/// n i.i.d. draws from the noise stream of `seed`.
Vector sample_noise(const NoiseSpec& spec, std::size_t n, std::uint64_t seed);

struct TrueSystem {
  Vector theta_star;
  NoiseSpec noise;
  /// MA coefficients c_1..c_L of U_t = sum_i c_i V_{t-i+1}, V_t ~ N(0,1).
  std::vector<double> input_filter;

  Eigen::Index fir_order() const noexcept { return theta_star.size(); }
};

/// Second-order FIR benchmark: theta* = [5, 1], c = [1, .775, .55, .325, .1].
TrueSystem fir_benchmark(NoiseSpec noise);

/// Simulates the FIR system with phi_t = [U_{t-1}, ..., U_{t-d}]. Innovations
/// V_t before the first sample are drawn from the same N(0,1) law, so the
/// regressor sequence is stationary from t = 1. Input innovations and noise
/// use separate streams of `seed`.
RegressionDataset simulate_fir(const TrueSystem& system, std::size_t n, std::uint64_t seed);

/// Co-regressor construction psi_t = f(phi_t).
struct Coregressor {
  enum class Kind { kIdentity, kCenteredKnownMean, kCenteredEmpirical, kSign, kUser };

  Kind kind = Kind::kIdentity;
  Vector mean;      // kCenteredKnownMean
  DataMatrix user;  // kUser

  static Coregressor identity() { return {}; }
  static Coregressor centered_known_mean(Vector mu) { return {Kind::kCenteredKnownMean, std::move(mu), {}}; }
  static Coregressor centered_empirical() { return {Kind::kCenteredEmpirical, {}, {}}; }
  static Coregressor sign() { return {Kind::kSign, {}, {}}; }
  static Coregressor user_supplied(DataMatrix psi) { return {Kind::kUser, {}, std::move(psi)}; }
};

DataMatrix build_coregressors(const RegressionDataset& data, const Coregressor& strategy);

/// Shaping matrix R_n.
struct Shaping {
  enum class Kind { kIdentity, kEmpiricalGram, kUser };

  Kind kind = Kind::kIdentity;
  Matrix user;

  static Shaping identity() { return {}; }
  static Shaping empirical_gram() { return {Kind::kEmpiricalGram, {}}; }
  static Shaping user_supplied(Matrix r) { return {Kind::kUser, std::move(r)}; }
};

/// Returns a symmetric PSD d x d matrix; user matrices are validated
/// (symmetric and PSD to 1e-10 relative) and returned symmetrized.
Matrix shaping_matrix(const RegressionDataset& data, const Shaping& choice);

/// CSV with header `t,y,phi_1,...,phi_d`; t runs from 1. Numbers are written
/// in shortest round-trip form, so write/read is lossless.
void write_dataset_csv(const RegressionDataset& data, std::ostream& out);
RegressionDataset read_dataset_csv(std::istream& in);
void save_dataset_csv(const RegressionDataset& data, const std::string& path);
RegressionDataset load_dataset_csv(const std::string& path);

}  // namespace rps
