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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rps/model.hpp"
#include "rps/types.hpp"

namespace rps {

/// Confidence level p = 1 - q/m with integers m > q > 0.
struct RpsConfig {
  int m = 10;
  int q = 1;
  Coregressor coregressor = Coregressor::identity();
  Shaping shaping = Shaping::empirical_gram();
  std::uint64_t seed = 0;

  double p() const noexcept { return 1.0 - static_cast<double>(q) / static_cast<double>(m); }
  /// Throws Error(kParameter) unless m > q > 0.
  void validate() const;
};

/// How the m-1 perturbed sums reorder or reweight the residuals.
enum class Perturbation {
  kPermutation,  // residual-permuted sums
  kSign,         // sign-perturbed sums (baseline)
};

std::string_view to_string(Perturbation kind) noexcept;

/// Symmetric PSD square root by spectral decomposition. Eigenvalues in
/// [-1e-10, 0) are clamped to zero; anything below is a kNotPsd error.
Matrix principal_sqrt(const Matrix& r);

/// Frozen randomization plus the cached co-regressors and shaping roots. One
/// state answers indicator queries for every theta; it is immutable and safe
/// to share between threads.
class RpsState {
 public:
  /// Draws m-1 uniform permutations (Fisher-Yates on the permutation stream)
  /// and the tie-break order pi (tie-break stream) from config.seed.
  static RpsState initialize(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data);
  /// Same, with m-1 i.i.d. Rademacher sign vectors (sign stream) in place of
  /// the permutations.
  static RpsState initialize_sps(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data);

  /// Rebuilds a state from stored randomization. `perturbations` holds m-1
  /// rows of length n: 0-based permutations or +-1 signs.
  static RpsState restore(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data,
                          Perturbation kind, const std::vector<std::vector<std::int64_t>>& perturbations,
                          const std::vector<std::int64_t>& tiebreak);

  const RpsConfig& config() const noexcept { return config_; }
  const RegressionDataset& data() const noexcept { return *data_; }
  const std::shared_ptr<const RegressionDataset>& data_ptr() const noexcept { return data_; }
  Perturbation kind() const noexcept { return kind_; }
  int m() const noexcept { return config_.m; }
  int q() const noexcept { return config_.q; }
  Eigen::Index n() const noexcept { return data_->n(); }
  Eigen::Index d() const noexcept { return data_->d(); }

  const DataMatrix& psi() const noexcept { return psi_; }
  const Matrix& shaping() const noexcept { return r_; }
  const Matrix& r_half() const noexcept { return r_half_; }
  const Matrix& r_half_inv() const noexcept { return r_half_inv_; }

  /// sigma_i as 0-based indices, i = 1..m-1. Only for kPermutation.
  std::span<const std::uint32_t> permutation(int i) const;
  /// alpha_i in {-1,+1}^n, i = 1..m-1. Only for kSign.
  std::span<const double> signs(int i) const;
  /// pi(k) for k = 0..m-1.
  const std::vector<std::uint32_t>& tiebreak() const noexcept { return tiebreak_; }

 private:
  RpsState() = default;
  void prepare(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data, Perturbation kind);

  RpsConfig config_;
  std::shared_ptr<const RegressionDataset> data_;
  Perturbation kind_ = Perturbation::kPermutation;
  DataMatrix psi_;
  Matrix r_;
  Matrix r_half_;
  Matrix r_half_inv_;
  std::vector<std::uint32_t> perms_;  // (m-1) x n, row-major
  std::vector<double> signs_;         // (m-1) x n, row-major
  std::vector<std::uint32_t> tiebreak_;
};

/// eps_t(theta) = Y_t - phi_t^T theta.
Vector residuals(const Vector& theta, const RegressionDataset& data);

/// S_0(theta), ..., S_{m-1}(theta) for the state's perturbation kind.
std::vector<Vector> s_values(const Vector& theta, const RpsState& state);
/// Sign-perturbed sums; the state must have been built by initialize_sps.
std::vector<Vector> sps_s_values(const Vector& theta, const RpsState& state);

/// 1 + #{i >= 1 : z_0 >_pi z_i} for squared norms z_k, where ties are
/// broken by the larger pi. Comparisons are exact.
int rank_of(std::span<const double> squared_norms, std::span<const std::uint32_t> tiebreak);

int rank(const Vector& theta, const RpsState& state);
/// True iff rank(theta) <= m - q.
bool indicator(const Vector& theta, const RpsState& state);

/// JSON snapshot: config, seed, perturbation kind, randomization and
/// tie-break order. Reloading against the same dataset reproduces every
/// query bit for bit.
std::string state_to_json(const RpsState& state);
RpsState state_from_json(std::string_view json, std::shared_ptr<const RegressionDataset> data);

}  // namespace rps
