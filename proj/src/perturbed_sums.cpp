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

#include "rps/perturbed_sums.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "rps/error.hpp"
#include "rps/rng.hpp"

namespace rps {

void RpsConfig::validate() const {
  if (m < 2) fail(ErrorKind::kParameter, "m must be at least 2, got " + std::to_string(m));
  if (q < 1 || q >= m)
    fail(ErrorKind::kParameter, "q must satisfy 0 < q < m, got q=" + std::to_string(q) + ", m=" + std::to_string(m));
}

std::string_view to_string(Perturbation kind) noexcept {
  return kind == Perturbation::kPermutation ? "permutation" : "sign";
}

Matrix principal_sqrt(const Matrix& r) {
  if (r.rows() != r.cols() || r.rows() == 0) fail(ErrorKind::kShape, "principal_sqrt needs a nonempty square matrix");
  if (!r.allFinite()) fail(ErrorKind::kValidation, "matrix contains NaN or Inf");
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail(ErrorKind::kValidation, "principal_sqrt needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (r + r.transpose()));
  Vector lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-10)
    fail(ErrorKind::kNotPsd, "matrix has eigenvalue " + std::to_string(lambda.minCoeff()) + " < -1e-10");
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const Matrix& u = eig.eigenvectors();
  Matrix root = u * lambda.asDiagonal() * u.transpose();
  return 0.5 * (root + root.transpose());
}

// ---------------------------------------------------------------------------
// State

void RpsState::prepare(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data, Perturbation kind) {
  config.validate();
  if (!data) fail(ErrorKind::kParameter, "state needs a dataset");
  config_ = config;
  data_ = std::move(data);
  kind_ = kind;
  psi_ = build_coregressors(*data_, config_.coregressor);
  r_ = shaping_matrix(*data_, config_.shaping);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(r_);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (!(min_eig > 1e-10))
    fail(ErrorKind::kConditioning, "shaping matrix is singular (min eigenvalue " + std::to_string(min_eig) + ")");
  const Matrix& u = eig.eigenvectors();
  r_half_ = u * eig.eigenvalues().cwiseSqrt().asDiagonal() * u.transpose();
  r_half_ = 0.5 * (r_half_ + r_half_.transpose()).eval();
  r_half_inv_ = u * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * u.transpose();
  r_half_inv_ = 0.5 * (r_half_inv_ + r_half_inv_.transpose()).eval();
}

namespace {

std::vector<std::uint32_t> draw_tiebreak(std::uint64_t seed, int m) {
  Engine engine = make_engine(seed, Stream::kTieBreak);
  std::vector<std::uint32_t> pi(static_cast<std::size_t>(m));
  std::iota(pi.begin(), pi.end(), 0u);
  for (std::size_t i = pi.size() - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(pi[i], pi[pick(engine)]);
  }
  return pi;
}

}  // namespace

RpsState RpsState::initialize(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data) {
  RpsState state;
  state.prepare(config, std::move(data), Perturbation::kPermutation);
  const auto n = static_cast<std::size_t>(state.n());
  const auto rows = static_cast<std::size_t>(config.m - 1);

  Engine engine = make_engine(config.seed, Stream::kPermutation);
  state.perms_.resize(rows * n);
  for (std::size_t i = 0; i < rows; ++i) {
    std::uint32_t* sigma = state.perms_.data() + i * n;
    std::iota(sigma, sigma + n, 0u);
    for (std::size_t k = n - 1; k > 0; --k) {
      std::uniform_int_distribution<std::size_t> pick(0, k);
      std::swap(sigma[k], sigma[pick(engine)]);
    }
  }
  state.tiebreak_ = draw_tiebreak(config.seed, config.m);
  return state;
}

RpsState RpsState::initialize_sps(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data) {
  RpsState state;
  state.prepare(config, std::move(data), Perturbation::kSign);
  const auto n = static_cast<std::size_t>(state.n());
  const auto rows = static_cast<std::size_t>(config.m - 1);

  Engine engine = make_engine(config.seed, Stream::kSign);
  std::bernoulli_distribution coin(0.5);
  state.signs_.resize(rows * n);
  for (double& s : state.signs_) s = coin(engine) ? 1.0 : -1.0;
  state.tiebreak_ = draw_tiebreak(config.seed, config.m);
  return state;
}

RpsState RpsState::restore(const RpsConfig& config, std::shared_ptr<const RegressionDataset> data, Perturbation kind,
                           const std::vector<std::vector<std::int64_t>>& perturbations,
                           const std::vector<std::int64_t>& tiebreak) {
  RpsState state;
  state.prepare(config, std::move(data), kind);
  const auto n = static_cast<std::size_t>(state.n());
  const auto m = static_cast<std::size_t>(config.m);
  if (perturbations.size() != m - 1)
    fail(ErrorKind::kShape, "expected " + std::to_string(m - 1) + " perturbations, got " + std::to_string(perturbations.size()));

  std::vector<char> seen;
  for (const auto& row : perturbations) {
    if (row.size() != n) fail(ErrorKind::kShape, "perturbation length does not match n");
    if (kind == Perturbation::kPermutation) {
      seen.assign(n, 0);
      for (const auto v : row) {
        if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)])
          fail(ErrorKind::kValidation, "stored permutation is not a bijection on {0..n-1}");
        seen[static_cast<std::size_t>(v)] = 1;
        state.perms_.push_back(static_cast<std::uint32_t>(v));
      }
    } else {
      for (const auto v : row) {
        if (v != 1 && v != -1) fail(ErrorKind::kValidation, "stored sign is not +-1");
        state.signs_.push_back(static_cast<double>(v));
      }
    }
  }

  if (tiebreak.size() != m) fail(ErrorKind::kShape, "tie-break order must have m entries");
  seen.assign(m, 0);
  for (const auto v : tiebreak) {
    if (v < 0 || static_cast<std::size_t>(v) >= m || seen[static_cast<std::size_t>(v)])
      fail(ErrorKind::kValidation, "tie-break order is not a bijection on {0..m-1}");
    seen[static_cast<std::size_t>(v)] = 1;
    state.tiebreak_.push_back(static_cast<std::uint32_t>(v));
  }
  return state;
}

std::span<const std::uint32_t> RpsState::permutation(int i) const {
  if (kind_ != Perturbation::kPermutation) fail(ErrorKind::kParameter, "state holds sign perturbations");
  if (i < 1 || i >= config_.m) fail(ErrorKind::kParameter, "permutation index out of range");
  const auto n = static_cast<std::size_t>(this->n());
  return {perms_.data() + static_cast<std::size_t>(i - 1) * n, n};
}

std::span<const double> RpsState::signs(int i) const {
  if (kind_ != Perturbation::kSign) fail(ErrorKind::kParameter, "state holds permutations");
  if (i < 1 || i >= config_.m) fail(ErrorKind::kParameter, "sign vector index out of range");
  const auto n = static_cast<std::size_t>(this->n());
  return {signs_.data() + static_cast<std::size_t>(i - 1) * n, n};
}

// ---------------------------------------------------------------------------
// Sums and ranks

Vector residuals(const Vector& theta, const RegressionDataset& data) {
  if (theta.size() != data.d())
    fail(ErrorKind::kShape, "theta has dimension " + std::to_string(theta.size()) + ", expected " + std::to_string(data.d()));
  Vector eps(data.n());
  for (Eigen::Index t = 0; t < data.n(); ++t) eps[t] = data.y()[t] - row_dot(data.phi(), t, theta);
  return eps;
}

namespace {

Vector shaped(const RpsState& state, const Vector& acc) {
  return state.r_half_inv() * (acc / static_cast<double>(state.n()));
}

Vector reference_sum(const RpsState& state, const Vector& eps) {
  const Eigen::Index n = state.n();
  const Eigen::Index d = state.d();
  Vector acc = Vector::Zero(d);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < d; ++j) acc[j] += state.psi()(t, j) * eps[t];
  return shaped(state, acc);
}

}  // namespace

std::vector<Vector> s_values(const Vector& theta, const RpsState& state) {
  if (state.kind() == Perturbation::kSign) return sps_s_values(theta, state);
  const Vector eps = residuals(theta, state.data());
  const Eigen::Index n = state.n();
  const Eigen::Index d = state.d();

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(state.m()));
  out.push_back(reference_sum(state, eps));
  for (int i = 1; i < state.m(); ++i) {
    const auto sigma = state.permutation(i);
    Vector acc = Vector::Zero(d);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double e = eps[sigma[static_cast<std::size_t>(t)]];
      for (Eigen::Index j = 0; j < d; ++j) acc[j] += state.psi()(t, j) * e;
    }
    out.push_back(shaped(state, acc));
  }
  return out;
}

std::vector<Vector> sps_s_values(const Vector& theta, const RpsState& state) {
  if (state.kind() != Perturbation::kSign) fail(ErrorKind::kParameter, "sps_s_values needs a sign-perturbed state");
  const Vector eps = residuals(theta, state.data());
  const Eigen::Index n = state.n();
  const Eigen::Index d = state.d();

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(state.m()));
  out.push_back(reference_sum(state, eps));
  for (int i = 1; i < state.m(); ++i) {
    const auto alpha = state.signs(i);
    Vector acc = Vector::Zero(d);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double e = alpha[static_cast<std::size_t>(t)] * eps[t];
      for (Eigen::Index j = 0; j < d; ++j) acc[j] += state.psi()(t, j) * e;
    }
    out.push_back(shaped(state, acc));
  }
  return out;
}

int rank_of(std::span<const double> z, std::span<const std::uint32_t> pi) {
  int r = 1;
  for (std::size_t i = 1; i < z.size(); ++i)
    if (z[0] > z[i] || (z[0] == z[i] && pi[0] > pi[i])) ++r;
  return r;
}

int rank(const Vector& theta, const RpsState& state) {
  const auto sums = s_values(theta, state);
  std::vector<double> z(sums.size());
  std::transform(sums.begin(), sums.end(), z.begin(), [](const Vector& s) { return s.squaredNorm(); });
  return rank_of(z, state.tiebreak());
}

bool indicator(const Vector& theta, const RpsState& state) {
  return rank(theta, state) <= state.m() - state.q();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j.at(r).size()) != cols) fail(ErrorKind::kShape, "ragged matrix in JSON");
    for (Eigen::Index c = 0; c < cols; ++c) a(r, c) = j.at(r).at(c).get<double>();
  }
  return a;
}

json coregressor_to_json(const Coregressor& c) {
  switch (c.kind) {
    case Coregressor::Kind::kIdentity: return {{"kind", "identity"}};
    case Coregressor::Kind::kCenteredKnownMean:
      return {{"kind", "centered-known-mean"}, {"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())}};
    case Coregressor::Kind::kCenteredEmpirical: return {{"kind", "centered-empirical"}};
    case Coregressor::Kind::kSign: return {{"kind", "sign"}};
    case Coregressor::Kind::kUser: return {{"kind", "user"}, {"matrix", matrix_to_json(c.user)}};
  }
  return {};
}

Coregressor coregressor_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "identity") return Coregressor::identity();
  if (kind == "centered-empirical") return Coregressor::centered_empirical();
  if (kind == "sign") return Coregressor::sign();
  if (kind == "centered-known-mean") {
    const auto mu = j.at("mean").get<std::vector<double>>();
    return Coregressor::centered_known_mean(Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size())));
  }
  if (kind == "user") return Coregressor::user_supplied(matrix_from_json(j.at("matrix")));
  fail(ErrorKind::kValidation, "unknown co-regressor kind '" + kind + "'");
}

json shaping_to_json(const Shaping& s) {
  switch (s.kind) {
    case Shaping::Kind::kIdentity: return {{"kind", "identity"}};
    case Shaping::Kind::kEmpiricalGram: return {{"kind", "empirical-gram"}};
    case Shaping::Kind::kUser: return {{"kind", "user"}, {"matrix", matrix_to_json(s.user)}};
  }
  return {};
}

Shaping shaping_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "identity") return Shaping::identity();
  if (kind == "empirical-gram") return Shaping::empirical_gram();
  if (kind == "user") return Shaping::user_supplied(matrix_from_json(j.at("matrix")));
  fail(ErrorKind::kValidation, "unknown shaping kind '" + kind + "'");
}

}  // namespace

std::string state_to_json(const RpsState& state) {
  const auto& cfg = state.config();
  json j;
  j["format"] = "rps-state/1";
  j["config"] = {{"m", cfg.m},
                 {"q", cfg.q},
                 {"coregressor", coregressor_to_json(cfg.coregressor)},
                 {"shaping", shaping_to_json(cfg.shaping)}};
  j["seed"] = cfg.seed;
  j["n"] = state.n();
  j["d"] = state.d();
  j["perturbation"] = std::string(to_string(state.kind()));
  json rows = json::array();
  for (int i = 1; i < state.m(); ++i) {
    if (state.kind() == Perturbation::kPermutation) {
      const auto sigma = state.permutation(i);
      rows.push_back(std::vector<std::uint32_t>(sigma.begin(), sigma.end()));
    } else {
      const auto alpha = state.signs(i);
      std::vector<int> row(alpha.size());
      std::transform(alpha.begin(), alpha.end(), row.begin(), [](double a) { return a > 0 ? 1 : -1; });
      rows.push_back(std::move(row));
    }
  }
  j[state.kind() == Perturbation::kPermutation ? "permutations" : "signs"] = std::move(rows);
  j["tiebreak"] = state.tiebreak();
  return j.dump(1);
}

RpsState state_from_json(std::string_view text, std::shared_ptr<const RegressionDataset> data) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "rps-state/1") fail(ErrorKind::kValidation, "not an rps state document");
    RpsConfig cfg;
    cfg.m = j.at("config").at("m").get<int>();
    cfg.q = j.at("config").at("q").get<int>();
    cfg.coregressor = coregressor_from_json(j.at("config").at("coregressor"));
    cfg.shaping = shaping_from_json(j.at("config").at("shaping"));
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (data && (j.at("n").get<Eigen::Index>() != data->n() || j.at("d").get<Eigen::Index>() != data->d()))
      fail(ErrorKind::kShape, "state was built for a dataset of a different size");
    const auto kind_name = j.at("perturbation").get<std::string>();
    Perturbation kind;
    if (kind_name == "permutation") kind = Perturbation::kPermutation;
    else if (kind_name == "sign") kind = Perturbation::kSign;
    else fail(ErrorKind::kValidation, "unknown perturbation '" + kind_name + "'");
    const auto rows = j.at(kind == Perturbation::kPermutation ? "permutations" : "signs")
                          .get<std::vector<std::vector<std::int64_t>>>();
    const auto pi = j.at("tiebreak").get<std::vector<std::int64_t>>();
    return RpsState::restore(cfg, std::move(data), kind, rows, pi);
  } catch (const json::exception& e) {
    fail(ErrorKind::kValidation, std::string("malformed state JSON: ") + e.what());
  }
}

}  // namespace rps
