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

#include "rps/model.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "rps/error.hpp"
#include "rps/io.hpp"

namespace rps {

RegressionDataset::RegressionDataset(DataMatrix phi, Vector y) : phi_(std::move(phi)), y_(std::move(y)) {
  if (phi_.rows() < 1 || phi_.cols() < 1) fail(ErrorKind::kShape, "dataset needs n >= 1 and d >= 1");
  if (phi_.rows() != y_.size())
    fail(ErrorKind::kShape, "phi has " + std::to_string(phi_.rows()) + " rows but y has " +
                                std::to_string(y_.size()) + " entries");
  if (!phi_.allFinite() || !y_.allFinite()) fail(ErrorKind::kValidation, "dataset contains NaN or Inf");
}

// ---------------------------------------------------------------------------
// Noise

namespace {
void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::kParameter, std::string(what) + " must be positive and finite");
}
void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorKind::kParameter, std::string(what) + " must be finite");
}
}  // namespace

NoiseSpec NoiseSpec::gaussian(double mean, double stddev) {
  require_finite(mean, "gaussian mean");
  require_positive(stddev, "gaussian standard deviation");
  return {Family::kGaussian, mean, stddev};
}

NoiseSpec NoiseSpec::laplace(double location, double scale) {
  require_finite(location, "laplace location");
  require_positive(scale, "laplace scale");
  return {Family::kLaplace, location, scale};
}

NoiseSpec NoiseSpec::laplace_with_variance(double location, double variance) {
  require_positive(variance, "laplace variance");
  return laplace(location, std::sqrt(variance / 2.0));
}

NoiseSpec NoiseSpec::exponential_rate(double rate) {
  require_positive(rate, "exponential rate");
  return {Family::kExponential, 0.0, 1.0 / rate};
}

NoiseSpec NoiseSpec::exponential_scale(double scale) {
  require_positive(scale, "exponential scale");
  return {Family::kExponential, 0.0, scale};
}

NoiseSpec NoiseSpec::custom(Sampler sampler, std::string name) {
  if (!sampler) fail(ErrorKind::kParameter, "custom noise needs a sampler");
  NoiseSpec spec(Family::kCustom, 0.0, 1.0);
  spec.sampler_ = std::move(sampler);
  spec.name_ = std::move(name);
  return spec;
}

double NoiseSpec::mean() const noexcept {
  switch (family_) {
    case Family::kGaussian:
    case Family::kLaplace: return location_;
    case Family::kExponential: return scale_;
    case Family::kCustom: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double NoiseSpec::variance() const noexcept {
  switch (family_) {
    case Family::kGaussian:
    case Family::kExponential: return scale_ * scale_;
    case Family::kLaplace: return 2.0 * scale_ * scale_;
    case Family::kCustom: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string NoiseSpec::describe() const {
  switch (family_) {
    case Family::kGaussian: return "gaussian(mean=" + io::format_double(location_) + ", sd=" + io::format_double(scale_) + ")";
    case Family::kLaplace: return "laplace(location=" + io::format_double(location_) + ", scale=" + io::format_double(scale_) + ")";
    case Family::kExponential: return "exponential(rate=" + io::format_double(1.0 / scale_) + ")";
    case Family::kCustom: return "custom(" + name_ + ")";
  }
  return "unknown";
}

double NoiseSpec::draw(Engine& engine) const {
  switch (family_) {
    case Family::kGaussian: {
      std::normal_distribution<double> dist(location_, scale_);
      return dist(engine);
    }
    case Family::kLaplace: {
      // Difference of two unit exponentials is standard Laplace.
      std::exponential_distribution<double> dist(1.0);
      const double a = dist(engine);
      const double b = dist(engine);
      return location_ + scale_ * (a - b);
    }
    case Family::kExponential: {
      std::exponential_distribution<double> dist(1.0 / scale_);
      return dist(engine);
    }
    case Family::kCustom: return sampler_(engine);
  }
  return 0.0;
}

Vector sample_noise(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
  Engine engine = make_engine(seed, Stream::kNoise);
  Vector w(static_cast<Eigen::Index>(n));
  for (Eigen::Index t = 0; t < w.size(); ++t) w[t] = spec.draw(engine);
  return w;
}

// ---------------------------------------------------------------------------
// FIR simulation

TrueSystem fir_benchmark(NoiseSpec noise) {
  TrueSystem sys{Vector(2), std::move(noise), {1.0, 0.775, 0.55, 0.325, 0.1}};
  sys.theta_star << 5.0, 1.0;
  return sys;
}

RegressionDataset simulate_fir(const TrueSystem& system, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorKind::kParameter, "simulate_fir needs n >= 1");
  if (system.input_filter.empty()) fail(ErrorKind::kParameter, "input filter is empty");
  const Eigen::Index d = system.fir_order();
  if (d < 1) fail(ErrorKind::kParameter, "theta* is empty");
  if (!system.theta_star.allFinite()) fail(ErrorKind::kParameter, "theta* must be finite");

  const auto nn = static_cast<Eigen::Index>(n);
  const auto taps = static_cast<Eigen::Index>(system.input_filter.size());

  // U_t is needed for t = 1-d .. n-1, V_t for t = 2-d-taps .. n-1.
  const Eigen::Index u_count = nn + d - 1;
  const Eigen::Index v_count = u_count + taps - 1;
  Engine input = make_engine(seed, Stream::kInput);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(v_count));
  for (auto& x : v) x = unit(input);

  // u[k] holds U_{k+1-d}; v[k] holds V_{k+2-d-taps}.
  std::vector<double> u(static_cast<std::size_t>(u_count), 0.0);
  for (Eigen::Index k = 0; k < u_count; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < taps; ++i)
      acc += system.input_filter[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(k + taps - 1 - i)];
    u[static_cast<std::size_t>(k)] = acc;
  }

  const Vector w = sample_noise(system.noise, n, seed);
  DataMatrix phi(nn, d);
  Vector y(nn);
  for (Eigen::Index t = 0; t < nn; ++t) {
    // Sample t+1 uses U_{t+1-j}, j = 1..d, stored at u[t + d - j].
    for (Eigen::Index j = 1; j <= d; ++j) phi(t, j - 1) = u[static_cast<std::size_t>(t + d - j)];
    y[t] = row_dot(phi, t, system.theta_star) + w[t];
  }
  return RegressionDataset(std::move(phi), std::move(y));
}

// ---------------------------------------------------------------------------
// Co-regressors and shaping

DataMatrix build_coregressors(const RegressionDataset& data, const Coregressor& strategy) {
  const DataMatrix& phi = data.phi();
  switch (strategy.kind) {
    case Coregressor::Kind::kIdentity: return phi;
    case Coregressor::Kind::kCenteredKnownMean: {
      if (strategy.mean.size() != data.d())
        fail(ErrorKind::kShape, "known mean has length " + std::to_string(strategy.mean.size()) +
                                    ", expected " + std::to_string(data.d()));
      return phi.rowwise() - strategy.mean.transpose();
    }
    case Coregressor::Kind::kCenteredEmpirical: {
      const Eigen::RowVectorXd mu = phi.colwise().mean();
      return phi.rowwise() - mu;
    }
    case Coregressor::Kind::kSign:
      return phi.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
    case Coregressor::Kind::kUser: {
      if (strategy.user.rows() != data.n() || strategy.user.cols() != data.d())
        fail(ErrorKind::kShape, "user co-regressor matrix is " + std::to_string(strategy.user.rows()) + "x" +
                                    std::to_string(strategy.user.cols()) + ", expected " +
                                    std::to_string(data.n()) + "x" + std::to_string(data.d()));
      if (!strategy.user.allFinite()) fail(ErrorKind::kValidation, "user co-regressors contain NaN or Inf");
      return strategy.user;
    }
  }
  return phi;
}

Matrix shaping_matrix(const RegressionDataset& data, const Shaping& choice) {
  const Eigen::Index d = data.d();
  switch (choice.kind) {
    case Shaping::Kind::kIdentity: return Matrix::Identity(d, d);
    case Shaping::Kind::kEmpiricalGram: {
      Matrix gram = data.phi().transpose() * data.phi();
      gram /= static_cast<double>(data.n());
      return 0.5 * (gram + gram.transpose());
    }
    case Shaping::Kind::kUser: {
      const Matrix& r = choice.user;
      if (r.rows() != d || r.cols() != d)
        fail(ErrorKind::kShape, "shaping matrix must be " + std::to_string(d) + "x" + std::to_string(d));
      if (!r.allFinite()) fail(ErrorKind::kValidation, "shaping matrix contains NaN or Inf");
      const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
      if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        fail(ErrorKind::kValidation, "shaping matrix is not symmetric");
      Matrix sym = 0.5 * (r + r.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-10 * scale)
        fail(ErrorKind::kValidation, "shaping matrix is not positive semidefinite");
      return sym;
    }
  }
  return Matrix::Identity(d, d);
}

// ---------------------------------------------------------------------------
// CSV

void write_dataset_csv(const RegressionDataset& data, std::ostream& out) {
  out << "t,y";
  for (Eigen::Index j = 1; j <= data.d(); ++j) out << ",phi_" << j;
  out << '\n';
  for (Eigen::Index t = 0; t < data.n(); ++t) {
    out << (t + 1) << ',' << io::format_double(data.y()[t]);
    for (Eigen::Index j = 0; j < data.d(); ++j) out << ',' << io::format_double(data.phi()(t, j));
    out << '\n';
  }
}

RegressionDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kValidation, "dataset CSV is empty");
  const auto header = io::split(io::trim(line), ',');
  if (header.size() < 3 || io::trim(header[0]) != "t" || io::trim(header[1]) != "y")
    fail(ErrorKind::kValidation, "dataset CSV header must be t,y,phi_1,...,phi_d");
  const auto d = static_cast<Eigen::Index>(header.size() - 2);
  for (Eigen::Index j = 1; j <= d; ++j)
    if (io::trim(header[static_cast<std::size_t>(j + 1)]) != "phi_" + std::to_string(j))
      fail(ErrorKind::kValidation, "unexpected dataset column '" + std::string(header[static_cast<std::size_t>(j + 1)]) + "'");

  std::vector<double> ys;
  std::vector<double> phis;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = io::trim(line);
    if (body.empty()) continue;
    const auto cells = io::split(body, ',');
    if (cells.size() != header.size())
      fail(ErrorKind::kShape, "dataset CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(header.size()));
    ys.push_back(io::parse_double(cells[1]));
    for (std::size_t j = 2; j < cells.size(); ++j) phis.push_back(io::parse_double(cells[j]));
  }
  const auto n = static_cast<Eigen::Index>(ys.size());
  if (n == 0) fail(ErrorKind::kShape, "dataset CSV has no rows");
  DataMatrix phi = Eigen::Map<const DataMatrix>(phis.data(), n, d);
  Vector y = Eigen::Map<const Vector>(ys.data(), n);
  return RegressionDataset(std::move(phi), std::move(y));
}

void save_dataset_csv(const RegressionDataset& data, const std::string& path) {
  std::ostringstream ss;
  write_dataset_csv(data, ss);
  io::write_file_atomic(path, ss.str());
}

RegressionDataset load_dataset_csv(const std::string& path) {
  std::istringstream ss(io::read_file(path));
  return read_dataset_csv(ss);
}

}  // namespace rps
