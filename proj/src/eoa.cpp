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

#include "rps/eoa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include "rps/error.hpp"
#include "rps/io.hpp"

namespace rps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxCondition = 1e12;

double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] == 0.0) return kInf;
  return s[0] / s[s.size() - 1];
}

void require_well_conditioned(const Matrix& a, const char* what) {
  const double cond = condition_number(a);
  if (!(cond < kMaxCondition)) {
    std::ostringstream msg;
    msg << what << " is singular or ill-conditioned (condition number " << cond << ")";
    fail(ErrorKind::kConditioning, msg.str());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Ellipsoids

bool Ellipsoid::unbounded() const noexcept { return std::isinf(radius) && radius > 0; }

bool ellipsoid_contains(const Ellipsoid& e, const Vector& theta) {
  if (theta.size() != e.center.size()) fail(ErrorKind::kShape, "theta dimension does not match the ellipsoid");
  if (e.unbounded()) return true;
  const Vector delta = theta - e.center;
  return delta.dot(e.shape * delta) <= e.radius;
}

double ellipse_area(const Ellipsoid& e) {
  if (e.center.size() != 2) fail(ErrorKind::kShape, "ellipse_area needs d = 2");
  if (e.unbounded()) return kInf;
  return std::numbers::pi * e.radius / std::sqrt(e.shape.determinant());
}

std::vector<std::array<double, 2>> ellipse_boundary(const Ellipsoid& e, std::size_t k) {
  if (e.center.size() != 2) fail(ErrorKind::kShape, "ellipse_boundary needs d = 2");
  if (e.unbounded()) fail(ErrorKind::kParameter, "unbounded ellipsoid has no boundary");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(e.shape);
  const Matrix inv_root =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const double s = std::sqrt(std::max(e.radius, 0.0));
  std::vector<std::array<double, 2>> pts;
  pts.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(k);
    const Vector p = e.center + s * inv_root * Eigen::Vector2d(std::cos(angle), std::sin(angle));
    pts.push_back({p[0], p[1]});
  }
  return pts;
}

std::string ellipse_boundary_csv(const Ellipsoid& e, std::size_t k) {
  std::string out = "x,y\n";
  for (const auto& p : ellipse_boundary(e, k)) out += io::format_double(p[0]) + "," + io::format_double(p[1]) + "\n";
  return out;
}

std::string ellipsoid_to_json(const Ellipsoid& e) {
  nlohmann::json j;
  j["center"] = std::vector<double>(e.center.data(), e.center.data() + e.center.size());
  std::vector<double> shape;
  for (Eigen::Index r = 0; r < e.shape.rows(); ++r)
    for (Eigen::Index c = 0; c < e.shape.cols(); ++c) shape.push_back(e.shape(r, c));
  j["shape"] = shape;
  if (e.unbounded()) j["radius"] = "inf";
  else j["radius"] = e.radius;
  return j.dump(1);
}

Ellipsoid ellipsoid_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Ellipsoid e;
    const auto center = j.at("center").get<std::vector<double>>();
    const auto shape = j.at("shape").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(center.size());
    if (static_cast<Eigen::Index>(shape.size()) != d * d) fail(ErrorKind::kShape, "ellipsoid shape is not d x d");
    e.center = Eigen::Map<const Vector>(center.data(), d);
    e.shape = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(shape.data(), d, d);
    const auto& r = j.at("radius");
    e.radius = r.is_string() ? io::parse_double(r.get<std::string>()) : r.get<double>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kValidation, std::string("malformed ellipsoid JSON: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// LMI

LmiSolution solve_lmi(const LmiProblem& prob, double tol) {
  if (!(tol > 0.0)) fail(ErrorKind::kParameter, "solve_lmi tolerance must be positive");
  const Eigen::Index d = prob.a.rows();
  if (d == 0 || prob.a.cols() != d || prob.b.size() != d) fail(ErrorKind::kShape, "LMI problem dimensions disagree");
  if (!prob.a.allFinite() || !prob.b.allFinite() || !std::isfinite(prob.c))
    fail(ErrorKind::kValidation, "LMI problem contains NaN or Inf");
  const double scale = std::max(1.0, prob.a.cwiseAbs().maxCoeff());
  if ((prob.a - prob.a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    fail(ErrorKind::kValidation, "LMI matrix A is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (prob.a + prob.a.transpose()));
  const Vector a = eig.eigenvalues();  // ascending
  const Vector beta = eig.eigenvectors().transpose() * prob.b;
  const double c = prob.c;

  // -I + lambda A >= 0 needs lambda * lambda_min(A) >= 1.
  if (!(a[0] > 0.0)) return {LmiStatus::kInfeasible, kInf, kInf};
  const double lambda0 = 1.0 / a[0];
  const double b_norm = prob.b.norm();

  // Schur complement value at a feasible lambda; the pseudo-inverse drops
  // directions with (lambda a_k - 1) below 1e-10 * sigma_max and requires
  // lambda b to have no component there.
  auto gamma_at = [&](double lambda) {
    const double sigma_max = lambda * a[d - 1] - 1.0;
    const double cutoff = 1e-10 * std::max(sigma_max, 0.0);
    double g = -lambda * c;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double den = lambda * a[k] - 1.0;
      if (den <= cutoff) {
        if (std::abs(lambda * beta[k]) > 1e-10 * std::max(1.0, lambda * b_norm)) return kInf;
        continue;
      }
      g += lambda * lambda * beta[k] * beta[k] / den;
    }
    return g;
  };

  // gamma(lambda) = lambda * slope + sum beta_k^2 / a_k^2 + O(1/lambda).
  double slope = -c;
  double limit = 0.0;
  double magnitude = std::abs(c);
  for (Eigen::Index k = 0; k < d; ++k) {
    slope += beta[k] * beta[k] / a[k];
    magnitude += beta[k] * beta[k] / a[k];
    limit += beta[k] * beta[k] / (a[k] * a[k]);
  }
  const double slope_eps = 1e-14 * magnitude;
  if (slope < -slope_eps) return {LmiStatus::kUnboundedBelow, -kInf, kInf};

  LmiSolution best{LmiStatus::kOptimal, kInf, kInf};
  auto consider = [&](double lambda, double g) {
    if (g < best.gamma) best = {LmiStatus::kOptimal, g, lambda};
  };
  consider(lambda0, gamma_at(lambda0));

  if (slope <= slope_eps) {
    // Nonincreasing in lambda: the infimum is the limit at infinity.
    if (beta.isZero(0.0)) return {LmiStatus::kOptimal, gamma_at(lambda0), lambda0};
    if (limit < best.gamma) best = {LmiStatus::kOptimal, limit, kInf};
    return best;
  }

  // Grow the bracket until gamma starts increasing; convexity then puts the
  // minimizer in [lambda0, hi].
  double mid = 2.0 * lambda0;
  double g_mid = gamma_at(mid);
  consider(mid, g_mid);
  for (int iter = 0; iter < 2000; ++iter) {
    const double next = 2.0 * mid;
    const double g_next = gamma_at(next);
    consider(next, g_next);
    if (!(g_next < g_mid)) break;
    mid = next;
    g_mid = g_next;
  }
  double lo = lambda0;
  double hi = 2.0 * mid;

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = gamma_at(x1);
  double f2 = gamma_at(x2);
  consider(x1, f1);
  consider(x2, f2);
  for (int iter = 0; iter < 500 && (hi - lo) > tol * std::max(lo, std::numeric_limits<double>::min()); ++iter) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = gamma_at(x1);
      consider(x1, f1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = gamma_at(x2);
      consider(x2, f2);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Aggregates and the outer approximation

PerturbedAggregates perturbed_aggregates(const RpsState& state) {
  const auto& psi = state.psi();
  const auto& phi = state.data().phi();
  const auto& y = state.data().y();
  const Eigen::Index n = state.n();
  const Eigen::Index d = state.d();
  const double inv_n = 1.0 / static_cast<double>(n);

  // One loop shape for every index map so that an identity permutation
  // reproduces (V_n, xi_0) bit for bit.
  auto accumulate = [&](auto&& source, auto&& weight) {
    Matrix q = Matrix::Zero(d, d);
    Vector xi = Vector::Zero(d);
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::Index s = source(t);
      const double w = weight(t);
      for (Eigen::Index j = 0; j < d; ++j) {
        const double pw = w * psi(t, j);
        xi[j] += pw * y[s];
        for (Eigen::Index k = 0; k < d; ++k) q(j, k) += pw * phi(s, k);
      }
    }
    return std::pair<Matrix, Vector>{q * inv_n, xi * inv_n};
  };

  PerturbedAggregates agg;
  const auto m = static_cast<std::size_t>(state.m());
  agg.q.reserve(m);
  agg.xi.reserve(m);
  auto push = [&](std::pair<Matrix, Vector> qx) {
    agg.q.push_back(std::move(qx.first));
    agg.xi.push_back(std::move(qx.second));
  };
  auto identity = [](Eigen::Index t) { return t; };
  auto unit = [](Eigen::Index) { return 1.0; };
  push(accumulate(identity, unit));
  for (int i = 1; i < state.m(); ++i) {
    if (state.kind() == Perturbation::kPermutation) {
      const auto sigma = state.permutation(i);
      push(accumulate([&](Eigen::Index t) { return static_cast<Eigen::Index>(sigma[static_cast<std::size_t>(t)]); }, unit));
    } else {
      const auto alpha = state.signs(i);
      push(accumulate(identity, [&](Eigen::Index t) { return alpha[static_cast<std::size_t>(t)]; }));
    }
  }
  return agg;
}

Vector correlation_estimate(const RegressionDataset& data, const DataMatrix& psi) {
  if (psi.rows() != data.n() || psi.cols() != data.d()) fail(ErrorKind::kShape, "co-regressor matrix shape mismatch");
  const Matrix cross = psi.transpose() * data.phi();
  require_well_conditioned(cross, "sum psi_t phi_t^T");
  const Vector rhs = psi.transpose() * data.y();
  return cross.colPivHouseholderQr().solve(rhs);
}

LmiProblem lmi_problem(int i, const RpsState& state, const PerturbedAggregates& agg, const Vector& theta_hat) {
  if (i < 1 || i >= state.m()) fail(ErrorKind::kParameter, "LMI index out of range");
  if (static_cast<int>(agg.q.size()) != state.m()) fail(ErrorKind::kShape, "aggregates do not match the state");
  const Matrix& v = agg.v();
  require_well_conditioned(v, "V_n");
  const Matrix& q = agg.q[static_cast<std::size_t>(i)];
  const Vector& xi = agg.xi[static_cast<std::size_t>(i)];

  // With x = R^{-1/2} V (theta - theta_hat):  S_i = e - M x, where
  // M = R^{-1/2} Q V^{-1} R^{1/2} and e = R^{-1/2} (xi - Q theta_hat), so
  // ||x||^2 <= ||S_i||^2  <=>  x^T (I - M^T M) x + 2 (M^T e)^T x - e^T e <= 0.
  const Matrix v_inv_r_half = v.fullPivLu().solve(state.r_half());
  const Matrix mm = state.r_half_inv() * q * v_inv_r_half;
  const Vector e = state.r_half_inv() * (xi - q * theta_hat);

  LmiProblem prob;
  const Eigen::Index d = state.d();
  prob.a = Matrix::Identity(d, d) - mm.transpose() * mm;
  prob.a = 0.5 * (prob.a + prob.a.transpose()).eval();
  prob.b = mm.transpose() * e;
  prob.c = -e.squaredNorm();
  return prob;
}

OuterApproximation outer_approximation(const RpsState& state, double tol) {
  const PerturbedAggregates agg = perturbed_aggregates(state);
  const Vector theta_hat = correlation_estimate(state.data(), state.psi());

  OuterApproximation out;
  std::vector<double> gammas;
  for (int i = 1; i < state.m(); ++i) {
    const LmiSolution sol = solve_lmi(lmi_problem(i, state, agg, theta_hat), tol);
    out.solutions.push_back(sol);
    if (!std::isfinite(sol.gamma)) {
      ++out.infinite_count;
      gammas.push_back(kInf);
    } else {
      gammas.push_back(sol.gamma);
    }
  }
  std::sort(gammas.begin(), gammas.end(), std::greater<>());

  const Matrix r_inv = state.r_half_inv() * state.r_half_inv();
  Matrix shape = agg.v().transpose() * r_inv * agg.v();
  out.ellipsoid.center = theta_hat;
  out.ellipsoid.shape = 0.5 * (shape + shape.transpose());
  out.ellipsoid.radius = std::max(0.0, gammas[static_cast<std::size_t>(state.q() - 1)]);
  return out;
}

// ---------------------------------------------------------------------------
// Asymptotic baseline

double chi_square_quantile(double p, int dof) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorKind::kParameter, "quantile level must lie in (0, 1)");
  if (dof < 1) fail(ErrorKind::kParameter, "chi-square needs dof >= 1");
  const double k = 0.5 * dof;
  auto cdf = [k](double x) { return boost::math::gamma_p(k, 0.5 * x); };
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (cdf(hi) < p) hi *= 2.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

Vector least_squares(const RegressionDataset& data, Matrix* gram) {
  *gram = data.phi().transpose() * data.phi();
  require_well_conditioned(*gram, "Phi^T Phi");
  return gram->ldlt().solve(data.phi().transpose() * data.y());
}

}  // namespace

double noise_variance_estimate(const RegressionDataset& data) {
  if (data.n() <= data.d())
    fail(ErrorKind::kDegreesOfFreedom, "noise variance needs n > d (n=" + std::to_string(data.n()) +
                                           ", d=" + std::to_string(data.d()) + ")");
  Matrix gram;
  const Vector theta = least_squares(data, &gram);
  return residuals(theta, data).squaredNorm() / static_cast<double>(data.n() - data.d());
}

Ellipsoid asymptotic_ellipsoid(const RegressionDataset& data, double p) {
  return asymptotic_ellipsoid(data, p, noise_variance_estimate(data));
}

Ellipsoid asymptotic_ellipsoid(const RegressionDataset& data, double p, double noise_variance) {
  if (data.n() <= data.d()) fail(ErrorKind::kDegreesOfFreedom, "asymptotic ellipsoid needs n > d");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    fail(ErrorKind::kParameter, "noise variance must be finite and nonnegative");
  Matrix gram;
  Ellipsoid e;
  e.center = least_squares(data, &gram);
  const double chi2 = chi_square_quantile(p, static_cast<int>(data.d()));
  if (noise_variance > 0.0) {
    e.shape = gram / noise_variance;
    e.radius = chi2;
  } else {
    // Zero variance collapses the region to the center.
    e.shape = gram;
    e.radius = 0.0;
  }
  return e;
}

}  // namespace rps
