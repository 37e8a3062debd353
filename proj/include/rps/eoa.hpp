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
#include <string>
#include <string_view>
#include <vector>

#include "rps/model.hpp"
#include "rps/perturbed_sums.hpp"
#include "rps/types.hpp"

namespace rps {

/// {theta : (theta - center)^T shape (theta - center) <= radius}. A radius of
/// +inf stands for the whole parameter space.
struct Ellipsoid {
  Vector center;
  Matrix shape;
  double radius = 0.0;

  bool unbounded() const noexcept;
};

bool ellipsoid_contains(const Ellipsoid& e, const Vector& theta);
/// Exact area for d = 2 (pi r / sqrt(det shape)); +inf when unbounded.
double ellipse_area(const Ellipsoid& e);
/// k points on the boundary of a d = 2 ellipse, counter-clockwise.
std::vector<std::array<double, 2>> ellipse_boundary(const Ellipsoid& e, std::size_t k);
std::string ellipse_boundary_csv(const Ellipsoid& e, std::size_t k);

/// {"center": [...], "shape": [row-major], "radius": r}; an unbounded radius
/// is written as the string "inf".
std::string ellipsoid_to_json(const Ellipsoid& e);
Ellipsoid ellipsoid_from_json(std::string_view json);

/// min gamma s.t. lambda >= 0 and [[-I + lambda A, lambda b], [lambda b^T, lambda c + gamma]] >= 0.
struct LmiProblem {
  Matrix a;
  Vector b;
  double c = 0.0;
};

enum class LmiStatus {
  kOptimal,         // finite gamma*, attained or approached as lambda -> inf
  kInfeasible,      // no lambda makes -I + lambda A PSD; gamma* = +inf
  kUnboundedBelow,  // gamma(lambda) -> -inf; gamma* = -inf
};

struct LmiSolution {
  LmiStatus status = LmiStatus::kOptimal;
  double gamma = 0.0;
  double lambda = 0.0;  // minimizer; +inf when the infimum is only approached
};

/// Solves the two-variable SDP by eliminating gamma through the Schur
/// complement and minimizing the convex gamma(lambda) = lambda^2 b^T
/// (lambda A - I)^+ b - lambda c over lambda >= 1/lambda_min(A) with
/// golden-section search to relative tolerance `tol`. The returned gamma is
/// gamma(lambda) at a feasible lambda, so it never undershoots gamma*.
LmiSolution solve_lmi(const LmiProblem& problem, double tol);

/// Sample correlation matrices shared by the sums and the outer
/// approximation, for the state's perturbation kind:
///   V_n  = 1/n sum psi_t phi_t^T,        xi_0 = 1/n sum psi_t Y_t,
///   Q_i  = 1/n sum psi_t phi_{s(t)}^T,   xi_i = 1/n sum psi_t Y_{s(t)}
/// (sign kind: alpha_{i,t} psi_t phi_t^T and alpha_{i,t} psi_t Y_t).
/// Index 0 of `q` and `xi` is the unperturbed pair (V_n, xi_0), so the sums
/// are S_i(theta) = R^{-1/2} (xi_i - Q_i theta) for i = 0..m-1.
struct PerturbedAggregates {
  std::vector<Matrix> q;
  std::vector<Vector> xi;

  const Matrix& v() const { return q.front(); }
};

PerturbedAggregates perturbed_aggregates(const RpsState& state);

/// theta_hat = (sum psi_t phi_t^T)^{-1} sum psi_t Y_t; least squares when
/// psi = phi. Condition number >= 1e12 is a kConditioning error.
Vector correlation_estimate(const RegressionDataset& data, const DataMatrix& psi);

/// The (A_i, b_i, c_i) triple of perturbation i in 1..m-1.
LmiProblem lmi_problem(int i, const RpsState& state, const PerturbedAggregates& agg, const Vector& theta_hat);

struct OuterApproximation {
  Ellipsoid ellipsoid;
  std::vector<LmiSolution> solutions;  // one per perturbation i = 1..m-1
  int infinite_count = 0;              // infeasible or unbounded instances
};

/// Ellipsoid(theta_hat, V^T R^{-1} V, r) with r the q-th largest gamma*_i.
/// Non-finite gamma*_i (either sign) rank above every finite value.
OuterApproximation outer_approximation(const RpsState& state, double tol = 1e-10);

/// Chi-square quantile by bisection on the regularized lower incomplete
/// gamma function.
double chi_square_quantile(double p, int dof);

/// Classical ellipsoid: center theta_LS, shape Phi^T Phi / sigma^2, radius
/// chi2_d(p). The first overload estimates sigma^2 = RSS / (n - d).
Ellipsoid asymptotic_ellipsoid(const RegressionDataset& data, double p);
Ellipsoid asymptotic_ellipsoid(const RegressionDataset& data, double p, double noise_variance);
double noise_variance_estimate(const RegressionDataset& data);

}  // namespace rps
