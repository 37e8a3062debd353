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


#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lmi_oracle.hpp"
#include "rps/eoa.hpp"
#include "rps/harness.hpp"
#include "rps/perturbed_sums.hpp"
#include "test_support.hpp"

namespace rps {
namespace {

using test::rows;
using test::share;
using test::vec;

constexpr double kInf = std::numeric_limits<double>::infinity();

RpsConfig config(int m, int q, std::uint64_t seed) {
  RpsConfig c;
  c.m = m;
  c.q = q;
  c.seed = seed;
  return c;
}

LmiProblem problem(Matrix a, Vector b, double c) { return {std::move(a), std::move(b), c}; }

TEST(CorrelationEstimate, HandArithmetic) {
  const RegressionDataset data(rows({{1.0, 0.0}, {0.0, 1.0}}), vec({3.0, 4.0}));
  EXPECT_TRUE(correlation_estimate(data, data.phi()).isApprox(vec({3.0, 4.0}), 1e-15));
}

TEST(CorrelationEstimate, ExactWithoutNoise) {
  const auto data = test::fir_data(test::zero_noise(), 100, 3);
  EXPECT_LT((correlation_estimate(data, data.phi()) - vec({5.0, 1.0})).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(CorrelationEstimate, SolvesTheEstimatingEquation) {
  const auto data = test::fir_data(NoiseSpec::laplace_with_variance(0.0, 1.0), 250, 4);
  const Vector theta_hat = correlation_estimate(data, data.phi());
  const Vector eps = data.y() - data.phi() * theta_hat;
  EXPECT_LT((data.phi().transpose() * eps).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(CorrelationEstimate, NearSingularIsConditioningError) {
  const RegressionDataset data(rows({{1.0, 1.0}, {2.0, 2.0 + 1e-15}, {3.0, 3.0}}), vec({1.0, 2.0, 3.0}));
  EXPECT_RPS_ERROR(correlation_estimate(data, data.phi()), ErrorKind::kConditioning);
}

TEST(LmiProblem, ZeroPerturbationMatrix) {
  const auto data = share(test::fir_data(NoiseSpec::gaussian(0.0, 1.0), 80, 5));
  const auto state = RpsState::initialize(config(10, 1, 5), data);
  auto agg = perturbed_aggregates(state);
  agg.q[3] = Matrix::Zero(2, 2);
  const Vector theta_hat = correlation_estimate(*data, state.psi());
  const auto p = lmi_problem(3, state, agg, theta_hat);
  EXPECT_LT((p.a - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(p.b.cwiseAbs().maxCoeff(), 1e-12);
  const Matrix r_inv = state.shaping().inverse();
  EXPECT_NEAR(p.c, -agg.xi[3].dot(r_inv * agg.xi[3]), 1e-10 * std::abs(p.c) + 1e-14);
}

TEST(LmiProblem, ZeroNoiseGivesZeroLinearAndConstantTerms) {
  const auto data = share(test::fir_data(test::zero_noise(), 80, 6));
  const auto state = RpsState::initialize(config(10, 1, 6), data);
  const auto agg = perturbed_aggregates(state);
  const Vector theta_hat = correlation_estimate(*data, state.psi());
  for (int i = 1; i < 10; ++i) {
    const auto p = lmi_problem(i, state, agg, theta_hat);
    EXPECT_LT(p.b.norm(), 1e-9);
    EXPECT_LT(std::abs(p.c), 1e-9);
  }
}

TEST(LmiProblem, SymmetricAndIndexChecked) {
  const auto data = share(test::fir_data(NoiseSpec::laplace_with_variance(0.0, 1.0), 120, 7));
  const auto state = RpsState::initialize(config(10, 1, 7), data);
  const auto agg = perturbed_aggregates(state);
  const Vector theta_hat = correlation_estimate(*data, state.psi());
  for (int i = 1; i < 10; ++i) {
    const auto p = lmi_problem(i, state, agg, theta_hat);
    EXPECT_LT((p.a - p.a.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_RPS_ERROR(lmi_problem(0, state, agg, theta_hat), ErrorKind::kParameter);
  EXPECT_RPS_ERROR(lmi_problem(10, state, agg, theta_hat), ErrorKind::kParameter);
}

TEST(Aggregates, ReproduceShapedSums) {
  const auto data = share(test::fir_data(NoiseSpec::exponential_rate(0.5), 60, 8));
  const auto state = RpsState::initialize(config(10, 1, 8), data);
  const auto agg = perturbed_aggregates(state);
  const Vector theta = vec({4.0, 1.5});
  const auto s = s_values(theta, state);
  for (int i = 0; i < 10; ++i) {
    const Vector affine = state.r_half_inv() * (agg.xi[i] - agg.q[i] * theta);
    EXPECT_LT((affine - s[i]).norm(), 1e-10);
  }
}

TEST(SolveLmi, DegenerateBlockDiagonal) {
  const auto sol = solve_lmi(problem(Matrix::Identity(2, 2), Vector::Zero(2), 0.0), 1e-10);
  EXPECT_EQ(sol.status, LmiStatus::kOptimal);
  EXPECT_NEAR(sol.gamma, 0.0, 1e-12);
}

TEST(SolveLmi, PositiveConstantIsUnboundedBelow) {
  const auto sol = solve_lmi(problem(Matrix::Identity(2, 2), Vector::Zero(2), 1.0), 1e-10);
  EXPECT_EQ(sol.status, LmiStatus::kUnboundedBelow);
  EXPECT_EQ(sol.gamma, -kInf);
}

TEST(SolveLmi, NegativeConstantWithoutLinearTerm) {
  // gamma(lambda) = -lambda c is increasing, so the minimum sits at lambda = 1 / lambda_min(A).
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << 0.5, 2.0;
  const auto sol = solve_lmi(problem(a, Vector::Zero(2), -3.0), 1e-12);
  EXPECT_EQ(sol.status, LmiStatus::kOptimal);
  EXPECT_NEAR(sol.lambda, 2.0, 1e-6);
  EXPECT_NEAR(sol.gamma, 6.0, 1e-6);
}

TEST(SolveLmi, IndefiniteMatrixIsInfeasible) {
  Matrix a = Matrix::Zero(2, 2);
  a.diagonal() << -0.1, 1.0;
  const auto sol = solve_lmi(problem(a, vec({1.0, 1.0}), -1.0), 1e-10);
  EXPECT_EQ(sol.status, LmiStatus::kInfeasible);
  EXPECT_EQ(sol.gamma, kInf);
  EXPECT_EQ(solve_lmi(problem(-Matrix::Identity(2, 2), vec({0.0, 0.0}), -1.0), 1e-10).status,
            LmiStatus::kInfeasible);
}

TEST(SolveLmi, Errors) {
  Matrix asym(2, 2);
  asym << 1.0, 0.2, 0.0, 1.0;
  EXPECT_RPS_ERROR(solve_lmi(problem(asym, Vector::Zero(2), 0.0), 1e-10), ErrorKind::kValidation);
  EXPECT_RPS_ERROR(solve_lmi(problem(Matrix::Identity(2, 2), Vector::Zero(2), 0.0), 0.0), ErrorKind::kParameter);
  EXPECT_RPS_ERROR(solve_lmi(problem(Matrix::Identity(2, 2), Vector::Zero(3), 0.0), 1e-10), ErrorKind::kShape);
}

TEST(SolveLmi, MatchesClosedFormInOneDimension) {
  // d = 1: gamma(l) = l^2 b^2 / (l a - 1) - l c, minimized analytically.
  const double a = 0.6;
  const double b = 0.8;
  const double c = -1.5;
  const auto sol = solve_lmi(problem(Matrix::Constant(1, 1, a), Vector::Constant(1, b), c), 1e-12);
  double best = kInf;
  for (double l = 1.0 / a + 1e-6; l < 200.0; l += 1e-4) best = std::min(best, l * l * b * b / (l * a - 1.0) - l * c);
  EXPECT_NEAR(sol.gamma, best, 1e-6);
}

TEST(SolveLmi, MatchesFeasibilityGridOracle) {
  std::mt19937_64 gen(2024);
  for (int k = 0; k < 10; ++k) {
    const auto p = test::random_lmi_problem(gen);
    const auto sol = solve_lmi(p, 1e-10);
    const auto oracle = test::lmi_grid_oracle(p);
    ASSERT_EQ(sol.status, LmiStatus::kOptimal);
    EXPECT_NEAR(sol.gamma, oracle.gamma, 1e-2) << "instance " << k;
    // The returned pair must itself be feasible.
    EXPECT_GE(test::block_min_eigenvalue(p, sol.lambda, sol.gamma + 1e-9 * std::max(1.0, sol.gamma)), -1e-8);
  }
}

TEST(SolveLmi, ValueFunctionIsMidpointConvex) {
  std::mt19937_64 gen(99);
  for (int k = 0; k < 20; ++k) {
    const auto p = test::random_lmi_problem(gen);
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.a);
    const double lo = 1.0 / es.eigenvalues()[0];
    auto gamma = [&](double l) { return test::oracle_gamma_at(p, l); };
    for (double x = lo + 0.1; x < lo + 10.0; x += 0.7) {
      const double y = x + 1.3;
      EXPECT_LE(gamma(0.5 * (x + y)), 0.5 * (gamma(x) + gamma(y)) + 1e-7);
    }
  }
}

TEST(OuterApproximation, RadiusIsOrderStatistic) {
  const auto data = share(test::fir_data(NoiseSpec::laplace_with_variance(0.0, 1.0), 250, 10));
  const auto max_state = RpsState::initialize(config(10, 1, 10), data);
  const auto min_state = RpsState::initialize(config(10, 9, 10), data);
  const auto hi = outer_approximation(max_state);
  const auto lo = outer_approximation(min_state);
  ASSERT_EQ(hi.solutions.size(), 9u);
  double max_gamma = -kInf;
  double min_gamma = kInf;
  for (const auto& s : hi.solutions) max_gamma = std::max(max_gamma, s.gamma);
  for (const auto& s : lo.solutions) min_gamma = std::min(min_gamma, s.gamma);
  EXPECT_EQ(hi.ellipsoid.radius, std::max(0.0, max_gamma));
  EXPECT_EQ(lo.ellipsoid.radius, std::max(0.0, min_gamma));
  EXPECT_LE(lo.ellipsoid.radius, hi.ellipsoid.radius);
}

TEST(OuterApproximation, ContainsIndicatorRegionOnGrid) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto data = share(test::fir_data(NoiseSpec::laplace_with_variance(0.0, 1.0), 250, seed));
    const auto state = RpsState::initialize(config(10, 1, seed), data);
    const auto eoa = outer_approximation(state);
    const Grid grid = default_grid(*data, 4.0, 200);
    const Mask inside = grid_region(state, grid);
    ASSERT_GT(inside.count(), 0u);
    for (std::size_t iy = 0; iy < grid.ny; ++iy)
      for (std::size_t ix = 0; ix < grid.nx; ++ix)
        if (inside.at(ix, iy)) {
          ASSERT_TRUE(ellipsoid_contains(eoa.ellipsoid, grid.node(ix, iy)));
        }
  }
}

TEST(OuterApproximation, ZeroNoiseCollapsesToPoint) {
  const auto data = share(test::fir_data(test::zero_noise(), 100, 4));
  const auto eoa = outer_approximation(RpsState::initialize(config(10, 1, 4), data));
  EXPECT_LT(eoa.ellipsoid.radius, 1e-9);
  EXPECT_LT((eoa.ellipsoid.center - vec({5.0, 1.0})).norm(), 1e-9);
}

TEST(ChiSquare, ClosedFormForTwoDegrees) {
  EXPECT_NEAR(chi_square_quantile(0.9, 2), -2.0 * std::log(0.1), 1e-9);
  EXPECT_NEAR(chi_square_quantile(0.9, 2), 4.6052, 1e-3);
  EXPECT_LT(chi_square_quantile(1e-12, 2), 1e-10);
  EXPECT_NEAR(chi_square_quantile(0.95, 1), 3.841458820694124, 1e-9);
  EXPECT_RPS_ERROR(chi_square_quantile(1.0, 2), ErrorKind::kParameter);
  EXPECT_RPS_ERROR(chi_square_quantile(0.5, 0), ErrorKind::kParameter);
}

TEST(AsymptoticEllipsoid, ZeroNoiseIsDegenerate) {
  const auto data = test::fir_data(test::zero_noise(), 100, 4);
  EXPECT_NEAR(noise_variance_estimate(data), 0.0, 1e-20);
  const auto e = asymptotic_ellipsoid(data, 0.9);
  EXPECT_TRUE(ellipsoid_contains(e, e.center));
  EXPECT_FALSE(ellipsoid_contains(e, Vector(e.center + vec({1e-6, 0.0}))));
  const auto exact = asymptotic_ellipsoid(data, 0.9, 0.0);
  EXPECT_EQ(exact.radius, 0.0);
  EXPECT_TRUE(ellipsoid_contains(exact, exact.center));
  EXPECT_FALSE(ellipsoid_contains(exact, Vector(exact.center + vec({1e-9, 0.0}))));
}

TEST(AsymptoticEllipsoid, ShapeAndRadius) {
  const auto data = test::fir_data(NoiseSpec::gaussian(0.0, 1.0), 200, 4);
  const auto e = asymptotic_ellipsoid(data, 0.9, 2.0);
  const Matrix gram = data.phi().transpose() * data.phi();
  EXPECT_LT((e.shape * e.radius - gram * 4.605170185988091 / 2.0).cwiseAbs().maxCoeff() /
                (gram.cwiseAbs().maxCoeff() * e.radius),
            1e-6);
  EXPECT_RPS_ERROR(noise_variance_estimate(RegressionDataset(rows({{1.0, 0.0}, {0.0, 1.0}}), vec({1.0, 2.0}))),
                   ErrorKind::kDegreesOfFreedom);
}

TEST(Ellipsoid, Membership) {
  Ellipsoid e{vec({0.0, 0.0}), Matrix::Identity(2, 2), 1.0};
  EXPECT_TRUE(ellipsoid_contains(e, e.center));
  EXPECT_FALSE(ellipsoid_contains(e, vec({2.0, 0.0})));
  EXPECT_TRUE(ellipsoid_contains(e, vec({0.6, 0.6})));
  e.radius = kInf;
  EXPECT_TRUE(e.unbounded());
  EXPECT_TRUE(ellipsoid_contains(e, vec({1e9, -1e9})));
  e.radius = 0.0;
  EXPECT_TRUE(ellipsoid_contains(e, e.center));
}

TEST(Ellipsoid, AreaAndBoundary) {
  Matrix shape = Matrix::Zero(2, 2);
  shape.diagonal() << 1.0, 4.0;
  const Ellipsoid e{vec({1.0, -1.0}), shape, 9.0};
  EXPECT_NEAR(ellipse_area(e), std::numbers::pi * 9.0 / 2.0, 1e-12);
  for (const auto& p : ellipse_boundary(e, 64)) {
    const Vector x = vec({p[0], p[1]}) - e.center;
    EXPECT_NEAR(x.dot(shape * x), 9.0, 1e-9);
  }
}

TEST(Ellipsoid, JsonRoundTrip) {
  Matrix shape(2, 2);
  shape << 2.0, 0.3, 0.3, 1.0;
  for (double r : {0.1234567890123, kInf}) {
    const Ellipsoid e{vec({5.0, 1.0 / 3.0}), shape, r};
    const auto back = ellipsoid_from_json(ellipsoid_to_json(e));
    EXPECT_EQ(back.center, e.center);
    EXPECT_EQ(back.shape, e.shape);
    EXPECT_EQ(back.radius, e.radius);
  }
}

}  // namespace
}  // namespace rps
