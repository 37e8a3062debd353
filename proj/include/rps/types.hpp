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

#include <Eigen/Core>

namespace rps {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// n x d data matrices are stored row-major so that a regressor phi_t is a
/// contiguous row.
using DataMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// phi_t^T theta, accumulated left to right. The simulator and the residual
/// computation both go through this so that zero-noise data gives exactly
/// zero residuals at the true parameter.
inline double row_dot(const DataMatrix& phi, Eigen::Index t, const Vector& theta) {
  const double* row = phi.data() + t * phi.cols();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < phi.cols(); ++j) acc += row[j] * theta[j];
  return acc;
}

}  // namespace rps
