// Copyright 2026 The varbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "varbound/bounds.hpp"
#include "varbound/hermitian.hpp"
#include "varbound/linalg.hpp"

namespace varbound {

/// Coordinates on U(d): d(d-1)/2 Givens angles, then d(d-1)/2 Givens phases,
/// then d-1 diagonal phases. All zero gives the identity.
struct UnitaryParams {
    std::vector<double> angles;

    static std::size_t count_for(std::size_t d) noexcept { return d * (d - 1) + (d - 1); }
    static UnitaryParams zeros(std::size_t d) { return {std::vector<double>(count_for(d), 0.0)}; }
};

/// Product of complex Givens rotations over the pairs (p, q), p < q, in
/// lexicographic order, times diag(1, e^{i delta_1}, ...).
/// Throws BadParameterCount when the vector length does not match d.
CMatrix unitary_from_params(const UnitaryParams &params, std::size_t d);

/// Haar-distributed basis: complex Gaussian matrix, QR by modified
/// Gram-Schmidt, R diagonal made positive. Deterministic per seed.
OrthonormalBasis haar_basis(std::size_t d, std::uint64_t seed);

struct OptimizerConfig {
    int restarts = 16;
    int max_iters = 2000;
    double initial_step = 0.3;
    double shrink_factor = 0.5;
    double tolerance = 1e-8;
    std::uint64_t seed = 7;
    /// Run restarts on separate threads. The result does not depend on it.
    bool parallel = true;

    /// Throws InvalidConfig.
    void validate() const;
};

struct OptimizationTrace {
    /// best_values[r][k]: best objective of restart r after iteration k
    /// (k = 0 is the starting basis).
    std::vector<std::vector<double>> best_values;
    std::vector<double> initial_values;
    std::size_t winner = 0;
};

enum class BasisObjective { Eq2, Eq5 };

struct OptimizationResult {
    OrthonormalBasis basis;
    double best_value = 0.0;
    double computational_value = 0.0;
    OptimizationTrace trace;
};

/// Maximizes the basis-dependent right-hand side over orthonormal bases by
/// compass search with random restarts.
OptimizationResult optimize_bound(BasisObjective objective, const PureState &state, const Observable &a,
                                  const Observable &b, const OptimizerConfig &config = {});

}  // namespace varbound
