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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "varbound/hermitian.hpp"
#include "varbound/linalg.hpp"

namespace varbound::testing {

/// (cos t, -sin t, 0)
inline PureState family_state(double theta) {
    return PureState(CVector{std::cos(theta), -std::sin(theta), 0.0});
}

inline double family_theta(int j) { return j * std::numbers::pi / 10.0; }

/// Uniformly distributed pure state: normalized complex Gaussian vector.
inline PureState random_state(std::size_t d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CVector v(d);
    for (auto &z : v) {
        const double re = g(rng);
        const double im = g(rng);
        z = Complex(re, im);
    }
    return PureState::normalized(std::move(v));
}

inline CMatrix random_hermitian(std::size_t d, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix m(d, d);
    for (std::size_t r = 0; r < d; ++r) {
        m(r, r) = g(rng);
        for (std::size_t c = r + 1; c < d; ++c) {
            const double re = g(rng);
            const double im = g(rng);
            m(r, c) = Complex(re, im);
            m(c, r) = std::conj(m(r, c));
        }
    }
    return m;
}

/// Values for the state family at theta = j pi / 10, evaluated symbolically
/// (sympy, exact radicals) and frozen to 20 significant digits.
struct OracleRow {
    int j;
    double mean_lx, mean_lz, var_lx, var_ly, lhs_prod, rhs_eq1, rhs_eq2_canon, rhs_eq3;
    double lhs_sum, rhs_eq4, rhs_eq5_canon, rhs_eq6, rhs_eq7;
};

inline constexpr OracleRow kOracle[] = {
    {0, 0.0, 1.0, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 1.0, 0.5, 1.0, 1.0, 1.0},
    {1, -0.41562693777745342859, 0.90450849718747371205, 0.375, 0.54774575140626314397, 0.20540465677734867899,
     0.20453390537108553502, 0.20453390537108553502, 0.16213506956542270476, 0.92274575140626314397,
     0.46137287570313157199, 0.91362712429686842801, 0.86403286820974093052, 0.93905969229979129485},
    {3, -0.67249851196395732696, 0.34549150281252628795, 0.375, 0.82725424859373685603, 0.31022034322265132101,
     0.029841094628914464984, 0.23209534322265132101, 0.23194492461668833390, 1.2022542485937368560,
     0.60112712429686842801, 1.0828898700780789961, 1.0827337320346447314, 1.2905599468088643122},
    {5, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 2.0, 1.0, 2.0, 2.0, 2.0},
    {10, 0.0, 1.0, 0.5, 0.5, 0.25, 0.25, 0.25, 0.25, 1.0, 0.5, 1.0, 1.0, 1.0},
};

}  // namespace varbound::testing
