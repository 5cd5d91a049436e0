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
#include <span>
#include <string>
#include <vector>

#include "varbound/linalg.hpp"

namespace varbound {

/// Normalized pure state |Psi> in C^d.
class PureState {
  public:
    /// Throws InvalidState unless every amplitude is finite and the norm is 1 within 1e-12.
    explicit PureState(CVector amplitudes, std::string label = {});

    /// Rescales to unit norm first; throws InvalidState for a zero or non-finite vector.
    static PureState normalized(CVector amplitudes, std::string label = {});
    /// Computational basis vector e_k.
    static PureState basis(std::size_t dim, std::size_t k);

    std::size_t dim() const noexcept { return amplitudes_.size(); }
    std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    const Complex &operator[](std::size_t i) const { return amplitudes_[i]; }
    const std::string &label() const noexcept { return label_; }

    /// rho = |Psi><Psi|
    CMatrix density() const { return outer(amplitudes_); }

  private:
    CVector amplitudes_;
    std::string label_;
};

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues, columns
/// re-orthonormalized inside each degenerate cluster, and each vector's
/// largest-magnitude component made real positive.
struct Eigensystem {
    std::vector<double> values;
    std::vector<CVector> vectors;
    int sweeps = 0;
};

inline constexpr double kJacobiTolerance = 1e-14;
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kDegeneracyTolerance = 1e-9;

/// Cyclic complex Jacobi. Stops once the off-diagonal Frobenius mass drops
/// below kJacobiTolerance * max(1, ||M||_F); throws EigenFailure after
/// kJacobiMaxSweeps sweeps.
Eigensystem jacobi_eigensystem(const CMatrix &hermitian);

/// Hermitian matrix with its eigensystem. Immutable; the eigenpairs are kept in
/// a caller-chosen order (the "pairing order") rather than sorted.
class Observable {
  public:
    const CMatrix &matrix() const noexcept { return matrix_; }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    std::span<const PureState> eigenvectors() const noexcept { return eigenvectors_; }
    const std::string &name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return eigenvalues_.size(); }

    /// Same observable with eigenpairs permuted so that eigenvalues()[i]
    /// matches order[i] within kDegeneracyTolerance. Throws InvalidPairing when
    /// `order` is not a rearrangement of the spectrum.
    Observable reordered(std::span<const double> order) const;

    /// Eigenpairs sorted by ascending eigenvalue.
    Observable sorted() const;

    /// Largest |M - sum_i m_i |m_i><m_i||.
    double reconstruction_error() const;

  private:
    friend Observable make_observable(const CMatrix &, std::string, std::span<const double>);
    Observable() = default;

    CMatrix matrix_;
    std::vector<double> eigenvalues_;
    std::vector<PureState> eigenvectors_;
    std::string name_;
};

/// Validates Hermiticity (max |M - M^dagger| <= 1e-10, else NonHermitian) and
/// solves the eigensystem. With an empty `eigen_order` the eigenpairs stay in
/// ascending order.
Observable make_observable(const CMatrix &matrix, std::string name, std::span<const double> eigen_order = {});

struct MomentStats {
    double mean = 0.0;           ///< <O>
    double second_moment = 0.0;  ///< <O^2>
    double variance = 0.0;       ///< <O^2> - <O>^2
};

/// Mean via the projective route sum_i m_i |<m_i|Psi>|^2, cross-checked against
/// the quadratic form <Psi|M|Psi> to 1e-10 (InternalConsistency otherwise).
MomentStats moments(const PureState &state, const Observable &obs);

/// Re <Psi|M|Psi> for an arbitrary square matrix.
double expectation(const PureState &state, const CMatrix &m);

/// Cov(A,B) = 1/2 <{A,B}> - <A><B>.
double covariance(const PureState &state, const Observable &a, const Observable &b);

/// AB - BA, verified anti-Hermitian.
CMatrix commutator(const Observable &a, const Observable &b);
/// AB + BA, verified Hermitian.
CMatrix anticommutator(const Observable &a, const Observable &b);

/// The eigenvalue enumeration -1, 1, 0 used for the spin-1 observables.
inline constexpr double kSpin1PairingOrder[] = {-1.0, 1.0, 0.0};

struct Spin1Observables {
    Observable lx;
    Observable ly;
    Observable lz;
    Observable lp;  ///< L' = Lx Ly + Ly Lx
};

/// Spin-1 angular momentum components and L', eigenpairs in kSpin1PairingOrder.
const Spin1Observables &builtin_spin1();

}  // namespace varbound
