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

#include "varbound/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "varbound/error.hpp"

namespace varbound {
namespace {

bool all_finite(std::span<const Complex> v) {
    return std::all_of(v.begin(), v.end(), [](const Complex &x) {
        return std::isfinite(x.real()) && std::isfinite(x.imag());
    });
}

void fix_phase(CVector &v) {
    double best = 0.0;
    for (const auto &x : v) {
        best = std::max(best, std::abs(x));
    }
    if (best == 0.0) {
        return;
    }
    // First component within 1e-12 of the maximum, so ties resolve by index.
    std::size_t k = 0;
    while (std::abs(v[k]) < best - 1e-12) {
        ++k;
    }
    const Complex phase = std::conj(v[k]) / std::abs(v[k]);
    for (auto &x : v) {
        x *= phase;
    }
    v[k] = std::abs(v[k]);
}

void orthonormalize_cluster(std::vector<CVector> &vectors, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t j = begin; j < i; ++j) {
            const Complex overlap = inner(vectors[j], vectors[i]);
            for (std::size_t k = 0; k < vectors[i].size(); ++k) {
                vectors[i][k] -= overlap * vectors[j][k];
            }
        }
        const double n = norm(vectors[i]);
        for (auto &x : vectors[i]) {
            x /= n;
        }
    }
}

// One two-sided rotation A <- J^dagger A J with J the identity outside the
// (p,q) block, and V <- V J.
void jacobi_rotate(CMatrix &a, CMatrix &v, std::size_t p, std::size_t q) {
    const Complex apq = a(p, q);
    const double g = std::abs(apq);
    const Complex e = apq / g;
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double theta = (aqq - app) / (2.0 * g);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    // J = diag phase (makes a_pq real) times a real Givens rotation.
    const Complex jpp = c;
    const Complex jpq = s;
    const Complex jqp = -s * std::conj(e);
    const Complex jqq = c * std::conj(e);

    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        const Complex akp = a(k, p);
        const Complex akq = a(k, q);
        a(k, p) = akp * jpp + akq * jqp;
        a(k, q) = akp * jpq + akq * jqq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Complex apk = a(p, k);
        const Complex aqk = a(q, k);
        a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
        a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = a(p, p).real();
    a(q, q) = a(q, q).real();

    for (std::size_t k = 0; k < n; ++k) {
        const Complex vkp = v(k, p);
        const Complex vkq = v(k, q);
        v(k, p) = vkp * jpp + vkq * jqp;
        v(k, q) = vkp * jpq + vkq * jqq;
    }
}

}  // namespace

PureState::PureState(CVector amplitudes, std::string label)
    : amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
    if (amplitudes_.empty() || !all_finite(amplitudes_)) {
        throw Error(ErrorKind::InvalidState, "state amplitudes must be finite and non-empty");
    }
    const double n = norm(amplitudes_);
    if (std::abs(n * n - 1.0) > 1e-12) {
        throw Error(ErrorKind::InvalidState, "state is not normalized (|Psi|^2 = " + std::to_string(n * n) + ")");
    }
}

PureState PureState::normalized(CVector amplitudes, std::string label) {
    if (amplitudes.empty() || !all_finite(amplitudes)) {
        throw Error(ErrorKind::InvalidState, "state amplitudes must be finite and non-empty");
    }
    const double n = norm(amplitudes);
    if (n == 0.0) {
        throw Error(ErrorKind::InvalidState, "cannot normalize the zero vector");
    }
    for (auto &x : amplitudes) {
        x /= n;
    }
    return PureState(std::move(amplitudes), std::move(label));
}

PureState PureState::basis(std::size_t dim, std::size_t k) {
    CVector v(dim);
    v.at(k) = 1.0;
    return PureState(std::move(v), "e" + std::to_string(k + 1));
}

Eigensystem jacobi_eigensystem(const CMatrix &hermitian) {
    if (!hermitian.is_square()) {
        throw Error(ErrorKind::DimensionMismatch, "eigensystem of a non-square matrix");
    }
    const std::size_t n = hermitian.rows();
    // Work on the exactly Hermitian part.
    CMatrix a = (hermitian + hermitian.adjoint()) * Complex{0.5};
    CMatrix v = CMatrix::identity(n);

    double frob = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            frob += std::norm(a(r, c));
        }
    }
    const double threshold = kJacobiTolerance * std::max(1.0, std::sqrt(frob));

    Eigensystem out;
    bool converged = false;
    for (int sweep = 0; sweep <= kJacobiMaxSweeps; ++sweep) {
        if (a.off_diagonal_norm() < threshold) {
            out.sweeps = sweep;
            converged = true;
            break;
        }
        if (sweep == kJacobiMaxSweeps) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) > 0.0) {
                    jacobi_rotate(a, v, p, q);
                }
            }
        }
    }
    if (!converged) {
        throw Error(ErrorKind::EigenFailure, "Jacobi iteration did not converge in " +
                                                 std::to_string(kJacobiMaxSweeps) + " sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });
    for (std::size_t idx : order) {
        out.values.push_back(a(idx, idx).real());
        out.vectors.push_back(v.column(idx));
    }

    for (std::size_t begin = 0; begin < n;) {
        std::size_t end = begin + 1;
        while (end < n && out.values[end] - out.values[end - 1] < kDegeneracyTolerance) {
            ++end;
        }
        if (end - begin > 1) {
            orthonormalize_cluster(out.vectors, begin, end);
        }
        begin = end;
    }
    for (auto &vec : out.vectors) {
        fix_phase(vec);
    }
    return out;
}

Observable make_observable(const CMatrix &matrix, std::string name, std::span<const double> eigen_order) {
    if (!matrix.is_square() || matrix.rows() < 2) {
        throw Error(ErrorKind::DimensionMismatch, "observable needs a square matrix with d >= 2");
    }
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (!all_finite(matrix.row(r))) {
            throw Error(ErrorKind::NonHermitian, "observable '" + name + "' has non-finite entries");
        }
    }
    const double skew = max_abs_diff(matrix, matrix.adjoint());
    if (skew > 1e-10) {
        throw Error(ErrorKind::NonHermitian,
                    "observable '" + name + "' deviates from its adjoint by " + std::to_string(skew));
    }

    Eigensystem es = jacobi_eigensystem(matrix);
    Observable obs;
    obs.matrix_ = matrix;
    obs.name_ = std::move(name);
    obs.eigenvalues_ = std::move(es.values);
    obs.eigenvectors_.reserve(es.vectors.size());
    for (auto &vec : es.vectors) {
        obs.eigenvectors_.push_back(PureState::normalized(std::move(vec)));
    }
    if (obs.reconstruction_error() > 1e-10) {
        throw Error(ErrorKind::EigenFailure, "eigensystem of '" + obs.name_ + "' does not reconstruct the matrix");
    }
    if (!eigen_order.empty()) {
        return obs.reordered(eigen_order);
    }
    return obs;
}

Observable Observable::reordered(std::span<const double> order) const {
    if (order.size() != eigenvalues_.size()) {
        throw Error(ErrorKind::InvalidPairing, "pairing order for '" + name_ + "' has " +
                                                   std::to_string(order.size()) + " entries, expected " +
                                                   std::to_string(eigenvalues_.size()));
    }
    std::vector<bool> used(eigenvalues_.size(), false);
    Observable out = *this;
    out.eigenvalues_.clear();
    out.eigenvectors_.clear();
    for (double target : order) {
        std::size_t pick = eigenvalues_.size();
        for (std::size_t i = 0; i < eigenvalues_.size(); ++i) {
            if (!used[i] && std::abs(eigenvalues_[i] - target) <= kDegeneracyTolerance) {
                pick = i;
                break;
            }
        }
        if (pick == eigenvalues_.size()) {
            throw Error(ErrorKind::InvalidPairing,
                        "value " + std::to_string(target) + " is not an unused eigenvalue of '" + name_ + "'");
        }
        used[pick] = true;
        out.eigenvalues_.push_back(eigenvalues_[pick]);
        out.eigenvectors_.push_back(eigenvectors_[pick]);
    }
    return out;
}

Observable Observable::sorted() const {
    std::vector<double> order(eigenvalues_.begin(), eigenvalues_.end());
    std::sort(order.begin(), order.end());
    return reordered(order);
}

double Observable::reconstruction_error() const {
    CMatrix sum(dim(), dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        sum += outer(eigenvectors_[i].amplitudes()) * Complex{eigenvalues_[i]};
    }
    return max_abs_diff(sum, matrix_);
}

double expectation(const PureState &state, const CMatrix &m) {
    if (m.rows() != state.dim() || m.cols() != state.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "operator and state dimensions differ");
    }
    return inner(state.amplitudes(), m * state.amplitudes()).real();
}

MomentStats moments(const PureState &state, const Observable &obs) {
    if (obs.dim() != state.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "observable '" + obs.name() + "' has dimension " +
                                                      std::to_string(obs.dim()) + ", state has " +
                                                      std::to_string(state.dim()));
    }
    double mean_proj = 0.0;
    double second_proj = 0.0;
    for (std::size_t i = 0; i < obs.dim(); ++i) {
        const double p = std::norm(inner(obs.eigenvectors()[i].amplitudes(), state.amplitudes()));
        mean_proj += obs.eigenvalues()[i] * p;
        second_proj += obs.eigenvalues()[i] * obs.eigenvalues()[i] * p;
    }

    const CVector m_psi = obs.matrix() * state.amplitudes();
    const double mean_quad = inner(state.amplitudes(), m_psi).real();
    const double scale = std::max(1.0, obs.matrix().max_abs());
    if (std::abs(mean_proj - mean_quad) > 1e-10 * scale) {
        throw Error(ErrorKind::InternalConsistency, "projective and quadratic-form means of '" + obs.name() +
                                                        "' disagree");
    }

    MomentStats out;
    out.mean = mean_proj;
    out.second_moment = second_proj;
    // ||(M - <M>) Psi||^2 is non-negative by construction.
    double var = 0.0;
    for (std::size_t k = 0; k < m_psi.size(); ++k) {
        var += std::norm(m_psi[k] - mean_proj * state[k]);
    }
    out.variance = var;
    return out;
}

double covariance(const PureState &state, const Observable &a, const Observable &b) {
    if (a.dim() != state.dim() || b.dim() != state.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "covariance operands differ in dimension");
    }
    const double mean_a = expectation(state, a.matrix());
    const double mean_b = expectation(state, b.matrix());
    CVector abar = a.matrix() * state.amplitudes();
    CVector bbar = b.matrix() * state.amplitudes();
    for (std::size_t k = 0; k < state.dim(); ++k) {
        abar[k] -= mean_a * state[k];
        bbar[k] -= mean_b * state[k];
    }
    // Re <Abar Psi|Bbar Psi> = 1/2 <{A,B}> - <A><B>
    return inner(abar, bbar).real();
}

CMatrix commutator(const Observable &a, const Observable &b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "commutator operands differ in dimension");
    }
    const CMatrix c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    const double scale = std::max(1.0, a.matrix().max_abs() * b.matrix().max_abs());
    if (max_abs_diff(c, c.adjoint() * Complex{-1.0}) > 1e-12 * scale) {
        throw Error(ErrorKind::InternalConsistency, "commutator is not anti-Hermitian");
    }
    return c;
}

CMatrix anticommutator(const Observable &a, const Observable &b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "anticommutator operands differ in dimension");
    }
    const CMatrix c = a.matrix() * b.matrix() + b.matrix() * a.matrix();
    const double scale = std::max(1.0, a.matrix().max_abs() * b.matrix().max_abs());
    if (!is_hermitian(c, 1e-12 * scale)) {
        throw Error(ErrorKind::InternalConsistency, "anticommutator is not Hermitian");
    }
    return c;
}

const Spin1Observables &builtin_spin1() {
    static const Spin1Observables spin1 = [] {
        const double r = 1.0 / std::sqrt(2.0);
        const CMatrix lx{{0.0, r, 0.0}, {r, 0.0, r}, {0.0, r, 0.0}};
        const CMatrix ly{{0.0, -kI * r, 0.0}, {kI * r, 0.0, -kI * r}, {0.0, kI * r, 0.0}};
        const CMatrix lz{{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, -1.0}};
        const CMatrix lp{{0.0, 0.0, -kI}, {0.0, 0.0, 0.0}, {kI, 0.0, 0.0}};
        return Spin1Observables{
            make_observable(lx, "Lx", kSpin1PairingOrder),
            make_observable(ly, "Ly", kSpin1PairingOrder),
            make_observable(lz, "Lz", kSpin1PairingOrder),
            make_observable(lp, "Lp", kSpin1PairingOrder),
        };
    }();
    return spin1;
}

}  // namespace varbound
