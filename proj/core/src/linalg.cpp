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

#include "varbound/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "varbound/error.hpp"

namespace varbound {

std::string_view error_kind_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonHermitian: return "NonHermitian";
        case ErrorKind::EigenFailure: return "EigenFailure";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::InvalidState: return "InvalidState";
        case ErrorKind::InternalConsistency: return "InternalConsistency";
        case ErrorKind::IncompleteBasis: return "IncompleteBasis";
        case ErrorKind::InvalidPairing: return "InvalidPairing";
        case ErrorKind::BadParameterCount: return "BadParameterCount";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::LeakageDetected: return "LeakageDetected";
        case ErrorKind::NotProjectiveRealization: return "NotProjectiveRealization";
        case ErrorKind::BadProbabilities: return "BadProbabilities";
        case ErrorKind::ZeroCounts: return "ZeroCounts";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

CMatrix::CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto &r : rows) {
        if (r.size() != cols_) {
            throw Error(ErrorKind::DimensionMismatch, "ragged matrix initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

CMatrix CMatrix::identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

CMatrix CMatrix::diagonal(std::span<const Complex> entries) {
    CMatrix m(entries.size(), entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        m(i, i) = entries[i];
    }
    return m;
}

CMatrix CMatrix::from_columns(std::span<const CVector> columns) {
    if (columns.empty()) {
        return {};
    }
    const std::size_t n = columns.front().size();
    CMatrix m(n, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != n) {
            throw Error(ErrorKind::DimensionMismatch, "columns of unequal length");
        }
        for (std::size_t r = 0; r < n; ++r) {
            m(r, c) = columns[c][r];
        }
    }
    return m;
}

CVector CMatrix::row(std::size_t r) const {
    return CVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                   data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

CVector CMatrix::column(std::size_t c) const {
    CVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        v[r] = (*this)(r, c);
    }
    return v;
}

CMatrix CMatrix::adjoint() const {
    CMatrix m(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            m(c, r) = std::conj((*this)(r, c));
        }
    }
    return m;
}

CMatrix CMatrix::operator*(const CMatrix &rhs) const {
    if (cols_ != rhs.rows_) {
        throw Error(ErrorKind::DimensionMismatch, "matrix product shape mismatch");
    }
    CMatrix m(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const Complex a = (*this)(r, k);
            if (a == Complex{}) {
                continue;
            }
            for (std::size_t c = 0; c < rhs.cols_; ++c) {
                m(r, c) += a * rhs(k, c);
            }
        }
    }
    return m;
}

CVector CMatrix::operator*(std::span<const Complex> v) const {
    if (cols_ != v.size()) {
        throw Error(ErrorKind::DimensionMismatch, "matrix-vector shape mismatch");
    }
    CVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        Complex acc{};
        for (std::size_t c = 0; c < cols_; ++c) {
            acc += (*this)(r, c) * v[c];
        }
        out[r] = acc;
    }
    return out;
}

CMatrix CMatrix::operator+(const CMatrix &rhs) const {
    CMatrix m = *this;
    m += rhs;
    return m;
}

CMatrix &CMatrix::operator+=(const CMatrix &rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) {
        throw Error(ErrorKind::DimensionMismatch, "matrix sum shape mismatch");
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += rhs.data_[i];
    }
    return *this;
}

CMatrix CMatrix::operator-(const CMatrix &rhs) const {
    return *this + rhs * Complex{-1.0};
}

CMatrix CMatrix::operator*(Complex s) const {
    CMatrix m = *this;
    for (auto &x : m.data_) {
        x *= s;
    }
    return m;
}

double CMatrix::max_abs() const {
    double best = 0.0;
    for (const auto &x : data_) {
        best = std::max(best, std::abs(x));
    }
    return best;
}

double CMatrix::off_diagonal_norm() const {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (r != c) {
                acc += std::norm((*this)(r, c));
            }
        }
    }
    return std::sqrt(acc);
}

CMatrix CMatrix::select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
    CMatrix m(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            m(r, c) = (*this)(rows[r], cols[c]);
        }
    }
    return m;
}

std::string CMatrix::to_string(int precision) const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision);
    for (std::size_t r = 0; r < rows_; ++r) {
        out << (r == 0 ? "[[" : " [");
        for (std::size_t c = 0; c < cols_; ++c) {
            const Complex x = (*this)(r, c);
            // Print -0.000000 as 0.000000.
            const double re = std::abs(x.real()) < 0.5 * std::pow(10.0, -precision) ? 0.0 : x.real();
            const double im = std::abs(x.imag()) < 0.5 * std::pow(10.0, -precision) ? 0.0 : x.imag();
            out << std::setw(precision + 4) << re << (im < 0 ? "-" : "+") << std::abs(im) << "i";
            if (c + 1 < cols_) {
                out << ", ";
            }
        }
        out << (r + 1 == rows_ ? "]]" : "]\n");
    }
    return out.str();
}

double max_abs_diff(const CMatrix &a, const CMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "max_abs_diff shape mismatch");
    }
    double best = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            best = std::max(best, std::abs(a(r, c) - b(r, c)));
        }
    }
    return best;
}

bool is_unitary(const CMatrix &m, double tol) {
    if (!m.is_square()) {
        return false;
    }
    return max_abs_diff(m.adjoint() * m, CMatrix::identity(m.rows())) <= tol;
}

bool is_hermitian(const CMatrix &m, double tol) {
    return m.is_square() && max_abs_diff(m, m.adjoint()) <= tol;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
    assert(a.size() == b.size());
    Complex acc{};
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::conj(a[i]) * b[i];
    }
    return acc;
}

double norm(std::span<const Complex> v) {
    double acc = 0.0;
    for (const auto &x : v) {
        acc += std::norm(x);
    }
    return std::sqrt(acc);
}

CMatrix outer(std::span<const Complex> v) {
    CMatrix m(v.size(), v.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
        for (std::size_t c = 0; c < v.size(); ++c) {
            m(r, c) = v[r] * std::conj(v[c]);
        }
    }
    return m;
}

}  // namespace varbound
