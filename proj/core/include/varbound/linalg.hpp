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

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace varbound {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

inline constexpr Complex kI{0.0, 1.0};

/// Dense row-major complex matrix. Sized for the handful of modes and levels
/// this library deals with (d <= 8); no attempt at blocking or SIMD.
class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    CMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static CMatrix identity(std::size_t n);
    static CMatrix zero(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }
    /// Diagonal matrix from the given entries.
    static CMatrix diagonal(std::span<const Complex> entries);
    /// Matrix whose columns are the given vectors (all of equal length).
    static CMatrix from_columns(std::span<const CVector> columns);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    Complex &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    CVector row(std::size_t r) const;
    CVector column(std::size_t c) const;

    CMatrix adjoint() const;
    CMatrix operator*(const CMatrix &rhs) const;
    CVector operator*(std::span<const Complex> v) const;
    CMatrix operator+(const CMatrix &rhs) const;
    CMatrix operator-(const CMatrix &rhs) const;
    CMatrix operator*(Complex s) const;
    CMatrix &operator+=(const CMatrix &rhs);

    /// Largest entry magnitude.
    double max_abs() const;
    /// Frobenius norm of the strictly off-diagonal part (square matrices only).
    double off_diagonal_norm() const;

    /// Sub-matrix picking the listed rows and columns in order.
    CMatrix select(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;

    std::string to_string(int precision = 6) const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Complex> data_;
};

inline CMatrix operator*(Complex s, const CMatrix &m) { return m * s; }

/// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const CMatrix &a, const CMatrix &b);
bool is_unitary(const CMatrix &m, double tol);
bool is_hermitian(const CMatrix &m, double tol);

/// <a|b>, conjugating the first argument.
Complex inner(std::span<const Complex> a, std::span<const Complex> b);
double norm(std::span<const Complex> v);
/// |v><v|
CMatrix outer(std::span<const Complex> v);

}  // namespace varbound
