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

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varbound/hermitian.hpp"
#include "varbound/linalg.hpp"

namespace varbound {

enum class Relation { Eq1 = 1, Eq2, Eq3, Eq4, Eq5, Eq6, Eq7 };
enum class Direction { Lower, Upper };

inline constexpr std::array<Relation, 7> kAllRelations = {Relation::Eq1, Relation::Eq2, Relation::Eq3, Relation::Eq4,
                                                          Relation::Eq5, Relation::Eq6, Relation::Eq7};

/// "eq1" .. "eq7"
std::string_view relation_name(Relation r) noexcept;
std::optional<Relation> parse_relation(std::string_view name) noexcept;
constexpr std::size_t relation_index(Relation r) noexcept { return static_cast<std::size_t>(r) - 1; }

/// Absolute tolerance on every slack.
inline constexpr double kSlackTolerance = 1e-9;
/// Threshold below which the eq7 variances or denominator count as zero.
inline constexpr double kReverseEpsilon = 1e-9;

/// Complete orthonormal basis {|psi_n>} of C^d.
class OrthonormalBasis {
  public:
    /// Throws IncompleteBasis unless there are exactly d vectors of length d
    /// with <psi_m|psi_n> = delta_mn within 1e-10.
    explicit OrthonormalBasis(std::vector<CVector> vectors);

    static OrthonormalBasis computational(std::size_t dim);
    /// Columns of a unitary matrix.
    static OrthonormalBasis from_columns(const CMatrix &unitary);
    /// Eigenvectors of an observable, in its pairing order.
    static OrthonormalBasis eigenbasis(const Observable &obs);

    std::size_t dim() const noexcept { return vectors_.size(); }
    std::span<const CVector> vectors() const noexcept { return vectors_; }
    const CVector &operator[](std::size_t n) const { return vectors_[n]; }
    /// Matrix whose columns are the basis vectors.
    CMatrix as_matrix() const { return CMatrix::from_columns(vectors_); }

  private:
    std::vector<CVector> vectors_;
};

/// Per-basis-vector amplitudes of the basis-dependent bounds:
///   c_n = <Psi|A|psi_n><psi_n|B|Psi>,  d_n = <Psi|psi_n><psi_n|B|Psi>,
///   e_n = <psi_n|A|Psi>,  f_n = <psi_n|Psi>,  g_n = <psi_n|B|Psi>.
struct BasisBoundTerms {
    std::vector<Complex> c, d, e, f, g;
};

BasisBoundTerms basis_bound_terms(const PureState &state, const Observable &a, const Observable &b,
                                  const OrthonormalBasis &basis);

/// Eigenvalue enumeration used to pair the i-th eigenpair of A with the i-th
/// of B in eq3 and eq6. An empty order means ascending eigenvalues.
struct EigenPairing {
    std::vector<double> a_order;
    std::vector<double> b_order;

    /// (-1, 1, 0) for both observables.
    static EigenPairing spin1_default();
    static EigenPairing ascending() { return {}; }
    /// The same enumeration for both observables.
    static EigenPairing both(std::vector<double> order) { return {order, order}; }
};

struct FidelityTerms {
    std::vector<double> a_values;     ///< a_i in pairing order
    std::vector<double> b_values;     ///< b_i in pairing order
    std::vector<double> a_shifted;    ///< a_i - <A>
    std::vector<double> b_shifted;    ///< b_i - <B>
    std::vector<double> fidelity_a;   ///< |<Psi|a_i>|^2
    std::vector<double> fidelity_b;   ///< |<Psi|b_i>|^2
    std::vector<std::size_t> a_index; ///< position of a_i in the ascending spectrum
    std::vector<std::size_t> b_index;
};

FidelityTerms fidelity_terms(const PureState &state, const Observable &a, const Observable &b,
                             const EigenPairing &pairing);

struct BoundResult {
    Relation relation = Relation::Eq1;
    Direction direction = Direction::Lower;
    double lhs = 0.0;
    double rhs = 0.0;
    /// lhs - rhs for lower bounds, rhs - lhs for upper bounds.
    double slack = 0.0;
    bool satisfied = false;
    /// False only for eq7 when its variances or denominator vanish; rhs and
    /// slack are NaN then and `undefined_reason` names the cause.
    bool defined = true;
    std::string undefined_reason;
    std::optional<BasisBoundTerms> basis_terms;
    std::optional<FidelityTerms> fidelity_terms;

    bool tight() const noexcept { return defined && std::abs(slack) <= kSlackTolerance; }
};

BoundResult eq1_product_bound(const PureState &state, const Observable &a, const Observable &b);
BoundResult eq2_product_bound(const PureState &state, const Observable &a, const Observable &b,
                              const OrthonormalBasis &basis);
BoundResult eq3_product_bound(const PureState &state, const Observable &a, const Observable &b,
                              const EigenPairing &pairing);
BoundResult eq4_sum_bound(const PureState &state, const Observable &a, const Observable &b);
BoundResult eq5_sum_bound(const PureState &state, const Observable &a, const Observable &b,
                          const OrthonormalBasis &basis);
BoundResult eq6_sum_bound(const PureState &state, const Observable &a, const Observable &b,
                          const EigenPairing &pairing);
/// Reverse (upper) bound on the sum of variances. Never throws for degenerate
/// inputs; returns an undefined result instead.
BoundResult eq7_reverse_bound(const PureState &state, const Observable &a, const Observable &b);

struct UncertaintyReport {
    std::string label;
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_commutator = 0.0;      ///< <-i[A,B]>  (<Lz> for spin-1)
    double mean_anticommutator = 0.0;  ///< <{A,B}>    (<L'> for spin-1)
    double second_a = 0.0;
    double second_b = 0.0;
    double var_a = 0.0;
    double var_b = 0.0;
    double product_lhs = 0.0;
    double sum_lhs = 0.0;
    std::array<BoundResult, 7> results;

    const BoundResult &at(Relation r) const { return results[relation_index(r)]; }
    /// Every defined relation satisfied.
    bool all_satisfied() const;
};

UncertaintyReport evaluate_all(const PureState &state, const Observable &a, const Observable &b,
                               const OrthonormalBasis &basis, const EigenPairing &pairing);

/// Basis-dependent right-hand sides from the shifted vectors Abar|Psi>, Bbar|Psi>
/// and a basis given as matrix columns. Used by the basis search, which
/// evaluates them many thousands of times.
double eq2_rhs_from_columns(std::span<const Complex> abar_psi, std::span<const Complex> bbar_psi,
                            const CMatrix &basis_columns);
double eq5_rhs_from_columns(std::span<const Complex> abar_psi, std::span<const Complex> bbar_psi,
                            const CMatrix &basis_columns);

/// (A - <A>)|Psi>
CVector shifted_vector(const PureState &state, const Observable &obs);

/// The spin-1 forms where every term is an expectation value of Lx, Lx^2, Ly,
/// Ly^2, Lz or L'. They let the sampled pipeline work from measured moments.
namespace spin1_forms {

struct Spin1Moments {
    double lx = 0.0;
    double lx2 = 0.0;
    double ly = 0.0;
    double ly2 = 0.0;
    double lz = 0.0;
    double lp = 0.0;
};

Spin1Moments from_state(const PureState &state);

double var_lx(const Spin1Moments &m);
double var_ly(const Spin1Moments &m);
double product_lhs(const Spin1Moments &m);
double sum_lhs(const Spin1Moments &m);
/// |<Lz>/2|^2 + |<L'>/2 - <Lx><Ly>|^2
double eq1_rhs(const Spin1Moments &m);
/// 1/2 (<Lx^2> + <Ly^2> + <L'> - (<Lx> + <Ly>)^2)
double eq4_rhs(const Spin1Moments &m);

struct ReverseRhs {
    bool defined = true;
    double value = 0.0;
    std::string reason;
};
ReverseRhs eq7_rhs(const Spin1Moments &m);

/// (sum_n |C_n - D_n <A>|)^2, valid when <B> = 0.
double eq2_rhs(const BasisBoundTerms &t, double mean_a);
/// 1/2 sum_n (|E_n - F_n <A>| + |G_n|)^2, valid when <B> = 0.
double eq5_rhs(const BasisBoundTerms &t, double mean_a);

}  // namespace spin1_forms

}  // namespace varbound
