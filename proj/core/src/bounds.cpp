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

#include "varbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "varbound/error.hpp"

namespace varbound {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_same_dim(const PureState &state, const Observable &a, const Observable &b) {
    if (a.dim() != state.dim() || b.dim() != state.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "state has dimension " + std::to_string(state.dim()) +
                                                      ", observables have " + std::to_string(a.dim()) + " and " +
                                                      std::to_string(b.dim()));
    }
}

void require_basis_dim(const PureState &state, const OrthonormalBasis &basis) {
    if (basis.dim() != state.dim()) {
        throw Error(ErrorKind::IncompleteBasis, "basis has " + std::to_string(basis.dim()) +
                                                    " vectors for a state of dimension " +
                                                    std::to_string(state.dim()));
    }
}

// Shared per-(state, A, B) quantities so that evaluate_all computes them once.
struct Context {
    const PureState &state;
    const Observable &a;
    const Observable &b;
    MomentStats ma;
    MomentStats mb;
    CVector abar_psi;
    CVector bbar_psi;

    Context(const PureState &s, const Observable &oa, const Observable &ob)
        : state(s), a(oa), b(ob), ma(moments(s, oa)), mb(moments(s, ob)) {
        abar_psi = shifted_vector(s, oa);
        bbar_psi = shifted_vector(s, ob);
    }

    double product_lhs() const { return ma.variance * mb.variance; }
    double sum_lhs() const { return ma.variance + mb.variance; }
};

BoundResult finish(Relation relation, Direction direction, double lhs, double rhs) {
    BoundResult r;
    r.relation = relation;
    r.direction = direction;
    r.lhs = lhs;
    r.rhs = rhs;
    r.slack = direction == Direction::Lower ? lhs - rhs : rhs - lhs;
    r.satisfied = r.slack >= -kSlackTolerance;
    return r;
}

BoundResult eq1_impl(const Context &ctx) {
    // <[A,B]> is purely imaginary and <{A,B}> real for Hermitian A, B.
    const Complex comm = inner(ctx.state.amplitudes(), commutator(ctx.a, ctx.b) * ctx.state.amplitudes());
    const double anti = expectation(ctx.state, anticommutator(ctx.a, ctx.b));
    const double rhs = std::norm(0.5 * comm) + std::pow(0.5 * anti - ctx.ma.mean * ctx.mb.mean, 2);
    return finish(Relation::Eq1, Direction::Lower, ctx.product_lhs(), rhs);
}

BoundResult eq2_impl(const Context &ctx, const OrthonormalBasis &basis) {
    require_basis_dim(ctx.state, basis);
    const double rhs = eq2_rhs_from_columns(ctx.abar_psi, ctx.bbar_psi, basis.as_matrix());
    BoundResult r = finish(Relation::Eq2, Direction::Lower, ctx.product_lhs(), rhs);
    r.basis_terms = basis_bound_terms(ctx.state, ctx.a, ctx.b, basis);
    if (std::abs(ctx.mb.mean) < 1e-10) {
        const double rewritten = spin1_forms::eq2_rhs(*r.basis_terms, ctx.ma.mean);
        if (std::abs(rewritten - rhs) > 1e-10) {
            throw Error(ErrorKind::InternalConsistency, "eq2 general and C_n/D_n forms disagree");
        }
    }
    return r;
}

double fidelity_product_sum(const FidelityTerms &t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.a_values.size(); ++i) {
        acc += std::sqrt(t.fidelity_a[i]) * std::sqrt(t.fidelity_b[i]) * t.a_shifted[i] * t.b_shifted[i];
    }
    return acc;
}

double fidelity_sum_of_squares(const FidelityTerms &t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.a_values.size(); ++i) {
        const double x = t.a_shifted[i] * std::sqrt(t.fidelity_a[i]) + t.b_shifted[i] * std::sqrt(t.fidelity_b[i]);
        acc += x * x;
    }
    return 0.5 * acc;
}

BoundResult eq3_impl(const Context &ctx, const EigenPairing &pairing) {
    FidelityTerms t = fidelity_terms(ctx.state, ctx.a, ctx.b, pairing);
    const double s = fidelity_product_sum(t);
    BoundResult r = finish(Relation::Eq3, Direction::Lower, ctx.product_lhs(), s * s);
    r.fidelity_terms = std::move(t);
    return r;
}

BoundResult eq4_impl(const Context &ctx) {
    CVector sum(ctx.abar_psi.size());
    for (std::size_t k = 0; k < sum.size(); ++k) {
        sum[k] = ctx.abar_psi[k] + ctx.bbar_psi[k];
    }
    const double var_sum = norm(sum) * norm(sum);
    return finish(Relation::Eq4, Direction::Lower, ctx.sum_lhs(), 0.5 * var_sum);
}

BoundResult eq5_impl(const Context &ctx, const OrthonormalBasis &basis) {
    require_basis_dim(ctx.state, basis);
    const double rhs = eq5_rhs_from_columns(ctx.abar_psi, ctx.bbar_psi, basis.as_matrix());
    BoundResult r = finish(Relation::Eq5, Direction::Lower, ctx.sum_lhs(), rhs);
    r.basis_terms = basis_bound_terms(ctx.state, ctx.a, ctx.b, basis);
    if (std::abs(ctx.mb.mean) < 1e-10) {
        const double rewritten = spin1_forms::eq5_rhs(*r.basis_terms, ctx.ma.mean);
        if (std::abs(rewritten - rhs) > 1e-10) {
            throw Error(ErrorKind::InternalConsistency, "eq5 general and E_n/F_n/G_n forms disagree");
        }
    }
    return r;
}

BoundResult eq6_impl(const Context &ctx, const EigenPairing &pairing) {
    FidelityTerms t = fidelity_terms(ctx.state, ctx.a, ctx.b, pairing);
    BoundResult r = finish(Relation::Eq6, Direction::Lower, ctx.sum_lhs(), fidelity_sum_of_squares(t));
    r.fidelity_terms = std::move(t);
    return r;
}

BoundResult undefined_reverse(double lhs, std::string reason) {
    BoundResult r;
    r.relation = Relation::Eq7;
    r.direction = Direction::Upper;
    r.lhs = lhs;
    r.rhs = kNaN;
    r.slack = kNaN;
    r.satisfied = false;
    r.defined = false;
    r.undefined_reason = std::move(reason);
    return r;
}

// 2 Var(A-B) / (1 - Cov/(dA dB)) - 2 dA dB, or nullopt-style reason.
spin1_forms::ReverseRhs reverse_rhs(double var_a, double var_b, double cov, double var_diff) {
    const double da = std::sqrt(std::max(0.0, var_a));
    const double db = std::sqrt(std::max(0.0, var_b));
    if (da <= kReverseEpsilon || db <= kReverseEpsilon) {
        return {false, kNaN, "DegenerateVariance"};
    }
    const double denom = 1.0 - cov / (da * db);
    if (denom <= kReverseEpsilon) {
        return {false, kNaN, "SingularDenominator"};
    }
    return {true, 2.0 * var_diff / denom - 2.0 * da * db, {}};
}

BoundResult eq7_impl(const Context &ctx) {
    const double cov = inner(ctx.abar_psi, ctx.bbar_psi).real();
    CVector diff(ctx.abar_psi.size());
    for (std::size_t k = 0; k < diff.size(); ++k) {
        diff[k] = ctx.abar_psi[k] - ctx.bbar_psi[k];
    }
    const double var_diff = norm(diff) * norm(diff);
    const auto rhs = reverse_rhs(ctx.ma.variance, ctx.mb.variance, cov, var_diff);
    if (!rhs.defined) {
        return undefined_reverse(ctx.sum_lhs(), rhs.reason);
    }
    return finish(Relation::Eq7, Direction::Upper, ctx.sum_lhs(), rhs.value);
}

}  // namespace

std::string_view relation_name(Relation r) noexcept {
    switch (r) {
        case Relation::Eq1: return "eq1";
        case Relation::Eq2: return "eq2";
        case Relation::Eq3: return "eq3";
        case Relation::Eq4: return "eq4";
        case Relation::Eq5: return "eq5";
        case Relation::Eq6: return "eq6";
        case Relation::Eq7: return "eq7";
    }
    return "eq?";
}

std::optional<Relation> parse_relation(std::string_view name) noexcept {
    for (Relation r : kAllRelations) {
        if (relation_name(r) == name) {
            return r;
        }
    }
    return std::nullopt;
}

OrthonormalBasis::OrthonormalBasis(std::vector<CVector> vectors) : vectors_(std::move(vectors)) {
    const std::size_t d = vectors_.size();
    if (d == 0) {
        throw Error(ErrorKind::IncompleteBasis, "empty basis");
    }
    for (const auto &v : vectors_) {
        if (v.size() != d) {
            throw Error(ErrorKind::IncompleteBasis, "basis of " + std::to_string(d) + " vectors contains a vector of length " +
                                                        std::to_string(v.size()));
        }
    }
    for (std::size_t m = 0; m < d; ++m) {
        for (std::size_t n = m; n < d; ++n) {
            const Complex ip = inner(vectors_[m], vectors_[n]);
            const double expected = m == n ? 1.0 : 0.0;
            if (std::abs(ip - expected) > 1e-10) {
                throw Error(ErrorKind::IncompleteBasis, "basis vectors " + std::to_string(m) + " and " +
                                                            std::to_string(n) + " are not orthonormal");
            }
        }
    }
}

OrthonormalBasis OrthonormalBasis::computational(std::size_t dim) {
    std::vector<CVector> v(dim, CVector(dim));
    for (std::size_t n = 0; n < dim; ++n) {
        v[n][n] = 1.0;
    }
    return OrthonormalBasis(std::move(v));
}

OrthonormalBasis OrthonormalBasis::from_columns(const CMatrix &unitary) {
    if (!unitary.is_square()) {
        throw Error(ErrorKind::IncompleteBasis, "basis matrix is not square");
    }
    std::vector<CVector> v;
    for (std::size_t c = 0; c < unitary.cols(); ++c) {
        v.push_back(unitary.column(c));
    }
    return OrthonormalBasis(std::move(v));
}

OrthonormalBasis OrthonormalBasis::eigenbasis(const Observable &obs) {
    std::vector<CVector> v;
    for (const auto &e : obs.eigenvectors()) {
        v.emplace_back(e.amplitudes().begin(), e.amplitudes().end());
    }
    return OrthonormalBasis(std::move(v));
}

EigenPairing EigenPairing::spin1_default() {
    std::vector<double> order(std::begin(kSpin1PairingOrder), std::end(kSpin1PairingOrder));
    return {order, order};
}

CVector shifted_vector(const PureState &state, const Observable &obs) {
    const double mean = expectation(state, obs.matrix());
    CVector v = obs.matrix() * state.amplitudes();
    for (std::size_t k = 0; k < v.size(); ++k) {
        v[k] -= mean * state[k];
    }
    return v;
}

BasisBoundTerms basis_bound_terms(const PureState &state, const Observable &a, const Observable &b,
                                  const OrthonormalBasis &basis) {
    require_same_dim(state, a, b);
    require_basis_dim(state, basis);
    const CVector a_psi = a.matrix() * state.amplitudes();
    const CVector b_psi = b.matrix() * state.amplitudes();
    BasisBoundTerms t;
    for (const auto &psi_n : basis.vectors()) {
        const Complex e = inner(psi_n, a_psi);
        const Complex f = inner(psi_n, state.amplitudes());
        const Complex g = inner(psi_n, b_psi);
        t.c.push_back(std::conj(e) * g);
        t.d.push_back(std::conj(f) * g);
        t.e.push_back(e);
        t.f.push_back(f);
        t.g.push_back(g);
    }
    return t;
}

FidelityTerms fidelity_terms(const PureState &state, const Observable &a, const Observable &b,
                             const EigenPairing &pairing) {
    require_same_dim(state, a, b);
    const Observable a_sorted = a.sorted();
    const Observable b_sorted = b.sorted();
    const Observable pa = pairing.a_order.empty() ? a_sorted : a_sorted.reordered(pairing.a_order);
    const Observable pb = pairing.b_order.empty() ? b_sorted : b_sorted.reordered(pairing.b_order);
    const double mean_a = expectation(state, a.matrix());
    const double mean_b = expectation(state, b.matrix());

    auto index_in_sorted = [](const Observable &sorted, double value, std::vector<bool> &used) {
        for (std::size_t i = 0; i < sorted.dim(); ++i) {
            if (!used[i] && std::abs(sorted.eigenvalues()[i] - value) <= kDegeneracyTolerance) {
                used[i] = true;
                return i;
            }
        }
        throw Error(ErrorKind::InvalidPairing, "pairing does not match the spectrum");
    };

    FidelityTerms t;
    std::vector<bool> used_a(a.dim(), false);
    std::vector<bool> used_b(b.dim(), false);
    for (std::size_t i = 0; i < pa.dim(); ++i) {
        t.a_values.push_back(pa.eigenvalues()[i]);
        t.b_values.push_back(pb.eigenvalues()[i]);
        t.a_shifted.push_back(pa.eigenvalues()[i] - mean_a);
        t.b_shifted.push_back(pb.eigenvalues()[i] - mean_b);
        t.fidelity_a.push_back(std::norm(inner(state.amplitudes(), pa.eigenvectors()[i].amplitudes())));
        t.fidelity_b.push_back(std::norm(inner(state.amplitudes(), pb.eigenvectors()[i].amplitudes())));
        t.a_index.push_back(index_in_sorted(a_sorted, pa.eigenvalues()[i], used_a));
        t.b_index.push_back(index_in_sorted(b_sorted, pb.eigenvalues()[i], used_b));
    }
    return t;
}

double eq2_rhs_from_columns(std::span<const Complex> abar_psi, std::span<const Complex> bbar_psi,
                            const CMatrix &basis_columns) {
    double acc = 0.0;
    for (std::size_t n = 0; n < basis_columns.cols(); ++n) {
        Complex ea{};
        Complex eb{};
        for (std::size_t k = 0; k < basis_columns.rows(); ++k) {
            const Complex conj_psi = std::conj(basis_columns(k, n));
            ea += conj_psi * abar_psi[k];
            eb += conj_psi * bbar_psi[k];
        }
        acc += std::abs(ea) * std::abs(eb);
    }
    return acc * acc;
}

double eq5_rhs_from_columns(std::span<const Complex> abar_psi, std::span<const Complex> bbar_psi,
                            const CMatrix &basis_columns) {
    double acc = 0.0;
    for (std::size_t n = 0; n < basis_columns.cols(); ++n) {
        Complex ea{};
        Complex eb{};
        for (std::size_t k = 0; k < basis_columns.rows(); ++k) {
            const Complex conj_psi = std::conj(basis_columns(k, n));
            ea += conj_psi * abar_psi[k];
            eb += conj_psi * bbar_psi[k];
        }
        const double x = std::abs(ea) + std::abs(eb);
        acc += x * x;
    }
    return 0.5 * acc;
}

BoundResult eq1_product_bound(const PureState &state, const Observable &a, const Observable &b) {
    require_same_dim(state, a, b);
    return eq1_impl(Context(state, a, b));
}

BoundResult eq2_product_bound(const PureState &state, const Observable &a, const Observable &b,
                              const OrthonormalBasis &basis) {
    require_same_dim(state, a, b);
    return eq2_impl(Context(state, a, b), basis);
}

BoundResult eq3_product_bound(const PureState &state, const Observable &a, const Observable &b,
                              const EigenPairing &pairing) {
    require_same_dim(state, a, b);
    return eq3_impl(Context(state, a, b), pairing);
}

BoundResult eq4_sum_bound(const PureState &state, const Observable &a, const Observable &b) {
    require_same_dim(state, a, b);
    return eq4_impl(Context(state, a, b));
}

BoundResult eq5_sum_bound(const PureState &state, const Observable &a, const Observable &b,
                          const OrthonormalBasis &basis) {
    require_same_dim(state, a, b);
    return eq5_impl(Context(state, a, b), basis);
}

BoundResult eq6_sum_bound(const PureState &state, const Observable &a, const Observable &b,
                          const EigenPairing &pairing) {
    require_same_dim(state, a, b);
    return eq6_impl(Context(state, a, b), pairing);
}

BoundResult eq7_reverse_bound(const PureState &state, const Observable &a, const Observable &b) {
    require_same_dim(state, a, b);
    return eq7_impl(Context(state, a, b));
}

bool UncertaintyReport::all_satisfied() const {
    return std::all_of(results.begin(), results.end(),
                       [](const BoundResult &r) { return !r.defined || r.satisfied; });
}

UncertaintyReport evaluate_all(const PureState &state, const Observable &a, const Observable &b,
                               const OrthonormalBasis &basis, const EigenPairing &pairing) {
    require_same_dim(state, a, b);
    const Context ctx(state, a, b);
    UncertaintyReport rep;
    rep.label = state.label();
    rep.mean_a = ctx.ma.mean;
    rep.mean_b = ctx.mb.mean;
    rep.second_a = ctx.ma.second_moment;
    rep.second_b = ctx.mb.second_moment;
    rep.var_a = ctx.ma.variance;
    rep.var_b = ctx.mb.variance;
    rep.mean_commutator = (Complex{0.0, -1.0} * inner(state.amplitudes(), commutator(a, b) * state.amplitudes())).real();
    rep.mean_anticommutator = expectation(state, anticommutator(a, b));
    rep.product_lhs = ctx.product_lhs();
    rep.sum_lhs = ctx.sum_lhs();
    rep.results = {eq1_impl(ctx),           eq2_impl(ctx, basis), eq3_impl(ctx, pairing), eq4_impl(ctx),
                   eq5_impl(ctx, basis), eq6_impl(ctx, pairing), eq7_impl(ctx)};
    return rep;
}

namespace spin1_forms {

Spin1Moments from_state(const PureState &state) {
    const auto &s = builtin_spin1();
    const MomentStats x = moments(state, s.lx);
    const MomentStats y = moments(state, s.ly);
    return {x.mean, x.second_moment, y.mean, y.second_moment, moments(state, s.lz).mean, moments(state, s.lp).mean};
}

double var_lx(const Spin1Moments &m) { return m.lx2 - m.lx * m.lx; }
double var_ly(const Spin1Moments &m) { return m.ly2 - m.ly * m.ly; }
double product_lhs(const Spin1Moments &m) { return var_lx(m) * var_ly(m); }
double sum_lhs(const Spin1Moments &m) { return var_lx(m) + var_ly(m); }

double eq1_rhs(const Spin1Moments &m) {
    return std::pow(0.5 * m.lz, 2) + std::pow(0.5 * m.lp - m.lx * m.ly, 2);
}

double eq4_rhs(const Spin1Moments &m) {
    return 0.5 * (m.lx2 + m.ly2 + m.lp - std::pow(m.lx + m.ly, 2));
}

ReverseRhs eq7_rhs(const Spin1Moments &m) {
    const double cov = 0.5 * m.lp - m.lx * m.ly;
    const double var_diff = m.lx2 + m.ly2 - m.lp - std::pow(m.lx - m.ly, 2);
    return reverse_rhs(var_lx(m), var_ly(m), cov, var_diff);
}

double eq2_rhs(const BasisBoundTerms &t, double mean_a) {
    double acc = 0.0;
    for (std::size_t n = 0; n < t.c.size(); ++n) {
        acc += std::abs(t.c[n] - t.d[n] * mean_a);
    }
    return acc * acc;
}

double eq5_rhs(const BasisBoundTerms &t, double mean_a) {
    double acc = 0.0;
    for (std::size_t n = 0; n < t.e.size(); ++n) {
        const double x = std::abs(t.e[n] - t.f[n] * mean_a) + std::abs(t.g[n]);
        acc += x * x;
    }
    return 0.5 * acc;
}

}  // namespace spin1_forms

}  // namespace varbound
