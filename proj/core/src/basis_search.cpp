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


#include "varbound/basis_search.hpp"

#include <cmath>
#include <future>
#include <random>
#include <utility>

#include "varbound/error.hpp"

namespace varbound {

CMatrix unitary_from_params(const UnitaryParams &params, std::size_t d) {
    if (d < 1 || params.angles.size() != UnitaryParams::count_for(d)) {
        throw Error(ErrorKind::BadParameterCount, "expected " + std::to_string(UnitaryParams::count_for(d)) +
                                                      " parameters for d=" + std::to_string(d) + ", got " +
                                                      std::to_string(params.angles.size()));
    }
    const std::size_t pairs = d * (d - 1) / 2;
    CMatrix u = CMatrix::identity(d);
    std::size_t k = 0;
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = p + 1; q < d; ++q, ++k) {
            const double c = std::cos(params.angles[k]);
            const double s = std::sin(params.angles[k]);
            const Complex e = std::polar(1.0, params.angles[pairs + k]);
            // u <- u * G; G only touches columns p and q.
            for (std::size_t r = 0; r < d; ++r) {
                const Complex up = u(r, p);
                const Complex uq = u(r, q);
                u(r, p) = up * c + uq * e * s;
                u(r, q) = -up * std::conj(e) * s + uq * c;
            }
        }
    }
    for (std::size_t j = 1; j < d; ++j) {
        const Complex e = std::polar(1.0, params.angles[2 * pairs + j - 1]);
        for (std::size_t r = 0; r < d; ++r) {
            u(r, j) *= e;
        }
    }
    return u;
}

OrthonormalBasis haar_basis(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<CVector> cols(d, CVector(d));
    for (auto &col : cols) {
        for (auto &z : col) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z = Complex(re, im);
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const Complex proj = inner(cols[i], cols[j]);
            for (std::size_t k = 0; k < d; ++k) {
                cols[j][k] -= proj * cols[i][k];
            }
        }
        // Dividing by the norm keeps diag(R) real positive.
        const double n = norm(cols[j]);
        for (auto &z : cols[j]) {
            z /= n;
        }
    }
    return OrthonormalBasis(std::move(cols));
}

void OptimizerConfig::validate() const {
    if (restarts < 1) {
        throw Error(ErrorKind::InvalidConfig, "restarts must be at least 1");
    }
    if (max_iters < 0) {
        throw Error(ErrorKind::InvalidConfig, "max_iters must be non-negative");
    }
    if (!(initial_step > 0.0) || !std::isfinite(initial_step)) {
        throw Error(ErrorKind::InvalidConfig, "initial_step must be positive");
    }
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "shrink_factor must lie in (0, 1)");
    }
    if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
        throw Error(ErrorKind::InvalidConfig, "tolerance must be positive");
    }
}

namespace {

struct RestartOutcome {
    CMatrix basis;
    double best = 0.0;
    std::vector<double> trace;
};

class Objective {
  public:
    Objective(BasisObjective kind, const PureState &state, const Observable &a, const Observable &b)
        : kind_(kind), abar_(shifted_vector(state, a)), bbar_(shifted_vector(state, b)) {}

    double operator()(const CMatrix &basis) const {
        return kind_ == BasisObjective::Eq2 ? eq2_rhs_from_columns(abar_, bbar_, basis)
                                            : eq5_rhs_from_columns(abar_, bbar_, basis);
    }

  private:
    BasisObjective kind_;
    CVector abar_;
    CVector bbar_;
};

RestartOutcome run_restart(const Objective &f, const CMatrix &start, const OptimizerConfig &cfg) {
    const std::size_t d = start.rows();
    UnitaryParams x = UnitaryParams::zeros(d);
    auto eval = [&](const UnitaryParams &p) { return f(start * unitary_from_params(p, d)); };

    RestartOutcome out{start, f(start), {}};
    out.trace.push_back(out.best);
    double step = cfg.initial_step;
    for (int it = 0; it < cfg.max_iters && step >= cfg.tolerance; ++it) {
        bool improved = false;
        for (std::size_t k = 0; k < x.angles.size(); ++k) {
            for (double sign : {1.0, -1.0}) {
                UnitaryParams trial = x;
                trial.angles[k] += sign * step;
                const double v = eval(trial);
                if (v > out.best) {
                    out.best = v;
                    x = std::move(trial);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            step *= cfg.shrink_factor;
        }
        out.trace.push_back(out.best);
    }
    out.basis = start * unitary_from_params(x, d);
    return out;
}

}  // namespace

OptimizationResult optimize_bound(BasisObjective objective, const PureState &state, const Observable &a,
                                  const Observable &b, const OptimizerConfig &config) {
    config.validate();
    if (a.dim() != state.dim() || b.dim() != state.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "observables and state differ in dimension");
    }
    const std::size_t d = state.dim();
    const Objective f(objective, state, a, b);

    std::vector<CMatrix> starts;
    starts.push_back(CMatrix::identity(d));
    for (int r = 1; r < config.restarts; ++r) {
        starts.push_back(haar_basis(d, config.seed + static_cast<std::uint64_t>(r)).as_matrix());
    }

    std::vector<RestartOutcome> outcomes(starts.size());
    if (config.parallel && starts.size() > 1) {
        std::vector<std::future<RestartOutcome>> jobs;
        for (const auto &s : starts) {
            jobs.push_back(std::async(std::launch::async, run_restart, std::cref(f), std::cref(s), std::cref(config)));
        }
        for (std::size_t r = 0; r < jobs.size(); ++r) {
            outcomes[r] = jobs[r].get();
        }
    } else {
        for (std::size_t r = 0; r < starts.size(); ++r) {
            outcomes[r] = run_restart(f, starts[r], config);
        }
    }

    OptimizationTrace trace;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        trace.initial_values.push_back(outcomes[r].trace.front());
        // Strict comparison: ties go to the lowest restart index.
        if (outcomes[r].best > outcomes[trace.winner].best) {
            trace.winner = r;
        }
    }
    for (auto &o : outcomes) {
        trace.best_values.push_back(std::move(o.trace));
    }
    const RestartOutcome &win = outcomes[trace.winner];
    return {OrthonormalBasis::from_columns(win.basis), win.best, trace.initial_values.front(), std::move(trace)};
}

}  // namespace varbound
