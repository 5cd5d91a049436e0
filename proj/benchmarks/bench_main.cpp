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


#include <benchmark/benchmark.h>

#include <complex>
#include <random>

#include "varbound/basis_search.hpp"
#include "varbound/bounds.hpp"
#include "varbound/hermitian.hpp"
#include "varbound/photonics.hpp"
#include "varbound/sweep.hpp"

namespace {

using namespace varbound;

CMatrix random_hermitian(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        m(i, i) = g(rng);
        for (std::size_t k = i + 1; k < d; ++k) {
            m(i, k) = Complex(g(rng), g(rng));
            m(k, i) = std::conj(m(i, k));
        }
    }
    return m;
}

void BM_Jacobi(benchmark::State &state) {
    const CMatrix m = random_hermitian(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(jacobi_eigensystem(m));
    }
}
BENCHMARK(BM_Jacobi)->Arg(3)->Arg(8)->Arg(16);

void BM_EvaluateAll(benchmark::State &state) {
    const auto &s = builtin_spin1();
    const PureState psi = prepare_state(0.7);
    const auto basis = OrthonormalBasis::computational(3);
    const auto pairing = EigenPairing::spin1_default();
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_all(psi, s.lx, s.ly, basis, pairing));
    }
}
BENCHMARK(BM_EvaluateAll);

void BM_OptimizeEq2(benchmark::State &state) {
    const auto &s = builtin_spin1();
    const PureState psi = prepare_state(0.7);
    OptimizerConfig cfg;
    cfg.restarts = static_cast<int>(state.range(0));
    cfg.parallel = false;
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize_bound(BasisObjective::Eq2, psi, s.lx, s.ly, cfg));
    }
}
BENCHMARK(BM_OptimizeEq2)->Arg(1)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State &state) {
    SweepConfig cfg;
    cfg.optimize_basis = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_sweep(cfg));
    }
}
BENCHMARK(BM_Sweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
