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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "varbound/error.hpp"
#include "varbound/photonics.hpp"

namespace varbound {
namespace {

using testing::family_state;
using testing::family_theta;

const Spin1Observables &S = builtin_spin1();
constexpr double kDeg = std::numbers::pi / 180.0;
const double kR = 1.0 / std::sqrt(2.0);

const Observable &observable_for(const std::string &name) {
    if (name == "Lx") return S.lx;
    if (name == "Ly") return S.ly;
    if (name == "Lz") return S.lz;
    return S.lp;
}

TEST(WavePlates, MatrixExamples) {
    EXPECT_LE(max_abs_diff(hwp_matrix(22.5 * kDeg), CMatrix{{kR, kR}, {kR, -kR}}), 1e-15);
    EXPECT_LE(max_abs_diff(hwp_matrix(45.0 * kDeg), CMatrix{{0.0, 1.0}, {1.0, 0.0}}), 1e-15);
    EXPECT_LE(max_abs_diff(qwp_matrix(0.0), CMatrix{{1.0, 0.0}, {0.0, kI}}), 0.0);
    for (double a = -3.0; a < 3.0; a += 0.37) {
        EXPECT_TRUE(is_unitary(hwp_matrix(a), 1e-12));
        EXPECT_TRUE(is_unitary(qwp_matrix(a), 1e-12));
    }
}

TEST(Elements, AllUnitaryAndRemovedPlatesAreIdentity) {
    for (const auto &s : builtin_settings()) {
        for (const auto &e : s.circuit.elements) {
            EXPECT_TRUE(is_unitary(e.matrix(), 1e-12)) << e.label;
        }
        EXPECT_TRUE(is_unitary(s.circuit.matrix(), 1e-10)) << s.observable;
    }
    EXPECT_LE(max_abs_diff(OpticalElement::hwp("H", std::nullopt, Path::Upper).matrix(), CMatrix::identity(4)), 0.0);
}

TEST(Settings, AnglesMatchTheTable) {
    const auto lx = builtin_setting("Lx").angles;
    EXPECT_EQ(lx.h1, 45.0);
    EXPECT_EQ(lx.h2, 22.5);
    EXPECT_EQ(lx.h3, -45.0);
    EXPECT_EQ(lx.h4, 22.5);
    EXPECT_FALSE(lx.q.has_value());
    const auto ly = builtin_setting("Ly").angles;
    EXPECT_EQ(ly.h1, -45.0);
    EXPECT_EQ(ly.h2, 22.5);
    EXPECT_EQ(ly.h3, 45.0);
    EXPECT_EQ(ly.h4, 22.5);
    EXPECT_EQ(ly.q, 0.0);
    const auto lz = builtin_setting("Lz").angles;
    EXPECT_FALSE(lz.h1 || lz.h2 || lz.h3 || lz.h4 || lz.q);
    const auto lp = builtin_setting("Lp").angles;
    EXPECT_EQ(lp.h1, 0.0);
    EXPECT_EQ(lp.h2, 0.0);
    EXPECT_EQ(lp.h3, -45.0);
    EXPECT_EQ(lp.h4, 22.5);
    EXPECT_EQ(lp.q, 0.0);
    EXPECT_THROW(builtin_setting("Lw"), Error);
}

TEST(Preparation, FamilyStates) {
    for (int j = 0; j <= 10; ++j) {
        const double t = family_theta(j);
        const PureState p = prepare_state(t);
        EXPECT_NEAR(std::abs(p[0] - std::cos(t)), 0.0, 1e-12) << j;
        EXPECT_NEAR(std::abs(p[1] + std::sin(t)), 0.0, 1e-12) << j;
        EXPECT_NEAR(std::abs(p[2]), 0.0, 1e-12) << j;
    }
    const PureState half = prepare_state(std::numbers::pi / 2.0);
    EXPECT_NEAR(half[1].real(), -1.0, 1e-12);
}

TEST(Preparation, LowerHModeStaysEmpty) {
    for (double t = 0.0; t < 7.0; t += 0.1) {
        CVector photon(4);
        photon[ModeSpace::kLowerH] = 1.0;
        const CVector out = preparation_circuit(t).propagate(photon);
        EXPECT_LT(std::abs(out[ModeSpace::kLowerH]), 1e-10);
    }
}

TEST(Measurement, LzIsIdentityRouting) {
    const CMatrix v = measurement_unitary(builtin_setting("Lz"));
    EXPECT_LE(max_abs_diff(v, CMatrix::identity(3)), 0.0);
    const auto p = projection_probabilities(family_state(0.0), builtin_setting("Lz"));
    EXPECT_NEAR(p[0], 1.0, 1e-15);
    EXPECT_NEAR(p[1], 0.0, 1e-15);
    EXPECT_NEAR(p[2], 0.0, 1e-15);
}

TEST(Measurement, LxRowsMatchItsEigenbras) {
    const ProjectiveMeasurement m = realize_measurement(builtin_setting("Lx"), S.lx);
    EXPECT_NEAR(m.outcome_values[0], -1.0, 1e-12);
    EXPECT_NEAR(m.outcome_values[1], 1.0, 1e-12);
    EXPECT_NEAR(m.outcome_values[2], 0.0, 1e-12);
    // Entrywise magnitudes of U's rows.
    const double mags[3][3] = {{0.5, kR, 0.5}, {0.5, kR, 0.5}, {kR, 0.0, kR}};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(std::abs(m.rows(i, k)), mags[i][k], 1e-12);
        }
    }
    const auto p5 = projection_probabilities(family_state(family_theta(5)), m);
    EXPECT_NEAR(p5[0], 0.5, 1e-12);
    EXPECT_NEAR(p5[1], 0.5, 1e-12);
    EXPECT_NEAR(p5[2], 0.0, 1e-12);
    const auto p0 = projection_probabilities(family_state(0.0), m);
    EXPECT_NEAR(p0[0], 0.25, 1e-12);
    EXPECT_NEAR(p0[1], 0.25, 1e-12);
    EXPECT_NEAR(p0[2], 0.5, 1e-12);
}

TEST(Measurement, CircuitProbabilitiesEqualEigenOverlaps) {
    for (const auto &setting : builtin_settings()) {
        const Observable &obs = observable_for(setting.observable);
        const ProjectiveMeasurement m = realize_measurement(setting, obs);
        for (int j = 0; j <= 10; ++j) {
            const PureState psi = family_state(family_theta(j));
            const auto p = projection_probabilities(psi, m);
            double sum = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                sum += p[i];
                double overlap = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    if (std::abs(obs.eigenvalues()[k] - m.outcome_values[i]) < 1e-9) {
                        overlap = std::norm(inner(obs.eigenvectors()[k].amplitudes(), psi.amplitudes()));
                    }
                }
                EXPECT_NEAR(p[i], overlap, 1e-10) << setting.observable << " j=" << j << " i=" << i;
            }
            EXPECT_NEAR(sum, 1.0, 1e-10);
        }
    }
}

TEST(Measurement, RowTestRejectsWrongObservable) {
    try {
        realize_measurement(builtin_setting("Lx"), S.ly);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotProjectiveRealization);
    }
}

TEST(Measurement, DarkPortLeakageDetected) {
    MeasurementSetting s = builtin_setting("Lx");
    s.dark_port = ModeSpace::kLowerH;  // actually lit by this layout
    s.detector_ports = {ModeSpace::kUpperH, ModeSpace::kUpperV, ModeSpace::kLowerV};
    try {
        measurement_unitary(s);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::LeakageDetected);
    }
}

TEST(Decomposition, CorrectedFactorsReproduceU) {
    const LxDecomposition d = decompose_lx();
    EXPECT_LE(d.residual, 1e-12);
    const CMatrix expected_u2{{-1.0, 0.0, 0.0}, {0.0, kR, kR}, {0.0, -kR, kR}};
    EXPECT_LE(max_abs_diff(d.u2, expected_u2), 1e-12);
    EXPECT_TRUE(is_unitary(d.u2, 1e-12));
    EXPECT_FALSE(is_unitary(d.u2_printed, 1e-3));
    // U's rows are eigenbras of Lx in the order -1, 1, 0.
    const double vals[] = {-1.0, 1.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        CVector ket = d.u.row(i);
        for (auto &z : ket) {
            z = std::conj(z);
        }
        const CVector lk = S.lx.matrix() * ket;
        for (int k = 0; k < 3; ++k) {
            EXPECT_NEAR(std::abs(lk[k] - vals[i] * ket[k]), 0.0, 1e-12);
        }
    }
}

TEST(Decomposition, TwoLevelFactorsReconstruct) {
    std::mt19937_64 rng(9);
    for (const Observable *o : {&S.lx, &S.ly, &S.lz, &S.lp}) {
        const TwoLevelDecomposition t = two_level_decompose(eigen_unitary(*o));
        EXPECT_LE(t.residual, 1e-12);
        EXPECT_LE(t.factors.size(), 3u);
        for (const auto &f : t.factors) {
            EXPECT_TRUE(is_unitary(f.block, 1e-12));
        }
    }
    EXPECT_THROW(two_level_decompose(CMatrix{{1.0, 1.0}, {0.0, 1.0}}), Error);
}

TEST(Sampling, ExamplesAndErrors) {
    const std::vector<double> p100 = {1.0, 0.0, 0.0};
    for (std::uint64_t s = 0; s < 20; ++s) {
        const CountRecord r = sample_counts(p100, 1000.0, s);
        EXPECT_EQ(r.counts[1], 0u);
        EXPECT_EQ(r.counts[2], 0u);
    }
    const std::vector<double> half = {0.5, 0.5, 0.0};
    double frac = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const CountRecord r = sample_counts(half, 1e4, s);
        frac += static_cast<double>(r.counts[0]) / static_cast<double>(r.counts[0] + r.counts[1]);
    }
    EXPECT_NEAR(frac / 200.0, 0.5, 0.01);
    EXPECT_EQ(sample_counts(half, 1e4, 5).counts, sample_counts(half, 1e4, 5).counts);

    auto kind_of = [](auto &&fn) {
        try {
            fn();
        } catch (const Error &e) {
            return e.kind();
        }
        return ErrorKind::InternalConsistency;
    };
    EXPECT_EQ(kind_of([] { sample_counts(std::vector<double>{0.5, 0.6}, 10.0, 1); }), ErrorKind::BadProbabilities);
    EXPECT_EQ(kind_of([] { sample_counts(std::vector<double>{1.5, -0.5}, 10.0, 1); }), ErrorKind::BadProbabilities);
    EXPECT_EQ(kind_of([] { sample_counts(std::vector<double>{1.0}, 0.0, 1); }), ErrorKind::BadProbabilities);
}

TEST(Sampling, DerivedSeedsDiffer) {
    EXPECT_EQ(derive_seed({7, 0, 0, 1}), derive_seed({7, 0, 0, 1}));
    EXPECT_NE(derive_seed({7, 0, 0, 1}), derive_seed({7, 0, 0, 2}));
    EXPECT_NE(derive_seed({7, 1, 0, 0}), derive_seed({7, 0, 1, 0}));
}

TEST(Estimation, Examples) {
    CountRecord all_first;
    all_first.counts = {10000, 0, 0};
    const std::vector<double> vals = {1.0, -1.0, 0.0};
    const EstimatedMoment e = estimate_observable(all_first, vals);
    EXPECT_EQ(e.value, 1.0);
    EXPECT_EQ(e.sigma, 0.0);

    CountRecord none;
    none.counts = {0, 0, 0};
    try {
        estimate_observable(none, vals);
        FAIL();
    } catch (const Error &err) {
        EXPECT_EQ(err.kind(), ErrorKind::ZeroCounts);
    }

    // theta = pi/2 on Lx: P = (1/2, 1/2, 0), eigenvalues (-1, 1, 0).
    const ProjectiveMeasurement m = realize_measurement(builtin_setting("Lx"), S.lx);
    const auto p = projection_probabilities(family_state(family_theta(5)), m);
    const CountRecord r = sample_counts(p, 1e4, 123);
    const EstimatedMoment x = estimate_observable(r, m.outcome_values);
    const double binomial = std::sqrt(0.25 * 4.0 / 1e4);
    EXPECT_NEAR(x.sigma, binomial, 0.1 * binomial);
    EXPECT_LE(std::abs(x.value), 3.0 * x.sigma);
}

TEST(Estimation, ErrorShrinksWithCounts) {
    const ProjectiveMeasurement m = realize_measurement(builtin_setting("Lx"), S.lx);
    const PureState psi = family_state(family_theta(3));
    const double ideal = moments(psi, S.lx).mean;
    const auto p = projection_probabilities(psi, m);
    double small = 0.0;
    double large = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        small += std::abs(estimate_observable(sample_counts(p, 1e3, s), m.outcome_values).value - ideal);
        large += std::abs(estimate_observable(sample_counts(p, 1e5, s + 1000), m.outcome_values).value - ideal);
    }
    const double ratio = small / large;
    EXPECT_GT(ratio, 7.0);
    EXPECT_LT(ratio, 14.0);
}

}  // namespace
}  // namespace varbound
