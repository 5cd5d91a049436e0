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
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varbound/hermitian.hpp"
#include "varbound/linalg.hpp"

namespace varbound {

/// Two spatial paths times two polarizations. Mode order is
/// (upper,H), (upper,V), (lower,H), (lower,V).
struct ModeSpace {
    static constexpr std::size_t kModes = 4;
    static constexpr std::size_t kUpperH = 0;
    static constexpr std::size_t kUpperV = 1;
    static constexpr std::size_t kLowerH = 2;
    static constexpr std::size_t kLowerV = 3;
    /// Qutrit basis states |1>, |2>, |3> live in (upper,H), (upper,V), (lower,V).
    static constexpr std::array<std::size_t, 3> kQutritModes = {kUpperH, kUpperV, kLowerV};
    /// Amplitude allowed in a mode that must stay empty.
    static constexpr double kLeakageTolerance = 1e-10;

    static std::string_view label(std::size_t mode);
    static CVector embed(const PureState &qutrit);
};

enum class ElementKind { HWP, QWP, BD, PBS };
enum class Path { Upper, Lower, Both };

std::string_view element_kind_name(ElementKind kind) noexcept;

/// HWP(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
CMatrix hwp_matrix(double theta);
/// QWP(t) = R(t) diag(1, i) R(-t)
CMatrix qwp_matrix(double theta);

struct OpticalElement {
    ElementKind kind = ElementKind::HWP;
    /// Radians. Wave plates only; nullopt marks a removed plate, which acts as identity.
    std::optional<double> angle;
    Path target = Path::Both;
    std::string label;

    /// 4x4 action on the mode space. The beam displacer swaps (upper,H) and
    /// (lower,H); the polarizing beam splitter swaps (upper,V) and (lower,V).
    CMatrix matrix() const;

    static OpticalElement hwp(std::string label, std::optional<double> angle, Path target);
    static OpticalElement qwp(std::string label, std::optional<double> angle, Path target);
    static OpticalElement bd(std::string label);
    static OpticalElement pbs(std::string label);
};

struct OpticalCircuit {
    std::vector<OpticalElement> elements;  ///< in the order the photon meets them

    CMatrix matrix() const;
    /// Mode vector after the circuit.
    CVector propagate(std::span<const Complex> modes) const;
};

/// PBS, BD1, H at theta/2 on the upper path, H0 at 0 on the upper path.
OpticalCircuit preparation_circuit(double theta);

/// Runs the preparation circuit on a photon entering (lower,H) and reads the
/// qutrit off the embedding. Yields (cos theta, -sin theta, 0).
/// Throws LeakageDetected when (lower,H) ends up populated.
PureState prepare_state(double theta);

/// Wave-plate angles in degrees; nullopt is a removed plate.
struct WavePlateAngles {
    std::optional<double> h1, h2, h3, h4, q;
};

struct MeasurementSetting {
    std::string observable;  ///< "Lx", "Ly", "Lz" or "Lp"
    WavePlateAngles angles;
    OpticalCircuit circuit;
    /// Output modes read by the three detectors, in outcome order.
    std::array<std::size_t, 3> detector_ports = {ModeSpace::kUpperH, ModeSpace::kUpperV, ModeSpace::kLowerV};
    /// The remaining output mode; it must stay dark.
    std::size_t dark_port = ModeSpace::kLowerH;
};

/// The four wave-plate settings of the experiment, placed in their circuits.
/// Accepts "Lx", "Ly", "Lz", "Lp" (also "L'"). Throws InvalidConfig otherwise.
MeasurementSetting builtin_setting(std::string_view observable);
std::vector<MeasurementSetting> builtin_settings();

/// 3x3 qutrit-to-detector matrix V. Throws LeakageDetected if any qutrit
/// input reaches the dark port.
CMatrix measurement_unitary(const MeasurementSetting &setting);

/// A three-outcome projective measurement: outcome i projects on the
/// conjugate of row i of `rows` and reports `outcome_values[i]`.
struct ProjectiveMeasurement {
    std::string name;
    CMatrix rows;
    std::vector<double> outcome_values;
};

/// Checks that every row of V is an eigenbra of `obs` (entrywise magnitudes
/// equal to those of the eigenvector for a non-degenerate eigenvalue) and
/// labels outcomes by eigenvalue. Throws NotProjectiveRealization.
ProjectiveMeasurement realize_measurement(const MeasurementSetting &setting, const Observable &obs);

/// Ideal measurement in the eigenbasis of `obs`, without an optical layout.
ProjectiveMeasurement ideal_measurement(const Observable &obs, std::string name = {});

/// P_i = |(V Psi)_i|^2
std::vector<double> projection_probabilities(const PureState &state, const ProjectiveMeasurement &m);
std::vector<double> projection_probabilities(const PureState &state, const MeasurementSetting &setting);

struct CountRecord {
    std::vector<std::uint64_t> counts;
    std::vector<double> probabilities;
    double expected_total = 0.0;  ///< N
    std::uint64_t seed = 0;

    std::uint64_t total() const noexcept;
};

/// Independent n_i ~ Poisson(N P_i). Throws BadProbabilities when P has a
/// negative or non-finite entry, does not sum to 1 within 1e-10, or N <= 0.
CountRecord sample_counts(std::span<const double> probabilities, double n, std::uint64_t seed);

/// Mixes several integers into one 64-bit seed through std::seed_seq.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

struct EstimatedMoment {
    double value = 0.0;
    double sigma = 0.0;
};

/// value = sum m_i n_i / sum n_j, sigma from first-order propagation of
/// independent Poisson variances. Throws ZeroCounts when nothing was detected.
EstimatedMoment estimate_observable(const CountRecord &counts, std::span<const double> eigenvalues);

/// U = U3 U2 U1 for the Lx measurement.
struct LxDecomposition {
    CMatrix u;
    CMatrix u1;
    CMatrix u2_printed;    ///< reference entries; singular
    CMatrix u2;            ///< U3^dagger U U1^dagger
    CMatrix u3;
    double residual = 0.0; ///< max |U - U3 U2 U1|
};

LxDecomposition decompose_lx();

/// U = sum_i |i><m_i| with eigenvectors in the observable's pairing order.
CMatrix eigen_unitary(const Observable &obs);

/// Reck-style factorization U = G_1 G_2 ... G_k D into two-level unitaries
/// acting on modes (p, q) and a diagonal phase matrix D.
struct TwoLevelFactor {
    std::size_t p = 0;
    std::size_t q = 0;
    CMatrix block;  ///< 2x2 unitary on (p, q)

    CMatrix embed(std::size_t d) const;
};

struct TwoLevelDecomposition {
    std::vector<TwoLevelFactor> factors;
    CVector phases;
    double residual = 0.0;

    CMatrix product() const;
};

TwoLevelDecomposition two_level_decompose(const CMatrix &u);

}  // namespace varbound
