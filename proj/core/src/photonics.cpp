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


#include "varbound/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <utility>

#include "varbound/error.hpp"

namespace varbound {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kRowTolerance = 1e-10;

std::optional<double> to_radians(std::optional<double> deg) {
    if (!deg) {
        return std::nullopt;
    }
    return *deg * kDeg;
}

CMatrix on_path(const CMatrix &block, Path target) {
    CMatrix m = CMatrix::identity(ModeSpace::kModes);
    auto place = [&](std::size_t offset) {
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c < 2; ++c) {
                m(offset + r, offset + c) = block(r, c);
            }
        }
    };
    if (target != Path::Lower) {
        place(ModeSpace::kUpperH);
    }
    if (target != Path::Upper) {
        place(ModeSpace::kLowerH);
    }
    return m;
}

CMatrix swap_modes(std::size_t a, std::size_t b) {
    CMatrix m = CMatrix::identity(ModeSpace::kModes);
    m(a, a) = 0.0;
    m(b, b) = 0.0;
    m(a, b) = 1.0;
    m(b, a) = 1.0;
    return m;
}

double max_dark_amplitude(const CMatrix &full, std::size_t dark) {
    double worst = 0.0;
    for (std::size_t c = 0; c < full.cols(); ++c) {
        worst = std::max(worst, std::abs(full(dark, c)));
    }
    return worst;
}

}  // namespace

std::string_view ModeSpace::label(std::size_t mode) {
    static constexpr std::string_view kLabels[] = {"(upper,H)", "(upper,V)", "(lower,H)", "(lower,V)"};
    if (mode >= kModes) {
        throw Error(ErrorKind::DimensionMismatch, "mode index out of range");
    }
    return kLabels[mode];
}

CVector ModeSpace::embed(const PureState &qutrit) {
    if (qutrit.dim() != 3) {
        throw Error(ErrorKind::DimensionMismatch, "only qutrits embed into the mode space");
    }
    CVector modes(kModes);
    for (std::size_t i = 0; i < 3; ++i) {
        modes[kQutritModes[i]] = qutrit[i];
    }
    return modes;
}

std::string_view element_kind_name(ElementKind kind) noexcept {
    switch (kind) {
        case ElementKind::HWP: return "HWP";
        case ElementKind::QWP: return "QWP";
        case ElementKind::BD: return "BD";
        case ElementKind::PBS: return "PBS";
    }
    return "?";
}

CMatrix hwp_matrix(double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    return CMatrix{{c, s}, {s, -c}};
}

CMatrix qwp_matrix(double theta) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const CMatrix r{{c, -s}, {s, c}};
    const CMatrix r_inv{{c, s}, {-s, c}};
    const CMatrix diag{{1.0, 0.0}, {0.0, kI}};
    return r * diag * r_inv;
}

CMatrix OpticalElement::matrix() const {
    switch (kind) {
        case ElementKind::HWP:
            return angle ? on_path(hwp_matrix(*angle), target) : CMatrix::identity(ModeSpace::kModes);
        case ElementKind::QWP:
            return angle ? on_path(qwp_matrix(*angle), target) : CMatrix::identity(ModeSpace::kModes);
        case ElementKind::BD:
            return swap_modes(ModeSpace::kUpperH, ModeSpace::kLowerH);
        case ElementKind::PBS:
            return swap_modes(ModeSpace::kUpperV, ModeSpace::kLowerV);
    }
    throw Error(ErrorKind::InternalConsistency, "unknown element kind");
}

OpticalElement OpticalElement::hwp(std::string label, std::optional<double> angle, Path target) {
    return {ElementKind::HWP, angle, target, std::move(label)};
}

OpticalElement OpticalElement::qwp(std::string label, std::optional<double> angle, Path target) {
    return {ElementKind::QWP, angle, target, std::move(label)};
}

OpticalElement OpticalElement::bd(std::string label) { return {ElementKind::BD, std::nullopt, Path::Both, std::move(label)}; }

OpticalElement OpticalElement::pbs(std::string label) {
    return {ElementKind::PBS, std::nullopt, Path::Both, std::move(label)};
}

CMatrix OpticalCircuit::matrix() const {
    CMatrix m = CMatrix::identity(ModeSpace::kModes);
    for (const auto &e : elements) {
        m = e.matrix() * m;
    }
    return m;
}

CVector OpticalCircuit::propagate(std::span<const Complex> modes) const {
    if (modes.size() != ModeSpace::kModes) {
        throw Error(ErrorKind::DimensionMismatch, "mode vector must have 4 entries");
    }
    CVector v(modes.begin(), modes.end());
    for (const auto &e : elements) {
        v = e.matrix() * v;
    }
    return v;
}

OpticalCircuit preparation_circuit(double theta) {
    return {{OpticalElement::pbs("PBS"), OpticalElement::bd("BD1"),
             OpticalElement::hwp("H", theta / 2.0, Path::Upper), OpticalElement::hwp("H0", 0.0, Path::Upper)}};
}

PureState prepare_state(double theta) {
    CVector photon(ModeSpace::kModes);
    photon[ModeSpace::kLowerH] = 1.0;
    const CVector out = preparation_circuit(theta).propagate(photon);
    if (std::abs(out[ModeSpace::kLowerH]) > ModeSpace::kLeakageTolerance) {
        throw Error(ErrorKind::LeakageDetected, "preparation leaves amplitude in (lower,H)");
    }
    CVector q(3);
    for (std::size_t i = 0; i < 3; ++i) {
        q[i] = out[ModeSpace::kQutritModes[i]];
    }
    return PureState::normalized(std::move(q), "theta=" + std::to_string(theta));
}

MeasurementSetting builtin_setting(std::string_view observable) {
    using E = OpticalElement;
    MeasurementSetting s;
    if (observable == "Lx" || observable == "Lz") {
        const bool z = observable == "Lz";
        s.observable = std::string(observable);
        if (!z) {
            s.angles = {45.0, 22.5, -45.0, 22.5, std::nullopt};
        }
        const auto &a = s.angles;
        s.circuit = {{E::hwp("H1", to_radians(a.h1), Path::Upper), E::hwp("H3", to_radians(a.h3), Path::Lower),
                      E::bd("BD2"), E::hwp("H2", to_radians(a.h2), Path::Upper), E::bd("BD3"),
                      E::qwp("Q", to_radians(a.q), Path::Upper), E::hwp("H4", to_radians(a.h4), Path::Upper)}};
        if (!z) {
            s.detector_ports = {ModeSpace::kUpperH, ModeSpace::kUpperV, ModeSpace::kLowerH};
            s.dark_port = ModeSpace::kLowerV;
        }
    } else if (observable == "Ly") {
        s.observable = "Ly";
        s.angles = {-45.0, 22.5, 45.0, 22.5, 0.0};
        const auto &a = s.angles;
        s.circuit = {{E::hwp("H1", to_radians(a.h1), Path::Upper), E::hwp("H3", to_radians(a.h3), Path::Upper),
                      E::bd("BD2"), E::hwp("H2", to_radians(a.h2), Path::Lower), E::bd("BD3"),
                      E::qwp("Q", to_radians(a.q), Path::Upper), E::hwp("H4", to_radians(a.h4), Path::Upper)}};
    } else if (observable == "Lp" || observable == "L'") {
        s.observable = "Lp";
        s.angles = {0.0, 0.0, -45.0, 22.5, 0.0};
        const auto &a = s.angles;
        s.circuit = {{E::hwp("H1", to_radians(a.h1), Path::Upper), E::qwp("Q", to_radians(a.q), Path::Lower),
                      E::bd("BD2"), E::hwp("H2", to_radians(a.h2), Path::Upper),
                      E::hwp("H3", to_radians(a.h3), Path::Lower), E::hwp("H4", to_radians(a.h4), Path::Lower),
                      E::bd("BD3")}};
    } else {
        throw Error(ErrorKind::InvalidConfig, "no built-in setting for observable '" + std::string(observable) + "'");
    }
    return s;
}

std::vector<MeasurementSetting> builtin_settings() {
    return {builtin_setting("Lx"), builtin_setting("Ly"), builtin_setting("Lz"), builtin_setting("Lp")};
}

CMatrix measurement_unitary(const MeasurementSetting &setting) {
    const CMatrix full = setting.circuit.matrix();
    const std::vector<std::size_t> inputs(ModeSpace::kQutritModes.begin(), ModeSpace::kQutritModes.end());
    const std::vector<std::size_t> all_rows = {0, 1, 2, 3};
    const CMatrix restricted = full.select(all_rows, inputs);
    if (max_dark_amplitude(restricted, setting.dark_port) > ModeSpace::kLeakageTolerance) {
        throw Error(ErrorKind::LeakageDetected, "setting " + setting.observable + " leaks into dark port " +
                                                    std::string(ModeSpace::label(setting.dark_port)));
    }
    const std::vector<std::size_t> ports(setting.detector_ports.begin(), setting.detector_ports.end());
    const std::vector<std::size_t> cols = {0, 1, 2};
    return restricted.select(ports, cols);
}

ProjectiveMeasurement realize_measurement(const MeasurementSetting &setting, const Observable &obs) {
    const CMatrix v = measurement_unitary(setting);
    if (obs.dim() != v.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "observable dimension differs from the circuit's");
    }
    ProjectiveMeasurement m{setting.observable, v, {}};
    for (std::size_t i = 0; i < v.rows(); ++i) {
        CVector ket = v.row(i);
        for (auto &z : ket) {
            z = std::conj(z);
        }
        const double lambda = expectation(PureState::normalized(ket), obs.matrix());
        const CVector o_ket = obs.matrix() * ket;
        double residual = std::abs(norm(ket) - 1.0);
        for (std::size_t k = 0; k < ket.size(); ++k) {
            residual = std::max(residual, std::abs(o_ket[k] - lambda * ket[k]));
        }
        if (residual > kRowTolerance) {
            throw Error(ErrorKind::NotProjectiveRealization,
                        "row " + std::to_string(i) + " of the " + setting.observable + " circuit is not an eigenbra");
        }
        const auto values = obs.eigenvalues();
        std::size_t match = values.size();
        std::size_t multiplicity = 0;
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (std::abs(values[k] - lambda) <= kDegeneracyTolerance) {
                if (match == values.size()) {
                    match = k;
                }
                ++multiplicity;
            }
        }
        if (match == values.size()) {
            throw Error(ErrorKind::NotProjectiveRealization, "row eigenvalue matches no eigenvalue");
        }
        if (multiplicity == 1) {
            const auto &eig = obs.eigenvectors()[match];
            for (std::size_t k = 0; k < ket.size(); ++k) {
                if (std::abs(std::abs(ket[k]) - std::abs(eig[k])) > kRowTolerance) {
                    throw Error(ErrorKind::NotProjectiveRealization,
                                "row " + std::to_string(i) + " magnitudes differ from the eigenvector");
                }
            }
        }
        m.outcome_values.push_back(values[match]);
    }
    return m;
}

ProjectiveMeasurement ideal_measurement(const Observable &obs, std::string name) {
    ProjectiveMeasurement m{name.empty() ? obs.name() : std::move(name), eigen_unitary(obs), {}};
    m.outcome_values.assign(obs.eigenvalues().begin(), obs.eigenvalues().end());
    return m;
}

std::vector<double> projection_probabilities(const PureState &state, const ProjectiveMeasurement &m) {
    if (state.dim() != m.rows.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "state dimension differs from the measurement's");
    }
    const CVector out = m.rows * state.amplitudes();
    std::vector<double> p(out.size());
    std::transform(out.begin(), out.end(), p.begin(), [](Complex z) { return std::norm(z); });
    return p;
}

std::vector<double> projection_probabilities(const PureState &state, const MeasurementSetting &setting) {
    const CMatrix v = measurement_unitary(setting);
    return projection_probabilities(state, ProjectiveMeasurement{setting.observable, v, {}});
}

std::uint64_t CountRecord::total() const noexcept { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

CountRecord sample_counts(std::span<const double> probabilities, double n, std::uint64_t seed) {
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw Error(ErrorKind::BadProbabilities, "expected count N must be positive");
    }
    double sum = 0.0;
    for (double p : probabilities) {
        if (!std::isfinite(p) || p < -1e-12) {
            throw Error(ErrorKind::BadProbabilities, "probabilities must be finite and non-negative");
        }
        sum += p;
    }
    if (probabilities.empty() || std::abs(sum - 1.0) > 1e-10) {
        throw Error(ErrorKind::BadProbabilities, "probabilities must sum to 1");
    }
    CountRecord rec;
    rec.probabilities.assign(probabilities.begin(), probabilities.end());
    rec.expected_total = n;
    rec.seed = seed;
    std::mt19937_64 rng(seed);
    for (double p : probabilities) {
        const double mean = std::max(0.0, p) * n;
        if (mean <= 0.0) {
            rec.counts.push_back(0);
            continue;
        }
        std::poisson_distribution<std::int64_t> dist(mean);
        rec.counts.push_back(static_cast<std::uint64_t>(dist(rng)));
    }
    return rec;
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::vector<std::uint32_t> words;
    for (std::uint64_t p : parts) {
        words.push_back(static_cast<std::uint32_t>(p));
        words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

EstimatedMoment estimate_observable(const CountRecord &counts, std::span<const double> eigenvalues) {
    if (eigenvalues.size() != counts.counts.size()) {
        throw Error(ErrorKind::DimensionMismatch, "one eigenvalue per outcome is required");
    }
    const double total = static_cast<double>(counts.total());
    if (total <= 0.0) {
        throw Error(ErrorKind::ZeroCounts, "no counts recorded");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        acc += eigenvalues[i] * static_cast<double>(counts.counts[i]);
    }
    const double value = acc / total;
    // d(value)/d(n_i) = (m_i - value) / T, and Var(n_i) = n_i.
    double var = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
        const double dm = eigenvalues[i] - value;
        var += dm * dm * static_cast<double>(counts.counts[i]);
    }
    return {value, std::sqrt(var) / total};
}

LxDecomposition decompose_lx() {
    const double h = 0.5;
    const double r = 1.0 / std::numbers::sqrt2;
    LxDecomposition d;
    d.u = CMatrix{{h, -r, h}, {h, r, h}, {-r, 0.0, r}};
    d.u1 = CMatrix{{0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
    d.u2_printed = CMatrix{{-1.0, 0.0, 0.0}, {0.0, r, r}, {0.0, r, r}};
    d.u3 = CMatrix{{r, r, 0.0}, {-r, r, 0.0}, {0.0, 0.0, 1.0}};
    d.u2 = d.u3.adjoint() * d.u * d.u1.adjoint();
    d.residual = max_abs_diff(d.u, d.u3 * d.u2 * d.u1);
    return d;
}

CMatrix eigen_unitary(const Observable &obs) {
    const std::size_t n = obs.dim();
    CMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            u(i, k) = std::conj(obs.eigenvectors()[i][k]);
        }
    }
    return u;
}

CMatrix TwoLevelFactor::embed(std::size_t d) const {
    CMatrix m = CMatrix::identity(d);
    m(p, p) = block(0, 0);
    m(p, q) = block(0, 1);
    m(q, p) = block(1, 0);
    m(q, q) = block(1, 1);
    return m;
}

CMatrix TwoLevelDecomposition::product() const {
    const std::size_t d = phases.size();
    CMatrix m = CMatrix::identity(d);
    for (const auto &f : factors) {
        m = m * f.embed(d);
    }
    return m * CMatrix::diagonal(phases);
}

TwoLevelDecomposition two_level_decompose(const CMatrix &u) {
    if (!u.is_square() || !is_unitary(u, 1e-10)) {
        throw Error(ErrorKind::InvalidState, "two-level decomposition needs a unitary matrix");
    }
    const std::size_t d = u.rows();
    CMatrix w = u;
    TwoLevelDecomposition out;
    // Left-multiply by T so that T [a; b] = [n; 0]; then U = ... T^dagger ... W.
    for (std::size_t c = 0; c + 1 < d; ++c) {
        for (std::size_t r = c + 1; r < d; ++r) {
            const Complex a = w(c, c);
            const Complex b = w(r, c);
            if (std::abs(b) < 1e-15) {
                continue;
            }
            const double n = std::hypot(std::abs(a), std::abs(b));
            const CMatrix t{{std::conj(a) / n, std::conj(b) / n}, {-b / n, a / n}};
            const TwoLevelFactor tf{c, r, t};
            w = tf.embed(d) * w;
            out.factors.push_back({c, r, t.adjoint()});
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        out.phases.push_back(w(i, i));
    }
    out.residual = max_abs_diff(u, out.product());
    return out;
}

}  // namespace varbound
