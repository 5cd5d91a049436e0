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


#include "varbound/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>
#include <utility>

#include <json.hpp>

#include "varbound/error.hpp"
#include "varbound/version.hpp"

namespace varbound {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kColumnCount> kColumnNames = {
    "mean_lx",       "mean_ly",     "mean_lz", "mean_lp",       "var_lx",      "var_ly",
    "lhs_prod",      "rhs_eq1",     "rhs_eq2_canon", "rhs_eq2_opt", "rhs_eq3",     "lhs_sum",
    "rhs_eq4",       "rhs_eq5_canon", "rhs_eq5_opt", "rhs_eq6",     "rhs_eq7"};

[[noreturn]] void config_error(const std::string &msg) { throw Error(ErrorKind::ConfigError, msg); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string normalize_key(std::string_view key) {
    std::string k = trim(key);
    std::replace(k.begin(), k.end(), '_', '-');
    return k;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    T value{};
    const auto *first = t.data();
    const auto *last = t.data() + t.size();
    const auto res = std::from_chars(first, last, value);
    if (t.empty() || res.ec != std::errc() || res.ptr != last) {
        config_error("invalid value '" + t + "' for " + std::string(key));
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") {
        return true;
    }
    if (t == "false" || t == "0" || t == "no" || t == "off") {
        return false;
    }
    config_error("invalid boolean '" + t + "' for " + std::string(key));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

bool wants(const SweepConfig &cfg, Relation r) { return cfg.relations.count(r) != 0; }

// Sampled pipeline -----------------------------------------------------------

// <O> estimated from one measurement as sum_i w_i n_i / sum_i n_i, or over the
// nominal count N when `nominal` is set (second moments).
struct Estimator {
    std::size_t meas = 0;
    std::vector<double> w;
    bool nominal = false;
};

struct BasisEstimators {
    std::vector<Estimator> a_pi_a, a_anti, b_pi_b, b_anti, pi;
};

struct SamplePlan {
    std::vector<ProjectiveMeasurement> meas;
    std::vector<std::size_t> offset;
    Estimator lx, lx2, ly, ly2, lz, lp;
    std::vector<Estimator> fid_a, fid_b;
    std::vector<double> a_vals, b_vals;
    std::optional<BasisEstimators> canon, opt2, opt5;
    std::set<Relation> relations;
    double nominal_counts = 0.0;

    std::size_t add(ProjectiveMeasurement m) {
        offset.push_back(offset.empty() ? 0 : offset.back() + meas.back().outcome_values.size());
        meas.push_back(std::move(m));
        return meas.size() - 1;
    }
    std::size_t flat_size() const { return offset.back() + meas.back().outcome_values.size(); }
};

Estimator value_estimator(std::size_t idx, const ProjectiveMeasurement &m, bool squared = false) {
    Estimator e{idx, m.outcome_values};
    if (squared) {
        for (auto &w : e.w) {
            w *= w;
        }
        e.nominal = true;
    }
    return e;
}

// Indicator of the first unused outcome carrying `value`.
Estimator outcome_estimator(std::size_t idx, const ProjectiveMeasurement &m, double value, std::vector<bool> &used) {
    Estimator e{idx, std::vector<double>(m.outcome_values.size(), 0.0)};
    for (std::size_t i = 0; i < m.outcome_values.size(); ++i) {
        if (!used[i] && std::abs(m.outcome_values[i] - value) <= kDegeneracyTolerance) {
            used[i] = true;
            e.w[i] = 1.0;
            return e;
        }
    }
    throw Error(ErrorKind::InvalidPairing, "pairing value has no matching outcome in " + m.name);
}

BasisEstimators add_basis(SamplePlan &plan, const OrthonormalBasis &basis, const Observable &a, const Observable &b,
                          std::optional<std::size_t> projector_meas, const std::string &tag) {
    BasisEstimators be;
    auto virtual_setting = [&](const CMatrix &op, const std::string &name) {
        const Observable o = make_observable(op, name);
        const std::size_t idx = plan.add(ideal_measurement(o, name));
        return value_estimator(idx, plan.meas[idx]);
    };
    for (std::size_t n = 0; n < basis.dim(); ++n) {
        const CMatrix pi = outer(basis[n]);
        const std::string sfx = tag + "[" + std::to_string(n) + "]";
        be.a_pi_a.push_back(virtual_setting(a.matrix() * pi * a.matrix(), "A.Pi.A" + sfx));
        be.a_anti.push_back(virtual_setting(a.matrix() * pi + pi * a.matrix(), "{A,Pi}" + sfx));
        be.b_pi_b.push_back(virtual_setting(b.matrix() * pi * b.matrix(), "B.Pi.B" + sfx));
        be.b_anti.push_back(virtual_setting(b.matrix() * pi + pi * b.matrix(), "{B,Pi}" + sfx));
        if (projector_meas) {
            // Weights |<row_i|psi_n>|^2 pick the outcome projecting on psi_n.
            const auto &m = plan.meas[*projector_meas];
            const CVector proj = m.rows * basis[n];
            Estimator e{*projector_meas, {}};
            for (const auto &z : proj) {
                e.w.push_back(std::norm(z));
            }
            be.pi.push_back(std::move(e));
        } else {
            be.pi.push_back(virtual_setting(pi, "Pi" + sfx));
        }
    }
    return be;
}

double estimate(const SamplePlan &plan, const Estimator &e, std::span<const double> n) {
    const std::size_t off = plan.offset[e.meas];
    double total = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < e.w.size(); ++i) {
        total += n[off + i];
        acc += e.w[i] * n[off + i];
    }
    if (e.nominal) {
        return acc / plan.nominal_counts;
    }
    if (!(total > 0.0)) {
        throw Error(ErrorKind::ZeroCounts, "no counts in setting " + plan.meas[e.meas].name);
    }
    return acc / total;
}

struct BasisSums {
    double eq2 = 0.0;
    double eq5 = 0.0;
};

// |<psi_n|Abar Psi>|^2 = <A Pi A> - <A><{A,Pi}> + <A>^2 <Pi>
BasisSums basis_sums(const SamplePlan &plan, const BasisEstimators &be, std::span<const double> n, double ma,
                     double mb) {
    double prod = 0.0;
    double sq = 0.0;
    for (std::size_t k = 0; k < be.pi.size(); ++k) {
        const double p = estimate(plan, be.pi[k], n);
        const double x = std::max(0.0, estimate(plan, be.a_pi_a[k], n) - ma * estimate(plan, be.a_anti[k], n) + ma * ma * p);
        const double y = std::max(0.0, estimate(plan, be.b_pi_b[k], n) - mb * estimate(plan, be.b_anti[k], n) + mb * mb * p);
        prod += std::sqrt(x * y);
        const double s = std::sqrt(x) + std::sqrt(y);
        sq += s * s;
    }
    return {prod * prod, 0.5 * sq};
}

ValueArray sampled_values(const SamplePlan &plan, std::span<const double> n) {
    ValueArray v;
    auto set = [&](Column c, double x) { v[column_index(c)] = x; };
    spin1_forms::Spin1Moments m;
    m.lx = estimate(plan, plan.lx, n);
    m.lx2 = estimate(plan, plan.lx2, n);
    m.ly = estimate(plan, plan.ly, n);
    m.ly2 = estimate(plan, plan.ly2, n);
    m.lz = estimate(plan, plan.lz, n);
    m.lp = estimate(plan, plan.lp, n);
    set(Column::MeanLx, m.lx);
    set(Column::MeanLy, m.ly);
    set(Column::MeanLz, m.lz);
    set(Column::MeanLp, m.lp);
    set(Column::VarLx, spin1_forms::var_lx(m));
    set(Column::VarLy, spin1_forms::var_ly(m));
    set(Column::LhsProd, spin1_forms::product_lhs(m));
    set(Column::LhsSum, spin1_forms::sum_lhs(m));
    const auto &rel = plan.relations;
    if (rel.count(Relation::Eq1)) {
        set(Column::RhsEq1, spin1_forms::eq1_rhs(m));
    }
    if (rel.count(Relation::Eq4)) {
        set(Column::RhsEq4, spin1_forms::eq4_rhs(m));
    }
    if (rel.count(Relation::Eq3) || rel.count(Relation::Eq6)) {
        double prod = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < plan.fid_a.size(); ++i) {
            const double fa = std::sqrt(std::max(0.0, estimate(plan, plan.fid_a[i], n)));
            const double fb = std::sqrt(std::max(0.0, estimate(plan, plan.fid_b[i], n)));
            const double at = plan.a_vals[i] - m.lx;
            const double bt = plan.b_vals[i] - m.ly;
            prod += fa * fb * at * bt;
            sq += (at * fa + bt * fb) * (at * fa + bt * fb);
        }
        if (rel.count(Relation::Eq3)) {
            set(Column::RhsEq3, prod * prod);
        }
        if (rel.count(Relation::Eq6)) {
            set(Column::RhsEq6, 0.5 * sq);
        }
    }
    if (rel.count(Relation::Eq7)) {
        const auto r = spin1_forms::eq7_rhs(m);
        if (r.defined) {
            set(Column::RhsEq7, r.value);
        }
    }
    auto basis_cols = [&](const std::optional<BasisEstimators> &be, Column c2, Column c5) {
        if (!be) {
            return;
        }
        const BasisSums s = basis_sums(plan, *be, n, m.lx, m.ly);
        if (rel.count(Relation::Eq2)) {
            set(c2, s.eq2);
        }
        if (rel.count(Relation::Eq5)) {
            set(c5, s.eq5);
        }
    };
    basis_cols(plan.canon, Column::RhsEq2Canon, Column::RhsEq5Canon);
    if (plan.opt2) {
        const BasisSums s = basis_sums(plan, *plan.opt2, n, m.lx, m.ly);
        if (rel.count(Relation::Eq2)) {
            set(Column::RhsEq2Opt, s.eq2);
        }
    }
    if (plan.opt5) {
        const BasisSums s = basis_sums(plan, *plan.opt5, n, m.lx, m.ly);
        if (rel.count(Relation::Eq5)) {
            set(Column::RhsEq5Opt, s.eq5);
        }
    }
    return v;
}

// sigma_c^2 = sum_k (d f_c / d n_k)^2 v_k with v_k = max(n_k, 1). The slope is a
// secant over n_k +- sqrt(v_k), clipped at zero counts, so outcomes seen a
// handful of times (or never) still carry one count of uncertainty.
ValueArray propagate_sigma(const SamplePlan &plan, std::vector<double> n, const ValueArray &base) {
    std::array<double, kColumnCount> var{};
    for (std::size_t k = 0; k < n.size(); ++k) {
        const double nk = n[k];
        const double v = std::max(nk, 1.0);
        const double hi = nk + std::sqrt(v);
        double lo = std::max(0.0, nk - std::sqrt(v));
        n[k] = hi;
        const ValueArray up = sampled_values(plan, n);
        n[k] = lo;
        ValueArray down;
        try {
            down = sampled_values(plan, n);
        } catch (const Error &e) {
            if (e.kind() != ErrorKind::ZeroCounts) {
                throw;
            }
            down = base;
            n[k] = lo = nk;
        }
        n[k] = nk;
        for (std::size_t c = 0; c < kColumnCount; ++c) {
            if (up[c] && down[c]) {
                const double d = (*up[c] - *down[c]) / (hi - lo);
                var[c] += d * d * v;
            }
        }
    }
    ValueArray sigma;
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        if (base[c]) {
            sigma[c] = std::sqrt(var[c]);
        }
    }
    return sigma;
}

struct OpticalSet {
    std::vector<ProjectiveMeasurement> meas;  // Lx, Ly, Lz, Lp
};

OpticalSet realize_optical() {
    const auto &s = builtin_spin1();
    return {{realize_measurement(builtin_setting("Lx"), s.lx), realize_measurement(builtin_setting("Ly"), s.ly),
             realize_measurement(builtin_setting("Lz"), s.lz), realize_measurement(builtin_setting("Lp"), s.lp)}};
}

SamplePlan make_plan(const SweepConfig &cfg, const OpticalSet &optical, const DatasetRow &row) {
    const auto &s = builtin_spin1();
    SamplePlan plan;
    plan.relations = cfg.relations;
    plan.nominal_counts = cfg.counts;
    for (const auto &m : optical.meas) {
        plan.add(m);
    }
    plan.lx = value_estimator(0, plan.meas[0]);
    plan.lx2 = value_estimator(0, plan.meas[0], true);
    plan.ly = value_estimator(1, plan.meas[1]);
    plan.ly2 = value_estimator(1, plan.meas[1], true);
    plan.lz = value_estimator(2, plan.meas[2]);
    plan.lp = value_estimator(3, plan.meas[3]);
    std::vector<bool> used_a(3, false);
    std::vector<bool> used_b(3, false);
    for (double v : cfg.pairing) {
        plan.fid_a.push_back(outcome_estimator(0, plan.meas[0], v, used_a));
        plan.fid_b.push_back(outcome_estimator(1, plan.meas[1], v, used_b));
        plan.a_vals.push_back(v);
        plan.b_vals.push_back(v);
    }
    const bool need_basis = wants(cfg, Relation::Eq2) || wants(cfg, Relation::Eq5);
    if (need_basis) {
        plan.canon = add_basis(plan, OrthonormalBasis::computational(3), s.lx, s.ly, std::size_t{2}, "canon");
        if (row.eq2_opt && wants(cfg, Relation::Eq2)) {
            plan.opt2 = add_basis(plan, row.eq2_opt->basis, s.lx, s.ly, std::nullopt, "opt2");
        }
        if (row.eq5_opt && wants(cfg, Relation::Eq5)) {
            plan.opt5 = add_basis(plan, row.eq5_opt->basis, s.lx, s.ly, std::nullopt, "opt5");
        }
    }
    return plan;
}

TrialSample run_trial(const SweepConfig &cfg, const SamplePlan &plan, const PureState &state, long j, int trial) {
    TrialSample t;
    std::vector<double> flat;
    flat.reserve(plan.flat_size());
    for (std::size_t mi = 0; mi < plan.meas.size(); ++mi) {
        const auto &m = plan.meas[mi];
        const auto p = projection_probabilities(state, m);
        CountRecord rec = sample_counts(p, cfg.counts,
                                        derive_seed({cfg.seed, static_cast<std::uint64_t>(j),
                                                     static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(mi)}));
        for (auto c : rec.counts) {
            flat.push_back(static_cast<double>(c));
        }
        if (mi < 4) {
            t.counts.push_back({m.name, m.outcome_values, std::move(rec)});
        }
    }
    t.virtual_settings = plan.meas.size() - 4;
    t.values = sampled_values(plan, flat);
    t.sigmas = propagate_sigma(plan, flat, t.values);
    return t;
}

void aggregate_trials(DatasetRow &row) {
    const double k = static_cast<double>(row.trials.size());
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        double sv = 0.0;
        double ss = 0.0;
        bool all = !row.trials.empty();
        for (const auto &t : row.trials) {
            if (!t.values[c] || !t.sigmas[c]) {
                all = false;
                break;
            }
            sv += *t.values[c];
            ss += *t.sigmas[c];
        }
        if (all) {
            row.sampled[c] = sv / k;
            row.sigma[c] = ss / k / std::sqrt(k);
        }
    }
}

DatasetRow compute_row(const SweepConfig &cfg, const OpticalSet &optical, long j, double theta, bool sampled) {
    DatasetRow row;
    row.j = j;
    row.theta = theta;
    try {
        row = ideal_row(cfg, j, theta);
        if (sampled) {
            const SamplePlan plan = make_plan(cfg, optical, row);
            for (int t = 0; t < cfg.trials; ++t) {
                row.trials.push_back(run_trial(cfg, plan, *row.state, j, t));
            }
            aggregate_trials(row);
        }
    } catch (const Error &e) {
        row.error = std::string(error_kind_name(e.kind())) + ": " + e.what();
    }
    return row;
}

std::vector<DatasetRow> compute_rows(const SweepConfig &cfg, const OpticalSet &optical, long steps, bool sampled) {
    const std::size_t count = static_cast<std::size_t>(steps);
    std::vector<DatasetRow> rows(count);
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                const long j = static_cast<long>(i);
                rows[i] = compute_row(cfg, optical, j, grid_theta(j, steps <= 1 ? 1 : steps - 1), sampled);
            }
        }));
    }
    for (auto &f : jobs) {
        f.get();
    }
    return rows;
}

// Verification -----------------------------------------------------------------

CheckOutcome check_bound(const DatasetRow &row, std::string name, Column lhs_col, Column rhs_col, Direction dir) {
    CheckOutcome out{std::move(name), Status::Satisfied, 0.0, {}};
    const auto &lhs = row.ideal[column_index(lhs_col)];
    const auto &rhs = row.ideal[column_index(rhs_col)];
    if (!lhs || !rhs) {
        out.status = Status::Undefined;
        out.detail = rhs_col == Column::RhsEq7 && !row.eq7_reason.empty() ? row.eq7_reason : "not evaluated";
        return out;
    }
    if (!std::isfinite(*lhs) || !std::isfinite(*rhs)) {
        out.status = Status::Violated;
        out.detail = "non-finite value";
        out.slack = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.slack = dir == Direction::Lower ? *lhs - *rhs : *rhs - *lhs;
    if (dir == Direction::Lower && *rhs < -kSlackTolerance) {
        out.status = Status::Violated;
        out.detail = "negative lower bound";
    } else if (out.slack < -kSlackTolerance) {
        out.status = Status::Violated;
        out.detail = "bound violated";
    } else if (std::abs(out.slack) <= kSlackTolerance) {
        out.status = Status::Tight;
    }
    return out;
}

}  // namespace

std::string_view column_name(Column c) noexcept { return kColumnNames[column_index(c)]; }

std::optional<Column> parse_column(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kColumnCount; ++i) {
        if (kColumnNames[i] == name) {
            return static_cast<Column>(i);
        }
    }
    return std::nullopt;
}

std::vector<std::string> csv_header() {
    std::vector<std::string> h = {"j", "theta"};
    for (auto n : kColumnNames) {
        h.emplace_back(n);
    }
    for (auto n : kColumnNames) {
        h.push_back("sampled_" + std::string(n));
    }
    for (auto n : kColumnNames) {
        h.push_back("sigma_" + std::string(n));
    }
    return h;
}

std::string_view status_name(Status s) noexcept {
    switch (s) {
        case Status::Satisfied: return "satisfied";
        case Status::Tight: return "tight";
        case Status::Undefined: return "undefined";
        case Status::Violated: return "violated";
    }
    return "?";
}

double grid_theta(long k, long n) {
    if (n <= 0) {
        throw Error(ErrorKind::ConfigError, "grid size must be positive");
    }
    const long g = std::gcd(k, n);
    const long kk = g == 0 ? 0 : k / g;
    const long nn = g == 0 ? 1 : n / g;
    return std::numbers::pi * static_cast<double>(kk) / static_cast<double>(nn);
}

// SweepConfig -------------------------------------------------------------------

void SweepConfig::set(std::string_view raw_key, std::string_view value) {
    const std::string key = normalize_key(raw_key);
    if (key == "theta-steps") {
        theta_steps = parse_number<int>(key, value);
    } else if (key == "counts") {
        counts = parse_number<double>(key, value);
    } else if (key == "seed") {
        seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "trials") {
        trials = parse_number<int>(key, value);
    } else if (key == "optimize-basis") {
        optimize_basis = parse_bool(key, value);
    } else if (key == "pairing") {
        pairing.clear();
        for (const auto &p : split(value, ',')) {
            pairing.push_back(parse_number<double>(key, p));
        }
    } else if (key == "dense") {
        dense = parse_number<int>(key, value);
    } else if (key == "out") {
        out_dir = trim(value);
    } else if (key == "format") {
        formats.clear();
        for (const auto &f : split(value, ',')) {
            if (f == "csv") {
                formats.insert(OutputFormat::Csv);
            } else if (f == "json") {
                formats.insert(OutputFormat::Json);
            } else {
                config_error("unknown format '" + f + "'");
            }
        }
    } else if (key == "relations") {
        relations.clear();
        for (const auto &r : split(value, ',')) {
            if (r == "all") {
                relations.insert(kAllRelations.begin(), kAllRelations.end());
                continue;
            }
            const auto rel = parse_relation(r);
            if (!rel) {
                config_error("unknown relation '" + r + "'");
            }
            relations.insert(*rel);
        }
    } else if (key == "restarts") {
        optimizer.restarts = parse_number<int>(key, value);
    } else if (key == "max-iters") {
        optimizer.max_iters = parse_number<int>(key, value);
    } else if (key == "initial-step") {
        optimizer.initial_step = parse_number<double>(key, value);
    } else if (key == "shrink") {
        optimizer.shrink_factor = parse_number<double>(key, value);
    } else if (key == "tolerance") {
        optimizer.tolerance = parse_number<double>(key, value);
    } else if (key == "sigma-k") {
        sigma_k = parse_number<double>(key, value);
    } else {
        config_error("unknown config key '" + std::string(raw_key) + "'");
    }
}

void SweepConfig::validate() const {
    if (theta_steps < 1) {
        config_error("theta-steps must be at least 1");
    }
    if (!(counts >= 1.0) || !std::isfinite(counts)) {
        config_error("counts must be at least 1");
    }
    if (trials < 1) {
        config_error("trials must be at least 1");
    }
    if (dense < 0) {
        config_error("dense must be non-negative");
    }
    if (formats.empty()) {
        config_error("at least one output format is required");
    }
    if (!(sigma_k > 0.0)) {
        config_error("sigma-k must be positive");
    }
    std::vector<double> p = pairing;
    std::sort(p.begin(), p.end());
    if (p.size() != 3 || std::abs(p[0] + 1.0) > kDegeneracyTolerance || std::abs(p[1]) > kDegeneracyTolerance ||
        std::abs(p[2] - 1.0) > kDegeneracyTolerance) {
        config_error("pairing must be a permutation of -1,0,1");
    }
    try {
        optimizer.validate();
    } catch (const Error &e) {
        config_error(e.what());
    }
}

std::vector<double> SweepConfig::thetas() const {
    std::vector<double> t;
    for (long j = 0; j < theta_steps; ++j) {
        t.push_back(grid_theta(j, theta_steps <= 1 ? 1 : theta_steps - 1));
    }
    return t;
}

namespace {

std::string joined(const std::vector<double> &v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + format_double(v[i]);
    }
    return s;
}

std::string semantic_config_text(const SweepConfig &c) {
    std::string rel;
    for (Relation r : c.relations) {
        rel += (rel.empty() ? "" : ",") + std::string(relation_name(r));
    }
    std::ostringstream os;
    os << "theta-steps=" << c.theta_steps << '\n'
       << "counts=" << format_double(c.counts) << '\n'
       << "seed=" << c.seed << '\n'
       << "trials=" << c.trials << '\n'
       << "relations=" << rel << '\n'
       << "optimize-basis=" << (c.optimize_basis ? "true" : "false") << '\n'
       << "pairing=" << joined(c.pairing) << '\n'
       << "dense=" << c.dense << '\n'
       << "restarts=" << c.optimizer.restarts << '\n'
       << "max-iters=" << c.optimizer.max_iters << '\n'
       << "initial-step=" << format_double(c.optimizer.initial_step) << '\n'
       << "shrink=" << format_double(c.optimizer.shrink_factor) << '\n'
       << "tolerance=" << format_double(c.optimizer.tolerance) << '\n'
       << "sigma-k=" << format_double(c.sigma_k) << '\n';
    return os.str();
}

}  // namespace

std::string SweepConfig::to_config_text() const {
    std::string fmt;
    for (auto f : formats) {
        fmt += (fmt.empty() ? "" : ",") + std::string(f == OutputFormat::Csv ? "csv" : "json");
    }
    return semantic_config_text(*this) + "out=" + out_dir.string() + "\nformat=" + fmt + "\n";
}

std::uint64_t SweepConfig::hash() const { return fnv1a(semantic_config_text(*this)); }

SweepConfig parse_config_text(std::string_view text, SweepConfig base) {
    std::size_t line_no = 0;
    for (const auto &raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line = trim(line.substr(0, hash));
        }
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            config_error("line " + std::to_string(line_no) + ": expected key=value");
        }
        base.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

SweepConfig load_config(const std::filesystem::path &path, SweepConfig base) {
    std::ifstream in(path);
    if (!in) {
        config_error("cannot read config file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), std::move(base));
}

// Sweep -------------------------------------------------------------------------

DatasetRow ideal_row(const SweepConfig &cfg, long j, double theta) {
    const auto &s = builtin_spin1();
    DatasetRow row;
    row.j = j;
    row.theta = theta;
    row.state = prepare_state(theta);
    const PureState &psi = *row.state;
    row.report = evaluate_all(psi, s.lx, s.ly, OrthonormalBasis::computational(3), EigenPairing::both(cfg.pairing));
    const UncertaintyReport &rep = *row.report;
    auto set = [&](Column c, double v) { row.ideal[column_index(c)] = v; };
    set(Column::MeanLx, rep.mean_a);
    set(Column::MeanLy, rep.mean_b);
    set(Column::MeanLz, moments(psi, s.lz).mean);
    set(Column::MeanLp, moments(psi, s.lp).mean);
    set(Column::VarLx, rep.var_a);
    set(Column::VarLy, rep.var_b);
    set(Column::LhsProd, rep.product_lhs);
    set(Column::LhsSum, rep.sum_lhs);
    const std::pair<Relation, Column> direct[] = {{Relation::Eq1, Column::RhsEq1}, {Relation::Eq2, Column::RhsEq2Canon},
                                                  {Relation::Eq3, Column::RhsEq3}, {Relation::Eq4, Column::RhsEq4},
                                                  {Relation::Eq5, Column::RhsEq5Canon}, {Relation::Eq6, Column::RhsEq6}};
    for (const auto &[rel, col] : direct) {
        if (wants(cfg, rel)) {
            set(col, rep.at(rel).rhs);
        }
    }
    if (wants(cfg, Relation::Eq7)) {
        const BoundResult &r7 = rep.at(Relation::Eq7);
        if (r7.defined) {
            set(Column::RhsEq7, r7.rhs);
        } else {
            row.eq7_reason = r7.undefined_reason;
        }
    }
    if (cfg.optimize_basis) {
        OptimizerConfig oc = cfg.optimizer;
        oc.parallel = false;
        if (wants(cfg, Relation::Eq2)) {
            row.eq2_opt = optimize_bound(BasisObjective::Eq2, psi, s.lx, s.ly, oc);
            set(Column::RhsEq2Opt, row.eq2_opt->best_value);
        }
        if (wants(cfg, Relation::Eq5)) {
            row.eq5_opt = optimize_bound(BasisObjective::Eq5, psi, s.lx, s.ly, oc);
            set(Column::RhsEq5Opt, row.eq5_opt->best_value);
        }
    }
    return row;
}

SweepResult run_sweep(const SweepConfig &config) {
    config.validate();
    SweepResult result;
    result.config = config;
    const OpticalSet optical = realize_optical();
    result.rows = compute_rows(config, optical, config.theta_steps, true);
    if (config.dense > 0) {
        result.dense = compute_rows(config, optical, static_cast<long>(config.dense) + 1, false);
        // compute_rows spaces points by (steps - 1); dense uses K intervals.
    }
    result.report = verify_rows(result.rows, config.sigma_k);
    return result;
}

// Verification ------------------------------------------------------------------

VerificationReport verify_rows(const std::vector<DatasetRow> &rows, double sigma_k) {
    VerificationReport rep;
    rep.sigma_k = sigma_k;
    bool first = true;
    for (const auto &row : rows) {
        RowVerification rv;
        rv.j = row.j;
        if (!row.error.empty()) {
            rv.relations.push_back({"row", Status::Violated, 0.0, row.error});
        }
        auto add = [&](CheckOutcome c) {
            if (c.status != Status::Undefined) {
                if (first || !(c.slack >= rep.worst_slack)) {
                    rep.worst_slack = c.slack;
                    first = false;
                }
            }
            rv.relations.push_back(std::move(c));
        };
        add(check_bound(row, "eq1", Column::LhsProd, Column::RhsEq1, Direction::Lower));
        add(check_bound(row, "eq2_canon", Column::LhsProd, Column::RhsEq2Canon, Direction::Lower));
        add(check_bound(row, "eq2_opt", Column::LhsProd, Column::RhsEq2Opt, Direction::Lower));
        add(check_bound(row, "eq3", Column::LhsProd, Column::RhsEq3, Direction::Lower));
        add(check_bound(row, "eq4", Column::LhsSum, Column::RhsEq4, Direction::Lower));
        add(check_bound(row, "eq5_canon", Column::LhsSum, Column::RhsEq5Canon, Direction::Lower));
        add(check_bound(row, "eq5_opt", Column::LhsSum, Column::RhsEq5Opt, Direction::Lower));
        add(check_bound(row, "eq6", Column::LhsSum, Column::RhsEq6, Direction::Lower));
        add(check_bound(row, "eq7", Column::LhsSum, Column::RhsEq7, Direction::Upper));

        for (std::size_t c = 0; c < kColumnCount; ++c) {
            const auto name = std::string(kColumnNames[c]);
            const auto &ideal = row.ideal[c];
            if (ideal && !std::isfinite(*ideal)) {
                rv.relations.push_back({name, Status::Violated, 0.0, "non-finite ideal value"});
                continue;
            }
            const auto &s = row.sampled[c];
            const auto &sig = row.sigma[c];
            if (!s && !sig) {
                continue;
            }
            CheckOutcome out{name, Status::Satisfied, 0.0, {}};
            if (!s || !sig || !ideal) {
                out.status = Status::Undefined;
                out.detail = "incomplete sampled entry";
            } else if (!std::isfinite(*s) || !std::isfinite(*sig) || *sig < 0.0) {
                out.status = Status::Violated;
                out.detail = "non-finite sampled value";
            } else {
                const double diff = std::abs(*s - *ideal);
                out.slack = sigma_k * *sig + kSlackTolerance - diff;
                if (*sig > 0.0) {
                    const double z = diff / *sig;
                    rv.max_abs_z = std::max(rv.max_abs_z.value_or(0.0), z);
                    rep.max_abs_z = std::max(rep.max_abs_z, z);
                }
                if (out.slack < 0.0) {
                    out.status = Status::Violated;
                    out.detail = "sampled value off by more than k sigma";
                }
            }
            rv.sampled.push_back(std::move(out));
        }
        for (const auto *list : {&rv.relations, &rv.sampled}) {
            for (const auto &c : *list) {
                rep.violations += c.status == Status::Violated ? 1 : 0;
            }
        }
        rep.rows.push_back(std::move(rv));
    }
    return rep;
}

int exit_status(const VerificationReport &report) noexcept { return report.ok() ? 0 : 1; }

// Output ------------------------------------------------------------------------

std::string to_csv(const std::vector<DatasetRow> &rows, const SweepConfig &config, bool with_sampled) {
    std::ostringstream os;
    os << "# varbound version=" << kVersion << " seed=" << config.seed << " config_hash=" << hex64(config.hash())
       << '\n';
    auto header = csv_header();
    if (!with_sampled) {
        header.resize(2 + kColumnCount);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        os << (i ? "," : "") << header[i];
    }
    os << '\n';
    auto cell = [&](const std::optional<double> &v) {
        os << ',';
        if (v) {
            os << format_double(*v);
        }
    };
    for (const auto &r : rows) {
        os << r.j << ',' << format_double(r.theta);
        for (const auto &v : r.ideal) {
            cell(v);
        }
        if (with_sampled) {
            for (const auto &v : r.sampled) {
                cell(v);
            }
            for (const auto &v : r.sigma) {
                cell(v);
            }
        }
        os << '\n';
    }
    return os.str();
}

namespace {

json optional_json(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }

json values_json(const ValueArray &a) {
    json o = json::object();
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        o[std::string(kColumnNames[c])] = optional_json(a[c]);
    }
    return o;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json cvector_json(std::span<const Complex> v) {
    json a = json::array();
    for (const auto &z : v) {
        a.push_back(complex_json(z));
    }
    return a;
}

json matrix_json(const CMatrix &m) {
    json a = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        a.push_back(cvector_json(m.row(r)));
    }
    return a;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bound_json(const BoundResult &b) {
    json o{{"relation", relation_name(b.relation)},
           {"direction", b.direction == Direction::Lower ? "lower" : "upper"},
           {"lhs", b.lhs},
           {"rhs", finite_or_null(b.rhs)},
           {"slack", finite_or_null(b.slack)},
           {"satisfied", b.satisfied},
           {"tight", b.tight()},
           {"defined", b.defined}};
    if (!b.defined) {
        o["reason"] = b.undefined_reason;
    }
    if (b.basis_terms) {
        const auto &t = *b.basis_terms;
        o["basis_terms"] = {{"C", cvector_json(t.c)},
                            {"D", cvector_json(t.d)},
                            {"E", cvector_json(t.e)},
                            {"F", cvector_json(t.f)},
                            {"G", cvector_json(t.g)}};
    }
    if (b.fidelity_terms) {
        const auto &t = *b.fidelity_terms;
        o["fidelity_terms"] = {{"a", t.a_values},          {"b", t.b_values},          {"a_shifted", t.a_shifted},
                               {"b_shifted", t.b_shifted}, {"fidelity_a", t.fidelity_a}, {"fidelity_b", t.fidelity_b}};
    }
    return o;
}

json optimization_json(const OptimizationResult &r) {
    json finals = json::array();
    for (const auto &t : r.trace.best_values) {
        finals.push_back(t.back());
    }
    return {{"best_value", r.best_value},
            {"computational_value", r.computational_value},
            {"winner", r.trace.winner},
            {"initial_values", r.trace.initial_values},
            {"restart_best", finals},
            {"basis", matrix_json(r.basis.as_matrix())}};
}

json row_json(const DatasetRow &r, bool with_sampled) {
    json o{{"j", r.j}, {"theta", r.theta}, {"ideal", values_json(r.ideal)}};
    if (!r.error.empty()) {
        o["error"] = r.error;
    }
    if (!r.eq7_reason.empty()) {
        o["eq7_reason"] = r.eq7_reason;
    }
    if (with_sampled) {
        o["sampled"] = values_json(r.sampled);
        o["sigma"] = values_json(r.sigma);
    }
    json inter = json::object();
    if (r.state) {
        inter["state"] = cvector_json(r.state->amplitudes());
    }
    if (r.report) {
        const auto &rep = *r.report;
        json bounds = json::array();
        for (const auto &b : rep.results) {
            bounds.push_back(bound_json(b));
        }
        inter["report"] = {{"mean_a", rep.mean_a},
                           {"mean_b", rep.mean_b},
                           {"mean_commutator", rep.mean_commutator},
                           {"mean_anticommutator", rep.mean_anticommutator},
                           {"second_a", rep.second_a},
                           {"second_b", rep.second_b},
                           {"covariance", 0.5 * rep.mean_anticommutator - rep.mean_a * rep.mean_b},
                           {"bounds", bounds}};
    }
    if (r.eq2_opt) {
        inter["eq2_optimized"] = optimization_json(*r.eq2_opt);
    }
    if (r.eq5_opt) {
        inter["eq5_optimized"] = optimization_json(*r.eq5_opt);
    }
    if (!r.trials.empty()) {
        json trials = json::array();
        for (const auto &t : r.trials) {
            json counts = json::array();
            for (const auto &c : t.counts) {
                counts.push_back({{"setting", c.setting},
                                  {"outcome_values", c.outcome_values},
                                  {"probabilities", c.record.probabilities},
                                  {"counts", c.record.counts},
                                  {"seed", c.record.seed}});
            }
            trials.push_back({{"sampled", values_json(t.values)},
                              {"sigma", values_json(t.sigmas)},
                              {"settings", counts},
                              {"virtual_settings", t.virtual_settings}});
        }
        inter["trials"] = trials;
    }
    o["intermediates"] = inter;
    return o;
}

json report_json(const VerificationReport &rep) {
    json rows = json::array();
    for (const auto &rv : rep.rows) {
        auto list = [](const std::vector<CheckOutcome> &v) {
            json a = json::array();
            for (const auto &c : v) {
                json o{{"name", c.name}, {"status", status_name(c.status)}, {"slack", finite_or_null(c.slack)}};
                if (!c.detail.empty()) {
                    o["detail"] = c.detail;
                }
                a.push_back(o);
            }
            return a;
        };
        rows.push_back({{"j", rv.j},
                        {"relations", list(rv.relations)},
                        {"sampled", list(rv.sampled)},
                        {"max_abs_z", optional_json(rv.max_abs_z)}});
    }
    return {{"ok", rep.ok()},
            {"violations", rep.violations},
            {"worst_slack", rep.worst_slack},
            {"max_abs_z", rep.max_abs_z},
            {"sigma_k", rep.sigma_k},
            {"rows", rows}};
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) {
        throw Error(ErrorKind::IoError, "cannot write " + path.string());
    }
}

}  // namespace

std::string to_json(const SweepResult &result, std::string_view generated_at) {
    const auto &cfg = result.config;
    json rows = json::array();
    for (const auto &r : result.rows) {
        rows.push_back(row_json(r, true));
    }
    json doc{{"tool", "varbound"},
             {"version", kVersion},
             {"seed", cfg.seed},
             {"config_hash", hex64(cfg.hash())},
             {"generated_at", generated_at},
             {"config", semantic_config_text(cfg)},
             {"columns", kColumnNames},
             {"rows", rows},
             {"verification", report_json(result.report)}};
    return doc.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit(const SweepResult &result) {
    if (result.rows.empty()) {
        throw Error(ErrorKind::IoError, "nothing to write");
    }
    const auto &cfg = result.config;
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoError, "cannot create " + cfg.out_dir.string() + ": " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    if (cfg.formats.count(OutputFormat::Csv)) {
        written.push_back(cfg.out_dir / "sweep.csv");
        write_file(written.back(), to_csv(result.rows, cfg));
    }
    if (cfg.formats.count(OutputFormat::Json)) {
        written.push_back(cfg.out_dir / "sweep.json");
        write_file(written.back(), to_json(result, utc_timestamp()));
    }
    if (!result.dense.empty()) {
        written.push_back(cfg.out_dir / "dense.csv");
        write_file(written.back(), to_csv(result.dense, cfg, false));
    }
    return written;
}

// Loading -----------------------------------------------------------------------

namespace {

std::optional<double> parse_cell(const std::string &cell, const std::string &col) {
    if (cell.empty()) {
        return std::nullopt;
    }
    // strtod also understands nan/inf, which verification must see.
    char *end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) {
        config_error("malformed number '" + cell + "' in column " + col);
    }
    return v;
}

std::vector<DatasetRow> load_csv(const std::string &text) {
    std::vector<DatasetRow> rows;
    std::vector<std::string> header;
    for (const auto &raw : split(text, '\n')) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto cells = split(line, ',');
        if (header.empty()) {
            header = cells;
            if (header.size() < 2 || header[0] != "j" || header[1] != "theta") {
                config_error("CSV header must start with j,theta");
            }
            continue;
        }
        if (cells.size() != header.size()) {
            config_error("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                         std::to_string(header.size()));
        }
        DatasetRow row;
        row.j = static_cast<long>(parse_cell(cells[0], "j").value_or(0.0));
        row.theta = parse_cell(cells[1], "theta").value_or(0.0);
        for (std::size_t i = 2; i < cells.size(); ++i) {
            std::string name = header[i];
            ValueArray *target = &row.ideal;
            if (name.rfind("sampled_", 0) == 0) {
                target = &row.sampled;
                name = name.substr(8);
            } else if (name.rfind("sigma_", 0) == 0) {
                target = &row.sigma;
                name = name.substr(6);
            }
            const auto col = parse_column(name);
            if (!col) {
                config_error("unknown CSV column '" + header[i] + "'");
            }
            (*target)[column_index(*col)] = parse_cell(cells[i], header[i]);
        }
        rows.push_back(std::move(row));
    }
    if (header.empty()) {
        config_error("CSV has no header line");
    }
    return rows;
}

void read_values(const json &obj, ValueArray &out) {
    if (!obj.is_object()) {
        return;
    }
    for (std::size_t c = 0; c < kColumnCount; ++c) {
        const auto it = obj.find(std::string(kColumnNames[c]));
        if (it != obj.end() && it->is_number()) {
            out[c] = it->get<double>();
        }
    }
}

std::vector<DatasetRow> load_json(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception &e) {
        config_error(std::string("malformed JSON dataset: ") + e.what());
    }
    if (!doc.contains("rows") || !doc["rows"].is_array()) {
        config_error("JSON dataset has no rows array");
    }
    std::vector<DatasetRow> rows;
    for (const auto &r : doc["rows"]) {
        DatasetRow row;
        row.j = r.value("j", 0L);
        row.theta = r.value("theta", 0.0);
        if (r.contains("ideal")) {
            read_values(r["ideal"], row.ideal);
        }
        if (r.contains("sampled")) {
            read_values(r["sampled"], row.sampled);
        }
        if (r.contains("sigma")) {
            read_values(r["sigma"], row.sigma);
        }
        row.eq7_reason = r.value("eq7_reason", std::string{});
        row.error = r.value("error", std::string{});
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<DatasetRow> load_dataset(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        config_error("cannot read dataset " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        config_error("dataset " + path.string() + " is empty");
    }
    auto rows = text[first] == '{' ? load_json(text) : load_csv(text);
    if (rows.empty()) {
        config_error("dataset " + path.string() + " has no rows");
    }
    return rows;
}

}  // namespace varbound
