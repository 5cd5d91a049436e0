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


#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "varbound/error.hpp"
#include "varbound/hermitian.hpp"
#include "varbound/photonics.hpp"
#include "varbound/sweep.hpp"
#include "varbound/version.hpp"

namespace {

using namespace varbound;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

int error_exit_code(const Error &e) {
    switch (e.kind()) {
        case ErrorKind::ConfigError:
        case ErrorKind::InvalidConfig:
        case ErrorKind::IoError:
            return kExitConfig;
        default:
            return kExitViolation;
    }
}

void print_matrix(const std::string &title, const CMatrix &m) {
    std::cout << title << ":\n" << m.to_string(6) << "\n\n";
}

void print_summary(const VerificationReport &rep, bool verbose) {
    std::printf("rows checked: %zu, violations: %zu, worst slack: %.3g, max |z|: %.3g (k = %g)\n", rep.rows.size(),
                rep.violations, rep.worst_slack, rep.max_abs_z, rep.sigma_k);
    for (const auto &row : rep.rows) {
        for (const auto *list : {&row.relations, &row.sampled}) {
            for (const auto &c : *list) {
                if (verbose || c.status == Status::Violated) {
                    std::printf("  j=%ld %-16s %-9s slack=%.6g %s\n", row.j, c.name.c_str(),
                                std::string(status_name(c.status)).c_str(), c.slack, c.detail.c_str());
                }
            }
        }
    }
    std::printf("%s\n", rep.ok() ? "OK" : "VIOLATION");
}

struct SweepOptions {
    std::string config_path;
    int theta_steps = 0;
    double counts = 0;
    std::uint64_t seed = 0;
    int trials = 0;
    bool optimize_basis = false;
    std::string pairing;
    int dense = 0;
    std::string out;
    std::string format;
    std::string relations;
    int restarts = 0;
    int max_iters = 0;
    double sigma_k = 0;
    bool verbose = false;
};

int run_sweep_command(const SweepOptions &o, const CLI::App &cmd) {
    SweepConfig cfg;
    if (!o.config_path.empty()) {
        cfg = load_config(o.config_path);
    }
    // Explicit flags override the config file.
    auto given = [&](const char *name) { return cmd.count(name) > 0; };
    if (given("--theta-steps")) cfg.theta_steps = o.theta_steps;
    if (given("--counts")) cfg.counts = o.counts;
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--trials")) cfg.trials = o.trials;
    if (given("--optimize-basis")) cfg.optimize_basis = true;
    if (given("--pairing")) cfg.set("pairing", o.pairing);
    if (given("--dense")) cfg.dense = o.dense;
    if (given("--out")) cfg.out_dir = o.out;
    if (given("--format")) cfg.set("format", o.format);
    if (given("--relations")) cfg.set("relations", o.relations);
    if (given("--restarts")) cfg.optimizer.restarts = o.restarts;
    if (given("--max-iters")) cfg.optimizer.max_iters = o.max_iters;
    if (given("--sigma-k")) cfg.sigma_k = o.sigma_k;

    const SweepResult result = run_sweep(cfg);
    for (const auto &path : emit(result)) {
        std::printf("wrote %s\n", path.string().c_str());
    }
    for (const auto &row : result.rows) {
        if (!row.error.empty()) {
            std::fprintf(stderr, "row j=%ld failed: %s\n", row.j, row.error.c_str());
        }
    }
    print_summary(result.report, o.verbose);
    return exit_status(result.report);
}

int run_verify_command(const std::string &dataset, double sigma_k, bool verbose) {
    const auto rows = load_dataset(dataset);
    const VerificationReport rep = verify_rows(rows, sigma_k);
    print_summary(rep, verbose);
    return exit_status(rep);
}

int run_decompose_command(const std::string &name) {
    const auto &s = builtin_spin1();
    const Observable *obs = nullptr;
    if (name == "Lx") obs = &s.lx;
    else if (name == "Ly") obs = &s.ly;
    else if (name == "Lz") obs = &s.lz;
    else if (name == "Lp" || name == "L'") obs = &s.lp;
    else throw Error(ErrorKind::ConfigError, "unknown observable '" + name + "' (expected Lx, Ly, Lz or Lp)");

    if (obs == &s.lx) {
        const LxDecomposition d = decompose_lx();
        print_matrix("U", d.u);
        print_matrix("U1", d.u1);
        print_matrix("U2 (reference entries, singular)", d.u2_printed);
        print_matrix("U2 corrected = U3^dagger U U1^dagger", d.u2);
        print_matrix("U3", d.u3);
        std::printf("residual max|U - U3 U2 U1| = %.3e\n", d.residual);
        std::printf("U2 corrected unitary: %s\n\n", is_unitary(d.u2, 1e-12) ? "yes" : "no");
    } else {
        print_matrix("U = sum_i |i><m_i|", eigen_unitary(*obs));
    }

    const MeasurementSetting setting = builtin_setting(name == "L'" ? "Lp" : name);
    const ProjectiveMeasurement m = realize_measurement(setting, *obs);
    print_matrix("circuit V (detector ports x qutrit)", m.rows);
    std::printf("outcome eigenvalues:");
    for (double v : m.outcome_values) {
        std::printf(" %+.0f", v + 0.0);
    }
    std::printf("\n\n");

    const TwoLevelDecomposition t = two_level_decompose(eigen_unitary(*obs));
    std::printf("two-level factorization U = G_1 ... G_%zu D:\n", t.factors.size());
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
        print_matrix("G_" + std::to_string(i + 1) + " on modes (" + std::to_string(t.factors[i].p + 1) + "," +
                         std::to_string(t.factors[i].q + 1) + ")",
                     t.factors[i].block);
    }
    print_matrix("D", CMatrix::diagonal(t.phases));
    std::printf("two-level residual = %.3e\n", t.residual);
    return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Variance uncertainty relations: evaluation, photonic simulation and verification"};
    app.set_version_flag("--version", std::string(varbound::kVersion));
    app.require_subcommand(1);

    SweepOptions so;
    auto *sweep = app.add_subcommand("sweep", "Run the theta sweep and write datasets");
    sweep->add_option("--config", so.config_path, "key=value config file (flags override it)");
    sweep->add_option("--theta-steps", so.theta_steps, "Number of theta points on [0, pi]");
    sweep->add_option("--counts", so.counts, "Expected counts per measurement setting");
    sweep->add_option("--seed", so.seed, "Random seed");
    sweep->add_option("--trials", so.trials, "Sampled repetitions per theta");
    sweep->add_flag("--optimize-basis", so.optimize_basis, "Also maximize the basis-dependent bounds");
    sweep->add_option("--pairing", so.pairing, "Eigenvalue enumeration, e.g. -1,1,0");
    sweep->add_option("--dense", so.dense, "Also write K+1 ideal points to dense.csv");
    sweep->add_option("--out", so.out, "Output directory");
    sweep->add_option("--format", so.format, "csv, json or csv,json");
    sweep->add_option("--relations", so.relations, "Subset such as eq1,eq3,eq7 (default all)");
    sweep->add_option("--restarts", so.restarts, "Optimizer restarts");
    sweep->add_option("--max-iters", so.max_iters, "Optimizer iterations per restart");
    sweep->add_option("--sigma-k", so.sigma_k, "Sampled tolerance in sigmas");
    sweep->add_flag("-v,--verbose", so.verbose, "Print every check");

    std::string dataset;
    double verify_k = 5.0;
    bool verify_verbose = false;
    auto *verify = app.add_subcommand("verify", "Check a CSV or JSON dataset");
    verify->add_option("dataset", dataset, "Dataset file")->required();
    verify->add_option("--sigma-k", verify_k, "Sampled tolerance in sigmas");
    verify->add_flag("-v,--verbose", verify_verbose, "Print every check");

    std::string observable;
    auto *decompose = app.add_subcommand("decompose", "Print the measurement unitary and its factors");
    decompose->add_option("--observable", observable, "Lx, Ly, Lz or Lp")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sweep) {
            return run_sweep_command(so, *sweep);
        }
        if (*verify) {
            return run_verify_command(dataset, verify_k, verify_verbose);
        }
        return run_decompose_command(observable);
    } catch (const varbound::Error &e) {
        std::fprintf(stderr, "error [%s]: %s\n", std::string(varbound::error_kind_name(e.kind())).c_str(), e.what());
        return error_exit_code(e);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitViolation;
    }
}
