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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "varbound/basis_search.hpp"
#include "varbound/bounds.hpp"
#include "varbound/photonics.hpp"

namespace varbound {

/// Value columns of a dataset row, in output order.
enum class Column : std::size_t {
    MeanLx,
    MeanLy,
    MeanLz,
    MeanLp,
    VarLx,
    VarLy,
    LhsProd,
    RhsEq1,
    RhsEq2Canon,
    RhsEq2Opt,
    RhsEq3,
    LhsSum,
    RhsEq4,
    RhsEq5Canon,
    RhsEq5Opt,
    RhsEq6,
    RhsEq7,
};
inline constexpr std::size_t kColumnCount = 17;

std::string_view column_name(Column c) noexcept;
std::optional<Column> parse_column(std::string_view name) noexcept;
inline constexpr std::size_t column_index(Column c) noexcept { return static_cast<std::size_t>(c); }

using ValueArray = std::array<std::optional<double>, kColumnCount>;

/// "j,theta" followed by the ideal, sampled_ and sigma_ columns.
std::vector<std::string> csv_header();

enum class OutputFormat { Csv, Json };

struct SweepConfig {
    int theta_steps = 11;  ///< theta_j = j pi / (steps - 1)
    double counts = 10000.0;
    std::uint64_t seed = 7;
    int trials = 1;
    std::set<Relation> relations = {kAllRelations.begin(), kAllRelations.end()};
    bool optimize_basis = false;
    std::vector<double> pairing = {-1.0, 1.0, 0.0};
    int dense = 0;  ///< 0 disables the dense ideal curve
    std::filesystem::path out_dir = ".";
    std::set<OutputFormat> formats = {OutputFormat::Csv, OutputFormat::Json};
    OptimizerConfig optimizer{};
    double sigma_k = 5.0;

    /// Throws Error(ConfigError).
    void validate() const;
    std::vector<double> thetas() const;
    /// Canonical key=value text; parse_config_text(to_config_text()) round-trips.
    std::string to_config_text() const;
    /// FNV-1a 64 over the canonical text, excluding output-only keys.
    std::uint64_t hash() const;

    /// Applies one key=value entry (keys use '-' or '_'). Throws ConfigError.
    void set(std::string_view key, std::string_view value);
};

/// Flat key=value text; '#' starts a comment, blank lines are ignored.
SweepConfig parse_config_text(std::string_view text, SweepConfig base = {});
/// Throws ConfigError when the file cannot be read.
SweepConfig load_config(const std::filesystem::path &path, SweepConfig base = {});

/// theta = pi * k / n with k/n reduced first, so equal fractions give equal doubles.
double grid_theta(long k, long n);

struct SettingCounts {
    std::string setting;
    std::vector<double> outcome_values;
    CountRecord record;
};

struct TrialSample {
    ValueArray values;
    ValueArray sigmas;
    std::vector<SettingCounts> counts;  ///< the four optical settings
    std::size_t virtual_settings = 0;
};

struct DatasetRow {
    long j = 0;
    double theta = 0.0;
    ValueArray ideal;
    ValueArray sampled;
    ValueArray sigma;
    std::string eq7_reason;  ///< set when the ideal eq7 is undefined
    std::string error;       ///< set when the row failed
    // Intermediates, absent in rows loaded from CSV.
    std::optional<PureState> state;
    std::optional<UncertaintyReport> report;
    std::optional<OptimizationResult> eq2_opt;
    std::optional<OptimizationResult> eq5_opt;
    std::vector<TrialSample> trials;
};

enum class Status { Satisfied, Tight, Undefined, Violated };
std::string_view status_name(Status s) noexcept;

struct CheckOutcome {
    std::string name;  ///< relation or column checked
    Status status = Status::Satisfied;
    double slack = 0.0;
    std::string detail;
};

struct RowVerification {
    long j = 0;
    std::vector<CheckOutcome> relations;  ///< ideal bound checks
    std::vector<CheckOutcome> sampled;    ///< sampled-vs-ideal checks
    std::optional<double> max_abs_z;
};

struct VerificationReport {
    std::vector<RowVerification> rows;
    double worst_slack = 0.0;
    double max_abs_z = 0.0;
    std::size_t violations = 0;
    double sigma_k = 5.0;

    bool ok() const noexcept { return violations == 0; }
};

VerificationReport verify_rows(const std::vector<DatasetRow> &rows, double sigma_k = 5.0);

struct SweepResult {
    SweepConfig config;
    std::vector<DatasetRow> rows;
    std::vector<DatasetRow> dense;  ///< ideal only
    VerificationReport report;
};

/// Evaluates the ideal row for one theta.
DatasetRow ideal_row(const SweepConfig &config, long j, double theta);

SweepResult run_sweep(const SweepConfig &config);

/// Writes sweep.csv, sweep.json and dense.csv (when requested) into
/// config.out_dir and returns the paths written. Throws IoError.
std::vector<std::filesystem::path> emit(const SweepResult &result);

std::string to_csv(const std::vector<DatasetRow> &rows, const SweepConfig &config, bool with_sampled = true);
/// `generated_at` is the only field that varies between identical runs.
std::string to_json(const SweepResult &result, std::string_view generated_at);

/// Reads a CSV or JSON dataset. Throws ConfigError for unreadable or
/// malformed files.
std::vector<DatasetRow> load_dataset(const std::filesystem::path &path);

/// 0 = all checks pass, 1 = violation.
int exit_status(const VerificationReport &report) noexcept;

}  // namespace varbound
