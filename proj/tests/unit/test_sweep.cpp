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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "support.hpp"
#include "varbound/error.hpp"
#include "varbound/sweep.hpp"

namespace varbound {
namespace {

namespace fs = std::filesystem;

std::size_t idx(Column c) { return column_index(c); }

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) {
        out.push_back(l);
    }
    return out;
}

std::size_t cells(const std::string &line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

fs::path temp_dir(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("varbound_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const SweepResult &default_sweep() {
    static const SweepResult r = run_sweep(SweepConfig{});
    return r;
}

TEST(Config, ParseAndRoundTrip) {
    const SweepConfig c = parse_config_text(
        "# comment\n theta_steps = 5\ncounts=2000\nseed=11\ntrials=3\noptimize-basis=true\n"
        "pairing=1,-1,0\ndense=20\nout=/tmp/x\nformat=csv\nrelations=eq1,eq7\nrestarts=4\n");
    EXPECT_EQ(c.theta_steps, 5);
    EXPECT_EQ(c.counts, 2000.0);
    EXPECT_EQ(c.seed, 11u);
    EXPECT_EQ(c.trials, 3);
    EXPECT_TRUE(c.optimize_basis);
    EXPECT_EQ(c.pairing, (std::vector<double>{1.0, -1.0, 0.0}));
    EXPECT_EQ(c.dense, 20);
    EXPECT_EQ(c.out_dir, fs::path("/tmp/x"));
    EXPECT_EQ(c.formats, std::set<OutputFormat>{OutputFormat::Csv});
    EXPECT_EQ(c.relations, (std::set<Relation>{Relation::Eq1, Relation::Eq7}));
    EXPECT_EQ(c.optimizer.restarts, 4);
    const SweepConfig back = parse_config_text(c.to_config_text());
    EXPECT_EQ(back.to_config_text(), c.to_config_text());
    EXPECT_EQ(back.hash(), c.hash());
}

TEST(Config, Errors) {
    auto kind_of = [](const std::string &text) {
        try {
            parse_config_text(text).validate();
        } catch (const Error &e) {
            return e.kind();
        }
        return ErrorKind::InternalConsistency;
    };
    EXPECT_EQ(kind_of("bogus=1"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("counts=abc"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("no equals sign"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("trials=0"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("counts=0"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("theta-steps=0"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("pairing=1,1,0"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("shrink=1.5"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("format=xml"), ErrorKind::ConfigError);
    try {
        load_config("/nonexistent/varbound.conf");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    }
}

TEST(Config, HashIgnoresOutputLocation) {
    SweepConfig a;
    SweepConfig b;
    b.out_dir = "/elsewhere";
    b.formats = {OutputFormat::Json};
    EXPECT_EQ(a.hash(), b.hash());
    b.seed = 8;
    EXPECT_NE(a.hash(), b.hash());
}

TEST(Grid, SharedFractionsGiveIdenticalThetas) {
    EXPECT_EQ(grid_theta(1, 10), grid_theta(20, 200));
    EXPECT_EQ(grid_theta(3, 10), grid_theta(60, 200));
    EXPECT_EQ(grid_theta(10, 10), std::numbers::pi);
    EXPECT_EQ(grid_theta(0, 7), 0.0);
    const auto t = SweepConfig{}.thetas();
    ASSERT_EQ(t.size(), 11u);
    EXPECT_NEAR(t[1], std::numbers::pi / 10.0, 1e-16);
}

TEST(Sweep, DefaultRunHasElevenVerifiedRows) {
    const SweepResult &r = default_sweep();
    ASSERT_EQ(r.rows.size(), 11u);
    for (std::size_t j = 0; j < 11; ++j) {
        EXPECT_EQ(r.rows[j].j, static_cast<long>(j));
        EXPECT_TRUE(r.rows[j].error.empty()) << r.rows[j].error;
    }
    EXPECT_TRUE(r.report.ok());
    EXPECT_EQ(exit_status(r.report), 0);
    const DatasetRow &row0 = r.rows[0];
    EXPECT_NEAR(*row0.ideal[idx(Column::LhsSum)], 1.0, 1e-12);
    EXPECT_NEAR(*row0.ideal[idx(Column::RhsEq7)], 1.0, 1e-12);
    EXPECT_NEAR(*row0.ideal[idx(Column::LhsProd)] - *row0.ideal[idx(Column::RhsEq1)], 0.0, 1e-12);
    EXPECT_FALSE(row0.ideal[idx(Column::RhsEq2Opt)].has_value());
}

TEST(Sweep, IdealColumnsMatchOracle) {
    const SweepResult &r = default_sweep();
    for (const auto &o : testing::kOracle) {
        const auto &v = r.rows[static_cast<std::size_t>(o.j)].ideal;
        EXPECT_NEAR(*v[idx(Column::MeanLx)], o.mean_lx, 1e-12);
        EXPECT_NEAR(*v[idx(Column::MeanLz)], o.mean_lz, 1e-12);
        EXPECT_NEAR(*v[idx(Column::RhsEq3)], o.rhs_eq3, 1e-12);
        EXPECT_NEAR(*v[idx(Column::RhsEq5Canon)], o.rhs_eq5_canon, 1e-12);
        EXPECT_NEAR(*v[idx(Column::RhsEq7)], o.rhs_eq7, 1e-12);
        EXPECT_NEAR(*v[idx(Column::MeanLy)], 0.0, 1e-12);
        EXPECT_NEAR(*v[idx(Column::MeanLp)], 0.0, 1e-12);
    }
}

TEST(Sweep, SampledPoleMatchesReverseAnchor) {
    const DatasetRow &row0 = default_sweep().rows[0];
    for (Column c : {Column::LhsSum, Column::RhsEq7}) {
        const double s = *row0.sampled[idx(c)];
        const double sig = *row0.sigma[idx(c)];
        EXPECT_LE(std::abs(s - 1.0), 3.0 * sig);
        EXPECT_GE(sig, 0.005);
        EXPECT_LE(sig, 0.03);
    }
}

TEST(Sweep, SeedDeterminism) {
    SweepConfig c;
    c.theta_steps = 3;
    const SweepResult a = run_sweep(c);
    const SweepResult b = run_sweep(c);
    EXPECT_EQ(to_json(a, "T"), to_json(b, "T"));
    EXPECT_EQ(to_csv(a.rows, c), to_csv(b.rows, c));
    c.seed = 8;
    EXPECT_NE(to_csv(run_sweep(c).rows, c), to_csv(a.rows, a.config));
}

TEST(Sweep, TrialsAverageAndShrinkSigma) {
    SweepConfig c;
    c.theta_steps = 3;
    c.trials = 4;
    const SweepResult r = run_sweep(c);
    const DatasetRow &row = r.rows[1];
    ASSERT_EQ(row.trials.size(), 4u);
    const std::size_t k = idx(Column::MeanLx);
    double mean = 0.0;
    double sig = 0.0;
    for (const auto &t : row.trials) {
        mean += *t.values[k] / 4.0;
        sig += *t.sigmas[k] / 4.0;
    }
    EXPECT_NEAR(*row.sampled[k], mean, 1e-15);
    EXPECT_NEAR(*row.sigma[k], sig / 2.0, 1e-15);
    EXPECT_TRUE(r.report.ok());
}

TEST(Sweep, RelationSubsetLeavesOtherColumnsEmpty) {
    SweepConfig c;
    c.theta_steps = 2;
    c.relations = {Relation::Eq1};
    const SweepResult r = run_sweep(c);
    EXPECT_TRUE(r.rows[0].ideal[idx(Column::RhsEq1)].has_value());
    EXPECT_FALSE(r.rows[0].ideal[idx(Column::RhsEq3)].has_value());
    EXPECT_FALSE(r.rows[0].sampled[idx(Column::RhsEq2Canon)].has_value());
    EXPECT_TRUE(r.rows[0].sampled[idx(Column::LhsProd)].has_value());
}

TEST(Sweep, OptimizedColumnsWhenRequested) {
    SweepConfig c;
    c.theta_steps = 3;
    c.optimize_basis = true;
    c.optimizer.restarts = 4;
    const SweepResult r = run_sweep(c);
    for (const auto &row : r.rows) {
        const double canon = *row.ideal[idx(Column::RhsEq2Canon)];
        const double opt = *row.ideal[idx(Column::RhsEq2Opt)];
        EXPECT_GE(opt, canon - 1e-12);
        EXPECT_LE(opt, *row.ideal[idx(Column::LhsProd)] + 1e-9);
        EXPECT_TRUE(row.sampled[idx(Column::RhsEq5Opt)].has_value());
    }
    EXPECT_TRUE(r.report.ok());
}

TEST(Sweep, DenseCurveAgreesAtSharedThetas) {
    SweepConfig c;
    c.dense = 40;
    const SweepResult r = run_sweep(c);
    ASSERT_EQ(r.dense.size(), 41u);
    for (std::size_t j = 0; j < 11; ++j) {
        const DatasetRow &d = r.dense[4 * j];
        EXPECT_EQ(d.theta, r.rows[j].theta);
        for (std::size_t k = 0; k < kColumnCount; ++k) {
            EXPECT_EQ(d.ideal[k], r.rows[j].ideal[k]) << j << " " << k;
        }
        EXPECT_FALSE(d.sampled[0].has_value());
    }
}

TEST(Emit, CsvShapeAndHeader) {
    const SweepResult &r = default_sweep();
    const std::string csv = to_csv(r.rows, r.config);
    const auto lines = lines_of(csv);
    ASSERT_EQ(lines.size(), 13u);  // metadata comment, header, 11 rows
    EXPECT_EQ(lines[0].rfind("# varbound version=", 0), 0u);
    EXPECT_NE(lines[0].find("seed=7"), std::string::npos);
    EXPECT_NE(lines[0].find("config_hash="), std::string::npos);
    const auto header = csv_header();
    ASSERT_EQ(header.size(), 2u + 3u * kColumnCount);
    EXPECT_EQ(header[2], "mean_lx");
    EXPECT_EQ(header[18], "rhs_eq7");
    EXPECT_EQ(header[19], "sampled_mean_lx");
    EXPECT_EQ(header[36], "sigma_mean_lx");
    EXPECT_EQ(cells(lines[1]), header.size());
    for (std::size_t i = 2; i < lines.size(); ++i) {
        EXPECT_EQ(cells(lines[i]), header.size());
    }
}

TEST(Emit, JsonDeterministicApartFromTimestamp) {
    const SweepResult &r = default_sweep();
    const std::string a = to_json(r, "2026-01-01T00:00:00Z");
    const std::string b = to_json(run_sweep(SweepConfig{}), "2026-01-01T00:00:00Z");
    EXPECT_EQ(a, b);
    const auto doc = nlohmann::json::parse(a);
    EXPECT_EQ(doc["rows"].size(), 11u);
    EXPECT_EQ(doc["seed"], 7);
    EXPECT_TRUE(doc["rows"][0]["intermediates"].contains("report"));
    EXPECT_TRUE(doc["verification"]["ok"].get<bool>());
}

TEST(Emit, UndefinedReverseBoundIsEmptyCellAndNull) {
    SweepResult r;
    r.config.theta_steps = 1;
    DatasetRow row;
    row.ideal[idx(Column::LhsSum)] = 0.5;
    row.eq7_reason = "DegenerateVariance";
    r.rows.push_back(row);
    r.report = verify_rows(r.rows);
    const auto lines = lines_of(to_csv(r.rows, r.config));
    const auto doc = nlohmann::json::parse(to_json(r, "T"));
    EXPECT_TRUE(doc["rows"][0]["ideal"]["rhs_eq7"].is_null());
    EXPECT_EQ(doc["rows"][0]["eq7_reason"], "DegenerateVariance");
    EXPECT_EQ(cells(lines[2]), csv_header().size());
    EXPECT_TRUE(r.report.ok());
    bool saw = false;
    for (const auto &c : r.report.rows[0].relations) {
        if (c.name == "eq7") {
            EXPECT_EQ(c.status, Status::Undefined);
            EXPECT_EQ(c.detail, "DegenerateVariance");
            saw = true;
        }
    }
    EXPECT_TRUE(saw);
}

TEST(Emit, WritesFilesAndLoadsThemBack) {
    SweepConfig c;
    c.out_dir = temp_dir("emit");
    c.dense = 10;
    const SweepResult r = run_sweep(c);
    const auto files = emit(r);
    ASSERT_EQ(files.size(), 3u);
    for (const auto &f : files) {
        EXPECT_TRUE(fs::exists(f)) << f;
    }
    for (const char *name : {"sweep.csv", "sweep.json"}) {
        const auto rows = load_dataset(c.out_dir / name);
        ASSERT_EQ(rows.size(), 11u) << name;
        for (std::size_t j = 0; j < 11; ++j) {
            for (std::size_t k = 0; k < kColumnCount; ++k) {
                EXPECT_EQ(rows[j].ideal[k], r.rows[j].ideal[k]) << name;
                EXPECT_EQ(rows[j].sampled[k], r.rows[j].sampled[k]) << name;
                EXPECT_EQ(rows[j].sigma[k], r.rows[j].sigma[k]) << name;
            }
        }
        EXPECT_TRUE(verify_rows(rows).ok()) << name;
    }
    const auto dense = load_dataset(c.out_dir / "dense.csv");
    EXPECT_EQ(dense.size(), 11u);
    EXPECT_TRUE(verify_rows(dense).ok());
}

TEST(Verify, FlagsInjectedViolations) {
    std::vector<DatasetRow> rows = default_sweep().rows;
    for (auto &row : rows) {
        row.state.reset();
    }
    auto negated = rows;
    negated[3].ideal[idx(Column::RhsEq3)] = -*negated[3].ideal[idx(Column::RhsEq3)];
    EXPECT_EQ(exit_status(verify_rows(negated)), 1);

    auto inflated = rows;
    *inflated[2].ideal[idx(Column::RhsEq1)] += 0.1;
    EXPECT_FALSE(verify_rows(inflated).ok());

    auto shifted = rows;
    *shifted[4].sampled[idx(Column::MeanLz)] += 10.0 * *shifted[4].sigma[idx(Column::MeanLz)];
    EXPECT_FALSE(verify_rows(shifted).ok());

    auto nan_row = rows;
    nan_row[0].sampled[idx(Column::VarLx)] = std::nan("");
    EXPECT_FALSE(verify_rows(nan_row).ok());

    auto reverse = rows;
    *reverse[5].ideal[idx(Column::RhsEq7)] -= 0.5;
    EXPECT_FALSE(verify_rows(reverse).ok());
}

TEST(Verify, HundredSeedsPassAtDefaultSigmaK) {
    std::size_t failing = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SweepConfig c;
        c.seed = seed;
        const SweepResult r = run_sweep(c);
        failing += r.report.ok() ? 0 : 1;
    }
    EXPECT_EQ(failing, 0u);
}

TEST(Verify, TightStatusesAtPole) {
    const VerificationReport &rep = default_sweep().report;
    std::set<std::string> tight;
    for (const auto &c : rep.rows[0].relations) {
        if (c.status == Status::Tight) {
            tight.insert(c.name);
        }
    }
    EXPECT_EQ(tight, (std::set<std::string>{"eq1", "eq2_canon", "eq3", "eq5_canon", "eq6", "eq7"}));
}

TEST(LoadDataset, Errors) {
    const fs::path dir = temp_dir("load");
    auto kind_of = [&](const std::string &content) {
        const fs::path p = dir / "d.csv";
        std::ofstream(p) << content;
        try {
            load_dataset(p);
        } catch (const Error &e) {
            return e.kind();
        }
        return ErrorKind::InternalConsistency;
    };
    EXPECT_EQ(kind_of(""), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("a,b\n1,2\n"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("j,theta,bogus\n0,0,1\n"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("j,theta,mean_lx\n0,0\n"), ErrorKind::ConfigError);
    EXPECT_EQ(kind_of("{ not json"), ErrorKind::ConfigError);
    try {
        load_dataset(dir / "missing.csv");
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
    }
}

}  // namespace
}  // namespace varbound
