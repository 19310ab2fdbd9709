#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "relaynet/harness.hpp"
#include "support.hpp"

using namespace relaynet;
using relaynet::test::scenario;

namespace {

SweepSpec small_spec() {
    SweepSpec s;
    s.axes = {{"P_max_B", {"10 dBm", "30 dBm"}}};
    s.samples = 3;
    s.seed = 17;
    return s;
}

std::string csv_of(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

} // namespace

TEST(Grid, RowMajorLastAxisFastest) {
    SweepSpec s;
    s.axes = {{"M", {"0", "2"}}, {"alpha", {"0.1", "0.2", "0.3"}}};
    std::vector<std::vector<std::string>> labels;
    const auto pts = expand_grid(s, scenario(), &labels);
    ASSERT_EQ(pts.size(), 6u);
    EXPECT_EQ(pts[0].M, 0);
    EXPECT_DOUBLE_EQ(pts[1].alpha, 0.2);
    EXPECT_EQ(pts[3].M, 2);
    EXPECT_DOUBLE_EQ(pts[5].alpha, 0.3);
    EXPECT_EQ(labels[4], (std::vector<std::string>{"2", "0.2"}));
}

TEST(Grid, UnitsAndValidation) {
    SweepSpec s;
    s.axes = {{"P_max_B", {"40 dBm"}}};
    EXPECT_DOUBLE_EQ(expand_grid(s, scenario()).front().P_max_B, 10.0);
    s.axes = {{"bogus", {"1"}}};
    EXPECT_THROW(s.validate(), InputError);
    s.axes = {{"M", {}}};
    EXPECT_THROW(s.validate(), InputError);
    s.axes.clear();
    s.samples = 0;
    EXPECT_THROW(s.validate(), InputError);
    s.samples = 1;
    s.axes = {{"K", {"0"}}};
    EXPECT_THROW(expand_grid(s, scenario()), InputError);
}

TEST(Stats, StandardError) {
    EXPECT_EQ(standard_error({}), 0.0);
    EXPECT_EQ(standard_error({3.0}), 0.0);
    // Sample variance of {1,2,3,4} is 5/3.
    EXPECT_NEAR(standard_error({1, 2, 3, 4}), std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_DOUBLE_EQ(mean_of({1, 2, 3, 4}), 2.5);
}

TEST(Seeds, PerSampleSeedsDiffer) {
    EXPECT_EQ(sample_seed(1, 0), sample_seed(1, 0));
    EXPECT_NE(sample_seed(1, 0), sample_seed(1, 1));
    EXPECT_NE(sample_seed(1, 0), sample_seed(2, 0));
}

TEST(Sweep, SingleSampleHasZeroError) {
    SweepSpec s;
    s.samples = 1;
    s.algorithms = {Algorithm::SEM};
    const SweepResult r = run_sweep(s, scenario());
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].count, 1);
    EXPECT_EQ(r.rows[0].se_se, 0.0);
    EXPECT_GT(r.rows[0].mean_se, 0.0);
}

TEST(Sweep, WorkerCountDoesNotChangeOutput) {
    SweepSpec s = small_spec();
    const std::string one = csv_of(run_sweep(s, scenario()));
    s.workers = 4;
    EXPECT_EQ(csv_of(run_sweep(s, scenario())), one);
}

TEST(Sweep, CsvHeader) {
    SweepSpec s = small_spec();
    s.samples = 1;
    const std::string csv = csv_of(run_sweep(s, scenario()));
    const std::string header = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(header, "P_max_B,algorithm,grouping,mean_SE,se_SE,mean_ESE,se_ESE,mean_groups_ESGA,mean_groups_OCGA,"
                      "gap,failures,samples,mean_iterations,converged_fraction");
    // Two grid points by three algorithms.
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Sweep, AggregatesMatchDumpedRecords) {
    SweepSpec s = small_spec();
    s.keep_records = true;
    const SweepResult r = run_sweep(s, scenario());
    std::ostringstream os;
    write_jsonl(os, r);
    std::istringstream in(os.str());
    std::map<std::pair<std::size_t, std::string>, std::vector<double>> se, ese;
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        ++lines;
        if (j["failed"].get<bool>()) continue;
        const auto key = std::make_pair(j["point"].get<std::size_t>(), j["algorithm"].get<std::string>());
        se[key].push_back(j["SE"].get<double>());
        ese[key].push_back(j["ESE"].get<double>());
    }
    EXPECT_EQ(lines, 2 * 3 * 3);
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto key = std::make_pair(i / 3, std::string(to_string(r.rows[i].algorithm)));
        EXPECT_EQ(mean_of(se[key]), r.rows[i].mean_se);
        EXPECT_EQ(mean_of(ese[key]), r.rows[i].mean_ese);
        EXPECT_EQ(standard_error(se[key]), r.rows[i].se_se);
    }
}

TEST(Sweep, PairedOrdering) {
    SweepSpec s;
    s.samples = 4;
    s.seed = 5;
    s.keep_records = true;
    const SweepResult r = run_sweep(s, scenario());
    ASSERT_EQ(r.records.size(), 12u);
    for (std::size_t i = 0; i < r.records.size(); i += 3) {
        const auto& sem = r.records[i];
        const auto& esem = r.records[i + 1];
        const auto& rg = r.records[i + 2];
        EXPECT_EQ(sem.seed, esem.seed);
        EXPECT_GE(sem.se, esem.se - 1e-6);
        EXPECT_GE(sem.se, rg.se - 1e-6);
        EXPECT_GE(esem.ese, sem.ese - 1e-6);
        EXPECT_GE(esem.ese, rg.ese - 1e-6);
        EXPECT_LT(sem.slackness, 1e-4);
        EXPECT_LT(sem.overshoot, 1e-6);
    }
}

TEST(Sweep, SelfGapIsZero) {
    SweepSpec s;
    s.samples = 1;
    s.algorithms = {Algorithm::SEM};
    s.grouping = GroupingAlgorithm::ESGA;
    const SweepResult r = run_sweep(s, scenario());
    ASSERT_TRUE(r.rows[0].has_gap);
    EXPECT_EQ(r.rows[0].gap, 0.0);
}

TEST(Sweep, BudgetFailuresAreCounted) {
    SweepSpec s;
    s.samples = 2;
    s.algorithms = {Algorithm::SEM};
    s.grouping = GroupingAlgorithm::ESGA;
    const SweepResult r = run_sweep(s, scenario({{"esga_budget", "2"}}));
    EXPECT_EQ(r.rows[0].failures, 2);
    EXPECT_EQ(r.rows[0].count, 0);
}

TEST(Compare, GapAndRatio) {
    const auto rows = compare_grouping(scenario(), {0.0, 0.3}, 2, 9);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.failures, 0);
        EXPECT_GT(r.count_ratio, 0.0);
        EXPECT_LE(r.count_ratio, 1.0);
        EXPECT_LE(r.gap, 1e-9);
    }
    EXPECT_LT(rows[1].count_ratio, 1.0);
    EXPECT_LE(rows[1].gap, 1e-9);
    std::ostringstream os;
    write_comparison_csv(os, rows);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
              "alpha,samples,failures,mean_groups_ESGA,mean_groups_OCGA,count_ratio,gap");
}
