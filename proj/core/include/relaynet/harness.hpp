#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relaynet/config.hpp"
#include "relaynet/grouping.hpp"
#include "relaynet/solver.hpp"

namespace relaynet {

/// One swept config field. Values are text so unit suffixes (dBm, km) work.
struct SweepAxis {
    std::string name;
    std::vector<std::string> values;
};

struct SweepSpec {
    std::vector<SweepAxis> axes;
    int samples = 100;
    std::vector<Algorithm> algorithms{Algorithm::SEM, Algorithm::ESEM, Algorithm::RGEPA};
    GroupingAlgorithm grouping = GroupingAlgorithm::OCGA;
    bool reference = false; // also solve on ESGA groups for the optimality gap
    std::uint64_t seed = 1;
    int workers = 1;
    bool keep_records = false;

    /// Throws InputError for unknown axis names, empty axes or samples < 1.
    void validate() const;
};

/// Outcome of one algorithm on one sample at one grid point.
struct SampleRecord {
    std::size_t point = 0;
    int sample = 0;
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::SEM;
    bool failed = false;
    double se = 0, ese = 0;
    int iterations = 0;
    bool converged = false;
    double groups = 0;         // mean kept groups per subcarrier block
    double groups_ref = 0;     // same for the ESGA reference
    double se_ref = 0, ese_ref = 0;
    double slackness = 0;      // max price * slack / P_max
    double overshoot = 0;      // max (use - P_max) / P_max, 0 when feasible
};

struct PointSummary {
    std::vector<std::string> axis_values;
    Algorithm algorithm = Algorithm::SEM;
    int count = 0;
    int failures = 0;
    double mean_se = 0, se_se = 0;
    double mean_ese = 0, se_ese = 0;
    double mean_groups_esga = -1, mean_groups_ocga = -1; // negative when not computed
    bool has_gap = false;
    double gap = 0;
    double mean_iterations = 0;
    double converged_fraction = 0;
};

struct SweepResult {
    std::vector<std::string> axis_names;
    GroupingAlgorithm grouping = GroupingAlgorithm::OCGA;
    std::vector<PointSummary> rows; // grid point major, algorithm minor
    std::vector<SampleRecord> records;
};

/// Grid points in row-major order over the axes (last axis fastest).
std::vector<ScenarioConfig> expand_grid(const SweepSpec& spec, const ScenarioConfig& base,
                                        std::vector<std::vector<std::string>>* labels = nullptr);

SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& base);

/// Summaries from records, reduced in sample order.
std::vector<PointSummary> summarize(const SweepSpec& spec, const std::vector<std::vector<std::string>>& labels,
                                    const std::vector<SampleRecord>& records);

double mean_of(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);

struct GroupingComparison {
    double alpha = 0;
    int count = 0;
    int failures = 0;
    double gap = 0;           // mean SE on OCGA / mean SE on ESGA - 1
    double count_ratio = 0;   // mean OCGA groups / mean ESGA groups
    double mean_groups_esga = 0, mean_groups_ocga = 0;
};

std::vector<GroupingComparison> compare_grouping(const ScenarioConfig& base, const std::vector<double>& alphas,
                                                 int samples, std::uint64_t seed, int workers = 1);

void write_csv(std::ostream& os, const SweepResult& r);
void write_jsonl(std::ostream& os, const SweepResult& r);
void write_comparison_csv(std::ostream& os, const std::vector<GroupingComparison>& c);

/// Per-sample topology/channel seed shared by every grid point and algorithm.
std::uint64_t sample_seed(std::uint64_t root, int sample);

/// Largest price * slack / P_max and largest relative budget excess.
double slackness(const SolveResult& r, const ScenarioConfig& cfg);
double overshoot(const SolveResult& r, const ScenarioConfig& cfg);

} // namespace relaynet
