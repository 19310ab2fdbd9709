#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "relaynet/config.hpp"
#include "relaynet/group_table.hpp"

namespace relaynet {

enum class Algorithm { SEM, ESEM, RGEPA };
const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

enum class StepRule {
    Exact,       // line search: each price makes the current selection's budget tight
    Adaptive,    // sign of the slack in log space, halved on every reversal
    Diminishing, // delta0 / sqrt(i) on the raw slack, delta0 = 1 / P_max
};

/// Step state of one price: log-space step, last slack sign and the number
/// of consecutive iterations with that sign.
struct PriceStep {
    double step = 1.0;
    int dir = 0;
    int run = 0;
};

struct DualState {
    double lambda_t1 = 0;
    double lambda_t2 = 0;
    std::vector<double> nu;
    double mu = 0;
    PriceStep step_t1, step_t2;
    std::vector<PriceStep> step_nu;
    PriceStep step_mu;       // relaxation weight toward the closed form
    bool mu_clamped = false; // the closed form for mu went negative

    static DualState initial(const ScenarioConfig& cfg);
};

/// Water levels 1 / ((xi * mu + 2 * price) * ln 2); +inf when the denominator
/// is zero.
struct WaterLevels {
    double t1 = 0;
    double t2 = 0;
    std::vector<double> rn;
};

WaterLevels water_levels(const DualState& d, const ScenarioConfig& cfg);

/// Powers of one group at unit selection, relay pairs already refined.
struct GroupPowers {
    std::vector<double> t1, t2, br, ru;
};

struct GroupRates {
    std::vector<double> t1, t2, relay;
    double sum = 0;
};

GroupPowers waterfill_primal(const DualState& d, const GroupTable& table, std::size_t j, const ScenarioConfig& cfg);
GroupPowers waterfill_levels(const WaterLevels& L, const GroupTable& table, std::size_t j);
GroupRates group_rates(const GroupTable& table, std::size_t j, const GroupPowers& p);

/// Index of the group with the largest summed rate; ties keep the lowest
/// index. Throws InputError on an empty table.
std::size_t select_group(const WaterLevels& L, const GroupTable& table);
std::size_t select_group(const DualState& d, const GroupTable& table, const ScenarioConfig& cfg);

/// Budget usage of an allocation.
struct PowerUse {
    double bs_t1 = 0;
    double bs_t2 = 0;
    std::vector<double> rn;
};

/// 1 / P_T for the given transmit powers.
double compute_t(const PowerUse& p, const ScenarioConfig& cfg);
double total_power(const PowerUse& p, const ScenarioConfig& cfg);

/// Projected price update for iteration i (1-based). Recomputes mu by its
/// closed form when `fractional`, otherwise leaves it at zero.
DualState update_duals(const DualState& d, const PowerUse& used, double t, double rate_sum, const ScenarioConfig& cfg,
                       int iteration, bool fractional, StepRule rule = StepRule::Adaptive);

struct SmcAllocation {
    std::string kind; // direct-T1, direct-T2, relay-pair
    int rn = -1;
    double gain_t1 = 0, gain_t2 = 0;
    double power_t1 = 0, power_t2 = 0;
    double rate = 0;
};

struct SubcarrierAllocation {
    long group = -1;
    std::vector<std::uint32_t> members;
    std::vector<SmcAllocation> smcs;
    double rate = 0;
};

struct TraceEntry {
    int iteration = 0;
    double lambda_t1 = 0, lambda_t2 = 0;
    std::vector<double> nu;
    double mu = 0;
    double objective = 0;
};

struct SolveResult {
    Algorithm algorithm = Algorithm::SEM;
    double se = 0;      // C_T / N, bits/s/Hz per subcarrier block
    double ese = 0;     // C_T / P_T
    double rate_sum = 0;
    double p_total = 0; // P_T, W
    double t = 1;
    PowerUse used;
    std::vector<SubcarrierAllocation> subcarriers;
    DualState duals;
    int iterations = 0;
    bool converged = false;
    int mu_clamps = 0;
    std::vector<TraceEntry> trace;
};

struct SolveOptions {
    StepRule rule = StepRule::Exact;
    bool keep_trace = true;
    bool polish = true;         // subgradient rules: exact recovery on the final selections
    bool pin_mu_and_t = false;  // run the fractional solver with mu = 0, t = 1
    std::vector<long> start;    // exact rule: extra starting selection, -1 entries use the default
};

using Groups = std::span<const GroupTable>;

SolveResult solve_sem(const ScenarioConfig& cfg, Groups groups, const SolveOptions& opt = {});
SolveResult solve_esem(const ScenarioConfig& cfg, Groups groups, const SolveOptions& opt = {});
SolveResult rg_epa(const ScenarioConfig& cfg, Groups groups, std::uint64_t seed);

/// Evaluate a fixed selection (group index per subcarrier, -1 for none) at
/// the given levels. Used for recovery and by tests.
SolveResult evaluate_selection(const ScenarioConfig& cfg, Groups groups, std::span<const long> selection,
                               const WaterLevels& L);

std::string to_json(const SolveResult& r, bool with_trace = true);

} // namespace relaynet
