#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relaynet/beamform.hpp"
#include "relaynet/group_table.hpp"
#include "relaynet/scenario.hpp"

namespace relaynet {

class GroupBudgetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class SmcKind : std::uint8_t { DirectT1 = 0, DirectT2 = 1, RelayPair = 2 };
enum class GroupingAlgorithm { ESGA, OCGA };

const char* to_string(SmcKind k);
const char* to_string(GroupingAlgorithm a);

/// Transmitter ids: 0 is the BS, m + 1 is RN m. Activation sets are bitmasks
/// over transmitter ids.
constexpr int kBs = 0;
constexpr int rn_tx(int m) { return m + 1; }

struct Smc {
    SmcKind kind = SmcKind::DirectT1;
    int ue = 0;
    int rn = -1;
    std::uint32_t active_set = 0; // phase-2 activation set, 0 for direct-T1
    int row_t1 = -1;              // phase-1 row id within the subcarrier
    int dim_t2 = -1;              // phase-2 receive dimension at the UE
    int tx_t2 = -1;               // phase-2 transmitter
    CRow vector_t1;
    CRow vector_t2;
    double norm_t1 = 0;
    double norm_t2 = 0;

    bool has_t1() const { return kind != SmcKind::DirectT2; }
    bool has_t2() const { return kind != SmcKind::DirectT1; }
};

/// Phase-2 rows produced under one activation set.
struct ActivationRows {
    std::uint32_t active_set = 0;
    int dims = 0;                               // K * N_U receive dimensions
    std::vector<std::vector<CRow>> rows;        // [tx][dim], empty for inactive tx
    std::vector<std::vector<double>> semi;      // [tx][d1 * dims + d2]
};

/// Candidate list of one subcarrier block plus the lookup tables the
/// feasibility check needs.
struct CandidateSet {
    int K = 0, M = 0, N_B = 0, N_R = 0, N_U = 0;
    std::vector<Smc> candidates;

    std::vector<CRow> phase1_rows;     // row id -> vector
    std::vector<int> phase1_receiver;  // row id -> UE k, or K + m for RN m
    std::vector<double> phase1_semi;   // [r1 * P + r2]
    int phase1_direct_rows = 0;
    int phase1_br_rows = 0;

    std::vector<ActivationRows> activation; // indexed by active_set bitmask
    int activation_sets = 0;

    int q1_limit = 0; // phase-1 multiplexing bound
    int q2_limit = 0; // phase-2 multiplexing bound

    std::size_t size() const { return candidates.size(); }
    double semi1(int a, int b) const { return phase1_semi[static_cast<std::size_t>(a * phase1_rows.size() + b)]; }
    double semi2(std::uint32_t set, int tx, int d1, int d2) const {
        const auto& a = activation[set];
        return a.semi[static_cast<std::size_t>(tx)][static_cast<std::size_t>(d1 * a.dims + d2)];
    }
};

/// |Re(v1^H v2)| / (|v1| |v2|). Throws InputError on a zero vector.
double semi_orthogonality(const CRow& v1, const CRow& v2);

CandidateSet enumerate_smcs(const ChannelSet& ch, const ScenarioConfig& cfg, int n);
std::vector<CandidateSet> enumerate_smcs(const ChannelSet& ch, const ScenarioConfig& cfg);

/// Incremental group under construction, with the tallies of the check.
class GroupState {
  public:
    explicit GroupState(const CandidateSet& cs);

    const std::vector<std::uint32_t>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }

    int q1() const { return static_cast<int>(p1_.size()); }
    int q2() const { return static_cast<int>(d2_.size()); }
    std::uint32_t active_set() const { return active_; }
    std::uint32_t serving() const { return serving_; }
    /// Every transmitter of the phase-2 activation set serves an SMC.
    bool complete() const { return active_ == serving_; }
    const std::vector<int>& phase1_rows() const { return p1_; }
    const std::vector<int>& phase2_dims() const { return d2_; }
    const std::vector<int>& phase2_tx() const { return d2_tx_; }

    /// Occupancy: BS phase-1 stack, BS phase-2 stack and RN m phase-2 stack
    /// sizes (auxiliary rows included), UE k phase-2 receptions.
    int tally_bs_t1() const { return q1(); }
    int tally_bs_t2() const;
    int tally_rn_t2(int m) const;
    int tally_ue_t2(int k) const;

    void push(std::uint32_t c);
    void pop();

  private:
    const CandidateSet* cs_;
    std::vector<std::uint32_t> members_;
    std::vector<int> p1_, d2_, d2_tx_;
    std::vector<std::uint32_t> active_stack_, serving_stack_;
    std::uint32_t active_ = 0, serving_ = 0;
};

/// Feasibility of group + candidate: semi-orthogonality of every serving
/// transmitter's stack (auxiliary rows included), dimension limits, per-UE
/// reception limit and both multiplexing bounds. Never mutates the group.
bool smc_check(const CandidateSet& cs, const GroupState& g, std::uint32_t candidate, double alpha);

using MemberSet = std::vector<std::uint32_t>;

/// Every feasible complete group once, in first-emission order of the
/// recursive search. Throws GroupBudgetError beyond `budget` groups.
std::vector<MemberSet> esga(const CandidateSet& cs, double alpha, double budget = 1e6);

/// The recursion exactly as written, duplicates and ordering kept. Only for
/// small inputs.
std::vector<MemberSet> esga_trace(const CandidateSet& cs, double alpha, std::size_t limit = 100000);

/// One greedy group per initially feasible seed, extended by largest norm of
/// the orthogonal component. Duplicate and incomplete member sets are dropped.
std::vector<MemberSet> ocga(const CandidateSet& cs, double alpha);

/// Norm of the component of the candidate orthogonal to the group's selected
/// vectors of the same transmitter and phase; min over both hops for relays.
double noc(const CandidateSet& cs, const GroupState& g, std::uint32_t candidate);

/// Zero-forcing result of one group.
struct SmcGroup {
    MemberSet members;
    std::uint32_t active_set = 0;
    int q1 = 0, q2 = 0;
    int tally_bs_t1 = 0, tally_bs_t2 = 0;
    std::vector<int> tally_rn_t2, tally_ue_t2;
    std::optional<ZfbfResult> zf_t1;
    std::vector<std::pair<int, ZfbfResult>> zf_t2; // per serving transmitter
    std::vector<double> gain_t1, gain_t2;          // per member, 0 where unused
};

/// Builds the stacks and ZF matrices. Throws InfeasibleGroupError when a
/// stack is ill-conditioned.
SmcGroup materialize_group(const CandidateSet& cs, const MemberSet& members, const ScenarioConfig& cfg);

/// Drops ill-conditioned groups and keeps the CNRs of the rest.
GroupTable materialize(const CandidateSet& cs, const std::vector<MemberSet>& groups, const ScenarioConfig& cfg);

/// Removes groups dominated in every effective gain by another group with the
/// same transmitters. Ties keep the lower index. Never empties a table.
GroupTable prune_groups(const GroupTable& table);

/// Index in `table` of group j of `from`, matched by members, or else of the
/// best group with the same transmitters that dominates it. -1 when none.
long find_covering_group(const GroupTable& table, const GroupTable& from, std::size_t j);

struct GroupingStats {
    std::size_t candidates = 0;
    std::size_t raw_groups = 0;  // emitted by the algorithm
    std::size_t kept_groups = 0; // after conditioning and pruning
};

struct GroupSet {
    std::vector<GroupTable> per_subcarrier;
    std::vector<GroupingStats> stats;

    double mean_groups() const;
    double mean_raw_groups() const;
};

GroupSet build_group_sets(const ChannelSet& ch, const ScenarioConfig& cfg, GroupingAlgorithm algo,
                          bool prune = true);

/// Structured text dump of one subcarrier's groups.
std::string dump_groups_json(const CandidateSet& cs, const GroupTable& table, const ScenarioConfig& cfg, int n);

} // namespace relaynet
