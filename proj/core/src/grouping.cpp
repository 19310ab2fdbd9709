#include "relaynet/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace relaynet {

const char* to_string(SmcKind k) {
    switch (k) {
    case SmcKind::DirectT1: return "direct-T1";
    case SmcKind::DirectT2: return "direct-T2";
    case SmcKind::RelayPair: return "relay-pair";
    }
    return "?";
}

const char* to_string(GroupingAlgorithm a) { return a == GroupingAlgorithm::ESGA ? "ESGA" : "OCGA"; }

double semi_orthogonality(const CRow& v1, const CRow& v2) {
    if (v1.size() != v2.size()) throw InputError("semi-orthogonality of vectors with different lengths");
    const double n1 = v1.norm(), n2 = v2.norm();
    if (!(n1 > 0) || !(n2 > 0)) throw InputError("semi-orthogonality of a zero vector");
    // v1^H v2 for row vectors is sum conj(v1_i) v2_i.
    const cd ip = (v1.conjugate().array() * v2.array()).sum();
    return std::min(1.0, std::abs(ip.real()) / (n1 * n2));
}

namespace {

bool has_bit(std::uint32_t set, int tx) { return (set >> tx) & 1u; }

const CMatrix& tx_channel(const ChannelSet& ch, int n, int tx, int k) {
    return tx == kBs ? ch.bu(n, k) : ch.ru(n, tx - 1, k);
}

} // namespace

CandidateSet enumerate_smcs(const ChannelSet& ch, const ScenarioConfig& cfg, int n) {
    CandidateSet cs;
    cs.K = ch.K();
    cs.M = ch.M();
    cs.N_B = cfg.N_B;
    cs.N_R = cfg.N_R;
    cs.N_U = cfg.N_U;
    const int K = cs.K, M = cs.M, NU = cs.N_U;
    cs.q1_limit = std::min(cfg.N_B, K * std::min(cfg.N_B, NU) + M * std::min(cfg.N_B, cfg.N_R));
    cs.q2_limit = std::min(cfg.N_B, cfg.N_R);

    // Phase 1: SVD rows of every BS->UE and BS->RN channel.
    std::vector<std::vector<int>> ue_rows(K), rn_rows(M);
    for (int k = 0; k < K; ++k) {
        EffectiveChannel e = svd_receive_bf(ch.bu(n, k));
        for (Eigen::Index r = 0; r < e.rows.rows(); ++r) {
            ue_rows[k].push_back(static_cast<int>(cs.phase1_rows.size()));
            cs.phase1_rows.push_back(e.rows.row(r));
            cs.phase1_receiver.push_back(k);
        }
    }
    cs.phase1_direct_rows = static_cast<int>(cs.phase1_rows.size());
    for (int m = 0; m < M; ++m) {
        EffectiveChannel e = svd_receive_bf(ch.br(n, m));
        for (Eigen::Index r = 0; r < e.rows.rows(); ++r) {
            rn_rows[m].push_back(static_cast<int>(cs.phase1_rows.size()));
            cs.phase1_rows.push_back(e.rows.row(r));
            cs.phase1_receiver.push_back(K + m);
        }
    }
    cs.phase1_br_rows = static_cast<int>(cs.phase1_rows.size()) - cs.phase1_direct_rows;
    const std::size_t P = cs.phase1_rows.size();
    cs.phase1_semi.assign(P * P, 0.0);
    for (std::size_t a = 0; a < P; ++a)
        for (std::size_t b = 0; b < P; ++b)
            cs.phase1_semi[a * P + b] = a == b ? 1.0 : semi_orthogonality(cs.phase1_rows[a], cs.phase1_rows[b]);

    // Phase 2: one receive-BF per UE and activation set.
    const std::uint32_t sets = 1u << (M + 1);
    cs.activation.resize(sets);
    const int dims = K * NU;
    for (std::uint32_t set = 1; set < sets; ++set) {
        ActivationRows& a = cs.activation[set];
        a.active_set = set;
        a.dims = dims;
        a.rows.assign(static_cast<std::size_t>(M + 1), {});
        a.semi.assign(static_cast<std::size_t>(M + 1), {});
        for (int tx = 0; tx <= M; ++tx)
            if (has_bit(set, tx)) a.rows[tx].resize(static_cast<std::size_t>(dims));
        for (int k = 0; k < K; ++k) {
            std::vector<CMatrix> gram;
            std::vector<int> txs;
            for (int tx = 0; tx <= M; ++tx) {
                if (!has_bit(set, tx)) continue;
                const CMatrix& H = tx_channel(ch, n, tx, k);
                gram.push_back(H * H.adjoint());
                txs.push_back(tx);
            }
            const CMatrix R = joint_diagonalize(gram, cfg.jd_max_sweeps, cfg.jd_tol);
            for (int tx : txs) {
                const CMatrix eff = R * tx_channel(ch, n, tx, k);
                for (int i = 0; i < NU; ++i) a.rows[tx][static_cast<std::size_t>(k * NU + i)] = eff.row(i);
            }
        }
        for (int tx = 0; tx <= M; ++tx) {
            if (!has_bit(set, tx)) continue;
            auto& s = a.semi[tx];
            s.assign(static_cast<std::size_t>(dims * dims), 1.0);
            for (int d1 = 0; d1 < dims; ++d1)
                for (int d2 = 0; d2 < dims; ++d2)
                    if (d1 != d2)
                        s[static_cast<std::size_t>(d1 * dims + d2)] =
                            semi_orthogonality(a.rows[tx][static_cast<std::size_t>(d1)],
                                               a.rows[tx][static_cast<std::size_t>(d2)]);
        }
        ++cs.activation_sets;
    }

    // Candidates, ordered by (kind, ue, rn, activation set, dimension, row).
    for (int k = 0; k < K; ++k) {
        for (int r : ue_rows[k]) {
            Smc s;
            s.kind = SmcKind::DirectT1;
            s.ue = k;
            s.row_t1 = r;
            s.vector_t1 = cs.phase1_rows[r];
            s.norm_t1 = s.vector_t1.norm();
            cs.candidates.push_back(std::move(s));
        }
    }
    for (int k = 0; k < K; ++k) {
        for (std::uint32_t set = 1; set < sets; ++set) {
            if (!has_bit(set, kBs)) continue;
            for (int i = 0; i < NU; ++i) {
                Smc s;
                s.kind = SmcKind::DirectT2;
                s.ue = k;
                s.active_set = set;
                s.dim_t2 = i;
                s.tx_t2 = kBs;
                s.vector_t2 = cs.activation[set].rows[kBs][static_cast<std::size_t>(k * NU + i)];
                s.norm_t2 = s.vector_t2.norm();
                cs.candidates.push_back(std::move(s));
            }
        }
    }
    for (int k = 0; k < K; ++k) {
        for (int m = 0; m < M; ++m) {
            for (std::uint32_t set = 1; set < sets; ++set) {
                if (!has_bit(set, rn_tx(m))) continue;
                for (int i = 0; i < NU; ++i) {
                    for (int r : rn_rows[m]) {
                        Smc s;
                        s.kind = SmcKind::RelayPair;
                        s.ue = k;
                        s.rn = m;
                        s.active_set = set;
                        s.row_t1 = r;
                        s.dim_t2 = i;
                        s.tx_t2 = rn_tx(m);
                        s.vector_t1 = cs.phase1_rows[r];
                        s.vector_t2 = cs.activation[set].rows[rn_tx(m)][static_cast<std::size_t>(k * NU + i)];
                        s.norm_t1 = s.vector_t1.norm();
                        s.norm_t2 = s.vector_t2.norm();
                        cs.candidates.push_back(std::move(s));
                    }
                }
            }
        }
    }
    return cs;
}

std::vector<CandidateSet> enumerate_smcs(const ChannelSet& ch, const ScenarioConfig& cfg) {
    std::vector<CandidateSet> out;
    out.reserve(static_cast<std::size_t>(ch.N()));
    for (int n = 0; n < ch.N(); ++n) out.push_back(enumerate_smcs(ch, cfg, n));
    return out;
}

// ---------------------------------------------------------------------------

GroupState::GroupState(const CandidateSet& cs) : cs_(&cs) {}

int GroupState::tally_bs_t2() const { return has_bit(serving_, kBs) ? q2() : 0; }

int GroupState::tally_rn_t2(int m) const { return has_bit(serving_, rn_tx(m)) ? q2() : 0; }

int GroupState::tally_ue_t2(int k) const {
    int c = 0;
    for (int d : d2_)
        if (d / cs_->N_U == k) ++c;
    return c;
}

void GroupState::push(std::uint32_t c) {
    const Smc& s = cs_->candidates[c];
    members_.push_back(c);
    if (s.has_t1()) p1_.push_back(s.row_t1);
    if (s.has_t2()) {
        d2_.push_back(s.ue * cs_->N_U + s.dim_t2);
        d2_tx_.push_back(s.tx_t2);
        active_stack_.push_back(active_);
        serving_stack_.push_back(serving_);
        active_ = s.active_set;
        serving_ |= 1u << s.tx_t2;
    }
}

void GroupState::pop() {
    const Smc& s = cs_->candidates[members_.back()];
    members_.pop_back();
    if (s.has_t1()) p1_.pop_back();
    if (s.has_t2()) {
        d2_.pop_back();
        d2_tx_.pop_back();
        active_ = active_stack_.back();
        serving_ = serving_stack_.back();
        active_stack_.pop_back();
        serving_stack_.pop_back();
    }
}

bool smc_check(const CandidateSet& cs, const GroupState& g, std::uint32_t candidate, double alpha) {
    const Smc& s = cs.candidates[candidate];
    if (s.has_t1()) {
        if (g.q1() + 1 > cs.q1_limit || g.q1() + 1 > cs.N_B) return false;
        for (int p : g.phase1_rows()) {
            if (p == s.row_t1) return false;
            if (cs.semi1(s.row_t1, p) > alpha) return false;
        }
    }
    if (s.has_t2()) {
        const std::uint32_t set = s.active_set;
        if (g.active_set() != 0 && g.active_set() != set) return false;
        const int q2 = g.q2() + 1;
        if (q2 > cs.q2_limit) return false;
        const std::uint32_t serving = g.serving() | (1u << s.tx_t2);
        for (int tx = 0; tx <= cs.M; ++tx)
            if (has_bit(serving, tx) && q2 > (tx == kBs ? cs.N_B : cs.N_R)) return false;

        const int d = s.ue * cs.N_U + s.dim_t2;
        const auto& dims = g.phase2_dims();
        const auto& dtx = g.phase2_tx();
        int same_ue = 0, same_ue_same_kind = 0;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (dims[i] == d) return false;
            if (dims[i] / cs.N_U == s.ue) {
                ++same_ue;
                if ((dtx[i] == kBs) == (s.tx_t2 == kBs)) ++same_ue_same_kind;
            }
        }
        if (same_ue + 1 > cs.N_U) return false;
        const int per_kind_limit = std::min(s.tx_t2 == kBs ? cs.N_B : cs.N_R, cs.N_U);
        if (same_ue_same_kind + 1 > per_kind_limit) return false;

        for (int tx = 0; tx <= cs.M; ++tx) {
            if (!has_bit(serving, tx)) continue;
            if (has_bit(g.serving(), tx)) {
                for (int e : dims)
                    if (cs.semi2(set, tx, d, e) > alpha) return false;
            } else {
                // A newly serving transmitter stacks rows for every dimension.
                for (std::size_t i = 0; i < dims.size(); ++i) {
                    if (cs.semi2(set, tx, d, dims[i]) > alpha) return false;
                    for (std::size_t j = i + 1; j < dims.size(); ++j)
                        if (cs.semi2(set, tx, dims[i], dims[j]) > alpha) return false;
                }
            }
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

struct EsgaSearch {
    const CandidateSet& cs;
    double alpha;
    double budget;
    GroupState g;
    std::vector<MemberSet> out;

    void run(const std::vector<std::uint32_t>& feasible) {
        std::vector<std::uint32_t> child;
        for (std::size_t i = 0; i < feasible.size(); ++i) {
            g.push(feasible[i]);
            if (g.complete()) out.push_back(g.members());
            if (static_cast<double>(out.size()) > budget) {
                throw GroupBudgetError("ESGA exceeded its budget of " + std::to_string(static_cast<long long>(budget)) +
                                       " groups on one subcarrier");
            }
            child.clear();
            for (std::size_t j = i + 1; j < feasible.size(); ++j)
                if (smc_check(cs, g, feasible[j], alpha)) child.push_back(feasible[j]);
            if (!child.empty()) run(child);
            g.pop();
        }
    }
};

} // namespace

std::vector<MemberSet> esga(const CandidateSet& cs, double alpha, double budget) {
    EsgaSearch s{cs, alpha, budget, GroupState(cs), {}};
    std::vector<std::uint32_t> root;
    for (std::uint32_t c = 0; c < cs.size(); ++c)
        if (smc_check(cs, s.g, c, alpha)) root.push_back(c);
    s.run(root);
    return std::move(s.out);
}

std::vector<MemberSet> esga_trace(const CandidateSet& cs, double alpha, std::size_t limit) {
    std::vector<MemberSet> out;
    GroupState g(cs);
    std::vector<std::uint32_t> all(cs.size());
    std::iota(all.begin(), all.end(), 0u);
    auto rec = [&](auto&& self, const std::vector<std::uint32_t>& pool) -> void {
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!smc_check(cs, g, pool[i], alpha)) continue;
            g.push(pool[i]);
            if (g.complete()) out.push_back(g.members());
            if (out.size() > limit) throw GroupBudgetError("ESGA trace limit exceeded");
            std::vector<std::uint32_t> rest;
            rest.reserve(pool.size() - 1);
            for (std::size_t j = 0; j < pool.size(); ++j)
                if (j != i) rest.push_back(pool[j]);
            self(self, rest);
            g.pop();
        }
    };
    rec(rec, all);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Orthonormal bases of the group's selected vectors: phase 1 (BS) and one per
// phase-2 transmitter.
struct Bases {
    std::vector<CRow> t1;
    std::vector<std::vector<CRow>> t2;
};

void orthonormal_append(std::vector<CRow>& basis, const CRow& v) {
    CRow r = v;
    for (const auto& q : basis) r -= q.dot(r) * q;
    const double nr = r.norm();
    if (nr > 1e-12 * std::max(1.0, v.norm())) basis.push_back(r / nr);
}

double residual_norm(const std::vector<CRow>& basis, const CRow& v) {
    CRow r = v;
    for (const auto& q : basis) r -= q.dot(r) * q;
    return r.norm();
}

Bases make_bases(const CandidateSet& cs, const GroupState& g) {
    Bases b;
    b.t2.resize(static_cast<std::size_t>(cs.M + 1));
    for (std::uint32_t c : g.members()) {
        const Smc& s = cs.candidates[c];
        if (s.has_t1()) orthonormal_append(b.t1, s.vector_t1);
        if (s.has_t2()) orthonormal_append(b.t2[static_cast<std::size_t>(s.tx_t2)], s.vector_t2);
    }
    return b;
}

double noc_with(const CandidateSet& cs, const Bases& b, std::uint32_t candidate) {
    const Smc& s = cs.candidates[candidate];
    double v = std::numeric_limits<double>::infinity();
    if (s.has_t1()) v = std::min(v, residual_norm(b.t1, s.vector_t1));
    if (s.has_t2()) v = std::min(v, residual_norm(b.t2[static_cast<std::size_t>(s.tx_t2)], s.vector_t2));
    return v;
}

} // namespace

double noc(const CandidateSet& cs, const GroupState& g, std::uint32_t candidate) {
    return noc_with(cs, make_bases(cs, g), candidate);
}

std::vector<MemberSet> ocga(const CandidateSet& cs, double alpha) {
    // Phase-2 candidates only combine with their own activation set.
    std::vector<std::uint32_t> direct_t1;
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_set;
    for (std::uint32_t c = 0; c < cs.size(); ++c) {
        const Smc& s = cs.candidates[c];
        if (s.kind == SmcKind::DirectT1) direct_t1.push_back(c);
        else by_set[s.active_set].push_back(c);
    }
    std::vector<std::uint32_t> everything(cs.size());
    std::iota(everything.begin(), everything.end(), 0u);

    std::vector<MemberSet> out;
    std::set<MemberSet> seen;
    GroupState g(cs);
    std::vector<std::uint32_t> pool, next;
    for (std::uint32_t seed = 0; seed < cs.size(); ++seed) {
        if (!smc_check(cs, g, seed, alpha)) continue;
        g.push(seed);
        const Smc& s0 = cs.candidates[seed];
        pool.clear();
        if (s0.has_t2()) {
            const auto& bucket = by_set[s0.active_set];
            std::merge(direct_t1.begin(), direct_t1.end(), bucket.begin(), bucket.end(), std::back_inserter(pool));
        } else {
            pool = everything;
        }
        next.clear();
        for (std::uint32_t c : pool)
            if (c != seed && smc_check(cs, g, c, alpha)) next.push_back(c);
        pool.swap(next);
        while (!pool.empty()) {
            const Bases b = make_bases(cs, g);
            std::uint32_t best = pool.front();
            double best_noc = -1;
            for (std::uint32_t c : pool) {
                const double v = noc_with(cs, b, c);
                if (v > best_noc) {
                    best_noc = v;
                    best = c;
                }
            }
            g.push(best);
            next.clear();
            for (std::uint32_t c : pool)
                if (c != best && smc_check(cs, g, c, alpha)) next.push_back(c);
            pool.swap(next);
        }
        MemberSet m = g.members();
        std::sort(m.begin(), m.end());
        if (g.complete() && seen.insert(m).second) out.push_back(std::move(m));
        while (!g.empty()) g.pop();
    }
    return out;
}

// ---------------------------------------------------------------------------

SmcGroup materialize_group(const CandidateSet& cs, const MemberSet& members, const ScenarioConfig& cfg) {
    const double noise = cfg.delta_gamma * cfg.N0 * cfg.W;
    SmcGroup grp;
    grp.members = members;
    grp.gain_t1.assign(members.size(), 0.0);
    grp.gain_t2.assign(members.size(), 0.0);
    grp.tally_rn_t2.assign(static_cast<std::size_t>(cs.M), 0);
    grp.tally_ue_t2.assign(static_cast<std::size_t>(cs.K), 0);

    std::vector<std::size_t> t1_members, t2_members;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const Smc& s = cs.candidates[members[i]];
        if (s.has_t1()) t1_members.push_back(i);
        if (s.has_t2()) {
            t2_members.push_back(i);
            if (grp.active_set != 0 && grp.active_set != s.active_set)
                throw InfeasibleGroupError("mixed activation sets in one group");
            grp.active_set = s.active_set;
            ++grp.tally_ue_t2[static_cast<std::size_t>(s.ue)];
        }
    }
    grp.q1 = static_cast<int>(t1_members.size());
    grp.q2 = static_cast<int>(t2_members.size());
    grp.tally_bs_t1 = grp.q1;

    if (!t1_members.empty()) {
        CMatrix H(grp.q1, cs.N_B);
        for (int r = 0; r < grp.q1; ++r) H.row(r) = cs.candidates[members[t1_members[r]]].vector_t1;
        grp.zf_t1 = zfbf_phase1(H, noise, cfg.zf_cond_max);
        for (int r = 0; r < grp.q1; ++r) grp.gain_t1[t1_members[r]] = grp.zf_t1->cnr(r);
    }
    if (!t2_members.empty()) {
        const ActivationRows& act = cs.activation[grp.active_set];
        std::vector<Phase2Stack> stacks;
        std::vector<std::vector<std::size_t>> served_members;
        for (int tx = 0; tx <= cs.M; ++tx) {
            std::vector<std::size_t> served, others;
            for (std::size_t i : t2_members)
                (cs.candidates[members[i]].tx_t2 == tx ? served : others).push_back(i);
            if (served.empty()) continue;
            Phase2Stack st;
            st.transmitter = tx;
            st.served = static_cast<int>(served.size());
            st.antennas = tx == kBs ? cs.N_B : cs.N_R;
            st.rows.resize(grp.q2, tx == kBs ? cs.N_B : cs.N_R);
            int r = 0;
            for (auto list : {&served, &others}) {
                for (std::size_t i : *list) {
                    const Smc& s = cs.candidates[members[i]];
                    st.rows.row(r++) = act.rows[tx][static_cast<std::size_t>(s.ue * cs.N_U + s.dim_t2)];
                }
            }
            if (tx == kBs) grp.tally_bs_t2 = grp.q2;
            else grp.tally_rn_t2[static_cast<std::size_t>(tx - 1)] = grp.q2;
            stacks.push_back(std::move(st));
            served_members.push_back(std::move(served));
        }
        std::vector<ZfbfResult> zf = zfbf_phase2(stacks, noise, cfg.zf_cond_max);
        for (std::size_t s = 0; s < stacks.size(); ++s) {
            for (std::size_t r = 0; r < served_members[s].size(); ++r)
                grp.gain_t2[served_members[s][r]] = zf[s].cnr(static_cast<Eigen::Index>(r));
            grp.zf_t2.emplace_back(stacks[s].transmitter, std::move(zf[s]));
        }
    }
    return grp;
}

GroupTable materialize(const CandidateSet& cs, const std::vector<MemberSet>& groups, const ScenarioConfig& cfg) {
    GroupTable table;
    std::vector<double> t1, t2;
    std::vector<RelayGain> rl;
    for (const auto& members : groups) {
        SmcGroup g;
        try {
            g = materialize_group(cs, members, cfg);
        } catch (const InfeasibleGroupError&) {
            continue;
        }
        t1.clear();
        t2.clear();
        rl.clear();
        for (std::size_t i = 0; i < members.size(); ++i) {
            const Smc& s = cs.candidates[members[i]];
            switch (s.kind) {
            case SmcKind::DirectT1: t1.push_back(g.gain_t1[i]); break;
            case SmcKind::DirectT2: t2.push_back(g.gain_t2[i]); break;
            case SmcKind::RelayPair: rl.push_back({s.rn, g.gain_t1[i], g.gain_t2[i]}); break;
            }
        }
        table.add(t1, t2, rl, members);
    }
    return table;
}

// ---------------------------------------------------------------------------

namespace {

struct Profile {
    std::vector<double> t1, t2;                 // sorted descending
    std::vector<std::vector<RelayGain>> relay;  // per RN
    double score = 0;
};

Profile profile_of(const GroupTable& table, std::size_t j, int max_rn) {
    Profile p;
    p.t1.assign(table.t1(j).begin(), table.t1(j).end());
    p.t2.assign(table.t2(j).begin(), table.t2(j).end());
    std::sort(p.t1.rbegin(), p.t1.rend());
    std::sort(p.t2.rbegin(), p.t2.rend());
    p.relay.assign(static_cast<std::size_t>(max_rn + 1), {});
    for (const auto& r : table.relay(j)) p.relay[static_cast<std::size_t>(r.rn)].push_back(r);
    for (double g : p.t1) p.score += std::log(g);
    for (double g : p.t2) p.score += std::log(g);
    for (const auto& r : table.relay(j)) p.score += std::log(r.g_br) + std::log(r.g_ru);
    return p;
}

std::vector<int> shape_of(const Profile& p) {
    std::vector<int> key{static_cast<int>(p.t1.size()), static_cast<int>(p.t2.size())};
    for (const auto& v : p.relay) key.push_back(static_cast<int>(v.size()));
    return key;
}

int max_rn_of(const GroupTable& table) {
    int m = -1;
    for (std::size_t j = 0; j < table.size(); ++j)
        for (const auto& r : table.relay(j)) m = std::max(m, r.rn);
    return m;
}

bool relays_dominate(const std::vector<RelayGain>& b, const std::vector<RelayGain>& a) {
    // Needs a matching with every pair of `a` below some pair of `b`.
    if (a.size() != b.size()) return false;
    if (a.empty()) return true;
    if (a.size() > 6) return false;
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0u);
    do {
        bool ok = true;
        for (std::size_t i = 0; i < a.size() && ok; ++i)
            ok = b[perm[i]].g_br >= a[i].g_br && b[perm[i]].g_ru >= a[i].g_ru;
        if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

bool dominates(const Profile& b, const Profile& a) {
    for (std::size_t i = 0; i < a.t1.size(); ++i)
        if (b.t1[i] < a.t1[i]) return false;
    for (std::size_t i = 0; i < a.t2.size(); ++i)
        if (b.t2[i] < a.t2[i]) return false;
    for (std::size_t m = 0; m < a.relay.size(); ++m)
        if (!relays_dominate(b.relay[m], a.relay[m])) return false;
    return true;
}

} // namespace

GroupTable prune_groups(const GroupTable& table) {
    const std::size_t n = table.size();
    if (n <= 1) return table;

    std::vector<Profile> prof(n);
    std::map<std::vector<int>, std::vector<std::size_t>> classes;
    const int max_rn = max_rn_of(table);
    for (std::size_t j = 0; j < n; ++j) {
        prof[j] = profile_of(table, j, max_rn);
        classes[shape_of(prof[j])].push_back(j);
    }

    std::vector<char> keep(n, 0);
    for (auto& [key, idx] : classes) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return prof[a].score > prof[b].score; });
        std::vector<std::size_t> kept;
        for (std::size_t j : idx) {
            bool dominated = false;
            for (std::size_t k : kept)
                if (dominates(prof[k], prof[j])) {
                    dominated = true;
                    break;
                }
            if (!dominated) kept.push_back(j);
        }
        for (std::size_t k : kept) keep[k] = 1;
    }

    GroupTable out;
    for (std::size_t j = 0; j < n; ++j)
        if (keep[j]) out.add(table.t1(j), table.t2(j), table.relay(j), table.members(j));
    return out;
}

long find_covering_group(const GroupTable& table, const GroupTable& from, std::size_t j) {
    const auto& want = from.members(j);
    for (std::size_t k = 0; k < table.size(); ++k)
        if (table.members(k) == want) return static_cast<long>(k);
    const int max_rn = std::max(max_rn_of(table), max_rn_of(from));
    const Profile a = profile_of(from, j, max_rn);
    const std::vector<int> shape = shape_of(a);
    long best = -1;
    double best_score = 0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        const Profile b = profile_of(table, k, max_rn);
        if (shape_of(b) != shape || !dominates(b, a)) continue;
        if (best < 0 || b.score > best_score) {
            best = static_cast<long>(k);
            best_score = b.score;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

double GroupSet::mean_groups() const {
    if (stats.empty()) return 0;
    double s = 0;
    for (const auto& st : stats) s += static_cast<double>(st.kept_groups);
    return s / static_cast<double>(stats.size());
}

double GroupSet::mean_raw_groups() const {
    if (stats.empty()) return 0;
    double s = 0;
    for (const auto& st : stats) s += static_cast<double>(st.raw_groups);
    return s / static_cast<double>(stats.size());
}

GroupSet build_group_sets(const ChannelSet& ch, const ScenarioConfig& cfg, GroupingAlgorithm algo, bool prune) {
    GroupSet gs;
    for (int n = 0; n < ch.N(); ++n) {
        const CandidateSet cs = enumerate_smcs(ch, cfg, n);
        const std::vector<MemberSet> groups =
            algo == GroupingAlgorithm::ESGA ? esga(cs, cfg.alpha, cfg.esga_budget) : ocga(cs, cfg.alpha);
        GroupTable table = materialize(cs, groups, cfg);
        if (prune) table = prune_groups(table);
        gs.stats.push_back({cs.size(), groups.size(), table.size()});
        gs.per_subcarrier.push_back(std::move(table));
    }
    return gs;
}

} // namespace relaynet
