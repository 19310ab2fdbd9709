#include <json.hpp>

#include "relaynet/grouping.hpp"
#include "relaynet/solver.hpp"

namespace relaynet {

using nlohmann::ordered_json;

std::string to_json(const SolveResult& r, bool with_trace) {
    ordered_json j;
    j["algorithm"] = to_string(r.algorithm);
    j["SE"] = r.se;
    j["ESE"] = r.ese;
    j["rate_sum"] = r.rate_sum;
    j["P_T"] = r.p_total;
    j["t"] = r.t;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["mu_clamps"] = r.mu_clamps;
    j["power_use"] = {{"bs_t1", r.used.bs_t1}, {"bs_t2", r.used.bs_t2}, {"rn", r.used.rn}};
    j["duals"] = {{"lambda_t1", r.duals.lambda_t1},
                  {"lambda_t2", r.duals.lambda_t2},
                  {"nu", r.duals.nu},
                  {"mu", r.duals.mu}};
    ordered_json subs = ordered_json::array();
    for (std::size_t n = 0; n < r.subcarriers.size(); ++n) {
        const auto& sc = r.subcarriers[n];
        ordered_json s;
        s["n"] = n;
        s["group"] = sc.group;
        s["members"] = sc.members;
        s["rate"] = sc.rate;
        ordered_json smcs = ordered_json::array();
        for (const auto& e : sc.smcs) {
            ordered_json x;
            x["kind"] = e.kind;
            if (e.rn >= 0) x["rn"] = e.rn;
            x["gain_t1"] = e.gain_t1;
            x["gain_t2"] = e.gain_t2;
            x["power_t1"] = e.power_t1;
            x["power_t2"] = e.power_t2;
            x["rate"] = e.rate;
            smcs.push_back(std::move(x));
        }
        s["smcs"] = std::move(smcs);
        subs.push_back(std::move(s));
    }
    j["subcarriers"] = std::move(subs);
    if (with_trace) {
        ordered_json tr = ordered_json::array();
        for (const auto& e : r.trace)
            tr.push_back({{"iteration", e.iteration},
                          {"lambda_t1", e.lambda_t1},
                          {"lambda_t2", e.lambda_t2},
                          {"nu", e.nu},
                          {"mu", e.mu},
                          {"objective", e.objective}});
        j["trace"] = std::move(tr);
    }
    return j.dump(2);
}

std::string dump_groups_json(const CandidateSet& cs, const GroupTable& table, const ScenarioConfig& cfg, int n) {
    ordered_json j;
    j["n"] = n;
    j["alpha"] = cfg.alpha;
    j["q1_limit"] = cs.q1_limit;
    j["q2_limit"] = cs.q2_limit;
    ordered_json cands = ordered_json::array();
    for (std::size_t i = 0; i < cs.candidates.size(); ++i) {
        const Smc& c = cs.candidates[i];
        ordered_json x;
        x["index"] = i;
        x["kind"] = to_string(c.kind);
        x["ue"] = c.ue;
        if (c.rn >= 0) x["rn"] = c.rn;
        x["active_set"] = c.active_set;
        if (c.has_t1()) {
            x["row_t1"] = c.row_t1;
            x["norm_t1"] = c.norm_t1;
        }
        if (c.has_t2()) {
            x["dim_t2"] = c.dim_t2;
            x["tx_t2"] = c.tx_t2;
            x["norm_t2"] = c.norm_t2;
        }
        cands.push_back(std::move(x));
    }
    j["candidates"] = std::move(cands);
    ordered_json groups = ordered_json::array();
    for (std::size_t g = 0; g < table.size(); ++g) {
        ordered_json x;
        x["members"] = table.members(g);
        x["gain_t1"] = std::vector<double>(table.t1(g).begin(), table.t1(g).end());
        x["gain_t2"] = std::vector<double>(table.t2(g).begin(), table.t2(g).end());
        ordered_json rl = ordered_json::array();
        for (const auto& r : table.relay(g)) rl.push_back({{"rn", r.rn}, {"g_br", r.g_br}, {"g_ru", r.g_ru}});
        x["relay"] = std::move(rl);
        groups.push_back(std::move(x));
    }
    j["groups"] = std::move(groups);
    return j.dump(2);
}

} // namespace relaynet
